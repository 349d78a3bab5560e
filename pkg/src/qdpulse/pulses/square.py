"""Rectangular gate pulse"""

from typing import List

from qdpulse.pulses.base import BasePulse


class SquarePulse(BasePulse):
    """Gamma(theta) = Gamma_0 on [0, sigma_theta), zero elsewhere"""

    def envelope(self, theta: float) -> float:
        if 0.0 <= theta < self.spec.width_theta:
            return self.spec.gamma0
        return 0.0

    @property
    def support_end(self) -> float:
        return self.spec.width_theta

    def integral(self) -> float:
        return self.spec.gamma0 * self.spec.width_theta

    def breakpoints(self) -> List[float]:
        return [self.spec.width_theta]
