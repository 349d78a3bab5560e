"""Gaussian gate pulse"""

import math
from typing import List

from qdpulse.pulses.base import BasePulse, DEFAULT_CENTER_OVER_WIDTH

# exp(-36) < 1e-15: beyond this many widths the envelope is dropped
TRUNCATION_WIDTHS = 6.0


class GaussianPulse(BasePulse):
    """Gamma(theta) = Gamma_0 exp(-((theta - theta_0) / sigma_theta)^2)

    The exponent carries no factor 1/2, so the area is Gamma_0 sigma_theta sqrt(pi).
    """

    @property
    def center(self) -> float:
        """Peak position in theta"""
        if self.spec.center_theta is None:
            return DEFAULT_CENTER_OVER_WIDTH * self.spec.width_theta
        return self.spec.center_theta

    def envelope(self, theta: float) -> float:
        x = (theta - self.center) / self.spec.width_theta
        if abs(x) > TRUNCATION_WIDTHS:
            return 0.0
        return self.spec.gamma0 * math.exp(-x * x)

    @property
    def support_end(self) -> float:
        return self.center + TRUNCATION_WIDTHS * self.spec.width_theta

    def integral(self) -> float:
        return self.spec.gamma0 * self.spec.width_theta * math.sqrt(math.pi)

    def breakpoints(self) -> List[float]:
        return [self.support_end]
