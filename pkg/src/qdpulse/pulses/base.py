"""Abstract base class for gate pulse envelopes"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

DEFAULT_CENTER_OVER_WIDTH = 3.0


class PulseShape(str, Enum):
    SQUARE = "square"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class PulseSpec:
    """Deterministic pulse configuration

    Attributes:
        shape: Envelope family
        gamma0: Peak tunneling rate Gamma_0 (micro-eV, same units as gamma)
        width_theta: Pulse width sigma_theta = 2 pi p
        center_theta: Gaussian center theta_0; None selects 3 sigma_theta
    """

    shape: PulseShape
    gamma0: float
    width_theta: float
    center_theta: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "shape", PulseShape(self.shape))
        if self.gamma0 < 0:
            raise ValueError(f"gamma0 must be >= 0, got {self.gamma0}")
        if self.width_theta <= 0:
            raise ValueError(f"width_theta must be > 0, got {self.width_theta}")

    @property
    def p(self) -> float:
        """Width as a fraction of the period, sigma_theta / 2 pi"""
        return self.width_theta / (2 * math.pi)

    @classmethod
    def from_ratios(cls, shape, gamma0_over_gamma: float, p: float, gamma: float,
                    center_over_width: Optional[float] = None) -> "PulseSpec":
        """Spec from the dimensionless sweep coordinates

        Args:
            shape: Envelope shape
            gamma0_over_gamma: Peak rate over the bath rate
            p: Width as a fraction of one 2 pi cycle
            gamma: Bath rate in micro-eV
            center_over_width: Gaussian center in widths; default used when None

        Returns:
            Validated PulseSpec
        """
        width = 2 * math.pi * p
        center = None if center_over_width is None else center_over_width * width
        return cls(shape=shape, gamma0=gamma0_over_gamma * gamma, width_theta=width,
                   center_theta=center)


class BasePulse(ABC):
    """Abstract base for pulse envelope implementations"""

    def __init__(self, spec: PulseSpec):
        self.spec = spec

    @abstractmethod
    def envelope(self, theta: float) -> float:
        """Noise-free rate Gamma(theta) in micro-eV"""

    @property
    @abstractmethod
    def support_end(self) -> float:
        """Theta after which the pulse is considered over"""

    @abstractmethod
    def integral(self) -> float:
        """Envelope area over the whole theta axis"""

    def breakpoints(self) -> List[float]:
        """Thetas where the envelope is discontinuous"""
        return []
