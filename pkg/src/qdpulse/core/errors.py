"""Exception hierarchy shared by the library and the CLI"""

from typing import Optional, Tuple


class QdpulseError(Exception):
    """Base class for every error raised by qdpulse"""


class DimensionMismatch(QdpulseError):
    """Operand shapes are incompatible"""


class NotHermitian(QdpulseError):
    """Matrix fails the Hermiticity precondition"""


class NoConvergence(QdpulseError):
    """Iterative eigensolver exhausted its sweep budget"""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class NotPositive(QdpulseError):
    """Density matrix has an eigenvalue below the round-off floor"""


class TableMismatch(QdpulseError):
    """Spectrum clusters disagree with the gamma=0 degeneracy table"""

    def __init__(self, message: str, cluster: Optional[Tuple[float, int]] = None):
        super().__init__(message)
        self.cluster = cluster


class CouplingMismatch(QdpulseError):
    """Closed-form and perturbative effective couplings disagree"""


class DegenerateDenominator(QdpulseError):
    """Effective coupling undefined (J == J') or vanishing"""


class StepUnstable(QdpulseError):
    """Integration broke a density-matrix invariant"""

    def __init__(self, message: str, theta: float, drift: float,
                 coordinates: Optional[Tuple[float, float]] = None):
        super().__init__(message)
        self.theta = theta
        self.drift = drift
        self.coordinates = coordinates

    def with_coordinates(self, coordinates: Tuple[float, float]) -> "StepUnstable":
        """Return a copy tagged with sweep grid coordinates"""
        return StepUnstable(
            f"{self.args[0]} at grid point {coordinates}",
            theta=self.theta, drift=self.drift, coordinates=coordinates,
        )


class EmptyWindow(QdpulseError):
    """No trajectory samples fall inside the requested window"""


class ConfigInvalid(QdpulseError):
    """Configuration value or key rejected"""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
