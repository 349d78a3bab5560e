"""Entanglement and state-quality functionals"""

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional, Tuple

import numpy as np

from qdpulse.core import algebra
from qdpulse.core.algebra import ComplexMatrix
from qdpulse.core.errors import EmptyWindow, NotPositive
from qdpulse.core.model import DIM, QUBIT_DIMS, basis_index

if TYPE_CHECKING:
    from qdpulse.core.dynamics import Trajectory

logger = logging.getLogger(__name__)

ROUNDOFF_ULPS = 64


@dataclass(frozen=True)
class TargetState:
    """(|0110> + e^{i phi} |1001>) / sqrt(2)"""

    phi: float = math.pi / 2

    @property
    def vector(self) -> np.ndarray:
        """Target state as a 16-component vector"""
        vec = np.zeros(DIM, dtype=complex)
        vec[basis_index("0110")] = 1 / math.sqrt(2)
        vec[basis_index("1001")] = np.exp(1j * self.phi) / math.sqrt(2)
        return vec

    def density(self) -> ComplexMatrix:
        """Projector |phi><phi|"""
        vec = self.vector
        return np.outer(vec, vec.conj())


def fidelity(rho: ComplexMatrix, target: TargetState) -> float:
    """Fidelity to a pure target, sqrt(<phi|rho|phi>)"""
    vec = target.vector
    overlap = float(np.real(vec.conj() @ np.asarray(rho) @ vec))
    return min(1.0, math.sqrt(max(0.0, overlap)))


def uhlmann_fidelity(rho: ComplexMatrix, sigma: ComplexMatrix) -> float:
    """Tr sqrt(sqrt(rho) sigma sqrt(rho))

    Raises:
        NotPositive: if either input has an eigenvalue below -1e-7
    """
    root = algebra.hermitian_sqrt(rho)
    lowest = float(algebra.eigvalsh(sigma)[0])
    if lowest < -algebra.POSITIVITY_FLOOR:
        raise NotPositive(f"eigenvalue {lowest:.3e} below -{algebra.POSITIVITY_FLOOR:g}")
    inner = root @ np.asarray(sigma) @ root
    values = algebra.eigvalsh(inner)
    # Eigenvalues at round-off level are zero
    cutoff = ROUNDOFF_ULPS * np.finfo(float).eps * max(float(values[-1]), 0.0)
    values = np.where(values > cutoff, values, 0.0)
    return float(min(1.0, np.sum(np.sqrt(values))))


def negativity(rho: ComplexMatrix, transpose_second: bool = False) -> float:
    """Sum of |negative eigenvalues| of the partial transpose (Bell state: 0.5)

    The bipartition is qubit A = dots 1,2 against qubit B = dots 3,4.
    """
    dim_a, dim_b = QUBIT_DIMS
    if transpose_second:
        pt = algebra.partial_transpose_second(rho, dim_a, dim_b)
    else:
        pt = algebra.partial_transpose_first(rho, dim_a, dim_b)
    values = algebra.eigvalsh(pt)
    return float(np.sum(np.clip(-values, 0.0, None)))


def negativity_2x(rho: ComplexMatrix) -> float:
    """Doubled negativity scale (Bell state: 1.0)"""
    return 2.0 * negativity(rho)


def linear_entropy(rho: ComplexMatrix) -> float:
    """1 - Tr(rho^2)"""
    rho = np.asarray(rho)
    purity = float(np.real(np.sum(rho * rho.T)))
    return 1.0 - purity


def analytic_fidelity(theta: float) -> float:
    """sqrt([1 + sin(2 theta)] / 2) for the ideal two-level evolution"""
    return math.sqrt(max(0.0, (1.0 + math.sin(2.0 * theta)) / 2.0))


def closed_system_state(theta: float) -> np.ndarray:
    """cos(theta)|0110> + i sin(theta)|1001>"""
    vec = np.zeros(DIM, dtype=complex)
    vec[basis_index("0110")] = math.cos(theta)
    vec[basis_index("1001")] = 1j * math.sin(theta)
    return vec


def population(rho: ComplexMatrix, label: str) -> float:
    """Diagonal entry <label|rho|label>"""
    idx = basis_index(label)
    return float(np.real(np.asarray(rho)[idx, idx]))


def min_eigenvalue(rho: ComplexMatrix) -> float:
    """Smallest eigenvalue of the Hermitian part"""
    return float(algebra.eigvalsh(rho)[0])


@dataclass(frozen=True)
class SampleMetrics:
    fidelity: float
    negativity: float
    linear_entropy: float
    pop_0110: float
    trace_error: float
    min_eigenvalue: float


def sample_metrics(rho: ComplexMatrix, target: TargetState) -> SampleMetrics:
    """All per-sample metrics recorded along a trajectory"""
    return SampleMetrics(
        fidelity=fidelity(rho, target),
        negativity=negativity(rho),
        linear_entropy=linear_entropy(rho),
        pop_0110=population(rho, "0110"),
        trace_error=abs(algebra.trace(rho) - 1.0),
        min_eigenvalue=min_eigenvalue(rho),
    )


@dataclass(frozen=True)
class MaximaReport:
    """Trajectory maxima within a theta window"""

    window: Tuple[float, float]
    max_pop_0110: float
    theta_max_pop_0110: float
    max_fidelity: float
    theta_max_fidelity: float
    max_negativity: float
    theta_max_negativity: float


def _window_mask(thetas: np.ndarray, window: Optional[Tuple[float, float]]) -> np.ndarray:
    if window is None:
        return np.ones(len(thetas), dtype=bool)
    lo, hi = window
    mask = (thetas >= lo) & (thetas <= hi)
    if not mask.any():
        raise EmptyWindow(f"no samples in window [{lo:g}, {hi:g}]")
    return mask


def trajectory_maxima(traj: "Trajectory",
                      window: Optional[Tuple[float, float]] = None) -> MaximaReport:
    """Max pop_0110, fidelity and negativity with their theta locations

    Args:
        traj: Recorded trajectory
        window: Inclusive (theta_lo, theta_hi); None means the full trajectory

    Raises:
        EmptyWindow: if no sample falls inside the window
    """
    thetas = np.asarray(traj.thetas)
    mask = _window_mask(thetas, window)
    sel = thetas[mask]

    def peak(series) -> Tuple[float, float]:
        values = np.asarray(series)[mask]
        idx = int(np.argmax(values))
        return float(values[idx]), float(sel[idx])

    pop, pop_at = peak(traj.pop_0110)
    fid, fid_at = peak(traj.fidelity)
    neg, neg_at = peak(traj.negativity)
    return MaximaReport(
        window=(float(sel[0]), float(sel[-1])),
        max_pop_0110=pop, theta_max_pop_0110=pop_at,
        max_fidelity=fid, theta_max_fidelity=fid_at,
        max_negativity=neg, theta_max_negativity=neg_at,
    )


def period_maxima(traj: "Trajectory", series: str, theta_start: float,
                  period: float) -> List[float]:
    """Maximum of ``series`` in each complete window of length ``period``"""
    thetas = np.asarray(traj.thetas)
    values = np.asarray(getattr(traj, series))
    maxima = []
    lo = theta_start
    while lo + period <= thetas[-1] + 1e-12:
        mask = (thetas >= lo) & (thetas < lo + period)
        if mask.any():
            maxima.append(float(values[mask].max()))
        lo += period
    return maxima


def stationary_value(traj: "Trajectory", series: str, theta_start: float) -> float:
    """Mean of ``series`` over samples at or after ``theta_start``"""
    thetas = np.asarray(traj.thetas)
    mask = thetas >= theta_start
    if not mask.any():
        raise EmptyWindow(f"no samples after theta={theta_start:g}")
    return float(np.mean(np.asarray(getattr(traj, series))[mask]))
