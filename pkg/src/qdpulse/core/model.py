"""Four-dot fermionic model: operators, Hamiltonian, spectrum checks, timescales

Basis convention: a label ``b1b2b3b4`` has bit value 0 for an occupied dot and
1 for an empty one; dot 1 is the most significant bit, so ``"0110"`` is index 6.
Energies are in micro-electronvolts, times in nanoseconds.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from qdpulse.core import algebra
from qdpulse.core.algebra import ComplexMatrix
from qdpulse.core.errors import CouplingMismatch, DegenerateDenominator, TableMismatch

logger = logging.getLogger(__name__)

NUM_DOTS = 4
DIM = 2 ** NUM_DOTS

# hbar in micro-eV * ns (658.2119 micro-eV * ps)
HBAR_UEV_NS = 0.6582119

DEFAULT_JP_UEV = 200.0
DEFAULT_X = 0.05

# Qubit A = dots 1,2 ; qubit B = dots 3,4
QUBIT_DIMS = (4, 4)


def basis_index(label: str) -> int:
    """Index of a basis label such as ``"0110"``"""
    if len(label) != NUM_DOTS or any(ch not in "01" for ch in label):
        raise ValueError(f"Invalid basis label: {label!r}")
    return int(label, 2)


def basis_label(index: int) -> str:
    """Inverse of ``basis_index``

    Args:
        index: Basis index in 0..15

    Returns:
        Four-character label, e.g. ``"0110"`` for 6

    Raises:
        ValueError: if the index is out of range
    """
    if not 0 <= index < DIM:
        raise ValueError(f"Basis index out of range: {index}")
    return format(index, f"0{NUM_DOTS}b")


def basis_state(label: str) -> np.ndarray:
    """Unit column vector of a basis label

    Args:
        label: Basis label such as ``"1001"``

    Returns:
        Complex vector of length 16
    """
    vec = np.zeros(DIM, dtype=complex)
    vec[basis_index(label)] = 1.0
    return vec


def projector(label: str) -> ComplexMatrix:
    """Read-only projector |label><label|

    Args:
        label: Basis label such as ``"0110"``

    Returns:
        16 x 16 complex matrix
    """
    idx = basis_index(label)
    proj = np.zeros((DIM, DIM), dtype=complex)
    proj[idx, idx] = 1.0
    return algebra.frozen(proj)


def occupations(label: str) -> Tuple[int, ...]:
    """Occupation numbers (1 = electron present) of each dot"""
    basis_index(label)
    return tuple(1 - int(ch) for ch in label)


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the four-dot model (micro-eV)

    Attributes:
        eps: Dot energies epsilon_1..epsilon_4
        gamma: Intra-qubit hopping
        J: Direct inter-qubit Coulomb coupling
        Jp: Crossed inter-qubit Coulomb coupling
    """

    eps: Tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    gamma: float = DEFAULT_X * DEFAULT_JP_UEV
    J: float = 2 * DEFAULT_JP_UEV
    Jp: float = DEFAULT_JP_UEV

    def __post_init__(self):
        object.__setattr__(self, "eps", tuple(float(e) for e in self.eps))
        if len(self.eps) != NUM_DOTS:
            raise ValueError(f"eps needs {NUM_DOTS} entries, got {len(self.eps)}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.Jp < 0:
            raise ValueError(f"Jp must be >= 0, got {self.Jp}")

    @property
    def perturbative(self) -> bool:
        """True when J > J' >= 0"""
        return self.J > self.Jp >= 0

    @classmethod
    def defaults(cls) -> "ModelParams":
        """J' = 200, J = 400 and gamma = 0.05 J' micro-eV, zero dot energies"""
        return cls.from_ratio(DEFAULT_JP_UEV, DEFAULT_X)

    @classmethod
    def from_ratio(cls, jp: float, x: float = DEFAULT_X, j: Optional[float] = None) -> "ModelParams":
        """Parameterize gamma = x * J' with J = 2 J' unless given"""
        return cls(gamma=x * jp, J=2 * jp if j is None else j, Jp=jp)


@dataclass(frozen=True)
class OperatorSet:
    """Jordan-Wigner annihilators, creators and number operators (dim 16)"""

    d: Tuple[ComplexMatrix, ...]
    ddag: Tuple[ComplexMatrix, ...]
    n: Tuple[ComplexMatrix, ...]

    @property
    def total_number(self) -> ComplexMatrix:
        """N = n1 + n2 + n3 + n4"""
        return algebra.frozen(sum(self.n))


def build_jw_operators() -> OperatorSet:
    """Fermion-to-qubit mapping d_i = sigma_z^(i-1) (x) sigma_- (x) I^(4-i)"""
    d, ddag, n = [], [], []
    for i in range(NUM_DOTS):
        factors = [algebra.SIGMA_Z] * i + [algebra.SIGMA_MINUS] + [algebra.IDENTITY_2] * (NUM_DOTS - i - 1)
        op = reduce(algebra.kron, factors)
        op_dag = algebra.dagger(op)
        d.append(algebra.frozen(op))
        ddag.append(algebra.frozen(op_dag))
        n.append(algebra.frozen(op_dag @ op))
    return OperatorSet(d=tuple(d), ddag=tuple(ddag), n=tuple(n))


def onsite_hamiltonian(p: ModelParams, ops: OperatorSet) -> ComplexMatrix:
    """h0 + h_c, diagonal in the computational basis"""
    n1, n2, n3, n4 = ops.n
    h = sum(e * ni for e, ni in zip(p.eps, ops.n))
    h = h + p.J * (n1 @ n3 + n2 @ n4) + p.Jp * (n1 @ n4 + n2 @ n3)
    return algebra.frozen(h)


def hopping_operator(p: ModelParams, ops: OperatorSet) -> ComplexMatrix:
    """v = gamma (d1^dag d2 + d3^dag d4 + h.c.)"""
    d, dd = ops.d, ops.ddag
    hop = dd[0] @ d[1] + dd[2] @ d[3]
    return algebra.frozen(p.gamma * (hop + algebra.dagger(hop)))


def build_hamiltonian(p: ModelParams, ops: OperatorSet) -> ComplexMatrix:
    """H0 = sum_i eps_i n_i + v + J(n1 n3 + n2 n4) + J'(n1 n4 + n2 n3)"""
    return algebra.frozen(onsite_hamiltonian(p, ops) + hopping_operator(p, ops))


@dataclass(frozen=True)
class EnergyCluster:
    energy: float
    multiplicity: int
    labels: Tuple[str, ...] = ()


@dataclass(frozen=True)
class DegeneracyReport:
    clusters: Tuple[EnergyCluster, ...]

    def as_dict(self) -> Dict[float, int]:
        """Map cluster energy to multiplicity"""
        return {c.energy: c.multiplicity for c in self.clusters}


def cluster_values(values: Sequence[float], tol: float) -> List[Tuple[float, List[int]]]:
    """Group sorted values whose neighbours differ by at most ``tol``

    Returns:
        List of (representative energy, member positions)
    """
    order = np.argsort(values, kind="stable")
    groups: List[Tuple[float, List[int]]] = []
    for pos in order:
        value = float(values[pos])
        if groups and abs(value - values[groups[-1][1][-1]]) <= tol:
            groups[-1][1].append(int(pos))
        else:
            groups.append((value, [int(pos)]))
    return [(float(np.mean([values[i] for i in members])), members) for _, members in groups]


def expected_degeneracy_table(J: float, Jp: float, tol: float = 1e-10) -> Dict[float, int]:
    """gamma = 0 degeneracy table, merging coincident energies"""
    energies = [0.0] * 7 + [Jp] * 2 + [J] * 2 + [J + Jp] * 4 + [2 * J + 2 * Jp]
    return {energy: len(members) for energy, members in cluster_values(energies, tol)}


def verify_degeneracy_table(p: ModelParams, tol: float = 1e-10) -> DegeneracyReport:
    """Cluster the gamma = 0 spectrum and compare it with the degeneracy table

    Raises:
        ValueError: if gamma or eps are nonzero
        TableMismatch: if a cluster energy or multiplicity differs
    """
    if p.gamma != 0 or any(e != 0 for e in p.eps):
        raise ValueError("verify_degeneracy_table requires gamma = 0 and eps = (0, 0, 0, 0)")

    ops = build_jw_operators()
    spectrum = algebra.hermitian_eig(build_hamiltonian(p, ops))
    clusters = []
    for energy, members in cluster_values(spectrum.eigenvalues, tol):
        labels = tuple(sorted(
            basis_label(int(np.argmax(np.abs(spectrum.eigenvectors[:, m])))) for m in members
        ))
        clusters.append(EnergyCluster(energy=energy, multiplicity=len(members), labels=labels))
    report = DegeneracyReport(clusters=tuple(clusters))

    expected = sorted(expected_degeneracy_table(p.J, p.Jp, tol).items())
    if len(expected) != len(clusters):
        raise TableMismatch(
            f"expected {len(expected)} clusters, found {len(clusters)}: {report.as_dict()}"
        )
    for (energy, mult), cluster in zip(expected, clusters):
        if abs(cluster.energy - energy) > tol or cluster.multiplicity != mult:
            raise TableMismatch(
                f"cluster at {cluster.energy:g} x{cluster.multiplicity} does not match "
                f"{energy:g} x{mult}",
                cluster=(cluster.energy, cluster.multiplicity),
            )
    logger.debug(f"Degeneracy table verified: {report.as_dict()}")
    return report


@dataclass(frozen=True)
class CouplingReport:
    closed_form: float
    perturbative: float
    intermediates: Tuple[Tuple[str, float], ...] = field(default=())


COUPLING_RTOL = 1e-12


def effective_coupling_report(p: ModelParams, tol: float = 1e-12) -> CouplingReport:
    """Second-order coupling between |0110> and |1001>, two ways

    Raises:
        DegenerateDenominator: if J == J'
        CouplingMismatch: if the two evaluations disagree (eps = 0 only)
    """
    if p.J == p.Jp:
        raise DegenerateDenominator(f"J == J' == {p.J:g}: effective coupling undefined")

    ops = build_jw_operators()
    v = hopping_operator(p, ops)
    energies = np.real(np.diag(onsite_hamiltonian(p, ops)))
    a, b = basis_index("0110"), basis_index("1001")
    eps_ref = energies[a]

    total = 0.0
    contributions = []
    for i in range(DIM):
        numerator = v[a, i] * v[i, b]
        denom = eps_ref - energies[i]
        if abs(denom) <= tol:
            if abs(numerator) > tol:
                raise DegenerateDenominator(
                    f"intermediate {basis_label(i)} is degenerate with |0110> but couples"
                )
            continue
        term = numerator / denom
        if abs(term) > 0:
            contributions.append((basis_label(i), float(np.real(term))))
        total += term

    closed = -2.0 * p.gamma ** 2 / (p.J - p.Jp)
    perturbative = float(np.real(total))
    if all(e == 0 for e in p.eps):
        if abs(perturbative - closed) > COUPLING_RTOL * max(1.0, abs(closed)):
            raise CouplingMismatch(
                f"perturbative sum {perturbative!r} differs from closed form {closed!r}"
            )
    else:
        logger.debug("Nonzero dot energies: closed form not checked")
    return CouplingReport(closed_form=closed, perturbative=perturbative,
                          intermediates=tuple(contributions))


def effective_coupling(p: ModelParams) -> float:
    """Effective coupling Omega (micro-eV, signed)"""
    return effective_coupling_report(p).perturbative


def exact_doublet_coupling(p: ModelParams) -> float:
    """Half the exact splitting of the two eigenstates carrying |0110>/|1001> weight"""
    ops = build_jw_operators()
    spectrum = algebra.hermitian_eig(build_hamiltonian(p, ops))
    a, b = basis_index("0110"), basis_index("1001")
    weight = np.abs(spectrum.eigenvectors[a, :]) ** 2 + np.abs(spectrum.eigenvectors[b, :]) ** 2
    top = np.argsort(weight)[-2:]
    return float(abs(spectrum.eigenvalues[top[1]] - spectrum.eigenvalues[top[0]]) / 2)


@dataclass(frozen=True)
class DerivedScales:
    """Timescales derived from Omega

    Attributes:
        omega: Effective coupling (micro-eV, signed)
        period: T = 2 pi hbar / |Omega| (ns)
        tau: First maximally entangled time T / 8 (ns)
        theta_per_ns: |Omega| / hbar (1/ns)
    """

    omega: float
    period: float
    tau: float
    theta_per_ns: float

    @property
    def omega_abs(self) -> float:
        """|Omega| in micro-eV, the energy unit of theta"""
        return abs(self.omega)

    def theta_to_ns(self, theta: float) -> float:
        """Convert dimensionless time to nanoseconds"""
        return theta / self.theta_per_ns

    def ns_to_theta(self, t_ns: float) -> float:
        """Convert nanoseconds to dimensionless time"""
        return t_ns * self.theta_per_ns

    def rate_ghz_to_dimensionless(self, rate_ghz: float) -> float:
        """Gamma[1/ns] * hbar / |Omega|"""
        return rate_ghz * HBAR_UEV_NS / self.omega_abs


def derived_scales(p: ModelParams) -> DerivedScales:
    """Period, entanglement time and theta conversion

    Raises:
        DegenerateDenominator: if J == J' or the coupling vanishes
    """
    omega = effective_coupling(p)
    if omega == 0:
        raise DegenerateDenominator("effective coupling is zero (gamma = 0): no timescale")
    period = 2 * math.pi * HBAR_UEV_NS / abs(omega)
    return DerivedScales(
        omega=omega,
        period=period,
        tau=period / 8,
        theta_per_ns=abs(omega) / HBAR_UEV_NS,
    )
