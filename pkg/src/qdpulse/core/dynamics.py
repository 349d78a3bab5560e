"""Dimensionless Lindblad integration with gate-modulated charge injection

The generator in theta = |Omega| t / hbar reads

    d rho / d theta = -i [H0 / |Omega|, rho]
                      + Gamma(theta) / |Omega| * sum_n D[d_n^dag] rho
                      + sum_n D[C_n] rho,

with D[L] rho = L rho L^dag - {L^dag L, rho} / 2 and C_n = sqrt(Gamma_dph hbar / |Omega|) P_n.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from qdpulse.core import algebra
from qdpulse.core.algebra import ComplexMatrix
from qdpulse.core.errors import ConfigInvalid, StepUnstable
from qdpulse.core.metrics import TargetState, sample_metrics
from qdpulse.core.model import (
    DIM,
    NUM_DOTS,
    ModelParams,
    OperatorSet,
    basis_index,
    build_hamiltonian,
    build_jw_operators,
    derived_scales,
    projector,
)
from qdpulse.pulses.base import PulseSpec
from qdpulse.pulses.drive import drive_breakpoints, gamma_at, make_pulse
from qdpulse.pulses.noise import NoiseSpec, sample_noise_path

logger = logging.getLogger(__name__)

TWO_PI = 2 * math.pi
DEFAULT_DTHETA = TWO_PI * 2.5e-5
DEFAULT_RECORD_EVERY = 40
DEFAULT_THETA_MAX = 2 * TWO_PI
DEFAULT_CHANNELS = (1, 4)

TRACE_TOL = 1e-6
HERMITICITY_TOL = 1e-10
POSITIVITY_TOL = 1e-7

# Shorter constant-rate segments are cheaper as plain RK4 stages
PROPAGATOR_MIN_STEPS = 512

CSV_COLUMNS = (
    "theta",
    "theta_over_2pi",
    "gamma_pulse",
    "fidelity",
    "negativity",
    "linear_entropy",
    "pop_0110",
    "trace_error",
    "negativity_2x",
)

RateFunction = Callable[[float], float]


@dataclass(frozen=True)
class SimConfig:
    """Full input of one integration run"""

    params: ModelParams
    pulse: PulseSpec
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    dephasing_rate_ghz: float = 0.0
    theta_max: float = DEFAULT_THETA_MAX
    dtheta: float = DEFAULT_DTHETA
    initial_state: str = "1111"
    record_every: int = DEFAULT_RECORD_EVERY
    channels: Tuple[int, ...] = DEFAULT_CHANNELS
    store_rhos: bool = False
    target_phi: float = math.pi / 2

    def validate(self) -> None:
        """Raise ConfigInvalid on the first bad field"""
        if not self.dtheta > 0:
            raise ConfigInvalid("dynamics.dtheta", f"must be > 0, got {self.dtheta}")
        if not self.theta_max >= self.dtheta:
            raise ConfigInvalid("dynamics.theta_max", "must be >= dtheta")
        if self.record_every < 1:
            raise ConfigInvalid("dynamics.record_every", "must be >= 1")
        if self.dephasing_rate_ghz < 0:
            raise ConfigInvalid("dynamics.dephasing_ghz", "must be >= 0")
        try:
            basis_index(self.initial_state)
        except ValueError as e:
            raise ConfigInvalid("dynamics.initial_state", str(e))
        if not self.channels or any(c not in range(1, NUM_DOTS + 1) for c in self.channels):
            raise ConfigInvalid("dynamics.channels", f"dots must be in 1..{NUM_DOTS}")
        if len(set(self.channels)) != len(self.channels):
            raise ConfigInvalid("dynamics.channels", "duplicate dot")


@dataclass(frozen=True)
class CollapseSet:
    """Collapse operators of the dimensionless generator

    Attributes:
        injection: L_n = d_n^dag, scaled at run time by Gamma(theta) / |Omega|
        dephasing: C_n = sqrt(rate) P_n, constant in theta
        dephasing_rate: Dimensionless Gamma_dph hbar / |Omega|
        omega_abs: |Omega| in micro-eV
    """

    injection: Tuple[ComplexMatrix, ...]
    dephasing: Tuple[ComplexMatrix, ...]
    dephasing_rate: float
    omega_abs: float


def build_collapse_operators(ops: OperatorSet, cfg: SimConfig) -> CollapseSet:
    """Injection and dephasing operators for a run

    Args:
        ops: Jordan-Wigner operators
        cfg: Run configuration; ``channels`` picks the injected dots

    Returns:
        CollapseSet with dephasing projectors only when the rate is positive
    """
    scales = derived_scales(cfg.params)
    injection = tuple(ops.ddag[c - 1] for c in cfg.channels)
    rate = scales.rate_ghz_to_dimensionless(cfg.dephasing_rate_ghz)
    dephasing: Tuple[ComplexMatrix, ...] = ()
    if rate > 0:
        dephasing = tuple(
            algebra.frozen(math.sqrt(rate) * projector(label)) for label in ("0110", "1001")
        )
    return CollapseSet(injection=injection, dephasing=dephasing,
                       dephasing_rate=rate, omega_abs=scales.omega_abs)


def _dissipate(op: ComplexMatrix, rho: ComplexMatrix) -> ComplexMatrix:
    op_dag = op.conj().T
    ldl = op_dag @ op
    return op @ rho @ op_dag - 0.5 * (ldl @ rho + rho @ ldl)


def lindblad_rhs(rho: ComplexMatrix, theta: float, H: ComplexMatrix,
                 collapse: CollapseSet, rate_at: RateFunction) -> ComplexMatrix:
    """d rho / d theta in matrix form

    Args:
        rho: Hermitian density matrix
        theta: Dimensionless time
        H: Hamiltonian in micro-eV
        collapse: Collapse operators
        rate_at: Gamma(theta) in micro-eV
    """
    h = np.asarray(H) / collapse.omega_abs
    out = -1j * (h @ rho - rho @ h)
    rate = rate_at(theta) / collapse.omega_abs
    if rate:
        for op in collapse.injection:
            out = out + rate * _dissipate(op, rho)
    for op in collapse.dephasing:
        out = out + _dissipate(op, rho)
    return out


def _dissipator_superop(op: ComplexMatrix) -> np.ndarray:
    ident = np.eye(op.shape[0])
    ldl = op.conj().T @ op
    return np.kron(op, op.conj()) - 0.5 * np.kron(ldl, ident) - 0.5 * np.kron(ident, ldl.T)


class Liouvillian:
    """Row-major superoperator form of ``lindblad_rhs``

    ``vec(A rho B) = (A kron B^T) vec(rho)`` for row-major flattening.
    """

    def __init__(self, hamiltonian: ComplexMatrix, collapse: CollapseSet):
        dim = hamiltonian.shape[0]
        ident = np.eye(dim)
        h = np.asarray(hamiltonian) / collapse.omega_abs
        static = -1j * (np.kron(h, ident) - np.kron(ident, h.T))
        for op in collapse.dephasing:
            static = static + _dissipator_superop(op)
        injection = np.zeros((dim * dim, dim * dim), dtype=complex)
        for op in collapse.injection:
            injection += _dissipator_superop(op)
        self.static = static
        self.injection = injection
        self.omega_abs = collapse.omega_abs
        self._propagator_key: Optional[Tuple[float, float]] = None
        self._propagator: Optional[np.ndarray] = None

    def apply(self, vec: np.ndarray, rate: float) -> np.ndarray:
        """Generator applied to ``vec`` with injection rate ``rate`` (micro-eV)"""
        out = self.static @ vec
        if rate:
            out += (rate / self.omega_abs) * (self.injection @ vec)
        return out

    def generator(self, rate: float) -> np.ndarray:
        """Generator matrix at a fixed injection rate (micro-eV)"""
        if not rate:
            return self.static
        return self.static + (rate / self.omega_abs) * self.injection

    def rk4_propagator(self, h: float, rate: float) -> np.ndarray:
        """Matrix of one RK4 step of length ``h`` at a constant rate

        For a constant generator G the four stages collapse to the Taylor
        polynomial I + hG + (hG)^2/2 + (hG)^3/6 + (hG)^4/24. The last matrix
        built is kept, so runs of equal steps pay for it once.

        Args:
            h: Step length in theta
            rate: Injection rate in micro-eV

        Returns:
            Propagator acting on row-major vectorized density matrices
        """
        key = (h, rate)
        if self._propagator_key != key:
            g = h * self.generator(rate)
            ident = np.eye(g.shape[0], dtype=complex)
            p = ident + g / 4
            p = ident + (g @ p) / 3
            p = ident + (g @ p) / 2
            p = ident + g @ p
            self._propagator_key, self._propagator = key, p
            logger.debug(f"Built RK4 propagator for h={h:.3e}, rate={rate:.4g}")
        return self._propagator


def integration_segments(theta_max: float, dtheta: float,
                         breakpoints: Sequence[float] = ()) -> List[Tuple[float, float, int]]:
    """Split [0, theta_max] at the breakpoints into equal-step segments

    Returns:
        List of (theta_start, theta_end, step_count); each segment holds
        ceil(length / dtheta) steps
    """
    bounds = [0.0] + sorted(b for b in set(breakpoints) if 0.0 < b < theta_max) + [theta_max]
    return [
        (start, end, max(1, int(math.ceil((end - start) / dtheta - 1e-9))))
        for start, end in zip(bounds[:-1], bounds[1:])
    ]


def _segment_steps(start: float, end: float, count: int) -> List[Tuple[float, float]]:
    h = (end - start) / count
    return [(start + k * h, end if k == count - 1 else start + (k + 1) * h) for k in range(count)]


def integration_grid(theta_max: float, dtheta: float,
                     breakpoints: Sequence[float] = ()) -> List[Tuple[float, float]]:
    """Fixed steps that land exactly on every breakpoint

    Each segment between consecutive boundaries is divided into
    ceil(length / dtheta) equal steps.

    Returns:
        List of (theta_start, theta_end) pairs
    """
    steps = []
    for start, end, count in integration_segments(theta_max, dtheta, breakpoints):
        steps.extend(_segment_steps(start, end, count))
    return steps


def step_rates(theta0: float, theta1: float, rate_at: RateFunction) -> Tuple[float, float, float]:
    """Start, midpoint and end rates of a step; the end points use one-ulp interior limits"""
    return (
        rate_at(np.nextafter(theta0, theta1)),
        rate_at(theta0 + (theta1 - theta0) / 2),
        rate_at(np.nextafter(theta1, theta0)),
    )


def _rk4_stages(liouvillian: Liouvillian, vec: np.ndarray, h: float,
                rates: Tuple[float, float, float]) -> np.ndarray:
    r_start, r_mid, r_end = rates
    k1 = liouvillian.apply(vec, r_start)
    k2 = liouvillian.apply(vec + (h / 2) * k1, r_mid)
    k3 = liouvillian.apply(vec + (h / 2) * k2, r_mid)
    k4 = liouvillian.apply(vec + h * k3, r_end)
    return vec + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_step(liouvillian: Liouvillian, vec: np.ndarray, theta0: float, theta1: float,
             rate_at: RateFunction) -> np.ndarray:
    """Classical RK4 step; the end-point rates use one-ulp interior limits"""
    return _rk4_stages(liouvillian, vec, theta1 - theta0, step_rates(theta0, theta1, rate_at))


@dataclass
class Trajectory:
    """Time-indexed metric record of one run"""

    thetas: np.ndarray
    gammas: np.ndarray
    fidelity: np.ndarray
    negativity: np.ndarray
    linear_entropy: np.ndarray
    pop_0110: np.ndarray
    trace_error: np.ndarray
    min_eigenvalue: np.ndarray
    hermiticity_drift: float = 0.0
    pulse_end: float = 0.0
    final_rho: Optional[np.ndarray] = None
    rhos: Optional[List[np.ndarray]] = None

    @property
    def negativity_2x(self) -> np.ndarray:
        """Negativity series on the doubled scale"""
        return 2.0 * np.asarray(self.negativity)

    @property
    def theta_over_2pi(self) -> np.ndarray:
        """Sample times in units of 2 pi"""
        return np.asarray(self.thetas) / TWO_PI

    def __len__(self) -> int:
        return len(self.thetas)

    def rows(self):
        """CSV rows as strings, one per sample"""
        columns = [
            self.thetas, self.theta_over_2pi, self.gammas, self.fidelity, self.negativity,
            self.linear_entropy, self.pop_0110, self.trace_error, self.negativity_2x,
        ]
        for values in zip(*columns):
            yield [repr(float(v)) for v in values]

    def to_csv(self, path: str) -> None:
        """Write the CSV_COLUMNS table with repr-exact floats

        Args:
            path: Destination file
        """
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            writer.writerows(self.rows())
        logger.debug(f"Wrote {len(self)} samples to {path}")

    @classmethod
    def from_csv(cls, path: str) -> "Trajectory":
        """Read back the metric columns (no density matrices)"""
        with open(path, "r", newline="") as f:
            reader = csv.DictReader(f)
            records = list(reader)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
            raise ValueError(f"Unexpected trajectory columns in {path}")

        def column(name):
            return np.array([float(r[name]) for r in records])

        return cls(
            thetas=column("theta"), gammas=column("gamma_pulse"),
            fidelity=column("fidelity"), negativity=column("negativity"),
            linear_entropy=column("linear_entropy"), pop_0110=column("pop_0110"),
            trace_error=column("trace_error"),
            min_eigenvalue=np.full(len(records), np.nan),
        )


class _Recorder:
    def __init__(self, target: TargetState, store_rhos: bool):
        self.target = target
        self.store_rhos = store_rhos
        self.columns = {name: [] for name in (
            "thetas", "gammas", "fidelity", "negativity", "linear_entropy",
            "pop_0110", "trace_error", "min_eigenvalue")}
        self.rhos: List[np.ndarray] = []

    def record(self, theta: float, gamma: float, rho: np.ndarray) -> None:
        m = sample_metrics(rho, self.target)
        if m.min_eigenvalue < -POSITIVITY_TOL:
            raise StepUnstable(
                f"density matrix lost positivity at theta={theta:.6g} "
                f"(min eigenvalue {m.min_eigenvalue:.3e}); reduce dtheta",
                theta=theta, drift=-m.min_eigenvalue,
            )
        c = self.columns
        c["thetas"].append(theta)
        c["gammas"].append(gamma)
        c["fidelity"].append(m.fidelity)
        c["negativity"].append(m.negativity)
        c["linear_entropy"].append(m.linear_entropy)
        c["pop_0110"].append(m.pop_0110)
        c["trace_error"].append(m.trace_error)
        c["min_eigenvalue"].append(m.min_eigenvalue)
        if self.store_rhos:
            self.rhos.append(np.array(rho, copy=True))


def evolve(cfg: SimConfig) -> Trajectory:
    """Integrate from theta = 0 to cfg.theta_max with fixed-step RK4

    Raises:
        ConfigInvalid: if the configuration is malformed
        StepUnstable: if trace, Hermiticity or positivity drift past tolerance
    """
    cfg.validate()
    ops = build_jw_operators()
    hamiltonian = build_hamiltonian(cfg.params, ops)
    collapse = build_collapse_operators(ops, cfg)
    liouvillian = Liouvillian(hamiltonian, collapse)

    pulse = make_pulse(cfg.pulse)
    noise = cfg.noise
    path = sample_noise_path(noise, cfg.theta_max,
                             step_theta=noise.resolved_step(cfg.pulse.width_theta))

    def rate_at(theta: float) -> float:
        return gamma_at(pulse, noise, theta, path)

    segments = integration_segments(cfg.theta_max, cfg.dtheta,
                                    drive_breakpoints(pulse, noise, path, cfg.theta_max))
    total = sum(count for _, _, count in segments)
    logger.debug(f"Integrating {total} steps in {len(segments)} segments to "
                 f"theta={cfg.theta_max:.4f} ({cfg.pulse.shape.value} pulse, noise {noise.scope.value})")

    rho = np.array(projector(cfg.initial_state), copy=True)
    vec = rho.reshape(-1)
    recorder = _Recorder(TargetState(cfg.target_phi), cfg.store_rhos)
    recorder.record(0.0, rate_at(0.0), rho)
    worst_drift = 0.0
    step = 0

    for start, end, count in segments:
        h = (end - start) / count
        long_segment = count >= PROPAGATOR_MIN_STEPS
        for theta0, theta1 in _segment_steps(start, end, count):
            step += 1
            rates = step_rates(theta0, theta1, rate_at)
            if long_segment and rates[0] == rates[1] == rates[2]:
                vec = liouvillian.rk4_propagator(h, rates[1]) @ vec
            else:
                vec = _rk4_stages(liouvillian, vec, theta1 - theta0, rates)
            rho = vec.reshape(DIM, DIM)
            drift = algebra.hermiticity_drift(rho)
            if drift > HERMITICITY_TOL:
                raise StepUnstable(
                    f"Hermiticity drift {drift:.3e} at theta={theta1:.6g}; reduce dtheta",
                    theta=theta1, drift=drift,
                )
            worst_drift = max(worst_drift, drift)
            rho = (rho + rho.conj().T) / 2
            trace_drift = abs(np.trace(rho) - 1.0)
            if trace_drift > TRACE_TOL:
                raise StepUnstable(
                    f"trace drift {trace_drift:.3e} at theta={theta1:.6g}; reduce dtheta",
                    theta=theta1, drift=float(trace_drift),
                )
            vec = rho.reshape(-1)
            if step % cfg.record_every == 0 or step == total:
                recorder.record(theta1, rate_at(theta1), rho)

    c = recorder.columns
    return Trajectory(
        thetas=np.array(c["thetas"]),
        gammas=np.array(c["gammas"]),
        fidelity=np.array(c["fidelity"]),
        negativity=np.array(c["negativity"]),
        linear_entropy=np.array(c["linear_entropy"]),
        pop_0110=np.array(c["pop_0110"]),
        trace_error=np.array(c["trace_error"]),
        min_eigenvalue=np.array(c["min_eigenvalue"]),
        hermiticity_drift=worst_drift,
        pulse_end=pulse.support_end,
        final_rho=rho,
        rhos=recorder.rhos if cfg.store_rhos else None,
    )
