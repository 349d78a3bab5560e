"""Self-check oracles run by ``qdpulse check``"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np

from qdpulse.core.dynamics import DEFAULT_DTHETA, DEFAULT_RECORD_EVERY, SimConfig, evolve
from qdpulse.core.errors import QdpulseError
from qdpulse.core.metrics import TargetState, analytic_fidelity, negativity
from qdpulse.core.model import (
    ModelParams,
    derived_scales,
    effective_coupling_report,
    exact_doublet_coupling,
    projector,
    verify_degeneracy_table,
)
from qdpulse.pulses.base import PulseShape, PulseSpec

logger = logging.getLogger(__name__)

CLOSED_SYSTEM_TOL = 0.02
FIRST_PEAK = 0.125
FIRST_PEAK_TOL = 0.005
NEGATIVITY_TOL = 1e-9


@dataclass(frozen=True)
class OracleResult:
    name: str
    passed: bool
    detail: str
    values: Dict[str, float] = field(default_factory=dict)


def spectrum_oracle(params: ModelParams) -> OracleResult:
    """gamma = 0 degeneracy table at the given J, J'"""
    bare = dataclasses.replace(params, gamma=0.0, eps=(0.0, 0.0, 0.0, 0.0))
    report = verify_degeneracy_table(bare)
    table = ", ".join(f"{c.energy:g}:{c.multiplicity}" for c in report.clusters)
    return OracleResult("spectrum", True, f"clusters {{{table}}}")


def coupling_oracle(params: ModelParams) -> OracleResult:
    """Closed-form Omega against the explicit second-order sum"""
    report = effective_coupling_report(params)
    scales = derived_scales(params)
    return OracleResult(
        "coupling", True,
        f"Omega = {report.perturbative:.12g} ueV (closed form {report.closed_form:.12g}), "
        f"T = {scales.period:.4f} ns, tau = {scales.tau:.4f} ns",
    )


def closed_system_oracle(params: ModelParams, dtheta: float = DEFAULT_DTHETA,
                         theta_max: float = 4 * math.pi) -> OracleResult:
    """Unitary |0110> evolution against the two-level fidelity

    The analytic curve is evaluated at theta scaled by the exact doublet
    splitting over the second-order |Omega|. The deviation from the unscaled
    curve is reported alongside as the size of the higher-order correction.
    """
    scale = exact_doublet_coupling(params) / derived_scales(params).omega_abs
    cfg = SimConfig(
        params=params,
        pulse=PulseSpec(shape=PulseShape.SQUARE, gamma0=0.0, width_theta=1.0),
        theta_max=theta_max,
        dtheta=dtheta,
        initial_state="0110",
        record_every=DEFAULT_RECORD_EVERY,
    )
    traj = evolve(cfg)
    analytic = np.array([analytic_fidelity(t * scale) for t in traj.thetas])
    deviation = float(np.max(np.abs(traj.fidelity - analytic)))
    unscaled = np.array([analytic_fidelity(t) for t in traj.thetas])
    raw_deviation = float(np.max(np.abs(traj.fidelity - unscaled)))

    first_half = traj.thetas <= math.pi / 2
    peak = float(traj.thetas[first_half][np.argmax(traj.fidelity[first_half])]) / (2 * math.pi)
    passed = deviation <= CLOSED_SYSTEM_TOL and abs(peak - FIRST_PEAK) <= FIRST_PEAK_TOL
    return OracleResult(
        "closed-system", passed,
        f"max |F - F_analytic| = {deviation:.4f} (unscaled {raw_deviation:.4f}), "
        f"first peak at theta/2pi = {peak:.4f} (exact/second-order coupling {scale:.5f})",
        values={"deviation": deviation, "raw_deviation": raw_deviation,
                "first_peak": peak, "coupling_ratio": scale},
    )


def negativity_oracle() -> OracleResult:
    """Bell-type target gives 0.5; product basis states give 0"""
    bell = negativity(TargetState().density())
    products = max(negativity(projector(label)) for label in ("1111", "0110", "1001", "0000"))
    passed = abs(bell - 0.5) <= NEGATIVITY_TOL and products <= NEGATIVITY_TOL
    return OracleResult("negativity", passed, f"N(target) = {bell:.12f}, max N(product) = {products:.2e}")


def run_oracles(params: ModelParams, dtheta: float = DEFAULT_DTHETA) -> List[OracleResult]:
    """Run every oracle; library errors become failed results"""
    checks: List[Callable[[], OracleResult]] = [
        lambda: spectrum_oracle(params),
        lambda: coupling_oracle(params),
        lambda: closed_system_oracle(params, dtheta=dtheta),
        negativity_oracle,
    ]
    names = ["spectrum", "coupling", "closed-system", "negativity"]
    results = []
    for name, check in zip(names, checks):
        try:
            result = check()
        except QdpulseError as e:
            result = OracleResult(name, False, f"{type(e).__name__}: {e}")
        log = logger.info if result.passed else logger.error
        log(f"Oracle {result.name}: {'pass' if result.passed else 'FAIL'} ({result.detail})")
        results.append(result)
    return results
