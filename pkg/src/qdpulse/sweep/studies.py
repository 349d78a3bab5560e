"""Named operating points, dephasing and amplitude-noise studies"""

import dataclasses
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from qdpulse.core.config import NAMED_POINTS, Config, resolve_point
from qdpulse.core.dynamics import SimConfig, Trajectory, evolve
from qdpulse.pulses.base import PulseShape, PulseSpec
from qdpulse.pulses.noise import AmplitudeReference, NoiseScope, NoiseSpec
from qdpulse.sweep.runner import point_seed

logger = logging.getLogger(__name__)

# One noise draw per pulse
PULSE_ONLY_STEP_OVER_WIDTH = 1.0


def default_noise_reference(scope: NoiseScope) -> AmplitudeReference:
    """Gamma0 for pulse-only noise, gamma otherwise"""
    if NoiseScope(scope) is NoiseScope.PULSE_ONLY:
        return AmplitudeReference.GAMMA0
    return AmplitudeReference.GAMMA


def named_points() -> List[Tuple[str, float, float]]:
    """[(label, gamma0 / gamma, p)] for H, M and P"""
    return [(label, g0, p) for label, (g0, p) in NAMED_POINTS.items()]


def default_base_config() -> SimConfig:
    """SimConfig built from the default configuration document"""
    return Config().sim_config


def config_for_point(label: str, base: Optional[SimConfig] = None,
                     shape: Optional[PulseShape] = None) -> SimConfig:
    """Template with its pulse moved to a named point

    The Gaussian center keeps its ratio to the pulse width.
    """
    base = base or default_base_config()
    g0, p = resolve_point(label)
    center_ratio = None
    if base.pulse.center_theta is not None:
        center_ratio = base.pulse.center_theta / base.pulse.width_theta
    pulse = PulseSpec.from_ratios(shape or base.pulse.shape, g0, p, base.params.gamma,
                                  center_over_width=center_ratio)
    noise = base.noise
    if noise.step_theta is not None:
        noise = dataclasses.replace(noise, step_theta=noise.step_theta * pulse.width_theta / base.pulse.width_theta)
    return dataclasses.replace(base, pulse=pulse, noise=noise)


def dephasing_study(point: str, rates_ghz: Sequence[float], base: Optional[SimConfig] = None,
                    progress: bool = True) -> List[Trajectory]:
    """One noise-free square-pulse trajectory per dephasing rate

    Args:
        point: Named point label
        rates_ghz: Dephasing rates in GHz
        base: Template config; None uses the defaults
        progress: Show a tqdm progress bar

    Returns:
        Trajectories in the order of ``rates_ghz``
    """
    cfg = config_for_point(point, base, shape=PulseShape.SQUARE)
    cfg = dataclasses.replace(cfg, noise=NoiseSpec())
    logger.info(f"Dephasing study at {point} over {len(rates_ghz)} rate(s)")

    trajectories = []
    for rate in tqdm(rates_ghz, desc=f"Dephasing ({point})", unit="run", disable=not progress):
        logger.debug(f"Dephasing rate {rate:g} GHz")
        trajectories.append(evolve(dataclasses.replace(cfg, dephasing_rate_ghz=float(rate))))
    return trajectories


def average_trajectories(trajectories: Sequence[Trajectory]) -> Trajectory:
    """Sample-wise mean of metric series sharing one theta grid

    trace_error keeps the worst value and min_eigenvalue the lowest.
    """
    if not trajectories:
        raise ValueError("nothing to average")
    first = trajectories[0]
    if len(trajectories) == 1:
        return first
    for traj in trajectories[1:]:
        if len(traj) != len(first) or not np.array_equal(traj.thetas, first.thetas):
            raise ValueError("trajectories do not share a theta grid")

    def mean(name: str) -> np.ndarray:
        return np.mean([getattr(t, name) for t in trajectories], axis=0)

    return Trajectory(
        thetas=np.array(first.thetas, copy=True),
        gammas=mean("gammas"),
        fidelity=mean("fidelity"),
        negativity=mean("negativity"),
        linear_entropy=mean("linear_entropy"),
        pop_0110=mean("pop_0110"),
        trace_error=np.max([t.trace_error for t in trajectories], axis=0),
        min_eigenvalue=np.min([t.min_eigenvalue for t in trajectories], axis=0),
        hermiticity_drift=max(t.hermiticity_drift for t in trajectories),
        pulse_end=first.pulse_end,
        final_rho=np.mean([t.final_rho for t in trajectories], axis=0),
    )


def noise_study(point: str, amplitudes: Sequence[float], scope: NoiseScope,
                base: Optional[SimConfig] = None, n_seeds: int = 1, base_seed: int = 0,
                progress: bool = True, reference: Optional[AmplitudeReference] = None,
                step_over_width: Optional[float] = None) -> List[Trajectory]:
    """Square-pulse runs under amplitude noise, one (seed-averaged) trajectory per amplitude

    Dephasing is switched off. Every amplitude reuses the same unit draws. Seed
    s takes row ``s // 2`` of one Latin-hypercube set drawn from
    ``point_seed(base_seed, 0, 0)`` and odd seeds run the sign-flipped path, so
    the averages differ only through the amplitude.

    Pulse-only noise defaults to one draw per pulse in units of Gamma0, a
    shot-to-shot error of the pulse height. Full-evolution noise defaults to
    the template's correlation step in units of gamma.

    Args:
        point: Named point label
        amplitudes: Noise amplitudes in units of ``reference``
        scope: NoiseScope.PULSE_ONLY or NoiseScope.FULL_EVOLUTION
        base: Template config; None uses the defaults
        n_seeds: Noise realizations averaged per amplitude
        base_seed: Seed root
        progress: Show a tqdm progress bar
        reference: Rate the amplitudes are multiplied by; None picks the scope default
        step_over_width: Correlation step over sigma_theta; None picks the scope default

    Returns:
        Trajectories in the order of ``amplitudes``
    """
    scope = NoiseScope(scope)
    if scope is NoiseScope.OFF:
        raise ValueError("noise study needs pulse_only or full_evolution scope")
    if n_seeds < 1:
        raise ValueError(f"n_seeds must be >= 1, got {n_seeds}")
    pulse_only = scope is NoiseScope.PULSE_ONLY
    reference = AmplitudeReference(reference or default_noise_reference(scope))
    if step_over_width is None and pulse_only:
        step_over_width = PULSE_ONLY_STEP_OVER_WIDTH
    if n_seeds > 1 and n_seeds % 2:
        logger.warning(f"n_seeds={n_seeds} is odd; the last realization has no mirrored partner")

    cfg = config_for_point(point, base, shape=PulseShape.SQUARE)
    cfg = dataclasses.replace(cfg, dephasing_rate_ghz=0.0)
    unit = cfg.pulse.gamma0 if reference is AmplitudeReference.GAMMA0 else cfg.params.gamma
    step_theta = cfg.noise.step_theta
    if step_over_width is not None:
        if step_over_width <= 0:
            raise ValueError(f"step_over_width must be > 0, got {step_over_width}")
        step_theta = step_over_width * cfg.pulse.width_theta
    logger.info(f"Noise study at {point}: {len(amplitudes)} amplitude(s) in units of "
                f"{reference.value}, {n_seeds} seed(s), scope {scope.value}")

    ensemble_seed = point_seed(base_seed, 0, 0)
    pairs = (n_seeds + 1) // 2
    trajectories = []
    total = len(amplitudes) * n_seeds
    with tqdm(total=total, desc=f"Noise ({point}, {scope.value})", unit="run", disable=not progress) as pbar:
        for amplitude in amplitudes:
            runs = []
            for s in range(n_seeds):
                noise = dataclasses.replace(cfg.noise, amplitude=float(amplitude) * unit,
                                            step_theta=step_theta, scope=scope,
                                            seed=ensemble_seed, ensemble=pairs,
                                            member=s // 2, mirrored=bool(s % 2))
                runs.append(evolve(dataclasses.replace(cfg, noise=noise)))
                pbar.update(1)
            trajectories.append(average_trajectories(runs))
    return trajectories
