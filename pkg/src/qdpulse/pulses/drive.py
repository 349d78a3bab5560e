"""Gate-modulated tunneling rate Gamma(theta) = envelope + masked noise"""

from typing import Dict, List, Sequence, Type

import numpy as np

from qdpulse.pulses.base import BasePulse, PulseShape, PulseSpec
from qdpulse.pulses.gaussian import GaussianPulse
from qdpulse.pulses.noise import NoisePath, NoiseScope, NoiseSpec
from qdpulse.pulses.square import SquarePulse

PULSE_TYPES: Dict[PulseShape, Type[BasePulse]] = {
    PulseShape.SQUARE: SquarePulse,
    PulseShape.GAUSSIAN: GaussianPulse,
}


def make_pulse(spec: PulseSpec) -> BasePulse:
    """Instantiate the envelope implementation for ``spec.shape``"""
    try:
        return PULSE_TYPES[spec.shape](spec)
    except KeyError:
        raise ValueError(f"Unknown pulse shape: {spec.shape}")


def scope_mask(pulse: BasePulse, noise: NoiseSpec, theta: float) -> float:
    """1.0 where the noise acts at theta, else 0.0"""
    if noise.scope is NoiseScope.OFF:
        return 0.0
    if noise.scope is NoiseScope.PULSE_ONLY:
        return 1.0 if theta < pulse.support_end else 0.0
    return 1.0


def gamma_at(pulse: BasePulse, noise: NoiseSpec, theta: float, path: NoisePath) -> float:
    """Rate at theta, clipped at zero"""
    value = pulse.envelope(theta) + path.value_at(theta) * scope_mask(pulse, noise, theta)
    return max(0.0, value)


def gamma_series(pulse: BasePulse, noise: NoiseSpec, path: NoisePath,
                 thetas: Sequence[float]) -> np.ndarray:
    """Vectorized ``gamma_at`` over sample thetas

    Args:
        pulse: Envelope
        noise: Noise configuration
        path: Sampled noise path
        thetas: Sample points

    Returns:
        Rates in micro-eV, one per theta
    """
    return np.array([gamma_at(pulse, noise, float(t), path) for t in thetas])


def drive_breakpoints(pulse: BasePulse, noise: NoiseSpec, path: NoisePath,
                      theta_max: float) -> List[float]:
    """Discontinuities of Gamma(theta) inside (0, theta_max)"""
    points = set(b for b in pulse.breakpoints() if 0 < b < theta_max)
    if noise.active:
        stop = theta_max if noise.scope is NoiseScope.FULL_EVOLUTION else min(theta_max, pulse.support_end)
        points.update(path.edges(stop))
    return sorted(points)
