"""Stochastic amplitude noise on the gate-modulated rate"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

import numpy as np
from scipy.stats import norm, qmc

logger = logging.getLogger(__name__)

DEFAULT_STEP_OVER_WIDTH = 0.05
QUANTILE_FLOOR = 1e-12

# Calibration amplitudes in units of the amplitude reference; not taken from measurements
DEFAULT_NOISE_AMPLITUDES = {"low": 0.5, "moderate": 1.5, "high": 3.0}


class NoiseScope(str, Enum):
    PULSE_ONLY = "pulse_only"
    FULL_EVOLUTION = "full_evolution"
    OFF = "off"


class NoiseDistribution(str, Enum):
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"


class AmplitudeReference(str, Enum):
    """Rate the dimensionless noise amplitude is multiplied by"""

    GAMMA = "gamma"
    GAMMA0 = "gamma0"


@dataclass(frozen=True)
class NoiseSpec:
    """Amplitude-noise configuration

    Attributes:
        amplitude: A in micro-eV; Uniform(-A, A) bounds or Gaussian standard deviation
        step_theta: Correlation step; None selects sigma_theta / 20 at resolution time
        scope: Where the noise acts
        distribution: Draw law
        seed: Generator seed
        mirrored: Negate every draw; paired with the same seed this gives the
            antithetic path
        ensemble: Size of a Latin-hypercube set sharing ``seed``; 1 draws plainly
        member: Row of that set this path uses
    """

    amplitude: float = 0.0
    step_theta: Optional[float] = None
    scope: NoiseScope = NoiseScope.OFF
    distribution: NoiseDistribution = NoiseDistribution.UNIFORM
    seed: int = 0
    mirrored: bool = False
    ensemble: int = 1
    member: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scope", NoiseScope(self.scope))
        object.__setattr__(self, "distribution", NoiseDistribution(self.distribution))
        if self.amplitude < 0:
            raise ValueError(f"noise amplitude must be >= 0, got {self.amplitude}")
        if self.step_theta is not None and self.step_theta <= 0:
            raise ValueError(f"noise step must be > 0, got {self.step_theta}")
        if self.ensemble < 1 or not 0 <= self.member < self.ensemble:
            raise ValueError(f"member {self.member} outside an ensemble of {self.ensemble}")

    @property
    def active(self) -> bool:
        """True when the noise has a scope and a nonzero amplitude"""
        return self.scope is not NoiseScope.OFF and self.amplitude > 0

    def resolved_step(self, width_theta: float) -> float:
        """Correlation step, defaulting to a fixed fraction of the pulse width

        Args:
            width_theta: Pulse width sigma_theta

        Returns:
            Step in theta
        """
        if self.step_theta is not None:
            return self.step_theta
        return DEFAULT_STEP_OVER_WIDTH * width_theta


@dataclass(frozen=True)
class NoisePath:
    """Piecewise-constant noise samples on consecutive intervals of ``step_theta``"""

    step_theta: float
    values: np.ndarray

    def value_at(self, theta: float) -> float:
        """Noise sample of the interval holding theta; 0 before the path starts"""
        if len(self.values) == 0 or theta < 0:
            return 0.0
        idx = min(int(theta // self.step_theta), len(self.values) - 1)
        return float(self.values[idx])

    def edges(self, theta_stop: float) -> List[float]:
        """Interval boundaries strictly inside (0, theta_stop)"""
        count = int(math.ceil(theta_stop / self.step_theta))
        return [k * self.step_theta for k in range(1, count) if k * self.step_theta < theta_stop]


def sample_noise_path(noise: NoiseSpec, theta_max: float,
                      step_theta: Optional[float] = None) -> NoisePath:
    """Draw ceil(theta_max / step) i.i.d. samples, deterministic in the seed

    Draws are made at unit scale and multiplied by the amplitude, so specs
    differing only in amplitude share one realization up to scale. Members of
    an ensemble take rows of one Latin-hypercube sample, which puts exactly one
    member in each of ``ensemble`` equal-probability bins at every step.

    Args:
        noise: Noise configuration
        theta_max: Length of the path in theta
        step_theta: Step override when ``noise.step_theta`` is unresolved
    """
    if theta_max <= 0:
        raise ValueError(f"theta_max must be > 0, got {theta_max}")
    step = noise.step_theta if noise.step_theta is not None else step_theta
    if step is None:
        raise ValueError("noise step is unresolved; pass step_theta")
    count = max(1, int(math.ceil(theta_max / step - 1e-9)))

    rng = np.random.default_rng(noise.seed)
    if noise.amplitude == 0:
        values = np.zeros(count)
    else:
        if noise.ensemble > 1:
            quantiles = qmc.LatinHypercube(d=count, seed=rng).random(noise.ensemble)[noise.member]
        else:
            quantiles = rng.random(count)
        if noise.distribution is NoiseDistribution.UNIFORM:
            unit = 2.0 * quantiles - 1.0
        else:
            unit = norm.ppf(np.clip(quantiles, QUANTILE_FLOOR, 1.0 - QUANTILE_FLOOR))
        values = (-noise.amplitude if noise.mirrored else noise.amplitude) * unit
    logger.debug(f"Sampled {count} noise values (seed={noise.seed}, A={noise.amplitude:g}, mirrored={noise.mirrored})")
    return NoisePath(step_theta=step, values=values)
