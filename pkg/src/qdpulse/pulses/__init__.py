"""Gate pulse envelopes and amplitude noise"""

from .base import BasePulse, PulseShape, PulseSpec
from .drive import gamma_at, make_pulse
from .noise import NoiseDistribution, NoisePath, NoiseScope, NoiseSpec, sample_noise_path

__all__ = [
    "BasePulse",
    "PulseShape",
    "PulseSpec",
    "NoiseDistribution",
    "NoisePath",
    "NoiseScope",
    "NoiseSpec",
    "gamma_at",
    "make_pulse",
    "sample_noise_path",
]
