"""Configuration management"""

import copy
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import yaml

from qdpulse.core.dynamics import SimConfig
from qdpulse.core.errors import ConfigInvalid, QdpulseError
from qdpulse.core.model import DEFAULT_JP_UEV, DEFAULT_X, ModelParams
from qdpulse.pulses.base import DEFAULT_CENTER_OVER_WIDTH, PulseShape, PulseSpec
from qdpulse.pulses.noise import (
    AmplitudeReference,
    DEFAULT_NOISE_AMPLITUDES,
    DEFAULT_STEP_OVER_WIDTH,
    NoiseDistribution,
    NoiseScope,
    NoiseSpec,
)

logger = logging.getLogger(__name__)

TWO_PI = 2 * math.pi

# label -> (gamma0 / gamma, sigma_theta / 2 pi)
NAMED_POINTS: Dict[str, Tuple[float, float]] = {
    "H": (9.0, 0.035),
    "M": (5.0, 0.065),
    "P": (2.0, 0.09),
}

DEFAULTS: Dict[str, Any] = {
    "model": {
        "eps_ueV": [0.0, 0.0, 0.0, 0.0],
        "gamma_ueV": DEFAULT_X * DEFAULT_JP_UEV,
        "J_ueV": 2 * DEFAULT_JP_UEV,
        "Jp_ueV": DEFAULT_JP_UEV,
    },
    "pulse": {
        "shape": "square",
        "point": "H",
        "gamma0_over_gamma": None,
        "width_over_2pi": None,
        "center_over_width": DEFAULT_CENTER_OVER_WIDTH,
    },
    "noise": {
        "amplitude_over_gamma": 0.0,
        "step_over_width": DEFAULT_STEP_OVER_WIDTH,
        "scope": "off",
        "distribution": "uniform",
        "seed": 0,
    },
    "dynamics": {
        "dephasing_ghz": 0.0,
        "theta_max_over_2pi": 2.0,
        "dtheta_over_2pi": 2.5e-5,
        "initial_state": "1111",
        "record_every": 40,
        "channels": [1, 4],
        "store_rhos": False,
    },
    "sweep": {
        "gamma0_over_gamma": {"start": 1.0, "stop": 10.0, "num": 20},
        "width_over_2pi": {"start": 0.01, "stop": 0.10, "num": 20},
        "shape": "square",
        "base_seed": 0,
        "workers": None,
        "executor": "process",
        "pop_window_over_2pi": None,
        "negativity_window_over_2pi": None,
    },
    "study": {
        "point": "H",
        "dephasing_rates_ghz": [0.01, 0.1, 1.0],
        "noise_amplitudes": sorted(DEFAULT_NOISE_AMPLITUDES.values()),
        "noise_scope": "pulse_only",
        "noise_reference": None,
        "noise_step_over_width": None,
        "n_seeds": 8,
    },
    "output_dir": "runs/latest",
}

# Keys whose value is a free-form mapping rather than a fixed section
_OPEN_MAPPINGS = {"sweep.gamma0_over_gamma", "sweep.width_over_2pi"}


def _merge(base: Dict[str, Any], update: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    """Recursively merge ``update`` into a copy of ``base``, rejecting unknown keys"""
    if not isinstance(update, dict):
        raise ConfigInvalid(prefix or "<root>", f"expected a mapping, got {type(update).__name__}")
    merged = copy.deepcopy(base)
    for key, value in update.items():
        path = f"{prefix}.{key}" if prefix else str(key)
        if key not in base:
            raise ConfigInvalid(path, "unknown key")
        if isinstance(base[key], dict) and path not in _OPEN_MAPPINGS:
            merged[key] = _merge(base[key], value, path)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _grid_values(spec: Any, field: str) -> List[float]:
    """Expand ``{start, stop, num}`` or an explicit list into grid values"""
    if isinstance(spec, dict):
        unknown = set(spec) - {"start", "stop", "num"}
        if unknown:
            raise ConfigInvalid(f"{field}.{sorted(unknown)[0]}", "unknown key")
        try:
            start, stop, num = float(spec["start"]), float(spec["stop"]), int(spec["num"])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigInvalid(field, f"needs numeric start, stop and num ({e})")
        if num < 1:
            raise ConfigInvalid(f"{field}.num", "must be >= 1")
        if num == 1:
            return [start]
        step = (stop - start) / (num - 1)
        return [start + k * step for k in range(num - 1)] + [stop]
    if isinstance(spec, (list, tuple)):
        try:
            return [float(v) for v in spec]
        except (TypeError, ValueError) as e:
            raise ConfigInvalid(field, f"values must be numeric ({e})")
    if isinstance(spec, (int, float)):
        return [float(spec)]
    raise ConfigInvalid(field, "expected {start, stop, num} or a list")


def _window(value: Any, field: str) -> Optional[Tuple[float, float]]:
    if value is None:
        return None
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigInvalid(field, "expected [lo, hi] in units of 2 pi")
    lo, hi = float(value[0]) * TWO_PI, float(value[1]) * TWO_PI
    if hi < lo:
        raise ConfigInvalid(field, "hi must be >= lo")
    return lo, hi


def _enum(enum_type, value: Any, field: str):
    # YAML 1.1 reads a bare off as false
    if value is False:
        value = "off"
    try:
        return enum_type(value)
    except ValueError:
        choices = ", ".join(e.value for e in enum_type)
        raise ConfigInvalid(field, f"{value!r} not one of: {choices}")


def resolve_point(label: str) -> Tuple[float, float]:
    """(gamma0 / gamma, p) of a named point"""
    try:
        return NAMED_POINTS[label.upper()]
    except (KeyError, AttributeError):
        raise ConfigInvalid("pulse.point", f"unknown point {label!r}; choose from {', '.join(NAMED_POINTS)}")


@dataclass(frozen=True)
class StudySettings:
    point: str
    dephasing_rates_ghz: Tuple[float, ...]
    noise_amplitudes: Tuple[float, ...]
    noise_scope: NoiseScope
    n_seeds: int
    noise_reference: Optional[AmplitudeReference] = None
    noise_step_over_width: Optional[float] = None


class Config:
    """Configuration manager for qdpulse"""

    def __init__(self, config_file: Optional[str] = None, overrides: Optional[List[str]] = None):
        """Load configuration from a YAML or JSON document

        Args:
            config_file: Path to configuration file; None uses built-in defaults
            overrides: ``section.key=value`` strings applied after loading
        """
        self.config_file = config_file
        self.data: Dict[str, Any] = copy.deepcopy(DEFAULTS)
        if config_file is not None:
            self.load()
        for override in overrides or []:
            self.apply_override(override)

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> "Config":
        """Build a Config from an in-memory document merged over the defaults

        Args:
            document: Partial configuration tree

        Returns:
            Loaded Config
        """
        cfg = cls()
        cfg.data = _merge(DEFAULTS, document)
        return cfg

    def load(self) -> None:
        """Load configuration from file; manifests contribute their resolved config"""
        try:
            with open(self.config_file, "r") as f:
                document = yaml.safe_load(f) or {}
            logger.info(f"Loaded configuration from {self.config_file}")
        except FileNotFoundError:
            logger.error(f"Configuration file not found: {self.config_file}")
            raise
        except yaml.YAMLError as e:
            logger.error(f"Failed to parse configuration file: {e}")
            raise

        if isinstance(document, dict) and "resolved_config" in document:
            logger.info("Configuration file is a run manifest, using its resolved config")
            document = document["resolved_config"]
        self.data = _merge(DEFAULTS, document)

    def set(self, path: str, value: Any) -> None:
        """Set a leaf value addressed by a dotted path"""
        keys = path.split(".")
        node, defaults = self.data, DEFAULTS
        for depth, key in enumerate(keys[:-1]):
            prefix = ".".join(keys[: depth + 1])
            if key not in defaults or not isinstance(defaults[key], dict) or prefix in _OPEN_MAPPINGS:
                raise ConfigInvalid(path, "unknown key")
            node, defaults = node[key], defaults[key]
        leaf = keys[-1]
        if leaf not in defaults:
            raise ConfigInvalid(path, "unknown key")
        if isinstance(defaults[leaf], dict) and path not in _OPEN_MAPPINGS:
            node[leaf] = _merge(defaults[leaf], value, path)
        else:
            node[leaf] = copy.deepcopy(value)
        logger.debug(f"Override {path} = {value!r}")

    def apply_override(self, override: str) -> None:
        """Apply ``section.key=value``; the value is parsed as a YAML scalar or list"""
        if "=" not in override:
            raise ConfigInvalid(override, "override must look like section.key=value")
        path, raw = override.split("=", 1)
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as e:
            raise ConfigInvalid(path.strip(), f"cannot parse value {raw!r}: {e}")
        self.set(path.strip(), value)

    def set_point(self, label: str) -> None:
        """Select a named point, clearing explicit pulse coordinates"""
        resolve_point(label)
        self.data["pulse"]["point"] = label.upper()
        self.data["pulse"]["gamma0_over_gamma"] = None
        self.data["pulse"]["width_over_2pi"] = None

    @property
    def resolved(self) -> Dict[str, Any]:
        """Full document with every default materialized"""
        return copy.deepcopy(self.data)

    def _section(self, name: str) -> Dict[str, Any]:
        return self.data[name]

    @property
    def model_params(self) -> ModelParams:
        """ModelParams from the ``model`` section"""
        m = self._section("model")
        try:
            eps = tuple(float(e) for e in m["eps_ueV"])
            params = ModelParams(eps=eps, gamma=float(m["gamma_ueV"]),
                                 J=float(m["J_ueV"]), Jp=float(m["Jp_ueV"]))
        except (TypeError, ValueError) as e:
            raise ConfigInvalid("model", str(e))
        if not params.perturbative:
            raise ConfigInvalid("model.J_ueV", f"J ({params.J:g}) must exceed Jp ({params.Jp:g}) >= 0")
        if params.gamma <= 0:
            raise ConfigInvalid("model.gamma_ueV", "must be > 0")
        return params

    @property
    def pulse_ratios(self) -> Tuple[float, float]:
        """(gamma0 / gamma, p) after named-point resolution"""
        p = self._section("pulse")
        g0, width = p["gamma0_over_gamma"], p["width_over_2pi"]
        if g0 is None or width is None:
            if p["point"] is None:
                raise ConfigInvalid("pulse", "set point or both gamma0_over_gamma and width_over_2pi")
            point_g0, point_width = resolve_point(p["point"])
            g0 = point_g0 if g0 is None else g0
            width = point_width if width is None else width
        try:
            return float(g0), float(width)
        except (TypeError, ValueError):
            raise ConfigInvalid("pulse", "gamma0_over_gamma and width_over_2pi must be numeric")

    def pulse_spec(self, shape: Optional[str] = None, ratios: Optional[Tuple[float, float]] = None) -> PulseSpec:
        """PulseSpec for the current point

        Args:
            shape: Override of ``pulse.shape``
            ratios: Override of (sigma_theta, gamma/Omega)

        Returns:
            Validated PulseSpec
        """
        p = self._section("pulse")
        shape_value = _enum(PulseShape, shape or p["shape"], "pulse.shape")
        g0, width = ratios if ratios is not None else self.pulse_ratios
        center = p["center_over_width"]
        try:
            return PulseSpec.from_ratios(shape_value, g0, width, self.model_params.gamma,
                                         center_over_width=None if center is None else float(center))
        except ValueError as e:
            raise ConfigInvalid("pulse", str(e))

    def noise_spec(self, width_theta: float, amplitude_over_gamma: Optional[float] = None,
                   scope: Optional[str] = None, seed: Optional[int] = None) -> NoiseSpec:
        """NoiseSpec from the ``noise`` section

        Args:
            width_theta: Pulse width the correlation step is scaled by
            amplitude_over_gamma: Override of the amplitude ratio

        Returns:
            NoiseSpec in micro-eV
        """
        n = self._section("noise")
        amplitude = n["amplitude_over_gamma"] if amplitude_over_gamma is None else amplitude_over_gamma
        step = n["step_over_width"]
        try:
            return NoiseSpec(
                amplitude=float(amplitude) * self.model_params.gamma,
                step_theta=None if step is None else float(step) * width_theta,
                scope=_enum(NoiseScope, scope or n["scope"], "noise.scope"),
                distribution=_enum(NoiseDistribution, n["distribution"], "noise.distribution"),
                seed=int(n["seed"] if seed is None else seed),
            )
        except (TypeError, ValueError) as e:
            raise ConfigInvalid("noise", str(e))

    @property
    def sim_config(self) -> SimConfig:
        """SimConfig for the configured point, pulse and noise"""
        return self.build_sim_config()

    def build_sim_config(self, pulse: Optional[PulseSpec] = None, noise: Optional[NoiseSpec] = None,
                         dephasing_ghz: Optional[float] = None) -> SimConfig:
        """SimConfig from the dynamics section, with optional per-run replacements"""
        d = self._section("dynamics")
        pulse = pulse or self.pulse_spec()
        noise = noise or self.noise_spec(pulse.width_theta)
        try:
            cfg = SimConfig(
                params=self.model_params,
                pulse=pulse,
                noise=noise,
                dephasing_rate_ghz=float(d["dephasing_ghz"] if dephasing_ghz is None else dephasing_ghz),
                theta_max=float(d["theta_max_over_2pi"]) * TWO_PI,
                dtheta=float(d["dtheta_over_2pi"]) * TWO_PI,
                initial_state=str(d["initial_state"]),
                record_every=int(d["record_every"]),
                channels=tuple(int(c) for c in d["channels"]),
                store_rhos=bool(d["store_rhos"]),
            )
        except (TypeError, ValueError) as e:
            raise ConfigInvalid("dynamics", str(e))
        cfg.validate()
        return cfg

    @property
    def sweep_grid(self):
        """SweepGrid from the sweep section"""
        from qdpulse.sweep.runner import SweepGrid, resolve_executor

        s = self._section("sweep")
        shape = _enum(PulseShape, s["shape"], "sweep.shape")
        workers = s["workers"]
        if workers is not None and int(workers) < 1:
            raise ConfigInvalid("sweep.workers", "must be >= 1")
        base = self.build_sim_config(pulse=self.pulse_spec(shape=shape.value))
        grid = SweepGrid(
            gamma0_over_gamma=tuple(_grid_values(s["gamma0_over_gamma"], "sweep.gamma0_over_gamma")),
            p_values=tuple(_grid_values(s["width_over_2pi"], "sweep.width_over_2pi")),
            base_config=base,
            pulse_shape=shape,
            base_seed=int(s["base_seed"]),
            workers=None if workers is None else int(workers),
            executor=resolve_executor(s["executor"]),
            pop_window=_window(s["pop_window_over_2pi"], "sweep.pop_window_over_2pi"),
            negativity_window=_window(s["negativity_window_over_2pi"], "sweep.negativity_window_over_2pi"),
        )
        grid.validate()
        return grid

    @property
    def study_settings(self) -> StudySettings:
        """StudySettings from the ``studies`` section"""
        s = self._section("study")
        point = str(s["point"]).upper()
        resolve_point(point)
        rates = tuple(float(r) for r in s["dephasing_rates_ghz"])
        if any(r < 0 for r in rates):
            raise ConfigInvalid("study.dephasing_rates_ghz", "rates must be >= 0")
        amplitudes = tuple(float(a) for a in s["noise_amplitudes"])
        if any(a < 0 for a in amplitudes):
            raise ConfigInvalid("study.noise_amplitudes", "amplitudes must be >= 0")
        scope = _enum(NoiseScope, s["noise_scope"], "study.noise_scope")
        if scope is NoiseScope.OFF:
            raise ConfigInvalid("study.noise_scope", "noise study needs pulse_only or full_evolution")
        n_seeds = int(s["n_seeds"])
        if n_seeds < 1:
            raise ConfigInvalid("study.n_seeds", "must be >= 1")
        reference = None
        if s["noise_reference"] is not None:
            reference = _enum(AmplitudeReference, s["noise_reference"], "study.noise_reference")
        step = s["noise_step_over_width"]
        if step is not None:
            try:
                step = float(step)
            except (TypeError, ValueError):
                raise ConfigInvalid("study.noise_step_over_width", f"expected a number, got {step!r}")
            if step <= 0:
                raise ConfigInvalid("study.noise_step_over_width", "must be > 0")
        return StudySettings(point=point, dephasing_rates_ghz=rates,
                             noise_amplitudes=amplitudes,
                             noise_scope=scope, n_seeds=n_seeds,
                             noise_reference=reference, noise_step_over_width=step)

    @property
    def output_dir(self) -> str:
        """Directory results are written to"""
        return str(self.data.get("output_dir", DEFAULTS["output_dir"]))

    def validate(self) -> bool:
        """Validate configuration

        Returns:
            True if configuration is valid
        """
        valid = True
        for name in ("sim_config", "sweep_grid", "study_settings"):
            try:
                getattr(self, name)
            except QdpulseError as e:
                logger.error(f"Invalid configuration: {e}")
                valid = False
        return valid
