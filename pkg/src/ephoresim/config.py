"""Experiment configuration: a single strict JSON document.

Every block is optional except ``field``; omitted keys take the reference
system values (``N_EM = 1e4``, ``P1 = 0.5``, ``B = 100``, ``T_int = 0.1 ms``,
``D_A = 1e-9``, ``x0 = 0.5 um``, ``r_obs = 50 nm``, unit noise mean, ``M = 5``).
Unknown keys anywhere raise :class:`~ephoresim.errors.ConfigError`.

Example::

    {
      "field": {"variant": "exponential", "xi_v": 1e-4},
      "simulation": {"trials": 10000, "seed": 7},
      "sweep": {"parameter": "M", "values": [1, 3, 5, 10]}
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any

from .channel import BitSequence, ChannelParams
from .detection import DetectorConfig, FrameConfig
from .errors import ConfigError
from .field import (
    Constant,
    DesignConstraint,
    PiecewiseCustom,
    Sinusoidal,
    VelocityProfile,
    design_exponential,
    design_sinusoidal,
)
from .mcsim import SimulationConfig

__all__ = [
    "ExperimentConfig",
    "FieldSpec",
    "load_config",
    "build_profile",
    "simulation_config",
    "SWEEP_PARAMETERS",
]

SWEEP_PARAMETERS = ("T_int", "xi_v", "M", "trials", "N_EM", "x0")
VARIANTS = ("constant", "sinusoidal", "exponential", "piecewise")
DEFAULT_BITS = (0, 1, 1, 0, 0, 1, 0)


@dataclass(frozen=True)
class FieldSpec:
    """Which field to use and the designer inputs.

    * constant: ``v_const``, or ``sqrt(xi_v)`` when only the budget is given;
    * sinusoidal: designed from ``xi_v``; ``phi_v`` overrides the designed phase;
    * exponential: designed from ``xi_v`` and ``x1`` (default ``x0``);
    * piecewise: ``knots`` as ``[[t, v], ...]``, optional ``period``.
    """

    variant: str
    xi_v: float | None = None
    phi_v: float | None = None
    x1: float | None = None
    v_const: float | None = None
    knots: tuple | None = None
    period: float | None = None


@dataclass(frozen=True)
class DetectorSpec:
    mode: str = "auto"
    weights_mode: str = "template"
    weights: tuple | None = None
    gamma: float | None = None


@dataclass(frozen=True)
class SimulationSpec:
    trials: int = 10_000
    seed: int = 0
    sequence: tuple | None = None
    isi_window: int | None = None


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple


@dataclass(frozen=True)
class BBOSpec:
    radii: tuple = (1e-7, 1e-6, 5e-6, 1e-5)
    rho_m: float = 1e3
    rho_f: float = 1e3
    mu_f: float = 1e-3
    q_A: float = 1.602176634e-19
    tol: float = 1e-10
    points: int = 1001
    factor: float = 10.0
    temperature: float = 293.0


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "runs"
    formats: tuple = ("csv", "json")
    points_per_interval: int = 100
    trajectory_points: int = 1000


@dataclass(frozen=True)
class ExperimentConfig:
    field: FieldSpec
    channel: ChannelParams = ChannelParams()
    frame: FrameConfig = FrameConfig()
    detector: DetectorSpec = DetectorSpec()
    simulation: SimulationSpec = SimulationSpec()
    sweep: SweepSpec | None = None
    bbo: BBOSpec = BBOSpec()
    output: OutputSpec = OutputSpec()

    def to_dict(self) -> dict[str, Any]:
        return _jsonable(asdict(self))

    def with_value(self, parameter: str, value) -> "ExperimentConfig":
        """Copy with one sweepable scalar replaced."""
        if parameter == "T_int":
            return replace(self, frame=replace(self.frame, T_int=float(value), t_s=None))
        if parameter == "M":
            return replace(self, frame=replace(self.frame, M=int(value), t_s=None))
        if parameter == "xi_v":
            return replace(self, field=replace(self.field, xi_v=float(value), v_const=None))
        if parameter == "trials":
            return replace(self, simulation=replace(self.simulation, trials=int(value)))
        if parameter == "N_EM":
            return replace(self, channel=replace(self.channel, N_EM=float(value)))
        if parameter == "x0":
            return replace(self, channel=replace(self.channel, x0=float(value)))
        raise ConfigError(f"cannot sweep {parameter!r}; choose one of {SWEEP_PARAMETERS}")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _tuplify(obj):
    if isinstance(obj, list):
        return tuple(_tuplify(v) for v in obj)
    return obj


def _block(cls, data, where: str, required: tuple[str, ...] = ()):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
    known = {f.name for f in fields(cls) if f.init}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}; allowed {sorted(known)}")
    missing = [k for k in required if data.get(k) is None]
    if missing:
        raise ConfigError(f"{where}: missing required key(s) {missing}")
    try:
        return cls(**{k: _tuplify(v) for k, v in data.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _validate_field(spec: FieldSpec) -> None:
    if spec.variant not in VARIANTS:
        raise ConfigError(f"field.variant must be one of {VARIANTS}, got {spec.variant!r}")
    if spec.variant in ("sinusoidal", "exponential") and spec.xi_v is None:
        raise ConfigError(f"field: variant {spec.variant!r} needs xi_v")
    if spec.variant == "constant" and spec.xi_v is None and spec.v_const is None:
        raise ConfigError("field: constant variant needs v_const or xi_v")
    if spec.variant == "piecewise" and not spec.knots:
        raise ConfigError("field: piecewise variant needs knots")
    if spec.xi_v is not None and not (spec.xi_v > 0 and math.isfinite(spec.xi_v)):
        raise ConfigError(f"field.xi_v must be positive, got {spec.xi_v}")


def config_from_dict(data: dict[str, Any]) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    if "config" in data and ("subcommand" in data or "result" in data):
        # manifest or JSON artifact: re-run from the embedded resolved config
        data = data["config"]
    top = {f.name for f in fields(ExperimentConfig)}
    unknown = set(data) - top
    if unknown:
        raise ConfigError(f"unknown top-level key(s) {sorted(unknown)}; allowed {sorted(top)}")
    if "field" not in data:
        raise ConfigError("missing 'field' block (exactly one field variant must be selected)")
    spec = _block(FieldSpec, data["field"], "field", required=("variant",))
    _validate_field(spec)
    detector = _block(DetectorSpec, data.get("detector"), "detector")
    if detector.mode not in ("auto", "explicit"):
        raise ConfigError("detector.mode must be 'auto' or 'explicit'")
    if detector.mode == "explicit" and (detector.weights is None or detector.gamma is None):
        raise ConfigError("detector: explicit mode needs weights and gamma")
    if detector.weights_mode not in ("template", "pilot"):
        raise ConfigError("detector.weights_mode must be 'template' or 'pilot'")
    sweep = None
    if data.get("sweep") is not None:
        sweep = _block(SweepSpec, data["sweep"], "sweep", required=("parameter", "values"))
        if sweep.parameter not in SWEEP_PARAMETERS:
            raise ConfigError(f"sweep.parameter must be one of {SWEEP_PARAMETERS}, got {sweep.parameter!r}")
    output = _block(OutputSpec, data.get("output"), "output")
    if not set(output.formats) <= {"csv", "json"}:
        raise ConfigError("output.formats may only contain 'csv' and 'json'")
    cfg = ExperimentConfig(
        field=spec,
        channel=_block(ChannelParams, data.get("channel"), "channel"),
        frame=_block(FrameConfig, data.get("frame"), "frame"),
        detector=detector,
        simulation=_block(SimulationSpec, data.get("simulation"), "simulation"),
        sweep=sweep,
        bbo=_block(BBOSpec, data.get("bbo"), "bbo"),
        output=output,
    )
    if detector.weights is not None and len(detector.weights) != cfg.frame.M:
        raise ConfigError(f"detector.weights has {len(detector.weights)} entries, frame.M={cfg.frame.M}")
    seq = cfg.simulation.sequence
    if seq is not None and (len(seq) != cfg.frame.B or any(b not in (0, 1) for b in seq)):
        raise ConfigError(f"simulation.sequence must be {cfg.frame.B} bits of 0/1")
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return config_from_dict(data)


def build_profile(cfg: ExperimentConfig) -> VelocityProfile:
    """Construct (designing if needed) the velocity profile of a config.

    Designer failures (:class:`~ephoresim.errors.InfeasibleDesign`, ...)
    propagate.
    """
    spec, T, x0 = cfg.field, cfg.frame.T_int, cfg.channel.x0
    if spec.variant == "constant":
        v = spec.v_const if spec.v_const is not None else math.sqrt(spec.xi_v)
        return Constant(v, period=spec.period)
    if spec.variant == "piecewise":
        return PiecewiseCustom(tuple(tuple(k) for k in spec.knots), period=spec.period)
    if spec.variant == "sinusoidal":
        p = design_sinusoidal(DesignConstraint(spec.xi_v, T, x0))
        if spec.phi_v is not None:
            p = Sinusoidal(p.A_v, p.DC_v, p.f_v, float(spec.phi_v), p.period)
        return p
    x1 = spec.x1 if spec.x1 is not None else x0
    return design_exponential(DesignConstraint(spec.xi_v, T, x0, x1))


def simulation_config(cfg: ExperimentConfig, profile: VelocityProfile | None = None) -> SimulationConfig:
    profile = profile if profile is not None else build_profile(cfg)
    det = None
    if cfg.detector.mode == "explicit":
        det = DetectorConfig(cfg.detector.weights, cfg.detector.gamma)
    seq = cfg.simulation.sequence
    return SimulationConfig(
        channel=cfg.channel,
        profile=profile,
        frame=cfg.frame,
        detector=det,
        trials=cfg.simulation.trials,
        seed=cfg.simulation.seed,
        sequence=BitSequence(seq) if seq is not None else None,
        weights_mode=cfg.detector.weights_mode,
        isi_window=cfg.simulation.isi_window,
        metadata={"xi_v": cfg.field.xi_v, "field_label": _label(cfg.field)},
    )


def _label(spec: FieldSpec) -> str:
    if spec.variant == "sinusoidal" and spec.phi_v is not None:
        return f"sinusoidal(phi_v={spec.phi_v:.4g})"
    return spec.variant
