"""Attack scenario documents: schema, validation and builtin campaigns.

A scenario is a JSON object (version field ``schema_version: 1``) that
fully determines one campaign: the synchronization scheme, run length and
seed, the attack events on each channel direction (or a coordination rule
deriving one from the other), the photon-chain configuration for full
simulation, a per-epoch noise model for analytic runs, estimator settings
and optional detector settings.  Field names carry explicit units (_ps,
_s, _hz).  Validation is fail-closed: unknown fields are rejected, every
problem is reported with its field path, and a scenario only constructs if
no issue was found.

The builtin registry encodes the reference experiments: a no-attack
baseline, the jump grid {-10, -50, -100, -200, -500} ps with N = -M over
500 s, a five-spike train at onsets {330, 662, 1022, 1376, 1709} s with
amplitudes rising -500..-100 ps, and the two staircase gradual attacks
(-2 ps per 35 s one-way, frozen after 2100 s; -4 ps per 35 s with N = -M,
direction-reversed after 1750 s) over 3500 s.  Every parameter not pinned
by the reference experiments takes the module default and is echoed into
run metadata so divergence stays auditable.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple

from .attacks import (
    AttackEvent,
    AttackPattern,
    CoordinationMode,
    CoordinationRule,
    DelayTrajectory,
    ExponentialBehavior,
    LinearBehavior,
    LogarithmicBehavior,
    PolynomialBehavior,
    QcsScheme,
    SchemeKind,
    derive_n_from_m,
)
from .detection import CusumConfig
from .errors import ConfigurationError, SchemaError
from .estimator import EstimatorConfig
from .simulation import (
    ChannelConfig,
    ClockConfig,
    DetectorConfig,
    SourceConfig,
    TdcConfig,
)

__all__ = [
    "RunMode",
    "RunConfig",
    "AnalyticConfig",
    "ThresholdSpec",
    "ScenarioDetection",
    "AttackScenario",
    "validate_scenario_dict",
    "validate_scenario",
    "load_scenario_file",
    "builtin_scenario",
    "builtin_names",
    "figure_bundle",
    "FIGURE_IDS",
    "SCHEMA_VERSION",
]

SCHEMA_VERSION = 1


class RunMode(str, Enum):
    FULL_SIM = "full_sim"
    ANALYTIC = "analytic"


@dataclass(frozen=True)
class RunConfig:
    duration_s: float
    epoch_s: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not (self.duration_s > 0 and math.isfinite(self.duration_s)):
            raise ConfigurationError("duration_s must be > 0")
        if not (self.epoch_s > 0 and math.isfinite(self.epoch_s)):
            raise ConfigurationError("epoch_s must be > 0")


@dataclass(frozen=True)
class AnalyticConfig:
    """Per-epoch Gaussian noise model replacing the photon chain."""

    noise_sigma_ps: float
    baseline_delta_ps: float = -9900.0

    def __post_init__(self):
        if not (self.noise_sigma_ps >= 0 and math.isfinite(self.noise_sigma_ps)):
            raise ConfigurationError("noise_sigma_ps must be >= 0")
        if not math.isfinite(self.baseline_delta_ps):
            raise ConfigurationError("baseline_delta_ps must be finite")


@dataclass(frozen=True)
class ThresholdSpec:
    """Threshold monitor settings; threshold defaults to 4x baseline std."""

    baseline_window_epochs: int = 60
    threshold_ps: Optional[float] = None

    def __post_init__(self):
        if self.baseline_window_epochs < 10:
            raise ConfigurationError("baseline_window_epochs must be >= 10")
        if self.threshold_ps is not None and not (
            self.threshold_ps > 0 and math.isfinite(self.threshold_ps)
        ):
            raise ConfigurationError("threshold_ps must be > 0")


@dataclass(frozen=True)
class ScenarioDetection:
    threshold: Optional[ThresholdSpec] = None
    cusum: Optional[CusumConfig] = None


@dataclass
class AttackScenario:
    """Validated campaign description; construct via ``from_dict``."""

    name: str
    scheme: SchemeKind
    mode: RunMode
    run: RunConfig
    coordination: CoordinationRule
    m_events: Tuple[AttackEvent, ...] = ()
    n_events: Optional[Tuple[AttackEvent, ...]] = None
    source: SourceConfig = field(default_factory=SourceConfig)
    detectors: DetectorConfig = field(default_factory=DetectorConfig)
    tdc: TdcConfig = field(default_factory=TdcConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    clock: ClockConfig = field(default_factory=ClockConfig)
    analytic: Optional[AnalyticConfig] = None
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    reference_ps: float = 0.0
    detection: Optional[ScenarioDetection] = None
    schema_version: int = SCHEMA_VERSION

    def qcs_scheme(self):
        return QcsScheme(self.scheme)

    def m_trajectory(self):
        return DelayTrajectory(self.m_events)

    def n_trajectory(self):
        independent = DelayTrajectory(self.n_events) if self.n_events else None
        return derive_n_from_m(self.m_trajectory(), self.coordination, independent)

    def first_attack_onset_s(self):
        starts = [e.start_s for e in self.m_events]
        if self.n_events:
            starts.extend(e.start_s for e in self.n_events)
        return min(starts) if starts else None

    def to_dict(self):
        """Fully resolved JSON-shaped dict (defaults filled in)."""
        doc = {
            "schema_version": self.schema_version,
            "name": self.name,
            "scheme": self.scheme.value,
            "mode": self.mode.value,
            "run": {
                "duration_s": self.run.duration_s,
                "epoch_s": self.run.epoch_s,
                "seed": self.run.seed,
            },
            "coordination": _coordination_to_dict(self.coordination),
            "m_events": [_event_to_dict(e) for e in self.m_events],
            "source": {
                "pair_rate_hz": self.source.pair_rate_hz,
                "intrinsic_correlation_jitter_ps": self.source.intrinsic_correlation_jitter_ps,
            },
            "detectors": {
                "efficiency": self.detectors.efficiency,
                "jitter_sigma_ps": self.detectors.jitter_sigma_ps,
                "dead_time_ps": self.detectors.dead_time_ps,
            },
            "tdc": {
                "resolution_ps": self.tdc.resolution_ps,
                "jitter_sigma_ps": self.tdc.jitter_sigma_ps,
            },
            "channel": {
                "one_way_delay_ps": self.channel.one_way_delay_ps,
                "loss_survival_prob": self.channel.loss_survival_prob,
                "splitter_loopback_prob": self.channel.splitter_loopback_prob,
            },
            "clock": {
                "offset_ps": self.clock.offset_ps,
                "drift_ps_per_s": self.clock.drift_ps_per_s,
                "white_phase_noise_sigma_ps": self.clock.white_phase_noise_sigma_ps,
            },
            "estimator": {
                "bin_width_ps": self.estimator.bin_width_ps,
                "window_halfwidth_ps": self.estimator.window_halfwidth_ps,
            },
            "reference_ps": self.reference_ps,
        }
        if self.n_events is not None:
            doc["n_events"] = [_event_to_dict(e) for e in self.n_events]
        if self.analytic is not None:
            doc["analytic"] = {
                "noise_sigma_ps": self.analytic.noise_sigma_ps,
                "baseline_delta_ps": self.analytic.baseline_delta_ps,
            }
        if self.detection is not None:
            det = {}
            if self.detection.threshold is not None:
                det["threshold"] = {
                    "baseline_window_epochs": self.detection.threshold.baseline_window_epochs,
                    "threshold_ps": self.detection.threshold.threshold_ps,
                }
            if self.detection.cusum is not None:
                det["cusum"] = {
                    "reference_drift_ps": self.detection.cusum.reference_drift_ps,
                    "decision_limit_ps": self.detection.cusum.decision_limit_ps,
                }
            doc["detection"] = det
        return doc

    def config_hash(self):
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, doc):
        scenario, issues = _parse_scenario(doc)
        if issues:
            raise SchemaError(issues)
        return scenario


# --------------------------------------------------------------------------
# Serialization helpers.
# --------------------------------------------------------------------------


def _coordination_to_dict(rule):
    if rule.mode is CoordinationMode.PROPORTIONAL:
        return {"mode": "proportional", "n": rule.n}
    return {"mode": "independent"}


def _behavior_to_dict(behavior):
    if isinstance(behavior, LinearBehavior):
        return {"kind": "linear", "rate_per_step": behavior.rate_per_step}
    if isinstance(behavior, LogarithmicBehavior):
        return {"kind": "logarithmic", "scale_s": behavior.scale_s}
    if isinstance(behavior, ExponentialBehavior):
        return {"kind": "exponential", "rate_per_s": behavior.rate_per_s}
    return {"kind": "polynomial", "coefficients": list(behavior.coefficients)}


def _event_to_dict(event):
    doc = {
        "pattern": event.pattern.value,
        "amplitude_ps": event.amplitude_ps,
        "start_s": event.start_s,
    }
    if event.pattern is AttackPattern.SPIKE:
        doc["width_s"] = event.width_s
    if event.pattern is AttackPattern.GRADUAL:
        doc["behavior"] = _behavior_to_dict(event.behavior)
        doc["step_interval_s"] = event.step_interval_s
        if event.end_s is not None:
            doc["end_s"] = event.end_s
            doc["reverse_after_end"] = event.reverse_after_end
    return doc


# --------------------------------------------------------------------------
# Validation.  Every helper appends (path, message) issues and returns None
# on failure; the scenario constructs only with an empty issue list.
# --------------------------------------------------------------------------


def _check_keys(doc, path, allowed, issues):
    for key in doc:
        if key not in allowed:
            issues.append((f"{path}.{key}" if path else key, "unknown field"))


def _get_number(doc, key, path, issues, required=False, default=None, integer=False):
    if key not in doc:
        if required:
            issues.append((f"{path}.{key}", "required field missing"))
            return None
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        issues.append((f"{path}.{key}", "must be a number"))
        return None
    if integer and not isinstance(value, int):
        issues.append((f"{path}.{key}", "must be an integer"))
        return None
    return value


def _get_string(doc, key, path, issues, choices=None, required=False, default=None):
    if key not in doc:
        if required:
            issues.append((f"{path}.{key}", "required field missing"))
            return None
        return default
    value = doc[key]
    if not isinstance(value, str):
        issues.append((f"{path}.{key}", "must be a string"))
        return None
    if choices is not None and value not in choices:
        issues.append((f"{path}.{key}", f"must be one of {sorted(choices)}"))
        return None
    return value


def _get_bool(doc, key, path, issues, default=False):
    if key not in doc:
        return default
    value = doc[key]
    if not isinstance(value, bool):
        issues.append((f"{path}.{key}", "must be a boolean"))
        return None
    return value


def _get_mapping(doc, key, path, issues, required=False):
    if key not in doc or doc[key] is None:
        if required:
            issues.append((f"{path}.{key}" if path else key, "required section missing"))
        return None
    value = doc[key]
    if not isinstance(value, dict):
        issues.append((f"{path}.{key}" if path else key, "must be an object"))
        return None
    return value


def _construct(factory, path, issues, **kwargs):
    """Build a config dataclass, converting its validation error to an issue."""
    try:
        return factory(**kwargs)
    except ConfigurationError as exc:
        issues.append((path, str(exc)))
        return None


_BEHAVIOR_FIELDS = {
    "linear": ("rate_per_step", LinearBehavior),
    "logarithmic": ("scale_s", LogarithmicBehavior),
    "exponential": ("rate_per_s", ExponentialBehavior),
    "polynomial": ("coefficients", PolynomialBehavior),
}


def _parse_behavior(doc, path, issues):
    if not isinstance(doc, dict):
        issues.append((path, "must be an object"))
        return None
    kind = _get_string(doc, "kind", path, issues, choices=set(_BEHAVIOR_FIELDS), required=True)
    if kind is None:
        return None
    param, factory = _BEHAVIOR_FIELDS[kind]
    _check_keys(doc, path, {"kind", param}, issues)
    if kind == "polynomial":
        coeffs = doc.get("coefficients")
        if coeffs is None or not isinstance(coeffs, list) or not coeffs:
            issues.append((f"{path}.coefficients", "must be a non-empty list of numbers"))
            return None
        if not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in coeffs):
            issues.append((f"{path}.coefficients", "must be a non-empty list of numbers"))
            return None
        return _construct(factory, path, issues, coefficients=tuple(float(c) for c in coeffs))
    if param in doc:
        value = _get_number(doc, param, path, issues, required=True)
        if value is None:
            return None
        return _construct(factory, path, issues, **{param: float(value)})
    return _construct(factory, path, issues)


_EVENT_KEYS = {
    "pattern",
    "amplitude_ps",
    "start_s",
    "width_s",
    "behavior",
    "step_interval_s",
    "end_s",
    "reverse_after_end",
}


def _parse_event(doc, path, issues):
    if not isinstance(doc, dict):
        issues.append((path, "must be an object"))
        return None
    _check_keys(doc, path, _EVENT_KEYS, issues)
    pattern = _get_string(
        doc, "pattern", path, issues, choices={p.value for p in AttackPattern}, required=True
    )
    amplitude = _get_number(doc, "amplitude_ps", path, issues, required=True)
    start = _get_number(doc, "start_s", path, issues, required=True)
    if pattern is None or amplitude is None or start is None:
        return None

    kwargs = {
        "pattern": AttackPattern(pattern),
        "amplitude_ps": float(amplitude),
        "start_s": float(start),
    }
    if "width_s" in doc:
        width = _get_number(doc, "width_s", path, issues, required=True)
        if width is None:
            return None
        kwargs["width_s"] = float(width)
    if "behavior" in doc:
        behavior = _parse_behavior(doc["behavior"], f"{path}.behavior", issues)
        if behavior is None:
            return None
        kwargs["behavior"] = behavior
    if "step_interval_s" in doc:
        step = _get_number(doc, "step_interval_s", path, issues, required=True)
        if step is None:
            return None
        kwargs["step_interval_s"] = float(step)
    if "end_s" in doc:
        end = _get_number(doc, "end_s", path, issues, required=True)
        if end is None:
            return None
        kwargs["end_s"] = float(end)
    reverse = _get_bool(doc, "reverse_after_end", path, issues)
    if reverse is None:
        return None
    if reverse:
        kwargs["reverse_after_end"] = True

    try:
        return AttackEvent(**kwargs)
    except ConfigurationError as exc:
        # Name the offending field where the message identifies one.
        message = str(exc)
        key = message.split(" ", 1)[0]
        target = f"{path}.{key}" if key in _EVENT_KEYS else path
        issues.append((target, message))
        return None


def _parse_events(doc, key, path, issues):
    if key not in doc or doc[key] is None:
        return None
    value = doc[key]
    if not isinstance(value, list):
        issues.append((key, "must be a list of events"))
        return None
    events = []
    ok = True
    for i, item in enumerate(value):
        event = _parse_event(item, f"{key}[{i}]", issues)
        if event is None:
            ok = False
        else:
            events.append(event)
    return tuple(events) if ok else None


def _parse_coordination(doc, issues):
    section = _get_mapping(doc, "coordination", "", issues, required=True)
    if section is None:
        return None
    _check_keys(section, "coordination", {"mode", "n"}, issues)
    mode = _get_string(
        section,
        "mode",
        "coordination",
        issues,
        choices={m.value for m in CoordinationMode},
        required=True,
    )
    if mode is None:
        return None
    if mode == "proportional":
        n = _get_number(section, "n", "coordination", issues, default=-1.0)
        if n is None:
            return None
        return _construct(
            CoordinationRule,
            "coordination",
            issues,
            mode=CoordinationMode.PROPORTIONAL,
            n=float(n),
        )
    if "n" in section:
        issues.append(("coordination.n", "only allowed for proportional coordination"))
        return None
    return CoordinationRule(CoordinationMode.INDEPENDENT)


def _parse_section(doc, key, path, issues, fields, factory, required=False):
    """Parse a flat numeric config section into its dataclass."""
    section = _get_mapping(doc, key, "", issues, required=required)
    if section is None:
        return None if required else factory()
    _check_keys(section, path, set(fields), issues)
    kwargs = {}
    ok = True
    for name, (required_field, integer) in fields.items():
        value = _get_number(section, name, path, issues, required=required_field, integer=integer)
        if value is None:
            if required_field or name in section:
                ok = False
            continue
        kwargs[name] = value if integer else float(value)
    if not ok:
        return None
    return _construct(factory, path, issues, **kwargs)


_TOP_KEYS = {
    "schema_version",
    "name",
    "scheme",
    "mode",
    "run",
    "coordination",
    "m_events",
    "n_events",
    "source",
    "detectors",
    "tdc",
    "channel",
    "clock",
    "analytic",
    "estimator",
    "reference_ps",
    "detection",
}


def _parse_detection(doc, issues):
    section = _get_mapping(doc, "detection", "", issues)
    if section is None:
        return None
    _check_keys(section, "detection", {"threshold", "cusum"}, issues)
    threshold = None
    cusum = None
    if "threshold" in section and section["threshold"] is not None:
        sub = section["threshold"]
        if not isinstance(sub, dict):
            issues.append(("detection.threshold", "must be an object"))
            return None
        _check_keys(sub, "detection.threshold", {"baseline_window_epochs", "threshold_ps"}, issues)
        window = _get_number(
            sub, "baseline_window_epochs", "detection.threshold", issues, default=60, integer=True
        )
        level = _get_number(sub, "threshold_ps", "detection.threshold", issues)
        if window is None:
            return None
        threshold = _construct(
            ThresholdSpec,
            "detection.threshold",
            issues,
            baseline_window_epochs=window,
            threshold_ps=float(level) if level is not None else None,
        )
        if threshold is None:
            return None
    if "cusum" in section and section["cusum"] is not None:
        sub = section["cusum"]
        if not isinstance(sub, dict):
            issues.append(("detection.cusum", "must be an object"))
            return None
        _check_keys(sub, "detection.cusum", {"reference_drift_ps", "decision_limit_ps"}, issues)
        k = _get_number(sub, "reference_drift_ps", "detection.cusum", issues, required=True)
        h = _get_number(sub, "decision_limit_ps", "detection.cusum", issues, required=True)
        if k is None or h is None:
            return None
        cusum = _construct(
            CusumConfig,
            "detection.cusum",
            issues,
            reference_drift_ps=float(k),
            decision_limit_ps=float(h),
        )
        if cusum is None:
            return None
    return ScenarioDetection(threshold=threshold, cusum=cusum)


def _parse_scenario(doc):
    issues: List[Tuple[str, str]] = []
    if not isinstance(doc, dict):
        return None, [("", "scenario document must be a JSON object")]
    _check_keys(doc, "", _TOP_KEYS, issues)

    version = _get_number(doc, "schema_version", "", issues, required=True, integer=True)
    if version is not None and version != SCHEMA_VERSION:
        issues.append(("schema_version", f"unsupported version {version}, expected {SCHEMA_VERSION}"))
    name = _get_string(doc, "name", "", issues, required=True)
    scheme = _get_string(
        doc, "scheme", "", issues, choices={s.value for s in SchemeKind}, required=True
    )
    mode = _get_string(doc, "mode", "", issues, choices={m.value for m in RunMode}, required=True)

    run_section = _get_mapping(doc, "run", "", issues, required=True)
    run = None
    if run_section is not None:
        _check_keys(run_section, "run", {"duration_s", "epoch_s", "seed"}, issues)
        duration = _get_number(run_section, "duration_s", "run", issues, required=True)
        epoch = _get_number(run_section, "epoch_s", "run", issues, default=1.0)
        seed = _get_number(run_section, "seed", "run", issues, default=0, integer=True)
        if duration is not None and epoch is not None and seed is not None:
            run = _construct(
                RunConfig, "run", issues, duration_s=float(duration), epoch_s=float(epoch), seed=seed
            )

    coordination = _parse_coordination(doc, issues)
    if "m_events" not in doc:
        issues.append(("m_events", "required field missing"))
        m_events = None
    else:
        m_events = _parse_events(doc, "m_events", "m_events", issues)
    n_events = _parse_events(doc, "n_events", "n_events", issues)

    if (
        coordination is not None
        and coordination.mode is CoordinationMode.PROPORTIONAL
        and "n_events" in doc
        and doc["n_events"]
    ):
        issues.append(
            ("n_events", "conflicts with proportional coordination (N is derived from M)")
        )

    source = _parse_section(
        doc,
        "source",
        "source",
        issues,
        {"pair_rate_hz": (False, False), "intrinsic_correlation_jitter_ps": (False, False)},
        SourceConfig,
    )
    detectors = _parse_section(
        doc,
        "detectors",
        "detectors",
        issues,
        {
            "efficiency": (False, False),
            "jitter_sigma_ps": (False, False),
            "dead_time_ps": (False, False),
        },
        DetectorConfig,
    )
    tdc = _parse_section(
        doc,
        "tdc",
        "tdc",
        issues,
        {"resolution_ps": (False, False), "jitter_sigma_ps": (False, False)},
        TdcConfig,
    )
    channel = _parse_section(
        doc,
        "channel",
        "channel",
        issues,
        {
            "one_way_delay_ps": (False, False),
            "loss_survival_prob": (False, False),
            "splitter_loopback_prob": (False, False),
        },
        ChannelConfig,
    )
    clock = _parse_section(
        doc,
        "clock",
        "clock",
        issues,
        {
            "offset_ps": (False, False),
            "drift_ps_per_s": (False, False),
            "white_phase_noise_sigma_ps": (False, False),
        },
        ClockConfig,
    )
    estimator = _parse_section(
        doc,
        "estimator",
        "estimator",
        issues,
        {"bin_width_ps": (False, False), "window_halfwidth_ps": (False, True)},
        EstimatorConfig,
    )

    analytic = None
    if "analytic" in doc and doc["analytic"] is not None:
        section = _get_mapping(doc, "analytic", "", issues)
        if section is not None:
            _check_keys(section, "analytic", {"noise_sigma_ps", "baseline_delta_ps"}, issues)
            sigma = _get_number(section, "noise_sigma_ps", "analytic", issues, required=True)
            base = _get_number(section, "baseline_delta_ps", "analytic", issues, default=-9900.0)
            if sigma is not None and base is not None:
                analytic = _construct(
                    AnalyticConfig,
                    "analytic",
                    issues,
                    noise_sigma_ps=float(sigma),
                    baseline_delta_ps=float(base),
                )

    detection = _parse_detection(doc, issues)
    reference = _get_number(doc, "reference_ps", "", issues, default=0.0)

    if mode == RunMode.FULL_SIM.value and scheme is not None and scheme != SchemeKind.ROUND_TRIP.value:
        issues.append(("scheme", "full_sim mode supports round_trip only (others are analytic-only)"))
    if mode == RunMode.ANALYTIC.value and ("analytic" not in doc or doc["analytic"] is None):
        issues.append(("analytic", "analytic mode requires a noise model section"))

    if issues:
        return None, issues
    scenario = AttackScenario(
        name=name,
        scheme=SchemeKind(scheme),
        mode=RunMode(mode),
        run=run,
        coordination=coordination,
        m_events=m_events,
        n_events=n_events,
        source=source,
        detectors=detectors,
        tdc=tdc,
        channel=channel,
        clock=clock,
        analytic=analytic,
        estimator=estimator,
        reference_ps=float(reference),
        detection=detection,
    )
    return scenario, []


def validate_scenario_dict(doc):
    """All schema issues of a scenario document (empty list when valid)."""
    _, issues = _parse_scenario(doc)
    return issues


def load_scenario_file(path):
    """Load and validate a scenario JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError([("", f"not valid JSON: {exc}")]) from exc
    return AttackScenario.from_dict(doc)


def validate_scenario(path):
    """Validate a scenario file without executing it; returns issue list."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"no such scenario file: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            return [("", f"not valid JSON: {exc}")]
    return validate_scenario_dict(doc)


# --------------------------------------------------------------------------
# Builtin scenarios.
# --------------------------------------------------------------------------

# Long campaigns halve the source rate so multi-kilosecond runs stay within
# desk-scale memory and runtime; everything else uses module defaults.
_LONG_RUN_RATE_HZ = 5.0e3

_DETECTION_DEFAULT = {
    "threshold": {"baseline_window_epochs": 60, "threshold_ps": 200.0},
    "cusum": {"reference_drift_ps": 0.02, "decision_limit_ps": 15.0},
}


def _base_scenario(name, duration_s, seed, pair_rate_hz=None):
    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": name,
        "scheme": "round_trip",
        "mode": "full_sim",
        "run": {"duration_s": duration_s, "epoch_s": 1.0, "seed": seed},
        "coordination": {"mode": "proportional", "n": -1.0},
        "m_events": [],
        "analytic": {"noise_sigma_ps": 2.0, "baseline_delta_ps": -9900.0},
        "reference_ps": -9900.0,
        "detection": copy.deepcopy(_DETECTION_DEFAULT),
    }
    if pair_rate_hz is not None:
        doc["source"] = {"pair_rate_hz": pair_rate_hz}
    return doc


def _jump_scenario(amplitude_ps, seed):
    doc = _base_scenario(f"jump_{int(amplitude_ps)}ps", 500.0, seed)
    doc["m_events"] = [
        {"pattern": "jump", "amplitude_ps": amplitude_ps, "start_s": 250.0}
    ]
    return doc


def _spike_train_scenario():
    doc = _base_scenario("spike_train", 1800.0, 140, pair_rate_hz=_LONG_RUN_RATE_HZ)
    onsets = [330.0, 662.0, 1022.0, 1376.0, 1709.0]
    amplitudes = [-500.0, -400.0, -300.0, -200.0, -100.0]
    doc["m_events"] = [
        {"pattern": "spike", "amplitude_ps": a, "start_s": t, "width_s": 1.0}
        for t, a in zip(onsets, amplitudes)
    ]
    return doc


def _gradual_slow_scenario():
    # One-way ramp only: the backward path is untouched, so the measured
    # clock difference drifts at half the injected rate.
    doc = _base_scenario("gradual_slow", 3500.0, 150, pair_rate_hz=_LONG_RUN_RATE_HZ)
    doc["coordination"] = {"mode": "independent"}
    doc["m_events"] = [
        {
            "pattern": "gradual",
            "amplitude_ps": -2.0,
            "start_s": 0.0,
            "behavior": {"kind": "linear", "rate_per_step": 1.0},
            "step_interval_s": 35.0,
            "end_s": 2100.0,
            "reverse_after_end": False,
        }
    ]
    return doc


def _gradual_fast_reversing_scenario():
    # Faster two-sided ramp with N = -M; the reversal flag sends the ramp
    # back toward zero after the hold point.  An alternative reading of the
    # reference description keeps ramping positive instead; flip
    # reverse_after_end off and add a second event to model that.
    doc = _base_scenario(
        "gradual_fast_reversing", 3500.0, 151, pair_rate_hz=_LONG_RUN_RATE_HZ
    )
    doc["m_events"] = [
        {
            "pattern": "gradual",
            "amplitude_ps": -4.0,
            "start_s": 0.0,
            "behavior": {"kind": "linear", "rate_per_step": 1.0},
            "step_interval_s": 35.0,
            "end_s": 1750.0,
            "reverse_after_end": True,
        }
    ]
    return doc


_JUMP_AMPLITUDES = (-10.0, -50.0, -100.0, -200.0, -500.0)

_BUILTIN_FACTORIES = {
    "baseline": lambda: _base_scenario("baseline", 500.0, 101),
    "baseline_1800s": lambda: _base_scenario(
        "baseline_1800s", 1800.0, 141, pair_rate_hz=_LONG_RUN_RATE_HZ
    ),
    "baseline_3500s": lambda: _base_scenario(
        "baseline_3500s", 3500.0, 152, pair_rate_hz=_LONG_RUN_RATE_HZ
    ),
    "spike_train": _spike_train_scenario,
    "gradual_slow": _gradual_slow_scenario,
    "gradual_fast_reversing": _gradual_fast_reversing_scenario,
}
for _i, _amp in enumerate(_JUMP_AMPLITUDES):
    _BUILTIN_FACTORIES[f"jump_{int(_amp)}ps"] = (
        lambda amp=_amp, seed=111 + _i: _jump_scenario(amp, seed)
    )

FIGURE_IDS = ("fig2", "fig3", "fig4", "fig5")

_FIGURE_BUNDLES = {
    # TDEV overlay of the four regimes.
    "fig2": ("baseline", "jump_-500ps", "spike_train", "gradual_fast_reversing"),
    # Jump grid including the no-attack control group.
    "fig3": (
        "baseline",
        "jump_-10ps",
        "jump_-50ps",
        "jump_-100ps",
        "jump_-200ps",
        "jump_-500ps",
    ),
    # Spike train with its same-length control.
    "fig4": ("baseline_1800s", "spike_train"),
    # Gradual attacks with their same-length control.
    "fig5": ("baseline_3500s", "gradual_slow", "gradual_fast_reversing"),
}


def builtin_names():
    return sorted(_BUILTIN_FACTORIES)


def builtin_scenario(name):
    """Builtin scenario document (deep copy) by name."""
    try:
        factory = _BUILTIN_FACTORIES[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown builtin scenario {name!r}; available: {', '.join(builtin_names())}"
        ) from None
    return copy.deepcopy(factory())


def figure_bundle(figure_id):
    """Scenario names reproducing one reference figure."""
    try:
        return list(_FIGURE_BUNDLES[figure_id])
    except KeyError:
        raise ConfigurationError(
            f"unknown figure id {figure_id!r}; available: {', '.join(FIGURE_IDS)}"
        ) from None
