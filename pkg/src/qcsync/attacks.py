"""Adversarial delay trajectories and the tampered clock-difference algebra.

A delay trajectory is the attacker-controlled extra propagation delay, in
picoseconds, inserted on one direction of a synchronization link as a
function of wall-clock time in seconds.  Trajectories are linear
superpositions of three event shapes:

* jump: step to a fixed value at the onset and hold it,
* spike: rectangular pulse supported on ``[start_s, start_s + width_s)``,
* gradual: slow ramp (linear, logarithmic, exponential or polynomial)
  gated at the onset, optionally staircase-quantized in time, and
  optionally frozen or direction-reversed after a hold point.

With directional delays ``m`` (forward) and ``n`` (backward) and scheme
coefficients ``(alpha, beta)``, the victim computes the tampered clock
difference ``delta = raw_delta - (alpha * m + beta * n) / 2``.

Sign convention: positive delay values lengthen the optical path in the
corresponding direction.  All evaluation functions accept scalars or numpy
arrays of times and are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Union

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "AttackPattern",
    "SchemeKind",
    "CoordinationMode",
    "LinearBehavior",
    "LogarithmicBehavior",
    "ExponentialBehavior",
    "PolynomialBehavior",
    "GradualBehavior",
    "AttackEvent",
    "DelayTrajectory",
    "CoordinationRule",
    "QcsScheme",
    "heaviside",
    "eval_event",
    "eval_trajectory",
    "derive_n_from_m",
    "scheme_coefficients",
    "tampered_clock_difference",
]


class AttackPattern(str, Enum):
    JUMP = "jump"
    SPIKE = "spike"
    GRADUAL = "gradual"


class SchemeKind(str, Enum):
    TWO_WAY = "two_way"
    HOM_INTERFERENCE = "hom_interference"
    ROUND_TRIP = "round_trip"


class CoordinationMode(str, Enum):
    INDEPENDENT = "independent"
    PROPORTIONAL = "proportional"


# --------------------------------------------------------------------------
# Gradual ramp shapes.  Every shape satisfies f(0) = 0 so the onset step is
# controlled solely by the amplitude gate.
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearBehavior:
    """Ramp advancing ``rate_per_step`` amplitude units per step interval.

    The step basis is ``step_interval_s`` of the owning event when the event
    is staircase-quantized, and 1 s in continuous mode, so with the default
    rate the value grows by one amplitude unit per step (or per second).
    """

    rate_per_step: float = 1.0


@dataclass(frozen=True)
class LogarithmicBehavior:
    """Ramp ``log(1 + u / scale_s)`` of elapsed time ``u``."""

    scale_s: float = 1.0


@dataclass(frozen=True)
class ExponentialBehavior:
    """Ramp ``exp(rate_per_s * u) - 1`` of elapsed time ``u``."""

    rate_per_s: float = 0.01


@dataclass(frozen=True)
class PolynomialBehavior:
    """Ramp ``sum_k c_k * u**(k+1)``; coefficients start at the linear term."""

    coefficients: tuple = (1.0,)


GradualBehavior = Union[
    LinearBehavior, LogarithmicBehavior, ExponentialBehavior, PolynomialBehavior
]

_BEHAVIOR_TYPES = (
    LinearBehavior,
    LogarithmicBehavior,
    ExponentialBehavior,
    PolynomialBehavior,
)


def _shape(behavior, u, basis_s):
    """Evaluate the ramp shape at elapsed time ``u`` (array, seconds)."""
    if isinstance(behavior, LinearBehavior):
        return behavior.rate_per_step * (u / basis_s)
    if isinstance(behavior, LogarithmicBehavior):
        return np.log1p(u / behavior.scale_s)
    if isinstance(behavior, ExponentialBehavior):
        return np.expm1(behavior.rate_per_s * u)
    if isinstance(behavior, PolynomialBehavior):
        out = np.zeros_like(u)
        for k, c in enumerate(behavior.coefficients):
            out += c * u ** (k + 1)
        return out
    raise ConfigurationError(f"unsupported gradual behavior: {behavior!r}")


def _validate_behavior(behavior):
    if not isinstance(behavior, _BEHAVIOR_TYPES):
        raise ConfigurationError(f"unsupported gradual behavior: {behavior!r}")
    if isinstance(behavior, LinearBehavior):
        if not math.isfinite(behavior.rate_per_step):
            raise ConfigurationError("linear rate_per_step must be finite")
    elif isinstance(behavior, LogarithmicBehavior):
        if not (behavior.scale_s > 0 and math.isfinite(behavior.scale_s)):
            raise ConfigurationError("logarithmic scale_s must be > 0")
    elif isinstance(behavior, ExponentialBehavior):
        if not math.isfinite(behavior.rate_per_s):
            raise ConfigurationError("exponential rate_per_s must be finite")
    else:
        if not behavior.coefficients:
            raise ConfigurationError("polynomial coefficients must be non-empty")
        if not all(math.isfinite(c) for c in behavior.coefficients):
            raise ConfigurationError("polynomial coefficients must be finite")


# --------------------------------------------------------------------------
# Events and trajectories.
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AttackEvent:
    """One delay event: a jump, a spike, or a gradual ramp.

    ``width_s`` applies to spikes only (default one measurement epoch, 1 s).
    ``behavior``, ``step_interval_s``, ``end_s`` and ``reverse_after_end``
    apply to gradual events only.  ``step_interval_s > 0`` staircase-
    quantizes the ramp: the value advances only at integer multiples of the
    step interval past the onset.  ``end_s`` freezes the ramp at its value
    there; with ``reverse_after_end`` the per-step increment is negated
    instead, mirroring the ramp back toward zero.
    """

    pattern: AttackPattern
    amplitude_ps: float
    start_s: float
    width_s: Optional[float] = None
    behavior: Optional[GradualBehavior] = None
    step_interval_s: float = 0.0
    end_s: Optional[float] = None
    reverse_after_end: bool = False

    def __post_init__(self):
        pattern = AttackPattern(self.pattern)
        object.__setattr__(self, "pattern", pattern)
        if not math.isfinite(self.amplitude_ps):
            raise ConfigurationError("amplitude_ps must be finite")
        if not (math.isfinite(self.start_s) and self.start_s >= 0):
            raise ConfigurationError("start_s must be finite and >= 0")

        gradual_only = {
            "behavior": self.behavior is not None,
            "step_interval_s": self.step_interval_s != 0.0,
            "end_s": self.end_s is not None,
            "reverse_after_end": self.reverse_after_end,
        }
        if pattern is AttackPattern.SPIKE:
            if self.width_s is None:
                object.__setattr__(self, "width_s", 1.0)
            if not (math.isfinite(self.width_s) and self.width_s > 0):
                raise ConfigurationError("width_s must be > 0 for spike events")
        elif self.width_s is not None:
            raise ConfigurationError(f"width_s not allowed for {pattern.value} events")

        if pattern is AttackPattern.GRADUAL:
            if self.behavior is None:
                object.__setattr__(self, "behavior", LinearBehavior())
            _validate_behavior(self.behavior)
            if not (math.isfinite(self.step_interval_s) and self.step_interval_s >= 0):
                raise ConfigurationError("step_interval_s must be >= 0")
            if self.end_s is not None and not (
                math.isfinite(self.end_s) and self.end_s > self.start_s
            ):
                raise ConfigurationError("end_s must be > start_s")
        else:
            offending = [k for k, v in gradual_only.items() if v]
            if offending:
                raise ConfigurationError(
                    f"{', '.join(offending)} only allowed for gradual events"
                )


@dataclass(frozen=True)
class DelayTrajectory:
    """Superposition of attack events; evaluates to their sum."""

    events: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        for e in self.events:
            if not isinstance(e, AttackEvent):
                raise ConfigurationError(f"not an AttackEvent: {e!r}")


@dataclass(frozen=True)
class CoordinationRule:
    """How the backward delay relates to the forward delay.

    Proportional coordination sets N(t) = n * M(t); n = -1 keeps the
    round-trip transit time constant, hiding the attack from round-trip
    monitoring.
    """

    mode: CoordinationMode
    n: Optional[float] = None

    def __post_init__(self):
        mode = CoordinationMode(self.mode)
        object.__setattr__(self, "mode", mode)
        if mode is CoordinationMode.PROPORTIONAL:
            if self.n is None:
                object.__setattr__(self, "n", -1.0)
            if not math.isfinite(self.n):
                raise ConfigurationError("proportional coefficient n must be finite")
        elif self.n is not None:
            raise ConfigurationError("n only allowed for proportional coordination")


_SCHEME_COEFFICIENTS = {
    SchemeKind.TWO_WAY: (1, -1),
    SchemeKind.HOM_INTERFERENCE: (-1, 1),
    SchemeKind.ROUND_TRIP: (-1, 1),
}


def scheme_coefficients(kind):
    """Return the ``(alpha, beta)`` coefficient pair for a scheme kind."""
    try:
        return _SCHEME_COEFFICIENTS[SchemeKind(kind)]
    except ValueError:
        raise ConfigurationError(f"unknown scheme kind: {kind!r}") from None


@dataclass(frozen=True)
class QcsScheme:
    """Synchronization scheme with its fixed coefficient pair."""

    kind: SchemeKind
    alpha: int = field(init=False)
    beta: int = field(init=False)

    def __post_init__(self):
        kind = SchemeKind(self.kind)
        object.__setattr__(self, "kind", kind)
        a, b = scheme_coefficients(kind)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)


# --------------------------------------------------------------------------
# Evaluation.
# --------------------------------------------------------------------------


def heaviside(t, t0):
    """Unit step: 0 for t < t0, 1 for t >= t0 (boundary inclusive)."""
    if not (math.isfinite(t) and math.isfinite(t0)):
        raise ConfigurationError("heaviside arguments must be finite")
    return 1 if t >= t0 else 0


def _quantize_elapsed(u, step_s):
    if step_s <= 0:
        return u
    return np.floor(u / step_s) * step_s


def _gradual_value(event, u):
    """Gradual ramp value for clipped elapsed time ``u >= 0`` (array)."""
    basis = event.step_interval_s if event.step_interval_s > 0 else 1.0
    amp = event.amplitude_ps

    def g(v):
        return amp * _shape(event.behavior, _quantize_elapsed(v, event.step_interval_s), basis)

    out = g(u)
    if event.end_s is not None:
        u_end = event.end_s - event.start_s
        held = g(np.asarray(u_end, dtype=float))
        if event.reverse_after_end:
            out = np.where(u > u_end, 2.0 * held - out, out)
        else:
            out = np.where(u > u_end, held, out)
    return out


def eval_event(event, t_s):
    """Delay contribution of one event at time(s) ``t_s`` (seconds) in ps."""
    t = np.asarray(t_s, dtype=float)
    scalar = t.ndim == 0
    u = t - event.start_s
    gate = u >= 0.0
    if event.pattern is AttackPattern.JUMP:
        out = event.amplitude_ps * gate
    elif event.pattern is AttackPattern.SPIKE:
        out = event.amplitude_ps * (gate & (u < event.width_s))
    elif event.pattern is AttackPattern.GRADUAL:
        out = _gradual_value(event, np.clip(u, 0.0, None)) * gate
    else:  # pragma: no cover - enum exhausts patterns
        raise ConfigurationError(f"unsupported attack pattern: {event.pattern!r}")
    return float(out) if scalar else out


def eval_trajectory(traj, t_s):
    """Sum of event contributions at time(s) ``t_s``; empty trajectory is 0."""
    t = np.asarray(t_s, dtype=float)
    scalar = t.ndim == 0
    out = np.zeros_like(t)
    for event in traj.events:
        out = out + eval_event(event, t)
    return float(out) if scalar else out


def derive_n_from_m(m, rule, independent_n=None):
    """Backward trajectory implied by the coordination rule.

    Proportional mode scales every event amplitude by ``n`` so that the
    backward delay equals ``n * M(t)`` at all times.  Independent mode
    passes through the separately supplied trajectory (empty when absent).
    """
    if rule.mode is CoordinationMode.PROPORTIONAL:
        scaled = tuple(
            replace(e, amplitude_ps=rule.n * e.amplitude_ps) for e in m.events
        )
        return DelayTrajectory(scaled)
    return independent_n if independent_n is not None else DelayTrajectory()


def tampered_clock_difference(delta_t_ps, m_ps, n_ps, scheme):
    """Clock difference the victim computes under directional delays.

    Evaluates ``delta_t - (alpha * m + beta * n) / 2`` with the scheme's
    coefficient pair.  Accepts scalars or arrays.
    """
    delta_t = np.asarray(delta_t_ps, dtype=float)
    m = np.asarray(m_ps, dtype=float)
    n = np.asarray(n_ps, dtype=float)
    if not (np.all(np.isfinite(delta_t)) and np.all(np.isfinite(m)) and np.all(np.isfinite(n))):
        raise ConfigurationError("tampered_clock_difference requires finite inputs")
    out = delta_t - (scheme.alpha * m + scheme.beta * n) / 2.0
    return float(out) if out.ndim == 0 else out
