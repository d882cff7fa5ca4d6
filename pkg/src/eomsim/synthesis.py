"""Voltage-squared drive programs and the absorption-to-voltage compiler."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AboveReachable, BelowReachable, UndersampledWaveform, WaveformError
from .params import DeviceParams
from .steady import absorption_band

KINDS = ("sine", "sawtooth", "square", "table")
MIN_SAMPLES_PER_PERIOD = 16
UPPER_GUARD = 1e-6
RADICAND_SNAP = 1e-12


def unit_shape(kind: str, t, period: float, phase: float = 0.0):
    """Periodic shape in ``[0, 1]``.

    sine starts at its midpoint and rises; sawtooth ramps 0 -> 1 each period;
    square is 1 for the first half period and 0 for the second.
    """
    t = np.asarray(t, dtype=float)
    if kind == "sine":
        return 0.5 * (1.0 + np.sin(2.0 * np.pi * t / period + phase))
    frac = np.mod(t / period + phase / (2.0 * np.pi), 1.0)
    if kind == "sawtooth":
        return frac
    if kind == "square":
        return np.where(frac < 0.5, 1.0, 0.0)
    raise WaveformError(f"unknown periodic waveform kind {kind!r}")


def discontinuities(kind: str, period: float, duration: float, phase: float = 0.0) -> np.ndarray:
    """Times of the jumps of a sawtooth or square program within ``[0, duration]``."""
    if kind not in ("sawtooth", "square"):
        return np.empty(0)
    offsets = [0.0, 0.5] if kind == "square" else [0.0]
    shift = phase / (2.0 * np.pi) * period
    edges = []
    k = math.floor((-shift) / period) - 1
    while True:
        base = k * period - shift
        if base > duration:
            break
        edges.extend(base + o * period for o in offsets)
        k += 1
    edges = np.array(sorted(edges))
    return edges[(edges >= 0.0) & (edges <= duration)]


@dataclass(frozen=True)
class DriveWaveform:
    """A voltage-squared program ``U^2(t)`` in V^2."""

    kind: str
    u_sq_peak: float = 0.0
    u_sq_floor: float = 0.0
    period: float = 1.0
    duration: float = 1.0
    phase: float = 0.0
    table: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise WaveformError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.period > 0:
            raise WaveformError("period must be > 0")
        if not self.duration > 0:
            raise WaveformError("duration must be > 0")
        if self.kind == "table":
            if self.table is None:
                raise WaveformError("kind='table' needs a table of (t, u_sq) samples")
            t, u = (np.asarray(x, dtype=float) for x in self.table)
            if t.ndim != 1 or t.shape != u.shape or t.size < 1:
                raise WaveformError("table must hold two equal-length 1-D sequences")
            if np.any(np.diff(t) <= 0):
                raise WaveformError("table times must be strictly increasing")
            if np.any(u < 0) or not np.all(np.isfinite(u)):
                raise WaveformError("table values must be finite and >= 0")
            object.__setattr__(self, "table", (t, u))
        else:
            if self.u_sq_floor < 0:
                raise WaveformError("u_sq_floor must be >= 0")
            if self.u_sq_peak < self.u_sq_floor:
                raise WaveformError("u_sq_peak must be >= u_sq_floor")

    @classmethod
    def from_table(cls, t: Sequence[float], u_sq: Sequence[float]) -> "DriveWaveform":
        t = np.asarray(t, dtype=float)
        u_sq = np.asarray(u_sq, dtype=float)
        duration = float(t[-1]) if t.size and t[-1] > 0 else 1.0
        return cls("table", period=duration, duration=duration, table=(t, u_sq))

    def __call__(self, t):
        """Evaluate ``U^2`` at time(s) ``t``; tables hold their end values outside their span."""
        if self.kind == "table":
            ts, us = self.table
            return np.interp(t, ts, us)
        shape = unit_shape(self.kind, t, self.period, self.phase)
        return self.u_sq_floor + (self.u_sq_peak - self.u_sq_floor) * shape

    def peak_value(self) -> float:
        return float(np.max(self.table[1])) if self.kind == "table" else self.u_sq_peak

    def discontinuities(self) -> np.ndarray:
        return discontinuities(self.kind, self.period, self.duration, self.phase)


def sample_times(duration: float, sample_rate: float) -> np.ndarray:
    n = int(math.floor(duration * sample_rate + 1e-9)) + 1
    return np.arange(n) / sample_rate


def gen_waveform(spec: DriveWaveform, sample_rate: float) -> tuple[np.ndarray, np.ndarray]:
    """Sample ``spec`` uniformly on ``[0, duration]``."""
    if spec.kind != "table" and sample_rate * spec.period < MIN_SAMPLES_PER_PERIOD:
        raise UndersampledWaveform(
            f"{sample_rate * spec.period:.3g} samples per period < {MIN_SAMPLES_PER_PERIOD}"
        )
    t = sample_times(spec.duration, sample_rate)
    return t, np.asarray(spec(t), dtype=float)


@dataclass(frozen=True)
class TargetWaveform:
    """Desired normalized resonant absorption versus time."""

    t: np.ndarray
    a_target: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        a = np.asarray(self.a_target, dtype=float)
        if t.ndim != 1 or t.shape != a.shape:
            raise WaveformError("target needs equal-length 1-D time and absorption arrays")
        if t.size == 0:
            raise WaveformError("target is empty")
        if np.any(np.diff(t) <= 0):
            raise WaveformError("target times must be strictly increasing")
        if not np.all(np.isfinite(a)):
            raise WaveformError("target absorption must be finite")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "a_target", a)

    @classmethod
    def periodic(cls, kind: str, p: DeviceParams, period: float, duration: float,
                 sample_rate: float, lo: float = 0.1, hi: float = 0.9, phase: float = 0.0):
        """Standard target spanning fractions ``lo..hi`` of the reachable band."""
        a_min, a_max = absorption_band(p)
        t = sample_times(duration, sample_rate)
        a_lo = a_min + lo * (a_max - a_min)
        a_hi = a_min + hi * (a_max - a_min)
        return cls(t, a_lo + (a_hi - a_lo) * unit_shape(kind, t, period, phase))


def voltage_for_absorption(a_target, p: DeviceParams):
    """Voltage squared giving resonant normalized absorption ``a_target``.

    Closed-form inverse of the resonant absorption curve.  Raises
    :class:`BelowReachable` / :class:`AboveReachable` outside
    ``[a_min, a_max)``; for arrays the first offending index is reported.
    """
    a = np.asarray(a_target, dtype=float)
    m, c = p.medium, p.cavity
    gg = m.gamma * m.gamma_s
    g2 = m.g * m.g
    a_min, a_max = absorption_band(p)
    flat = np.atleast_1d(a)

    above = ~(flat < a_max)
    if np.any(above):
        i = int(np.argmax(above))
        raise AboveReachable(float(flat[i]), a_min, a_max, None if a.ndim == 0 else i)
    with np.errstate(divide="ignore", invalid="ignore"):
        coupling = gg / flat - gg - g2  # = g^2 n_c
        # g^2 eps_c^2 / coupling - kappa^2 rewritten around a_min, so the
        # cancellation against kappa^2 happens in (a - a_min) without rounding
        ratio = gg * (flat - a_min) / (flat * a_min * coupling)
    below = ~(ratio > -RADICAND_SNAP) | (flat <= 0)
    if np.any(below):
        i = int(np.argmax(below))
        raise BelowReachable(float(flat[i]), a_min, a_max, None if a.ndim == 0 else i)
    u_sq = c.kappa * np.sqrt(np.maximum(ratio, 0.0)) / p.derived.detune_coeff
    return u_sq.item() if a.ndim == 0 else u_sq.reshape(a.shape)


@dataclass
class CompiledProgram:
    t: np.ndarray
    u_sq: np.ndarray
    clips: list[dict] = field(default_factory=list)

    def as_drive(self) -> DriveWaveform:
        return DriveWaveform.from_table(self.t, self.u_sq)


def compile_target(target: TargetWaveform, p: DeviceParams, clamp: bool = False) -> CompiledProgram:
    """Pointwise compile of a target absorption waveform into ``U^2(t)``.

    With ``clamp`` the out-of-band samples are clipped to the band (the upper
    edge sits ``1e-6`` of the band width below the asymptote) and each clip is
    reported; otherwise the first out-of-band sample raises.
    """
    a = target.a_target.copy()
    clips: list[dict] = []
    if clamp:
        a_min, a_max = absorption_band(p)
        upper = a_min + (1.0 - UPPER_GUARD) * (a_max - a_min)
        for i in np.flatnonzero((a < a_min) | (a > upper)):
            new = a_min if a[i] < a_min else upper
            clips.append({"index": int(i), "t": float(target.t[i]),
                          "requested": float(a[i]), "clipped_to": float(new)})
            a[i] = new
    return CompiledProgram(target.t.copy(), voltage_for_absorption(a, p), clips)
