"""Device parameters, physical constants and configuration ingestion.

All rates and frequencies are angular (rad/s).  Susceptibilities elsewhere in
the package are reported as the normalized quantity ``gamma * chi / chi0``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .errors import GammaOrderWarning, ParameterError, WeakFieldWarning

HBAR = 1.054571817e-34  # J s
EPSILON_0 = 8.8541878128e-12  # F/m
C_LIGHT = 2.99792458e8  # m/s

TWO_PI = 2.0 * math.pi
RB87_GAMMA = TWO_PI * 5.75e6

MEDIUM_KEYS = ("gamma", "gamma_s", "g", "g_p", "probe_drive", "delta", "n_atoms", "chi0")
CAVITY_KEYS = ("kappa", "eps_c", "G0", "omega_c", "detuning_factor")
MECH_KEYS = ("mass", "omega_m", "gamma_m", "plate_area", "plate_gap", "include_radiation_pressure")
CONFIG_KEYS = MEDIUM_KEYS + CAVITY_KEYS + MECH_KEYS
_GROUPS = {"medium": MEDIUM_KEYS, "cavity": CAVITY_KEYS, "mech": MECH_KEYS}


def coulomb_eta(plate_area: float, plate_gap: float) -> float:
    """Capacitive force coefficient ``eps0 * S / (2 r**2)`` in F/m."""
    bad = [name for name, v in (("plate_area", plate_area), ("plate_gap", plate_gap)) if not v > 0]
    if bad:
        raise ParameterError([f"NonPositive({name})" for name in bad])
    return EPSILON_0 * plate_area / (2.0 * plate_gap * plate_gap)


@dataclass(frozen=True)
class MediumParams:
    gamma: float
    gamma_s: float
    g: float
    g_p: float | None = None
    probe_drive: float = 1.0
    delta: float = 0.0
    n_atoms: float = 1.0e6
    chi0: float = 1.0

    def __post_init__(self):
        if self.g_p is None:
            object.__setattr__(self, "g_p", self.g)


@dataclass(frozen=True)
class CavityParams:
    kappa: float
    eps_c: float
    G0: float
    omega_c: float | None = None
    detuning_factor: float = 2.0


@dataclass(frozen=True)
class MechParams:
    mass: float
    omega_m: float
    gamma_m: float
    plate_area: float
    plate_gap: float
    include_radiation_pressure: bool = False


@dataclass(frozen=True)
class Derived:
    eta: float
    spring: float
    detune_coeff: float


def _derive(cavity: CavityParams, mech: MechParams) -> Derived:
    nan = float("nan")
    try:
        eta = EPSILON_0 * mech.plate_area / (2.0 * mech.plate_gap * mech.plate_gap)
    except ZeroDivisionError:
        eta = nan
    spring = mech.mass * mech.omega_m * mech.omega_m
    try:
        detune = cavity.detuning_factor * cavity.G0 * eta / spring
    except ZeroDivisionError:
        detune = nan
    return Derived(eta=eta, spring=spring, detune_coeff=detune)


@dataclass(frozen=True)
class DeviceParams:
    """Full modulator description: medium, cavity and mechanics.

    ``derived`` is always recomputed from the other fields.
    """

    medium: MediumParams
    cavity: CavityParams
    mech: MechParams
    derived: Derived = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "derived", _derive(self.cavity, self.mech))

    def to_mapping(self) -> dict[str, Any]:
        """Flat mapping using the configuration key names."""
        out: dict[str, Any] = {}
        for group in (self.medium, self.cavity, self.mech):
            out.update(dataclasses.asdict(group))
        return out

    def replace(self, **changes) -> "DeviceParams":
        """Return a copy with flat-key overrides applied (not validated)."""
        mapping = self.to_mapping()
        if "g" in changes and "g_p" not in changes and self.medium.g_p == self.medium.g:
            mapping["g_p"] = None
        unknown = sorted(set(changes) - set(CONFIG_KEYS))
        if unknown:
            raise ParameterError([f"UnknownKey({k})" for k in unknown])
        mapping.update(changes)
        return params_from_mapping(mapping, validate_result=False)

    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.to_mapping()).encode()).hexdigest()


@dataclass(frozen=True)
class SystemState:
    """Instantaneous dynamical variables of the modulator."""

    t: float = 0.0
    q: float = 0.0
    qdot: float = 0.0
    a: complex = 0j
    sigma_ba: complex = 0j
    sigma_bc: complex = 0j

    def is_finite(self) -> bool:
        vals = (self.t, self.q, self.qdot, self.a.real, self.a.imag, self.sigma_ba.real,
                self.sigma_ba.imag, self.sigma_bc.real, self.sigma_bc.imag)
        return all(math.isfinite(v) for v in vals)


def _check(problems: list[str], name: str, value, *, positive=True, allow_zero=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        problems.append(f"NonFinite({name})")
        return
    if positive and (value < 0 or (value == 0 and not allow_zero)):
        problems.append(f"NonPositive({name})")


def validate(params: DeviceParams) -> DeviceParams:
    """Check every invariant and return the parameters with derived fields populated.

    All hard violations are collected and raised together as a
    :class:`ParameterError`.  Soft conditions (``gamma_s`` not much smaller
    than ``gamma``, a probe drive too strong for the linear regime) emit
    warnings only.
    """
    m, c, k = params.medium, params.cavity, params.mech
    problems: list[str] = []
    for name in ("gamma", "gamma_s", "g", "probe_drive", "chi0"):
        _check(problems, name, getattr(m, name))
    _check(problems, "g_p", m.g_p, allow_zero=True)
    _check(problems, "delta", m.delta, positive=False)
    n_before = len(problems)
    _check(problems, "n_atoms", m.n_atoms)
    if len(problems) == n_before and m.n_atoms < 1:
        problems.append("BelowOne(n_atoms)")
    for name in ("kappa", "G0", "detuning_factor"):
        _check(problems, name, getattr(c, name))
    _check(problems, "eps_c", c.eps_c, allow_zero=True)
    if c.omega_c is not None:
        _check(problems, "omega_c", c.omega_c)
    for name in ("mass", "omega_m", "plate_area", "plate_gap"):
        _check(problems, name, getattr(k, name))
    _check(problems, "gamma_m", k.gamma_m, allow_zero=True)
    if not isinstance(k.include_radiation_pressure, bool):
        problems.append("NotBool(include_radiation_pressure)")
    if not any(p.endswith(("(gamma)", "(gamma_s)")) for p in problems):
        if m.gamma_s > m.gamma:
            problems.append("GammaOrder(gamma_s > gamma)")
        elif m.gamma_s >= 0.1 * m.gamma:
            warnings.warn(
                f"gamma_s={m.gamma_s:g} is not much smaller than gamma={m.gamma:g}",
                GammaOrderWarning,
                stacklevel=2,
            )
    if problems:
        raise ParameterError(problems)
    if m.probe_drive / m.gamma > 0.1:
        warnings.warn(
            f"probe_drive/gamma = {m.probe_drive / m.gamma:g}; coherences may leave the weak-field regime",
            WeakFieldWarning,
            stacklevel=2,
        )
    return DeviceParams(m, c, k)


def params_from_mapping(mapping: Mapping[str, Any], *, base: Mapping[str, Any] | None = None,
                        validate_result: bool = True) -> DeviceParams:
    """Build parameters from flat configuration keys.

    Missing keys are taken from ``base`` (the default susceptibility-surface set when not
    given); unknown keys are an error.
    """
    flat = dict(FIG2_CONFIG if base is None else base)
    unknown = sorted(set(mapping) - set(CONFIG_KEYS))
    if unknown:
        raise ParameterError([f"UnknownKey({k})" for k in unknown])
    flat.update(mapping)
    if "g" in mapping and "g_p" not in mapping:
        flat["g_p"] = None
    p = DeviceParams(
        MediumParams(**{k: flat[k] for k in MEDIUM_KEYS}),
        CavityParams(**{k: flat[k] for k in CAVITY_KEYS}),
        MechParams(**{k: flat[k] for k in MECH_KEYS}),
    )
    return validate(p) if validate_result else p


def parse_override(text: str) -> tuple[str, Any]:
    """Parse ``key=value`` (``key`` may be dotted, e.g. ``cavity.kappa``)."""
    if "=" not in text:
        raise ParameterError([f"BadOverride({text})"])
    key, raw = text.split("=", 1)
    key = key.strip()
    if "." in key:
        group, _, leaf = key.partition(".")
        if group not in _GROUPS or leaf not in _GROUPS[group]:
            raise ParameterError([f"UnknownKey({key})"])
        key = leaf
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        raise ParameterError([f"BadValue({key}={raw})"]) from None
    return key, value


def load_config(path: str | Path | None, overrides: list[str] | tuple[str, ...] = ()) -> DeviceParams:
    """Read a JSON configuration file and apply ``key=value`` overrides."""
    mapping: dict[str, Any] = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        try:
            mapping = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParameterError([f"BadJSON({exc})"]) from None
        if not isinstance(mapping, dict):
            raise ParameterError(["BadJSON(top level must be an object)"])
        mapping = _flatten(mapping)
    for item in overrides:
        key, value = parse_override(item)
        mapping[key] = value
    return params_from_mapping(mapping)


def _flatten(mapping: Mapping[str, Any]) -> dict[str, Any]:
    # grouped documents ({"medium": {...}, ...}) are accepted as well as flat ones
    flat: dict[str, Any] = {}
    for key, value in mapping.items():
        if key in _GROUPS and isinstance(value, dict):
            for leaf, v in value.items():
                if leaf not in _GROUPS[key]:
                    raise ParameterError([f"UnknownKey({key}.{leaf})"])
                flat[leaf] = v
        else:
            flat[key] = value
    return flat


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


FIG2_CONFIG: dict[str, Any] = {
    "gamma": RB87_GAMMA,
    "gamma_s": 1e-4 * RB87_GAMMA,
    "g": 1e-3 * RB87_GAMMA,
    "g_p": None,
    "probe_drive": 1.0,
    "delta": 0.0,
    "n_atoms": 1.0e6,
    "chi0": 1.0,
    "kappa": 0.2 * RB87_GAMMA,
    "eps_c": 4e10,
    "G0": TWO_PI * 1.5e16,
    "omega_c": None,
    "detuning_factor": 2.0,
    "mass": 145e-12,
    "omega_m": RB87_GAMMA,
    "gamma_m": 3.0 * RB87_GAMMA,
    "plate_area": 0.6e-6,
    "plate_gap": 0.21e-6,
    "include_radiation_pressure": False,
}

FIG3_CONFIG: dict[str, Any] = dict(
    FIG2_CONFIG, eps_c=0.5e10, gamma_m=3.0 * RB87_GAMMA, kappa=0.4 * RB87_GAMMA
)


def fig2_params(**overrides) -> DeviceParams:
    """Parameter set used for the susceptibility surfaces."""
    return params_from_mapping(overrides, base=FIG2_CONFIG)


def fig3_params(**overrides) -> DeviceParams:
    """Parameter set used for the waveform-modulation runs."""
    return params_from_mapping(overrides, base=FIG3_CONFIG)
