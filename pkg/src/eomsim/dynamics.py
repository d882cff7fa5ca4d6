"""Time-domain propagation of the mirror, cavity field and probe coherences.

The default integrator freezes the coefficients of each linear sub-system
over a step and applies its exact exponential propagator, in the fixed
order mechanics -> cavity -> Bloch.  Coefficients are frozen at the step
midpoint (drive at ``t + dt/2``, mirror position and cavity amplitude
averaged over the step).  ``rk4-adaptive`` integrates the unsplit system
with step-doubling error control and is meant as a cross-check.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import MaxStepsExceeded, NonFinite, SingularM, StepRejected, WeakFieldWarning
from .params import HBAR, DeviceParams, SystemState
from .parallel import map_ordered
from .steady import cavity_amplitude, max_photon_number
from .synthesis import DriveWaveform

METHODS = ("exponential-piecewise", "rk4-adaptive")
INITIAL_MODES = ("rest", "cold", "adiabatic")
WEAK_FIELD_LIMIT = 0.1

COLUMNS = (
    "t", "u_sq", "q", "qdot", "re_a", "im_a", "n_c",
    "re_sigma_ba", "im_sigma_ba", "re_sigma_bc", "im_sigma_bc", "A", "D",
)


@dataclass(frozen=True)
class SolverConfig:
    """Integrator settings.

    ``dt`` is an upper bound: the run is split into equal steps that end
    exactly at the waveform duration.  ``abs_tol`` applies to the state
    rescaled to order unity (mirror displacement by the static displacement
    at peak drive, cavity amplitude by ``eps_c/kappa``, coherences by
    ``probe_drive/gamma``).
    """

    dt: float
    method: str = "exponential-piecewise"
    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    max_steps: int = 50_000_000
    record_stride: int = 1
    initial: str = "rest"
    delta_p: float = 0.0

    def __post_init__(self):
        problems = []
        if not self.dt > 0:
            problems.append("dt must be > 0")
        if self.method not in METHODS:
            problems.append(f"method must be one of {METHODS}")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            problems.append("tolerances must be > 0")
        if self.max_steps < 1:
            problems.append("max_steps must be >= 1")
        if self.record_stride < 1:
            problems.append("record_stride must be >= 1")
        if self.initial not in INITIAL_MODES:
            problems.append(f"initial must be one of {INITIAL_MODES}")
        if problems:
            raise ValueError("; ".join(problems))


# ---------------------------------------------------------------------------
# 2x2 propagators


def _phi1(x: complex) -> complex:
    """(1 - exp(-x)) / x, accurate for small |x|."""
    if abs(x) < 1e-5:
        return 1.0 - x / 2.0 + x * x / 6.0
    return (1.0 - cmath.exp(-x)) / x


def expm_neg_2x2(m00: complex, m01: complex, m10: complex, m11: complex, dt: float):
    """Entries of ``exp(-M dt)`` for a 2x2 matrix ``M`` (row-major tuple).

    Sylvester form on the eigenvalues ``h +- s``; a Taylor expansion of
    ``sinh(s dt)/s`` is used when the eigenvalues (nearly) coincide.
    Requires eigenvalues with non-negative real part.
    """
    half = 0.5 * (m00 + m11)
    d = 0.5 * (m00 - m11)
    s = cmath.sqrt(d * d + m01 * m10)
    sdt = s * dt
    lam_scale = abs(half) + abs(s)
    if abs(sdt) < 1e-3 or abs(s) <= 0.5e-8 * lam_scale:
        eh = cmath.exp(-half * dt)
        z = sdt * sdt
        c0 = eh * (1.0 + z / 2.0 + z * z / 24.0)
        c1 = -dt * eh * (1.0 + z / 6.0 + z * z / 120.0)
    else:
        e1 = cmath.exp(-(half + s) * dt)
        e2 = cmath.exp(-(half - s) * dt)
        c0 = 0.5 * (e1 + e2)
        c1 = (e1 - e2) / (2.0 * s)
    # exp(-M dt) = c0 I + c1 (M - half I)
    return (c0 + c1 * d, c1 * m01, c1 * m10, c0 - c1 * d)


# ---------------------------------------------------------------------------
# Sub-system steps


def _mech_propagator(p: DeviceParams, dt: float):
    mech = p.mech
    # d/dt (x, v) = -M (x, v) with M = [[0, -1], [w^2, gamma_m]]
    e = expm_neg_2x2(0.0, -1.0, mech.omega_m ** 2, mech.gamma_m, dt)
    return tuple(c.real for c in e)


def mechanical_force(u_sq: float, n_c: float, p: DeviceParams) -> float:
    force = u_sq * p.derived.eta
    if p.mech.include_radiation_pressure:
        force += HBAR * p.cavity.G0 * n_c
    return force


def step_mechanics(state: SystemState, u_sq: float, n_c: float, dt: float,
                   p: DeviceParams, _prop=None) -> tuple[float, float]:
    """Advance the charged mirror over ``dt`` with the force held constant.

    Exact propagator of the damped oscillator about the displaced
    equilibrium ``F / (m omega_m^2)``.
    """
    e00, e01, e10, e11 = _prop or _mech_propagator(p, dt)
    q_eq = mechanical_force(u_sq, n_c, p) / p.derived.spring
    x = state.q - q_eq
    v = state.qdot
    q_new = q_eq + e00 * x + e01 * v
    v_new = e10 * x + e11 * v
    if not (math.isfinite(q_new) and math.isfinite(v_new)):
        raise NonFinite(f"mechanics diverged at t={state.t!r}")
    return q_new, v_new


def cavity_detuning_at(q: float, p: DeviceParams) -> float:
    return p.cavity.detuning_factor * p.cavity.G0 * q


def step_cavity(state: SystemState, dt: float, p: DeviceParams, q: float | None = None) -> complex:
    """Exact update of the cavity amplitude with the detuning frozen at ``q``.

    ``q`` defaults to ``state.q``.
    """
    detuning = cavity_detuning_at(state.q if q is None else q, p)
    z = complex(p.cavity.kappa, detuning)
    zdt = z * dt
    a_new = state.a * cmath.exp(-zdt) + p.cavity.eps_c * dt * _phi1(zdt)
    if not cmath.isfinite(a_new):
        raise NonFinite(f"cavity amplitude diverged at t={state.t!r}")
    return a_new


def coupling_amplitude(a: complex) -> complex:
    """Cavity amplitude rescaled so that its squared modulus is ``|a|^2 + 1``.

    Keeps the vacuum contribution to the control coupling, so that the
    Bloch fixed point reproduces the steady-state susceptibility exactly.
    """
    n = a.real * a.real + a.imag * a.imag
    if n == 0.0:
        return 1.0 + 0j
    return a * math.sqrt(1.0 + 1.0 / n)


def bloch_matrix(a: complex, delta_p: float, p: DeviceParams):
    """Row-major entries of the coherence relaxation matrix."""
    m = p.medium
    alpha = coupling_amplitude(a)
    return (
        complex(m.gamma, delta_p),
        -1j * m.g * alpha,
        -1j * m.g * alpha.conjugate(),
        complex(m.gamma_s, delta_p - m.delta),
    )


def bloch_steady(a: complex, delta_p: float, p: DeviceParams) -> tuple[complex, complex]:
    """Fixed point ``M^-1 A`` of the coherence equations at frozen ``a``."""
    m00, m01, m10, m11 = bloch_matrix(a, delta_p, p)
    det = m00 * m11 - m01 * m10
    if abs(det) < 1e-300:
        raise SingularM("coherence matrix is singular")
    drive = 1j * p.medium.probe_drive
    return m11 * drive / det, -m10 * drive / det


def bloch_rhs(sigma_ba: complex, sigma_bc: complex, a: complex, delta_p: float,
              p: DeviceParams) -> tuple[complex, complex]:
    m00, m01, m10, m11 = bloch_matrix(a, delta_p, p)
    return (
        -(m00 * sigma_ba + m01 * sigma_bc) + 1j * p.medium.probe_drive,
        -(m10 * sigma_ba + m11 * sigma_bc),
    )


def step_bloch(state: SystemState, a: complex, delta_p: float, dt: float,
               p: DeviceParams) -> tuple[complex, complex]:
    """Exact coherence update over ``dt`` with the cavity amplitude frozen at ``a``."""
    m00, m01, m10, m11 = bloch_matrix(a, delta_p, p)
    det = m00 * m11 - m01 * m10
    if abs(det) < 1e-300:
        raise SingularM("coherence matrix is singular")
    drive = 1j * p.medium.probe_drive
    r0 = m11 * drive / det
    r1 = -m10 * drive / det
    e00, e01, e10, e11 = expm_neg_2x2(m00, m01, m10, m11, dt)
    x0 = state.sigma_ba - r0
    x1 = state.sigma_bc - r1
    s_ba = r0 + e00 * x0 + e01 * x1
    s_bc = r1 + e10 * x0 + e11 * x1
    if not (cmath.isfinite(s_ba) and cmath.isfinite(s_bc)):
        raise NonFinite(f"coherences diverged at t={state.t!r}")
    return s_ba, s_bc


# ---------------------------------------------------------------------------
# Trajectories


class Trajectory:
    """Recorded time series; one row per sample, columns as in ``COLUMNS``."""

    columns = COLUMNS

    def __init__(self, data: np.ndarray):
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[1] != len(COLUMNS):
            raise ValueError(f"trajectory data must have {len(COLUMNS)} columns")
        self.data = data

    def __len__(self):
        return self.data.shape[0]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, COLUMNS.index(name)]

    def __getattr__(self, name):
        if name in COLUMNS:
            return self[name]
        raise AttributeError(name)

    @property
    def a(self) -> np.ndarray:
        return self["re_a"] + 1j * self["im_a"]

    @property
    def sigma_ba(self) -> np.ndarray:
        return self["re_sigma_ba"] + 1j * self["im_sigma_ba"]

    @property
    def sigma_bc(self) -> np.ndarray:
        return self["re_sigma_bc"] + 1j * self["im_sigma_bc"]

    def final_state(self) -> SystemState:
        row = self.data[-1]
        return SystemState(row[0], row[2], row[3], complex(row[4], row[5]),
                           complex(row[7], row[8]), complex(row[9], row[10]))

    def to_csv(self, path: str | Path) -> int:
        from .io import write_csv
        return write_csv(path, COLUMNS, self.data)

    @classmethod
    def from_csv(cls, path: str | Path) -> "Trajectory":
        from .io import read_csv
        header, data = read_csv(path)
        if tuple(header) != COLUMNS:
            raise ValueError(f"unexpected trajectory header {header}")
        return cls(data)


def initial_state(waveform: DriveWaveform, p: DeviceParams, mode: str = "rest",
                  delta_p: float = 0.0) -> SystemState:
    """Starting state for a run.

    ``rest``: mirror at rest, resonant cavity, coherences at their zero-voltage
    steady state.  ``cold``: everything zero.  ``adiabatic``: all variables at
    the steady state of the drive's initial value.
    """
    if mode == "cold":
        return SystemState()
    if mode == "rest":
        q = 0.0
        a = complex(p.cavity.eps_c / p.cavity.kappa)
    elif mode == "adiabatic":
        u0 = float(waveform(0.0))
        a = complex(cavity_amplitude(u0, p))
        n = abs(a) ** 2
        q = mechanical_force(u0, n, p) / p.derived.spring
        if p.mech.include_radiation_pressure:
            # one fixed-point pass is enough at these force ratios
            a = p.cavity.eps_c / complex(p.cavity.kappa, cavity_detuning_at(q, p))
    else:
        raise ValueError(f"unknown initial mode {mode!r}")
    s_ba, s_bc = bloch_steady(a, delta_p, p)
    return SystemState(0.0, q, 0.0, a, s_ba, s_bc)


def _row(t, u_sq, q, v, a, s_ba, s_bc, gamma, probe):
    scale = gamma / probe
    return (t, u_sq, q, v, a.real, a.imag, a.real * a.real + a.imag * a.imag,
            s_ba.real, s_ba.imag, s_bc.real, s_bc.imag, scale * s_ba.imag, scale * s_ba.real)


def _grid(duration: float, cfg: SolverConfig) -> tuple[int, float]:
    n = max(1, math.ceil(duration / cfg.dt * (1.0 - 1e-12)))
    if n > cfg.max_steps:
        raise MaxStepsExceeded(f"{n} steps needed, max_steps={cfg.max_steps}")
    return n, duration / n


def simulate(waveform: DriveWaveform, p: DeviceParams, cfg: SolverConfig,
             state0: SystemState | None = None) -> Trajectory:
    """Propagate the full modulator under ``waveform`` and record a trajectory."""
    if not waveform.duration > 0:
        raise ValueError("waveform duration must be > 0")
    if state0 is None:
        state0 = initial_state(waveform, p, cfg.initial, cfg.delta_p)
    if cfg.method == "rk4-adaptive":
        return _simulate_rk4(waveform, p, cfg, state0)
    return _simulate_exponential(waveform, p, cfg, state0)


def _simulate_exponential(waveform, p, cfg, state0):
    n_steps, dt = _grid(waveform.duration, cfg)
    stride = cfg.record_stride
    record_idx = list(range(0, n_steps + 1, stride))
    if record_idx[-1] != n_steps:
        record_idx.append(n_steps)
    t_rec = np.array(record_idx) * dt
    u_rec = np.asarray(waveform(t_rec), dtype=float)
    u_mid = np.asarray(waveform((np.arange(n_steps) + 0.5) * dt), dtype=float).tolist()

    gamma, probe = p.medium.gamma, p.medium.probe_drive
    kappa, eps_c = p.cavity.kappa, p.cavity.eps_c
    det_per_q = p.cavity.detuning_factor * p.cavity.G0
    spring, eta = p.derived.spring, p.derived.eta
    rad = HBAR * p.cavity.G0 if p.mech.include_radiation_pressure else 0.0
    e00, e01, e10, e11 = _mech_propagator(p, dt)
    delta_p = cfg.delta_p

    q, v, a = state0.q, state0.qdot, state0.a
    s_ba, s_bc = state0.sigma_ba, state0.sigma_bc
    rows = [_row(t_rec[0], u_rec[0], q, v, a, s_ba, s_bc, gamma, probe)]
    next_rec = 1
    warned = False
    for k in range(n_steps):
        # mechanics
        n_c = a.real * a.real + a.imag * a.imag
        q_eq = (u_mid[k] * eta + rad * n_c) / spring
        x = q - q_eq
        q_new = q_eq + e00 * x + e01 * v
        v = e10 * x + e11 * v
        q_mid = 0.5 * (q + q_new)
        q = q_new
        # cavity
        zdt = complex(kappa, det_per_q * q_mid) * dt
        a_new = a * cmath.exp(-zdt) + eps_c * dt * _phi1(zdt)
        a_mid = 0.5 * (a + a_new)
        a = a_new
        # coherences
        m00, m01, m10, m11 = bloch_matrix(a_mid, delta_p, p)
        det = m00 * m11 - m01 * m10
        r0 = m11 * 1j * probe / det
        r1 = -m10 * 1j * probe / det
        b00, b01, b10, b11 = expm_neg_2x2(m00, m01, m10, m11, dt)
        x0 = s_ba - r0
        x1 = s_bc - r1
        s_ba = r0 + b00 * x0 + b01 * x1
        s_bc = r1 + b10 * x0 + b11 * x1

        if next_rec < len(record_idx) and k + 1 == record_idx[next_rec]:
            row = _row(t_rec[next_rec], u_rec[next_rec], q, v, a, s_ba, s_bc, gamma, probe)
            if not all(map(math.isfinite, row)):
                raise NonFinite(f"non-finite state at t={t_rec[next_rec]!r}")
            if not warned and max(abs(s_ba), abs(s_bc)) > WEAK_FIELD_LIMIT:
                warnings.warn("coherence magnitude above 0.1: weak-field regime violated",
                              WeakFieldWarning, stacklevel=3)
                warned = True
            rows.append(row)
            next_rec += 1
    return Trajectory(np.array(rows))


def _simulate_rk4(waveform, p, cfg, state0):
    """Unsplit system, classical RK4 with step doubling, output on the exponential grid."""
    n_steps, dt = _grid(waveform.duration, cfg)
    stride = cfg.record_stride
    record_idx = list(range(0, n_steps + 1, stride))
    if record_idx[-1] != n_steps:
        record_idx.append(n_steps)
    t_rec = np.array(record_idx) * dt

    m, c, k = p.medium, p.cavity, p.mech
    gamma, probe = m.gamma, m.probe_drive
    spring, eta = p.derived.spring, p.derived.eta
    det_per_q = c.detuning_factor * c.G0
    rad = HBAR * c.G0 if k.include_radiation_pressure else 0.0
    w2, gm = k.omega_m ** 2, k.gamma_m
    delta_p = cfg.delta_p

    q_scale = max(eta * waveform.peak_value() / spring, 1e-15)
    scales = (q_scale, q_scale * k.omega_m, max(math.sqrt(max_photon_number(p)), 1.0),
              probe / gamma, probe / gamma)

    def u_at(t):
        return float(waveform(t))

    def rhs(t, y):
        q, v, a, s_ba, s_bc = y
        n_c = a.real * a.real + a.imag * a.imag
        force = u_at(t) * eta + rad * n_c
        dv = -gm * v.real - w2 * q.real + force / k.mass
        da = -complex(c.kappa, det_per_q * q.real) * a + c.eps_c
        d_ba, d_bc = bloch_rhs(s_ba, s_bc, a, delta_p, p)
        return (v, complex(dv), da, d_ba, d_bc)

    def rk4(t, y, h):
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, tuple(yi + h / 2 * ki for yi, ki in zip(y, k1)))
        k3 = rhs(t + h / 2, tuple(yi + h / 2 * ki for yi, ki in zip(y, k2)))
        k4 = rhs(t + h, tuple(yi + h * ki for yi, ki in zip(y, k3)))
        return tuple(yi + h / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
                     for yi, a1, a2, a3, a4 in zip(y, k1, k2, k3, k4))

    y = (complex(state0.q), complex(state0.qdot), state0.a, state0.sigma_ba, state0.sigma_bc)
    rows = [_row(0.0, u_at(0.0), y[0].real, y[1].real, y[2], y[3], y[4], gamma, probe)]
    t = 0.0
    h = min(dt, 0.1 / (gamma + c.kappa + gm))
    steps = 0
    h_min = 1e-14 * waveform.duration
    for t_out in t_rec[1:]:
        while t < t_out:
            h_try = min(h, t_out - t)
            full = rk4(t, y, h_try)
            half = rk4(t + h_try / 2, rk4(t, y, h_try / 2), h_try / 2)
            err = 0.0
            for yf, yh, yo, sc in zip(full, half, y, scales):
                e = abs(yh - yf) / 15.0 / sc
                tol = cfg.abs_tol + cfg.rel_tol * max(abs(yh), abs(yo)) / sc
                err = max(err, e / tol)
            steps += 1
            if steps > cfg.max_steps:
                raise MaxStepsExceeded(f"rk4-adaptive exceeded {cfg.max_steps} steps")
            if err <= 1.0:
                t += h_try
                y = tuple(yh + (yh - yf) / 15.0 for yf, yh in zip(full, half))
                if not all(cmath.isfinite(z) for z in y):
                    raise NonFinite(f"non-finite state at t={t!r}")
            if not math.isfinite(err):
                raise NonFinite(f"non-finite error estimate at t={t!r}")
            factor = 4.0 if err == 0.0 else min(4.0, max(0.2, 0.9 * err ** -0.2))
            h = h_try * factor
            if h < h_min:
                raise StepRejected(f"step size underflow at t={t!r}")
        t = float(t_out)
        rows.append(_row(t, u_at(t), y[0].real, y[1].real, y[2], y[3], y[4], gamma, probe))
    return Trajectory(np.array(rows))


def _simulate_job(args):
    waveform, p, cfg = args
    return simulate(waveform, p, cfg)


def simulate_many(waveforms: Iterable[DriveWaveform], p: DeviceParams, cfg: SolverConfig,
                  workers: int | None = None) -> list[Trajectory]:
    """Run independent trajectories, in parallel when allowed; order is preserved."""
    jobs = [(w, p, cfg) for w in waveforms]
    return map_ordered(_simulate_job, jobs, workers=workers, processes=True)
