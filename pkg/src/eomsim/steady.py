"""Adiabatic (steady-state) response of the modulator.

Every function is a pure numpy expression and accepts scalars or arrays for
the voltage-squared / detuning arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDenominator, NegativeVoltageSquared
from .params import DeviceParams


@dataclass(frozen=True)
class SusceptibilitySample:
    delta_p: float
    u_sq: float
    chi_norm: complex
    n_c: float


def _u_sq(u_sq):
    u = np.asarray(u_sq, dtype=float)
    if np.any(u < 0) or np.any(np.isnan(u)):
        raise NegativeVoltageSquared(f"voltage squared must be >= 0, got {u_sq!r}")
    return u


def _out(x):
    return x.item() if np.ndim(x) == 0 else x


def cmo_displacement(u_sq, p: DeviceParams):
    """Static mirror displacement ``U^2 eta / (m omega_m^2)`` in metres."""
    u = _u_sq(u_sq)
    return _out(u * p.derived.eta / p.derived.spring)


def cavity_detuning(u_sq, p: DeviceParams):
    """Voltage-induced cavity detuning (rad/s)."""
    u = _u_sq(u_sq)
    return _out(p.derived.detune_coeff * u)


def cavity_amplitude(u_sq, p: DeviceParams):
    """Adiabatic intracavity amplitude ``eps_c / (kappa + i Delta)``."""
    detuning = np.asarray(cavity_detuning(u_sq, p))
    return _out(p.cavity.eps_c / (p.cavity.kappa + 1j * detuning))


def photon_number(u_sq, p: DeviceParams):
    """Adiabatic photon number ``eps_c^2 / (kappa^2 + Delta^2)``."""
    detuning = np.asarray(cavity_detuning(u_sq, p))
    kappa, eps_c = p.cavity.kappa, p.cavity.eps_c
    return _out(eps_c * eps_c / (kappa * kappa + detuning * detuning))


def max_photon_number(p: DeviceParams) -> float:
    return p.cavity.eps_c ** 2 / p.cavity.kappa ** 2


def effective_decay(u_sq, p: DeviceParams):
    """Return ``(kappa_eff, Q_eff)``; ``Q_eff`` is None without ``omega_c``."""
    detuning = np.asarray(cavity_detuning(u_sq, p))
    kappa_eff = np.hypot(p.cavity.kappa, detuning)
    q_eff = None if p.cavity.omega_c is None else _out(p.cavity.omega_c / kappa_eff)
    return _out(kappa_eff), q_eff


def chi_steady(delta_p, n_c, p: DeviceParams):
    """Normalized steady-state probe susceptibility ``gamma * chi / chi0``.

    The probe Rabi drive cancels, so the result does not depend on
    ``probe_drive``.
    """
    m = p.medium
    dp = np.asarray(delta_p, dtype=float)
    n = np.asarray(n_c, dtype=float)
    if np.any(n < 0):
        raise ValueError("photon number must be >= 0")
    # explicit real arithmetic: numpy's complex division differs in the last
    # bit between scalar and vectorised loops, and sweeps must equal point calls
    s_im = dp - m.delta
    d_re = m.gamma * m.gamma_s - dp * s_im + m.g * m.g * (n + 1.0)
    d_im = m.gamma * s_im + dp * m.gamma_s
    mag2 = d_re * d_re + d_im * d_im
    if np.any(np.sqrt(mag2) < 1e-30 * m.gamma * m.gamma):
        raise DegenerateDenominator("steady-state denominator vanishes")
    # numerator i*gamma*(gamma_s + i s_im) = -gamma s_im + i gamma gamma_s
    n_re = -m.gamma * s_im
    n_im = m.gamma * m.gamma_s
    re = (n_re * d_re + n_im * d_im) / mag2
    im = (n_im * d_re - n_re * d_im) / mag2
    return _out(re + 1j * im)


def resonant_absorption(n_c, p: DeviceParams):
    """``Im chi~`` at ``Delta_p = delta = 0`` as a function of photon number."""
    m = p.medium
    gg = m.gamma * m.gamma_s
    n = np.asarray(n_c, dtype=float)
    return _out(gg / (gg + m.g * m.g * (n + 1.0)))


def im_chi_resonant(u_sq, p: DeviceParams):
    """Resonant normalized absorption versus voltage squared.

    Evaluated at two-photon and one-photon resonance; agrees with
    ``chi_steady(0, photon_number(u_sq)).imag`` to rounding when ``delta == 0``.
    """
    return resonant_absorption(photon_number(u_sq, p), p)


def absorption_band(p: DeviceParams) -> tuple[float, float]:
    """Reachable resonant absorption band ``[a_min, a_max)``.

    ``a_min`` is reached at zero voltage, ``a_max`` only asymptotically.
    """
    m = p.medium
    gg = m.gamma * m.gamma_s
    g2 = m.g * m.g
    a_min = gg / (gg + g2 * (max_photon_number(p) + 1.0))
    a_max = gg / (gg + g2)
    return a_min, a_max


def sample(delta_p: float, u_sq: float, p: DeviceParams) -> SusceptibilitySample:
    n_c = photon_number(u_sq, p)
    return SusceptibilitySample(delta_p, u_sq, complex(chi_steady(delta_p, n_c, p)), n_c)


def to_physical_chi(chi_norm, p: DeviceParams):
    """Undo the normalization: ``chi = chi0 * chi~ / gamma``."""
    return chi_norm * p.medium.chi0 / p.medium.gamma
