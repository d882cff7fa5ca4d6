"""Independent reference computations used by the tests.

Nothing here imports the code paths it checks: high-precision scalar
formulas (mpmath), plain bisection, and generic ODE integration (scipy).
"""

import mpmath
import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

mpmath.mp.dps = 40


def mp_params(p):
    m, c, k = p.medium, p.cavity, p.mech
    f = mpmath.mpf
    d = dict(gamma=f(m.gamma), gamma_s=f(m.gamma_s), g=f(m.g), delta=f(m.delta),
             kappa=f(c.kappa), eps_c=f(c.eps_c), G0=f(c.G0), factor=f(c.detuning_factor),
             mass=f(k.mass), omega_m=f(k.omega_m), S=f(k.plate_area), r=f(k.plate_gap))
    d["eta"] = f("8.8541878128e-12") * d["S"] / (2 * d["r"] ** 2)
    d["coeff"] = d["factor"] * d["G0"] * d["eta"] / (d["mass"] * d["omega_m"] ** 2)
    return d


def absorption_mp(u_sq, p):
    d = mp_params(p)
    det = d["coeff"] * mpmath.mpf(u_sq)
    n = d["eps_c"] ** 2 / (d["kappa"] ** 2 + det ** 2)
    gg = d["gamma"] * d["gamma_s"]
    return gg / (gg + d["g"] ** 2 * (n + 1))


def chi_mp(delta_p, n_c, p):
    d = mp_params(p)
    dp = mpmath.mpf(delta_p)
    spin = d["gamma_s"] + 1j * (dp - d["delta"])
    return 1j * d["gamma"] * spin / ((d["gamma"] + 1j * dp) * spin + d["g"] ** 2 * (mpmath.mpf(n_c) + 1))


def bisect_voltage(a_target, absorption, lo=0.0, hi=1e4):
    """Solve absorption(u) = a_target by bisection until the bracket stops shrinking."""
    f_lo = absorption(lo) - a_target
    if f_lo >= 0:
        return lo
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if absorption(mid) - a_target < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bisect_voltage_many(a_targets, absorption, lo=0.0, hi=1e4):
    """Vectorised bisection; ``absorption`` must accept arrays and be increasing."""
    a = np.asarray(a_targets, dtype=float)
    lo = np.full_like(a, lo)
    hi = np.full_like(a, hi)
    at_edge = absorption(lo) >= a
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if np.all((mid == lo) | (mid == hi)):
            break
        below = absorption(mid) < a
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return np.where(at_edge, 0.0, 0.5 * (lo + hi))


def coherence_matrix(a, delta_p, p):
    m = p.medium
    n = abs(a) ** 2
    alpha = a * np.sqrt(1 + 1 / n) if n > 0 else 1.0 + 0j
    M = np.array([[m.gamma + 1j * delta_p, -1j * m.g * alpha],
                  [-1j * m.g * np.conj(alpha), m.gamma_s + 1j * (delta_p - m.delta)]])
    A = np.array([1j * m.probe_drive, 0])
    return M, A


def relax_bloch(a, delta_p, p, tol=1e-12, h0=1e-9, max_doublings=200):
    """Propagate dR/dt = -M R + A from R=0 with exact steps of doubling length.

    Uses the augmented linear system [R, 1] so that no linear solve with M
    is involved.  Stops once ||dR/dt|| < tol * ||A||; returns (R, t, ||dR/dt||).
    """
    M, A = coherence_matrix(a, delta_p, p)
    B = np.zeros((3, 3), dtype=complex)
    B[:2, :2] = -M
    B[:2, 2] = A
    y = np.array([0, 0, 1], dtype=complex)
    E = expm(B * h0)
    t, h = 0.0, h0
    for _ in range(max_doublings):
        y = E @ y
        t += h
        rdot = np.linalg.norm(A - M @ y[:2])
        if rdot < tol * np.linalg.norm(A):
            break
        E = E @ E
        h *= 2
    return y[:2], t, rdot


def integrate_bloch(a, delta_p, p, t_end, r0=(0j, 0j)):
    """Generic LSODA integration of the coherence equations at frozen ``a`` (real 4-vector form)."""
    M, A = coherence_matrix(a, delta_p, p)

    def rhs(t, y):
        R = y[:2] + 1j * y[2:]
        d = -M @ R + A
        return np.concatenate([d.real, d.imag])

    y0 = np.array([r0[0].real, r0[1].real, r0[0].imag, r0[1].imag])
    sol = solve_ivp(rhs, (0, t_end), y0, method="LSODA", rtol=1e-12, atol=1e-22, dense_output=True)
    return sol, M, A
