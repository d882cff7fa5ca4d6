"""Figures of merit: extinction ratio, transparency width, polariton mixing, spectra."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import NonPositiveVoltage, NoWindow
from .params import DeviceParams
from .parallel import map_ordered
from .steady import chi_steady, im_chi_resonant, max_photon_number, photon_number

# A window exists while the dip is below this fraction of the neighbouring peaks.
WINDOW_DIP_FRACTION = 0.5


@dataclass(frozen=True)
class ModulationMetrics:
    r_db: float
    a_min: float
    a_max: float
    n_cmax: float
    n_cmin: float
    eit_width: float | None
    theta: float
    v_g_ratio: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PolaritonState:
    theta: float
    v_g_ratio: float
    psi: complex


def extinction_ratio(u_m_sq: float, p: DeviceParams) -> float:
    """Modulation depth in dB between zero voltage and ``u_m_sq``."""
    if not u_m_sq > 0:
        raise NonPositiveVoltage(f"u_m_sq must be > 0, got {u_m_sq!r}")
    m = p.medium
    gg = m.gamma * m.gamma_s
    g2 = m.g * m.g
    n_max = max_photon_number(p)
    n_min = photon_number(u_m_sq, p)
    return 10.0 * math.log10((gg + g2 * (n_max + 1.0)) / (gg + g2 * (n_min + 1.0)))


def _side_peak(f, f_many, centre: float, sign: float, offsets: np.ndarray):
    values = f_many(centre + sign * offsets)
    i = int(np.argmax(values))
    if i == 0 or i == len(offsets) - 1:
        return None
    res = minimize_scalar(lambda x: -f(centre + sign * x), bounds=(offsets[i - 1], offsets[i + 1]),
                          method="bounded", options={"xatol": offsets[i - 1] * 1e-10})
    x = float(res.x) if -res.fun >= values[i] else float(offsets[i])
    return x, f(centre + sign * x)


def eit_width(u_sq: float, p: DeviceParams, dip_fraction: float = WINDOW_DIP_FRACTION) -> float:
    """Full width of the transparency dip at half depth (rad/s).

    The dip sits at two-photon resonance ``Delta_p = delta``; the peaks on
    either side are located numerically and the half-depth crossings are
    bracketed and bisected.  Raises :class:`NoWindow` once the dip is no
    longer below ``dip_fraction`` of either peak.
    """
    m = p.medium
    n_c = photon_number(u_sq, p)
    coupling = m.g * m.g * (n_c + 1.0)

    def f_many(dp):
        return np.imag(chi_steady(dp, n_c, p))

    def f(dp):
        return float(f_many(dp))

    centre = m.delta
    dip = f(centre)
    lo = 1e-3 * min(m.gamma_s, coupling / m.gamma)
    hi = 100.0 * (m.gamma + math.sqrt(coupling) + abs(m.delta))
    offsets = np.geomspace(lo, hi, 4001)
    edges = []
    for sign in (1.0, -1.0):
        peak = _side_peak(f, f_many, centre, sign, offsets)
        if peak is None or not dip < dip_fraction * peak[1]:
            raise NoWindow(f"no transparency window at u_sq={u_sq!r}")
        x_peak, v_peak = peak
        half = 0.5 * (dip + v_peak)
        x = brentq(lambda x: f(centre + sign * x) - half, 0.0, x_peak, xtol=1e-300, rtol=1e-12)
        edges.append(centre + sign * x)
    return edges[0] - edges[1]


def polariton(u_sq: float, p: DeviceParams, sigma_bc: complex = 0j,
              eps_p: complex = 1.0) -> PolaritonState:
    """Dark-state polariton mixing angle, group-velocity ratio and amplitude."""
    m = p.medium
    n_c = photon_number(u_sq, p)
    tan2 = (m.g_p * m.g_p * m.n_atoms) / (m.g * m.g * (n_c + 1.0))
    theta = math.atan(math.sqrt(tan2))
    v_g_ratio = 1.0 / (1.0 + tan2)
    psi = math.cos(theta) * eps_p - math.sin(theta) * math.sqrt(m.n_atoms) * sigma_bc
    return PolaritonState(theta, v_g_ratio, complex(psi))


@dataclass(frozen=True)
class SpectrumTable:
    """Normalized susceptibility on a (u_sq, delta_p) grid; matrices are indexed [u, dp]."""

    delta_p: np.ndarray
    u_sq: np.ndarray
    im_chi: np.ndarray
    re_chi: np.ndarray

    def long_rows(self) -> np.ndarray:
        """Rows ``(delta_p, u_sq, im_chi, re_chi)`` with ``u_sq`` as the outer loop."""
        dp, u = np.meshgrid(self.delta_p, self.u_sq)
        return np.column_stack([dp.ravel(), u.ravel(), self.im_chi.ravel(), self.re_chi.ravel()])

    def to_csv(self, path) -> int:
        from .io import write_csv
        return write_csv(path, ("delta_p", "u_sq", "im_chi", "re_chi"), self.long_rows())


def _check_grid(name, grid):
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise ValueError(f"{name} grid must be a non-empty 1-D sequence")
    if np.any(np.diff(g) <= 0):
        raise ValueError(f"{name} grid must be strictly increasing")
    return g


def spectrum_sweep(delta_p, u_sq, p: DeviceParams, workers: int | None = None) -> SpectrumTable:
    dp = _check_grid("delta_p", delta_p)
    u = _check_grid("u_sq", u_sq)
    n_c = photon_number(u, p) if u.size > 1 else np.array([photon_number(u[0], p)])

    def row(n):
        return np.asarray(chi_steady(dp, n, p), dtype=complex).reshape(dp.shape)

    rows = map_ordered(row, list(np.atleast_1d(n_c)), workers=workers)
    chi = np.vstack(rows)
    return SpectrumTable(dp, u, chi.imag.copy(), chi.real.copy())


def modulation_metrics(u_m_sq: float, p: DeviceParams, u_sq: float = 0.0) -> ModulationMetrics:
    """Collect the figures of merit for a drive swinging between 0 and ``u_m_sq``.

    Window width and polariton quantities are evaluated at ``u_sq``.
    """
    r_db = extinction_ratio(u_m_sq, p)
    try:
        width = eit_width(u_sq, p)
    except NoWindow:
        width = None
    pol = polariton(u_sq, p)
    return ModulationMetrics(
        r_db=r_db,
        a_min=float(im_chi_resonant(0.0, p)),
        a_max=float(im_chi_resonant(u_m_sq, p)),
        n_cmax=max_photon_number(p),
        n_cmin=float(photon_number(u_m_sq, p)),
        eit_width=width,
        theta=pol.theta,
        v_g_ratio=pol.v_g_ratio,
    )
