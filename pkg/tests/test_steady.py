import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eomsim.errors import NegativeVoltageSquared
from eomsim.steady import (
    absorption_band, cavity_amplitude, cavity_detuning, chi_steady, cmo_displacement,
    effective_decay, im_chi_resonant, max_photon_number, photon_number, sample,
)

from oracles import absorption_mp, chi_mp

# mpmath reference values for the default parameter set
Q_PER_V2 = 3.182496735250680994975e-10
DETUNE_PER_V2 = 5.998865018122224349765e07
N_CMAX = 3.064534854966737888662e07
KAPPA_EFF_1 = 6.042225051954634215705e07
A_MIN = 3.263127200595606371275e-06
A_MAX = 0.9900990099009900990099
N_C_AT_4 = 2.776311508555660908238e04
A_AT_4 = 3.588845355144082663053e-03


def test_displacement(fig2):
    assert cmo_displacement(0.0, fig2) == 0.0
    assert cmo_displacement(1.0, fig2) == pytest.approx(Q_PER_V2, rel=1e-14)
    assert cmo_displacement(2.0, fig2) == pytest.approx(2 * cmo_displacement(1.0, fig2), rel=1e-15)


def test_negative_voltage_squared_rejected(fig2):
    for fn in (cmo_displacement, cavity_detuning, photon_number, im_chi_resonant):
        with pytest.raises(NegativeVoltageSquared):
            fn(-1e-3, fig2)


def test_detuning(fig2):
    assert cavity_detuning(0.0, fig2) == 0.0
    assert cavity_detuning(1.0, fig2) == pytest.approx(DETUNE_PER_V2, rel=1e-14)
    half = fig2.replace(detuning_factor=1.0)
    assert cavity_detuning(1.0, half) == pytest.approx(0.5 * cavity_detuning(1.0, fig2), rel=1e-15)


def test_photon_number(fig2):
    assert photon_number(0.0, fig2) == pytest.approx(N_CMAX, rel=1e-14)
    assert photon_number(0.0, fig2) == max_photon_number(fig2)
    assert photon_number(4.0, fig2) == pytest.approx(N_C_AT_4, rel=1e-13)
    assert photon_number(1e12, fig2) < 1e-10
    a = cavity_amplitude(3.0, fig2)
    assert abs(a) ** 2 == pytest.approx(photon_number(3.0, fig2), rel=1e-14)


def test_photon_number_monotone(fig2):
    u = np.linspace(0, 50, 1001)
    assert np.all(np.diff(photon_number(u, fig2)) < 0)


def test_effective_decay(fig2):
    kappa = fig2.cavity.kappa
    k0, q0 = effective_decay(0.0, fig2)
    assert k0 == kappa and q0 is None
    u_sym = kappa / fig2.derived.detune_coeff
    assert effective_decay(u_sym, fig2)[0] == pytest.approx(kappa * np.sqrt(2), rel=1e-14)
    assert effective_decay(1.0, fig2)[0] == pytest.approx(KAPPA_EFF_1, rel=1e-13)
    with_omega = fig2.replace(omega_c=2 * np.pi * 3.84e14)
    k1, q1 = effective_decay(1.0, with_omega)
    assert q1 == pytest.approx(with_omega.cavity.omega_c / k1, rel=1e-15)


def test_chi_resonance_is_purely_absorptive(fig2):
    for n in (0.0, 1.0, 1e3, N_CMAX):
        chi = chi_steady(0.0, n, fig2)
        assert chi.real == 0.0
        gg = fig2.medium.gamma * fig2.medium.gamma_s
        assert chi.imag == pytest.approx(gg / (gg + fig2.medium.g ** 2 * (n + 1)), rel=1e-15)


def test_chi_reference_values(fig2):
    assert chi_steady(0.0, N_CMAX, fig2).imag == pytest.approx(A_MIN, rel=1e-13)
    assert chi_steady(0.0, 0.0, fig2).imag == pytest.approx(A_MAX, rel=1e-15)
    assert im_chi_resonant(0.0, fig2) == pytest.approx(A_MIN, rel=1e-13)
    assert im_chi_resonant(4.0, fig2) == pytest.approx(A_AT_4, rel=1e-12)
    assert absorption_band(fig2) == pytest.approx((A_MIN, A_MAX), rel=1e-13)


@settings(max_examples=200)
@given(st.floats(-1e10, 1e10), st.floats(0, 1e8))
def test_chi_matches_high_precision(delta_p, n_c):
    import eomsim
    p = eomsim.fig2_params()
    ref = complex(chi_mp(delta_p, n_c, p))
    got = chi_steady(delta_p, n_c, p)
    assert abs(got - ref) <= 1e-12 * abs(ref) + 1e-300


def test_chi_symmetry(fig2):
    dp = np.geomspace(1e-2, 1e11, 400)
    for n in (0.0, 10.0, 1e4, N_CMAX):
        pos = chi_steady(dp, n, fig2)
        neg = chi_steady(-dp, n, fig2)
        assert np.all(np.abs(neg + np.conj(pos)) <= 1e-12 * np.abs(pos))


@given(st.floats(-1e11, 1e11), st.floats(0, 1e9))
def test_absorption_bounds(delta_p, n_c):
    import eomsim
    im = np.imag(chi_steady(delta_p, n_c, eomsim.fig2_params()))
    assert 0 < im < 1


def test_resonant_absorption_monotone(fig2):
    u = np.linspace(0, 100, 2001)
    a = im_chi_resonant(u, fig2)
    assert np.all(np.diff(a) > 0)
    assert np.all((a >= A_MIN * (1 - 1e-14)) & (a < A_MAX))


def test_resonant_matches_chi_and_mp(fig2):
    for u in (0.0, 0.3, 1.0, 4.0, 60.0, 1e3):
        n = photon_number(u, fig2)
        assert im_chi_resonant(u, fig2) == pytest.approx(chi_steady(0.0, n, fig2).imag, rel=1e-15)
        assert im_chi_resonant(u, fig2) == pytest.approx(float(absorption_mp(u, fig2)), rel=1e-13)


def test_probe_drive_invariance(fig2):
    strong = fig2.replace(probe_drive=1e3)
    for u in (0.0, 2.0):
        n = photon_number(u, fig2)
        assert chi_steady(1e6, n, fig2) == chi_steady(1e6, n, strong)
        assert im_chi_resonant(u, fig2) == im_chi_resonant(u, strong)


def test_eit_dip_between_two_peaks(fig2):
    n = photon_number(0.0, fig2)
    dp = np.linspace(-10, 10, 2001) * fig2.medium.gamma
    im = np.imag(chi_steady(dp, n, fig2))
    centre = len(dp) // 2
    left, right = np.argmax(im[:centre]), centre + np.argmax(im[centre:])
    assert im[centre] < im[left] and im[centre] < im[right]
    assert im[centre] == im[left:right + 1].min()


def test_sample_record(fig2):
    s = sample(0.0, 0.0, fig2)
    assert s.n_c == pytest.approx(N_CMAX, rel=1e-14)
    assert 0 < s.chi_norm.imag < 1
