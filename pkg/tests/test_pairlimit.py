import math

import numpy as np
import pytest

from etpa import pairlimit
from etpa.errors import DomainError
from etpa.molecule import MoleculeParams, SampleParams
from etpa.pdc import PdcParams, entanglement_area, entanglement_time
from etpa.scan import Axis
from etpa.specfun import erfcx, faddeeva_re, gauss_legendre_panels


def test_efficiency_limits():
    assert pairlimit.efficiency(100.0) == pytest.approx(0.7979, abs=0.005)
    assert pairlimit.efficiency(100.0) < math.sqrt(2 / math.pi)
    assert pairlimit.efficiency(0.01) / 0.01 == pytest.approx(1.0, abs=0.01)
    assert pairlimit.efficiency(0.0) == 0.0


def test_efficiency_is_increasing():
    x = np.geomspace(1e-3, 1e3, 60)
    assert np.all(np.diff(pairlimit.efficiency(x)) > 0)


def test_efficiency_rejects_negative_argument():
    with pytest.raises(DomainError):
        pairlimit.efficiency(-0.1)


@pytest.mark.slow
@pytest.mark.parametrize("gamma", [0.01, 0.1, 1.0, 10.0])
@pytest.mark.parametrize("bandwidth_m", [1.5, 10.0, 50.0])
def test_closed_form_frequency_factor_matches_quadrature(gamma, bandwidth_m):
    params = PdcParams(bandwidth_m=bandwidth_m)
    mol = MoleculeParams(omega_fg=params.omega_p, gamma_fg=gamma)
    closed = pairlimit.p_freq_closed(params, mol)
    numeric = pairlimit.p_freq_numeric(params, mol)
    assert abs(closed / numeric - 1) < 1e-4


def test_detuned_frequency_factor_is_a_voigt_profile():
    params = PdcParams(bandwidth_m=4.0)
    mol = MoleculeParams(omega_fg=101.2, gamma_fg=0.3)
    numeric = pairlimit.p_freq_numeric(params, mol)
    expected = 4.0 * faddeeva_re(1.2 / math.sqrt(2), 0.3 / math.sqrt(2))
    assert numeric == pytest.approx(expected, rel=1e-6)


def test_closed_form_needs_resonance():
    with pytest.raises(DomainError, match="p_freq_numeric"):
        pairlimit.p_freq_closed(PdcParams(), MoleculeParams(omega_fg=100.5))


def test_pair_sum_amplitude():
    params = PdcParams(bandwidth_m=6.0)
    s = 0.8
    expected = math.sqrt(6.0) * math.exp(-(s**2) / 4)
    assert pairlimit.pair_sum_amplitude(params, s) == pytest.approx(expected, rel=1e-8)


def test_spatial_factor_integrates_coincidence_amplitude():
    params = PdcParams(momentum_p=1.5, momentum_m=7.0)
    sample = SampleParams(delta_z=0.3)
    nodes, weights = gauss_legendre_panels(np.linspace(-6, 6, 97), 10)
    amplitude = pairlimit.coincidence_amplitude(params, nodes[:, None], nodes[None, :])
    integral = np.einsum("i,ij,j->", weights, amplitude**2, weights)
    assert sample.delta_z * integral == pytest.approx(pairlimit.r_spat(sample, params), rel=1e-10)
    assert pairlimit.r_spat(sample, params) == pytest.approx(0.3 * 49 / (2 * math.pi))


@pytest.mark.parametrize("gamma", [0.05, 1.0, 20.0])
def test_cross_section_closed_form(gamma):
    params = PdcParams(bandwidth_m=10.0, momentum_m=3.0)
    mol = MoleculeParams(omega_fg=params.omega_p, gamma_fg=gamma, coupling=2.0)
    a_e, t_e = entanglement_area(params), entanglement_time(params)
    expected = 2.0 * erfcx(gamma / math.sqrt(2)) / (2 * a_e * t_e)
    assert pairlimit.sigma_e(params, mol) == pytest.approx(expected, rel=1e-12)


def test_cross_section_plateau():
    params = PdcParams(bandwidth_m=10.0)
    mol = MoleculeParams(omega_fg=params.omega_p, gamma_fg=1e-9)
    assert pairlimit.sigma_e(params, mol) / pairlimit.sigma_e_limit(params, mol) == pytest.approx(1.0, abs=1e-8)


def test_cross_section_needs_resonance():
    with pytest.raises(DomainError):
        pairlimit.sigma_e(PdcParams(), MoleculeParams(omega_fg=99.0))


def test_cross_section_against_broadening():
    params = PdcParams(bandwidth_m=10.0)
    mol = MoleculeParams(omega_fg=params.omega_p)
    result = pairlimit.sigma_e_vs_gamma(params, mol, Axis.log("gamma_fg", 0.01, 100, 50))
    gamma = result.column("gamma_fg")
    sigma = result.column("sigma_e")
    normalized = result.column("sigma_e_normalized")

    assert len(result.frame) == 50
    assert np.all(np.diff(sigma) < 0)
    assert np.all(normalized[gamma <= 0.1 + 1e-12] >= 0.9)
    assert np.all(normalized[gamma <= 0.04] >= 0.95)

    tail = gamma >= 30
    slope = np.polyfit(np.log(gamma[tail]), np.log(sigma[tail]), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.05)


def test_cross_section_scan_rejects_non_positive_grid():
    with pytest.raises(DomainError):
        pairlimit.sigma_e_vs_gamma(PdcParams(), MoleculeParams(), [0.0, 1.0])


def test_pair_limit_summary():
    params = PdcParams(bandwidth_m=10.0, momentum_m=2.0)
    mol = MoleculeParams(omega_fg=params.omega_p, gamma_fg=0.5)
    sample = SampleParams(delta_z=2.0)
    result = pairlimit.pair_limit(params, mol, sample)
    assert result.p_freq == pytest.approx(10.0 * erfcx(0.5 / math.sqrt(2)))
    assert result.r_spat == pytest.approx(2.0 * 4 / (2 * math.pi))
    assert result.efficiency == pytest.approx(pairlimit.efficiency(0.5))
    assert result.T_e == pytest.approx(2 * math.pi / 10.0)
    assert result.A_e == pytest.approx(math.pi**2)


@pytest.mark.parametrize("gain", [1e-3, 0.02])
def test_low_gain_rate_equals_cross_section_form(gain):
    params = PdcParams(bandwidth_m=10.0, momentum_m=4.0, f_rep=3.0)
    mol = MoleculeParams(omega_fg=params.omega_p, gamma_fg=0.2, coupling=1.7)
    sample = SampleParams(m_0=5.0, delta_z=0.1)
    assert pairlimit.rate_low_gain(params, mol, sample, gain) == pytest.approx(
        pairlimit.rate_from_cross_section(params, mol, sample, gain), rel=1e-12
    )


def test_pair_limit_summary_needs_resonance():
    params = PdcParams(bandwidth_m=4.0)
    mol = MoleculeParams(omega_fg=101.0, gamma_fg=0.3)
    with pytest.raises(DomainError, match="pair_limit"):
        pairlimit.pair_limit(params, mol)
    assert pairlimit.p_freq_numeric(params, mol) > 0
