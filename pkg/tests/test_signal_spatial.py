import math

import numpy as np
import pytest

from etpa import pairlimit
from etpa.errors import DomainError
from etpa.molecule import MoleculeParams, SampleParams
from etpa.pdc import PdcParams, gain_for_photon_number, sinh_cosh, sinh_squared
from etpa.signal_spatial import (
    SpatialSignalConfig,
    _fwhm,
    hermite_square_overlaps,
    integrated_components,
    integrated_scan,
    integrated_signal,
    p_corr_spatial,
    p_unc_spatial,
    spatial_profile,
    spatial_profile_scan,
    spec_overlap,
    spec_overlap_quadrature,
)
from etpa.signal_spectral import SpectralSignalConfig, p_corr_exact, p_unc_exact
from etpa.specfun import erfcx, gauss_legendre_panels, hermite_table


def _config(momentum_m=1.0, momentum_p=1.0, gamma_fg=0.5, detuning=0.0, coupling=1.0, unit="mode"):
    params = PdcParams(momentum_p=momentum_p, momentum_m=momentum_m)
    mol = MoleculeParams(omega_fg=params.omega_p + detuning, gamma_fg=gamma_fg, coupling=coupling)
    return SpatialSignalConfig(params, mol, coordinate_unit=unit)


# ------------------------------------------------------------------
# Spectral overlap
# ------------------------------------------------------------------
@pytest.mark.parametrize("gamma, detuning", [(0.5, 0.0), (0.05, 0.0), (1.3, 0.7), (4.0, -2.0)])
def test_spec_overlap_matches_defining_integral(gamma, detuning):
    params = PdcParams(bandwidth_p=1.5, bandwidth_m=1.5)
    mol = MoleculeParams(omega_fg=params.omega_p + detuning, gamma_fg=gamma)
    assert spec_overlap(mol, params) == pytest.approx(spec_overlap_quadrature(mol, params), rel=1e-6)


def test_spec_overlap_limits():
    params = PdcParams()
    assert spec_overlap(MoleculeParams(gamma_fg=1e-9), params) == pytest.approx(1.0, abs=1e-8)
    far = [spec_overlap(MoleculeParams(omega_fg=100.0 + d, gamma_fg=0.2), params) for d in (0.0, 1.0, 3.0, 10.0)]
    assert np.all(np.diff(far) < 0)
    broad = spec_overlap(MoleculeParams(gamma_fg=1000.0), params)
    assert broad == pytest.approx(math.sqrt(2 / math.pi) / 1000.0, rel=1e-5)


# ------------------------------------------------------------------
# Configuration
# ------------------------------------------------------------------
def test_config_needs_single_spectral_mode():
    with pytest.raises(DomainError, match="bandwidth_m"):
        SpatialSignalConfig(PdcParams(bandwidth_m=2.0), MoleculeParams())


def test_config_rejects_unknown_unit():
    with pytest.raises(DomainError):
        SpatialSignalConfig(PdcParams(), MoleculeParams(), coordinate_unit="metre")


def test_config_scales_and_truncation():
    cfg = _config(momentum_m=9.0, unit="pump")
    assert cfg.mode_scale == pytest.approx(3.0)
    assert _config(momentum_m=9.0).mode_scale == 1.0
    assert cfg.n_unc <= cfg.n_corr
    assert cfg.replace(momentum_m=2.0).truncation.zeta_q == pytest.approx(1 / 3)
    with pytest.raises(DomainError):
        cfg.replace(width=1.0)


# ------------------------------------------------------------------
# Local probabilities
# ------------------------------------------------------------------
@pytest.mark.parametrize("gain", [0.2, 1.5])
def test_single_transverse_mode_closed_form(gain):
    cfg = _config(momentum_m=2.0, momentum_p=2.0, coupling=1.5)
    x, y = 0.3, -0.6
    gaussian = math.exp(-2 * (x * x + y * y)) / math.pi**2
    scale = 1.5 * spec_overlap(cfg.mol, cfg.pdc) * 16.0 * gaussian
    assert p_corr_spatial(cfg, gain, x, y) == pytest.approx(scale * sinh_cosh(gain) ** 2, rel=1e-12)
    assert p_unc_spatial(cfg, gain, x, y) == pytest.approx(2 * scale * sinh_squared(gain) ** 2, rel=1e-12)


@pytest.mark.parametrize("gain", [0.3, 2.0])
def test_agrees_with_spectral_module_for_a_single_mode(gain):
    momentum = 1.7
    params = PdcParams(momentum_p=momentum, momentum_m=momentum)
    mol = MoleculeParams(omega_fg=100.4, gamma_fg=0.8, coupling=0.9)
    spatial = SpatialSignalConfig(params, mol, coordinate_unit="pump")
    spectral = SpectralSignalConfig(params, mol)
    x, y = 0.25, 0.1
    rho = (x / momentum, y / momentum)
    assert p_corr_spatial(spatial, gain, x, y) == pytest.approx(p_corr_exact(spectral, gain, rho), rel=1e-8)
    assert p_unc_spatial(spatial, gain, x, y) == pytest.approx(p_unc_exact(spectral, gain, rho), rel=1e-8)


def test_profiles_are_symmetric():
    cfg = _config(momentum_m=3.0)
    for f in (p_corr_spatial, p_unc_spatial):
        assert f(cfg, 0.8, 0.4, -0.7) == pytest.approx(f(cfg, 0.8, -0.4, 0.7), rel=1e-12)
        assert f(cfg, 0.8, 0.4, -0.7) == pytest.approx(f(cfg, 0.8, -0.7, 0.4), rel=1e-12)


def test_probabilities_vanish_far_out():
    cfg = _config(momentum_m=10.0)
    assert p_corr_spatial(cfg, 0.5, 40.0, 0.0) < 1e-12 * p_corr_spatial(cfg, 0.5, 0.0, 0.0)
    assert p_unc_spatial(cfg, 0.5, 0.0, 40.0) < 1e-12 * p_unc_spatial(cfg, 0.5, 0.0, 0.0)


def test_vectorized_points():
    cfg = _config(momentum_m=2.5)
    x = np.linspace(-1, 1, 5)
    values = p_corr_spatial(cfg, 0.4, x, 0.2)
    assert values.shape == (5,)
    assert values[1] == pytest.approx(p_corr_spatial(cfg, 0.4, x[1], 0.2))


def test_parity_reduces_uncorrelated_signal():
    cfg = _config(momentum_m=4.0)
    grid = np.linspace(-2, 2, 9)
    x, y = np.meshgrid(grid, grid)
    signed = p_unc_spatial(cfg, 1.2, x, y)
    unsigned = p_unc_spatial(cfg, 1.2, x, y, alternating=False)
    assert np.all(signed >= 0)
    assert np.all(signed <= unsigned * (1 + 1e-12))
    assert signed[4, 5] < unsigned[4, 5]


def test_truncation_is_converged():
    cfg = _config(momentum_m=10.0)
    for f, n in ((p_corr_spatial, cfg.n_corr), (p_unc_spatial, cfg.n_unc)):
        base = f(cfg, 0.5, 0.3, 0.1)
        assert f(cfg, 0.5, 0.3, 0.1, n_max=2 * n) == pytest.approx(base, rel=1e-6)


def test_negative_gain_is_rejected():
    with pytest.raises(DomainError):
        p_unc_spatial(_config(), -1.0, 0.0, 0.0)


# ------------------------------------------------------------------
# Against a numerical Schmidt decomposition
# ------------------------------------------------------------------
def _decomposed_profile(params, points, modes=120):
    # SVD of the discretized one-dimensional momentum amplitude, modes taken
    # to position space by direct Fourier sums
    q_p, q_m = params.momentum_p, params.momentum_m
    reach = 6.0 * max(q_p, q_m)
    nodes, weights = gauss_legendre_panels(np.linspace(-reach, reach, 201), 10)
    root_w = np.sqrt(weights)
    kernel = np.exp(
        -np.add.outer(nodes, nodes) ** 2 / (4 * q_p**2) - np.subtract.outer(nodes, nodes) ** 2 / (4 * q_m**2)
    )
    u, s, vt = np.linalg.svd(root_w[:, None] * kernel * root_w[None, :])
    s = s[:modes] / math.sqrt(np.sum(s**2))
    phases = np.exp(1j * np.outer(points, nodes)) * root_w / math.sqrt(2 * math.pi)
    products = np.real((phases @ u[:, :modes]) * (phases @ vt[:modes].T))
    return s, products


@pytest.mark.slow
def test_correlated_profile_matches_numerical_decomposition():
    gain = 0.5
    cfg = _config(momentum_m=10.0, unit="pump")
    points = np.array([0.0, 0.12, -0.3])
    s, products = _decomposed_profile(cfg.pdc, points)
    weights = sinh_cosh(gain * np.outer(s, s))
    prefactor = cfg.mol.coupling * spec_overlap(cfg.mol, cfg.pdc)
    for i, j in ((0, 0), (1, 0), (1, 2)):
        bracket = products[i] @ weights @ products[j]
        expected = prefactor * bracket**2
        assert p_corr_spatial(cfg, gain, points[i], points[j]) == pytest.approx(expected, rel=1e-4)


@pytest.mark.slow
def test_uncorrelated_profile_matches_numerical_decomposition():
    gain = 0.5
    cfg = _config(momentum_m=10.0, unit="pump")
    points = np.array([0.0, 0.12])
    q_p, q_m = cfg.pdc.momentum_p, cfg.pdc.momentum_m
    reach = 6.0 * max(q_p, q_m)
    nodes, weights = gauss_legendre_panels(np.linspace(-reach, reach, 201), 10)
    root_w = np.sqrt(weights)
    kernel = np.exp(
        -np.add.outer(nodes, nodes) ** 2 / (4 * q_p**2) - np.subtract.outer(nodes, nodes) ** 2 / (4 * q_m**2)
    )
    u, s, _ = np.linalg.svd(root_w[:, None] * kernel * root_w[None, :])
    s = s[:120] / math.sqrt(np.sum(s**2))
    phases = np.exp(1j * np.outer(points, nodes)) * root_w / math.sqrt(2 * math.pi)
    # signal modes squared without conjugation
    squares = np.real((phases @ u[:, :120]) ** 2)
    weights_unc = sinh_squared(gain * np.outer(s, s))
    prefactor = cfg.mol.coupling * spec_overlap(cfg.mol, cfg.pdc)
    for i, j in ((0, 0), (1, 0), (1, 1)):
        bracket = squares[i] @ weights_unc @ squares[j]
        expected = 2.0 * prefactor * bracket**2
        assert p_unc_spatial(cfg, gain, points[i], points[j]) == pytest.approx(expected, rel=1e-4)


# ------------------------------------------------------------------
# Integrated rates
# ------------------------------------------------------------------
def test_hermite_square_overlaps():
    table = hermite_square_overlaps(6)
    assert table.shape == (7, 7)
    assert table[0, 0] == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-12)
    np.testing.assert_allclose(table, table.T, rtol=1e-13)
    nodes, weights = gauss_legendre_panels(np.linspace(-14, 14, 113), 16)
    sq = hermite_table(6, nodes) ** 2
    np.testing.assert_allclose(table, (sq * weights) @ sq.T, rtol=1e-10)
    assert not table.flags.writeable


def test_integrated_rate_matches_grid_integral():
    cfg = _config(momentum_m=3.0, momentum_p=1.0, unit="pump")
    sample = SampleParams(m_0=2.0, delta_z=0.5)
    gain = 0.7
    nodes, weights = gauss_legendre_panels(np.linspace(-6, 6, 97), 10)
    x, y = np.meshgrid(nodes, nodes, indexing="ij")
    w2 = np.outer(weights, weights)
    scale = sample.m_0 * sample.delta_z * cfg.pdc.f_rep / (2 * math.pi) ** 2
    corr = scale * np.sum(w2 * p_corr_spatial(cfg, gain, x, y))
    unc = scale * np.sum(w2 * p_unc_spatial(cfg, gain, x, y))
    point = integrated_components(cfg, sample, gain)
    assert point.p_corr == pytest.approx(corr, rel=1e-8)
    assert point.p_unc == pytest.approx(unc, rel=1e-8)
    assert integrated_signal(cfg, sample, gain) == pytest.approx(corr + unc, rel=1e-8)


@pytest.mark.parametrize("momentum_m", [1.0, 4.0, 0.5])
def test_low_gain_rate_reduces_to_pair_limit(momentum_m):
    cfg = _config(momentum_m=momentum_m, gamma_fg=0.5, coupling=1.2)
    sample = SampleParams(m_0=3.0, delta_z=0.2)
    gain = 1e-3
    corr = integrated_components(cfg, sample, gain).p_corr
    assert corr == pytest.approx(pairlimit.rate_low_gain(cfg.pdc, cfg.mol, sample, gain), rel=1e-4)
    assert spec_overlap(cfg.mol, cfg.pdc) == pytest.approx(erfcx(0.5 / math.sqrt(2)))


def test_integrated_ratio_falls_with_photon_number():
    cfg = _config(momentum_m=3.0)
    result = integrated_scan(cfg, SampleParams(), [0.1, 1.0, 10.0, 100.0], progress=False)
    assert result.columns[:2] == ["mean_n", "rate_corr"]
    ratio = result.column("r_rel")
    assert np.all(np.diff(ratio) < 0)
    assert np.all(ratio > 0.5)
    np.testing.assert_allclose(result.column("rate_total"), result.column("rate_corr") + result.column("rate_unc"))


@pytest.mark.slow
def test_strong_transverse_entanglement_keeps_its_advantage():
    photon_numbers = [0.1, 1.0, 10.0, 100.0, 1000.0]
    cfg = _config(momentum_m=1.5)
    result = integrated_scan(cfg, SampleParams(), photon_numbers, momentum_m_grid=[1.5, 50.0], progress=False)
    total = result.column("rate_total").reshape(2, len(photon_numbers))
    advantage = total[1] / total[0]
    assert np.all(advantage > 1.0)
    assert np.all(np.diff(advantage) < 0)


# ------------------------------------------------------------------
# Profiles
# ------------------------------------------------------------------
def test_fwhm_of_gaussian():
    x = np.linspace(-5, 5, 2001)
    assert _fwhm(x, np.exp(-x * x / 2)) == pytest.approx(2 * math.sqrt(2 * math.log(2)), rel=1e-5)
    assert math.isnan(_fwhm(x, x))


def test_profile_is_even_and_peaked():
    cfg = _config(momentum_m=4.0)
    result = spatial_profile(cfg, 0.6, np.linspace(-2, 2, 41), progress=False)
    total = result.column("total")
    np.testing.assert_allclose(total, total[::-1], rtol=1e-12)
    assert np.argmax(total) == 20
    assert set(result.provenance) >= {"fwhm_total", "fwhm_p_corr", "fwhm_p_unc", "coordinate_unit"}
    assert float(result.provenance["fwhm_total"]) > 0


def test_uncorrelated_profile_narrows_with_entanglement():
    x_grid = np.linspace(-3, 3, 601)
    widths = {}
    for momentum_m in (1.5, 10.0):
        cfg = _config(momentum_m=momentum_m, unit="pump")
        gain = gain_for_photon_number(cfg.truncation, 1.0)
        result = spatial_profile(cfg, gain, x_grid, progress=False)
        widths[momentum_m] = float(result.provenance["fwhm_p_unc"])
    assert widths[10.0] < 0.5 * widths[1.5]


def test_profile_scan_records_widths_per_photon_number():
    cfg = _config(momentum_m=2.0)
    result = spatial_profile_scan(cfg, [0.1, 10.0], np.linspace(-2, 2, 21), progress=False)
    assert len(result.frame) == 42
    assert "fwhm_total@mean_n:0.1" in result.provenance
    assert "fwhm_p_unc@mean_n:10" in result.provenance
    assert result.provenance["coordinate_unit"] == "mode"
