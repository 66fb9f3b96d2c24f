"""
ETPA of light in a single spectral mode with many transverse Schmidt modes.

With Omega_m = Omega_p the molecular response enters only through one
Voigt overlap, and both contributions become squares of

    B(X, Y) = sum_{a, b} W_ab h_a^2(X) h_b^2(Y),   W_ab = weight(r_{a+b} G)

with X = sqrt(Q_m Q_p) x. The correlated term uses sinh cosh weights, the
uncorrelated one sinh^2 weights with the parity (-1)^(a+b).
"""

import dataclasses
import functools
import logging
import math

import numpy as np

from . import molecule
from .errors import DomainError
from .molecule import MoleculeParams
from .pdc import (
    PdcParams,
    gain_for_photon_number,
    mean_photon_number,
    mode_cutoff,
    schmidt_spectrum,
    sinh_cosh,
    sinh_squared,
)
from .scan import Axis, run_scan
from .signal_spectral import SignalPoint
from .specfun import (
    QuadratureSpec,
    faddeeva_re,
    gauss_legendre_panels,
    hermite_table,
    integrate_adaptive,
    lorentzian,
    lorentzian_points,
)

logger = logging.getLogger(__name__)

_SQRT2 = math.sqrt(2.0)
_UNITS = ("mode", "pump")
_GL_ORDER = 12
_CHUNK = 4096


@dataclasses.dataclass(frozen=True)
class SpatialSignalConfig:
    '''
        coordinate_unit "mode" takes x, y in units of 1/sqrt(Q_m Q_p),
        "pump" in units of 1/Q_p
    '''

    pdc: PdcParams
    mol: MoleculeParams
    truncation: object = None
    coordinate_unit: str = "mode"
    quadrature: QuadratureSpec = QuadratureSpec()

    def __post_init__(self):
        if not math.isclose(self.pdc.bandwidth_m, self.pdc.bandwidth_p, rel_tol=1e-12):
            raise DomainError(
                "single spectral mode requires bandwidth_m == bandwidth_p, "
                f"got {self.pdc.bandwidth_m} and {self.pdc.bandwidth_p}"
            )
        if self.coordinate_unit not in _UNITS:
            raise DomainError(f"coordinate_unit must be one of {_UNITS}, got {self.coordinate_unit!r}")
        if self.truncation is None:
            object.__setattr__(self, "truncation", schmidt_spectrum(self.pdc))

    def replace(self, **changes):
        pdc_fields = {f.name for f in dataclasses.fields(PdcParams)}
        mol_fields = {f.name for f in dataclasses.fields(MoleculeParams)}
        unknown = set(changes) - pdc_fields - mol_fields
        if unknown:
            raise DomainError(f"unknown parameters {sorted(unknown)}")
        pdc_changes = {k: v for k, v in changes.items() if k in pdc_fields}
        new_pdc = dataclasses.replace(self.pdc, **pdc_changes)
        truncation = self.truncation
        if pdc_changes:
            truncation = schmidt_spectrum(new_pdc, self.truncation.truncation_epsilon)
        new_mol = dataclasses.replace(self.mol, **{k: v for k, v in changes.items() if k in mol_fields})
        return SpatialSignalConfig(new_pdc, new_mol, truncation, self.coordinate_unit, self.quadrature)

    @property
    def mode_scale(self):
        '''factor turning the configured coordinates into Hermite arguments'''
        if self.coordinate_unit == "mode":
            return 1.0
        return math.sqrt(self.pdc.momentum_m / self.pdc.momentum_p)

    @property
    def n_corr(self):
        spec = self.truncation
        return max(spec.n_xy_max, mode_cutoff(spec.zeta_q, 1, spec.truncation_epsilon, "triangle"))

    @property
    def n_unc(self):
        spec = self.truncation
        return min(self.n_corr, mode_cutoff(spec.zeta_q, 2, spec.truncation_epsilon, "triangle"))


# ------------------------------------------------------------------
# Spectral overlap
# ------------------------------------------------------------------
def spec_overlap(mol, pdc):
    '''
        Voigt overlap of the single spectral mode with the resonance,
        Re w((omega_p - omega_fg + i gamma_fg) / (sqrt 2 Omega_p)); equals 1
        on resonance for gamma_fg -> 0
    '''
    scale = _SQRT2 * pdc.bandwidth_p
    return faddeeva_re(-molecule.detuning(mol, pdc) / scale, mol.gamma_fg / scale)


def _mode_pair_sum(pdc, s, quadrature):
    # integral of h~(s - w) h~(w) over w
    centre = 0.5 * pdc.omega_p
    norm = (math.pi * pdc.bandwidth_p**2) ** -0.5

    def integrand(w):
        return norm * math.exp(-((s - w - centre) ** 2 + (w - centre) ** 2) / (2 * pdc.bandwidth_p**2))

    return integrate_adaptive(integrand, quadrature.over(-np.inf, np.inf, (0.5 * s,)))


def spec_overlap_quadrature(mol, pdc, quadrature=None):
    '''spec_overlap from its defining frequency integrals'''
    quadrature = quadrature or QuadratureSpec()

    def integrand(s):
        pair = _mode_pair_sum(pdc, s, quadrature)
        return lorentzian(mol.omega_fg - s, mol.gamma_fg) * pair * pair

    points = sorted(set(lorentzian_points(mol.omega_fg, mol.gamma_fg)) | {pdc.omega_p})
    return integrate_adaptive(integrand, quadrature.over(-np.inf, np.inf, points))


# ------------------------------------------------------------------
# Mode sums
# ------------------------------------------------------------------
def _weight_matrix(cfg, gain, n_max, kind, alternating=False):
    spec = cfg.truncation
    shells = np.add.outer(np.arange(n_max + 1), np.arange(n_max + 1))
    r = (1.0 - spec.zeta_q**2) * spec.zeta_q**shells.astype(float)
    if kind == "corr":
        w = sinh_cosh(r * gain)
        # position-space bilinear sum alternates only for Q_m < Q_p
        if cfg.pdc.momentum_m < cfg.pdc.momentum_p:
            w = w * (-1.0) ** shells
    else:
        w = sinh_squared(r * gain)
        if alternating:
            w = w * (-1.0) ** shells
    return np.where(shells <= n_max, w, 0.0)


def _mode_bracket(cfg, weights, x, y):
    n_max = weights.shape[0] - 1
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    scale = cfg.mode_scale
    hx2 = hermite_table(n_max, scale * x.ravel()) ** 2
    hy2 = hermite_table(n_max, scale * y.ravel()) ** 2
    bracket = np.einsum("ap,ab,bp->p", hx2, weights, hy2)
    return bracket.reshape(x.shape)


def _check_gain(gain):
    if not gain >= 0:
        raise DomainError(f"gain must be non-negative, got {gain}")


def _prefactor(cfg):
    q2 = (cfg.pdc.momentum_m * cfg.pdc.momentum_p) ** 2
    return molecule.signal_prefactor(cfg.mol) * spec_overlap(cfg.mol, cfg.pdc) * q2


def _scalar(value):
    return value if np.ndim(value) else float(value)


def p_corr_spatial(cfg, gain, x, y, n_max=None):
    '''correlated excitation probability at the transverse point (x, y)'''
    _check_gain(gain)
    n_max = cfg.n_corr if n_max is None else n_max
    bracket = _mode_bracket(cfg, _weight_matrix(cfg, gain, n_max, "corr"), x, y)
    return _scalar(_prefactor(cfg) * bracket**2)


def p_unc_spatial(cfg, gain, x, y, alternating=True, n_max=None):
    '''
        uncorrelated excitation probability at (x, y); alternating=False
        drops the parity factor of the mode sum
    '''
    _check_gain(gain)
    n_max = cfg.n_unc if n_max is None else n_max
    bracket = _mode_bracket(cfg, _weight_matrix(cfg, gain, n_max, "unc", alternating), x, y)
    return _scalar(2.0 * _prefactor(cfg) * bracket**2)


@functools.lru_cache(maxsize=16)
def hermite_square_overlaps(n_max):
    '''G_ac = integral of h_a^2 h_c^2 over the real line'''
    k = math.sqrt(2 * n_max + 1)
    limit = k + 8.0
    h = min(0.25, math.pi / (2.0 * k))
    edges = np.linspace(-limit, limit, int(math.ceil(2 * limit / h)) + 1)
    nodes, weights = gauss_legendre_panels(edges, _GL_ORDER)
    table = np.zeros((n_max + 1, n_max + 1))
    for start in range(0, nodes.size, _CHUNK):
        sq = hermite_table(n_max, nodes[start:start + _CHUNK]) ** 2
        table += (sq * weights[start:start + _CHUNK]) @ sq.T
    logger.debug("hermite square overlaps n_max=%d on %d nodes", n_max, nodes.size)
    table.setflags(write=False)
    return table


def integrated_components(cfg, sample, gain, alternating=True):
    '''
        correlated and uncorrelated rates m_0 dz f_rep / (2 pi)^2 times the
        transverse integral of P_f, in closed trace form; returned as a
        SignalPoint whose p_corr / p_unc hold the two rates
    '''
    _check_gain(gain)
    q_mq_p = cfg.pdc.momentum_m * cfg.pdc.momentum_p
    base = molecule.signal_prefactor(cfg.mol) * spec_overlap(cfg.mol, cfg.pdc) * q_mq_p
    scale = sample.m_0 * sample.delta_z * cfg.pdc.f_rep / (2 * math.pi) ** 2

    n_corr = cfg.n_corr
    w = _weight_matrix(cfg, gain, n_corr, "corr")
    g = hermite_square_overlaps(n_corr)
    wg = w @ g
    corr = float(np.sum(wg * wg.T))

    n_unc = cfg.n_unc
    w = _weight_matrix(cfg, gain, n_unc, "unc", alternating)
    g = g[: n_unc + 1, : n_unc + 1]
    wg = w @ g
    unc = 2.0 * float(np.sum(wg * wg.T))

    return SignalPoint(
        p_corr=scale * base * max(corr, 0.0),
        p_unc=scale * base * max(unc, 0.0),
        mean_n=mean_photon_number(cfg.truncation, gain),
        detuning=molecule.detuning(cfg.mol, cfg.pdc),
        gain=gain,
    )


def integrated_signal(cfg, sample, gain, alternating=True):
    '''spatially integrated ETPA rate'''
    return integrated_components(cfg, sample, gain, alternating).total


# ------------------------------------------------------------------
# Scans
# ------------------------------------------------------------------
def _fwhm(x, values):
    # full width at half maximum by linear interpolation on either side of the peak
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)) or values.size < 3:
        return math.nan
    peak = int(np.argmax(values))
    half = 0.5 * values[peak]
    if half <= 0:
        return math.nan
    left = np.nonzero(values[:peak] < half)[0]
    right = np.nonzero(values[peak:] < half)[0]
    if left.size == 0 or right.size == 0:
        return math.nan
    i = left[-1]
    j = peak + right[0]
    x_left = np.interp(half, [values[i], values[i + 1]], [x[i], x[i + 1]])
    x_right = np.interp(half, [values[j], values[j - 1]], [x[j], x[j - 1]])
    return float(abs(x_right - x_left))


def _profile_point(cfg, gain, y, alternating, point):
    x = point[0]
    p = SignalPoint(
        p_corr=p_corr_spatial(cfg, gain, x, y),
        p_unc=p_unc_spatial(cfg, gain, x, y, alternating),
        gain=gain,
    )
    return {"p_corr": p.p_corr, "p_unc": p.p_unc, "total": p.total, "r_rel": p.r_rel}


def spatial_profile(cfg, gain, x_grid, y=0.0, alternating=True, **kwargs):
    '''
        signal along x at fixed y; the full widths at half maximum of the
        total, correlated and uncorrelated profiles go into the provenance
    '''
    _check_gain(gain)
    axis = x_grid if isinstance(x_grid, Axis) else Axis("x", tuple(x_grid))
    axis = Axis("x", axis.values, axis.scale)
    kwargs.setdefault("desc", "spatial profile")
    result = run_scan(functools.partial(_profile_point, cfg, gain, y, alternating), [axis], **kwargs)
    x = result.column("x")
    for column in ("total", "p_corr", "p_unc"):
        result.provenance[f"fwhm_{column}"] = repr(_fwhm(x, result.column(column)))
    result.provenance["coordinate_unit"] = cfg.coordinate_unit
    return result


def _profile_grid_point(cfg, y, alternating, point):
    mean_n, x = point
    gain = gain_for_photon_number(cfg.truncation, mean_n)
    values = _profile_point(cfg, gain, y, alternating, (x,))
    values["gain"] = gain
    return values


def spatial_profile_scan(cfg, n_grid, x_grid, y=0.0, alternating=True, **kwargs):
    '''profiles for several mean photon numbers, one block of rows each'''
    n_axis = n_grid if isinstance(n_grid, Axis) else Axis("mean_n", tuple(n_grid))
    x_axis = x_grid if isinstance(x_grid, Axis) else Axis("x", tuple(x_grid))
    axes = [Axis("mean_n", n_axis.values, n_axis.scale), Axis("x", x_axis.values, x_axis.scale)]
    kwargs.setdefault("desc", "spatial profile")
    result = run_scan(functools.partial(_profile_grid_point, cfg, y, alternating), axes, **kwargs)
    frame = result.frame
    for mean_n, block in frame.groupby("mean_n", sort=False):
        for column in ("total", "p_corr", "p_unc"):
            result.provenance[f"fwhm_{column}@mean_n:{mean_n:g}"] = repr(
                _fwhm(block["x"].to_numpy(), block[column].to_numpy())
            )
    result.provenance["coordinate_unit"] = cfg.coordinate_unit
    return result


def _integrated_point(cfg, sample, alternating, axis_names, point):
    values = dict(zip(axis_names, point))
    if "momentum_m" in values:
        cfg = cfg.replace(momentum_m=values["momentum_m"])
    gain = gain_for_photon_number(cfg.truncation, values["mean_n"])
    p = integrated_components(cfg, sample, gain, alternating)
    return {
        "rate_corr": p.p_corr,
        "rate_unc": p.p_unc,
        "rate_total": p.total,
        "r_rel": p.r_rel,
        "gain": gain,
    }


def integrated_scan(cfg, sample, n_grid, momentum_m_grid=None, alternating=True, **kwargs):
    '''
        spatially integrated rates against the mean photon number; with
        momentum_m_grid one block of rows per momentum bandwidth Q_m
    '''
    n_axis = n_grid if isinstance(n_grid, Axis) else Axis("mean_n", tuple(n_grid), "log")
    axes = [Axis("mean_n", n_axis.values, n_axis.scale)]
    if momentum_m_grid is not None:
        m_axis = momentum_m_grid if isinstance(momentum_m_grid, Axis) else Axis("momentum_m", tuple(momentum_m_grid))
        axes.insert(0, Axis("momentum_m", m_axis.values, m_axis.scale))
    kwargs.setdefault("desc", "integrated signal")
    evaluate = functools.partial(_integrated_point, cfg, sample, alternating, tuple(a.name for a in axes))
    return run_scan(evaluate, axes, **kwargs)
