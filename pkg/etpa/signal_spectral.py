"""
ETPA of light in a single transverse mode with many temporal Schmidt modes.

Both contributions reduce to one-dimensional integrals over the scaled
two-photon detuning w of the Lorentzian resonance times products of
Laguerre functions

    l_n(w)        = L_n(w^2) exp(-w^2/2)                      (correlated)
    o_{m,n}(w)    = sqrt(n!/m!) w^(m-n) L_n^(m-n)(w^2) exp(-w^2/2)
                                                            (uncorrelated)

The integrals do not depend on the gain, so they are tabulated once per
resonance (width, centre) and truncation order and reused for every gain
of an intensity scan.
"""

import dataclasses
import functools
import logging
import math

import numpy as np
from scipy import special

from . import molecule
from .errors import ConvergenceError, DomainError
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
from .specfun import (
    QuadratureSpec,
    gauss_legendre_panels,
    integrate_adaptive,
    iter_overlap_fan,
    iter_overlap_rows,
    laguerre_assoc,
    lorentzian,
    lorentzian_points,
)

logger = logging.getLogger(__name__)

_GL_ORDER = 12
_CHUNK = 4096
_TABLE_CACHE = 64


@dataclasses.dataclass(frozen=True)
class SpectralSignalConfig:
    pdc: PdcParams
    mol: MoleculeParams
    truncation: object = None
    quadrature: QuadratureSpec = QuadratureSpec()

    def __post_init__(self):
        if not math.isclose(self.pdc.momentum_m, self.pdc.momentum_p, rel_tol=1e-12):
            raise DomainError(
                "single transverse mode requires momentum_m == momentum_p, "
                f"got {self.pdc.momentum_m} and {self.pdc.momentum_p}"
            )
        if self.truncation is None:
            object.__setattr__(self, "truncation", schmidt_spectrum(self.pdc))

    def replace(self, **changes):
        '''
            copy with PdcParams / MoleculeParams fields changed by name; the
            truncation is recomputed when the source changes
        '''
        pdc_fields = {f.name for f in dataclasses.fields(PdcParams)}
        mol_fields = {f.name for f in dataclasses.fields(MoleculeParams)}
        pdc_changes = {k: v for k, v in changes.items() if k in pdc_fields}
        mol_changes = {k: v for k, v in changes.items() if k in mol_fields}
        unknown = set(changes) - pdc_fields - mol_fields
        if unknown:
            raise DomainError(f"unknown parameters {sorted(unknown)}")
        new_pdc = dataclasses.replace(self.pdc, **pdc_changes)
        truncation = self.truncation
        if pdc_changes:
            truncation = schmidt_spectrum(new_pdc, self.truncation.truncation_epsilon)
        return SpectralSignalConfig(
            new_pdc, dataclasses.replace(self.mol, **mol_changes), truncation, self.quadrature
        )

    @property
    def w_scale(self):
        return 1.0 / math.sqrt(2.0 * self.pdc.bandwidth_m * self.pdc.bandwidth_p)

    @property
    def w_fg(self):
        '''gamma_fg / sqrt(2 Omega_m Omega_p)'''
        return self.mol.gamma_fg * self.w_scale

    @property
    def w_shift(self):
        '''(omega_fg - omega_p) / sqrt(2 Omega_m Omega_p)'''
        return molecule.detuning(self.mol, self.pdc) * self.w_scale

    @property
    def w_0(self):
        '''lower end -omega_p / sqrt(2 Omega_p Omega_m), taken to -inf'''
        return -self.pdc.omega_p * self.w_scale

    @property
    def n_corr(self):
        spec = self.truncation
        return max(spec.n_t_max, mode_cutoff(spec.zeta_t, 1, spec.truncation_epsilon))

    @property
    def n_unc(self):
        spec = self.truncation
        return min(self.n_corr, mode_cutoff(spec.zeta_t, 2, spec.truncation_epsilon))

    def bracket_signs(self, n):
        # bilinear Hermite expansion and overlap parity cancel for Omega_m >= Omega_p
        if self.pdc.bandwidth_m >= self.pdc.bandwidth_p:
            return np.ones(n + 1)
        return (-1.0) ** np.arange(n + 1)


@dataclasses.dataclass(frozen=True)
class SignalPoint:
    p_corr: float
    p_unc: float
    mean_n: float = math.nan
    detuning: float = 0.0
    gain: float = math.nan

    @property
    def total(self):
        return self.p_corr + self.p_unc

    @property
    def r_rel(self):
        return r_rel(self)

    @property
    def correlated_fraction(self):
        total = self.total
        return self.p_corr / total if total > 0 else math.nan

    def as_dict(self):
        return {
            "p_corr": self.p_corr,
            "p_unc": self.p_unc,
            "total": self.total,
            "r_rel": self.r_rel,
            "correlated_fraction": self.correlated_fraction,
            "mean_n": self.mean_n,
            "gain": self.gain,
            "detuning": self.detuning,
        }


def r_rel(point):
    '''P_corr / P_unc, infinite when the uncorrelated part vanishes'''
    if point.p_unc == 0:
        return math.inf if point.p_corr > 0 else math.nan
    return point.p_corr / point.p_unc


# ------------------------------------------------------------------
# Mode overlaps and w-integrals
# ------------------------------------------------------------------
def overlap_hermite(m, n, delta_w):
    '''
        sqrt(n!/m!) dw^(m-n) L_n^(m-n)(dw^2) exp(-dw^2/2), the overlap of
        Hermite functions h_m and h_n on a line of constant two-photon
        frequency up to the parity (-1)^n
    '''
    if not m >= n >= 0:
        raise DomainError(f"overlap_hermite needs m >= n >= 0, got m={m}, n={n}")
    alpha = m - n
    delta_w = float(delta_w)
    if m > 100:
        value = None
        for value in iter_overlap_rows(n, alpha, delta_w):
            pass
        return float(value)
    if alpha > 0 and delta_w == 0.0:
        return 0.0
    log_mag = 0.5 * (special.gammaln(n + 1) - special.gammaln(m + 1)) - 0.5 * delta_w**2
    if alpha:
        log_mag += alpha * math.log(abs(delta_w))
    sign = -1.0 if (delta_w < 0 and alpha % 2) else 1.0
    return float(sign * math.exp(log_mag) * laguerre_assoc(n, alpha, delta_w**2))


def _w_rule(w_fg, center, n_max):
    # composite Gauss-Legendre nodes: half-period panels for the fastest
    # oscillation of the squared Laguerre functions, plus panels graded
    # geometrically around the Lorentzian centre
    k = math.sqrt(4 * n_max + 2)
    w_max = k + 8.0
    h = min(0.25, math.pi / k)
    uniform = np.linspace(-w_max, w_max, int(math.ceil(2 * w_max / h)) + 1)
    offsets = w_fg * np.geomspace(1e-3, 1e3, 41)
    graded = np.concatenate(([center], center - offsets, center + offsets))
    graded = graded[(graded > -w_max) & (graded < w_max)]
    nodes, weights = gauss_legendre_panels(np.concatenate((uniform, graded)), _GL_ORDER)
    return nodes, weights * lorentzian(nodes - center, w_fg)


@functools.lru_cache(maxsize=_TABLE_CACHE)
def _correlated_table(w_fg, center, n_max):
    nodes, lw = _w_rule(w_fg, center, n_max)
    table = np.zeros((n_max + 1, n_max + 1))
    for start in range(0, nodes.size, _CHUNK):
        w = nodes[start:start + _CHUNK]
        rows = np.stack(list(iter_overlap_rows(n_max, 0, w)))
        table += (rows * lw[start:start + _CHUNK]) @ rows.T
    logger.debug("correlated table n_max=%d w_fg=%.4g centre=%.4g on %d nodes", n_max, w_fg, center, nodes.size)
    table.setflags(write=False)
    return table


@functools.lru_cache(maxsize=_TABLE_CACHE)
def _uncorrelated_table(w_fg, center, n_max):
    nodes, lw = _w_rule(w_fg, center, n_max)
    table = np.zeros((n_max + 1, n_max + 1))
    for start in range(0, nodes.size, _CHUNK):
        w = nodes[start:start + _CHUNK]
        weights = lw[start:start + _CHUNK]
        for n, fan in enumerate(iter_overlap_fan(n_max, w)):
            table[n:, n] += (fan * fan) @ weights
    table = np.tril(table) + np.tril(table, -1).T
    logger.debug("uncorrelated table n_max=%d w_fg=%.4g centre=%.4g on %d nodes", n_max, w_fg, center, nodes.size)
    table.setflags(write=False)
    return table


def correlated_integrals(cfg, n_max=None):
    '''
        symmetric table of integrals of the Lorentzian times l_n l_n' over w,
        cached per resonance and order and returned read-only
    '''
    n_max = cfg.n_corr if n_max is None else n_max
    return _correlated_table(cfg.w_fg, -cfg.w_shift, n_max)


def uncorrelated_integrals(cfg, n_max=None):
    '''symmetric table of integrals of the Lorentzian times o_{max,min}^2 over w'''
    n_max = cfg.n_unc if n_max is None else n_max
    return _uncorrelated_table(cfg.w_fg, -cfg.w_shift, n_max)


def pair_integral(cfg, n_t, n_t2, kind="corr"):
    '''
        one entry of the correlated or uncorrelated table by adaptive
        quadrature; failures carry the mode pair
    '''
    m, n = max(n_t, n_t2), min(n_t, n_t2)
    center = -cfg.w_shift
    if kind == "corr":
        def integrand(w):
            return lorentzian(w - center, cfg.w_fg) * overlap_hermite(n_t, n_t, w) * overlap_hermite(n_t2, n_t2, w)
    elif kind == "unc":
        def integrand(w):
            return lorentzian(w - center, cfg.w_fg) * overlap_hermite(m, n, w) ** 2
    else:
        raise DomainError(f"kind must be 'corr' or 'unc', got {kind!r}")
    points = sorted(set(lorentzian_points(center, cfg.w_fg)) | {0.0})
    try:
        return integrate_adaptive(integrand, cfg.quadrature.over(-np.inf, np.inf, points))
    except ConvergenceError as e:
        raise e.with_context(f"n_t={n_t}, n_t'={n_t2}") from e


# ------------------------------------------------------------------
# Excitation probabilities
# ------------------------------------------------------------------
def spatial_factor(cfg, rho=0.0):
    '''h~^4(rho) with h~ = (Q_p / sqrt(pi)) exp(-Q_p^2 rho^2 / 2)'''
    q_p = cfg.pdc.momentum_p
    rho2 = float(np.sum(np.asarray(rho, dtype=float) ** 2))
    return (q_p / math.sqrt(math.pi)) ** 4 * math.exp(-2.0 * q_p**2 * rho2)


def _temporal_coefficients(cfg, n_max):
    zeta = cfg.truncation.zeta_t
    return math.sqrt(1.0 - zeta**2) * zeta ** np.arange(n_max + 1)


def _correlated_weights(cfg, gain, n_max):
    r = _temporal_coefficients(cfg, n_max)
    return cfg.bracket_signs(n_max) * sinh_cosh(r * gain)


def _uncorrelated_weights(cfg, gain, n_max):
    return sinh_squared(_temporal_coefficients(cfg, n_max) * gain)


def _check_gain(gain):
    if not gain >= 0:
        raise DomainError(f"gain must be non-negative, got {gain}")


def p_corr_exact(cfg, gain, rho=0.0):
    '''correlated excitation probability with the full Lorentzian resonance'''
    _check_gain(gain)
    n_max = cfg.n_corr
    c = _correlated_weights(cfg, gain, n_max)
    value = c @ correlated_integrals(cfg, n_max) @ c
    return cfg.mol.coupling * spatial_factor(cfg, rho) * max(float(value), 0.0)


def p_unc_exact(cfg, gain, rho=0.0):
    '''uncorrelated excitation probability with the full Lorentzian resonance'''
    _check_gain(gain)
    n_max = cfg.n_unc
    s = _uncorrelated_weights(cfg, gain, n_max)
    value = s @ uncorrelated_integrals(cfg, n_max) @ s
    return 2.0 * cfg.mol.coupling * spatial_factor(cfg, rho) * max(float(value), 0.0)


def p_corr_narrow(cfg, gain, rho=0.0):
    '''
        correlated probability for a resonance much narrower than the pump,
        the Lorentzian replaced by a delta function at w = -w_shift
    '''
    _check_gain(gain)
    n_max = cfg.n_corr
    c = _correlated_weights(cfg, gain, n_max)
    w = -cfg.w_shift
    if w == 0.0:
        bracket = float(np.sum(c))
    else:
        rows = np.array([float(r) for r in iter_overlap_rows(n_max, 0, w)])
        bracket = float(c @ rows)
    return cfg.mol.coupling * spatial_factor(cfg, rho) * bracket**2


def p_unc_narrow(cfg, gain, rho=0.0):
    '''uncorrelated probability in the delta-function limit of the resonance'''
    _check_gain(gain)
    n_max = cfg.n_unc
    s = _uncorrelated_weights(cfg, gain, n_max)
    w = -cfg.w_shift
    if w == 0.0:
        value = float(np.sum(s * s))
    else:
        value = 0.0
        for n, fan in enumerate(iter_overlap_fan(n_max, [w])):
            o2 = fan[:, 0] ** 2
            # off-diagonal pairs appear twice in the symmetric double sum
            value += s[n] * s[n] * o2[0] + 2.0 * s[n] * float(s[n + 1:] @ o2[1:])
    return 2.0 * cfg.mol.coupling * spatial_factor(cfg, rho) * value


def evaluate_point(cfg, gain, rho=0.0, narrow=False):
    '''both contributions at one gain'''
    if narrow:
        p_corr, p_unc = p_corr_narrow(cfg, gain, rho), p_unc_narrow(cfg, gain, rho)
    else:
        p_corr, p_unc = p_corr_exact(cfg, gain, rho), p_unc_exact(cfg, gain, rho)
    return SignalPoint(
        p_corr=p_corr,
        p_unc=p_unc,
        mean_n=mean_photon_number(cfg.truncation, gain),
        detuning=molecule.detuning(cfg.mol, cfg.pdc),
        gain=gain,
    )


# ------------------------------------------------------------------
# Rates
# ------------------------------------------------------------------
def rate_components(cfg, sample, gain, narrow=False):
    '''
        correlated and uncorrelated ETPA rates m_0 dz f_rep / (2 pi)^2 times
        the transverse integral of P_f, using int h~^4 d^2rho = Q_p^2 / (2 pi)
    '''
    point = evaluate_point(cfg, gain, rho=0.0, narrow=narrow)
    peak = spatial_factor(cfg, 0.0)
    area = cfg.pdc.momentum_p**2 / (2 * math.pi)
    scale = sample.m_0 * sample.delta_z * cfg.pdc.f_rep / (2 * math.pi) ** 2 * area / peak
    return point.p_corr * scale, point.p_unc * scale


def rate_tpa(cfg, sample, gain, narrow=False):
    '''total ETPA rate'''
    corr, unc = rate_components(cfg, sample, gain, narrow)
    return corr + unc


def rate_corr_high_gain(cfg, sample, gain):
    '''
        high-gain asymptote N_mol sigma^(2) (gamma_fg / 2 Omega_p) phi^2 /
        (T_pulse f_rep) of the correlated rate
    '''
    pdc = cfg.pdc
    phi = mean_photon_number(cfg.truncation, gain) * pdc.f_rep / pdc.pump_area
    t_pulse = 2 * math.pi / pdc.bandwidth_p
    return (
        molecule.molecule_count(sample, pdc)
        * molecule.classical_tpa_cross_section(cfg.mol)
        * cfg.mol.gamma_fg / (2 * pdc.bandwidth_p)
        * phi**2 / (t_pulse * pdc.f_rep)
    )


# ------------------------------------------------------------------
# Scans
# ------------------------------------------------------------------
def _evaluate_scan_point(cfg, axis_names, narrow, gain, mean_n, point):
    values = dict(zip(axis_names, point))
    changes = {}
    if "detuning" in values:
        changes["omega_fg"] = cfg.pdc.omega_p + values["detuning"]
    for name in ("gamma_fg", "bandwidth_m"):
        if name in values:
            changes[name] = values[name]
    if changes:
        cfg = cfg.replace(**changes)
    mean_n = values.get("mean_n", mean_n)
    if mean_n is not None:
        gain = gain_for_photon_number(cfg.truncation, mean_n)
    if gain is None:
        raise DomainError("either a gain or a mean photon number is required")
    result = evaluate_point(cfg, gain, narrow=narrow).as_dict()
    result["schmidt_number_t"] = 0.5 * (cfg.pdc.bandwidth_m / cfg.pdc.bandwidth_p + cfg.pdc.bandwidth_p / cfg.pdc.bandwidth_m)
    return result


def _as_axis(name, grid, scale="linear"):
    if isinstance(grid, Axis):
        return Axis(name, grid.values, grid.scale)
    return Axis(name, tuple(grid), scale)


def _scan(cfg, axes, narrow, gain=None, mean_n=None, **kwargs):
    evaluate = functools.partial(_evaluate_scan_point, cfg, tuple(a.name for a in axes), narrow, gain, mean_n)
    return run_scan(evaluate, axes, **kwargs)


def resonance_scan(cfg, gain, detuning_grid, mean_n_grid=None, narrow=False, **kwargs):
    '''
        signal against the detuning omega_fg - omega_p; with mean_n_grid the
        scan runs over (mean_n, detuning) and gain is ignored
    '''
    axes = [_as_axis("detuning", detuning_grid)]
    if mean_n_grid is not None:
        axes.insert(0, _as_axis("mean_n", mean_n_grid))
        gain = None
    kwargs.setdefault("desc", "resonance")
    return _scan(cfg, axes, narrow, gain=gain, **kwargs)


def intensity_scan(cfg, n_grid, narrow=False, **kwargs):
    '''signal against the mean photon number per pulse'''
    kwargs.setdefault("desc", "intensity")
    return _scan(cfg, [_as_axis("mean_n", n_grid, "log")], narrow, **kwargs)


def _normalize_by_first(result, group, column, target):
    frame = result.frame
    if group is None:
        frame[target] = frame[column] / frame[column].iloc[0]
    else:
        first = frame.groupby(group, sort=False)[column].transform("first")
        frame[target] = frame[column] / first
    return result


def broadening_scan(cfg, n_fixed, gamma_grid, bandwidth_m_grid=None, narrow=False, **kwargs):
    '''
        signal against the broadening gamma_fg at a fixed mean photon number.
        total_normalized divides by the value at the first (smallest) gamma
        of each bandwidth
    '''
    gamma_axis = _as_axis("gamma_fg", gamma_grid, "log")
    if min(gamma_axis.values) <= 0:
        raise DomainError("broadening grid must be positive")
    if gamma_axis.values[0] != min(gamma_axis.values):
        raise DomainError("broadening grid must be increasing")
    axes = [gamma_axis]
    group = None
    if bandwidth_m_grid is not None:
        axes.insert(0, _as_axis("bandwidth_m", bandwidth_m_grid))
        group = "bandwidth_m"
    kwargs.setdefault("desc", "broadening")
    result = _scan(cfg, axes, narrow, mean_n=n_fixed, **kwargs)
    return _normalize_by_first(result, group, "total", "total_normalized")


def bandwidth_scan(cfg, n_fixed, omega_m_grid, mean_n_grid=None, narrow=True, **kwargs):
    '''
        r_rel and signals against the phase-matching bandwidth Omega_m at a
        fixed mean photon number; r_rel_per_bandwidth2 divides r_rel by
        (Omega_m / Omega_p)^2
    '''
    axes = [_as_axis("bandwidth_m", omega_m_grid, "log")]
    if mean_n_grid is not None:
        axes.insert(0, _as_axis("mean_n", mean_n_grid))
        n_fixed = None
    elif n_fixed is None:
        raise DomainError("bandwidth scan needs a mean photon number")
    kwargs.setdefault("desc", "bandwidth")
    result = _scan(cfg, axes, narrow, mean_n=n_fixed, **kwargs)
    frame = result.frame
    frame["r_rel_per_bandwidth2"] = frame["r_rel"] / (frame["bandwidth_m"] / cfg.pdc.bandwidth_p) ** 2
    return result
