"""
Separate-pair limit: ETPA cross section, efficiency function and the
spectral and spatial overlap factors of a single photon pair
"""

import dataclasses
import functools
import logging
import math

import numpy as np

from . import molecule, pdc
from .errors import DomainError
from .molecule import SampleParams
from .scan import Axis, run_scan
from .specfun import erfcx, integrate_adaptive, lorentzian, lorentzian_points, QuadratureSpec

logger = logging.getLogger(__name__)

_SQRT2 = math.sqrt(2.0)


@dataclasses.dataclass(frozen=True)
class PairLimitResult:
    sigma_e: float
    p_freq: float
    r_spat: float
    efficiency: float
    A_e: float
    T_e: float


def efficiency(x):
    '''eff(x) = x erfcx(x / sqrt 2), rising from eff(x) ~ x to sqrt(2/pi)'''
    if np.any(np.asarray(x) < 0):
        raise DomainError("efficiency is defined for x >= 0")
    value = np.asarray(x) * erfcx(np.asarray(x) / _SQRT2)
    return value if np.ndim(value) else float(value)


def is_resonant(params, mol, rtol=1e-12):
    return abs(molecule.detuning(mol, params)) <= rtol * max(params.omega_p, mol.omega_fg)


def _require_resonant(params, mol, what):
    if not is_resonant(params, mol):
        raise DomainError(
            f"{what} needs resonant excitation (omega_fg = omega_p); "
            f"detuning is {molecule.detuning(mol, params)!r}, use p_freq_numeric"
        )


def p_freq_closed(params, mol):
    '''(Omega_m / Omega_p) erfcx(gamma_fg / (sqrt 2 Omega_p)) on resonance'''
    _require_resonant(params, mol, "p_freq_closed")
    return params.bandwidth_m / params.bandwidth_p * erfcx(mol.gamma_fg / (_SQRT2 * params.bandwidth_p))


def pair_sum_amplitude(params, s, quadrature=None):
    '''
        integral of the joint spectral amplitude along the line omega_s +
        omega_i = s, done numerically
    '''
    quadrature = quadrature or QuadratureSpec()
    spec = quadrature.over(-np.inf, np.inf, (0.5 * s,))
    return integrate_adaptive(lambda w: float(pdc.jsa_spectral(params, w, s - w)), spec)


def p_freq_numeric(params, mol, detuning=None, quadrature=None):
    '''
        frequency factor of the pair-limit rate from its defining integral:
        the Lorentzian resonance convolved with the squared amplitude of
        finding both photons at total frequency s
    '''
    quadrature = quadrature or QuadratureSpec()
    if detuning is None:
        detuning = molecule.detuning(mol, params)
    gamma = mol.gamma_fg

    def integrand(s):
        amplitude = pair_sum_amplitude(params, s, quadrature)
        return lorentzian(detuning - s, gamma) * amplitude * amplitude

    points = sorted(set(lorentzian_points(detuning, gamma)) | {0.0})
    return integrate_adaptive(integrand, quadrature.over(-np.inf, np.inf, points))


def r_spat(sample, params):
    '''spatial factor delta_z Q_m^2 / (2 pi)'''
    return sample.delta_z * params.momentum_m**2 / (2 * np.pi)


def coincidence_amplitude(params, x, y):
    '''two-photon amplitude for both photons at the transverse point (x, y)'''
    q_p, q_m = params.momentum_p, params.momentum_m
    rho2 = np.asarray(x) ** 2 + np.asarray(y) ** 2
    return q_p * q_m / np.pi * np.exp(-(q_p**2) * rho2)


def sigma_e(params, mol):
    '''sigma_e = sigma^(2) eff(gamma_fg / Omega_p) / (A_e T_e)'''
    _require_resonant(params, mol, "sigma_e")
    return (
        molecule.classical_tpa_cross_section(mol)
        * efficiency(mol.gamma_fg / params.bandwidth_p)
        / (pdc.entanglement_area(params) * pdc.entanglement_time(params))
    )


def sigma_e_limit(params, mol):
    '''gamma_fg -> 0 plateau of sigma_e'''
    return mol.coupling / (2 * params.bandwidth_p * pdc.entanglement_area(params) * pdc.entanglement_time(params))


def _sigma_e_point(params, mol, point):
    gamma = point[0]
    m = dataclasses.replace(mol, gamma_fg=gamma)
    value = sigma_e(params, m)
    return {
        "sigma_e": value,
        "sigma_e_normalized": value / sigma_e_limit(params, m),
        "sigma_2": molecule.classical_tpa_cross_section(m),
        "efficiency": efficiency(gamma / params.bandwidth_p),
    }


def sigma_e_vs_gamma(params, mol, gamma_grid, **kwargs):
    '''
        sigma_e tabulated over the broadening values of gamma_grid; keyword
        arguments go to run_scan
    '''
    axis = gamma_grid if isinstance(gamma_grid, Axis) else Axis("gamma_fg", tuple(gamma_grid))
    axis = Axis("gamma_fg", axis.values, axis.scale)
    if min(axis.values) <= 0:
        raise DomainError("broadening grid must be positive")
    kwargs.setdefault("desc", "sigma_e")
    kwargs.setdefault("progress", False)
    return run_scan(functools.partial(_sigma_e_point, params, mol), [axis], **kwargs)


def pair_limit(params, mol, sample=None):
    '''resonant pair-limit summary; off resonance use p_freq_numeric directly'''
    _require_resonant(params, mol, "pair_limit")
    sample = sample or SampleParams()
    return PairLimitResult(
        sigma_e=sigma_e(params, mol),
        p_freq=p_freq_closed(params, mol),
        r_spat=r_spat(sample, params),
        efficiency=efficiency(mol.gamma_fg / params.bandwidth_p),
        A_e=pdc.entanglement_area(params),
        T_e=pdc.entanglement_time(params),
    )


def rate_low_gain(params, mol, sample, gain=None):
    '''pair-limit ETPA rate m_0 f_rep G^2 coupling r_spat p_freq / (2 pi)^2'''
    gain = params.gain if gain is None else gain
    if is_resonant(params, mol):
        p_freq = p_freq_closed(params, mol)
    else:
        p_freq = p_freq_numeric(params, mol)
    return sample.m_0 * params.f_rep * gain**2 * mol.coupling * r_spat(sample, params) * p_freq / (2 * np.pi) ** 2


def rate_from_cross_section(params, mol, sample, gain=None):
    '''the same rate written as N_mol sigma_e phi with phi = 2 G^2 f_rep / A_p'''
    gain = params.gain if gain is None else gain
    phi = 2.0 * gain**2 * params.f_rep / params.pump_area
    return molecule.molecule_count(sample, params) * sigma_e(params, mol) * phi
