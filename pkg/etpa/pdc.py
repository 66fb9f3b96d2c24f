"""
Bigaussian parametric down-conversion source.

Frequencies are offsets from the degenerate centre omega_p / 2 and are
measured in units of the pump bandwidth; transverse momenta in units of
the pump momentum width. The Schmidt coefficients factorize into a
temporal part sqrt(1 - zeta_t^2) zeta_t^n_t and a transverse part
(1 - zeta_q^2) zeta_q^(n_x + n_y), so every sum over (n_x, n_y) collapses
onto shells m = n_x + n_y of multiplicity m + 1.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import config
from .errors import DomainError
from .specfun import hermite_fn, iter_hermite

logger = logging.getLogger(__name__)

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class PdcParams:
    omega_p: float = 100.0
    bandwidth_p: float = 1.0
    bandwidth_m: float = 1.0
    momentum_p: float = 1.0
    momentum_m: float = 1.0
    gain: float = 0.0
    f_rep: float = 1.0

    def __post_init__(self):
        for name in ("omega_p", "bandwidth_p", "bandwidth_m", "momentum_p", "momentum_m", "f_rep"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive, got {value}")
        if not (np.isfinite(self.gain) and self.gain >= 0):
            raise DomainError(f"gain must be non-negative, got {self.gain}")

    @property
    def pump_area(self):
        '''transverse area A_p = (2 pi)^2 / Q_p^2 of the beam'''
        return (2 * np.pi) ** 2 / self.momentum_p**2

    @property
    def tau(self):
        '''argument scale 1/sqrt(Omega_m Omega_p) of the temporal modes'''
        return 1.0 / math.sqrt(self.bandwidth_m * self.bandwidth_p)

    @property
    def q_scale(self):
        '''argument scale 1/sqrt(Q_m Q_p) of the transverse modes'''
        return 1.0 / math.sqrt(self.momentum_m * self.momentum_p)


@dataclass(frozen=True)
class SchmidtSpectrum:
    zeta_t: float
    zeta_q: float
    n_t_max: int
    n_xy_max: int
    truncation_epsilon: float
    # Hermite bilinear expansion of the JSA alternates when Omega_m > Omega_p
    alternating_t: bool = False
    alternating_q: bool = False

    def temporal_coefficients(self):
        '''sqrt(1 - zeta_t^2) zeta_t^n for n = 0 ... n_t_max'''
        n = np.arange(self.n_t_max + 1)
        return math.sqrt(1.0 - self.zeta_t**2) * self.zeta_t**n

    def shell_coefficients(self):
        '''(1 - zeta_q^2) zeta_q^m for shells m = n_x + n_y = 0 ... n_xy_max'''
        m = np.arange(self.n_xy_max + 1)
        return (1.0 - self.zeta_q**2) * self.zeta_q**m

    def coefficient_grid(self):
        '''
            Schmidt coefficients r[n_t, m] on the retained (n_t, shell) grid
            together with the shell multiplicities m + 1
        '''
        r = np.outer(self.temporal_coefficients(), self.shell_coefficients())
        multiplicity = np.arange(self.n_xy_max + 1) + 1.0
        return r, np.broadcast_to(multiplicity, r.shape)


def _zeta(a, b):
    return abs(a - b) / (a + b)


def _geometric_cutoff(zeta, epsilon, tail):
    # first truncation order with the neglected tail and the first neglected
    # coefficient both below epsilon
    if zeta == 0.0:
        return 0
    n = 0
    while n < config.MODE_CAP:
        if tail(n) < epsilon and zeta ** (n + 1) < epsilon:
            return n
        n += 1
    logger.warning("Schmidt truncation hit the mode cap %d (zeta=%.6g)", config.MODE_CAP, zeta)
    return config.MODE_CAP


def schmidt_spectrum(params, epsilon=None):
    '''
        Schmidt parameters of the source with truncation orders chosen so the
        neglected part of sum r^2 stays below epsilon
    '''
    epsilon = config.DEFAULT_EPSILON if epsilon is None else epsilon
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"truncation epsilon must lie in (0, 1), got {epsilon}")
    zeta_t = _zeta(params.bandwidth_m, params.bandwidth_p)
    zeta_q = _zeta(params.momentum_m, params.momentum_p)
    q = zeta_q**2
    n_t_max = _geometric_cutoff(zeta_t, epsilon, lambda n: zeta_t ** (2 * (n + 1)))
    n_xy_max = _geometric_cutoff(zeta_q, epsilon, lambda m: q ** (m + 1) * ((m + 2) - (m + 1) * q))
    logger.debug("schmidt spectrum zeta_t=%.6g (n_t_max=%d) zeta_q=%.6g (n_xy_max=%d)",
                 zeta_t, n_t_max, zeta_q, n_xy_max)
    return SchmidtSpectrum(
        zeta_t=zeta_t,
        zeta_q=zeta_q,
        n_t_max=n_t_max,
        n_xy_max=n_xy_max,
        truncation_epsilon=epsilon,
        alternating_t=params.bandwidth_m > params.bandwidth_p,
        alternating_q=params.momentum_m > params.momentum_p,
    )


def schmidt_coefficient(spec, n_t, n_x, n_y):
    '''r_n = (1 - zeta_q^2) sqrt(1 - zeta_t^2) zeta_t^n_t zeta_q^(n_x + n_y)'''
    if min(n_t, n_x, n_y) < 0:
        raise DomainError("Schmidt indices must be non-negative")
    return (
        (1.0 - spec.zeta_q**2)
        * math.sqrt(1.0 - spec.zeta_t**2)
        * spec.zeta_t**n_t
        * spec.zeta_q ** (n_x + n_y)
    )


def schmidt_number(params):
    '''K = K_t K_x K_y'''
    ratio_t = params.bandwidth_m / params.bandwidth_p
    ratio_q = params.momentum_m / params.momentum_p
    k_t = 0.5 * (ratio_t + 1.0 / ratio_t)
    k_q = 0.5 * (ratio_q + 1.0 / ratio_q)
    return k_t * k_q * k_q


def sinh_squared(x):
    '''sinh(x)^2, switching to the exponential form past x = 300'''
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        out = np.where(x > 300.0, np.exp(2.0 * x - 2.0 * _LN2), np.sinh(np.minimum(x, 300.0)) ** 2)
    return out if out.ndim else float(out)


def sinh_cosh(x):
    '''sinh(x) cosh(x), switching to the exponential form past x = 300'''
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        out = np.where(x > 300.0, np.exp(2.0 * x - 2.0 * _LN2), 0.5 * np.sinh(2.0 * np.minimum(x, 300.0)))
    return out if out.ndim else float(out)


def mean_photon_number(spec, gain):
    '''<N> = 2 sum_n sinh^2(r_n gain) over the retained grid'''
    if gain < 0:
        raise DomainError(f"gain must be non-negative, got {gain}")
    if gain == 0:
        return 0.0
    r, multiplicity = spec.coefficient_grid()
    return float(2.0 * np.sum(multiplicity * sinh_squared(r * gain)))


def photon_flux_density(params, spec, gain):
    '''photon flux density <N> f_rep / A_p'''
    return mean_photon_number(spec, gain) * params.f_rep / params.pump_area


def gain_for_photon_number(spec, n_target):
    '''
        inverts mean_photon_number by bracketing (upper end doubled from 1)
        followed by Brent's method
    '''
    if n_target < 0:
        raise DomainError(f"photon number must be non-negative, got {n_target}")
    if n_target == 0:
        return 0.0
    hi = 1.0
    while mean_photon_number(spec, hi) < n_target:
        hi *= 2.0
    lo = 0.0 if hi == 1.0 else hi / 2.0
    gain = optimize.brentq(
        lambda g: mean_photon_number(spec, g) - n_target,
        lo,
        hi,
        xtol=1e-300,
        rtol=4 * np.finfo(float).eps,
        maxiter=500,
    )
    return float(gain)


def mode_cutoff(zeta, power=1, tol=1e-9, degeneracy=None, edge_tol=1e-12):
    '''
        number of retained modes so that the neglected tail of
        sum_n sinh(r_n G) cosh(r_n G) (power 1) or sum_n sinh^2(r_n G)
        (power 2) is below tol times the retained sum for every gain G.
        Uses sinh(z x) <= z sinh(x) on 0 <= z <= 1, so the bound is the
        geometric tail of zeta^(power n), weighted by the shell
        multiplicity m + 1 when degeneracy == "triangle".

        The same inequality gives sinh^2(r_edge G) / sinh^2(r_0 G) <=
        zeta^(2 (n + 1)) for the first dropped mode at any G, which is
        kept below edge_tol
    '''
    if zeta == 0.0:
        return 0
    q = zeta**power
    n = 0
    while n < config.MODE_CAP:
        if degeneracy == "triangle":
            tail = q ** (n + 1) * ((n + 2) - (n + 1) * q) / (1.0 - q) ** 2
        else:
            tail = q ** (n + 1) / (1.0 - q)
        if tail < tol and zeta ** (2 * (n + 1)) < edge_tol:
            return n
        n += 1
    logger.warning("mode cutoff hit the cap %d (zeta=%.6g, power=%d)", config.MODE_CAP, zeta, power)
    return config.MODE_CAP


# ------------------------------------------------------------------
# Scales and mode functions
# ------------------------------------------------------------------
def entanglement_time(params):
    '''T_e = 2 pi / Omega_m'''
    return 2 * np.pi / params.bandwidth_m


def entanglement_area(params):
    '''A_e = (2 pi)^2 / Q_m^2'''
    return (2 * np.pi) ** 2 / params.momentum_m**2


def pulse_duration(params):
    '''T_pulse = 2 pi / Omega_p'''
    return 2 * np.pi / params.bandwidth_p


def jsa_spectral(params, omega_s, omega_i):
    '''normalized spectral factor of the joint amplitude'''
    om_p, om_m = params.bandwidth_p, params.bandwidth_m
    total = np.asarray(omega_s) + np.asarray(omega_i)
    diff = np.asarray(omega_s) - np.asarray(omega_i)
    return (np.pi * om_m * om_p) ** -0.5 * np.exp(-(total**2) / (4 * om_p**2) - diff**2 / (4 * om_m**2))


def jsa_momentum(params, q_s, q_i):
    '''normalized transverse factor of the joint amplitude, q_s and q_i are 2-vectors'''
    q_p, q_m = params.momentum_p, params.momentum_m
    q_s = np.asarray(q_s, dtype=float)
    q_i = np.asarray(q_i, dtype=float)
    total = np.sum((q_s + q_i) ** 2, axis=-1)
    diff = np.sum((q_s - q_i) ** 2, axis=-1)
    return (np.pi * q_m * q_p) ** -1 * np.exp(-total / (4 * q_p**2) - diff / (4 * q_m**2))


def jsa_eval(params, omega_s, omega_i, q_s, q_i):
    '''bigaussian joint spatio-spectral amplitude'''
    return jsa_spectral(params, omega_s, omega_i) * jsa_momentum(params, q_s, q_i)


def temporal_mode(params, n, omega):
    '''normalized temporal Schmidt mode sqrt(tau) h_n(omega tau)'''
    tau = params.tau
    return math.sqrt(tau) * hermite_fn(n, np.asarray(omega) * tau)


def bigaussian(zeta, x, y, alternating=False):
    '''
        closed form of sqrt(1 - zeta^2) sum_n (+-zeta)^n h_n(x) h_n(y),
        the minus sign taken when alternating
    '''
    s = -zeta if alternating else zeta
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.exp(-((x + y) ** 2) * (1 - s) / (4 * (1 + s)) - (x - y) ** 2 * (1 + s) / (4 * (1 - s))) / np.sqrt(np.pi)


def mehler_partial_sum(zeta, x, y, n_max, alternating=False):
    '''partial sum of the Hermite bilinear expansion up to order n_max'''
    if not 0.0 <= zeta < 1.0:
        raise DomainError(f"zeta must lie in [0, 1), got {zeta}")
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    s = -zeta if alternating else zeta
    total = np.zeros(x.shape)
    weight = 1.0
    for hx, hy in zip(iter_hermite(n_max, x), iter_hermite(n_max, y)):
        total += weight * hx * hy
        weight *= s
    total *= math.sqrt(1.0 - zeta**2)
    return total if total.ndim else float(total)
