"""
Special functions and quadrature used by every physics module
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate, special

from .errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

# rescale recurrences before they leave the double range
_RESCALE_AT = 1e100
_LOG_RESCALE = np.log(_RESCALE_AT)

# ------------------------------------------------------------------
# Hermite functions
# ------------------------------------------------------------------
def iter_hermite(n_max, x):
    '''
        yields h_0(x) ... h_n_max(x), the normalized Hermite functions
        (2^n n! sqrt(pi))^(-1/2) H_n(x) exp(-x^2/2)

        the recurrence runs on a mantissa with a per-element log scale so
        that exp(-x^2/2) underflowing at large |x| does not zero the higher
        orders, which live further out
    '''
    x = np.asarray(x, dtype=float)
    log_scale = -0.5 * x**2 - 0.25 * np.log(np.pi)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    for n in range(n_max + 1):
        with np.errstate(under="ignore", invalid="ignore"):
            yield cur * np.exp(log_scale)
        nxt = x * np.sqrt(2.0 / (n + 1)) * cur - np.sqrt(n / (n + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE_AT
        if np.any(big):
            cur = np.where(big, cur / _RESCALE_AT, cur)
            prev = np.where(big, prev / _RESCALE_AT, prev)
            log_scale = np.where(big, log_scale + _LOG_RESCALE, log_scale)


def hermite_fn(n, x):
    '''returns the normalized Hermite function h_n(x)'''
    if n < 0:
        raise DomainError(f"Hermite order must be non-negative, got {n}")
    value = None
    for value in iter_hermite(n, x):
        pass
    return value if np.ndim(value) else float(value)


def hermite_table(n_max, x):
    '''array of shape (n_max + 1, *x.shape) holding h_0 ... h_n_max at x'''
    return np.stack(list(iter_hermite(n_max, x)))


# ------------------------------------------------------------------
# Laguerre polynomials
# ------------------------------------------------------------------
def laguerre_assoc(n, alpha, x):
    '''
        generalized Laguerre polynomial L_n^(alpha)(x) from
        (k+1) L_{k+1} = (2k+1+alpha-x) L_k - (k+alpha) L_{k-1}
    '''
    if n < 0 or alpha < 0:
        raise DomainError(f"Laguerre indices must be non-negative, got n={n}, alpha={alpha}")
    x = np.asarray(x, dtype=float)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    for k in range(n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def laguerre_table(n_max, alpha, x):
    '''L_0^(alpha) ... L_n_max^(alpha) at x, stacked along the first axis'''
    x = np.asarray(x, dtype=float)
    rows = [np.ones_like(x)]
    prev = np.zeros_like(x)
    for k in range(n_max):
        nxt = ((2 * k + 1 + alpha - x) * rows[-1] - (k + alpha) * prev) / (k + 1)
        prev = rows[-1]
        rows.append(nxt)
    return np.stack(rows)


def _overlap_recurrence(n_max, alpha_f, w_b, shrink):
    x = w_b**2
    with np.errstate(divide="ignore", invalid="ignore"):
        log_w = np.where(alpha_f > 0, alpha_f * np.log(np.abs(w_b)), 0.0)
    log_scale = log_w - 0.5 * x - 0.5 * special.gammaln(alpha_f + 1.0)
    prev = np.zeros(log_scale.shape)
    cur = np.where((w_b < 0) & (np.mod(alpha_f, 2) == 1), -1.0, 1.0) * np.ones(log_scale.shape)
    for n in range(n_max + 1):
        with np.errstate(under="ignore", invalid="ignore"):
            yield cur * np.exp(log_scale)
        if shrink:
            keep = n_max - n
            alpha_f, cur, prev, log_scale = alpha_f[:keep], cur[:keep], prev[:keep], log_scale[:keep]
        nxt = ((2 * n + 1 + alpha_f - x) * cur - np.sqrt(n * (n + alpha_f)) * prev) / np.sqrt(
            (n + 1) * (n + 1 + alpha_f)
        )
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE_AT
        if np.any(big):
            cur = np.where(big, cur / _RESCALE_AT, cur)
            prev = np.where(big, prev / _RESCALE_AT, prev)
            log_scale = np.where(big, log_scale + _LOG_RESCALE, log_scale)


def iter_overlap_rows(n_max, alpha, w):
    '''
        yields, for n = 0 ... n_max,

            sqrt(n!/(n+alpha)!) w^alpha L_n^(alpha)(w^2) exp(-w^2/2)

        alpha may be an integer array; it broadcasts against w so a whole
        set of orders advances through one recurrence
            u_{n+1} = [(2n+1+alpha-w^2) u_n - sqrt(n(n+alpha)) u_{n-1}]
                      / sqrt((n+1)(n+1+alpha))
        with the same log-scale bookkeeping as iter_hermite.
    '''
    w = np.asarray(w, dtype=float)
    alpha = np.asarray(alpha)
    shape = np.broadcast_shapes(alpha.shape, w.shape)
    alpha_f = np.broadcast_to(alpha, shape).astype(float)
    yield from _overlap_recurrence(n_max, alpha_f, np.broadcast_to(w, shape), shrink=False)


def iter_overlap_fan(n_max, w):
    '''
        yields, for n = 0 ... n_max, an array of shape (n_max - n + 1, w.size)
        whose row a holds the overlap row of order (n + a, n) on the 1-D
        grid w, i.e. every pair m >= n with m <= n_max exactly once
    '''
    w = np.asarray(w, dtype=float).reshape(1, -1)
    alpha_f = np.arange(n_max + 1, dtype=float)[:, None]
    yield from _overlap_recurrence(n_max, alpha_f, w, shrink=True)


# ------------------------------------------------------------------
# Error function family and lineshapes
# ------------------------------------------------------------------
def erfcx(x):
    '''scaled complementary error function exp(x^2) erfc(x)'''
    value = special.erfcx(x)
    return value if np.ndim(value) else float(value)


def faddeeva_re(x, y):
    '''
        real part of the Faddeeva function w(x + iy) on the closed upper
        half plane; a Voigt profile up to normalization
    '''
    if np.any(np.asarray(y) < 0):
        raise DomainError("faddeeva_re is only defined for y >= 0")
    value = np.real(special.wofz(np.asarray(x) + 1j * np.asarray(y)))
    return value if np.ndim(value) else float(value)


def lorentzian(delta, gamma):
    '''normalized Lorentzian (1/pi) gamma / (gamma^2 + delta^2)'''
    if not gamma > 0:
        raise DomainError(f"Lorentzian width must be positive, got {gamma}")
    value = gamma / np.pi / (np.asarray(delta) ** 2 + gamma**2)
    return value if np.ndim(value) else float(value)


def lorentzian_points(center, gamma):
    '''breakpoints resolving a Lorentzian peak inside a wider integrand'''
    return (center - 50.0 * gamma, center, center + 50.0 * gamma)


# ------------------------------------------------------------------
# Quadrature
# ------------------------------------------------------------------
@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 500
    domain: tuple = (-np.inf, np.inf)
    points: tuple = ()

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if int(self.max_subdivisions) < 1:
            raise DomainError("max_subdivisions must be at least 1")
        lo, hi = self.domain
        if not lo < hi:
            raise DomainError(f"empty quadrature domain {self.domain}")

    def over(self, lo, hi, points=()):
        '''same tolerances on another interval'''
        return QuadratureSpec(self.abs_tol, self.rel_tol, self.max_subdivisions, (lo, hi), tuple(points))


def _to_unit(y):
    # inverse of y = t / (1 - t^2)
    if np.isinf(y):
        return float(np.sign(y))
    return 2.0 * y / (1.0 + np.sqrt(1.0 + 4.0 * y * y))


def integrate_adaptive(f, spec=None):
    '''
        adaptive Gauss-Kronrod integration of a scalar function over
        spec.domain. Infinite ends go through x = offset + t/(1 - t^2);
        spec.points are kept as breakpoints in either case.

        raises ConvergenceError when the subdivision budget runs out or the
        reported error stays above the requested tolerance
    '''
    spec = spec or QuadratureSpec()
    lo, hi = (float(v) for v in spec.domain)
    points = sorted(p for p in spec.points if lo < p < hi)

    if np.isfinite(lo) and np.isfinite(hi):
        func, a, b, brk = f, lo, hi, points
    else:
        if points:
            offset = points[len(points) // 2]
        elif np.isfinite(lo) or np.isfinite(hi):
            offset = lo if np.isfinite(lo) else hi
        else:
            offset = 0.0

        def func(t):
            d = 1.0 - t * t
            if d <= 0.0:
                return 0.0
            value = f(offset + t / d) * (1.0 + t * t) / (d * d)
            return value if np.isfinite(value) else 0.0

        a, b = _to_unit(lo - offset), _to_unit(hi - offset)
        brk = [_to_unit(p - offset) for p in points]

    out = integrate.quad(
        func,
        a,
        b,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=int(spec.max_subdivisions),
        points=brk or None,
        full_output=1,
    )
    value, error = out[0], out[1]
    if len(out) > 3:
        info, message = out[2], out[3]
        budget = max(spec.abs_tol, spec.rel_tol * abs(value))
        if info.get("last", 0) >= spec.max_subdivisions or error > 10.0 * budget:
            raise ConvergenceError(message.strip().splitlines()[0], value, error)
        logger.debug("quadrature accepted with warning: %s", message.strip().splitlines()[0])
    return float(value)


def gauss_legendre_panels(edges, order=16):
    '''composite Gauss-Legendre rule over the panels between sorted edges'''
    edges = np.unique(np.asarray(edges, dtype=float))
    if edges.size < 2:
        raise DomainError("need at least two panel edges")
    t, wt = leggauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * wt[None, :]).ravel()
    return nodes, weights
