"""Stochastic-geometry coverage and throughput of the typical cell.

BSs form a PPP of intensity ``lam``; a BS is added at the origin. Both UEs
are dropped uniformly in the disk of radius ``rho / 2`` around it, ``rho``
being the distance to the nearest neighbouring BS, and are ordered by link
distance.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from . import _kernels
from .fsic import Branch, intercell_scale, thresholds
from .spectral import ConfigError

#: Rates are ``log(1 + theta)`` in this base; ``math.e`` gives nats.
LOG_BASE = math.e

#: Quadrature results with a larger error estimate are rejected.
QUAD_ERROR_LIMIT = 1e-6

_PDF_EDGE_TOL = 1e-12


class QuadratureError(RuntimeError):
    """A coverage integral could not be evaluated to the required accuracy."""


@dataclass(frozen=True)
class NetworkParams:
    lam: float = 10.0
    eta: float = 4.0
    sigma2: float = 1e-9

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigError(f"BS intensity must be positive, got {self.lam}")
        if not self.eta > 2:
            raise ConfigError(f"path-loss exponent must exceed 2, got {self.eta}")
        if not self.sigma2 >= 0:
            raise ConfigError(f"noise power must be non-negative, got {self.sigma2}")

    @property
    def delta(self):
        return 2.0 / self.eta


@dataclass(frozen=True)
class CoverageResult:
    p_cov1: float
    p_cov2: float
    branch: Branch
    quadrature_error: float


def rate(theta):
    """Transmission rate ``log(1 + theta)`` in ``LOG_BASE`` units."""
    return np.log1p(theta) / math.log(LOG_BASE)


def nearest_neighbor_pdf(x, p):
    x = np.asarray(x, dtype=float)
    out = np.where(x >= 0, 2.0 * math.pi * p.lam * x * np.exp(-math.pi * p.lam * x * x), 0.0)
    return out[()] if out.ndim == 0 else out


def ordered_link_pdf(r, rho, i):
    """Density of the i-th closest of two UEs uniform in the disk of radius ``rho / 2``."""
    if i not in (1, 2):
        raise ValueError(f"user index must be 1 or 2, got {i!r}")
    r = np.asarray(r, dtype=float)
    if np.any(r < -_PDF_EDGE_TOL) or np.any(r > 0.5 * rho + _PDF_EDGE_TOL):
        raise ValueError("link distance must lie in [0, rho / 2]")
    t2 = 4.0 * r * r / (rho * rho)
    out = 16.0 * r / (rho * rho) * t2 ** (i - 1) * (1.0 - t2) ** (2 - i)
    return out[()] if out.ndim == 0 else out


def hyp2f1_neg(b, z):
    """``2F1(1, b; b + 1; -z)`` for ``z >= 0``."""
    return _kernels.hyp2f1_neg(b, z)


def laplace_intercell(s, u, rho, p):
    """Approximate Laplace transform of the unit-power intercell interference.

    ``u`` is the guard distance ``rho - R`` from the UE to the nearest
    possible interferer outside the serving disk.
    """
    s, u, rho = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (s, u, rho)))
    if np.any(u <= 0):
        raise ValueError("guard distance u must be positive")
    if np.any(s < 0):
        raise ValueError("LT argument must be non-negative")
    eta = p.eta
    f = hyp2f1_neg(1.0 - p.delta, s / u ** eta)
    expo = -2.0 * math.pi * p.lam * s / ((eta - 2.0) * u ** (eta - 2.0)) * f
    out = np.exp(expo) / (1.0 + s * rho ** -eta)
    return out[()] if out.ndim == 0 else out


def laplace_intercell_eta4(s, u, rho, lam):
    """Closed form of ``laplace_intercell`` for ``eta = 4``."""
    s, u, rho = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (s, u, rho)))
    rs = np.sqrt(s)
    out = np.exp(-math.pi * lam * rs * np.arctan(rs / u ** 2)) / (1.0 + s * rho ** -4)
    return out[()] if out.ndim == 0 else out


def outer_cutoff(p, tail=1e-10):
    """Distance beyond which the nearest-neighbour pdf holds less than ``tail`` mass."""
    return math.sqrt(math.log(1.0 / tail) / (math.pi * p.lam))


def coverage_adaptive(user, mbar, c, p, epsabs_inner=1e-8, epsabs_outer=1e-7):
    """Nested adaptive quadrature of the coverage integral in ``(rho, R)``.

    Independent of the production kernel (different coordinates, rule and
    hypergeometric routine); used as a fallback and as a reference.
    Returns ``(value, error_estimate)``.
    """
    if math.isinf(mbar):
        return 0.0, 0.0
    if mbar == 0:
        return 1.0, 0.0
    eta, lam, sigma2 = p.eta, p.lam, p.sigma2
    b = 1.0 - p.delta
    scale = mbar * c
    # radius where the interference term starts to bite, relative to rho
    knee = min(0.5, 2.0 * max(mbar * c, 1.0) ** (-1.0 / eta))

    def lt(s, u, rho):
        f = special.hyp2f1(1.0, b, 1.0 + b, -s / u ** eta)
        return math.exp(-2.0 * math.pi * lam * s / ((eta - 2.0) * u ** (eta - 2.0)) * f) / (1.0 + s * rho ** -eta)

    inner_err = [0.0]

    def inner(x):
        def g(r):
            rp = r ** eta
            return (math.exp(-rp * sigma2 * mbar) * lt(rp * scale, x - r, x)
                    * float(ordered_link_pdf(r, x, user)))
        pts = [knee * x * 0.5 * k for k in (0.25, 1.0)] if knee < 0.5 else None
        val, err = integrate.quad(g, 0.0, 0.5 * x, epsabs=epsabs_inner, epsrel=0.0, limit=200, points=pts)
        inner_err[0] = max(inner_err[0], err)
        return val * float(nearest_neighbor_pdf(x, p))

    val, err = integrate.quad(inner, 0.0, outer_cutoff(p), epsabs=epsabs_outer, epsrel=0.0, limit=200)
    return min(max(val, 0.0), 1.0), err + inner_err[0]


def coverage_from_thresholds(user, mbar, c, p):
    """Coverage for arrays of thresholds ``mbar`` and intercell scales ``c``.

    ``mbar = inf`` is guaranteed outage (0) and ``mbar = 0`` is certain
    coverage (1). Returns ``(value, error_estimate)`` arrays.
    """
    mbar, c = np.broadcast_arrays(np.asarray(mbar, dtype=float), np.asarray(c, dtype=float))
    val = np.zeros(mbar.shape)
    err = np.zeros(mbar.shape)
    val[mbar == 0] = 1.0
    live = np.isfinite(mbar) & (mbar > 0)
    if live.any():
        v, e = _kernels.coverage_kernel(user, mbar[live], c[live], p.lam, p.eta, p.sigma2)
        bad = e > QUAD_ERROR_LIMIT
        if bad.any():
            mb, cb = mbar[live][bad], c[live][bad]
            for k in range(mb.size):
                vk, ek = coverage_adaptive(user, float(mb[k]), float(cb[k]), p)
                if ek > QUAD_ERROR_LIMIT:
                    raise QuadratureError(
                        f"coverage integral for UE{user} (mbar={mb[k]:g}, c={cb[k]:g}) has error {ek:.2e}")
                idx = np.flatnonzero(bad)[k]
                v[idx], e[idx] = vk, ek
        val[live] = np.clip(v, 0.0, 1.0)
        err[live] = e
    return val, err


def _user_thresholds(cfg, a):
    th = thresholds(a, cfg.i_factor)
    c1 = intercell_scale(a.p1, cfg.i_factor)
    c2 = intercell_scale(a.p2, cfg.i_factor)
    return th, c1, c2


def coverage_result(cfg, a, p):
    th, c1, c2 = _user_thresholds(cfg, a)
    v1, e1 = coverage_from_thresholds(1, th.mbar1, c1, p)
    v2, e2 = coverage_from_thresholds(2, th.mbar2, c2, p)
    return CoverageResult(float(v1), float(v2), th.branch, float(max(e1, e2)))


def coverage(i, cfg, a, p):
    """Coverage probability of UE ``i``; exactly 0 when its effective power is not positive."""
    th, c1, c2 = _user_thresholds(cfg, a)
    if i == 1:
        return float(coverage_from_thresholds(1, th.mbar1, c1, p)[0])
    if i == 2:
        return float(coverage_from_thresholds(2, th.mbar2, c2, p)[0])
    raise ValueError(f"user index must be 1 or 2, got {i!r}")


def throughput_from_coverage(bw, pcov, theta):
    """``bw * pcov * log(1 + theta)``; zero bandwidth or zero rate give 0."""
    return np.asarray(bw) * np.asarray(pcov) * rate(np.asarray(theta, dtype=float))


def throughput(i, cfg, a, p):
    bw = cfg.bandwidth(i)
    if bw <= 0:
        return 0.0
    theta = a.theta1 if i == 1 else a.theta2
    if theta == 0:
        return 0.0
    return float(throughput_from_coverage(bw, coverage(i, cfg, a, p), theta))


def cell_sum_rate(cfg, a, p):
    return throughput(1, cfg, a, p) + throughput(2, cfg, a, p)
