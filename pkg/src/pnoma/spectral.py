"""Matched-filter interference factor for square pulses sharing part of a band.

The resource block is the unit frequency interval. UE1 occupies
``[0, alpha + beta]`` and UE2 occupies ``[beta, 1]``; the two overlap on
``[beta, beta + alpha]``.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(128)
# slack for grids built by floating arithmetic, e.g. beta = 1 - alpha
_EDGE_TOL = 1e-12


class ConfigError(ValueError):
    """An input violates a documented invariant."""


def sinc(x):
    """Normalised sinc, ``sin(pi x) / (pi x)`` with the removable point at 0."""
    x = np.asarray(x, dtype=float)
    px = np.pi * x
    small = np.abs(x) < 1e-8
    safe = np.where(small, 1.0, px)
    out = np.where(small, 1.0 - px * px / 6.0, np.sin(safe) / safe)
    return out[()] if out.ndim == 0 else out


def _gauss_legendre(f, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    return half * np.dot(_GL_WEIGHTS, f(mid + half * _GL_NODES))


def pulse_energy(bw):
    """Normalising factor E with ``E**2 = int_{-bw/2}^{bw/2} sinc(2 f / bw)**2 df``."""
    if not bw > 0:
        raise ConfigError(f"bandwidth must be positive, got {bw!r}")
    e2 = _gauss_legendre(lambda f: sinc(2.0 * f / bw) ** 2, -0.5 * bw, 0.5 * bw)
    return float(np.sqrt(e2))


@lru_cache(maxsize=4096)
def _interference_factor(alpha, beta):
    bw1 = alpha + beta
    bw2 = 1.0 - beta
    # a user without bandwidth has no pulse to correlate against
    if alpha <= 0.0 or bw1 <= 0.0 or bw2 <= 0.0:
        return 0.0
    fa = 0.5 * (alpha + beta)
    fb = 0.5 * (1.0 + beta)
    norm = pulse_energy(bw1) * pulse_energy(bw2)

    def integrand(f):
        return sinc(2.0 * (f - fa) / bw1) * sinc(2.0 * (f - fb) / bw2)

    overlap = _gauss_legendre(integrand, beta, beta + alpha) / norm
    return float(min(max(overlap * overlap, 0.0), 1.0))


def validate_overlap(alpha, beta):
    """Clamp round-off at the edges and raise ``ConfigError`` on real violations."""
    alpha = float(alpha)
    beta = float(beta)
    if not (-_EDGE_TOL <= alpha <= 1.0 + _EDGE_TOL):
        raise ConfigError(f"alpha must lie in [0, 1], got {alpha}")
    alpha = min(max(alpha, 0.0), 1.0)
    beta_max = 1.0 - alpha
    if not (-_EDGE_TOL <= beta <= beta_max + _EDGE_TOL):
        raise ConfigError(f"beta must lie in [0, 1 - alpha] = [0, {beta_max:g}], got {beta}")
    beta = min(max(beta, 0.0), beta_max)
    return alpha, beta


def interference_factor(alpha, beta):
    """Squared normalised cross-correlation of the two matched filters over the overlap."""
    alpha, beta = validate_overlap(alpha, beta)
    return _interference_factor(alpha, beta)


@dataclass(frozen=True)
class OverlapConfig:
    """Spectral split of one resource block between the two users.

    ``i_factor`` is computed once at construction.
    """

    alpha: float
    beta: float = 0.0
    i_factor: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        alpha, beta = validate_overlap(self.alpha, self.beta)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "i_factor", _interference_factor(alpha, beta))

    @property
    def beta_max(self):
        return 1.0 - self.alpha

    @property
    def bw1(self):
        return self.alpha + self.beta

    @property
    def bw2(self):
        return 1.0 - self.beta

    @property
    def center1(self):
        return 0.5 * (self.alpha + self.beta)

    @property
    def center2(self):
        return 0.5 * (1.0 + self.beta)

    def bandwidth(self, user):
        if user == 1:
            return self.bw1
        if user == 2:
            return self.bw2
        raise ValueError(f"user index must be 1 or 2, got {user!r}")

    def mirrored(self):
        """The configuration with the same overlap and the exclusive bands swapped."""
        return OverlapConfig(self.alpha, self.beta_max - self.beta)
