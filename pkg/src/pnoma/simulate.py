"""Monte Carlo oracle for the typical-cell coverage.

Each trial draws a fresh PPP of interferers in a disk of radius ``r_sim``,
adds the serving BS at the origin, drops two UEs uniformly in the disk of
radius ``rho / 2`` and draws Rayleigh fading on every link. The decoding
events are evaluated from the raw SINRs, without the threshold rewriting used
by the analysis.

Trials are grouped in fixed-size blocks; block ``k`` always draws from the
stream ``SeedSequence(seed, spawn_key=(k,))``. Results therefore depend only
on the seed and the number of trials, never on the number of worker threads.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._accel import n_threads
from .fsic import thresholds_array
from .spectral import ConfigError

BLOCK_SIZE = 8192
MIN_TRIALS = 10_000
_Z95 = 1.959963984540054


def default_sim_radius(lam):
    """Simulation window radius: ``max(5 / sqrt(lam), 4 E[rho])``."""
    mean_rho = 0.5 / math.sqrt(lam)
    return max(5.0 / math.sqrt(lam), 4.0 * mean_rho)


def truncation_bias(lam, eta, r_sim):
    """Mean fraction of a UE's intercell interference lost beyond ``r_sim``.

    For a UE at the origin with no interferer closer than ``rho`` the lost
    fraction is ``(rho / r_sim)**(eta - 2)``; averaging over ``rho`` gives
    ``Gamma(eta / 2) / (pi lam r_sim**2)**(eta / 2 - 1)``.
    """
    return math.gamma(0.5 * eta) / (math.pi * lam * r_sim ** 2) ** (0.5 * eta - 1.0)


@dataclass
class NetworkRealization:
    """A batch of independent typical-cell realizations.

    Interferer ``j`` of trial ``k`` sits at ``(px[j], py[j])`` with
    ``offsets[k] <= j < offsets[k + 1]``; ``g1``/``g2`` are its fading gains
    towards UE1/UE2. ``i1``/``i2`` are the unit-power interference sums.
    """

    rho: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    offsets: np.ndarray
    px: np.ndarray
    py: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    i1: np.ndarray
    i2: np.ndarray

    def __len__(self):
        return self.rho.size

    def interferer_distances(self, k):
        """Distances of trial ``k``'s interferers to the origin, UE1 and UE2."""
        sl = slice(self.offsets[k], self.offsets[k + 1])
        x, y = self.px[sl], self.py[sl]
        d0 = np.hypot(x, y)
        d1 = np.hypot(x - self.u1[0, k], y - self.u1[1, k])
        d2 = np.hypot(x - self.u2[0, k], y - self.u2[1, k])
        return d0, d1, d2


@dataclass
class TrialOutcome:
    """Per-trial decoding events; ``branch_used`` is a bit mask (1 = SIC, 2 = direct)."""

    c1: np.ndarray
    c2: np.ndarray
    branch_used: np.ndarray


@dataclass(frozen=True)
class MCResult:
    p_cov1: float
    p_cov2: float
    half_width1: float
    half_width2: float
    n_trials: int
    seed: int


def block_rng(seed, block):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _uniform_disk(rng, radius, n):
    r = radius * np.sqrt(rng.random(n))
    phi = 2.0 * math.pi * rng.random(n)
    return r * np.cos(phi), r * np.sin(phi)


def sample_realization(rng, p, n=1, r_sim=None):
    """Draw ``n`` independent realizations of the typical cell."""
    if r_sim is None:
        r_sim = default_sim_radius(p.lam)
    mean_count = p.lam * math.pi * r_sim ** 2
    counts = rng.poisson(mean_count, n)
    empty = counts == 0
    while empty.any():
        counts[empty] = rng.poisson(mean_count, int(empty.sum()))
        empty = counts == 0
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    total = int(offsets[-1])
    px, py = _uniform_disk(rng, r_sim, total)
    rho = np.sqrt(np.minimum.reduceat(px * px + py * py, offsets[:-1]))

    ax, ay = _uniform_disk(rng, 0.5 * rho, n)
    bx, by = _uniform_disk(rng, 0.5 * rho, n)
    ra, rb = np.hypot(ax, ay), np.hypot(bx, by)
    swap = rb < ra
    u1 = np.vstack([np.where(swap, bx, ax), np.where(swap, by, ay)])
    u2 = np.vstack([np.where(swap, ax, bx), np.where(swap, ay, by)])
    r1 = np.minimum(ra, rb)
    r2 = np.maximum(ra, rb)

    h1 = rng.standard_exponential(n)
    h2 = rng.standard_exponential(n)
    g1 = rng.standard_exponential(total)
    g2 = rng.standard_exponential(total)
    i1, i2 = _kernels.interference_sums(px, py, offsets, u1, u2, g1, g2, p.eta)
    return NetworkRealization(rho, u1, u2, r1, r2, h1, h2, offsets, px, py, g1, g2, i1, i2)


def _scales(p1, i_factor):
    p2 = 1.0 - p1
    return p1 + p2 * i_factor, p2 + p1 * i_factor


def raw_events(nr, i_factor, p1, theta1, theta2, p):
    """Decoding events from the four SINRs; allocation arguments broadcast over trials."""
    p1 = np.asarray(p1, dtype=float)
    p2 = 1.0 - p1
    s1 = nr.h1 * nr.r1 ** -p.eta
    s2 = nr.h2 * nr.r2 ** -p.eta
    c1s, c2s = _scales(p1, i_factor)
    n1 = c1s * nr.i1 + p.sigma2
    n2 = c2s * nr.i2 + p.sigma2
    sinr22 = s2 * p2 / (s2 * p1 * i_factor + n2)
    sinr21 = s1 * p2 * i_factor / (s1 * p1 + n1)
    sinr11 = s1 * p1 / n1
    sinr11_direct = s1 * p1 / (s1 * p2 * i_factor + n1)
    sic = (sinr21 > theta2) & (sinr11 > theta1)
    direct = sinr11_direct > theta1
    return TrialOutcome(sic | direct, sinr22 > theta2, sic.astype(np.int8) + 2 * direct.astype(np.int8))


def threshold_events(nr, i_factor, p1, theta1, theta2, p):
    """The same events through the fading thresholds ``h > R**eta (I + noise) * mbar``."""
    th = thresholds_array(p1, theta1, theta2, i_factor)
    c1s, c2s = _scales(np.asarray(p1, dtype=float), i_factor)
    with np.errstate(invalid="ignore"):
        x1 = nr.r1 ** p.eta * (c1s * nr.i1 + p.sigma2)
        x2 = nr.r2 ** p.eta * (c2s * nr.i2 + p.sigma2)
        c1 = nr.h1 > x1 * th.mbar1
        c2 = nr.h2 > x2 * th.mbar2
    return c1, c2


def evaluate_trial(nr, cfg, a, p):
    return raw_events(nr, cfg.i_factor, a.p1, a.theta1, a.theta2, p)


def _block_counts(seed, block, n, p, r_sim, points):
    nr = sample_realization(block_rng(seed, block), p, n, r_sim)
    out = np.empty((len(points), 2), dtype=np.int64)
    for k, (i_factor, a) in enumerate(points):
        ev = raw_events(nr, i_factor, a.p1, a.theta1, a.theta2, p)
        out[k, 0] = np.count_nonzero(ev.c1)
        out[k, 1] = np.count_nonzero(ev.c2)
    return out


def simulate_coverage_grid(points, p, n_trials, seed, r_sim=None, threads=None):
    """Empirical coverage at several ``(cfg, allocation)`` points on common random numbers.

    Returns one ``MCResult`` per point.
    """
    if n_trials < MIN_TRIALS:
        raise ConfigError(f"n_trials must be at least {MIN_TRIALS}, got {n_trials}")
    pts = [(cfg.i_factor, a) for cfg, a in points]
    sizes = [BLOCK_SIZE] * (n_trials // BLOCK_SIZE)
    if n_trials % BLOCK_SIZE:
        sizes.append(n_trials % BLOCK_SIZE)
    workers = threads or n_threads()

    def job(k):
        return _block_counts(seed, k, sizes[k], p, r_sim, pts)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    else:
        parts = [job(k) for k in range(len(sizes))]
    counts = np.sum(parts, axis=0)

    results = []
    for k1, k2 in counts:
        q1, q2 = k1 / n_trials, k2 / n_trials
        results.append(MCResult(
            float(q1), float(q2),
            float(_Z95 * math.sqrt(q1 * (1 - q1) / n_trials)),
            float(_Z95 * math.sqrt(q2 * (1 - q2) / n_trials)),
            int(n_trials), int(seed)))
    return results


def simulate_coverage(cfg, a, p, n_trials, seed, r_sim=None, threads=None):
    """Empirical coverage of both UEs with 95% Wald half-widths."""
    return simulate_coverage_grid([(cfg, a)], p, n_trials, seed, r_sim, threads)[0]
