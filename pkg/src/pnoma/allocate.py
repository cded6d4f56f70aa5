"""Resource allocation for the two-user partial-NOMA cell.

Decision variables are UE1's exclusive fraction ``beta``, the power split
``p1 = 1 - p2`` and the two SINR thresholds. All searches run on the same
``SearchGrids``; throughputs come from the analytic coverage.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .analytic import coverage_from_thresholds, rate
from .fsic import Branch, db_to_linear, intercell_scale, thresholds_array
from .spectral import OverlapConfig


class Infeasibility(Enum):
    NONE = "none"
    TMT_UNREACHABLE_UE2 = "TMT_unreachable_UE2"
    TMT_UNREACHABLE_UE1 = "TMT_unreachable_UE1"


def _grid_count(span, step):
    return int(math.floor(span / step + 1e-9)) + 1


@dataclass(frozen=True)
class SearchGrids:
    """Inclusive search grids; ``beta`` uses ``beta_max / beta_divisions`` steps."""

    theta_db_lo: float = -20.0
    theta_db_hi: float = 21.0
    theta_db_step: float = 0.5
    p_step: float = 0.01
    beta_divisions: int = 10

    @classmethod
    def reduced(cls):
        """Coarse grids used for quick oracle comparisons."""
        return cls(theta_db_step=2.0, p_step=0.05, beta_divisions=5)

    @property
    def n_theta(self):
        return _grid_count(self.theta_db_hi - self.theta_db_lo, self.theta_db_step)

    @property
    def n_p(self):
        return _grid_count(1.0, self.p_step)

    def n_beta(self, alpha):
        return 1 if alpha >= 1.0 else self.beta_divisions + 1

    def theta_db(self):
        return self.theta_db_lo + self.theta_db_step * np.arange(self.n_theta)

    def theta(self):
        return db_to_linear(self.theta_db())

    def p2_values(self):
        return np.minimum(self.p_step * np.arange(self.n_p), 1.0)

    def beta_values(self, alpha):
        """Ascending beta grid from 0 to ``1 - alpha``."""
        if alpha >= 1.0:
            return np.zeros(1)
        beta_max = 1.0 - alpha
        return beta_max * np.arange(self.beta_divisions + 1) / self.beta_divisions

    def exhaustive_evaluations(self, alpha):
        """Number of throughput evaluations made by a full grid search."""
        return 2 * self.n_beta(alpha) * self.n_p * self.n_theta ** 2


@dataclass(frozen=True)
class AllocationOutcome:
    feasible: bool
    alpha: float
    beta: float
    p1: float
    theta1: float
    theta2: float
    r1: float
    r2: float
    r_tot: float
    branch: Branch
    eval_count: int
    infeasibility_reason: Infeasibility
    beta_iterations: int = 0
    # grid coordinates of the chosen point: (beta, p2, theta1, theta2) indices
    indices: tuple = field(default=None, compare=False)

    @property
    def p2(self):
        return 1.0 - self.p1


class RateEvaluator:
    """Throughput tables for one overlap ``alpha`` on a fixed grid, computed lazily.

    ``R2`` depends on ``(beta, p2, theta2)`` and ``R1`` on all four
    variables, but for a fixed ``(beta, p2)`` UE1's threshold only takes the
    values ``M0(theta1)``, ``theta2 / P21(theta2)`` and ``theta1 / p1``;
    each distinct threshold is integrated once. Mirrored ``beta`` values
    share the interference factor and hence the coverage tables.
    """

    def __init__(self, alpha, grids, p):
        self.alpha = float(alpha)
        self.grids = grids
        self.p = p
        self.betas = grids.beta_values(alpha)
        self.cfgs = [OverlapConfig(self.alpha, b) for b in self.betas]
        self.theta = grids.theta()
        self._rate = rate(self.theta)
        self._cov2 = {}
        self._cov1 = {}

    def _key(self, b_idx, p2):
        return (self.cfgs[b_idx].i_factor, float(p2))

    def cov2_row(self, b_idx, p2):
        key = self._key(b_idx, p2)
        if key not in self._cov2:
            i_f = key[0]
            th = thresholds_array(1.0 - p2, 0.0, self.theta, i_f)
            self._cov2[key] = coverage_from_thresholds(2, th.mbar2, intercell_scale(p2, i_f), self.p)[0]
        return self._cov2[key]

    def cov1_table(self, b_idx, p2):
        """UE1 coverage indexed ``[theta1, theta2]`` and the branch table."""
        key = self._key(b_idx, p2)
        if key not in self._cov1:
            i_f = key[0]
            p1 = 1.0 - p2
            th = thresholds_array(p1, self.theta[:, None], self.theta[None, :], i_f)
            mbar = np.asarray(th.mbar1, dtype=float)
            vals, inv = np.unique(mbar, return_inverse=True)
            cov = coverage_from_thresholds(1, vals, intercell_scale(p1, i_f), self.p)[0]
            self._cov1[key] = (cov[inv].reshape(mbar.shape), np.asarray(th.branch))
        return self._cov1[key]

    def r2_row(self, b_idx, p2):
        return self.cfgs[b_idx].bw2 * self.cov2_row(b_idx, p2) * self._rate

    def r1_table(self, b_idx, p2):
        cov, _ = self.cov1_table(b_idx, p2)
        return self.cfgs[b_idx].bw1 * cov * self._rate[:, None]

    def r1_column(self, b_idx, p2, t2):
        return self.r1_table(b_idx, p2)[:, t2]

    def branch(self, b_idx, p2, t1, t2):
        return Branch(int(self.cov1_table(b_idx, p2)[1][t1, t2]))

    def outcome(self, b_idx, p_idx, t1, t2, T, eval_count, beta_iterations):
        p2 = self.grids.p2_values()[p_idx]
        r1 = float(self.r1_table(b_idx, p2)[t1, t2])
        r2 = float(self.r2_row(b_idx, p2)[t2])
        ok2 = r2 >= T
        ok1 = r1 >= T
        reason = (Infeasibility.NONE if ok1 and ok2 else
                  Infeasibility.TMT_UNREACHABLE_UE2 if not ok2 else Infeasibility.TMT_UNREACHABLE_UE1)
        return AllocationOutcome(
            feasible=ok1 and ok2, alpha=self.alpha, beta=float(self.betas[b_idx]), p1=float(1.0 - p2),
            theta1=float(self.theta[t1]), theta2=float(self.theta[t2]), r1=r1, r2=r2, r_tot=r1 + r2,
            branch=self.branch(b_idx, p2, t1, t2), eval_count=int(eval_count), infeasibility_reason=reason,
            beta_iterations=int(beta_iterations), indices=(int(b_idx), int(p_idx), int(t1), int(t2)))


def _infeasible(alpha, reason, eval_count, beta_iterations):
    nan = float("nan")
    return AllocationOutcome(False, float(alpha), nan, nan, nan, nan, 0.0, 0.0, 0.0, Branch.OUTAGE,
                             int(eval_count), reason, int(beta_iterations))


def _preference(r_tot, b_idx, p_idx, t1, t2):
    # higher R_tot, then lower p2, lower theta2, higher beta, lower theta1
    return (r_tot, -p_idx, -t2, b_idx, -t1)


def best_point(candidates):
    """Pick the preferred ``(r_tot, b_idx, p_idx, t1, t2)`` tuple; order-independent."""
    return max(candidates, key=lambda c: _preference(*c))


def exhaustive_search(alpha, T, grids, p, evaluator=None):
    """Grid-search optimum of the TMT-constrained cell sum rate."""
    ev = evaluator or RateEvaluator(alpha, grids, p)
    p2s = grids.p2_values()
    count = grids.exhaustive_evaluations(alpha)
    any_ue2 = False
    candidates = []
    for b_idx in range(len(ev.betas)):
        for p_idx, p2 in enumerate(p2s):
            r2 = ev.r2_row(b_idx, p2)
            ok2 = r2 >= T
            if not ok2.any():
                continue
            any_ue2 = True
            r1 = ev.r1_table(b_idx, p2)
            feasible = (r1 >= T) & ok2[None, :]
            if not feasible.any():
                continue
            tot = np.where(feasible, r1 + r2[None, :], -np.inf)
            best = tot.max()
            t1s, t2s = np.nonzero(tot == best)
            candidates.extend((float(best), b_idx, p_idx, int(a), int(b)) for a, b in zip(t1s, t2s))
    if not candidates:
        reason = Infeasibility.TMT_UNREACHABLE_UE1 if any_ue2 else Infeasibility.TMT_UNREACHABLE_UE2
        return _infeasible(alpha, reason, count, len(ev.betas))
    _, b_idx, p_idx, t1, t2 = best_point(candidates)
    return ev.outcome(b_idx, p_idx, t1, t2, T, count, len(ev.betas))


@dataclass
class _BetaCandidate:
    b_idx: int
    p_idx: int
    t1: int
    t2: int
    r1: float
    r_tot: float


def algorithm1(alpha, T, grids, p, evaluator=None):
    """Low-complexity feasible solution of the TMT-constrained problem.

    For each ``beta`` from ``beta_max`` downwards, find the smallest ``p2``
    (and for it the first ``theta2``) that lets UE2 reach ``T``, then place
    UE1 in one of three states:

    * I   (``P21 > 0``): SIC is possible; optimise ``theta1`` and stop raising ``p2``.
    * II  (``P21 <= 0``, some ``P1 > 0``): optimise ``theta1`` treating UE2 as
      noise once, then keep raising ``p2`` hoping to reach state I.
    * III (neither): UE1 is in outage; raise ``p2``.

    The ``beta`` descent stops once the per-``beta`` best UE1 throughput
    drops below the previous one. ``eval_count`` counts every throughput
    evaluation the procedure performs.
    """
    ev = evaluator or RateEvaluator(alpha, grids, p)
    p2s = grids.p2_values()
    theta = ev.theta
    n_theta = theta.size
    count = 0
    iterations = 0
    stored = []
    for b_idx in range(len(ev.betas) - 1, -1, -1):
        iterations += 1
        i_f = ev.cfgs[b_idx].i_factor
        flag1 = False
        flag2 = False
        cand_i = None
        cand_ii = None
        last_hit = None
        for p_idx, p2 in enumerate(p2s):
            p1 = 1.0 - p2
            r2 = ev.r2_row(b_idx, p2)
            hit = None
            for t2 in range(n_theta):
                count += 1
                if r2[t2] >= T:
                    hit = t2
                    break
            if hit is None:
                if p_idx == len(p2s) - 1:
                    flag2 = True
                continue
            last_hit = (p_idx, hit)
            if p2 * i_f - theta[hit] * p1 > 0:
                r1 = ev.r1_column(b_idx, p2, hit)
                count += n_theta
                t1 = int(np.argmax(r1))
                cand_i = _BetaCandidate(b_idx, p_idx, t1, hit, float(r1[t1]), float(r1[t1] + r2[hit]))
                break
            if flag1:
                continue
            admissible = p1 - theta * p2 * i_f > 0
            n_adm = int(np.count_nonzero(admissible))
            if n_adm == 0:
                continue
            count += n_adm
            r1 = np.where(admissible, ev.r1_column(b_idx, p2, hit), -np.inf)
            t1 = int(np.argmax(r1))
            if r1[t1] <= 0:
                continue
            flag1 = True
            cand_ii = _BetaCandidate(b_idx, p_idx, t1, hit, float(r1[t1]), float(r1[t1] + r2[hit]))

        if flag1:
            chosen = cand_i if cand_i is not None and cand_i.r1 > cand_ii.r1 else cand_ii
        elif cand_i is not None:
            chosen = cand_i
        elif flag2 or last_hit is None:
            continue
        else:
            # UE2 met the TMT but UE1 never left outage
            p_idx, hit = last_hit
            r2 = float(ev.r2_row(b_idx, p2s[p_idx])[hit])
            chosen = _BetaCandidate(b_idx, p_idx, 0, hit, 0.0, r2)
        stored.append(chosen)
        if len(stored) >= 2 and stored[-1].r1 < stored[-2].r1:
            break

    if not stored:
        return _infeasible(alpha, Infeasibility.TMT_UNREACHABLE_UE2, count, iterations)
    best = max(stored, key=lambda c: (c.r_tot, c.r1))
    return ev.outcome(best.b_idx, best.p_idx, best.t1, best.t2, T, count, iterations)


@dataclass(frozen=True)
class RateRegionPoint:
    p1: float
    beta: float
    theta1: float
    theta2: float
    r1: float
    r2: float
    r_tot: float
    branch: Branch


def rate_region_sweep(alpha, p1_grid, grids, p, evaluator=None):
    """Unconstrained maximum of the cell sum rate over ``(beta, theta1, theta2)`` for each ``p1``."""
    ev = evaluator or RateEvaluator(alpha, grids, p)
    out = []
    for p1 in np.asarray(p1_grid, dtype=float):
        p2 = 1.0 - p1
        candidates = []
        for b_idx in range(len(ev.betas)):
            tot = ev.r1_table(b_idx, p2) + ev.r2_row(b_idx, p2)[None, :]
            best = tot.max()
            t1s, t2s = np.nonzero(tot == best)
            candidates.extend((float(best), b_idx, 0, int(a), int(b)) for a, b in zip(t1s, t2s))
        _, b_idx, _, t1, t2 = best_point(candidates)
        r1 = float(ev.r1_table(b_idx, p2)[t1, t2])
        r2 = float(ev.r2_row(b_idx, p2)[t2])
        out.append(RateRegionPoint(float(p1), float(ev.betas[b_idx]), float(ev.theta[t1]), float(ev.theta[t2]),
                                   r1, r2, r1 + r2, ev.branch(b_idx, p2, t1, t2)))
    return out


@dataclass(frozen=True)
class OMAPoint:
    bw1: float
    theta1: float
    theta2: float
    r1: float
    r2: float
    r_tot: float


def oma_sweep(bw1_grid, grids, p):
    """Orthogonal split of the band, each UE at full power with no intracell interference."""
    theta = grids.theta()
    cov1 = coverage_from_thresholds(1, theta, 1.0, p)[0]
    cov2 = coverage_from_thresholds(2, theta, 1.0, p)[0]
    per_bw1 = cov1 * rate(theta)
    per_bw2 = cov2 * rate(theta)
    j1 = int(np.argmax(per_bw1))
    j2 = int(np.argmax(per_bw2))
    out = []
    for bw1 in np.asarray(bw1_grid, dtype=float):
        r1 = float(bw1 * per_bw1[j1])
        r2 = float((1.0 - bw1) * per_bw2[j2])
        out.append(OMAPoint(float(bw1), float(theta[j1]), float(theta[j2]), r1, r2, r1 + r2))
    return out
