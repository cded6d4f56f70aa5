"""Flexible SIC decoding algebra for the two-user downlink.

UE2 always treats UE1's message as noise. UE1 succeeds when either classical
SIC works (decode UE2's message, cancel it, decode its own) or when it can
decode its own message directly, treating UE2's message as noise. Both
events reduce to a single fading threshold ``h > R**eta (I + noise) * mbar``.

All functions broadcast over numpy arrays; scalar inputs give scalar outputs.
"""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .spectral import ConfigError


class Branch(IntEnum):
    OUTAGE = 0
    SIC = 1
    TREAT_AS_NOISE = 2


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Allocation:
    """Power split and linear SINR thresholds; ``p2 = 1 - p1``."""

    p1: float
    theta1: float
    theta2: float

    def __post_init__(self):
        if not (0.0 <= self.p1 <= 1.0):
            raise ConfigError(f"p1 must lie in [0, 1], got {self.p1}")
        if self.theta1 < 0 or self.theta2 < 0:
            raise ConfigError("SINR thresholds must be non-negative")

    @property
    def p2(self):
        return 1.0 - self.p1

    @classmethod
    def from_db(cls, p1, theta1_db, theta2_db=None):
        if theta2_db is None:
            theta2_db = theta1_db
        return cls(p1, float(db_to_linear(theta1_db)), float(db_to_linear(theta2_db)))


def _out(x):
    return x[()] if isinstance(x, np.ndarray) and x.ndim == 0 else x


@dataclass(frozen=True)
class EffectivePowers:
    pt1: object
    pt2: object
    pt21: object


@dataclass(frozen=True)
class DecodingThresholds:
    """Fading thresholds of both users.

    ``m0`` and ``m1`` are NaN where their branch is inadmissible; ``mbar1`` and
    ``mbar2`` are ``inf`` where the user is in guaranteed outage.
    """

    m0: object
    m1: object
    mbar1: object
    mbar2: object
    branch: object
    outage2: object


def effective_powers(a, i_factor):
    """Message powers reduced by threshold-scaled intracell interference."""
    return effective_powers_array(a.p1, a.theta1, a.theta2, i_factor)


def effective_powers_array(p1, theta1, theta2, i_factor):
    p1, theta1, theta2, i_factor = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (p1, theta1, theta2, i_factor)))
    p2 = 1.0 - p1
    pt1 = p1 - theta1 * p2 * i_factor
    pt2 = p2 - theta2 * p1 * i_factor
    pt21 = p2 * i_factor - theta2 * p1
    return EffectivePowers(_out(pt1), _out(pt2), _out(pt21))


def thresholds(a, i_factor):
    """Decoding thresholds of an ``Allocation`` (see ``thresholds_array``)."""
    return thresholds_array(a.p1, a.theta1, a.theta2, i_factor)


def thresholds_array(p1, theta1, theta2, i_factor):
    """Decoding thresholds and the branch UE1 uses, with ``p2 = 1 - p1``.

    When both branches are admissible the smaller threshold wins; equal
    thresholds are reported as SIC. A zero threshold (rate 0) always gives
    ``mbar = 0``.
    """
    p1, theta1, theta2, i_factor = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (p1, theta1, theta2, i_factor)))
    p2 = 1.0 - p1
    pt1 = p1 - theta1 * p2 * i_factor
    pt2 = p2 - theta2 * p1 * i_factor
    pt21 = p2 * i_factor - theta2 * p1

    ok0 = pt1 > 0
    ok1 = (pt21 > 0) & (p1 > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        m0 = np.where(ok0, theta1 / np.where(ok0, pt1, 1.0), np.nan)
        m1 = np.where(ok1, np.maximum(theta2 / np.where(ok1, pt21, 1.0),
                                      theta1 / np.where(ok1, p1, 1.0)), np.nan)
        both = ok0 & ok1
        sic = (ok1 & ~ok0) | (both & (m1 <= m0))
        tan = (ok0 & ~ok1) | (both & (m0 < m1))
        mbar1 = np.where(sic, m1, np.where(tan, m0, np.inf))
        branch = np.where(sic, int(Branch.SIC), np.where(tan, int(Branch.TREAT_AS_NOISE), int(Branch.OUTAGE)))

        ok2 = pt2 > 0
        mbar2 = np.where(ok2, theta2 / np.where(ok2, pt2, 1.0), np.inf)

    zero1 = theta1 == 0
    mbar1 = np.where(zero1, 0.0, mbar1)
    branch = np.where(zero1 & (branch == int(Branch.OUTAGE)), int(Branch.TREAT_AS_NOISE), branch)
    zero2 = theta2 == 0
    mbar2 = np.where(zero2, 0.0, mbar2)
    outage2 = ~ok2 & ~zero2

    if branch.ndim == 0:
        branch = Branch(int(branch))
    return DecodingThresholds(_out(m0), _out(m1), _out(mbar1), _out(mbar2), branch, _out(outage2))


def intercell_scale(p, i_factor):
    """Fraction of a neighbouring BS's unit power that reaches a user after filtering."""
    return p + (1.0 - p) * i_factor
