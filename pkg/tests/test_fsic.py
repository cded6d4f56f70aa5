import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pnoma.fsic import (Allocation, Branch, db_to_linear, effective_powers, effective_powers_array,
                        intercell_scale, linear_to_db, thresholds, thresholds_array)
from pnoma.spectral import ConfigError


def scalar_oracle(p1, t1, t2, i):
    """Straight-line re-derivation of the thresholds, one case at a time."""
    p2 = 1.0 - p1
    pt1 = p1 - t1 * p2 * i
    pt2 = p2 - t2 * p1 * i
    pt21 = p2 * i - t2 * p1
    m0 = t1 / pt1 if pt1 > 0 else None
    m1 = max(t2 / pt21, t1 / p1) if (pt21 > 0 and p1 > 0) else None
    if m0 is not None and m1 is not None:
        mbar1, branch = (m1, Branch.SIC) if m1 <= m0 else (m0, Branch.TREAT_AS_NOISE)
    elif m0 is not None:
        mbar1, branch = m0, Branch.TREAT_AS_NOISE
    elif m1 is not None:
        mbar1, branch = m1, Branch.SIC
    else:
        mbar1, branch = math.inf, Branch.OUTAGE
    mbar2 = t2 / pt2 if pt2 > 0 else math.inf
    return (pt1, pt2, pt21), mbar1, branch, mbar2


def test_db_roundtrip():
    assert db_to_linear(-90) == pytest.approx(1e-9)
    assert float(linear_to_db(db_to_linear(3.7))) == pytest.approx(3.7)


def test_effective_powers_no_interference():
    ep = effective_powers(Allocation(1 / 3, 1.0, 1.0), 0.0)
    assert ep.pt2 == pytest.approx(2 / 3)


def test_effective_powers_full_overlap():
    ep = effective_powers(Allocation(1 / 3, 1.0, 1.0), 1.0)
    assert ep.pt1 == pytest.approx(-1 / 3)
    assert ep.pt21 == pytest.approx(1 / 3)


def test_effective_powers_match_scalar_oracle_over_theta_sweep():
    th = db_to_linear(np.arange(-20, 21, 0.5))
    for i in (0.0, 0.2, 0.53, 1.0):
        ep = effective_powers_array(0.5, th, th, i)
        for k, t in enumerate(th):
            (pt1, pt2, pt21), *_ = scalar_oracle(0.5, t, t, i)
            assert ep.pt1[k] == pt1 and ep.pt2[k] == pt2 and ep.pt21[k] == pt21


def test_full_overlap_threshold_example():
    th = thresholds(Allocation(1 / 3, 1.0, 1.0), 1.0)
    assert th.branch is Branch.SIC
    assert th.m1 == pytest.approx(3.0)
    assert th.mbar1 == pytest.approx(3.0)
    assert math.isnan(th.m0)


def test_treat_as_noise_only():
    # small interference: UE1 cannot decode UE2's message but its own power survives
    th = thresholds(Allocation(0.5, 1.0, 1.0), 0.1)
    assert th.branch is Branch.TREAT_AS_NOISE
    assert th.mbar1 == th.m0
    assert math.isnan(th.m1)


def test_sic_only():
    th = thresholds(Allocation(1 / 3, 2.0, 0.5), 0.9)
    assert th.branch is Branch.SIC
    assert th.mbar1 == th.m1


def test_outage_when_no_branch_is_admissible():
    th = thresholds(Allocation(1 / 3, 10.0, 10.0), 0.5)
    assert th.branch is Branch.OUTAGE
    assert th.mbar1 == math.inf
    assert th.mbar2 == math.inf and th.outage2


def test_tie_goes_to_sic():
    # dyadic inputs make exact floating-point ties M0 == M1 easy to find
    g = np.arange(1, 32) / 16.0
    p1, t1, t2, i = np.meshgrid(np.arange(1, 16) / 16.0, g, g, np.arange(1, 17) / 16.0, indexing="ij")
    th = thresholds_array(p1, t1, t2, i)
    tie = np.isfinite(th.m0) & np.isfinite(th.m1) & (th.m0 == th.m1)
    assert tie.sum() > 0
    assert np.all(th.branch[tie] == int(Branch.SIC))


def test_zero_threshold_gives_zero_mbar():
    th = thresholds(Allocation(0.3, 0.0, 0.0), 0.7)
    assert th.mbar1 == 0.0 and th.mbar2 == 0.0


def test_zero_power_user_is_in_outage():
    th = thresholds(Allocation(0.0, 1.0, 1.0), 0.5)
    assert th.branch is Branch.OUTAGE
    th = thresholds(Allocation(1.0, 1.0, 1.0), 0.5)
    assert th.mbar2 == math.inf


def test_allocation_validation():
    with pytest.raises(ConfigError):
        Allocation(1.2, 1.0, 1.0)
    with pytest.raises(ConfigError):
        Allocation(0.5, -1.0, 1.0)
    assert Allocation.from_db(0.4, 0.0, 3.0).theta2 == pytest.approx(10 ** 0.3)


def test_intercell_scale():
    assert intercell_scale(1.0, 0.0) == 1.0
    assert intercell_scale(0.3, 1.0) == pytest.approx(1.0)
    assert intercell_scale(0.3, 0.5) == pytest.approx(0.3 + 0.7 * 0.5)


probs = st.floats(0.01, 0.99)
thetas = st.floats(1e-3, 1e2)
ifs = st.floats(0.0, 1.0)


@settings(max_examples=300, deadline=None)
@given(probs, thetas, thetas, ifs)
def test_matches_scalar_oracle(p1, t1, t2, i):
    _, mbar1, branch, mbar2 = scalar_oracle(p1, t1, t2, i)
    th = thresholds_array(p1, t1, t2, i)
    assert th.branch == branch
    assert th.mbar1 == mbar1
    assert th.mbar2 == mbar2


@settings(max_examples=300, deadline=None)
@given(probs, thetas, thetas, ifs)
def test_branch_consistency(p1, t1, t2, i):
    th = thresholds_array(p1, t1, t2, i)
    if th.branch is Branch.SIC:
        assert th.mbar1 == th.m1 and (math.isnan(th.m0) or th.m1 <= th.m0)
    elif th.branch is Branch.TREAT_AS_NOISE:
        assert th.mbar1 == th.m0 and (math.isnan(th.m1) or th.m0 < th.m1)
    else:
        assert th.mbar1 == math.inf
    if math.isfinite(th.mbar1):
        assert th.mbar1 > 0


@settings(max_examples=200, deadline=None)
@given(probs, thetas, st.floats(1.0, 2.0), ifs, st.floats(0.0, 1.0))
def test_mbar2_monotone_in_theta2_and_interference(p1, t2, factor, i, di):
    a = thresholds_array(p1, 1.0, t2, i).mbar2
    assert thresholds_array(p1, 1.0, t2 * factor, i).mbar2 >= a
    assert thresholds_array(p1, 1.0, t2, min(1.0, i + di)).mbar2 >= a


def test_noma_reduction_at_full_overlap():
    # at I = 1 the SIC threshold is the classical max(theta2 / (p2 - theta2 p1), theta1 / p1)
    p1, t1, t2 = 0.2, 1.5, 0.8
    th = thresholds_array(p1, t1, t2, 1.0)
    assert th.m1 == pytest.approx(max(t2 / ((1 - p1) - t2 * p1), t1 / p1))


def test_vectorised_shapes():
    th = thresholds_array(0.3, np.ones((3, 1)), np.ones((1, 4)), 0.5)
    assert np.shape(th.mbar1) == (3, 4) and np.shape(th.branch) == (3, 4)
