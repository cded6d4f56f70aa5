import os
import subprocess
import sys

import numpy as np
import pytest

from pnoma import _accel, _kernels
from pnoma.analytic import NetworkParams
from pnoma.simulate import block_rng, sample_realization

needs_numba = pytest.mark.skipif(not _accel.NUMBA_AVAILABLE, reason="numba not installed")


@pytest.fixture
def restore_backend():
    saved = _accel.backend()
    yield
    _accel.set_backend(saved)


def run_both(fn):
    out = {}
    for name in ("numba", "numpy"):
        _accel.set_backend(name)
        out[name] = fn()
    return out["numba"], out["numpy"]


def test_kronrod_rule_exactness():
    x, wk, wg = _kernels.kronrod15()
    for k in range(23):
        exact = 2.0 / (k + 1) if k % 2 == 0 else 0.0
        assert np.dot(wk, x ** k) == pytest.approx(exact, abs=1e-14)
        if k <= 13:
            assert np.dot(wg, x ** k) == pytest.approx(exact, abs=1e-14)


def test_graded_panels_cover_unit_interval():
    assert _kernels.T_WK.sum() == pytest.approx(1.0, abs=1e-14)
    assert _kernels.T_NODES.min() > 0 and _kernels.T_NODES.max() < 1


def test_env_flag_selects_numpy():
    env = dict(os.environ, PNOMA_DISABLE_NUMBA="1")
    code = "from pnoma import _accel; print(_accel.backend())"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        _accel.set_backend("cuda")


@needs_numba
def test_hyp2f1_backends_agree(restore_backend):
    z = np.concatenate([np.linspace(0, 3, 301), np.logspace(0.5, 9, 200)])
    a, b = run_both(lambda: _kernels.hyp2f1_neg(0.4286, z))
    np.testing.assert_allclose(a, b, rtol=1e-14, atol=0)


@needs_numba
@pytest.mark.parametrize("p", [NetworkParams(), NetworkParams(eta=3.5), NetworkParams(sigma2=0.0),
                               NetworkParams(sigma2=1e-2)])
@pytest.mark.parametrize("user", [1, 2])
def test_coverage_kernel_backends_agree(restore_backend, p, user):
    m = np.logspace(-3, 6, 40)
    c = np.linspace(0.05, 1, 40)
    (va, ea), (vb, eb) = run_both(lambda: _kernels.coverage_kernel(user, m, c, p.lam, p.eta, p.sigma2))
    np.testing.assert_allclose(va, vb, rtol=0, atol=1e-13)
    np.testing.assert_allclose(ea, eb, rtol=1e-6, atol=1e-15)


@needs_numba
def test_interference_sums_backends_agree(restore_backend):
    p = NetworkParams()
    a, b = run_both(lambda: sample_realization(block_rng(3, 0), p, n=5000))
    np.testing.assert_array_equal(a.px, b.px)
    np.testing.assert_allclose(a.i1, b.i1, rtol=1e-12)
    np.testing.assert_allclose(a.i2, b.i2, rtol=1e-12)
