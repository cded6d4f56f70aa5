"""Hot numeric kernels, each in a numba flavour and a numpy flavour.

The coverage integral is evaluated in the coordinates ``t = 2 r / rho`` and
``y = pi * lam * rho**2``. In those coordinates the link-distance pdf, the
nearest-interferer factor and the hypergeometric argument are all free of
``rho``, the interference exponent is linear in ``y`` and the ``y`` integral
reduces to a one-dimensional noise correction that is 1 when ``sigma2 = 0``.
"""

import math

import numpy as np

from ._accel import njit, use_numba

# Gauss-Kronrod 7/15 pair (QUADPACK qk15), abscissae on [-1, 1] descending to 0.
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])


def kronrod15():
    """Nodes, Kronrod weights and embedded Gauss weights on [-1, 1]."""
    x = np.concatenate([-_XGK[:-1], _XGK[::-1]])
    wk = np.concatenate([_WGK[:-1], _WGK[::-1]])
    wg_half = np.zeros(8)
    wg_half[1::2] = _WG
    wg = np.concatenate([wg_half[:-1], wg_half[::-1]])
    return x, wk, wg


def _graded_panels(levels=12):
    edges = [0.0] + [2.0 ** -k for k in range(levels, -1, -1)]
    return np.array(edges)


def _panel_rule(edges):
    x, wk, wg = kronrod15()
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    t = (0.5 * (hi + lo) + half * x).ravel()
    return t, (half * wk).ravel(), (half * (wk - wg)).ravel(), len(edges) - 1


T_NODES, T_WK, T_WDIFF, N_PANELS = _panel_rule(_graded_panels())
N_PER_PANEL = 15

_V_NODES, _V_WEIGHTS = np.polynomial.legendre.leggauss(48)


# ---------------------------------------------------------------------------
# 2F1(1, b; b + 1; -z) for z >= 0, 0 < b < 1
# ---------------------------------------------------------------------------

@njit
def _hyp2f1_scalar(b, z):
    if z == 0.0:
        return 1.0
    if z <= 3.0:
        # Pfaff: (1+z)^-1 2F1(1, 1; b+1; z/(1+z))
        w = z / (1.0 + z)
        term = 1.0
        total = 1.0
        n = 0
        while True:
            term *= (n + 1.0) / (b + 1.0 + n) * w
            total += term
            n += 1
            if term < 1e-17 * total or n > 400:
                break
        return total / (1.0 + z)
    # large argument: b pi / sin(pi b) z^-b - b sum_n (-1)^n z^-(n+1) / (n+1-b)
    inv = 1.0 / z
    power = inv
    tail = 0.0
    n = 0
    while True:
        term = power / (n + 1.0 - b)
        if n % 2 == 0:
            tail += term
        else:
            tail -= term
        n += 1
        power *= inv
        if term < 1e-18 or n > 200:
            break
    return b * math.pi / math.sin(math.pi * b) * z ** (-b) - b * tail


@njit
def _hyp2f1_loop(b, z, out):
    for k in range(z.size):
        out[k] = _hyp2f1_scalar(b, z[k])
    return out


def _hyp2f1_numpy(b, z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z <= 3.0
    if small.any():
        zs = z[small]
        w = zs / (1.0 + zs)
        term = np.ones_like(zs)
        total = np.ones_like(zs)
        for n in range(400):
            term = term * ((n + 1.0) / (b + 1.0 + n)) * w
            total += term
            if np.all(term < 1e-17 * total):
                break
        out[small] = total / (1.0 + zs)
    big = ~small
    if big.any():
        zb = z[big]
        inv = 1.0 / zb
        power = inv.copy()
        tail = np.zeros_like(zb)
        for n in range(200):
            term = power / (n + 1.0 - b)
            tail += term if n % 2 == 0 else -term
            power *= inv
            if np.all(term < 1e-18):
                break
        out[big] = b * math.pi / math.sin(math.pi * b) * zb ** (-b) - b * tail
    return out


def hyp2f1_neg(b, z):
    """``2F1(1, b; b + 1; -z)`` for ``z >= 0`` and ``0 < b < 1`` (array-valued)."""
    z = np.asarray(z, dtype=float)
    flat = np.ascontiguousarray(z.ravel())
    if np.any(flat < 0):
        raise ValueError("argument must be non-negative")
    if use_numba():
        out = _hyp2f1_loop(float(b), flat, np.empty_like(flat))
    else:
        out = _hyp2f1_numpy(float(b), flat)
    out = out.reshape(z.shape)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# coverage integral
# ---------------------------------------------------------------------------

@njit
def _noise_factor(kp, q, gq1, g2q1, g3q1, v_nodes, v_weights):
    # int_0^inf exp(-v - kp v^q) dv
    if kp <= 0.0:
        return 1.0
    if gq1 * kp < 1e-6:
        return 1.0 - gq1 * kp + 0.5 * g2q1 * kp * kp - g3q1 * kp * kp * kp / 6.0
    vmax = min(45.0, (45.0 / kp) ** (1.0 / q))
    half = 0.5 * vmax
    acc = 0.0
    for j in range(v_nodes.size):
        v = half * (1.0 + v_nodes[j])
        acc += v_weights[j] * math.exp(-v - kp * v ** q)
    return acc * half


@njit(fastmath=False)
def _coverage_loop(user, m_arr, c_arr, lam, eta, sigma2, t_nodes, wk, wdiff, n_panels, per_panel,
                   v_nodes, v_weights, val, err):
    q = 0.5 * eta
    gq1 = math.gamma(q + 1.0)
    g2q1 = math.gamma(2.0 * q + 1.0)
    g3q1 = math.gamma(3.0 * q + 1.0)
    b = 1.0 - 2.0 / eta
    noise_scale = sigma2 / (math.pi * lam) ** q
    n_nodes = t_nodes.size
    # per-node factors that do not depend on the threshold
    w = np.empty(n_nodes)
    tp = np.empty(n_nodes)
    g2 = np.empty(n_nodes)
    ratio = np.empty(n_nodes)
    for j in range(n_nodes):
        t = t_nodes[j]
        ht = 0.5 * t
        g = 1.0 - ht
        w[j] = 4.0 * t * (1.0 - t * t) if user == 1 else 4.0 * t * t * t
        tp[j] = ht ** eta
        g2[j] = g * g
        ratio[j] = ht * ht / (g * g) if eta == 4.0 else tp[j] / g ** eta
    for k in range(m_arr.size):
        m = m_arr[k]
        mc = m * c_arr[k]
        smc = math.sqrt(mc)
        total = 0.0
        e = 0.0
        for p in range(n_panels):
            diff = 0.0
            for j in range(p * per_panel, (p + 1) * per_panel):
                if eta == 4.0:
                    sz = ratio[j] * smc
                    a = g2[j] * sz * math.atan(sz)
                else:
                    z = ratio[j] * mc
                    a = 2.0 * z * g2[j] * _hyp2f1_scalar(b, z) / (eta - 2.0)
                inner = 1.0 / (1.0 + a)
                if noise_scale > 0.0:
                    kp = noise_scale * m * tp[j] * inner ** q
                    inner *= _noise_factor(kp, q, gq1, g2q1, g3q1, v_nodes, v_weights)
                f = w[j] * inner / (1.0 + tp[j] * mc)
                total += wk[j] * f
                diff += wdiff[j] * f
            e += abs(diff)
        val[k] = total
        err[k] = e


def _noise_factor_numpy(kp, q):
    out = np.ones_like(kp)
    gq1, g2q1, g3q1 = math.gamma(q + 1), math.gamma(2 * q + 1), math.gamma(3 * q + 1)
    series = (kp > 0) & (gq1 * kp < 1e-6)
    ks = kp[series]
    out[series] = 1.0 - gq1 * ks + 0.5 * g2q1 * ks ** 2 - g3q1 * ks ** 3 / 6.0
    quad = gq1 * kp >= 1e-6
    if quad.any():
        kq = kp[quad]
        vmax = np.minimum(45.0, (45.0 / kq) ** (1.0 / q))
        half = 0.5 * vmax
        v = half[:, None] * (1.0 + _V_NODES)
        out[quad] = half * np.sum(_V_WEIGHTS * np.exp(-v - kq[:, None] * v ** q), axis=1)
    return out


def _coverage_numpy(user, m_arr, c_arr, lam, eta, sigma2, chunk=2048):
    q = 0.5 * eta
    t = T_NODES
    half_t = 0.5 * t
    g = 1.0 - half_t
    w = 4.0 * t * (1.0 - t * t) if user == 1 else 4.0 * t ** 3
    tp = half_t ** eta
    val = np.empty(m_arr.size)
    err = np.empty(m_arr.size)
    for s in range(0, m_arr.size, chunk):
        m = m_arr[s:s + chunk, None]
        mc = m * c_arr[s:s + chunk, None]
        if eta == 4.0:
            sz = half_t ** 2 * np.sqrt(mc) / g ** 2
            a = g ** 2 * sz * np.arctan(sz)
        else:
            z = tp * mc / g ** eta
            a = 2.0 * z * g ** 2 * _hyp2f1_numpy(1.0 - 2.0 / eta, z.ravel()).reshape(z.shape) / (eta - 2.0)
        inner = 1.0 / (1.0 + a)
        if sigma2 > 0.0:
            kp = sigma2 * m * tp / (math.pi * lam) ** q * inner ** q
            inner = inner * _noise_factor_numpy(kp.ravel(), q).reshape(kp.shape)
        f = w * inner / (1.0 + tp * mc)
        val[s:s + chunk] = f @ T_WK
        err[s:s + chunk] = np.abs((f * T_WDIFF).reshape(f.shape[0], N_PANELS, N_PER_PANEL).sum(axis=2)).sum(axis=1)
    return val, err


def coverage_kernel(user, m, c, lam, eta, sigma2):
    """Coverage integral for finite thresholds ``m`` and intercell scales ``c``.

    Returns ``(value, error_estimate)`` arrays shaped like the broadcast inputs.
    """
    m, c = np.broadcast_arrays(np.asarray(m, dtype=float), np.asarray(c, dtype=float))
    shape = m.shape
    m = np.ascontiguousarray(m.ravel())
    c = np.ascontiguousarray(c.ravel())
    if use_numba():
        val = np.empty(m.size)
        err = np.empty(m.size)
        _coverage_loop(int(user), m, c, float(lam), float(eta), float(sigma2), T_NODES, T_WK, T_WDIFF,
                       N_PANELS, N_PER_PANEL, _V_NODES, _V_WEIGHTS, val, err)
    else:
        val, err = _coverage_numpy(int(user), m, c, float(lam), float(eta), float(sigma2))
    return val.reshape(shape), err.reshape(shape)


# ---------------------------------------------------------------------------
# Monte Carlo interference sums
# ---------------------------------------------------------------------------

@njit
def _interference_loop(px, py, offsets, u1x, u1y, u2x, u2y, g1, g2, eta, i1, i2):
    half_eta = 0.5 * eta
    # pow() dominates the loop; the default exponent needs only a product
    square = half_eta == 2.0
    for k in range(offsets.size - 1):
        s1 = 0.0
        s2 = 0.0
        for j in range(offsets[k], offsets[k + 1]):
            dx = px[j] - u1x[k]
            dy = py[j] - u1y[k]
            d1 = dx * dx + dy * dy
            dx = px[j] - u2x[k]
            dy = py[j] - u2y[k]
            d2 = dx * dx + dy * dy
            if square:
                s1 += g1[j] / (d1 * d1)
                s2 += g2[j] / (d2 * d2)
            else:
                s1 += g1[j] * d1 ** -half_eta
                s2 += g2[j] * d2 ** -half_eta
        i1[k] = s1
        i2[k] = s2


def _interference_numpy(px, py, offsets, u1x, u1y, u2x, u2y, g1, g2, eta):
    counts = np.diff(offsets)
    starts = offsets[:-1]
    half_eta = 0.5 * eta
    d1 = (px - np.repeat(u1x, counts)) ** 2 + (py - np.repeat(u1y, counts)) ** 2
    d2 = (px - np.repeat(u2x, counts)) ** 2 + (py - np.repeat(u2y, counts)) ** 2
    i1 = np.add.reduceat(g1 * d1 ** -half_eta, starts)
    i2 = np.add.reduceat(g2 * d2 ** -half_eta, starts)
    return i1, i2


def interference_sums(px, py, offsets, u1, u2, g1, g2, eta):
    """Unit-power intercell interference at both UEs of every trial.

    ``offsets`` delimits each trial's interferers in the flat ``px, py, g1, g2``
    arrays; every trial must have at least one interferer.
    """
    n = offsets.size - 1
    if use_numba():
        i1 = np.empty(n)
        i2 = np.empty(n)
        _interference_loop(px, py, offsets, u1[0], u1[1], u2[0], u2[1], g1, g2, float(eta), i1, i2)
        return i1, i2
    return _interference_numpy(px, py, offsets, u1[0], u1[1], u2[0], u2[1], g1, g2, float(eta))
