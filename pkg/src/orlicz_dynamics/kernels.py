"""Scalar Young-function evaluators and the hot one-dimensional search kernels.

Every kernel takes the Young function as a pair ``(phi, prm)`` where
``phi(t, prm)`` evaluates Φ(|t|) and ``prm`` is a float64 parameter vector.
Derivative-aware kernels also take ``dphi(t, prm, side)`` returning the right
(``side > 0``) or left (``side < 0``) derivative at ``t >= 0``.

With numba enabled the kernels are compiled once per evaluator; passing an
uncompiled Python callable requires calling ``py_func(kernel)`` instead.
"""

import math

import numpy as np

from ._jit import njit

GOLDEN = 0.5 * (math.sqrt(5.0) - 1.0)

# conjugate status codes
CONJ_OK = 0
CONJ_DIVERGED = 1


# ---------------------------------------------------------------------------
# evaluators

@njit
def power_phi(t, prm):
    t = abs(t)
    return t ** prm[0] / prm[0]


@njit
def power_dphi(t, prm, side):
    p = prm[0]
    t = abs(t)
    if t == 0.0:
        if p > 1.0:
            return 0.0
        return 1.0 if side > 0 else 0.0
    return t ** (p - 1.0)


@njit
def power_log_phi(t, prm):
    # prm = [alpha, t1, slope, phi(t1)]; t1 > 0 marks the tangent bridge on (t1, 1)
    t = abs(t)
    if t == 0.0:
        return 0.0
    t1 = prm[1]
    if t1 > 0.0 and t > t1 and t < 1.0:
        return prm[3] + prm[2] * (t - t1)
    return t ** prm[0] * (1.0 + abs(math.log(t)))


@njit
def power_log_dphi(t, prm, side):
    alpha = prm[0]
    t1 = prm[1]
    t = abs(t)
    if t == 0.0:
        return 0.0
    if t == 1.0:
        if side > 0:
            return alpha + 1.0
        return prm[2] if t1 > 0.0 else alpha - 1.0
    if t1 > 0.0 and t1 < t < 1.0:
        return prm[2]
    if t > 1.0:
        return t ** (alpha - 1.0) * (alpha + 1.0 + alpha * math.log(t))
    return t ** (alpha - 1.0) * (alpha - 1.0 - alpha * math.log(t))


@njit
def table_phi(t, prm):
    # prm = [n, x_0..x_{n-1}, y_0..y_{n-1}], x_0 = 0 = y_0; linear beyond x_{n-1}
    t = abs(t)
    n = int(prm[0])
    xs = prm[1:1 + n]
    ys = prm[1 + n:1 + 2 * n]
    if t >= xs[n - 1]:
        slope = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2])
        return ys[n - 1] + slope * (t - xs[n - 1])
    i = np.searchsorted(xs, t, side="right") - 1
    return ys[i] + (ys[i + 1] - ys[i]) * (t - xs[i]) / (xs[i + 1] - xs[i])


@njit
def table_dphi(t, prm, side):
    t = abs(t)
    n = int(prm[0])
    xs = prm[1:1 + n]
    ys = prm[1 + n:1 + 2 * n]
    if side > 0:
        i = np.searchsorted(xs, t, side="right") - 1
    else:
        i = np.searchsorted(xs, t, side="left") - 1
    if i < 0:
        i = 0
    if i > n - 2:
        i = n - 2
    return (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])


# ---------------------------------------------------------------------------
# modular, Luxemburg, Amemiya

@njit
def modular(phi, prm, absvals, masses, scale):
    s = 0.0
    for i in range(absvals.shape[0]):
        s += phi(scale * absvals[i], prm) * masses[i]
    return s


@njit
def luxemburg(phi, prm, absvals, masses, rtol):
    """Smallest k with modular(f/k) <= 1, by bisection. Returns (k, bracket width)."""
    top = 0.0
    for i in range(absvals.shape[0]):
        if absvals[i] > top:
            top = absvals[i]
    if top == 0.0:
        return 0.0, 0.0
    hi = top
    while modular(phi, prm, absvals, masses, 1.0 / hi) > 1.0:
        hi *= 2.0
    lo = hi
    while lo > 1e-300 and modular(phi, prm, absvals, masses, 1.0 / lo) <= 1.0:
        lo *= 0.5
    for _ in range(400):
        if hi - lo <= rtol * hi:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if modular(phi, prm, absvals, masses, 1.0 / mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi, hi - lo


@njit
def _amemiya_f(phi, prm, absvals, masses, s):
    k = math.exp(s)
    return (1.0 + modular(phi, prm, absvals, masses, k)) / k


@njit
def amemiya(phi, prm, absvals, masses, tol, growth):
    """Minimise (1 + modular(k f)) / k over k > 0.

    Golden-section search on s = log k after bracket expansion. The map is
    quasiconvex in k, so any bracket with a lower interior point contains the
    minimiser. Returns (value, k, gap).
    """
    top = 0.0
    for i in range(absvals.shape[0]):
        if absvals[i] > top:
            top = absvals[i]
    if top == 0.0:
        return 0.0, 0.0, 0.0
    step = math.log(growth)
    s0 = -math.log(top)
    s_cap = s0 + 90.0
    b = s0
    fb = _amemiya_f(phi, prm, absvals, masses, b)
    fr = _amemiya_f(phi, prm, absvals, masses, b + step)
    if fr < fb:
        a, fa = b, fb
        b, fb = b + step, fr
        d = 2.0 * step
        c = b + d
        fc = _amemiya_f(phi, prm, absvals, masses, c)
        while fc < fb and c < s_cap:
            a, fa = b, fb
            b, fb = c, fc
            d *= 2.0
            c = b + d
            fc = _amemiya_f(phi, prm, absvals, masses, c)
        if fc < fb:
            # still decreasing at the cap: linear growth, the infimum is the limit
            return fc, math.exp(c), fb - fc
    else:
        c, fc = b + step, fr
        d = step
        a = b - d
        fa = _amemiya_f(phi, prm, absvals, masses, a)
        while fa < fb:
            c, fc = b, fb
            b, fb = a, fa
            d *= 2.0
            a = b - d
            fa = _amemiya_f(phi, prm, absvals, masses, a)
    x1 = c - GOLDEN * (c - a)
    x2 = a + GOLDEN * (c - a)
    f1 = _amemiya_f(phi, prm, absvals, masses, x1)
    f2 = _amemiya_f(phi, prm, absvals, masses, x2)
    for _ in range(300):
        if c - a <= tol:
            break
        if f1 <= f2:
            c = x2
            x2, f2 = x1, f1
            x1 = c - GOLDEN * (c - a)
            f1 = _amemiya_f(phi, prm, absvals, masses, x1)
        else:
            a = x1
            x1, f1 = x2, f2
            x2 = a + GOLDEN * (c - a)
            f2 = _amemiya_f(phi, prm, absvals, masses, x2)
    if f1 <= f2:
        best, s_best = f1, x1
    else:
        best, s_best = f2, x2
    if fb < best:
        best, s_best = fb, b
    return best, math.exp(s_best), abs(f1 - f2)


# ---------------------------------------------------------------------------
# conjugate and inverses

@njit
def conjugate(phi, prm, y, growth, tol, xmax):
    """sup_{x >= 0} (x|y| - Φ(x)) by bracket expansion and golden section.

    Returns (value, argmax, status); status CONJ_DIVERGED means the objective
    was still increasing at ``argmax`` > ``xmax``.
    """
    y = abs(y)
    if y == 0.0:
        return 0.0, 0.0, CONJ_OK
    x0 = 1.0
    hi = x0
    g_hi = hi * y - phi(hi, prm)
    while True:
        nxt = hi * growth
        g_nxt = nxt * y - phi(nxt, prm)
        if not g_nxt > g_hi:
            break
        hi, g_hi = nxt, g_nxt
        if hi > xmax:
            return g_hi, hi, CONJ_DIVERGED
    lo = hi / growth if hi > x0 else 0.0
    hi = hi * growth
    a, c = lo, hi
    x1 = c - GOLDEN * (c - a)
    x2 = a + GOLDEN * (c - a)
    g1 = x1 * y - phi(x1, prm)
    g2 = x2 * y - phi(x2, prm)
    for _ in range(400):
        if c - a <= tol * max(c, 1e-300):
            break
        if g1 >= g2:
            c = x2
            x2, g2 = x1, g1
            x1 = c - GOLDEN * (c - a)
            g1 = x1 * y - phi(x1, prm)
        else:
            a = x1
            x1, g1 = x2, g2
            x2 = a + GOLDEN * (c - a)
            g2 = x2 * y - phi(x2, prm)
    best, arg = (g1, x1) if g1 >= g2 else (g2, x2)
    if best < 0.0:
        best, arg = 0.0, 0.0
    return best, arg, CONJ_OK


@njit
def inverse(phi, prm, y, tol):
    """The t >= 0 with Φ(t) = y, by bisection."""
    if y <= 0.0:
        return 0.0
    hi = 1.0
    while phi(hi, prm) < y:
        hi *= 2.0
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if phi(mid, prm) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@njit
def _fenchel_residual(phi, dphi, prm, x, side):
    # Ψ(Φ'(x)) = x Φ'(x) - Φ(x), with a one-sided derivative
    return x * dphi(x, prm, side) - phi(x, prm)


@njit
def psi_argmax(phi, dphi, prm, y):
    """Smallest x with x Φ'_+(x) - Φ(x) >= y; Ψ(v) = y is attained at this x."""
    if y <= 0.0:
        return 0.0
    hi = 1.0
    while _fenchel_residual(phi, dphi, prm, hi, 1) < y:
        hi *= 2.0
    lo = 0.5 * hi
    while lo > 1e-300 and _fenchel_residual(phi, dphi, prm, lo, 1) >= y:
        lo *= 0.5
    for _ in range(200):
        if hi - lo <= 1e-15 * hi:
            break
        mid = 0.5 * (lo + hi)
        if _fenchel_residual(phi, dphi, prm, mid, 1) >= y:
            hi = mid
        else:
            lo = mid
    return hi


@njit
def psi_argmax_upper(phi, dphi, prm, y):
    """Largest x with x Φ'_-(x) - Φ(x) <= y (differs from psi_argmax where Φ is affine)."""
    if y < 0.0:
        return 0.0
    lo = 1.0
    while lo > 1e-300 and _fenchel_residual(phi, dphi, prm, lo, -1) > y:
        lo *= 0.5
    if lo <= 1e-300:
        return 0.0
    hi = 2.0 * lo
    while _fenchel_residual(phi, dphi, prm, hi, -1) <= y:
        lo = hi
        hi *= 2.0
    for _ in range(200):
        if hi - lo <= 1e-15 * hi:
            break
        mid = 0.5 * (lo + hi)
        if _fenchel_residual(phi, dphi, prm, mid, -1) <= y:
            lo = mid
        else:
            hi = mid
    return lo


@njit
def psi_inverse(phi, dphi, prm, y):
    """Largest v >= 0 with Ψ(v) <= y, where Ψ is the complementary function."""
    if y <= 0.0:
        return dphi(0.0, prm, 1)
    x = psi_argmax(phi, dphi, prm, y)
    return (y + phi(x, prm)) / x


# ---------------------------------------------------------------------------
# dual-ball maximisation
#
# With budget b = m Ψ(v) the value m v of a coordinate is concave in b with
# derivative 1 / x, where x is the maximiser in Ψ(v) = sup_x (x v - Φ(x)).
# Adding budget earns g / x_upper, removing it costs g / x_lower. Both are
# taken KINK_EPS (absolute budget) away from b, so a budget that sits next to
# a kink of Ψ is priced on the far side instead of creeping towards it.

KINK_EPS = 1e-10


@njit
def _price_add(phi, dphi, prm, g, m, b):
    x = psi_argmax_upper(phi, dphi, prm, (b + KINK_EPS) / m)
    return np.inf if x == 0.0 else g / x


@njit
def _price_remove(phi, dphi, prm, g, m, b):
    if b <= KINK_EPS:
        return np.inf
    x = psi_argmax(phi, dphi, prm, (b - KINK_EPS) / m)
    return np.inf if x == 0.0 else g / x


@njit
def _pair_split(phi, dphi, prm, gi, mi, gj, mj, c):
    # exact line search for the share s of budget c given to coordinate i
    lo = 0.0
    hi = c
    for _ in range(200):
        if hi - lo <= 1e-15 * c:
            break
        s = 0.5 * (lo + hi)
        if _price_add(phi, dphi, prm, gi, mi, s) > _price_remove(phi, dphi, prm, gj, mj, c - s):
            lo = s
        else:
            hi = s
    return 0.5 * (lo + hi)


@njit
def dual_objective(phi, dphi, prm, g, masses, budgets):
    total = 0.0
    for i in range(g.shape[0]):
        total += g[i] * masses[i] * psi_inverse(phi, dphi, prm, budgets[i] / masses[i])
    return total


@njit
def dual_ascent(phi, dphi, prm, g, masses, budgets, rtol, max_iter):
    """Maximise sum g_i m_i v_i subject to sum m_i Ψ(v_i) <= 1.

    Coordinates are parametrised by their budget share b_i = m_i Ψ(v_i) on the
    simplex; each step moves budget from the coordinate that is cheapest to
    drain to the one with the best addition price and solves that pair
    exactly. ``budgets`` is updated in place. Returns (objective, relative
    price gap at exit).
    """
    n = g.shape[0]
    if n == 0:
        return 0.0, 0.0
    if n == 1:
        budgets[0] = 1.0
        return dual_objective(phi, dphi, prm, g, masses, budgets), 0.0
    add = np.empty(n)
    rem = np.empty(n)
    blocked = np.zeros((n, n), dtype=np.bool_)
    gap = 0.0
    for it in range(max_iter):
        for i in range(n):
            add[i] = _price_add(phi, dphi, prm, g[i], masses[i], budgets[i])
            rem[i] = _price_remove(phi, dphi, prm, g[i], masses[i], budgets[i])
        # pairs are tried in order of price difference; a split that moves less
        # than KINK_EPS straddles a kink of Ψ and the next pair is tried
        moved = False
        gap = 0.0
        for _ in range(n * (n - 1)):
            i_hi = -1
            i_lo = -1
            best = 0.0
            for i in range(n):
                if add[i] <= 0.0:
                    continue
                for j in range(n):
                    if j != i and rem[j] < add[i]:
                        d = 1.0 if np.isinf(add[i]) else (add[i] - rem[j]) / add[i]
                        if d > best and not blocked[i, j]:
                            best = d
                            i_hi = i
                            i_lo = j
            if i_hi < 0:
                break
            gap = max(gap, best)
            if best <= rtol:
                break
            c = budgets[i_hi] + budgets[i_lo]
            s = _pair_split(phi, dphi, prm, g[i_hi], masses[i_hi], g[i_lo], masses[i_lo], c)
            if abs(s - budgets[i_hi]) > KINK_EPS:
                budgets[i_hi] = s
                budgets[i_lo] = c - s
                moved = True
                break
            blocked[i_hi, i_lo] = True
        blocked[:, :] = False
        if not moved:
            break
    return dual_objective(phi, dphi, prm, g, masses, budgets), gap
