"""Independent reference values for the frozen constants in tests/frozen_values.hpp.

Uses mpmath at 40 digits: stationary points are found by root-finding on the
derivative of each objective, starting from a dense grid, so nothing here
shares code or method with the C++ library. Run: python3 oracles.py
"""
import mpmath as mp

mp.mp.dps = 40
P_GRID = ["1.1", "1.3", "1.5", "2", "3", "4", "5", "10"]


def argmax_1d(f, lo, hi, n=4000):
    xs = [lo * (hi / lo) ** (mp.mpf(k) / n) for k in range(n + 1)]
    best = max(xs, key=f)
    df = lambda t: mp.diff(f, t)
    try:
        t = mp.findroot(df, best)
        if lo <= t <= hi and f(t) >= f(best):
            return t, f(t)
    except (ValueError, ZeroDivisionError):
        pass
    return best, f(best)


def kappa(p):
    return argmax_1d(lambda t: t ** (p - 1) / (1 + t ** p), mp.mpf("1e-4"), mp.mpf("1e4"))


def m_p(p):
    if p == 2:
        return mp.mpf(0), mp.mpf(0)
    return argmax_1d(lambda t: abs(t ** (p - 1) - t) / (1 + t ** p), mp.mpf(1), mp.mpf("1e4"))


def narrow_bound(p, k):
    if p == 2:
        return mp.mpf(0), mp.mpf(0)
    return argmax_1d(lambda t: (k * t ** (p - 1) - t) / (1 + t ** p), mp.mpf("1e-6"), mp.mpf("1e4"))


def lp_norm(vals, w, p):
    return sum(wi * abs(v) ** p for v, wi in zip(vals, w)) ** (1 / p)


def two_by_two(a, w, p, n=20000):
    """norm, v, |v| of a real 2x2 matrix on weighted l_p^2 by parametrizing the unit sphere."""
    best = [mp.mpf(0)] * 3
    for k in range(n):
        th = 2 * mp.pi * k / n
        x = [mp.cos(th), mp.sin(th)]
        s = lp_norm(x, w, p)
        x = [xi / s for xi in x]
        tx = [a[0] * x[0] + a[1] * x[1], a[2] * x[0] + a[3] * x[1]]
        sh = [mp.sign(xi) * abs(xi) ** (p - 1) for xi in x]
        best[0] = max(best[0], lp_norm(tx, w, p))
        best[1] = max(best[1], abs(sum(wi * si * ti for wi, si, ti in zip(w, sh, tx))))
        best[2] = max(best[2], sum(wi * abs(xi) ** (p - 1) * abs(ti) for wi, xi, ti in zip(w, x, tx)))
    return best


def refine_sphere(a, w, p, which, n=20000):
    """Polishes the grid maximum of one quantity with root-finding in the angle."""
    def q(th):
        x = [mp.cos(th), mp.sin(th)]
        s = lp_norm(x, w, p)
        x = [xi / s for xi in x]
        tx = [a[0] * x[0] + a[1] * x[1], a[2] * x[0] + a[3] * x[1]]
        if which == 0:
            return lp_norm(tx, w, p)
        sh = [mp.sign(xi) * abs(xi) ** (p - 1) for xi in x]
        if which == 1:
            return abs(sum(wi * si * ti for wi, si, ti in zip(w, sh, tx)))
        return sum(wi * abs(xi) ** (p - 1) * abs(ti) for wi, xi, ti in zip(w, x, tx))
    ths = [2 * mp.pi * k / n for k in range(n)]
    th0 = max(ths, key=q)
    try:
        th = mp.findroot(lambda t: mp.diff(q, t), th0)
        if q(th) >= q(th0):
            return q(th)
    except (ValueError, ZeroDivisionError):
        pass
    return q(th0)


if __name__ == "__main__":
    for ps in P_GRID:
        p = mp.mpf(ps)
        kt, kv = kappa(p)
        mt, mv = m_p(p)
        nt, nv = narrow_bound(p, kv)
        print(f"p={ps} kappa={mp.nstr(kv, 20)} tau={mp.nstr(kt, 20)} m_p={mp.nstr(mv, 20)} "
              f"narrow={mp.nstr(max(nv, 0), 20)} narrow_tau={mp.nstr(nt, 20)}")
    a = [mp.mpf(v) for v in ("1.1", "0.3", "-0.8", "0.5")]
    w = [mp.mpf("0.7"), mp.mpf("1.3")]
    for ps in ("1.5", "3", "4"):
        p = mp.mpf(ps)
        vals = [refine_sphere(a, w, p, k, 4000) for k in range(3)]
        print(f"matrix p={ps} norm={mp.nstr(vals[0], 20)} v={mp.nstr(vals[1], 20)} abs_v={mp.nstr(vals[2], 20)}")
