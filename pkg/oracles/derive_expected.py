"""Brute-force reference values for the test suite.

Deliberately independent of ``tailclass``: every number here comes from a
closed form, from a composite trapezoid rule with at least 10^6 points
(after a change of variables that removes endpoint singularities), or from
mpmath quadrature at 30 digits.  Where two methods are available both are
run and their agreement is recorded.

Run:  python oracles/derive_expected.py  [--out tests/data/oracle_values.json]
"""

from __future__ import annotations

import argparse
import json
import math
from pathlib import Path

import mpmath as mp
import numpy as np

N_TRAP = 2_000_001
mp.mp.dps = 30


def trapezoid(f, a, b, n=N_TRAP):
    t = np.linspace(a, b, n)
    return float(np.trapezoid(f(t), t))


def entry(value, method, **extra):
    return {"value": value, "method": method, **extra}


# --- Pitman integral ---------------------------------------------------------------


def pitman_pareto(a, kappa, x):
    # int_1^x exp(kappa y a/x) a y^(-a-1) dy; y = e^s
    hx = a / x

    def g(s):
        y = np.exp(s)
        return np.exp(kappa * y * hx) * a * y ** (-a)

    trap = trapezoid(g, 0.0, math.log(x))
    ref = mp.quad(lambda y: mp.e ** (kappa * y * hx) * a * y ** (-a - 1), [1, 10, 100, 1000, x])
    return trap, float(ref)


def pitman_weibull(beta, kappa, x):
    # shape beta < 1 on (0, inf): tail exp(-y^beta), hazard beta y^(beta-1).
    # y = t^(1/beta) turns exp(-H) h dy into exp(kappa y h(x) - t) dt.
    hx = beta * x ** (beta - 1)
    tmax = x ** beta

    def g(t):
        return np.exp(kappa * t ** (1.0 / beta) * hx - t)

    trap = trapezoid(g, 0.0, tmax)
    ref = mp.quad(lambda t: mp.e ** (kappa * t ** (1 / mp.mpf(beta)) * hx - t),
                  mp.linspace(0, tmax, 20))
    return trap, float(ref)


# --- convolutions ------------------------------------------------------------------


def pareto_conv_tail(a1, a2, x):
    """Tail of Pareto(a1)*Pareto(a2) at x > 2.

    P(X1 + X2 > x) = tail2(x - 1) + int_1^{x-1} tail1(x - y) f2(y) dy.  The
    integral is split at the midpoint; each half is integrated in the log
    of the distance to its own endpoint so both endpoint layers are resolved.
    """
    m = 0.5 * x

    def left(s):          # y = e^s, y in [1, m]
        y = np.exp(s)
        return (x - y) ** (-a1) * a2 * y ** (-a2 - 1) * y

    def right(s):         # y = x - e^s, x - y in [1, x - m]
        d = np.exp(s)
        return d ** (-a1) * a2 * (x - d) ** (-a2 - 1) * d

    integral = trapezoid(left, 0.0, math.log(m)) + trapezoid(right, 0.0, math.log(x - m))
    edge = (x - 1.0) ** (-a2)
    trap = edge + integral
    f = lambda y: (x - y) ** (-a1) * a2 * y ** (-a2 - 1)
    ref = (x - 1) ** (-a2) + mp.quad(f, [1, 2, m, x - 2, x - 1])
    return trap, float(ref)


def pareto_conv_density(a1, a2, x):
    """Density of Pareto(a1)*Pareto(a2) at x > 2, same split substitution as the tail."""
    m = 0.5 * x

    def left(s):
        y = np.exp(s)
        return a1 * (x - y) ** (-a1 - 1) * a2 * y ** (-a2 - 1) * y

    def right(s):
        d = np.exp(s)
        return a1 * d ** (-a1 - 1) * a2 * (x - d) ** (-a2 - 1) * d

    trap = trapezoid(left, 0.0, math.log(m)) + trapezoid(right, 0.0, math.log(x - m))
    f = lambda y: a1 * (x - y) ** (-a1 - 1) * a2 * y ** (-a2 - 1)
    ref = mp.quad(f, [1, 2, m, x - 2, x - 1])
    return trap, float(ref)


def weibull_selfconv_ratio(beta, x):
    """Tail of Weibull(beta)*Weibull(beta) over the Weibull tail, by mpmath."""
    tail = lambda t: mp.e ** (-(t ** beta))
    dens = lambda t: beta * t ** (beta - 1) * mp.e ** (-(t ** beta))
    conv = tail(x) + mp.quad(lambda y: tail(x - y) * dens(y), [0, x / 2, x])
    return float(conv / tail(x))


def pareto_selfconv_ratio(a, x):
    trap, ref = pareto_conv_tail(a, a, x)
    return trap * x ** a, ref * x ** a


# --- Potter constants by an explicit pairwise scan -----------------------------------


def potter_scan(log_g, exponent, upper, xs):
    """log C = sup (or inf) over grid pairs x <= y of ln g(y) - ln g(x) + exponent ln(y/x)."""
    best = -math.inf if upper else math.inf
    for i, x in enumerate(xs):
        for y in xs[i:]:
            v = log_g(y) - log_g(x) + exponent * math.log(y / x)
            best = max(best, v) if upper else min(best, v)
    return math.exp(best)


def V(lam, gamma):
    if abs(gamma - 1) < 1e-12:
        return math.log(lam)
    return (lam ** (1 - gamma) - 1) / (1 - gamma)


# --- everything ------------------------------------------------------------------------


def derive():
    out = {}

    # Pareto anchors: exact ratios and x h(x)
    for a in (1, 2, 3):
        out[f"pareto{a}.tail_ratio_u2"] = entry(2.0 ** -a, "closed form u^-a")
        out[f"pareto{a}.xh"] = entry(float(a), "closed form x * a/x")
        out[f"pareto{a}.density_index"] = entry(a + 1.0, "closed form f ratio u^-(a+1)")

    # Pitman integral at x = 1e4
    for kappa in (0.5, 1.0, 2.0):
        trap, ref = pitman_pareto(2.0, kappa, 1e4)
        out[f"pitman.pareto2.k{kappa:g}.x1e4"] = entry(trap, f"trapezoid in ln y, {N_TRAP} points", mpmath=ref)
        trap, ref = pitman_weibull(0.5, kappa, 1e4)
        out[f"pitman.weibull0.5.k{kappa:g}.x1e4"] = entry(trap, f"trapezoid in y^beta, {N_TRAP} points", mpmath=ref)
    # beta = 1/2, kappa = 2: the exponent y/sqrt(x) - sqrt(y) vanishes at y = x and the
    # layer y = x - s contributes int_0^inf exp(-s/(2 sqrt x)) / (2 sqrt x) ds = 1 on top of 1
    out["pitman.weibull0.5.k2.limit"] = entry(2.0, "closed form: bulk mass 1 plus boundary layer mass 1")

    # Exp * Exp = Gamma(2, 1)
    xs = [0.1, 1.0, 5.0, 20.0, 50.0]
    out["expexp.density"] = entry({str(x): x * math.exp(-x) for x in xs}, "closed form x e^-x")
    out["expexp.tail"] = entry({str(x): (1 + x) * math.exp(-x) for x in xs}, "closed form (1+x) e^-x")
    out["expexp.max_sum_x100"] = entry(50.5, "closed form (1+x)/2")

    # Pareto(2) * Pareto(3)
    for x in (10.0, 100.0, 1000.0):
        trap, ref = pareto_conv_tail(2.0, 3.0, x)
        out[f"pareto2_pareto3.tail.x{x:g}"] = entry(trap, f"split trapezoid, 2 x {N_TRAP} points", mpmath=ref)
        out[f"pareto2_pareto3.max_sum.x{x:g}"] = entry(trap / (x ** -2 + x ** -3), "from the tail oracle")
    for x in (10.0, 1000.0):
        trap, ref = pareto_conv_density(2.0, 3.0, x)
        out[f"pareto2_pareto3.density.x{x:g}"] = entry(trap, f"split trapezoid, 2 x {N_TRAP} points", mpmath=ref)
    dens, _ = pareto_conv_density(2.0, 3.0, 1e3)
    tail, _ = pareto_conv_tail(2.0, 3.0, 1e3)
    out["pareto2_pareto3.xh.x1000"] = entry(1e3 * dens / tail, "x density / tail from the two oracles")
    # tail index of the convolution from ratio at two far points
    t1, _ = pareto_conv_tail(2.0, 3.0, 1e5)
    t2, _ = pareto_conv_tail(2.0, 3.0, 2e5)
    out["pareto2_pareto3.tail_index"] = entry(-math.log(t2 / t1) / math.log(2.0), "trapezoid tails at 1e5, 2e5")

    # Pareto(2) * Pareto(2)
    for x in (1e3, 1e5):
        trap, ref = pareto_conv_tail(2.0, 2.0, x)
        out[f"pareto2_pareto2.max_sum.x{x:g}"] = entry(trap / (2 * x ** -2), "split trapezoid", mpmath=ref / (2 * x ** -2))
    trap, ref = pareto_selfconv_ratio(2.0, 1e3)
    out["pareto2.selfconv.x1e3"] = entry(trap, "split trapezoid", mpmath=ref)

    # Weibull(2) self-convolution ratio grows past 2 + tol
    out["weibull2.selfconv"] = entry({str(x): weibull_selfconv_ratio(2.0, x) for x in (2.0, 3.0, 5.0)},
                                     "mpmath quadrature")

    # shifts
    out["exp1.shift_ratio_y1"] = entry(math.e, "closed form e^y")
    out["weibull0.5.shift_ratio_y5.x1e4"] = entry(math.exp(1e4 ** 0.5 - (1e4 - 5) ** 0.5), "closed form")
    out["pareto2.shift_ratio_y5.x1e4"] = entry((1 - 5 / 1e4) ** -2, "closed form")

    # Lognormal x h(x): increasing without bound, so M1 > 0 (E member)
    def lognormal_xh(x):
        z = mp.log(x)
        pdf = mp.npdf(z) / x
        sf = mp.ncdf(-z)
        return float(x * pdf / sf)

    out["lognormal.xh"] = entry({f"{x:g}": lognormal_xh(x) for x in (1e1, 1e2, 1e4, 1e6, 1e8)},
                                "mpmath normal pdf / sf")

    # Log-perturbed Pareto(2, 0.3): exact liminf / limsup of the tail ratio
    a, p = 2.0, 0.3
    for u in (1.5, 2.0, 4.0, 8.0):
        amp = 2 * p * abs(math.sin(math.log(u) / 2))
        out[f"logperturbed.ratio_bounds.u{u:g}"] = entry(
            [u ** -a * math.exp(-amp), u ** -a * math.exp(amp)],
            "closed form u^-a exp(+-2p sin(ln u / 2))")
    out["logperturbed.xh_bounds"] = entry([a - p, a + p], "closed form a - p cos ln x")

    # Potter constants by pairwise scan on a log grid
    grid = [1.0 * 2 ** (k / 4) for k in range(0, 200)]
    c = potter_scan(lambda y: math.log(2) - 3 * math.log(y), 2.0, True, grid)
    out["potter.pareto2.delta2.C"] = entry(c, "pairwise scan")
    out["bound.pareto2.delta2.rhs"] = entry((2.0 - 1) / c, "(delta - 1)/C")
    c = potter_scan(lambda y: math.log(3) - 4 * math.log(y), 2.5, True, grid)
    out["bound.pareto3.delta2.5.rhs"] = entry(1.5 / c, "(delta - 1)/C")
    c = potter_scan(lambda y: math.log(2) - 3 * math.log(y), 3.5, False, grid)
    out["bound.pareto2.gamma3.5.lam2.rhs"] = entry(1.0 / (c * V(2.0, 3.5)), "1/(C' V)", C=c, V=V(2.0, 3.5))
    # Exponential density, exponent 5: pair scan on the default grid (x_k = 2^(k/4)) and the
    # continuous supremum, attained at x = 1, y = 5: 5 ln 5 - 4
    exp_grid = [2 ** (k / 4) for k in range(80)]
    c = potter_scan(lambda y: -y, 5.0, True, exp_grid)
    out["potter.exp1.delta5.grid_logC"] = entry(math.log(c), "pairwise scan on the default exponential grid")
    out["potter.exp1.delta5.sup_logC"] = entry(5 * math.log(5) - 4, "closed form maximum of 5 ln(y/x) - (y - x)")
    out["V.2.1"] = entry(math.log(2.0), "closed form ln 2")
    out["V.2.2"] = entry(0.5, "closed form")
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "tests" / "data" / "oracle_values.json"))
    args = ap.parse_args(argv)
    values = derive()
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(json.dumps(values, indent=2, sort_keys=True) + "\n")
    for k, v in sorted(values.items()):
        print(f"{k:45s} {v['value']}" + (f"   (mpmath {v['mpmath']})" if "mpmath" in v else ""))


if __name__ == "__main__":
    main()
