"""Acceptance criteria, one test each.

Every test records a ``[PASS]`` / ``[FAIL]`` line (printed in the
"acceptance criteria" section of the pytest summary) before asserting, so
a failing criterion still reports what was measured.  Tolerances are
pinned to the published criteria and none is relaxed here.
"""

import ast
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

import tailclass as tc
from tailclass import Verdict
from tailclass.models import build
from conftest import ACCEPTANCE_LINES, ORACLE, ORACLE_PATH

M, N, I = Verdict.MEMBER, Verdict.NON_MEMBER, Verdict.INCONCLUSIVE
ROOT = Path(__file__).resolve().parents[1]
ORACLE_SCRIPT = ROOT / "oracles" / "derive_expected.py"

P1, P2, P3 = tc.pareto(1), tc.pareto(2), tc.pareto(3)
EXP = tc.exponential(1)
W05, W2 = tc.weibull(0.5), tc.weibull(2)
LPP = tc.log_perturbed_pareto(2, 0.3)
SIX = [P1, P2, EXP, W05, W2, LPP]


def record(n, ok, text):
    ACCEPTANCE_LINES[f"{n:02d}"] = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {text}"
    assert ok, text


def _g(v):
    return f"{v:.6g}"


def test_criterion_01_pareto_anchors():
    problems, parts = [], []
    for a, m in ((1, P1), (2, P2), (3, P3)):
        g = tc.GridSpec.for_model(m)
        tail = tc.matuszewska_indices(m.log_tail, g)
        dens = tc.matuszewska_indices(m.log_density, g)
        xh = tc.xh_limits(m, g)
        checks = {
            "gamma": abs(tail.gamma - a) <= 0.02 * a,
            "delta": abs(tail.delta - a) <= 0.02 * a,
            "M1": abs(xh.lower - a) <= 1e-6,
            "M2": abs(xh.upper - a) <= 1e-6,
            "delta_f": abs(dens.delta - (a + 1)) <= 0.02 * (a + 1),
        }
        problems += [f"a={a} {k}" for k, ok in checks.items() if not ok]
        parts.append(f"a={a}: gamma {_g(tail.gamma)} delta {_g(tail.delta)} M1 {_g(xh.lower)} "
                     f"M2 {_g(xh.upper)} delta_f {_g(dens.delta)}")
    record(1, not problems, "Pareto anchors; " + "; ".join(parts) + (f"; off: {problems}" if problems else ""))


def _pair(f, model, routes):
    return tuple(f(model, route=r).verdict for r in routes)


def test_criterion_02_E_equivalence():
    rows = {m.label: _pair(tc.test_E, m, ("Direct", "HazardM1")) for m in SIX}
    ok = all(a is b and a is not I for a, b in rows.values())
    record(2, ok, "E Direct vs HazardM1: " + ", ".join(f"{k}={a.value}/{b.value}" for k, (a, b) in rows.items()))


def test_criterion_03_D_equivalence():
    rows = {m.label: _pair(tc.test_D, m, ("Direct", "HazardM2")) for m in SIX}
    agree = all(a is b and a is not I for a, b in rows.values())
    members = {k for k, (a, b) in rows.items() if a is M}
    expected = {P1.label, P2.label, LPP.label}
    record(3, agree and members == expected,
           "D Direct vs HazardM2: " + ", ".join(f"{k}={a.value}/{b.value}" for k, (a, b) in rows.items())
           + f"; members {sorted(members)}")


def test_criterion_04_pitman():
    t0 = time.perf_counter()
    vals, fails = [], []
    for m, lo, hi in ((P2, 0.98, 1.02), (W05, 0.95, 1.05)):
        for kappa in (0.5, 1.0, 2.0):
            v = tc.pitman_integral(m, kappa, 1e4)
            vals.append(f"{m.label} k={kappa:g}: {v:.6f}")
            if not lo <= v <= hi:
                fails.append(f"{m.label} k={kappa:g} = {v:.4f} outside [{lo}, {hi}]")
    p = tc.test_S(EXP, route="Pitman")
    gate = p.verdict is I and "positive decrease not established" in p.notes
    vals.append(f"exp Pitman route {p.verdict.value} ({'; '.join(p.notes)})")
    if not gate:
        fails.append("exponential Pitman route not gated")
    runtime = time.perf_counter() - t0
    record(4, not fails, "; ".join(vals) + f"; runtime {runtime:.2f} s"
           + (f"; FAILS: {fails} (kappa*beta >= 1 makes the Weibull(0.5) integral tend to 2,"
              " see the decisions ledger)" if fails else ""))


def test_criterion_05_exp_exp_closed_form():
    xs = np.geomspace(0.1, 50.0, 200)
    dens = tc.convolve_density(EXP, EXP, xs)
    tail = np.exp(tc.convolution_tail(EXP, EXP, xs))
    ms = tc.max_sum_ratio(EXP, EXP, xs)
    e_d = np.max(np.abs(dens / (xs * np.exp(-xs)) - 1))
    e_t = np.max(np.abs(tail / ((1 + xs) * np.exp(-xs)) - 1))
    e_m = np.max(np.abs(ms / ((1 + xs) / 2) - 1))
    r100 = tc.max_sum_ratio(EXP, EXP, 100.0)
    ok = e_d < 1e-8 and e_t < 1e-8 and e_m < 1e-8 and abs(r100 / 50.5 - 1) < 1e-8
    record(5, ok, f"max rel err density {e_d:.2e}, tail {e_t:.2e}, max-sum {e_m:.2e} on 200 points "
                  f"in [0.1, 50]; max_sum_ratio(100) = {r100:.10g}")


@pytest.mark.slow
def test_criterion_06_closure_worked_example():
    t0 = time.perf_counter()
    r = tc.verify_convolution_closure(P2, P3)
    pre, idx = r.preconditions, r.tail_index
    ok = (pre.satisfied and pre.witness_delta is not None and abs(pre.witness_delta - 2) <= 1e-6
          and r.convolution_e.verdict is M and idx is not None
          and abs(idx.delta - 2) <= 0.1 and abs(idx.gamma - 2) <= 0.1)
    record(6, ok, f"preconditions {'satisfied' if pre.satisfied else pre.reasons}, witness delta "
                  f"{pre.witness_delta!r}, convolution E {r.convolution_e.verdict.value}, tail index "
                  f"gamma {_g(idx.gamma)} delta {_g(idx.delta)}; runtime {time.perf_counter() - t0:.1f} s")


@pytest.mark.slow
def test_criterion_07_max_sum_equivalence():
    t0 = time.perf_counter()
    conv = tc.ConvolvedModel.of(P2, P2)
    g = tc.GridSpec.for_model(conv)
    xs = g.points()
    ms = np.asarray(tc.max_sum_ratio(P2, P2, xs))
    est = tc.window_estimate(ms, xs, g)
    dev = tc.window_estimate(np.abs(ms - 1), xs, g)
    # flattening: the distance to 1 over the window is no larger than before it
    flat = dev.upper <= dev.prior_upper
    v = tc.test_DcapA(conv, g)
    ok = 0.95 <= est.lower and est.upper <= 1.05 and flat and v.verdict is M
    record(7, ok, f"max_sum_ratio window [{est.lower:.7f}, {est.upper:.7f}], |r-1| window max "
                  f"{dev.upper:.2e} vs earlier {dev.prior_upper:.2e}, trend {est.trend:.2e}; "
                  f"DcapA(conv) {v.verdict.value}; runtime {time.perf_counter() - t0:.1f} s")


BOUND_FAMILIES = [P1, P2, P3, tc.burr(2, 1), LPP, tc.lognormal(), W05]


def test_criterion_08_bound_suite():
    fails, n_lower, n_upper = [], 0, 0
    for m in BOUND_FAMILIES:
        g = tc.GridSpec.for_model(m)
        dens = tc.matuszewska_indices(m.log_density, g)
        if math.isfinite(dens.delta):
            deltas = [1 + (dens.delta - 1) * f for f in (0.25, 0.5, 0.75)]
        else:
            deltas = [1.5, 2.0, 3.0]
        for d in deltas:
            b = tc.check_hazard_lower_bound(m, d, g)
            n_lower += 1
            if not b.holds:
                fails.append(f"{m.label} lower delta={d:.3g}")
        if math.isfinite(dens.gamma):
            for gamma in (dens.gamma + 0.5, dens.gamma + 1.0):
                for lam in (2.0, 10.0):
                    b = tc.check_hazard_upper_bound(m, gamma, lam, g)
                    n_upper += 1
                    if not b.holds:
                        fails.append(f"{m.label} upper gamma={gamma:.3g} lam={lam:g}")
    v21, v22 = tc.power_integral(2, 1), tc.power_integral(2, 2)
    exact = v21 == math.log(2) and v22 == 0.5
    record(8, not fails and exact,
           f"{n_lower} lower-bound and {n_upper} upper-bound checks over "
           f"{', '.join(m.label for m in BOUND_FAMILIES)}; failures {fails or 'none'}; "
           f"V(2,1) = {v21!r}, V(2,2) = {v22!r}")


def _routes(v):
    return [n.rsplit(": ", 1)[1].split(" ")[0] for n in v.notes[:3]]


def test_criterion_09_dcapa_routes():
    p2, ex, lp = tc.test_DcapA(P2), tc.test_DcapA(EXP), tc.test_DcapA(LPP)
    gaps = [(e.name, e.lower, e.upper) for e in lp.evidence if e.name.startswith("tail_ratio(u=")]
    strict = bool(gaps) and all(lo < hi for _, lo, hi in gaps)
    ok = (_routes(p2) == ["Member"] * 3 and p2.verdict is M and _routes(ex) == ["NonMember"] * 3
          and ex.verdict is N and lp.verdict is M and strict)
    record(9, ok, f"Pareto(2) routes {_routes(p2)}; Exp(1) routes {_routes(ex)}; LogPerturbed(2,0.3) "
                  f"{lp.verdict.value} with ratio windows "
                  + ", ".join(f"{n.split('[')[0].strip()} [{lo:.4f}, {hi:.4f}]" for n, lo, hi in gaps))


# --- criterion 10: every oracle value against the library ----------------------


def _pitman(label, kappa, x):
    return tc.pitman_integral(build(label), kappa, x)


def _exp_conv(x):
    return math.exp(tc.convolution_tail(EXP, EXP, x))


def _library_checks():
    """oracle key -> (library value, comparison, tolerance)."""
    out = {}
    for a, m in ((1, P1), (2, P2), (3, P3)):
        g = tc.GridSpec.for_model(m)
        r = tc.ratio_limit(m.log_tail, 2.0, g)
        out[f"pareto{a}.tail_ratio_u2"] = ([r.lower, r.upper], "rel", 1e-9)
        xh = tc.xh_limits(m, g)
        out[f"pareto{a}.xh"] = ([xh.lower, xh.upper], "abs", 1e-6)
        d = tc.matuszewska_indices(m.log_density, g)
        out[f"pareto{a}.density_index"] = ([d.gamma, d.delta], "rel", 0.02)
    for kappa in (0.5, 1.0, 2.0):
        out[f"pitman.pareto2.k{kappa:g}.x1e4"] = (_pitman("pareto:a=2", kappa, 1e4), "rel", 1e-6)
        out[f"pitman.weibull0.5.k{kappa:g}.x1e4"] = (_pitman("weibull:shape=0.5", kappa, 1e4), "rel", 1e-6)
    out["pitman.weibull0.5.k2.limit"] = (_pitman("weibull:shape=0.5", 2.0, 1e10), "rel", 1e-4)
    out["expexp.density"] = ({k: tc.convolve_density(EXP, EXP, float(k)) for k in ORACLE["expexp.density"]["value"]},
                             "rel", 1e-8)
    out["expexp.tail"] = ({k: _exp_conv(float(k)) for k in ORACLE["expexp.tail"]["value"]}, "rel", 1e-8)
    out["expexp.max_sum_x100"] = (tc.max_sum_ratio(EXP, EXP, 100.0), "rel", 1e-8)
    for x in (10.0, 100.0, 1000.0):
        out[f"pareto2_pareto3.tail.x{x:g}"] = (math.exp(tc.convolution_tail(P2, P3, x)), "rel", 1e-6)
        out[f"pareto2_pareto3.max_sum.x{x:g}"] = (tc.max_sum_ratio(P2, P3, x), "rel", 1e-6)
    for x in (10.0, 1000.0):
        out[f"pareto2_pareto3.density.x{x:g}"] = (tc.convolve_density(P2, P3, x), "rel", 1e-6)
    out["pareto2_pareto3.xh.x1000"] = (1e3 * tc.convolution_hazard(P2, P3, 1e3), "rel", 1e-6)
    t1, t2 = tc.convolution_tail(P2, P3, 1e5), tc.convolution_tail(P2, P3, 2e5)
    out["pareto2_pareto3.tail_index"] = (-(t2 - t1) / math.log(2.0), "rel", 1e-6)
    for x in (1e3, 1e5):
        out[f"pareto2_pareto2.max_sum.x{x:g}"] = (tc.max_sum_ratio(P2, P2, x), "rel", 1e-6)
    out["pareto2.selfconv.x1e3"] = (tc.self_convolution_ratio(P2, 1e3), "rel", 1e-6)
    out["weibull2.selfconv"] = ({k: tc.self_convolution_ratio(W2, float(k)) for k in ORACLE["weibull2.selfconv"]["value"]},
                                "rel", 1e-6)
    shift = lambda m, x, y: math.exp(m.log_tail(x - y) - m.log_tail(x))
    out["exp1.shift_ratio_y1"] = (shift(EXP, 50.0, 1.0), "rel", 1e-9)
    out["weibull0.5.shift_ratio_y5.x1e4"] = (shift(W05, 1e4, 5.0), "rel", 1e-9)
    out["pareto2.shift_ratio_y5.x1e4"] = (shift(P2, 1e4, 5.0), "rel", 1e-9)
    ln = tc.lognormal()
    out["lognormal.xh"] = ({k: float(k) * ln.hazard(float(k)) for k in ORACLE["lognormal.xh"]["value"]}, "rel", 1e-9)
    g = tc.GridSpec.for_model(LPP)
    for u in (1.5, 2.0, 4.0, 8.0):
        r = tc.ratio_limit(LPP.log_tail, u, g)
        out[f"logperturbed.ratio_bounds.u{u:g}"] = ([r.lower, r.upper], "within", 1e-12)
    xh = tc.xh_limits(LPP, g)
    out["logperturbed.xh_bounds"] = ([xh.lower, xh.upper], "within", 1e-12)
    gp = tc.GridSpec.for_model(P2)
    out["potter.pareto2.delta2.C"] = (tc.fit_potter(P2.log_density, 2.0, "UpperBound", gp).C, "rel", 1e-9)
    out["bound.pareto2.delta2.rhs"] = (tc.check_hazard_lower_bound(P2, 2.0).rhs, "rel", 1e-9)
    out["bound.pareto3.delta2.5.rhs"] = (tc.check_hazard_lower_bound(P3, 2.5).rhs, "rel", 1e-9)
    out["bound.pareto2.gamma3.5.lam2.rhs"] = (tc.check_hazard_upper_bound(P2, 3.5, 2.0).rhs, "rel", 1e-9)
    fit = tc.fit_potter(EXP.log_density, 5.0, "UpperBound", tc.GridSpec.for_model(EXP))
    out["potter.exp1.delta5.grid_logC"] = (math.log(fit.C), "abs", 1e-9)
    # the dense recheck can only see violations up to the continuous supremum
    out["potter.exp1.delta5.sup_logC"] = (math.log(fit.C) + math.log1p(fit.max_violation), "at_most", 1e-9)
    out["V.2.1"] = (tc.power_integral(2.0, 1.0), "exact", 0.0)
    out["V.2.2"] = (tc.power_integral(2.0, 2.0), "exact", 0.0)
    return out


def _compare(got, ref, how, tol):
    if isinstance(ref, dict):
        return all(_compare(got[k], ref[k], how, tol) for k in ref)
    if how == "within":
        lo, hi = ref
        return lo * (1 - tol) <= got[0] <= got[1] <= hi * (1 + tol)
    if isinstance(got, list):
        return all(_compare(g, ref, how, tol) for g in got)
    if how == "exact":
        return got == ref
    if how == "at_most":
        return got <= ref + tol
    if how == "abs":
        return abs(got - ref) <= tol
    return abs(got - ref) <= tol * abs(ref)


def _imports(path):
    tree = ast.parse(path.read_text())
    mods = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            mods |= {a.name.split(".")[0] for a in node.names}
        elif isinstance(node, ast.ImportFrom):
            mods.add((node.module or "").split(".")[0])
    return mods


def test_criterion_10_oracle_independence(tmp_path):
    independent = ORACLE_SCRIPT.exists() and "tailclass" not in _imports(ORACLE_SCRIPT)
    # regenerating the oracle reproduces the frozen file byte for byte
    fresh = tmp_path / "oracle.json"
    subprocess.run([sys.executable, str(ORACLE_SCRIPT), "--out", str(fresh)], check=True,
                   capture_output=True, timeout=600)
    frozen = fresh.read_bytes() == ORACLE_PATH.read_bytes()
    checks = _library_checks()
    unmapped = sorted(set(ORACLE) - set(checks))
    mismatched = sorted(k for k, (got, how, tol) in checks.items()
                        if k in ORACLE and not _compare(got, ORACLE[k]["value"], how, tol))
    # where the oracle ran two methods, they must agree with each other
    disagree = sorted(k for k, v in ORACLE.items()
                      if "mpmath" in v and abs(v["mpmath"] - v["value"]) > 1e-6 * abs(v["mpmath"]))
    ok = independent and frozen and not unmapped and not mismatched and not disagree
    record(10, ok, f"{len(ORACLE)} oracle values from {ORACLE_SCRIPT.relative_to(ROOT)} "
                   f"({'regenerated identically' if frozen else 'REGENERATION DIFFERS'}) "
                   f"(imports {sorted(_imports(ORACLE_SCRIPT))}); library matches {len(checks) - len(mismatched)}"
                   f"/{len(checks)}; trapezoid vs mpmath disagreements {disagree or 'none'}"
                   + (f"; unmapped {unmapped}" if unmapped else "")
                   + (f"; mismatched {mismatched}" if mismatched else ""))
