"""Three-valued membership tests for the heavy-tail classes.

Every class is decided on a finite geometric grid, so each test returns
``Member`` / ``NonMember`` only when a window estimate clears a tolerance
band *and* is not still drifting across it; everything else is
``Inconclusive`` with the blocking diagnostics attached as evidence.

Classes: ``E`` (extended rapid variation), ``D`` (dominated variation),
``L`` (long tail), ``S`` (subexponential), ``A`` = S and E, ``DcapA`` and
``DcapL``.  Classes with two characterizations are tested along both and
the routes must agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .asymptotics import (
    Direction,
    GridSpec,
    IndexEstimate,
    LimitEstimate,
    PotterFit,
    fit_potter,
    matuszewska_indices,
    ratio_limit,
    window_estimate,
    xh_limits,
)
from .convolution import ConvolvedModel, max_sum_ratio, self_convolution_ratio
from .errors import DegenerateRatio, DomainError, GridError, OverflowGuard
from .models import DistributionModel
from .quadrature import DEFAULT_QUAD, QuadratureSpec, log_integrate

__all__ = [
    "BoundCheck",
    "ClassVerdict",
    "ClosurePreconditions",
    "ClosureReport",
    "DEFAULT_SETTINGS",
    "Evidence",
    "Settings",
    "Verdict",
    "check_closure_preconditions",
    "check_hazard_lower_bound",
    "check_hazard_upper_bound",
    "log_pitman_integral",
    "pitman_integral",
    "power_integral",
    "test_A",
    "test_D",
    "test_DcapA",
    "test_DcapL",
    "test_E",
    "test_L",
    "test_S",
    "verify_convolution_closure",
]

# exponent above which exp() is treated as overflowing
OVERFLOW_EXPONENT = 700.0


class Verdict(str, Enum):
    MEMBER = "Member"
    NON_MEMBER = "NonMember"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Settings:
    """Tolerance bands and search grids shared by all tests.

    ``drift`` is the relative slack allowed between the window estimate and
    the same quantity over the earlier grid points: a window value that has
    moved further than that toward the undecided side is not trusted.
    """

    tol: float = 0.02
    tol_m: float = 0.05
    drift: float = 0.05
    u_grid: tuple = (1.5, 2.0, 4.0, 8.0)
    kappas: tuple = (0.5, 1.0)
    shifts: tuple = (1.0, 5.0, 25.0)
    # every n-th pre-window point is kept for the drift check of costly sequences
    prior_stride: int = 4

    def __post_init__(self):
        if not (0 < self.tol < 0.5 and 0 < self.tol_m and 0 <= self.drift < 1):
            raise ValueError("tolerances out of range")
        if not self.u_grid or any(u <= 1 for u in self.u_grid):
            raise ValueError("u_grid values must exceed 1")
        if not self.kappas or any(k <= 0 for k in self.kappas):
            raise ValueError("kappa values must be positive")

    def to_dict(self):
        return {"tol": self.tol, "tol_m": self.tol_m, "drift": self.drift,
                "u_grid": list(self.u_grid), "kappas": list(self.kappas),
                "shifts": list(self.shifts), "prior_stride": self.prior_stride}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for k in ("u_grid", "kappas", "shifts"):
            if k in d:
                d[k] = tuple(d[k])
        return cls(**d)


DEFAULT_SETTINGS = Settings()


@dataclass(frozen=True)
class Evidence:
    """One quantity behind a verdict: a window estimate or a scalar (lower == upper)."""

    name: str
    lower: float
    upper: float
    trend: float | None = None
    prior_lower: float | None = None
    prior_upper: float | None = None

    @classmethod
    def of(cls, name: str, est: LimitEstimate) -> "Evidence":
        return cls(name, est.lower, est.upper, est.trend, est.prior_lower, est.prior_upper)

    @classmethod
    def scalar(cls, name: str, value: float) -> "Evidence":
        return cls(name, float(value), float(value))

    def to_dict(self):
        return {"name": self.name, "lower": self.lower, "upper": self.upper, "trend": self.trend,
                "prior_lower": self.prior_lower, "prior_upper": self.prior_upper}

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class ClassVerdict:
    class_id: str
    verdict: Verdict
    route: str
    tolerance: float
    evidence: list = field(default_factory=list)
    grid: GridSpec | None = None
    notes: list = field(default_factory=list)
    # True when the route's hypothesis was not met, so it could not decide anything
    gated: bool = False

    @property
    def is_member(self):
        return self.verdict is Verdict.MEMBER

    def to_dict(self):
        return {
            "class": self.class_id,
            "verdict": self.verdict.value,
            "route": self.route,
            "tolerance": self.tolerance,
            "evidence": [e.to_dict() for e in self.evidence],
            "grid": self.grid.to_dict() if self.grid else None,
            "notes": list(self.notes),
            "gated": self.gated,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            class_id=d["class"],
            verdict=Verdict(d["verdict"]),
            route=d["route"],
            tolerance=d["tolerance"],
            evidence=[Evidence.from_dict(e) for e in d["evidence"]],
            grid=GridSpec.from_dict(d["grid"]) if d.get("grid") else None,
            notes=list(d.get("notes", [])),
            gated=bool(d.get("gated", False)),
        )


# --- drift-aware comparisons ----------------------------------------------


def _settled_above(value, prior, drift):
    """value has not sunk noticeably below the pre-window level."""
    return prior is None or not math.isfinite(prior) or value >= (1.0 - drift) * prior


def _settled_below(value, prior, drift):
    """value has not risen noticeably above the pre-window level."""
    return prior is None or value <= (1.0 + drift) * prior or (math.isinf(value) and math.isinf(prior))


def _decide(member: bool, non_member: bool) -> Verdict:
    if member and not non_member:
        return Verdict.MEMBER
    if non_member and not member:
        return Verdict.NON_MEMBER
    return Verdict.INCONCLUSIVE


def _combine(class_id, route, parts, tolerance, grid):
    """Agreement of several routes.

    Gated routes (hypothesis not met) abstain; any two decisive routes that
    disagree, or an ungated Inconclusive route, give Inconclusive.
    """
    evidence = [e for p in parts for e in p.evidence]
    notes = [f"{p.route}: {p.verdict.value}" + (" (hypothesis not met)" if p.gated else "") for p in parts]
    notes += [n for p in parts for n in p.notes]
    active = [p for p in parts if not p.gated]
    verdicts = {p.verdict for p in active}
    if not active:
        verdict = Verdict.INCONCLUSIVE
    elif len(verdicts) == 1:
        verdict = verdicts.pop()
    else:
        verdict = Verdict.INCONCLUSIVE
        if Verdict.INCONCLUSIVE not in verdicts:
            notes.append("routes disagree")
    return ClassVerdict(class_id, verdict, route, tolerance, evidence, grid, notes,
                        gated=not active)


def _conjunction(class_id, route, parts, tolerance, grid):
    evidence = [e for p in parts for e in p.evidence]
    notes = [f"{p.class_id}: {p.verdict.value}" for p in parts] + [n for p in parts for n in p.notes]
    vs = [p.verdict for p in parts]
    if any(v is Verdict.NON_MEMBER for v in vs):
        verdict = Verdict.NON_MEMBER
    elif all(v is Verdict.MEMBER for v in vs):
        verdict = Verdict.MEMBER
    else:
        verdict = Verdict.INCONCLUSIVE
    return ClassVerdict(class_id, verdict, route, tolerance, evidence, grid, notes)


def _route_arg(route, allowed):
    r = str(route).lower()
    table = {a.lower(): a for a in allowed}
    if r not in table:
        raise ValueError(f"route must be one of {sorted(allowed)}, got {route!r}")
    return table[r]


class _Probe:
    """Per-model cache of the grid quantities several tests share."""

    def __init__(self, model: DistributionModel, grid: GridSpec | None, settings: Settings,
                 quad: QuadratureSpec):
        self.model = model
        self.grid = grid or GridSpec.for_model(model)
        self.settings = settings
        self.quad = quad
        self._ratio = {}
        self._xh = None
        self._hazard_index = None

    def tail_ratio(self, u):
        if u not in self._ratio:
            self._ratio[u] = ratio_limit(self.model.log_tail, u, self.grid)
        return self._ratio[u]

    def xh(self):
        if self._xh is None:
            self._xh = xh_limits(self.model, self.grid)
        return self._xh

    def hazard_index(self):
        if self._hazard_index is None:
            self._hazard_index = matuszewska_indices(self.model.log_hazard, self.grid)
        return self._hazard_index

    def thinned_points(self):
        """Pre-window points at ``prior_stride`` spacing followed by the full window."""
        xs = self.grid.points()
        w = self.grid.window
        return np.concatenate([xs[:-w][::self.settings.prior_stride], xs[-w:]])


# --- E ----------------------------------------------------------------------


def _e_direct(p: _Probe) -> ClassVerdict:
    s = p.settings
    ev, member, non_member = [], False, True
    for u in s.u_grid:
        est = p.tail_ratio(u)
        ev.append(Evidence.of(f"tail_ratio_limsup(u={u:g})", est))
        gap = 1.0 - est.upper
        prior_gap = None if est.prior_upper is None else 1.0 - est.prior_upper
        if est.upper <= 1.0 - s.tol and (prior_gap is None or prior_gap <= 0
                                         or gap >= (1.0 - s.drift) * prior_gap):
            member = True
        if not est.lower >= 1.0 - s.tol:
            non_member = False
    return ClassVerdict("E", _decide(member, non_member), "direct: tail ratio limsup < 1 for some u",
                        s.tol, ev, p.grid)


def _e_hazard(p: _Probe) -> ClassVerdict:
    s = p.settings
    est = p.xh()
    member = est.lower >= s.tol_m and _settled_above(est.lower, est.prior_lower, s.drift)
    non_member = est.upper < s.tol_m and _settled_below(est.upper, est.prior_upper, s.drift)
    return ClassVerdict("E", _decide(member, non_member), "hazard: M1 = liminf x h(x) > 0",
                        s.tol_m, [Evidence.of("xh(x) [M1 = lower]", est)], p.grid)


def test_E(model: DistributionModel, grid: GridSpec | None = None, route="Both",
           settings: Settings = DEFAULT_SETTINGS, *, _probe=None) -> ClassVerdict:
    """Extended rapid variation: tail ratio F(ux)/F(x) has limsup < 1 for some u > 1.

    ``route`` is ``Direct``, ``HazardM1`` or ``Both``.
    """
    route = _route_arg(route, {"Direct", "HazardM1", "Both"})
    p = _probe or _Probe(model, grid, settings, DEFAULT_QUAD)
    if route == "Direct":
        return _e_direct(p)
    if route == "HazardM1":
        return _e_hazard(p)
    return _combine("E", "both: direct and M1", [_e_direct(p), _e_hazard(p)], settings.tol, p.grid)


# --- D ----------------------------------------------------------------------


def _d_direct(p: _Probe) -> ClassVerdict:
    s = p.settings
    ev, member, non_member = [], False, True
    for u in s.u_grid:
        est = p.tail_ratio(u)
        ev.append(Evidence.of(f"tail_ratio_liminf(u={u:g})", est))
        if est.lower >= s.tol and _settled_above(est.lower, est.prior_lower, s.drift):
            member = True
        if not (est.upper < s.tol and _settled_below(est.upper, est.prior_upper, s.drift)):
            non_member = False
    return ClassVerdict("D", _decide(member, non_member), "direct: tail ratio liminf > 0 for some u",
                        s.tol, ev, p.grid)


def _d_hazard(p: _Probe) -> ClassVerdict:
    s = p.settings
    est = p.xh()
    bounded = _settled_below(est.upper, est.prior_upper, s.drift)
    growing = not bounded and (math.isnan(est.trend) or est.trend > 0 or math.isinf(est.upper))
    return ClassVerdict("D", _decide(bounded, growing), "hazard: M2 = limsup x h(x) < inf",
                        s.tol, [Evidence.of("xh(x) [M2 = upper]", est)], p.grid)


def test_D(model: DistributionModel, grid: GridSpec | None = None, route="Both",
           settings: Settings = DEFAULT_SETTINGS, *, _probe=None) -> ClassVerdict:
    """Dominated variation: liminf of F(ux)/F(x) > 0.

    ``route`` is ``Direct``, ``HazardM2`` or ``Both``.
    """
    route = _route_arg(route, {"Direct", "HazardM2", "Both"})
    p = _probe or _Probe(model, grid, settings, DEFAULT_QUAD)
    if route == "Direct":
        return _d_direct(p)
    if route == "HazardM2":
        return _d_hazard(p)
    return _combine("D", "both: direct and M2", [_d_direct(p), _d_hazard(p)], settings.tol, p.grid)


# --- L ----------------------------------------------------------------------


def test_L(model: DistributionModel, grid: GridSpec | None = None,
           settings: Settings = DEFAULT_SETTINGS) -> ClassVerdict:
    """Long tail: F(x - y)/F(x) -> 1 for each shift y in ``settings.shifts``."""
    grid = grid or GridSpec.for_model(model)
    s = settings
    xs = grid.points()
    lt = np.asarray(model.log_tail(xs), dtype=float)
    ev, member, non_member = [], True, False
    for y in s.shifts:
        with np.errstate(over="ignore", invalid="ignore"):
            r = np.exp(np.asarray(model.log_tail(xs - y), dtype=float) - lt)
        dev = window_estimate(np.abs(r - 1.0), xs, grid)
        ev.append(Evidence.of(f"shift_ratio(y={y:g})", window_estimate(r, xs, grid)))
        if not (dev.upper <= s.tol and _settled_below(dev.upper, dev.prior_upper, s.drift)):
            member = False
        if dev.lower > s.tol and _settled_above(dev.lower, dev.prior_lower, s.drift):
            non_member = True
    return ClassVerdict("L", _decide(member, non_member), "direct: shifted tail ratio -> 1",
                        s.tol, ev, grid)


# --- Pitman integral -----------------------------------------------------------


def _log_f_over_tail_times_hazard(model):
    # -H(y) + ln h(y); with no closed-form hazard this is exactly ln f(y)
    if model.log_hazard_fn is not None:
        return lambda y: model.log_tail(y) + model.log_hazard_fn(y)
    return model.log_density


def log_pitman_integral(model: DistributionModel, kappa: float, x, quad: QuadratureSpec = DEFAULT_QUAD):
    """ln of int_{support_low}^x exp(kappa y h(x) - H(y)) h(y) dy, batched over x.

    Returns ``(log_value, max_exponent)`` where ``max_exponent`` is the
    largest value of kappa y h(x) - H(y) met at any quadrature node.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    xa = np.asarray(x, dtype=float)
    xs = np.atleast_1d(xa).ravel()
    if np.any(np.isnan(xs)) or np.any(xs < model.support_low):
        raise DomainError(f"{model.label}: Pitman integral needs x >= support_low={model.support_low}")
    live = xs > model.support_low
    hx = np.zeros_like(xs)
    if np.any(live):
        hx[live] = np.asarray(model.hazard(xs[live]), dtype=float)
    slope = kappa * hx
    base = _log_f_over_tail_times_hazard(model)
    top = np.full(xs.size, -np.inf)

    def logf(y, yc, i):
        lt = np.asarray(model.log_tail(y), dtype=float)
        expo = slope[i] * y + lt
        np.maximum.at(top, i, expo)
        return slope[i] * y + np.asarray(base(y), dtype=float)

    out = log_integrate(logf, np.full(xs.size, model.support_low), xs, quad)
    if xa.ndim == 0:
        return float(out[0]), float(top[0])
    return out.reshape(xa.shape), top.reshape(xa.shape)


def pitman_integral(model: DistributionModel, kappa: float, x: float,
                    quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Value of the Pitman integral; tends to 1 for subexponential F whose hazard decreases.

    Raises OverflowGuard when the exponent passes 700 at some node.
    """
    log_value, top = log_pitman_integral(model, kappa, float(x), quad)
    if top > OVERFLOW_EXPONENT:
        raise OverflowGuard(f"exponent reaches {top:.4g} > {OVERFLOW_EXPONENT:g} "
                            f"(kappa={kappa:g}, x={float(x):g})", log_value=log_value)
    return math.exp(log_value)


# --- S ----------------------------------------------------------------------


def _s_selfconv(p: _Probe) -> ClassVerdict:
    s = p.settings
    xs = p.thinned_points()
    with np.errstate(over="ignore"):
        r = np.asarray(self_convolution_ratio(p.model, xs, p.quad), dtype=float)
    w = p.grid.window
    est = window_estimate(r, xs, p.grid, w)
    dev = window_estimate(np.abs(r - 2.0), xs, p.grid, w)
    member = dev.upper <= s.tol and _settled_below(dev.upper, dev.prior_upper, s.drift)
    non_member = est.lower > 2.0 + s.tol and _settled_above(dev.lower, dev.prior_lower, s.drift)
    return ClassVerdict("S", _decide(member, non_member), "self-convolution: tail ratio -> 2",
                        s.tol, [Evidence.of("self_convolution_ratio", est)], p.grid)


def _s_pitman(p: _Probe) -> ClassVerdict:
    s = p.settings
    route = "pitman: integral -> 1 for each kappa"
    try:
        idx = p.hazard_index()
        delta_h = idx.delta
    except (DegenerateRatio, GridError) as exc:
        idx, delta_h = None, float("nan")
        reason = str(exc)
    ev = [Evidence.scalar("hazard_index_delta", delta_h)]
    if not delta_h > s.tol:
        notes = ["positive decrease not established"]
        if idx is None:
            notes.append(reason)
        return ClassVerdict("S", Verdict.INCONCLUSIVE, route, s.tol, ev, p.grid, notes, gated=True)
    xs = p.thinned_points()
    w = p.grid.window
    member, non_member = True, False
    for kappa in s.kappas:
        log_v, top = log_pitman_integral(p.model, kappa, xs, p.quad)
        v = np.where(top > OVERFLOW_EXPONENT, np.inf, np.exp(np.minimum(log_v, OVERFLOW_EXPONENT)))
        est = window_estimate(v, xs, p.grid, w)
        dev = window_estimate(np.abs(v - 1.0), xs, p.grid, w)
        ev.append(Evidence.of(f"pitman_integral(kappa={kappa:g})", est))
        if not (dev.upper <= s.tol and _settled_below(dev.upper, dev.prior_upper, s.drift)):
            member = False
        if est.lower > 1.0 + s.tol and _settled_above(dev.lower, dev.prior_lower, s.drift):
            non_member = True
    return ClassVerdict("S", _decide(member, non_member), route, s.tol, ev, p.grid)


def test_S(model: DistributionModel, grid: GridSpec | None = None, route="Both",
           settings: Settings = DEFAULT_SETTINGS, quad: QuadratureSpec = DEFAULT_QUAD,
           *, _probe=None) -> ClassVerdict:
    """Subexponentiality: tail of F*F over tail of F -> 2.

    ``route`` is ``SelfConvolution``, ``Pitman`` or ``Both``.  The Pitman
    route abstains unless the hazard index estimate shows positive decrease.
    """
    route = _route_arg(route, {"SelfConvolution", "Pitman", "Both"})
    p = _probe or _Probe(model, grid, settings, quad)
    if route == "SelfConvolution":
        return _s_selfconv(p)
    if route == "Pitman":
        return _s_pitman(p)
    return _combine("S", "both: self-convolution and Pitman", [_s_selfconv(p), _s_pitman(p)],
                    settings.tol, p.grid)


# --- A, DcapA, DcapL ----------------------------------------------------------


def test_A(model: DistributionModel, grid: GridSpec | None = None,
           settings: Settings = DEFAULT_SETTINGS, quad: QuadratureSpec = DEFAULT_QUAD,
           *, _probe=None) -> ClassVerdict:
    """A = S and E."""
    p = _probe or _Probe(model, grid, settings, quad)
    return _conjunction("A", "S and E", [test_S(model, route="Both", _probe=p),
                                         test_E(model, route="Both", _probe=p)], settings.tol, p.grid)


def _m_route(p: _Probe) -> ClassVerdict:
    m1, m2 = _e_hazard(p), _d_hazard(p)
    est = p.xh()
    return ClassVerdict("DcapA", _conjunction("DcapA", "", [m1, m2], p.settings.tol, p.grid).verdict,
                        "M-route: 0 < M1 <= M2 < inf", p.settings.tol,
                        [Evidence.of("xh(x) [M1 = lower, M2 = upper]", est)], p.grid)


def _ratio_route(p: _Probe) -> ClassVerdict:
    s = p.settings
    ev, member, non_member = [], False, True
    for u in s.u_grid:
        est = p.tail_ratio(u)
        ev.append(Evidence.of(f"tail_ratio(u={u:g}) [liminf = lower, limsup = upper]", est))
        above = est.lower >= s.tol and _settled_above(est.lower, est.prior_lower, s.drift)
        gap, prior_gap = 1.0 - est.upper, None if est.prior_upper is None else 1.0 - est.prior_upper
        below = est.upper <= 1.0 - s.tol and (prior_gap is None or prior_gap <= 0
                                              or gap >= (1.0 - s.drift) * prior_gap)
        member |= above and below
        vanishing = est.upper < s.tol and _settled_below(est.upper, est.prior_upper, s.drift)
        non_member &= vanishing or est.lower >= 1.0 - s.tol
    return ClassVerdict("DcapA", _decide(member, non_member),
                        "ratio-route: 0 < liminf <= limsup < 1 of the tail ratio", s.tol, ev, p.grid)


def test_DcapA(model: DistributionModel, grid: GridSpec | None = None,
               settings: Settings = DEFAULT_SETTINGS, quad: QuadratureSpec = DEFAULT_QUAD) -> ClassVerdict:
    """D intersect A, decided along three characterizations that must agree.

    (i) D and A; (ii) 0 < M1 <= M2 < inf; (iii) the tail ratio stays
    strictly inside (0, 1).  When D already fails the costly S test inside
    (i) is skipped.
    """
    p = _Probe(model, grid, settings, quad)
    d = test_D(model, route="Both", _probe=p)
    if d.verdict is Verdict.NON_MEMBER:
        first = _conjunction("DcapA", "D and A", [d], settings.tol, p.grid)
        first.notes.append("A not evaluated: D already fails")
    else:
        first = _conjunction("DcapA", "D and A", [d, test_A(model, _probe=p)], settings.tol, p.grid)
    first.route = "D and A"
    parts = [first, _m_route(p), _ratio_route(p)]
    return _combine("DcapA", "three routes: D and A, M1/M2, tail ratio", parts, settings.tol, p.grid)


def test_DcapL(model: DistributionModel, grid: GridSpec | None = None,
               settings: Settings = DEFAULT_SETTINGS) -> ClassVerdict:
    """D intersect L."""
    p = _Probe(model, grid, settings, DEFAULT_QUAD)
    return _conjunction("DcapL", "D and L", [test_D(model, route="Both", _probe=p),
                                             test_L(model, p.grid, settings)], settings.tol, p.grid)


# --- hazard bounds from Potter constants -----------------------------------------


def power_integral(lam: float, gamma: float) -> float:
    """V(lam, gamma) = int_1^lam t^(-gamma) dt, with the log branch at gamma = 1."""
    if not lam > 1:
        raise ValueError("lambda must exceed 1")
    if abs(gamma - 1.0) < 1e-12:
        return math.log(lam)
    return (lam ** (1.0 - gamma) - 1.0) / (1.0 - gamma)


@dataclass
class BoundCheck:
    bound_name: str
    parameters: dict
    fitted: PotterFit | None
    rhs: float
    observed: LimitEstimate
    holds: bool
    flags: list = field(default_factory=list)

    def to_dict(self):
        return {"bound_name": self.bound_name, "parameters": dict(self.parameters),
                "fitted": self.fitted.to_dict() if self.fitted else None, "rhs": self.rhs,
                "observed": self.observed.to_dict(), "holds": self.holds, "flags": list(self.flags)}

    @classmethod
    def from_dict(cls, d):
        return cls(bound_name=d["bound_name"], parameters=dict(d["parameters"]),
                   fitted=PotterFit.from_dict(d["fitted"]) if d["fitted"] else None,
                   rhs=d["rhs"], observed=LimitEstimate.from_dict(d["observed"]),
                   holds=d["holds"], flags=list(d.get("flags", [])))


def _xh_past(model, grid, x0):
    xs = grid.points()
    xs = xs[xs >= x0 * (1 - 1e-12)]
    return xs * np.asarray(model.hazard(xs), dtype=float)


def check_hazard_lower_bound(model: DistributionModel, delta: float,
                             grid: GridSpec | None = None) -> BoundCheck:
    """x h(x) >= (delta - 1) / C(delta) when f has bounded increase with index above delta > 1.

    C(delta) is the Potter constant of the density upper bound
    f(y)/f(x) <= C (y/x)^(-delta).
    """
    grid = grid or GridSpec.for_model(model)
    observed = xh_limits(model, grid)
    flags = []
    try:
        delta_f = matuszewska_indices(model.log_density, grid).delta
    except DegenerateRatio:
        delta_f = float("nan")
    if not 1.0 < delta:
        flags.append("hypothesis violated: delta must exceed 1 (bound is vacuous)")
    if not delta < delta_f:
        flags.append(f"hypothesis violated: delta={delta:g} is not below the density index estimate {delta_f:.4g}")
    fit = fit_potter(model.log_density, delta, Direction.UPPER, grid)
    rhs = (delta - 1.0) / fit.C
    holds = bool(np.all(_xh_past(model, grid, fit.x0) >= rhs * (1 - 1e-9)))
    return BoundCheck("xh_lower_bound", {"delta": float(delta)}, fit, rhs, observed, holds, flags)


def check_hazard_upper_bound(model: DistributionModel, gamma: float, lam: float,
                             grid: GridSpec | None = None) -> BoundCheck:
    """x h(x) <= 1 / (C'(gamma) V(lam, gamma)) when gamma exceeds the density's lower index.

    C'(gamma) is the Potter constant of f(y)/f(x) >= C' (y/x)^(-gamma).
    """
    grid = grid or GridSpec.for_model(model)
    observed = xh_limits(model, grid)
    flags = []
    try:
        gamma_f = matuszewska_indices(model.log_density, grid).gamma
    except DegenerateRatio:
        gamma_f = float("nan")
    if not gamma > gamma_f:
        flags.append(f"hypothesis violated: gamma={gamma:g} does not exceed the density index estimate {gamma_f:.4g}")
    v = power_integral(lam, gamma)
    fit = fit_potter(model.log_density, gamma, Direction.LOWER, grid)
    rhs = 1.0 / (fit.C * v)
    holds = bool(np.all(_xh_past(model, grid, fit.x0) <= rhs * (1 + 1e-9)))
    return BoundCheck("xh_upper_bound", {"gamma": float(gamma), "lambda": float(lam), "V": v},
                      fit, rhs, observed, holds, flags)


# --- convolution closure ------------------------------------------------------


@dataclass
class ClosurePreconditions:
    delta_f1_est: float
    delta_tail1_est: float
    delta_tail2_est: float
    witness_delta: float | None
    liminf_estimate: float | None
    satisfied: bool
    reasons: list = field(default_factory=list)

    def to_dict(self):
        return {"delta_f1_est": self.delta_f1_est, "delta_tail1_est": self.delta_tail1_est,
                "delta_tail2_est": self.delta_tail2_est, "witness_delta": self.witness_delta,
                "liminf_estimate": self.liminf_estimate, "satisfied": self.satisfied,
                "reasons": list(self.reasons)}

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def _delta(g, grid):
    try:
        return matuszewska_indices(g, grid).delta
    except DegenerateRatio:
        return float("nan")


def check_closure_preconditions(left: DistributionModel, right: DistributionModel,
                                grid: GridSpec | None = None,
                                settings: Settings = DEFAULT_SETTINGS,
                                search_steps: int = 16) -> ClosurePreconditions:
    """Conditions under which the convolution of an E-member with a lighter tail stays in E.

    Needs a density f1 with positive lower index, a strictly lighter right
    tail (delta_tail1 < delta_tail2) and some delta in
    [delta_tail1, delta_tail2) with liminf x^delta F1(x) > 0; the last is
    searched on an evenly spaced delta grid.
    """
    g1 = grid or GridSpec.for_model(left)
    g2 = grid or GridSpec.for_model(right)
    d_f1 = _delta(left.log_density, g1)
    d1 = _delta(left.log_tail, g1)
    d2 = _delta(right.log_tail, g2)
    reasons = []
    if not d_f1 > 0:
        reasons.append(f"density index of the first model not positive ({d_f1:.4g})")
    if not math.isfinite(d1):
        reasons.append("tail index of the first model is not finite")
    if not d1 < d2:
        reasons.append(f"ordering fails: tail index {d1:.4g} is not below {d2:.4g}")
    witness = liminf = None
    if math.isfinite(d1) and d1 < d2:
        if math.isfinite(d2):
            candidates = d1 + (d2 - d1) * np.arange(search_steps) / search_steps
        else:
            candidates = d1 + 0.25 * np.arange(search_steps)
        xs = g1.points()
        lt = np.asarray(left.log_tail(xs), dtype=float)
        for d in candidates:
            with np.errstate(over="ignore"):
                est = window_estimate(np.exp(d * np.log(xs) + lt), xs, g1)
            if est.lower >= settings.tol and _settled_above(est.lower, est.prior_lower, settings.drift):
                witness, liminf = float(d), est.lower
                break
        if witness is None:
            reasons.append("no delta in [delta_tail1, delta_tail2) keeps liminf x^delta F1(x) positive")
    return ClosurePreconditions(d_f1, d1, d2, witness, liminf, not reasons, reasons)


@dataclass
class ClosureReport:
    preconditions: ClosurePreconditions
    convolution_e: ClassVerdict
    max_sum: LimitEstimate
    tail_index: IndexEstimate | None
    inputs_dcapa: tuple
    convolution_dcapa: ClassVerdict | None = None
    max_sum_converges: bool | None = None
    consistent: bool = True
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "preconditions": self.preconditions.to_dict(),
            "convolution_e": self.convolution_e.to_dict(),
            "max_sum": self.max_sum.to_dict(),
            "tail_index": self.tail_index.to_dict() if self.tail_index else None,
            "inputs_dcapa": [v.value for v in self.inputs_dcapa],
            "convolution_dcapa": self.convolution_dcapa.to_dict() if self.convolution_dcapa else None,
            "max_sum_converges": self.max_sum_converges,
            "consistent": self.consistent,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            preconditions=ClosurePreconditions.from_dict(d["preconditions"]),
            convolution_e=ClassVerdict.from_dict(d["convolution_e"]),
            max_sum=LimitEstimate.from_dict(d["max_sum"]),
            tail_index=IndexEstimate.from_dict(d["tail_index"]) if d["tail_index"] else None,
            inputs_dcapa=tuple(Verdict(v) for v in d["inputs_dcapa"]),
            convolution_dcapa=ClassVerdict.from_dict(d["convolution_dcapa"]) if d["convolution_dcapa"] else None,
            max_sum_converges=d["max_sum_converges"],
            consistent=d["consistent"],
            notes=list(d.get("notes", [])),
        )


def verify_convolution_closure(left: DistributionModel, right: DistributionModel,
                               grid: GridSpec | None = None, quad: QuadratureSpec = DEFAULT_QUAD,
                               settings: Settings = DEFAULT_SETTINGS) -> ClosureReport:
    """Check the closure statements for F1*F2 numerically.

    The convolution is always tested for E and its max-sum ratio and tail
    index are reported.  If the closure preconditions hold, E membership is
    expected; if both inputs are D-cap-A members the convolution must be
    one too, with max-sum ratio tending to 1.  ``consistent`` is False when
    an expected outcome is contradicted.
    """
    conv = ConvolvedModel.of(left, right, quad)
    cgrid = grid or GridSpec.for_model(conv)
    pre = check_closure_preconditions(left, right, None if grid is None else grid, settings)
    cp = _Probe(conv, cgrid, settings, quad)
    e = test_E(conv, route="Both", _probe=cp)
    xs = cgrid.points()
    ms = np.asarray(max_sum_ratio(left, right, xs, quad), dtype=float)
    ms_est = window_estimate(ms, xs, cgrid)
    try:
        tail_index = matuszewska_indices(conv.log_tail, cgrid)
    except DegenerateRatio:
        tail_index = None
    notes = []
    consistent = True
    if pre.satisfied and not e.is_member:
        consistent = False
        notes.append("preconditions hold but the convolution is not an E member")
    dl = test_DcapA(left, None if grid is None else grid, settings, quad).verdict
    dr = test_DcapA(right, None if grid is None else grid, settings, quad).verdict
    report = ClosureReport(pre, e, ms_est, tail_index, (dl, dr), notes=notes)
    if dl is Verdict.MEMBER and dr is Verdict.MEMBER:
        report.convolution_dcapa = test_DcapA(conv, cgrid, settings, quad)
        dev = window_estimate(np.abs(ms - 1.0), xs, cgrid)
        report.max_sum_converges = bool(dev.upper <= 0.05 and _settled_below(dev.upper, dev.prior_upper,
                                                                             settings.drift))
        if not report.convolution_dcapa.is_member:
            consistent = False
            notes.append("both inputs are D-cap-A members but the convolution is not")
        if not report.max_sum_converges:
            consistent = False
            notes.append("max-sum ratio does not settle at 1")
    report.consistent = consistent
    return report


# the class tests are library functions, not pytest tests
for _fn in (test_A, test_D, test_DcapA, test_DcapL, test_E, test_L, test_S):
    _fn.__test__ = False
del _fn
