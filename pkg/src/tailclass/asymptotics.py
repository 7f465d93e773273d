"""Finite-range estimates of liminf / limsup quantities on geometric grids.

A limit "as x -> inf" is read off the last ``window`` points of a geometric
grid: the window minimum estimates the liminf, the window maximum the
limsup.  The points before the window are summarised too (``prior_lower``,
``prior_upper``) so that callers can tell a settled sequence from one that
is still drifting toward a boundary.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import DegenerateRatio, FitFailed, GridError
from .models import DistributionModel

LOG_FLOAT_MAX = math.log(np.finfo(float).max)
DEFAULT_U_GRID = (2.0, 4.0, 8.0, 16.0, 32.0)
# ratio estimates below 1e-300 count as zero (index +inf)
LOG_SATURATION = math.log(1e-300)
# relative change of an index between consecutive windows flagged as unsettled
INDEX_DRIFT = 0.05


@dataclass(frozen=True)
class GridSpec:
    x_start: float
    ratio: float = 2.0 ** 0.25
    count: int = 80
    window: int = 16

    def __post_init__(self):
        if not (math.isfinite(self.x_start) and self.x_start > 0):
            raise GridError(f"x_start must be positive and finite, got {self.x_start}")
        if not self.ratio > 1:
            raise GridError(f"grid ratio must exceed 1, got {self.ratio}")
        if self.window < 8:
            raise GridError(f"window must be at least 8, got {self.window}")
        if self.count < self.window:
            raise GridError(f"count ({self.count}) must be >= window ({self.window})")
        if math.log(self.x_start) + (self.count - 1) * math.log(self.ratio) >= LOG_FLOAT_MAX:
            raise GridError(f"grid end x_start*ratio^(count-1) overflows (x_start={self.x_start})")

    @classmethod
    def default(cls, support_low: float = 0.0, **overrides) -> "GridSpec":
        overrides.setdefault("x_start", 4.0 * support_low + 1.0)
        return cls(**overrides)

    @classmethod
    def for_model(cls, model: DistributionModel, **overrides) -> "GridSpec":
        overrides = {k: v for k, v in overrides.items() if v is not None}
        return cls.default(model.support_low, **overrides)

    def points(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return self.x_start * self.ratio ** np.arange(self.count)

    @property
    def x_max(self) -> float:
        return self.x_start * self.ratio ** (self.count - 1)

    def with_(self, **kw) -> "GridSpec":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d) -> "GridSpec":
        return cls(**d)


@dataclass(frozen=True)
class LimitEstimate:
    lower: float
    upper: float
    trend: float
    grid: GridSpec
    prior_lower: float | None = None
    prior_upper: float | None = None

    def to_dict(self) -> dict:
        return {
            "lower": self.lower, "upper": self.upper, "trend": self.trend,
            "prior_lower": self.prior_lower, "prior_upper": self.prior_upper,
            "grid": self.grid.to_dict(),
        }

    @classmethod
    def from_dict(cls, d) -> "LimitEstimate":
        d = dict(d)
        d["grid"] = GridSpec.from_dict(d["grid"])
        return cls(**d)


def _slope(t, v):
    # fixed-order least squares so results do not depend on evaluation order
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    tc = t - t.mean()
    denom = float(np.dot(tc, tc))
    if denom == 0.0 or not np.all(np.isfinite(v)):
        return 0.0 if np.all(v == v[0]) else float("nan")
    return float(np.dot(tc, v - v.mean()) / denom)


def window_estimate(values, xs, grid: GridSpec, window: int | None = None) -> LimitEstimate:
    """Summarise a sequence sampled at ``xs``: inf/sup over the tail window."""
    values = np.asarray(values, dtype=float)
    xs = np.asarray(xs, dtype=float)
    w = grid.window if window is None else window
    win = values[-w:]
    prior = values[:-w]
    trend = _slope(np.log(xs[-w:]), win)
    return LimitEstimate(
        lower=float(np.min(win)),
        upper=float(np.max(win)),
        trend=trend,
        grid=grid,
        prior_lower=float(np.min(prior)) if prior.size else None,
        prior_upper=float(np.max(prior)) if prior.size else None,
    )


def log_ratio_sequence(g, u: float, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """(x_k, g(u x_k) - g(x_k)) over the grid; g is log-valued."""
    xs = grid.points()
    with np.errstate(over="ignore"):
        ux = u * xs
    if not np.all(np.isfinite(ux)):
        raise GridError(f"u*x overflows for u={u}, x_max={grid.x_max}")
    gx = np.asarray(g(xs), dtype=float)
    gux = np.asarray(g(ux), dtype=float)
    if not (np.all(np.isfinite(gx)) and np.all(np.isfinite(gux))):
        raise GridError(f"g is not finite on [{grid.x_start:g}, {u * grid.x_max:g}]")
    return xs, gux - gx


def ratio_limit(g, u: float, grid: GridSpec) -> LimitEstimate:
    """Window estimate of liminf / limsup of exp(g(ux) - g(x))."""
    xs, lr = log_ratio_sequence(g, u, grid)
    return window_estimate(np.exp(lr), xs, grid)


@dataclass(frozen=True)
class IndexEstimate:
    gamma: float
    delta: float
    residual: float
    u_grid: tuple
    flags: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "delta": self.delta, "residual": self.residual,
                "u_grid": list(self.u_grid), "flags": dict(self.flags)}

    @classmethod
    def from_dict(cls, d) -> "IndexEstimate":
        return cls(gamma=d["gamma"], delta=d["delta"], residual=d["residual"],
                   u_grid=tuple(d["u_grid"]), flags=dict(d.get("flags", {})))


def _index_from_points(lu, s, name):
    """Least-squares slope of s against ln u through the origin, or an infinite index on saturation.

    Returns (index, residual, flag).
    """
    pos = s > -LOG_SATURATION      # ratio < 1e-300: decays faster than any power
    neg = s < LOG_SATURATION       # ratio > 1e300
    for mask, sign in ((pos, 1.0), (neg, -1.0)):
        if not np.any(mask):
            continue
        first = int(np.argmax(mask))
        if not np.all(mask[first:]):
            raise DegenerateRatio(f"{name}: saturated ratio estimates are not monotone in u")
        if np.any(pos) and np.any(neg):
            raise DegenerateRatio(f"{name}: ratio estimates saturate in both directions")
        flag = ("+inf" if sign > 0 else "-inf") + ("" if first == 0 else " (partial)")
        return sign * math.inf, 0.0, flag
    # the line passes through the origin: the ratio at u = 1 is exactly 1
    slope = float(np.dot(lu, s) / np.dot(lu, lu))
    resid = float(np.max(np.abs(s - slope * lu)))
    return slope, resid, None


def matuszewska_indices(g, grid: GridSpec, u_grid=DEFAULT_U_GRID) -> IndexEstimate:
    """Upper/lower index of the positive function exp(g) from ratio limits.

    gamma is the slope of -ln(liminf of g-ratio) against ln u, delta the
    slope of -ln(limsup); decaying functions therefore get positive indices
    (a Pareto(a) tail gives gamma = delta = a).
    """
    u_grid = tuple(float(u) for u in u_grid)
    if len(u_grid) < 4 or any(u <= 1 for u in u_grid):
        raise ValueError("u_grid needs at least 4 values, all > 1")
    w = grid.window
    lo, hi, lo_prev, hi_prev = [], [], [], []
    for u in u_grid:
        _, lr = log_ratio_sequence(g, u, grid)
        win = lr[-w:]
        lo.append(-float(np.min(win)))
        hi.append(-float(np.max(win)))
        if lr.size >= 2 * w:
            prev = lr[-2 * w:-w]
            lo_prev.append(-float(np.min(prev)))
            hi_prev.append(-float(np.max(prev)))
    lu = np.log(u_grid)
    gamma, r1, f1 = _index_from_points(lu, np.array(lo), "gamma")
    delta, r2, f2 = _index_from_points(lu, np.array(hi), "delta")
    flags = {}
    if f1:
        flags["gamma"] = f1
    if f2:
        flags["delta"] = f2
    # same regression one window earlier; a large shift means the inner limit has not settled
    if lo_prev:
        for name, value, pts in (("gamma", gamma, lo_prev), ("delta", delta, hi_prev)):
            if not math.isfinite(value):
                continue
            try:
                before, _, _ = _index_from_points(lu, np.array(pts), name)
            except DegenerateRatio:
                continue
            if math.isfinite(before) and abs(value - before) > INDEX_DRIFT * max(1.0, abs(value)):
                flags[f"{name}_drift"] = value - before
    if math.isfinite(gamma) and math.isfinite(delta) and delta > gamma + 1e-9 * max(1.0, abs(gamma)):
        flags["order"] = "delta exceeds gamma on this grid"
    return IndexEstimate(gamma=gamma, delta=delta, residual=max(r1, r2), u_grid=u_grid, flags=flags)


def xh_limits(model: DistributionModel, grid: GridSpec) -> LimitEstimate:
    """Window estimate of M1 = liminf x h(x) (lower) and M2 = limsup x h(x) (upper)."""
    xs = grid.points()
    if xs[0] <= model.support_low:
        raise GridError(f"grid starts at {xs[0]} inside/below support edge {model.support_low}")
    with np.errstate(invalid="ignore", over="ignore"):
        xh = xs * np.asarray(model.hazard(xs), dtype=float)
    if not np.all(np.isfinite(xh)):
        raise GridError(f"x h(x) is not finite on the grid (x_max={grid.x_max:g})")
    return window_estimate(xh, xs, grid)


class Direction(str, Enum):
    UPPER = "UpperBound"
    LOWER = "LowerBound"


@dataclass(frozen=True)
class PotterFit:
    exponent: float
    C: float
    x0: float
    max_violation: float
    direction: Direction = Direction.UPPER

    def to_dict(self) -> dict:
        return {"exponent": self.exponent, "C": self.C, "x0": self.x0,
                "max_violation": self.max_violation, "direction": self.direction.value}

    @classmethod
    def from_dict(cls, d) -> "PotterFit":
        d = dict(d)
        d["direction"] = Direction(d["direction"])
        return cls(**d)


def _pair_matrix(lg, lx, exponent):
    # D[i, j] = ln[g(x_j)/g(x_i)] + exponent * ln(x_j/x_i), meaningful for j >= i
    return (lg[None, :] - lg[:, None]) + exponent * (lx[None, :] - lx[:, None])


def fit_potter(g, exponent: float, direction=Direction.UPPER, grid: GridSpec | None = None,
               dense_factor: int = 4) -> PotterFit:
    """Fit the constant of a Potter-type bound by scanning grid pairs.

    UpperBound: g(y)/g(x) <= C (y/x)^(-exponent) for x0 <= x <= y;
    LowerBound: g(y)/g(x) >= C (y/x)^(-exponent).
    x0 is the first grid point giving a positive finite constant; the fit is
    then re-checked on a grid ``dense_factor`` times finer over the same
    range and ``max_violation`` records the worst relative excess (<= 0 when
    the bound survives).
    """
    direction = Direction(direction)
    if not math.isfinite(exponent):
        raise ValueError("exponent must be finite")
    xs = grid.points()
    lx = np.log(xs)
    lg = np.asarray(g(xs), dtype=float)
    d = _pair_matrix(lg, lx, exponent)
    upper_tri = np.triu(np.ones_like(d, dtype=bool))
    if direction is Direction.UPPER:
        row = np.where(upper_tri, d, -np.inf).max(axis=1)
        # suffix max: log C for pairs with i >= i0
        logc = np.maximum.accumulate(row[::-1])[::-1]
    else:
        row = np.where(upper_tri, d, np.inf).min(axis=1)
        logc = np.minimum.accumulate(row[::-1])[::-1]
    ok = np.isfinite(logc) & (logc > -708.0) & (logc < 709.0)
    if not np.any(ok):
        raise FitFailed(f"no grid x0 gives a positive finite constant (exponent={exponent})")
    i0 = int(np.argmax(ok))
    log_c = float(logc[i0])
    x0 = float(xs[i0])

    n_dense = (grid.count - 1 - i0) * dense_factor + 1
    dx = x0 * grid.ratio ** (np.arange(n_dense) / dense_factor)
    dd = _pair_matrix(np.asarray(g(dx), dtype=float), np.log(dx), exponent) - log_c
    tri = np.triu(np.ones_like(dd, dtype=bool))
    with np.errstate(over="ignore", invalid="ignore"):
        if direction is Direction.UPPER:
            viol = np.expm1(np.where(tri, dd, -np.inf).max())
        else:
            viol = -np.expm1(np.where(tri, dd, np.inf).min())
    return PotterFit(exponent=float(exponent), C=math.exp(log_c), x0=x0,
                     max_violation=float(viol), direction=direction)
