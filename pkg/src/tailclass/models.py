"""Distribution contract and the stock analytic families.

Every model is described by its log-density and log-tail so that the
asymptotic machinery can work far beyond the point where the tail itself
underflows.  Both callables accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np
from scipy.special import log_ndtr

from .errors import DomainError, InvalidParameter

LogFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DistributionModel:
    """A distribution on (support_low, inf) with a positive Lebesgue density.

    ``log_tail`` returns 0 below the support and ``log_density`` returns
    ``-inf`` there, which is what the convolution formulas expect.
    """

    support_low: float
    log_density: LogFn
    log_tail: LogFn
    label: str
    # optional closed form; avoids cancelling two huge logs for light tails
    log_hazard_fn: LogFn | None = field(default=None, kw_only=True, compare=False)

    def log_hazard(self, x):
        x = _checked(self, x, strict=True)
        if self.log_hazard_fn is not None:
            return _unwrap(self.log_hazard_fn(x))
        return _unwrap(self.log_density(x) - self.log_tail(x))

    def hazard(self, x):
        return _unwrap(np.exp(self.log_hazard(x)))

    def hazard_function(self, x):
        x = _checked(self, x, strict=False)
        return _unwrap(-np.asarray(self.log_tail(x), dtype=float) + 0.0)

    def tail(self, x):
        return _unwrap(np.exp(self.log_tail(np.asarray(x, dtype=float))))

    def density(self, x):
        return _unwrap(np.exp(self.log_density(np.asarray(x, dtype=float))))


def hazard(model: DistributionModel, x):
    """h(x) = f(x) / tail(x), assembled in log space."""
    return model.hazard(x)


def hazard_function(model: DistributionModel, x):
    """Cumulative hazard H(x) = -ln tail(x)."""
    return model.hazard_function(x)


def _checked(model, x, strict):
    arr = np.asarray(x, dtype=float)
    bad = arr <= model.support_low if strict else arr < model.support_low
    if np.any(bad) or np.any(np.isnan(arr)):
        op = "<=" if strict else "<"
        raise DomainError(f"{model.label}: x {op} support_low={model.support_low} or NaN")
    return arr


def _unwrap(a):
    a = np.asarray(a)
    return float(a) if a.ndim == 0 else a


# --- family closed forms -------------------------------------------------
# Each pair returns (log f, log tail); inputs are float arrays.


def _pareto_logpdf(x, a):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = math.log(a) - (a + 1.0) * np.log(x)
    return np.where(x < 1.0, -np.inf, out)


def _pareto_logsf(x, a):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -a * np.log(x)
    return np.where(x <= 1.0, 0.0, out)


def _exp_logpdf(x, rate):
    x = np.asarray(x, dtype=float)
    return np.where(x < 0.0, -np.inf, math.log(rate) - rate * x)


def _exp_logsf(x, rate):
    x = np.asarray(x, dtype=float)
    return np.where(x <= 0.0, 0.0, -rate * x)


def _weibull_logpdf(x, shape, scale):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = x / scale
        out = math.log(shape / scale) + (shape - 1.0) * np.log(z) - z**shape
    return np.where(x < 0.0, -np.inf, out)


def _weibull_logsf(x, shape, scale):
    x = np.asarray(x, dtype=float)
    with np.errstate(invalid="ignore"):
        out = -((x / scale) ** shape)
    return np.where(x <= 0.0, 0.0, out)


def _lognormal_logpdf(x, mu, sigma):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lx = np.log(x)
        z = (lx - mu) / sigma
        out = -lx - math.log(sigma) - 0.5 * math.log(2.0 * math.pi) - 0.5 * z * z
    return np.where(x <= 0.0, -np.inf, out)


def _lognormal_logsf(x, mu, sigma):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = log_ndtr(-(np.log(x) - mu) / sigma)
    return np.where(x <= 0.0, 0.0, out)


def _burr_logpdf(x, c, k):
    # Burr XII: tail (1 + x^c)^(-k)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lx = np.log(x)
        out = math.log(c * k) + (c - 1.0) * lx - (k + 1.0) * np.logaddexp(0.0, c * lx)
    return np.where(x < 0.0, -np.inf, out)


def _burr_logsf(x, c, k):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -k * np.logaddexp(0.0, c * np.log(x))
    return np.where(x <= 0.0, 0.0, out)


def _logperturbed_logsf(x, a, p):
    # tail x^(-a) exp(p sin ln x); hazard (a - p cos ln x) / x
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lx = np.log(x)
        out = -a * lx + p * np.sin(lx)
    return np.where(x <= 1.0, 0.0, out)


def _logperturbed_logpdf(x, a, p):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lx = np.log(x)
        out = -(a + 1.0) * lx + p * np.sin(lx) + np.log(a - p * np.cos(lx))
    return np.where(x < 1.0, -np.inf, out)


def _logpareto_logsf(x, b):
    # slowly varying tail (1 + ln x)^(-b)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -b * np.log1p(np.log(x))
    return np.where(x <= 1.0, 0.0, out)


def _logpareto_logpdf(x, b):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lx = np.log(x)
        out = math.log(b) - (b + 1.0) * np.log1p(lx) - lx
    return np.where(x < 1.0, -np.inf, out)


def _pareto_loghaz(x, a):
    return math.log(a) - np.log(x)


def _exp_loghaz(x, rate):
    return np.full(np.shape(x), math.log(rate))


def _weibull_loghaz(x, shape, scale):
    return math.log(shape / scale) + (shape - 1.0) * np.log(np.asarray(x, dtype=float) / scale)


def _burr_loghaz(x, c, k):
    lx = np.log(np.asarray(x, dtype=float))
    return math.log(c * k) + (c - 1.0) * lx - np.logaddexp(0.0, c * lx)


def _logperturbed_loghaz(x, a, p):
    lx = np.log(np.asarray(x, dtype=float))
    return np.log(a - p * np.cos(lx)) - lx


def _logpareto_loghaz(x, b):
    lx = np.log(np.asarray(x, dtype=float))
    return math.log(b) - lx - np.log1p(lx)


# name -> (canonical parameter names, defaults, support_low, logpdf, logsf, log hazard)
_FAMILIES = {
    "pareto": (("a",), {}, 1.0, _pareto_logpdf, _pareto_logsf, _pareto_loghaz),
    "exp": (("rate",), {"rate": 1.0}, 0.0, _exp_logpdf, _exp_logsf, _exp_loghaz),
    "weibull": (("shape", "scale"), {"scale": 1.0}, 0.0, _weibull_logpdf, _weibull_logsf, _weibull_loghaz),
    "lognormal": (("mu", "sigma"), {"mu": 0.0, "sigma": 1.0}, 0.0, _lognormal_logpdf, _lognormal_logsf, None),
    "burr": (("c", "k"), {}, 0.0, _burr_logpdf, _burr_logsf, _burr_loghaz),
    "logperturbed": (("a", "p"), {}, 1.0, _logperturbed_logpdf, _logperturbed_logsf, _logperturbed_loghaz),
    "logpareto": (("b",), {"b": 1.0}, 1.0, _logpareto_logpdf, _logpareto_logsf, _logpareto_loghaz),
}

_FAMILY_ALIASES = {"exponential": "exp", "log-perturbed-pareto": "logperturbed", "logperturbedpareto": "logperturbed"}
_PARAM_ALIASES = {"exp": {"lambda": "rate", "lam": "rate"}, "weibull": {"beta": "shape"}}


@dataclass(frozen=True)
class FamilySpec:
    """Family name plus parameters, e.g. ``FamilySpec("pareto", a=2)``."""

    family: str
    params: tuple = field(default=())

    def __init__(self, family: str, params=None, **kwargs):
        name = _FAMILY_ALIASES.get(family.lower(), family.lower())
        if name not in _FAMILIES:
            raise InvalidParameter(f"unknown family {family!r}; expected one of {sorted(_FAMILIES)}")
        merged = dict(params or {})
        merged.update(kwargs)
        aliases = _PARAM_ALIASES.get(name, {})
        names, defaults, *_ = _FAMILIES[name]
        values = dict(defaults)
        for key, val in merged.items():
            key = aliases.get(key, key)
            if key not in names:
                raise InvalidParameter(f"{name}: unknown parameter {key!r}; expected {names}")
            values[key] = float(val)
        missing = [n for n in names if n not in values]
        if missing:
            raise InvalidParameter(f"{name}: missing parameter(s) {missing}")
        object.__setattr__(self, "family", name)
        object.__setattr__(self, "params", tuple((n, values[n]) for n in names))

    @classmethod
    def parse(cls, text: str) -> "FamilySpec":
        """Parse the compact form ``pareto:a=2`` or ``weibull:shape=0.5,scale=1``."""
        name, _, rest = text.strip().partition(":")
        params = {}
        for item in filter(None, (s.strip() for s in rest.split(","))):
            key, eq, val = item.partition("=")
            if not eq:
                raise InvalidParameter(f"malformed parameter {item!r} in {text!r}")
            try:
                params[key.strip()] = float(val)
            except ValueError:
                raise InvalidParameter(f"non-numeric value {val!r} in {text!r}") from None
        return cls(name, params)

    def as_dict(self) -> dict:
        return dict(self.params)

    def __str__(self):
        return self.family + ":" + ",".join(f"{k}={_short(v)}" for k, v in self.params)


def _short(v: float) -> str:
    # compact when exact, otherwise the round-tripping repr
    s = f"{v:g}"
    return s if float(s) == v else repr(v)


def _validate(spec: FamilySpec):
    p = spec.as_dict()
    fam = spec.family
    for key, val in p.items():
        if not math.isfinite(val):
            raise InvalidParameter(f"{fam}: {key} must be finite")
    positive = {
        "pareto": ("a",), "exp": ("rate",), "weibull": ("shape", "scale"),
        "lognormal": ("sigma",), "burr": ("c", "k"), "logpareto": ("b",),
        "logperturbed": ("a",),
    }[fam]
    for key in positive:
        if p[key] <= 0:
            raise InvalidParameter(f"{fam}: {key} must be > 0, got {p[key]}")
    if fam == "logperturbed" and p["a"] <= abs(p["p"]):
        # a > |p| keeps the hazard (a - p cos ln x)/x strictly positive
        raise InvalidParameter(f"logperturbed: need a > |p|, got a={p['a']}, p={p['p']}")


def build(spec: FamilySpec | str) -> DistributionModel:
    if isinstance(spec, str):
        spec = FamilySpec.parse(spec)
    _validate(spec)
    names, _, low, logpdf, logsf, loghaz = _FAMILIES[spec.family]
    kw = spec.as_dict()
    return DistributionModel(
        support_low=low,
        log_density=partial(logpdf, **kw),
        log_tail=partial(logsf, **kw),
        label=str(spec),
        log_hazard_fn=partial(loghaz, **kw) if loghaz else None,
    )


def pareto(a: float) -> DistributionModel:
    return build(FamilySpec("pareto", a=a))


def exponential(rate: float = 1.0) -> DistributionModel:
    return build(FamilySpec("exp", rate=rate))


def weibull(shape: float, scale: float = 1.0) -> DistributionModel:
    return build(FamilySpec("weibull", shape=shape, scale=scale))


def lognormal(mu: float = 0.0, sigma: float = 1.0) -> DistributionModel:
    return build(FamilySpec("lognormal", mu=mu, sigma=sigma))


def burr(c: float, k: float) -> DistributionModel:
    return build(FamilySpec("burr", c=c, k=k))


def log_perturbed_pareto(a: float, p: float) -> DistributionModel:
    return build(FamilySpec("logperturbed", a=a, p=p))


def log_pareto(b: float = 1.0) -> DistributionModel:
    return build(FamilySpec("logpareto", b=b))
