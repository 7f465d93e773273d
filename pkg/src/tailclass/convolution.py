"""Lebesgue convolution of densities and tails, and the ratios built on it.

All quantities are assembled from log-density / log-tail values; integrals
go through :func:`tailclass.quadrature.log_integrate`, so the convolution of
two light tails at x = 1e6 still comes back as an accurate log value.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial

import numpy as np

from .models import DistributionModel
from .quadrature import DEFAULT_QUAD, QuadratureSpec, log_integrate

__all__ = [
    "ConvolvedModel",
    "QuadratureSpec",
    "convolution_hazard",
    "convolution_tail",
    "convolve_density",
    "log_convolve_density",
    "max_sum_ratio",
    "self_convolution_ratio",
]


def _scalar_or_array(a, like):
    return float(a) if np.ndim(like) == 0 else a


def log_convolve_density(left: DistributionModel, right: DistributionModel, x,
                         quad: QuadratureSpec = DEFAULT_QUAD):
    """ln of f1*f2(x) = int f1(y) f2(x - y) dy over the joint support."""
    xa = np.asarray(x, dtype=float)
    xs = np.atleast_1d(xa).ravel()
    s1, s2 = left.support_low, right.support_low

    def logf(y, yc, i):
        # x - y = s2 + (b - y), with b = x - s2
        return left.log_density(y) + right.log_density(s2 + yc)

    out = log_integrate(logf, np.full(xs.shape, s1), xs - s2, quad)
    out = np.where(xs > s1 + s2, out, -np.inf)
    return _scalar_or_array(out.reshape(xa.shape), x)


def convolve_density(left, right, x, quad: QuadratureSpec = DEFAULT_QUAD):
    return _scalar_or_array(np.exp(log_convolve_density(left, right, x, quad)), x)


def convolution_tail(left: DistributionModel, right: DistributionModel, x,
                     quad: QuadratureSpec = DEFAULT_QUAD):
    """ln of the tail of F1*F2 at x, i.e. ln[tail2(x - s1) + int tail1(x - y) f2(y) dy].

    ``s1`` is the left support edge; the tail term covers every y for which
    the left summand alone cannot push the total below x.  Returns 0 at or
    below the combined support edge.
    """
    xa = np.asarray(x, dtype=float)
    xs = np.atleast_1d(xa).ravel()
    s1, s2 = left.support_low, right.support_low

    def logf(y, yc, i):
        return left.log_tail(s1 + yc) + right.log_density(y)

    integral = log_integrate(logf, np.full(xs.shape, s2), xs - s1, quad)
    edge = right.log_tail(xs - s1)
    out = np.logaddexp(edge, integral)
    out = np.where(xs > s1 + s2, np.minimum(out, 0.0), 0.0)
    return _scalar_or_array(out.reshape(xa.shape), x)


def self_convolution_ratio(model: DistributionModel, x, quad: QuadratureSpec = DEFAULT_QUAD):
    """tail of F*F over tail of F; tends to 2 exactly for subexponential F."""
    lt = convolution_tail(model, model, x, quad)
    with np.errstate(over="ignore"):
        # light tails overflow to inf, which is the honest limit
        out = np.exp(lt - model.log_tail(np.asarray(x, dtype=float)))
    return _scalar_or_array(out, x)


def max_sum_ratio(left, right, x, quad: QuadratureSpec = DEFAULT_QUAD):
    """tail of F1*F2 over tail1 + tail2, with the sum formed in log space."""
    xa = np.asarray(x, dtype=float)
    lt = convolution_tail(left, right, xa, quad)
    denom = np.logaddexp(left.log_tail(xa), right.log_tail(xa))
    return _scalar_or_array(np.exp(lt - denom), x)


def convolution_hazard(left, right, x, quad: QuadratureSpec = DEFAULT_QUAD):
    xa = np.asarray(x, dtype=float)
    out = np.exp(log_convolve_density(left, right, xa, quad) - convolution_tail(left, right, xa, quad))
    return _scalar_or_array(out, x)


def _conv_log_density(left, right, quad, x):
    return log_convolve_density(left, right, x, quad)


def _conv_log_tail(left, right, quad, x):
    return convolution_tail(left, right, x, quad)


@dataclass(frozen=True)
class ConvolvedModel(DistributionModel):
    """F1*F2 exposed through the ordinary DistributionModel contract."""

    left: DistributionModel = None
    right: DistributionModel = None
    quad: QuadratureSpec = DEFAULT_QUAD

    @classmethod
    def of(cls, left: DistributionModel, right: DistributionModel,
           quad: QuadratureSpec = DEFAULT_QUAD) -> "ConvolvedModel":
        return cls(
            support_low=left.support_low + right.support_low,
            log_density=partial(_conv_log_density, left, right, quad),
            log_tail=partial(_conv_log_tail, left, right, quad),
            label=f"({left.label})*({right.label})",
            left=left,
            right=right,
            quad=quad,
        )
