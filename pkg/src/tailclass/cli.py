"""Command-line front end: ``tailclass <command> --model SPEC ...``.

Commands
  classify  membership verdicts for E, D, L, S, A, DcapA and DcapL
  indices   Matuszewska indices of tail, density and hazard, M1/M2, hazard bounds
  convolve  density / tail / hazard / max-sum ratio of F1*F2 along the grid
  pitman    Pitman integral along the grid for each kappa, plus the Pitman verdict
  verify    closure checks for F1*F2 (two models) or hazard bounds (one model)

Exit status: 0 on success, 3 when any reported verdict is Inconclusive,
2 on bad usage, 1 on an internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .asymptotics import GridSpec, IndexEstimate, LimitEstimate, matuszewska_indices, xh_limits
from .classifiers import (
    DEFAULT_SETTINGS,
    BoundCheck,
    ClassVerdict,
    ClosureReport,
    Settings,
    Verdict,
    check_hazard_lower_bound,
    check_hazard_upper_bound,
    log_pitman_integral,
    test_A,
    test_D,
    test_DcapA,
    test_DcapL,
    test_E,
    test_L,
    test_S,
    verify_convolution_closure,
)
from .convolution import ConvolvedModel, max_sum_ratio
from .errors import DegenerateRatio, GridError, InvalidParameter, TailClassError, UsageError
from .models import FamilySpec, build
from .quadrature import DEFAULT_QUAD, QuadratureSpec

COMMANDS = ("classify", "indices", "convolve", "pitman", "verify")
EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3
CONVOLVE_HEADER = ("x", "density", "tail", "hazard", "max_sum_ratio")


@dataclass(frozen=True)
class RunConfig:
    command: str
    models: tuple
    grid: dict = field(default_factory=dict)
    quad: QuadratureSpec = DEFAULT_QUAD
    settings: Settings = DEFAULT_SETTINGS
    output: str = "json"
    output_path: str | None = None

    def grid_for(self, model) -> GridSpec:
        return GridSpec.for_model(model, **self.grid)

    def to_dict(self):
        return {
            "command": self.command,
            "models": [str(m) for m in self.models],
            "grid": dict(self.grid),
            "quad": self.quad.to_dict(),
            "settings": self.settings.to_dict(),
            "output": self.output,
            "output_path": self.output_path,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            command=d["command"],
            models=tuple(FamilySpec.parse(m) for m in d["models"]),
            grid=dict(d["grid"]),
            quad=QuadratureSpec.from_dict(d["quad"]),
            settings=Settings.from_dict(d["settings"]),
            output=d["output"],
            output_path=d["output_path"],
        )


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _float_list(text):
    try:
        values = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _parser():
    p = _Parser(prog="tailclass", description="Numerical heavy-tail class membership.")
    p.add_argument("--version", action="version", version=f"tailclass {__version__}")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--model", action="append", default=[], metavar="SPEC",
                       help="family spec such as pareto:a=2 (repeatable)")
        s.add_argument("--x-start", type=float)
        s.add_argument("--grid-ratio", type=float)
        s.add_argument("--grid-count", type=int)
        s.add_argument("--window", type=int)
        s.add_argument("--u-grid", type=_float_list, help="comma-separated u values > 1")
        s.add_argument("--kappa", type=_float_list, help="comma-separated kappa values > 0")
        s.add_argument("--tol", type=float)
        s.add_argument("--abs-tol", type=float)
        s.add_argument("--rel-tol", type=float)
        s.add_argument("--max-depth", type=int)
        s.add_argument("--out", choices=("json", "csv", "text"), default="json")
        s.add_argument("--output-path")
    return p


def parse_config(argv) -> RunConfig:
    """Parse and validate arguments; raises UsageError naming the bad token."""
    ns = _parser().parse_args(list(argv))
    if ns.command is None:
        raise UsageError(f"a command is required: one of {', '.join(COMMANDS)}")
    n = len(ns.model)
    if ns.command == "convolve" and n != 2:
        raise UsageError(f"convolve needs exactly 2 --model specs, got {n}")
    if ns.command == "verify" and n not in (1, 2):
        raise UsageError(f"verify needs 1 or 2 --model specs, got {n}")
    if ns.command in ("classify", "indices", "pitman") and n != 1:
        raise UsageError(f"{ns.command} needs exactly 1 --model spec, got {n}")
    if ns.out == "csv" and ns.command not in ("convolve", "pitman"):
        raise UsageError(f"csv output is only available for curve commands (convolve, pitman), not {ns.command}")
    specs = []
    for text in ns.model:
        try:
            spec = FamilySpec.parse(text)
            build(spec)
        except (InvalidParameter, ValueError) as exc:
            raise UsageError(f"--model {text!r}: {exc}") from None
        specs.append(spec)
    grid = {k: v for k, v in (("x_start", ns.x_start), ("ratio", ns.grid_ratio),
                              ("count", ns.grid_count), ("window", ns.window)) if v is not None}
    try:
        for spec in specs:
            GridSpec.for_model(build(spec), **grid)
        quad = replace(DEFAULT_QUAD, **{k: v for k, v in (("abs_tol", ns.abs_tol), ("rel_tol", ns.rel_tol),
                                                          ("max_depth", ns.max_depth)) if v is not None})
        s = {}
        if ns.u_grid is not None:
            s["u_grid"] = ns.u_grid
        if ns.kappa is not None:
            s["kappas"] = ns.kappa
        if ns.tol is not None:
            s["tol"] = ns.tol
        settings = replace(DEFAULT_SETTINGS, **s)
    except (GridError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    return RunConfig(ns.command, tuple(specs), grid, quad, settings, ns.out, ns.output_path)


# --- report -------------------------------------------------------------------


def _opt(obj):
    return None if obj is None else obj.to_dict()


@dataclass
class Report:
    config: RunConfig
    version: str = __version__
    verdicts: list = field(default_factory=list)
    indices: dict = field(default_factory=dict)
    xh: LimitEstimate | None = None
    bounds: list = field(default_factory=list)
    closure: ClosureReport | None = None
    curve: dict | None = None
    flags: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    @property
    def inconclusive(self):
        vs = list(self.verdicts)
        if self.closure is not None:
            vs.append(self.closure.convolution_e)
            if self.closure.convolution_dcapa is not None:
                vs.append(self.closure.convolution_dcapa)
        return any(v.verdict is Verdict.INCONCLUSIVE for v in vs)

    def to_dict(self, timings=True):
        d = {
            "version": self.version,
            "config": self.config.to_dict(),
            "verdicts": [v.to_dict() for v in self.verdicts],
            "indices": {k: (v.to_dict() if isinstance(v, IndexEstimate) else {"error": v})
                        for k, v in self.indices.items()},
            "xh": _opt(self.xh),
            "bounds": [b.to_dict() for b in self.bounds],
            "closure": _opt(self.closure),
            "curve": None if self.curve is None else {k: list(v) for k, v in self.curve.items()},
            "flags": list(self.flags),
        }
        if timings:
            d["timings"] = dict(self.timings)
        return d

    def to_json(self, timings=True) -> str:
        # Infinity / NaN are kept (Python's json reads them back)
        return json.dumps(self.to_dict(timings), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d):
        return cls(
            config=RunConfig.from_dict(d["config"]),
            version=d["version"],
            verdicts=[ClassVerdict.from_dict(v) for v in d["verdicts"]],
            indices={k: (v["error"] if "error" in v else IndexEstimate.from_dict(v))
                     for k, v in d["indices"].items()},
            xh=LimitEstimate.from_dict(d["xh"]) if d["xh"] else None,
            bounds=[BoundCheck.from_dict(b) for b in d["bounds"]],
            closure=ClosureReport.from_dict(d["closure"]) if d["closure"] else None,
            curve=None if d["curve"] is None else {k: list(v) for k, v in d["curve"].items()},
            flags=list(d["flags"]),
            timings=dict(d.get("timings", {})),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


class _Clock:
    def __init__(self, report):
        self.report = report

    def __call__(self, name, fn, *args, **kw):
        t0 = time.perf_counter()
        out = fn(*args, **kw)
        self.report.timings[name] = time.perf_counter() - t0
        return out


def _indices(model, grid):
    out = {}
    for name, g in (("tail", model.log_tail), ("density", model.log_density), ("hazard", model.log_hazard)):
        try:
            out[name] = matuszewska_indices(g, grid)
        except DegenerateRatio as exc:
            # a finding about the model, reported in place; range errors propagate
            out[name] = f"{type(exc).__name__}: {exc}"
    return out


def _xh_flags(xh, settings):
    flags = []
    if xh.prior_upper is not None and xh.upper > (1 + settings.drift) * xh.prior_upper and not xh.trend <= 0:
        flags.append("M2 unbounded")
    if xh.upper < settings.tol_m:
        flags.append("M1 zero")
    return flags


def _default_bounds(model, grid, indices):
    """Hazard bounds at representative parameters inside the hypotheses, where they exist."""
    out = []
    dens = indices.get("density")
    if not isinstance(dens, IndexEstimate):
        return out
    if math.isfinite(dens.delta) and dens.delta > 1:
        out.append(check_hazard_lower_bound(model, 0.5 * (1.0 + dens.delta), grid))
    if math.isfinite(dens.gamma):
        for lam in (2.0, 10.0):
            out.append(check_hazard_upper_bound(model, dens.gamma + 0.5, lam, grid))
    return out


def _curve_value(v):
    v = float(v)
    return v if math.isfinite(v) or math.isinf(v) else float("nan")


def run(config: RunConfig) -> Report:
    """Execute a parsed configuration and return its report (nothing is written)."""
    report = Report(config)
    clock = _Clock(report)
    s = config.settings
    models = [build(m) for m in config.models]
    cmd = config.command
    if cmd == "classify":
        m = models[0]
        grid = config.grid_for(m)
        for cid, fn in (("E", lambda: test_E(m, grid, settings=s)),
                        ("D", lambda: test_D(m, grid, settings=s)),
                        ("L", lambda: test_L(m, grid, s)),
                        ("S", lambda: test_S(m, grid, settings=s, quad=config.quad)),
                        ("A", lambda: test_A(m, grid, s, config.quad)),
                        ("DcapA", lambda: test_DcapA(m, grid, s, config.quad)),
                        ("DcapL", lambda: test_DcapL(m, grid, s))):
            report.verdicts.append(clock(cid, fn))
    elif cmd == "indices":
        m = models[0]
        grid = config.grid_for(m)
        report.indices = clock("indices", _indices, m, grid)
        report.xh = clock("xh", xh_limits, m, grid)
        report.flags = _xh_flags(report.xh, s)
        for name, est in report.indices.items():
            if isinstance(est, IndexEstimate):
                report.flags += [f"{name}.{k}: {v}" for k, v in sorted(est.flags.items())]
        report.bounds = clock("bounds", _default_bounds, m, grid, report.indices)
    elif cmd == "convolve":
        conv = ConvolvedModel.of(models[0], models[1], config.quad)
        grid = config.grid_for(conv)
        xs = grid.points()

        def curve():
            ld = np.asarray(conv.log_density(xs), dtype=float)
            lt = np.asarray(conv.log_tail(xs), dtype=float)
            ms = np.asarray(max_sum_ratio(models[0], models[1], xs, config.quad), dtype=float)
            return {"x": xs, "density": np.exp(ld), "tail": np.exp(lt),
                    "hazard": np.exp(ld - lt), "max_sum_ratio": ms}

        cols = clock("curve", curve)
        report.curve = {k: [_curve_value(v) for v in cols[k]] for k in CONVOLVE_HEADER}
    elif cmd == "pitman":
        m = models[0]
        grid = config.grid_for(m)
        xs = grid.points()

        def curve():
            cols = {"x": [float(x) for x in xs]}
            for kappa in s.kappas:
                lv, top = log_pitman_integral(m, kappa, xs, config.quad)
                vals = np.where(top > 700.0, np.inf, np.exp(np.minimum(lv, 700.0)))
                cols[f"pitman_kappa_{kappa:g}"] = [_curve_value(v) for v in vals]
                if np.any(top > 700.0):
                    report.flags.append(f"kappa={kappa:g}: exponent overflow at some x")
            return cols

        report.curve = clock("curve", curve)
        report.verdicts.append(clock("S_pitman", test_S, m, grid, "Pitman", s, config.quad))
    elif cmd == "verify":
        if len(models) == 2:
            grid = None if not config.grid else config.grid_for(ConvolvedModel.of(*models, config.quad))
            report.closure = clock("closure", verify_convolution_closure, models[0], models[1],
                                   grid, config.quad, s)
            if not report.closure.consistent:
                report.flags += report.closure.notes
        else:
            m = models[0]
            grid = config.grid_for(m)
            report.indices = clock("indices", _indices, m, grid)
            report.xh = xh_limits(m, grid)
            report.bounds = clock("bounds", _default_bounds, m, grid, report.indices)
            report.flags += [f"{b.bound_name} fails" for b in report.bounds if not b.holds]
    return report


# --- rendering ------------------------------------------------------------------


def _fmt(v):
    return "-" if v is None else f"{v:.6g}"


def render_text(report: Report) -> str:
    lines = [f"tailclass {report.version}: {report.config.command} "
             + " ".join(str(m) for m in report.config.models)]
    for v in report.verdicts:
        lines.append(f"  {v.class_id:<6} {v.verdict.value:<13} [{v.route}]")
        for e in v.evidence:
            lines.append(f"           {e.name}: [{_fmt(e.lower)}, {_fmt(e.upper)}] trend {_fmt(e.trend)}")
        for n in v.notes:
            lines.append(f"           note: {n}")
    for name, est in report.indices.items():
        if isinstance(est, IndexEstimate):
            lines.append(f"  index {name:<8} gamma {_fmt(est.gamma)}  delta {_fmt(est.delta)}  "
                         f"residual {_fmt(est.residual)}  {est.flags or ''}")
        else:
            lines.append(f"  index {name:<8} {est}")
    if report.xh is not None:
        lines.append(f"  x h(x) window [{_fmt(report.xh.lower)}, {_fmt(report.xh.upper)}] "
                     f"trend {_fmt(report.xh.trend)}")
    for b in report.bounds:
        lines.append(f"  {b.bound_name} {b.parameters}: rhs {_fmt(b.rhs)} holds={b.holds} "
                     f"C={_fmt(b.fitted.C)} x0={_fmt(b.fitted.x0)} {b.flags or ''}")
    if report.closure is not None:
        c = report.closure
        p = c.preconditions
        lines.append(f"  preconditions satisfied={p.satisfied} witness={_fmt(p.witness_delta)} "
                     f"indices f1 {_fmt(p.delta_f1_est)}, tail1 {_fmt(p.delta_tail1_est)}, "
                     f"tail2 {_fmt(p.delta_tail2_est)}")
        for r in p.reasons:
            lines.append(f"    reason: {r}")
        lines.append(f"  convolution E: {c.convolution_e.verdict.value}")
        if c.convolution_dcapa is not None:
            lines.append(f"  convolution DcapA: {c.convolution_dcapa.verdict.value}")
        lines.append(f"  max-sum ratio window [{_fmt(c.max_sum.lower)}, {_fmt(c.max_sum.upper)}] "
                     f"trend {_fmt(c.max_sum.trend)}")
        if c.tail_index is not None:
            lines.append(f"  convolution tail index gamma {_fmt(c.tail_index.gamma)} delta {_fmt(c.tail_index.delta)}")
        lines.append(f"  consistent={c.consistent}")
    if report.curve is not None:
        keys = list(report.curve)
        lines.append("  " + "  ".join(f"{k:>14}" for k in keys))
        for row in zip(*(report.curve[k] for k in keys)):
            lines.append("  " + "  ".join(f"{v:>14.6g}" for v in row))
    for f in report.flags:
        lines.append(f"  flag: {f}")
    return "\n".join(lines) + "\n"


def render_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    keys = list(report.curve)
    w.writerow(keys)
    for row in zip(*(report.curve[k] for k in keys)):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return report.to_json() + "\n"
    if fmt == "csv":
        return render_csv(report)
    return render_text(report)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_config(argv)
    except UsageError as exc:
        print(f"tailclass: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = run(config)
        text = render(report, config.output)
    except (TailClassError, ArithmeticError, ValueError) as exc:
        print(f"tailclass: {config.command} {' '.join(map(str, config.models))}: "
              f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_INCONCLUSIVE if report.inconclusive else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
