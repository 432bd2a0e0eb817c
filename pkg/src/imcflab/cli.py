"""Command-line front end: ``imcflab run | check | convergence``.

Settings come from built-in defaults, then an optional ``--config`` file of
``key = value`` lines (keys mirror the long flags), then explicit flags.

Exit codes: 0 all checks pass, 1 a check failed, 2 the flow aborted,
3 bad configuration.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .discretization import Grid
from .errors import ImcfError, InvalidSpec, LostMeanConvexity
from .flow import StepControl, run
from .geometry import curvatures, reilly_terms, snapshot
from .monitors import (
    CSV_COLUMNS,
    DEFAULT_EPS_SCALE,
    FlowTrace,
    row_values,
    static_report,
    trace_report,
)
from .report import CheckReport
from .shapes import KINDS, DEFAULT_H_MIN, ShapeSpec, build, validate
from .svgplot import write_trace_svg

log = logging.getLogger("imcflab")

EXIT_OK, EXIT_CHECK, EXIT_ABORT, EXIT_CONFIG = 0, 1, 2, 3
QUANTITIES = ("h_error", "reilly", "area_law")
MIN_CONVERGENCE_N = 33
ORDER_TARGET = 1.9
DEFAULT_SAMPLE_EVERY = 0.05


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    shape: ShapeSpec = field(default_factory=ShapeSpec)
    t_end: float = 1.0
    sample_every: float | None = None
    ctl: StepControl = field(default_factory=StepControl)
    eps_quad_scale: float = DEFAULT_EPS_SCALE
    mono_tol: float | None = None
    csv: Path | None = None
    report: Path | None = None
    svg: Path | None = None
    levels: int = 4
    quantity: str = "h_error"

    def check(self) -> None:
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ConfigError(f"t-end must be positive, got {self.t_end}")
        se = self.sample_every
        if se is not None and not 0 < se <= self.t_end:
            raise ConfigError("sample-every must lie in (0, t-end]")
        if not self.eps_quad_scale > 0:
            raise ConfigError("eps-quad-scale must be positive")
        for p in (self.csv, self.report, self.svg):
            if p is not None and not p.resolve().parent.is_dir():
                raise ConfigError(f"output directory for {p} does not exist")


# ------------------------------------------------------------------ parsing

_FLOAT_KEYS = {
    "radius", "offset", "shift", "t-end", "sample-every", "cfl", "dt-max", "h-min",
    "eps-quad-scale", "mono-tol",
}
_INT_KEYS = {"n", "N", "levels"}
_STR_KEYS = {"shape", "method", "quantity"}
_PATH_KEYS = {"csv", "report", "svg"}
_OTHER_KEYS = {"axes", "perturb"}
KNOWN_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS | _PATH_KEYS | _OTHER_KEYS


def parse_perturb(text: str) -> tuple[int, float]:
    try:
        k, amp = text.split(":")
        return int(k), float(amp)
    except ValueError:
        raise ConfigError(f"perturbation must look like k:amplitude, got {text!r}") from None


def parse_axes(text: str) -> tuple[float, float]:
    try:
        a, b = (float(x) for x in text.replace(" ", "").split(","))
    except ValueError:
        raise ConfigError(f"axes must look like a,b, got {text!r}") from None
    return a, b


def read_config_file(path: Path) -> dict:
    """Parse ``key = value`` lines; ``perturb`` may repeat and accumulates."""
    values: dict = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key == "perturb":
            values.setdefault("perturb", []).extend(v for v in value.split(",") if v.strip())
        else:
            values[key] = value
    return values


def _coerce(key: str, value):
    if value is None:
        return None
    try:
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _INT_KEYS:
            return int(value)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {value!r}") from None
    if key in _PATH_KEYS:
        return Path(value)
    if key == "axes":
        return value if isinstance(value, tuple) else parse_axes(value)
    if key == "perturb":
        return tuple(v if isinstance(v, tuple) else parse_perturb(v.strip()) for v in value)
    return value


def build_config(args: argparse.Namespace) -> RunConfig:
    merged: dict = {}
    if getattr(args, "config", None):
        merged.update(read_config_file(args.config))
    for key in KNOWN_KEYS:
        flag_value = getattr(args, key.replace("-", "_"), None)
        if flag_value is not None:
            merged[key] = flag_value
    v = {k: _coerce(k, val) for k, val in merged.items()}

    defaults = ShapeSpec()
    n = v.get("n", defaults.n)
    shape = ShapeSpec(
        kind=v.get("shape", defaults.kind),
        n=n,
        N=v.get("N", 128 if n == 2 else defaults.N),
        radius=v.get("radius", defaults.radius),
        offset=v.get("offset", defaults.offset),
        axes=v.get("axes", defaults.axes),
        perturb=v.get("perturb", ()),
        shift=v.get("shift", defaults.shift),
    )
    try:
        shape.check()
        ctl = StepControl(
            cfl=v.get("cfl", 0.2),
            dt_max=v.get("dt-max", 1e-2),
            h_min=v.get("h-min", DEFAULT_H_MIN),
            method=v.get("method", "rk4"),
        )
    except InvalidSpec as exc:
        raise ConfigError(str(exc)) from None
    cfg = RunConfig(
        shape=shape,
        t_end=v.get("t-end", 1.0),
        sample_every=v.get("sample-every"),
        ctl=ctl,
        eps_quad_scale=v.get("eps-quad-scale", DEFAULT_EPS_SCALE),
        mono_tol=v.get("mono-tol"),
        csv=v.get("csv"),
        report=v.get("report"),
        svg=v.get("svg"),
        levels=v.get("levels", 4),
        quantity=v.get("quantity", "h_error"),
    )
    cfg.check()
    return cfg


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    g = common.add_argument_group("shape")
    g.add_argument("--config", type=Path, help="key = value file; flags override it")
    g.add_argument("--shape", choices=KINDS)
    g.add_argument("--n", type=int, help="ambient dimension (2 = plane curve)")
    g.add_argument("--N", type=int, help="number of grid nodes")
    g.add_argument("--radius", type=float)
    g.add_argument("--offset", type=float, help="distance from the star center to O")
    g.add_argument("--axes", type=parse_axes, help="spheroid semi-axes a,b")
    g.add_argument("--perturb", action="append", type=parse_perturb, metavar="K:AMP")
    g.add_argument("--shift", type=float, help="center shift for shifted_sphere")
    f = common.add_argument_group("flow")
    f.add_argument("--t-end", type=float)
    f.add_argument("--sample-every", type=float)
    f.add_argument("--cfl", type=float)
    f.add_argument("--dt-max", type=float)
    f.add_argument("--h-min", type=float)
    f.add_argument("--method", choices=("rk4", "euler"))
    t = common.add_argument_group("tolerances and output")
    t.add_argument("--eps-quad-scale", type=float)
    t.add_argument("--mono-tol", type=float)
    t.add_argument("--csv", type=Path)
    t.add_argument("--report", type=Path)
    t.add_argument("--svg", type=Path)
    t.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="imcflab", description="Inverse mean curvature flow laboratory.", allow_abbrev=False
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="evolve a shape and check the trace")
    sub.add_parser("check", parents=[common], help="static inequality and identity checks")
    conv = sub.add_parser("convergence", parents=[common], help="grid refinement study")
    conv.add_argument("--levels", type=int)
    conv.add_argument("--quantity", choices=QUANTITIES)
    return parser


# ------------------------------------------------------------------ output


def format_value(x: float) -> str:
    return repr(float(x))


def write_trace_csv(trace: FlowTrace, path: Path) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for row in trace.rows:
        lines.append(",".join(format_value(x) for x in row_values(row)))
    Path(path).write_text("\n".join(lines) + "\n")


def emit_report(report: CheckReport, header: list[str], path: Path | None) -> None:
    text = "".join(f"# {h}\n" for h in header) + report.to_text()
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _shape_header(cfg: RunConfig) -> list[str]:
    s = cfg.shape
    desc = f"shape={s.kind} n={s.n} N={s.N} radius={s.radius!r} offset={s.offset!r}"
    if s.kind == "spheroid":
        desc += f" axes={s.axes[0]!r},{s.axes[1]!r}"
    if s.perturb:
        desc += " perturb=" + ",".join(f"{k}:{a!r}" for k, a in s.perturb)
    if s.kind == "shifted_sphere":
        desc += f" shift={s.shift!r}"
    return [desc]


def _fail_summary(report: CheckReport) -> None:
    for c in report.failures():
        print(f"imcflab: check failed: {c.name} (residual {c.residual:.6e}, tolerance {c.tolerance:.6e})",
              file=sys.stderr)


# ------------------------------------------------------------------ commands


def cmd_run(cfg: RunConfig) -> int:
    shape = build(cfg.shape)
    report = validate(shape, cfg.ctl.h_min)
    header = _shape_header(cfg)
    if not report.overall:
        emit_report(report, header + ["initial shape rejected"], cfg.report)
        _fail_summary(report)
        return EXIT_CHECK
    sample_every = cfg.sample_every or min(DEFAULT_SAMPLE_EVERY, cfg.t_end)
    trace = run(shape, cfg.t_end, cfg.ctl, sample_every)
    report.extend(trace_report(trace, cfg.mono_tol, cfg.eps_quad_scale))
    header.append(f"t_end={cfg.t_end!r} sample_every={sample_every!r} method={cfg.ctl.method} "
                  f"cfl={cfg.ctl.cfl!r} steps={trace.step_count}")
    header.append(f"status={trace.status}" + (f" ({trace.reason})" if trace.reason else ""))
    if trace.rows:
        header.append(f"Q(0)={trace.rows[0].Q:.6e} Q({trace.rows[-1].t:.6g})={trace.rows[-1].Q:.6e}")
    if cfg.csv:
        write_trace_csv(trace, cfg.csv)
    if cfg.svg and trace.rows:
        write_trace_svg(trace, cfg.svg, title=header[0])
    emit_report(report, header, cfg.report)
    if not trace.completed:
        print(f"imcflab: flow aborted: {trace.reason}", file=sys.stderr)
        return EXIT_ABORT
    if not report.overall:
        _fail_summary(report)
        return EXIT_CHECK
    return EXIT_OK


def cmd_check(cfg: RunConfig) -> int:
    shape = build(cfg.shape)
    report = validate(shape, cfg.ctl.h_min)
    header = _shape_header(cfg)
    if not report.overall:
        emit_report(report, header + ["shape rejected"], cfg.report)
        _fail_summary(report)
        return EXIT_CHECK
    report.extend(static_report(shape, cfg.eps_quad_scale))
    if cfg.csv:
        from .flow import summarize

        trace = FlowTrace(n=shape.n, N=shape.grid.N, h=shape.grid.h, t_end=0.0, sample_every=0.0)
        trace.rows.append(summarize(shape, 0.0, 0.0))
        write_trace_csv(trace, cfg.csv)
    emit_report(report, header, cfg.report)
    if not report.overall:
        _fail_summary(report)
        return EXIT_CHECK
    return EXIT_OK


def convergence_residual(spec: ShapeSpec, quantity: str, cfg: RunConfig) -> float:
    shape = build(spec)
    if quantity == "h_error":
        exact = (spec.n - 1) / spec.radius
        return float(np.max(np.abs(curvatures(shape).H - exact)))
    if quantity == "reilly":
        lhs, rhs = reilly_terms(shape, snapshot(shape, with_inv_h=False))
        return abs(lhs - rhs) / abs(lhs)
    trace = run(shape, cfg.t_end, cfg.ctl, cfg.t_end)
    if not trace.completed:
        raise LostMeanConvexity(math.nan, cfg.ctl.h_min)
    a0, a1 = trace.rows[0].area, trace.rows[-1].area
    return abs(math.log(a1 / a0) - cfg.t_end)


def fit_order(hs, residuals) -> float:
    """Least-squares slope of log(residual) against log(h)."""
    return float(np.polyfit(np.log(hs), np.log(residuals), 1)[0])


def cmd_convergence(cfg: RunConfig) -> int:
    if cfg.levels < 3:
        raise ConfigError("convergence needs levels >= 3")
    if cfg.shape.N < MIN_CONVERGENCE_N:
        raise ConfigError(f"convergence needs a base resolution N >= {MIN_CONVERGENCE_N}")
    if cfg.quantity not in QUANTITIES:
        raise ConfigError(f"quantity must be one of {QUANTITIES}")
    if cfg.quantity == "h_error" and cfg.shape.kind not in ("sphere", "shifted_sphere"):
        raise ConfigError("h_error needs a round shape (sphere or shifted_sphere)")

    spec = cfg.shape
    rows = []
    for level in range(cfg.levels):
        grid = Grid.for_dimension(spec.n, spec.N)
        res = convergence_residual(spec, cfg.quantity, cfg)
        rows.append((level, spec.N, grid.h, res))
        spec = replace(spec, N=2 * spec.N if spec.n == 2 else 2 * spec.N - 1)

    hs = [r[2] for r in rows]
    res = [r[3] for r in rows]
    exact = max(res) <= 1e-13
    order = math.nan if exact or min(res) <= 0 else fit_order(hs, res)
    lines = ["level,N,h,residual,ratio"]
    for i, (level, N, h, r) in enumerate(rows):
        ratio = res[i - 1] / r if i and r > 0 else math.nan
        lines.append(f"{level},{N},{format_value(h)},{format_value(r)},{format_value(ratio)}")
    text = "\n".join(lines) + "\n"
    if cfg.csv:
        cfg.csv.write_text(text)
    else:
        sys.stdout.write(text)
    summary = "exact at every level" if exact else f"observed order p = {order:.4f}"
    print(f"imcflab: {cfg.quantity}: {summary}", file=sys.stderr)
    if exact or order >= ORDER_TARGET:
        return EXIT_OK
    return EXIT_CHECK


COMMANDS = {"run": cmd_run, "check": cmd_check, "convergence": cmd_convergence}


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.captureWarnings(True)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="imcflab: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = build_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"imcflab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidSpec as exc:
        print(f"imcflab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LostMeanConvexity as exc:
        print(f"imcflab: lost mean convexity: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except ImcfError as exc:
        print(f"imcflab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
