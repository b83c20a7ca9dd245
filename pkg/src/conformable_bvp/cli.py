"""Batch command line: solve-linear, solve-nonlinear, eigen, lyapunov, greens, convergence.

Each run writes ``<command>.json`` (inputs echoed, outputs, timings, tool
version) and/or ``<command>.csv`` into ``--out-dir``, plus ``<command>.dat``
plot data with ``--plot-data``. Values come from an INI file section named
after the command (``--config``) and are overridden by flags.

Exit status: 0 success, 2 validation error, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .core import DomainError, Interval, Order
from .expressions import ExpressionError, parse_expression
from .linear import GreenKernel, LinearProblem, check_green_bounds, solve_linear
from .nonlinear import Bracket, BracketError, NonlinearProblem, SolveConfig, solve_nonlinear
from .spectral import EigenConvergenceError, lyapunov_check, principal_eigenvalue

TOOL = "conformable-bvp"
COMMANDS = ("solve-linear", "solve-nonlinear", "eigen", "lyapunov", "greens", "convergence")
EXIT_OK, EXIT_VALIDATION, EXIT_NONCONVERGENCE = 0, 2, 3


class ValidationError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    a: float = 0.0
    b: float = 1.0
    alpha: float = 1.5
    y: str = "const:1"
    f: Optional[str] = None
    q: str = "const:1"
    lower: Optional[str] = None
    upper: Optional[str] = None
    n_grid: int = 201
    rule_size: int = 64
    n: int = 256
    tol: float = 1e-8
    max_iter: int = 500
    damping: float = 0.5
    method: str = "damped_picard"
    grid: str = "uniform"
    target: str = "linear"
    sizes: str = "8,16,32,64"
    out_dir: str = "."
    format: str = "both"
    plot_data: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        try:
            Interval(self.a, self.b)
            Order(self.alpha)
        except DomainError as exc:
            raise ValidationError(str(exc)) from None
        if self.format not in ("csv", "json", "both"):
            raise ValidationError(f"format must be csv, json or both, got {self.format!r}")
        for name, least in (("n_grid", 5), ("rule_size", 2), ("n", 8), ("max_iter", 1)):
            if getattr(self, name) < least:
                raise ValidationError(f"{name} must be >= {least}, got {getattr(self, name)}")
        if self.command == "solve-nonlinear":
            missing = [k for k in ("f", "lower", "upper") if getattr(self, k) is None]
            if missing:
                raise ValidationError(f"solve-nonlinear needs {', '.join('--' + m for m in missing)}")
        if self.command == "convergence" and self.target not in ("linear", "eigen"):
            raise ValidationError(f"convergence target must be linear or eigen, got {self.target!r}")
        self.size_list()

    def size_list(self) -> list[int]:
        try:
            sizes = [int(s) for s in self.sizes.split(",")]
        except ValueError:
            raise ValidationError(f"sizes must be comma-separated integers, got {self.sizes!r}") from None
        if not sizes or min(sizes) < 2:
            raise ValidationError("sizes must be integers >= 2")
        return sizes


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    if kind == "float":
        return float(raw)
    if kind == "int":
        return int(raw)
    if kind == "bool":
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    return raw


def read_config_file(path: str, command: str) -> dict:
    """Values from the DEFAULT section and the section named after the command."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        parser.read_string(text, source=path)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise ValidationError(f"config {path}: {exc}") from None
    section = parser[command] if parser.has_section(command) else parser.defaults()
    values = {}
    for key, raw in section.items():
        name = key.replace("-", "_")
        if name not in _FIELD_TYPES or name == "command":
            raise ValidationError(f"config {path}, line {_line_of(text, key)}: unknown field {key!r}")
        try:
            values[name] = _convert(name, raw)
        except ValueError as exc:
            raise ValidationError(
                f"config {path}, line {_line_of(text, key)}, field {key!r}: {exc}") from None
    return values


def _line_of(text: str, key: str) -> int:
    for i, line in enumerate(text.splitlines(), 1):
        if line.split("=")[0].split(":")[0].strip() == key:
            return i
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=TOOL, description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file; the section named after the command is used")
    common.add_argument("--a", type=float)
    common.add_argument("--b", type=float)
    common.add_argument("--alpha", type=float)
    common.add_argument("--rule-size", type=int)
    common.add_argument("--out-dir")
    common.add_argument("--format", choices=("csv", "json", "both"))
    common.add_argument("--plot-data", action="store_const", const=True, default=None)

    p = sub.add_parser("solve-linear", parents=[common], help="T_alpha u + y = 0 via the Green function")
    p.add_argument("--y")
    p.add_argument("--n-grid", type=int)
    p.add_argument("--grid", choices=("uniform", "cosine"))

    p = sub.add_parser("solve-nonlinear", parents=[common], help="fixed-point solve inside a bracket")
    p.add_argument("--f", help="right-hand side f(t, x)")
    p.add_argument("--lower")
    p.add_argument("--upper")
    p.add_argument("--n-grid", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--damping", type=float)
    p.add_argument("--method", choices=("picard", "damped_picard", "newton_collocation"))

    p = sub.add_parser("eigen", parents=[common], help="principal Dirichlet eigenvalue")
    p.add_argument("--n", type=int)
    p.add_argument("--n-grid", type=int)

    p = sub.add_parser("lyapunov", parents=[common], help="Lyapunov inequality check for q")
    p.add_argument("--q")

    p = sub.add_parser("greens", parents=[common], help="sample the Green function and check its bounds")
    p.add_argument("--n", type=int, help="samples per axis")

    p = sub.add_parser("convergence", parents=[common], help="refinement study")
    p.add_argument("--target", choices=("linear", "eigen"))
    p.add_argument("--sizes", help="comma-separated rule sizes (linear) or Nystrom sizes (eigen)")
    p.add_argument("--y")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if args.config:
        values.update(read_config_file(args.config, args.command))
    for name in _FIELD_TYPES:
        if name in ("command",):
            continue
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    if args.command == "greens" and "n" not in values:
        values["n"] = 100
    return RunConfig(command=args.command, **values)


# --------------------------------------------------------------------------- output


def fmt(value) -> str:
    """Shortest round-trip decimal for floats; lower-case booleans."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def plot_text(blocks: list[tuple[str, np.ndarray, np.ndarray]]) -> str:
    parts = []
    for name, xs, ys in blocks:
        lines = [f"# {name}"] + [f"{fmt(float(x))} {fmt(float(y))}" for x, y in zip(xs, ys)]
        parts.append("\n".join(lines))
    return "\n\n".join(parts) + "\n"


def _json_safe(value):
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if np.isfinite(value) else repr(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


# --------------------------------------------------------------------------- commands


def _t_function(spec: str, field: str):
    try:
        return parse_expression(spec, variables=("t",)).of_t()
    except ExpressionError as exc:
        raise ValidationError(f"--{field}: {exc}") from None


def _run_solve_linear(cfg: RunConfig, iv: Interval, order: Order):
    y = _t_function(cfg.y, "y")
    u = solve_linear(LinearProblem(iv, order, y), cfg.n_grid, cfg.rule_size, cfg.grid)
    outputs = {"u_sup_norm": u.sup_norm(), "n_grid": len(u)}
    return outputs, (["t", "u"], zip(u.nodes, u.values)), [("u", u.nodes, u.values)], EXIT_OK


def _run_solve_nonlinear(cfg: RunConfig, iv: Interval, order: Order):
    try:
        f = parse_expression(cfg.f)
    except ExpressionError as exc:
        raise ValidationError(f"--f: {exc}") from None
    lower = _t_function(cfg.lower, "lower")
    upper = _t_function(cfg.upper, "upper")
    try:
        problem = NonlinearProblem(iv, order, f)
        bracket = Bracket.from_functions(iv, lower, upper, cfg.n_grid)
        config = SolveConfig(max_iter=cfg.max_iter, tol=cfg.tol, damping=cfg.damping,
                             method=cfg.method, rule_size=cfg.rule_size)
        report = solve_nonlinear(problem, bracket, config)
    except BracketError as exc:
        raise ValidationError(f"bracket: {exc}") from None
    u = report.solution
    status = EXIT_OK if report.converged else EXIT_NONCONVERGENCE
    blocks = [("u", u.nodes, u.values), ("lower", u.nodes, bracket.lower.values),
              ("upper", u.nodes, bracket.upper.values)]
    return report.to_dict(), (["t", "u"], zip(u.nodes, u.values)), blocks, status


def _run_eigen(cfg: RunConfig, iv: Interval, order: Order):
    result = principal_eigenvalue(iv, order, cfg.n, cfg.n_grid)
    ef = result.eigenfunction
    outputs = {
        "lambda1": result.lambda1,
        "lambda1_extrapolated": result.lambda1_extrapolated,
        "estimated_error": result.estimated_error,
        "discretization_size": result.discretization_size,
        "power_iterations": result.iterations,
        "symmetric_gap": result.symmetric_gap,
    }
    return outputs, (["t", "u"], zip(ef.nodes, ef.values)), [("eigenfunction", ef.nodes, ef.values)], EXIT_OK


def _run_lyapunov(cfg: RunConfig, iv: Interval, order: Order):
    q = _t_function(cfg.q, "q")
    report = lyapunov_check(q, iv, order, cfg.rule_size)
    row = report.to_dict()
    header = ["a", "b", "alpha", "weighted_q_integral", "bound", "margin", "certified"]
    return row, (header, [[row[k] for k in header]]), [], EXIT_OK


def _run_greens(cfg: RunConfig, iv: Interval, order: Order):
    kernel = GreenKernel(iv)
    check = check_green_bounds(kernel, cfg.n)
    ts = np.linspace(iv.a, iv.b, cfg.n)
    tt, ss = np.meshgrid(ts, ts, indexing="ij")
    gg = kernel(tt, ss)
    outputs = {"passed": check.passed, "max_G": check.value, "bound": iv.length(), "witness": check.witness}
    rows = zip(tt.ravel(), ss.ravel(), gg.ravel())
    picks = np.unique(np.linspace(0, cfg.n - 1, 5).astype(int))
    blocks = [(f"G(t={fmt(float(ts[i]))}, s)", ts, gg[i]) for i in picks]
    return outputs, (["t", "s", "G"], rows), blocks, EXIT_OK


def _run_convergence(cfg: RunConfig, iv: Interval, order: Order):
    sizes = cfg.size_list()
    if cfg.target == "linear":
        problem = LinearProblem(iv, order, _t_function(cfg.y, "y"))
        ref = solve_linear(problem, cfg.n_grid, 4 * max(sizes))
        errors = [float(np.max(np.abs(solve_linear(problem, cfg.n_grid, n).values - ref.values)))
                  for n in sizes]
        reference = {"rule_size": 4 * max(sizes)}
    else:
        if min(sizes) < 8:
            raise ValidationError("eigen convergence sizes must be >= 8")
        results = [principal_eigenvalue(iv, order, n, cfg.n_grid) for n in sizes]
        lam_ref = results[-1].lambda1_extrapolated
        errors = [abs(r.lambda1 - lam_ref) for r in results]
        reference = {"lambda1_extrapolated": lam_ref}
    outputs = {"target": cfg.target, "sizes": sizes, "errors": errors, "reference": reference}
    return outputs, (["n", "error"], zip(sizes, errors)), [("error", np.array(sizes), np.array(errors))], EXIT_OK


RUNNERS = {
    "solve-linear": _run_solve_linear,
    "solve-nonlinear": _run_solve_nonlinear,
    "eigen": _run_eigen,
    "lyapunov": _run_lyapunov,
    "greens": _run_greens,
    "convergence": _run_convergence,
}


def run(cfg: RunConfig) -> int:
    """Execute one configured run and write its artifacts; returns the exit status."""
    cfg.validate()
    iv = Interval(cfg.a, cfg.b)
    order = Order(cfg.alpha)
    out_dir = Path(cfg.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ValidationError(f"cannot create output directory {out_dir}: {exc.strerror}") from None

    start = time.perf_counter()
    try:
        outputs, (header, rows), blocks, status = RUNNERS[cfg.command](cfg, iv, order)
    except EigenConvergenceError as exc:
        outputs, header, rows, blocks, status = {"error": str(exc)}, None, None, [], EXIT_NONCONVERGENCE
    elapsed = time.perf_counter() - start

    stem = cfg.command
    if cfg.format in ("csv", "both") and header is not None:
        (out_dir / f"{stem}.csv").write_bytes(csv_text(header, rows).encode("utf-8"))
    if cfg.format in ("json", "both"):
        report = {
            "tool": TOOL,
            "version": __version__,
            "command": cfg.command,
            "config": cfg.to_dict(),
            "outputs": outputs,
            "timings": {"total_seconds": elapsed},
            "status": {EXIT_OK: "ok", EXIT_NONCONVERGENCE: "non-convergence"}[status],
        }
        text = json.dumps(_json_safe(report), indent=2, sort_keys=True, ensure_ascii=False)
        (out_dir / f"{stem}.json").write_text(text + "\n", encoding="utf-8")
    if cfg.plot_data and blocks:
        (out_dir / f"{stem}.dat").write_text(plot_text(blocks), encoding="utf-8")
    return status


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        status = run(cfg)
    except (ValueError, ArithmeticError) as exc:
        # ValidationError, DomainError, ExpressionError and non-finite integrands
        print(f"{TOOL}: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if status == EXIT_NONCONVERGENCE:
        print(f"{TOOL}: numerical non-convergence; report written to {cfg.out_dir}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
