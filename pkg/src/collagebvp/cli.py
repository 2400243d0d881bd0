"""Command-line front end.

Commands: ``forward`` (error table for a list of basis dimensions),
``inverse`` (coefficient recovery from discrete targets), and the presets
``table1`` / ``table2`` which run the same pipelines on the built-in
benchmark problem.  Configuration is a line-oriented ``key = value`` file;
expression values are quoted.  Exit codes: 0 success, 2 configuration
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from dataclasses import dataclass

import numpy as np

from .expr import EvalDomainError, ParseError, parse
from .forward import ProblemSpec, error_report, reference_problem, solve_forward
from .inverse import MODES, BoxConstraint, MinimizeSettings, build_residual, minimize
from .linalg import NotSPDError

__all__ = [
    "ConfigError",
    "RunConfig",
    "cmd_forward",
    "cmd_inverse",
    "load_config",
    "main",
    "parse_config",
    "plot_text",
]

FORWARD_HEADER = "m,err_u_L2,err_v_L2,err_du_L2,err_dv_L2,err_u_H1,err_v_H1"
INVERSE_HEADER = "target_m,n,mode,lambda1_hat,lambda2_hat,objective_value"

DEFAULT_M_LIST = (3, 7, 15, 31, 63)
TABLE2_M_LIST = (3, 7, 15, 31)
DEFAULT_BOX = (0.5, 3.0, 0.5, 3.0)

_FLOAT_KEYS = ("lambda1", "lambda2", "alpha1", "alpha2", "beta1", "beta2")
_EXPR_KEYS = ("f", "g", "exact_u", "exact_v", "exact_du", "exact_dv")
_INT_KEYS = ("n", "grid")
_REQUIRED_KEYS = _FLOAT_KEYS + ("f", "g")
_KNOWN_KEYS = set(_FLOAT_KEYS) | set(_EXPR_KEYS) | set(_INT_KEYS) | {
    "m_list",
    "box",
    "mode",
    "out",
}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    problem: ProblemSpec
    m_list: tuple[int, ...] = DEFAULT_M_LIST
    n: int = 7
    box: BoxConstraint = dataclasses.field(
        default_factory=lambda: BoxConstraint(*DEFAULT_BOX)
    )
    mode: str = "l2"
    grid: int = 251
    out: str | None = None


def _fmt(value: float) -> str:
    return format(float(value), ".9g")


def _parse_list(raw, lineno, caster):
    raw = raw.strip()
    if not (raw.startswith("[") and raw.endswith("]")):
        raise ConfigError(f"line {lineno}: expected a bracketed list, got {raw!r}")
    body = raw[1:-1].strip()
    if not body:
        return ()
    try:
        return tuple(caster(item.strip()) for item in body.split(","))
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: bad list entry: {exc}") from exc


def _parse_entry(key, raw, lineno, values):
    if key in _FLOAT_KEYS:
        try:
            values[key] = float(raw)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad number for {key!r}: {raw!r}") from exc
    elif key in _EXPR_KEYS:
        if not (raw.startswith('"') and raw.endswith('"') and len(raw) >= 2):
            raise ConfigError(f"line {lineno}: {key!r} must be a quoted expression")
        try:
            values[key] = parse(raw[1:-1])
        except ParseError as exc:
            raise ConfigError(f"line {lineno}: expression for {key!r}: {exc}") from exc
    elif key in _INT_KEYS:
        try:
            values[key] = int(raw)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad integer for {key!r}: {raw!r}") from exc
    elif key == "m_list":
        values[key] = _parse_list(raw, lineno, int)
    elif key == "box":
        entries = _parse_list(raw, lineno, float)
        if len(entries) != 4:
            raise ConfigError(f"line {lineno}: box needs 4 numbers, got {len(entries)}")
        values[key] = entries
    elif key == "mode":
        mode = raw.strip('"')
        if mode not in MODES:
            raise ConfigError(
                f"line {lineno}: unknown mode {mode!r}; choose from {', '.join(MODES)}"
            )
        values[key] = mode
    elif key == "out":
        values[key] = raw.strip('"')
    else:
        raise ConfigError(f"line {lineno}: unknown key {key!r}")


def parse_config(text: str) -> RunConfig:
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        _parse_entry(key, raw, lineno, values)

    for key in _REQUIRED_KEYS:
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")

    try:
        problem = ProblemSpec(
            lam1=values["lambda1"],
            lam2=values["lambda2"],
            alpha1=values["alpha1"],
            alpha2=values["alpha2"],
            beta1=values["beta1"],
            beta2=values["beta2"],
            f=values["f"],
            g=values["g"],
            exact_u=values.get("exact_u"),
            exact_v=values.get("exact_v"),
            exact_du=values.get("exact_du"),
            exact_dv=values.get("exact_dv"),
        )
        box = BoxConstraint(*values.get("box", DEFAULT_BOX))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    m_list = tuple(values.get("m_list", DEFAULT_M_LIST))
    if not m_list:
        raise ConfigError("m_list must be non-empty")
    for m in m_list:
        if not 1 <= m <= 256:
            raise ConfigError(f"m_list entries must be in 1..256, got {m}")
    n = values.get("n", 7)
    if n < 1:
        raise ConfigError("n must be >= 1")
    grid = values.get("grid", 251)
    if grid < 2:
        raise ConfigError("grid must be >= 2")
    return RunConfig(
        problem=problem,
        m_list=m_list,
        n=n,
        box=box,
        mode=values.get("mode", "l2"),
        grid=grid,
        out=values.get("out"),
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    return parse_config(text)


def cmd_forward(config: RunConfig) -> str:
    """CSV error table, one row per requested dimension."""
    problem = config.problem
    missing = [
        name
        for name in ("exact_u", "exact_v", "exact_du", "exact_dv")
        if getattr(problem, name) is None
    ]
    if missing:
        raise ConfigError(
            "forward error columns require keys: " + ", ".join(missing)
        )
    rows = [FORWARD_HEADER]
    for m in config.m_list:
        sol = solve_forward(problem, m)
        report = error_report(
            sol, problem.exact_u, problem.exact_v, problem.exact_du, problem.exact_dv
        )
        rows.append(f"{m}," + ",".join(_fmt(v) for v in report.as_tuple()))
    return "\n".join(rows) + "\n"


def plot_text(config: RunConfig, samples: int = 1024) -> str:
    """Gnuplot-style sampled data, one block per dimension."""
    problem = config.problem
    if problem.exact_u is None or problem.exact_v is None:
        raise ConfigError("plot data requires exact_u and exact_v")
    x = np.linspace(0.0, 1.0, samples)
    exact_u = problem.exact_u(x)
    exact_v = problem.exact_v(x)
    blocks = []
    for m in config.m_list:
        sol = solve_forward(problem, m)
        u, v, du, dv = sol.evaluate(x)
        lines = [f"# m = {m}", "# x u_m v_m u v du_m dv_m"]
        for i in range(samples):
            lines.append(
                " ".join(
                    _fmt(value)
                    for value in (x[i], u[i], v[i], exact_u[i], exact_v[i], du[i], dv[i])
                )
            )
        blocks.append("\n".join(lines))
    return "\n\n\n".join(blocks) + "\n"


def cmd_inverse(config: RunConfig) -> str:
    """CSV recovery table: solve forward at the configured coefficients,
    then recover them from each target by residual minimisation."""
    problem = config.problem
    rows = [INVERSE_HEADER]
    settings = MinimizeSettings(grid_points=config.grid)
    for m in config.m_list:
        target = solve_forward(problem, m)
        model = build_residual(target, config.n, problem.f, problem.g)
        result = minimize(model, config.box, config.mode, settings)
        rows.append(
            f"{m},{config.n},{config.mode},"
            f"{_fmt(result.lam1)},{_fmt(result.lam2)},{_fmt(result.value)}"
        )
    return "\n".join(rows) + "\n"


def _reference_config() -> RunConfig:
    return RunConfig(problem=reference_problem())


def _apply_overrides(config: RunConfig, args) -> RunConfig:
    updates = {}
    if getattr(args, "mode", None):
        updates["mode"] = args.mode
    if getattr(args, "n", None):
        updates["n"] = args.n
    if getattr(args, "grid", None):
        updates["grid"] = args.grid
    if getattr(args, "out", None):
        updates["out"] = args.out
    return dataclasses.replace(config, **updates) if updates else config


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _run_forward_like(config, args) -> int:
    config = _apply_overrides(config, args)
    _emit(cmd_forward(config), config.out)
    if getattr(args, "plot", None):
        with open(args.plot, "w", encoding="utf-8", newline="") as handle:
            handle.write(plot_text(config))
    return 0


def _run_inverse_like(config, args) -> int:
    config = _apply_overrides(config, args)
    _emit(cmd_inverse(config), config.out)
    return 0


def _handle_forward(args) -> int:
    return _run_forward_like(load_config(args.config), args)


def _handle_inverse(args) -> int:
    return _run_inverse_like(load_config(args.config), args)


def _handle_table1(args) -> int:
    return _run_forward_like(_reference_config(), args)


def _handle_table2(args) -> int:
    config = dataclasses.replace(_reference_config(), m_list=TABLE2_M_LIST)
    return _run_inverse_like(config, args)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="collagebvp",
        description="Tent-basis Galerkin solver and coefficient recovery "
        "for a coupled pair of 1-D boundary value problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_config):
        if needs_config:
            p.add_argument("--config", required=True, help="path to a key = value config file")
        p.add_argument("--out", help="output CSV path (default: stdout)")
        p.add_argument("--mode", choices=MODES, help="objective mode override")
        p.add_argument("--n", type=int, help="number of test functions override")
        p.add_argument("--grid", type=int, help="grid resolution override")

    p_forward = sub.add_parser("forward", help="error table for configured dimensions")
    add_common(p_forward, needs_config=True)
    p_forward.add_argument("--plot", help="also write sampled plot data to this path")
    p_forward.set_defaults(func=_handle_forward)

    p_inverse = sub.add_parser("inverse", help="recover coefficients from targets")
    add_common(p_inverse, needs_config=True)
    p_inverse.set_defaults(func=_handle_inverse)

    p_t1 = sub.add_parser("table1", help="forward error table for the benchmark problem")
    add_common(p_t1, needs_config=False)
    p_t1.add_argument("--plot", help="also write sampled plot data to this path")
    p_t1.set_defaults(func=_handle_table1)

    p_t2 = sub.add_parser("table2", help="coefficient recovery for the benchmark problem")
    add_common(p_t2, needs_config=False)
    p_t2.set_defaults(func=_handle_table2)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (EvalDomainError, NotSPDError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
