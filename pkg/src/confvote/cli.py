"""Experiment driver: scenario sweeps, bound tables, simulations and traces.

Usage::

    confvote bound    [--config FILE] [--sweep N=10,20,30] [--scenario heterogeneous,...]
    confvote simulate [--runs 2000] [--seed 0] ...
    confvote sweep    ...   # bound and simulation columns side by side
    confvote trace    --scenario heterogeneous --n-agents 4 --horizon 10

Every config key may come from a TOML file (``--config``) and be overridden on
the command line. Output is CSV, preceded by ``#`` comment lines that record
the resolved configuration. Exit status: 0 success, 2 configuration error,
3 numerical convergence failure.
"""

from __future__ import annotations

import argparse
import io
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Sequence

from .analytics import GroundTruth, bound_report
from .errors import ConfigError, ConvergenceError, DomainError
from .montecarlo import SimConfig, simulate, trace_confidence
from .population import DEFAULT_EPSILON, DEFAULT_KAPPA, ScenarioKind, build_scenario

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCHEMA_VERSION = 1
AXES = ("N", "T", "tau")
# Default sweep grids. The T grid and the tau values past 0.95 are choices made here;
# the high-tau points expose the regime where gated pools stop publishing.
DEFAULT_GRIDS: dict[str, tuple] = {
    "N": tuple(range(10, 101, 10)),
    "T": (5, 10, 20, 40, 80),
    "tau": tuple(round(0.05 * i, 2) for i in range(20)) + (0.99, 0.999, 0.9999),
}
ALL_SCENARIOS = tuple(ScenarioKind)

BOUND_COLUMNS = (
    "scenario", "axis", "axis_value", "N", "T", "tau", "p_critical",
    "expected_margin", "variance_budget", "lb_success", "ub_hallucination",
    "q_mean", "q_min_competent", "delta_p", "convergence_lb",
)
SIMULATE_COLUMNS = (
    "scenario", "axis", "axis_value", "N", "T", "tau", "p_critical", "ground_truth",
    "emp_success", "ci_lo", "ci_hi", "lb_success", "ub_hallucination", "runs", "seed",
)
SWEEP_COLUMNS = (
    "scenario", "axis", "axis_value", "N", "T", "tau", "p_critical",
    "expected_margin", "variance_budget", "lb_success", "ub_hallucination",
    "emp_success", "ci_lo", "ci_hi", "runs", "seed",
)
TRACE_COLUMNS = ("agent_id", "t", "confidence", "would_publish")


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved experiment settings; ``axis``/``grid`` name the single swept parameter."""

    scenarios: tuple[ScenarioKind, ...] = ALL_SCENARIOS
    axis: str = "N"
    grid: tuple = (50,)
    n_agents: int = 50
    horizon_T: int = 20
    tau: float = 0.5
    p_critical: float = 0.5
    kappa: float = DEFAULT_KAPPA
    epsilon: float = DEFAULT_EPSILON
    runs: int = 2000
    seed: int = 0
    ground_truth: GroundTruth = GroundTruth.OMEGA_STAR
    out: str | None = None
    workers: int = field(default=1, compare=False)

    def point(self, value) -> tuple[int, int, float]:
        """(N, T, tau) at one grid value."""
        n, t, tau = self.n_agents, self.horizon_T, self.tau
        if self.axis == "N":
            n = value
        elif self.axis == "T":
            t = value
        else:
            tau = value
        return n, t, tau

    def validate(self) -> ExperimentConfig:
        if not self.scenarios:
            raise ConfigError("field 'scenarios': at least one scenario is required")
        if self.axis not in AXES:
            raise ConfigError(f"field 'sweep': axis must be one of {', '.join(AXES)}, got {self.axis!r}")
        if not self.grid:
            raise ConfigError("field 'sweep': grid is empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ConfigError(f"field 'sweep': grid must be strictly increasing, got {list(self.grid)}")
        halves = any(s.is_heterogeneous for s in self.scenarios)
        checks: list[tuple[str, Any, Callable[[Any], bool], str]] = []
        for name, values in (("N", [self.n_agents]), ("T", [self.horizon_T]), ("tau", [self.tau])):
            if self.axis == name:
                values = list(self.grid)
                label = "sweep"
            else:
                label = {"N": "n_agents", "T": "horizon_T", "tau": "tau"}[name]
            for v in values:
                if name == "N":
                    checks.append((label, v, lambda v: _is_int(v) and v >= 1, "a positive integer"))
                    if halves:
                        checks.append((label, v, lambda v: v % 2 == 0,
                                       "even (heterogeneous pools split agents into equal halves)"))
                elif name == "T":
                    checks.append((label, v, lambda v: _is_int(v) and v >= 2, "an integer >= 2"))
                else:
                    checks.append((label, v, lambda v: _is_real(v) and 0.0 <= v < 1.0, "in [0, 1)"))
        checks += [
            ("p_critical", self.p_critical, lambda v: _is_real(v) and 0.0 < v < 1.0, "in (0, 1)"),
            ("kappa", self.kappa, lambda v: _is_real(v) and v > 0.0, "> 0"),
            ("epsilon", self.epsilon, lambda v: _is_real(v) and v > 0.0, "> 0"),
            ("runs", self.runs, lambda v: _is_int(v) and v >= 1, "a positive integer"),
            ("seed", self.seed, lambda v: _is_int(v) and 0 <= v < 1 << 64, "an unsigned 64-bit integer"),
            ("workers", self.workers, lambda v: _is_int(v) and v >= 1, "a positive integer"),
        ]
        for label, value, ok, what in checks:
            if not ok(value):
                raise ConfigError(f"field {label!r}: must be {what}, got {value!r}")
        return self

    def header_items(self) -> list[tuple[str, str]]:
        # execution-only settings (workers) are deliberately left out
        return [
            ("schema_version", str(SCHEMA_VERSION)),
            ("scenarios", ",".join(s.value for s in self.scenarios)),
            ("sweep", f"{self.axis}=" + ",".join(_fmt(v) for v in self.grid)),
            ("n_agents", _fmt(self.n_agents)),
            ("horizon_T", _fmt(self.horizon_T)),
            ("tau", _fmt(self.tau)),
            ("p_critical", _fmt(self.p_critical)),
            ("kappa", _fmt(self.kappa)),
            ("epsilon", _fmt(self.epsilon)),
            ("runs", _fmt(self.runs)),
            ("seed", _fmt(self.seed)),
            ("ground_truth", self.ground_truth.value),
        ]


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_real(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and v == v


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, ScenarioKind | GroundTruth):
        return value.value
    return str(value)


# --------------------------------------------------------------------------- parsing

_FILE_KEYS = {
    "schema_version", "scenarios", "sweep", "n_agents", "horizon_T", "tau", "p_critical",
    "kappa", "epsilon", "runs", "seed", "ground_truth", "out", "workers",
}


def parse_scenarios(text: str | Sequence[str]) -> tuple[ScenarioKind, ...]:
    names = text.split(",") if isinstance(text, str) else list(text)
    try:
        return tuple(ScenarioKind(n.strip()) for n in names if str(n).strip())
    except ValueError as exc:
        choices = ", ".join(s.value for s in ScenarioKind)
        raise ConfigError(f"field 'scenarios': {exc}; choose from {choices}") from None


def _coerce_grid_value(axis: str, raw: str):
    try:
        return float(raw) if axis == "tau" else int(raw)
    except ValueError:
        raise ConfigError(f"field 'sweep': cannot parse {raw!r} as a value for axis {axis}") from None


def parse_sweep(spec: str | dict) -> tuple[str, tuple]:
    """``"N=10,20"`` or ``{"axis": "N", "values": [10, 20]}``; a bare axis takes the default grid."""
    if isinstance(spec, dict):
        unknown = set(spec) - {"axis", "values"}
        if unknown:
            raise ConfigError(f"field 'sweep': unknown keys {sorted(unknown)}")
        axis = spec.get("axis")
        values = spec.get("values")
        if axis not in AXES:
            raise ConfigError(f"field 'sweep.axis': must be one of {', '.join(AXES)}, got {axis!r}")
        if values is None:
            return axis, DEFAULT_GRIDS[axis]
        if not isinstance(values, list):
            raise ConfigError("field 'sweep.values': must be a list")
        if axis == "tau":
            values = [float(v) if _is_real(v) else v for v in values]
        return axis, tuple(values)
    axis, sep, rest = str(spec).partition("=")
    axis = axis.strip()
    if axis not in AXES:
        raise ConfigError(f"field 'sweep': axis must be one of {', '.join(AXES)}, got {axis!r}")
    if not sep:
        return axis, DEFAULT_GRIDS[axis]
    parts = [p.strip() for p in rest.split(",") if p.strip()]
    return axis, tuple(_coerce_grid_value(axis, p) for p in parts)


def load_config_file(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    unknown = set(data) - _FILE_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown field(s) {', '.join(sorted(unknown))}")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"{path}: field 'schema_version' must be {SCHEMA_VERSION}, got {version!r}")
    return data


def resolve_config(file_data: dict | None, overrides: dict) -> ExperimentConfig:
    """Merge defaults, file values and command-line overrides (in that order)."""
    merged: dict[str, Any] = {}
    for source in (file_data or {}, {k: v for k, v in overrides.items() if v is not None}):
        merged.update(source)
    kwargs: dict[str, Any] = {}
    if "scenarios" in merged:
        kwargs["scenarios"] = parse_scenarios(merged["scenarios"])
    if "sweep" in merged:
        kwargs["axis"], kwargs["grid"] = parse_sweep(merged["sweep"])
    for key in ("n_agents", "horizon_T", "tau", "p_critical", "kappa", "epsilon",
                "runs", "seed", "out", "workers"):
        if key in merged:
            kwargs[key] = merged[key]
    for key in ("tau", "p_critical", "kappa", "epsilon"):
        if key in kwargs and _is_int(kwargs[key]):
            kwargs[key] = float(kwargs[key])
    if "ground_truth" in merged:
        try:
            kwargs["ground_truth"] = GroundTruth(merged["ground_truth"])
        except ValueError:
            raise ConfigError(
                f"field 'ground_truth': must be omega_star or omega_dagger, got {merged['ground_truth']!r}"
            ) from None
    cfg = ExperimentConfig(**kwargs)
    if "sweep" not in merged:
        cfg = replace(cfg, axis="N", grid=(cfg.n_agents,))
    return cfg.validate()


# --------------------------------------------------------------------------- commands

def _tasks(cfg: ExperimentConfig):
    return [(s, v) for s in cfg.scenarios for v in cfg.grid]


def _run_tasks(cfg: ExperimentConfig, fn):
    tasks = _tasks(cfg)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(lambda t: fn(*t), tasks))
    return [fn(*t) for t in tasks]


def _population(cfg: ExperimentConfig, kind: ScenarioKind, value):
    n, t, tau = cfg.point(value)
    try:
        pop = build_scenario(kind, n, t, tau, cfg.p_critical, cfg.kappa, cfg.epsilon)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    return pop, (n, t, tau)


def _base_row(cfg, kind, value, n, t, tau) -> dict:
    return {"scenario": kind.value, "axis": cfg.axis, "axis_value": value,
            "N": n, "T": t, "tau": tau, "p_critical": cfg.p_critical}


def cmd_bound(cfg: ExperimentConfig) -> list[dict]:
    """Analytic bound table, one row per scenario and grid value."""
    def row(kind, value):
        pop, (n, t, tau) = _population(cfg, kind, value)
        rep = bound_report(pop, cfg.ground_truth)
        return {**_base_row(cfg, kind, value, n, t, tau),
                "expected_margin": rep.expected_margin,
                "variance_budget": rep.variance_budget,
                "lb_success": rep.success_lower_bound,
                "ub_hallucination": rep.hallucination_upper_bound,
                "q_mean": rep.q_mean,
                "q_min_competent": rep.q_min,
                "delta_p": rep.delta_p,
                "convergence_lb": rep.convergence_lower_bound}
    return _run_tasks(cfg, row)


def cmd_simulate(cfg: ExperimentConfig) -> list[dict]:
    """Empirical rate of omega_star winning (with Wilson CI) next to the analytic bounds."""
    def row(kind, value):
        pop, (n, t, tau) = _population(cfg, kind, value)
        rep = bound_report(pop, cfg.ground_truth)
        res = simulate(pop, SimConfig(cfg.runs, cfg.seed, cfg.ground_truth))
        return {**_base_row(cfg, kind, value, n, t, tau),
                "ground_truth": cfg.ground_truth.value,
                "emp_success": res.empirical_success,
                "ci_lo": res.wilson_ci95[0],
                "ci_hi": res.wilson_ci95[1],
                "lb_success": rep.success_lower_bound,
                "ub_hallucination": rep.hallucination_upper_bound,
                "runs": cfg.runs, "seed": cfg.seed}
    return _run_tasks(cfg, row)


def cmd_sweep(cfg: ExperimentConfig) -> list[dict]:
    def row(kind, value):
        pop, (n, t, tau) = _population(cfg, kind, value)
        rep = bound_report(pop, cfg.ground_truth)
        res = simulate(pop, SimConfig(cfg.runs, cfg.seed, cfg.ground_truth))
        return {**_base_row(cfg, kind, value, n, t, tau),
                "expected_margin": rep.expected_margin,
                "variance_budget": rep.variance_budget,
                "lb_success": rep.success_lower_bound,
                "ub_hallucination": rep.hallucination_upper_bound,
                "emp_success": res.empirical_success,
                "ci_lo": res.wilson_ci95[0],
                "ci_hi": res.wilson_ci95[1],
                "runs": cfg.runs, "seed": cfg.seed}
    return _run_tasks(cfg, row)


def cmd_trace(cfg: ExperimentConfig) -> list[dict]:
    """Long-format confidence paths for a single scenario at a single grid point."""
    if len(cfg.scenarios) != 1 or len(cfg.grid) != 1:
        raise ConfigError("trace needs exactly one scenario and one grid point")
    pop, _ = _population(cfg, cfg.scenarios[0], cfg.grid[0])
    rows = []
    for tr in trace_confidence(pop, cfg.seed):
        for t, (conf, pub) in enumerate(zip(tr.confidence, tr.published), start=1):
            rows.append({"agent_id": tr.agent_id, "t": t, "confidence": conf, "would_publish": pub})
    return rows


COMMANDS = {
    "bound": (cmd_bound, BOUND_COLUMNS),
    "simulate": (cmd_simulate, SIMULATE_COLUMNS),
    "sweep": (cmd_sweep, SWEEP_COLUMNS),
    "trace": (cmd_trace, TRACE_COLUMNS),
}


def render_csv(command: str, cfg: ExperimentConfig, columns: Sequence[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write(f"# confvote {command}\n")
    for key, value in cfg.header_items():
        buf.write(f"# {key} = {value}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(row[c]) for c in columns) + "\n")
    return buf.getvalue()


def run_command(command: str, cfg: ExperimentConfig) -> str:
    fn, columns = COMMANDS[command]
    text = render_csv(command, cfg, columns, fn(cfg))
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML experiment file")
    common.add_argument("--scenario", dest="scenarios",
                        help="comma-separated subset of " + ",".join(s.value for s in ScenarioKind))
    common.add_argument("--sweep", help="AXIS=v1,v2,... (AXIS in N, T, tau); bare AXIS uses the default grid")
    common.add_argument("--n-agents", dest="n_agents", type=int)
    common.add_argument("--horizon", dest="horizon_T", type=int, help="T: learning rounds + 1")
    common.add_argument("--tau", type=float)
    common.add_argument("--p-critical", dest="p_critical", type=float)
    common.add_argument("--kappa", type=float)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--runs", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--ground-truth", dest="ground_truth", choices=[g.value for g in GroundTruth])
    common.add_argument("--workers", type=int, help="threads used for grid points (output is unaffected)")
    common.add_argument("--out", help="write CSV here instead of stdout")

    parser = argparse.ArgumentParser(prog="confvote", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("bound", parents=[common], help="analytic bounds per scenario and grid point")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo success rate with Wilson CI")
    sub.add_parser("sweep", parents=[common], help="bounds and simulation side by side")
    sub.add_parser("trace", parents=[common], help="per-agent confidence paths for one run")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        file_data = load_config_file(args.config) if args.config else None
        cfg = resolve_config(file_data, overrides)
        text = run_command(args.command, cfg)
    except ConfigError as exc:
        print(f"confvote: config error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"confvote: numerical error: {exc}", file=sys.stderr)
        return 3
    if not cfg.out:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
