"""Command-line front end: configs, run execution, output files.

Subcommands: ``run`` executes one or more optimization runs from a plain
text config, ``plotdata`` turns a finished run directory into plotting
tables, ``verify`` runs the reference-oracle self-checks.

Config files are ``key = value`` lines; blank lines and lines starting with
``#`` are skipped.  Keys::

    problem              bnh | toy-sphere-pair | external   (required)
    problem.command      external evaluator command line
    problem.bounds       per-dimension "lower:upper", space separated
    problem.objectives   output count of an external problem (default 2)
    problem.constraints  constraint count of an external problem (default 0)
    weight               uniform | exponential | gaussian-mixture
    weight.box           support box, "lower:upper" per objective
    weight.rate          exponential decay scale of the first objective
    weight.means         mixture component means, "a,b" per component
    weight.scales        mixture component axis scales "long,short"
    weight.angle_degrees mixture component rotation
    n_init               initial design size (default 10)
    n_iterations         acquisition iterations (default 20)
    m_x / m_y            candidate / particle counts (default 1000 each)
    seed | seeds         one seed, or a space-separated list
    gp_starts            optimizer restarts per surrogate fit (default 5)
    ess_target_fraction  sampler step-selection target (default 0.7)
    n_move_steps         sampler move steps per stage (default 5)
    output               output directory (default $EWHI_OUTPUT_ROOT/<stem>)

An external problem is a command that reads one line "x1 x2 ... xd" on
stdin and writes one line "f1 ... fp g1 ... gq" on stdout; a nonzero exit
status or malformed output is treated as an evaluation failure.

Every number in the emitted CSV files is printed with 17 significant
digits, so parsing the files recovers the values bit for bit.  With several
seeds, each run writes to its own ``seed-<k>`` subdirectory.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import shlex
import subprocess
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ewhi.oracles import (
    ewhi_grid_oracle,
    exact_ehvi_2d,
    gaussian_partial_expectation,
)
from ewhi.gp import PredictiveDistribution
from ewhi.optimize import OptimizationRun, run
from ewhi.pareto import BoundingBox, ParetoState, box_complement_volume_2d
from ewhi.problems import Problem, bnh, toy_sphere_pair
from ewhi.weights import (
    ExponentialPreferenceWeight,
    GaussianMixtureWeight,
    UniformBoxWeight,
)

__all__ = ["ConfigError", "RunConfig", "parse_config", "main"]

OUTPUT_ROOT_ENV = "EWHI_OUTPUT_ROOT"

_KNOWN_KEYS = {
    "problem",
    "problem.command",
    "problem.bounds",
    "problem.objectives",
    "problem.constraints",
    "weight",
    "weight.box",
    "weight.rate",
    "weight.means",
    "weight.scales",
    "weight.angle_degrees",
    "n_init",
    "n_iterations",
    "m_x",
    "m_y",
    "seed",
    "seeds",
    "gp_starts",
    "ess_target_fraction",
    "n_move_steps",
    "output",
}


class ConfigError(Exception):
    """Config problem tied to a source line (0 when no line applies)."""

    def __init__(self, message, line=0):
        super().__init__(message)
        self.line = line


def _fmt(value) -> str:
    """Number to text at full double precision."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


@dataclass
class RunConfig:
    """Parsed and validated configuration of an experiment."""

    problem: Problem
    weight: object
    n_init: int = 10
    n_iterations: int = 20
    m_x: int = 1000
    m_y: int = 1000
    seeds: list = field(default_factory=lambda: [0])
    gp_starts: int = 5
    ess_target_fraction: float = 0.7
    n_move_steps: int = 5
    output: Path = Path("runs")
    echo_lines: list = field(default_factory=list)


class _Entries:
    """Key-value file contents with per-key line numbers."""

    def __init__(self, text, name):
        self.values = {}
        self.lines = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in _KNOWN_KEYS:
                raise ConfigError(f"unknown key {key!r}", lineno)
            if key in self.values:
                raise ConfigError(f"duplicate key {key!r}", lineno)
            if not value:
                raise ConfigError(f"empty value for {key!r}", lineno)
            self.values[key] = value
            self.lines[key] = lineno
        self.name = name

    def __contains__(self, key):
        return key in self.values

    def get(self, key, default=None):
        return self.values.get(key, default)

    def line(self, key):
        return self.lines.get(key, 0)

    def error(self, key, message):
        return ConfigError(message, self.line(key))

    def parse(self, key, kind, default):
        if key not in self.values:
            return default
        raw = self.values[key]
        try:
            if kind is int:
                return int(raw)
            return float(raw)
        except ValueError:
            raise self.error(key, f"{key} must be {kind.__name__}, got {raw!r}")


def _parse_intervals(raw):
    pairs = []
    for token in raw.split():
        lo, sep, hi = token.partition(":")
        if not sep:
            raise ValueError(f"expected 'lower:upper', got {token!r}")
        pairs.append((float(lo), float(hi)))
    if not pairs:
        raise ValueError("no intervals given")
    return np.array(pairs)


def _parse_points(raw):
    rows = []
    for token in raw.split():
        rows.append([float(part) for part in token.split(",")])
    if not rows or len({len(r) for r in rows}) != 1:
        raise ValueError("expected comma-separated coordinates per point")
    return np.array(rows)


def _external_batch(command, dimension, n_obj, n_con):
    argv = shlex.split(command)

    def batch(X):
        F = np.empty((X.shape[0], n_obj))
        G = np.empty((X.shape[0], n_con))
        for i, x in enumerate(X):
            line = " ".join(_fmt(v) for v in x) + "\n"
            proc = subprocess.run(
                argv, input=line, capture_output=True, text=True
            )
            if proc.returncode != 0:
                raise RuntimeError(
                    f"external problem exited with status {proc.returncode}"
                )
            try:
                values = [float(tok) for tok in proc.stdout.split()]
            except ValueError:
                values = []
            if len(values) != n_obj + n_con:
                raise RuntimeError(
                    f"external problem wrote {proc.stdout!r}, expected "
                    f"{n_obj + n_con} numbers"
                )
            F[i] = values[:n_obj]
            G[i] = values[n_obj:]
        return F, G

    return batch


def _build_problem(entries):
    if "problem" not in entries:
        raise ConfigError("missing required key 'problem'")
    name = entries.get("problem")
    if name in ("bnh", "toy-sphere-pair"):
        for key in ("problem.command", "problem.bounds", "problem.objectives",
                    "problem.constraints"):
            if key in entries:
                raise entries.error(
                    key, f"{key} applies only to problem = external"
                )
        return bnh() if name == "bnh" else toy_sphere_pair()
    if name != "external":
        raise entries.error(
            "problem", f"unknown problem {name!r} "
            "(choose bnh, toy-sphere-pair, or external)"
        )
    if "problem.command" not in entries:
        raise ConfigError("external problem needs problem.command")
    if "problem.bounds" not in entries:
        raise ConfigError("external problem needs problem.bounds")
    try:
        bounds = _parse_intervals(entries.get("problem.bounds"))
    except ValueError as err:
        raise entries.error("problem.bounds", str(err))
    n_obj = entries.parse("problem.objectives", int, 2)
    n_con = entries.parse("problem.constraints", int, 0)
    if n_obj < 1 or n_con < 0:
        raise entries.error("problem.objectives", "need objectives >= 1 and constraints >= 0")
    command = entries.get("problem.command")
    return Problem(
        name="external",
        bounds=bounds,
        num_objectives=n_obj,
        num_constraints=n_con,
        _batch=_external_batch(command, bounds.shape[0], n_obj, n_con),
    )


def _build_weight(entries):
    name = entries.get("weight", "uniform")
    if name not in ("uniform", "exponential", "gaussian-mixture"):
        raise entries.error(
            "weight", f"unknown weight {name!r} "
            "(choose uniform, exponential, or gaussian-mixture)"
        )
    box = BoundingBox([0.0, 0.0], [150.0, 60.0])
    if "weight.box" in entries:
        try:
            pairs = _parse_intervals(entries.get("weight.box"))
            box = BoundingBox(pairs[:, 0], pairs[:, 1])
        except ValueError as err:
            raise entries.error("weight.box", str(err))
    allowed = {
        "uniform": set(),
        "exponential": {"weight.rate"},
        "gaussian-mixture": {"weight.means", "weight.scales", "weight.angle_degrees"},
    }[name]
    for key in ("weight.rate", "weight.means", "weight.scales", "weight.angle_degrees"):
        if key in entries and key not in allowed:
            raise entries.error(key, f"{key} does not apply to weight = {name}")
    if name == "uniform":
        return UniformBoxWeight(box=box)
    if name == "exponential":
        rate = entries.parse("weight.rate", float, 15.0)
        if rate <= 0:
            raise entries.error("weight.rate", "weight.rate must be positive")
        return ExponentialPreferenceWeight(rate=rate, box=box)
    kwargs = {"box": box}
    if "weight.means" in entries:
        try:
            kwargs["means"] = _parse_points(entries.get("weight.means"))
        except ValueError as err:
            raise entries.error("weight.means", str(err))
    if "weight.scales" in entries:
        try:
            scales = [float(t) for t in entries.get("weight.scales").split(",")]
        except ValueError:
            raise entries.error("weight.scales", "weight.scales must be numbers")
        kwargs["scales"] = scales
    if "weight.angle_degrees" in entries:
        kwargs["angle"] = np.deg2rad(
            entries.parse("weight.angle_degrees", float, 45.0)
        )
    try:
        return GaussianMixtureWeight(**kwargs)
    except ValueError as err:
        raise entries.error("weight", str(err))


def _echo_lines(entries, config):
    """Canonical config lines reflecting every effective setting."""
    lines = [f"problem = {entries.get('problem')}"]
    for key in ("problem.command", "problem.bounds"):
        if key in entries:
            lines.append(f"{key} = {entries.get(key)}")
    if entries.get("problem") == "external":
        lines.append(f"problem.objectives = {config.problem.num_objectives}")
        lines.append(f"problem.constraints = {config.problem.num_constraints}")
    lines.append(f"weight = {entries.get('weight', 'uniform')}")
    box = config.weight.support_box
    box_text = " ".join(
        f"{_fmt(lo)}:{_fmt(hi)}" for lo, hi in zip(box.lower, box.upper)
    )
    lines.append(f"weight.box = {box_text}")
    if isinstance(config.weight, ExponentialPreferenceWeight):
        lines.append(f"weight.rate = {_fmt(config.weight.rate)}")
    if isinstance(config.weight, GaussianMixtureWeight):
        means = " ".join(
            ",".join(_fmt(v) for v in row) for row in config.weight.means
        )
        scales = ",".join(_fmt(v) for v in config.weight.scales)
        lines.append(f"weight.means = {means}")
        lines.append(f"weight.scales = {scales}")
        lines.append(
            f"weight.angle_degrees = {_fmt(np.rad2deg(config.weight.angle))}"
        )
    lines.append(f"n_init = {config.n_init}")
    lines.append(f"n_iterations = {config.n_iterations}")
    lines.append(f"m_x = {config.m_x}")
    lines.append(f"m_y = {config.m_y}")
    lines.append(f"gp_starts = {config.gp_starts}")
    lines.append(f"ess_target_fraction = {_fmt(config.ess_target_fraction)}")
    lines.append(f"n_move_steps = {config.n_move_steps}")
    return lines


def parse_config(path) -> RunConfig:
    """Read and validate a config file.  Raises ConfigError."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}")
    entries = _Entries(text, str(path))

    problem = _build_problem(entries)
    weight = _build_weight(entries)
    if weight.support_box.dimension != problem.num_objectives:
        raise entries.error(
            "weight.box",
            "weight box dimension must match the problem's objective count",
        )

    config = RunConfig(problem=problem, weight=weight)
    config.n_init = entries.parse("n_init", int, config.n_init)
    config.n_iterations = entries.parse("n_iterations", int, config.n_iterations)
    config.m_x = entries.parse("m_x", int, config.m_x)
    config.m_y = entries.parse("m_y", int, config.m_y)
    config.gp_starts = entries.parse("gp_starts", int, config.gp_starts)
    config.ess_target_fraction = entries.parse(
        "ess_target_fraction", float, config.ess_target_fraction
    )
    config.n_move_steps = entries.parse("n_move_steps", int, config.n_move_steps)

    for key, value, minimum in (
        ("n_init", config.n_init, 1),
        ("n_iterations", config.n_iterations, 0),
        ("m_x", config.m_x, 1),
        ("m_y", config.m_y, 2),
        ("gp_starts", config.gp_starts, 1),
        ("n_move_steps", config.n_move_steps, 0),
    ):
        if value < minimum:
            raise entries.error(key, f"{key} must be at least {minimum}")
    if not 0.0 < config.ess_target_fraction < 1.0:
        raise entries.error(
            "ess_target_fraction", "ess_target_fraction must be in (0, 1)"
        )

    if "seed" in entries and "seeds" in entries:
        raise entries.error("seeds", "give either seed or seeds, not both")
    if "seeds" in entries:
        try:
            config.seeds = [int(tok) for tok in entries.get("seeds").split()]
        except ValueError:
            raise entries.error("seeds", "seeds must be integers")
    elif "seed" in entries:
        config.seeds = [entries.parse("seed", int, 0)]
    if not config.seeds:
        raise entries.error("seeds", "need at least one seed")
    if len(set(config.seeds)) != len(config.seeds):
        raise entries.error("seeds", "seeds must be distinct")

    if "output" in entries:
        config.output = Path(entries.get("output"))
    else:
        root = Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))
        config.output = root / path.stem

    config.echo_lines = _echo_lines(entries, config)
    return config


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_history(outdir, config, opt):
    problem = config.problem
    d, p, q = problem.dimension, problem.num_objectives, problem.num_constraints
    header = (
        ["iteration"]
        + [f"x{j + 1}" for j in range(d)]
        + [f"f{j + 1}" for j in range(p)]
        + [f"g{j + 1}" for j in range(q)]
        + ["feasible", "selected_ewhi", "ewhi_variance", "z_estimate",
           "delta_sq_cum"]
    )
    rows = []
    n = 0 if opt.X is None else opt.X.shape[0]
    for i in range(n):
        g = opt.G[i]
        feasible = int(g.size == 0 or bool(np.all(g <= 0)))
        extras = [float("nan")] * 4
        if i >= config.n_init:
            rec = opt.diagnostics[i - config.n_init]
            extras = [
                rec["acq_value"],
                rec["acq_variance"],
                rec["z_estimate"],
                rec["delta_sq_cum"],
            ]
        rows.append(
            [str(i)]
            + [_fmt(v) for v in opt.X[i]]
            + [_fmt(v) for v in opt.F[i]]
            + [_fmt(v) for v in g]
            + [str(feasible)]
            + [_fmt(v) for v in extras]
        )
    _write_csv(outdir / "history.csv", header, rows)


def _write_outputs(outdir, config, opt):
    _write_history(outdir, config, opt)
    p = config.problem.num_objectives
    front = np.empty((0, p)) if opt.pareto is None else opt.pareto.front
    _write_csv(
        outdir / "front.csv",
        [f"f{j + 1}" for j in range(p)],
        [[_fmt(v) for v in row] for row in front],
    )
    with open(outdir / "diagnostics.jsonl", "w") as fh:
        for rec in opt.diagnostics:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def cmd_run(config_path) -> int:
    try:
        config = parse_config(config_path)
    except ConfigError as err:
        place = f"{config_path}:{err.line}" if err.line else str(config_path)
        print(f"{place}: {err}", file=sys.stderr)
        return 2

    multi = len(config.seeds) > 1
    for seed in config.seeds:
        outdir = config.output / f"seed-{seed}" if multi else config.output
        outdir.mkdir(parents=True, exist_ok=True)
        echo = config.echo_lines + [f"seed = {seed}", f"output = {outdir}"]
        (outdir / "config.echo").write_text("\n".join(echo) + "\n")
        opt = OptimizationRun(
            problem=config.problem,
            weight=config.weight,
            n_init=config.n_init,
            n_iterations=config.n_iterations,
            m_x=config.m_x,
            m_y=config.m_y,
            seed=seed,
            gp_starts=config.gp_starts,
            ess_target_fraction=config.ess_target_fraction,
            n_move_steps=config.n_move_steps,
        )
        try:
            run(opt)
        except Exception as err:
            _write_outputs(outdir, config, opt)
            print(f"seed {seed}: {err}", file=sys.stderr)
            return 1
        _write_outputs(outdir, config, opt)
    return 0


def _read_history(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    return header, rows


def cmd_plotdata(run_dir) -> int:
    run_dir = Path(run_dir)
    config_path = run_dir / "config.echo"
    history_path = run_dir / "history.csv"
    for required in (config_path, history_path):
        if not required.exists():
            print(f"missing {required}", file=sys.stderr)
            return 2
    try:
        config = parse_config(config_path)
    except ConfigError as err:
        print(f"{config_path}: {err}", file=sys.stderr)
        return 2

    header, rows = _read_history(history_path)
    p = config.problem.num_objectives
    f_cols = [header.index(f"f{j + 1}") for j in range(p)]
    feas_col = header.index("feasible")
    F = np.array([[float(row[j]) for j in f_cols] for row in rows])
    feasible = np.array([row[feas_col] == "1" for row in rows])

    front = ParetoState.empty(p)
    if np.any(feasible):
        front = ParetoState.from_observations(F[feasible])
    non_dominated = np.zeros(len(rows), dtype=bool)
    for i in np.flatnonzero(feasible):
        non_dominated[i] = bool(
            np.any(np.all(front.front == F[i], axis=1))
        )

    scatter_rows = [
        [_fmt(v) for v in F[i]] + [str(int(feasible[i])), str(int(non_dominated[i]))]
        for i in range(len(rows))
    ]
    _write_csv(
        run_dir / "scatter.csv",
        [f"f{j + 1}" for j in range(p)] + ["feasible", "non_dominated"],
        scatter_rows,
    )

    box = config.weight.support_box
    if box.dimension == 2:
        y1 = np.linspace(box.lower[0], box.upper[0], 151)
        y2 = np.linspace(box.lower[1], box.upper[1], 61)
        grid = np.column_stack(
            [np.repeat(y1, y2.size), np.tile(y2, y1.size)]
        )
        values = config.weight(grid)
        contour_rows = [
            [_fmt(grid[i, 0]), _fmt(grid[i, 1]), _fmt(values[i])]
            for i in range(grid.shape[0])
        ]
        _write_csv(run_dir / "weight_contours.csv", ["y1", "y2", "weight"], contour_rows)
    return 0


def _verify_checks():
    """Deterministic oracle self-checks; yields (name, passed)."""
    box = BoundingBox([0.0, 0.0], [10.0, 10.0])
    uniform = UniformBoxWeight(box=box)
    front = ParetoState.from_observations([[4.0, 6.0]])
    pred = PredictiveDistribution(means=[3.0, 3.5], sds=[1.2, 0.8])

    exact = exact_ehvi_2d(pred, front, box.upper)
    grid = ewhi_grid_oracle(pred, front, uniform, n_nodes=(800, 800))
    yield (
        "exact 2d improvement vs 800x800 grid within 0.5%",
        abs(grid - exact) <= 0.005 * exact,
    )

    coarse = ewhi_grid_oracle(pred, front, uniform, n_nodes=(400, 400))
    yield (
        "grid refinement 400 -> 800 changes result by < 1%",
        abs(coarse - grid) <= 0.01 * abs(grid),
    )

    sharp = PredictiveDistribution(means=[1.0, 1.0], sds=[0.0, 0.0])
    vol = ewhi_grid_oracle(sharp, front, uniform, n_nodes=(800, 800))
    # the integrand degenerates to the indicator of {y >= (1,1)} minus the
    # dominated corner: area 9*9 - 6*4 = 57 on this box
    corner = 9.0 * 9.0 - (10.0 - 4.0) * (10.0 - 6.0)
    yield (
        "degenerate predictor integrates the improvement area",
        abs(vol - corner) <= 0.01 * corner,
    )

    yield (
        "strip decomposition of the non-dominated area is exact",
        box_complement_volume_2d(front, box) == 76.0,
    )

    swapped = exact_ehvi_2d(
        PredictiveDistribution(means=[3.5, 3.0], sds=[0.8, 1.2]),
        ParetoState.from_observations([[6.0, 4.0]]),
        box.upper[::-1],
    )
    yield (
        "axis swap leaves the exact value unchanged",
        abs(swapped - exact) <= 1e-12 * exact,
    )

    tiny = PredictiveDistribution(means=[1.0, 1.0], sds=[1e-9, 1e-9])
    empty = ParetoState.empty(2)
    approx = exact_ehvi_2d(tiny, empty, [9.0, 7.0])
    yield (
        "empty front: value matches the mean-to-reference rectangle",
        abs(approx - 8.0 * 6.0) <= 1e-6 * 48.0,
    )

    grown = ParetoState.from_observations([[4.0, 6.0], [6.0, 3.0]])
    yield (
        "adding a front point never raises the grid value",
        ewhi_grid_oracle(pred, grown, uniform, n_nodes=(400, 400)) <= coarse,
    )

    psi = gaussian_partial_expectation(0.0, 0.0, 1.0)
    yield (
        "gaussian partial moment at the mean equals 1/sqrt(2 pi)",
        abs(psi - 1.0 / np.sqrt(2.0 * np.pi)) < 1e-12,
    )


def cmd_verify() -> int:
    failures = 0
    for name, passed in _verify_checks():
        print(f"[{'pass' if passed else 'FAIL'}] {name}")
        failures += 0 if passed else 1
    return 0 if failures == 0 else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ewhi",
        description="Preference-weighted multi-objective Bayesian optimization",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute runs described by a config file")
    p_run.add_argument("config", help="path to a key = value config file")
    p_plot = sub.add_parser("plotdata", help="emit plotting tables for a run")
    p_plot.add_argument("run_dir", help="directory written by the run command")
    sub.add_parser("verify", help="run reference-oracle self-checks")

    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config)
    if args.command == "plotdata":
        return cmd_plotdata(args.run_dir)
    return cmd_verify()


if __name__ == "__main__":
    sys.exit(main())
