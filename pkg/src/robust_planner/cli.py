"""Command line entry point: ``robust-planner <command> ...``.

Exit codes: 0 success, 1 input error (missing/unparseable files, bad flags),
2 semantic error (scenario invariants, value bounds, override misuse).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
import time
from pathlib import Path

from . import blocksworld, simulator
from .dsl import load_domain, load_scenario, parse_domain, parse_scenario
from .errors import DslError, ModelError, PlanFormatError, SimulationError
from .planner import dumps_plan, import_plan, plan, plan_bnb
from .simulator import ExecutionConfig, ValueDistribution

log = logging.getLogger("robust_planner")

EXIT_INPUT = 1
EXIT_SEMANTIC = 2


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


def default_seed() -> int:
    raw = os.environ.get("ROBUST_PLANNER_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"ROBUST_PLANNER_SEED must be an integer, got {raw!r}") from None


def write_atomic(path, data: str | bytes) -> None:
    """Write via a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def save_figure(fn, data, path) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.stem}.", suffix=path.suffix, dir=path.parent)
    os.close(fd)
    try:
        fn(data, tmp)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _probability(text: str) -> float:
    try:
        p = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= p <= 1.0:
        raise argparse.ArgumentTypeError(f"{p:g} outside [0, 1]")
    return p


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def _load_plan(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read plan: {exc}") from None
    try:
        return import_plan(text)
    except PlanFormatError as exc:
        raise CliError(f"{path}: {exc}") from None


# --------------------------------------------------------------------------- commands


def cmd_plan(args) -> int:
    try:
        domain = load_domain(args.domain)
        scenario = load_scenario(args.scenario, domain)
    except OSError as exc:
        raise CliError(f"cannot read input: {exc}") from None
    except DslError as exc:
        raise CliError(str(exc)) from None
    except ModelError as exc:
        raise CliError(str(exc), EXIT_SEMANTIC) from None
    start = time.perf_counter()
    try:
        p = plan_bnb(scenario) if args.bnb else plan(scenario)
    except ModelError as exc:
        raise CliError(str(exc), EXIT_SEMANTIC) from None
    elapsed = time.perf_counter() - start
    if args.out:
        write_atomic(args.out, dumps_plan(p))
    print(f"root_eu: {p.eu:.12g}")
    print(f"expanded_state_nodes: {p.stats.expanded_state_nodes}")
    print(f"expanded_action_nodes: {p.stats.expanded_action_nodes}")
    print(f"pruned_action_nodes: {p.stats.pruned_action_nodes}")
    print(f"success_path: {' '.join(p.success_path())}")
    print(f"success_value: {p.success_leaf().value:.6f}")
    log.info("planned %s in %.3fs", scenario.name, elapsed)
    return 0


def _empirical(values) -> ValueDistribution:
    n = len(values)
    counts: dict[float, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    return ValueDistribution({v: c / n for v, c in sorted(counts.items())})


def cmd_simulate(args) -> int:
    p = _load_plan(args.plan)
    config = ExecutionConfig(trials=args.trials, execution_probability=args.exec_prob, seed=args.seed)
    try:
        stats = simulator.monte_carlo(p, config)
    except SimulationError as exc:
        raise CliError(str(exc), EXIT_SEMANTIC) from None
    print(f"trials: {stats.trials}")
    print(f"mean: {stats.mean:.6f}")
    print(f"stddev: {stats.stddev:.6f}")
    if args.hist:
        rows = list(stats.histogram.items())
        write_atomic(args.hist, simulator.csv_text(simulator.HISTOGRAM_HEADER, rows))
        if args.plot:
            from .plotting import plot_histogram

            save_figure(lambda d, f: plot_histogram({"plan": d}, f), stats.histogram, Path(args.hist).with_suffix(".png"))
    if args.exceedance:
        points = simulator.exceedance(_empirical(stats.values.tolist()))
        write_atomic(args.exceedance, simulator.csv_text(simulator.EXCEEDANCE_HEADER, points))
        if args.plot:
            from .plotting import plot_exceedance

            save_figure(lambda d, f: plot_exceedance({"plan": d}, f), points, Path(args.exceedance).with_suffix(".png"))
    return 0


def cmd_sweep(args) -> int:
    try:
        grid = simulator.sweep_grid(args.step)
    except SimulationError as exc:
        raise CliError(str(exc)) from None
    p = _load_plan(args.plan)
    try:
        rows = simulator.probability_sweep(p, grid, args.trials, args.seed)
    except SimulationError as exc:
        raise CliError(str(exc), EXIT_SEMANTIC) from None
    text = simulator.csv_text(simulator.SWEEP_HEADER, rows)
    if args.out:
        write_atomic(args.out, text)
        if args.plot:
            from .plotting import plot_sweep

            save_figure(lambda d, f: plot_sweep({"plan": d}, f), rows, Path(args.out).with_suffix(".png"))
    else:
        sys.stdout.write(text)
    return 0


def _check_bounds(args) -> None:
    if not args.v_min < args.v_max:
        raise CliError(f"--v-min {args.v_min:g} must be below --v-max {args.v_max:g}")


def cmd_gen_blocksworld(args) -> int:
    p, r = args.success_prob, args.robustness
    if not 0.0 < p <= 1.0:
        raise CliError(f"--success-prob {p:g} outside (0, 1]")
    if not 0.0 <= r < 1.0:
        raise CliError(f"--robustness {r:g} outside [0, 1)")
    _check_bounds(args)
    out = Path(args.out_dir)
    domain_text = blocksworld.make_domain(p, args.stack_failure)
    scenario_text = blocksworld.fig9_scenario(r, args.v_min, args.v_max)
    # never emit files the parser would reject
    parse_scenario(scenario_text, parse_domain(domain_text))
    write_atomic(out / "slippery-blocks.domain", domain_text)
    write_atomic(out / "fig9.scenario", scenario_text)
    print(out / "slippery-blocks.domain")
    print(out / "fig9.scenario")
    return 0


def cmd_report(args) -> int:
    """Run the whole blocks-world experiment and write CSVs plus figures."""
    from . import plotting

    for r in args.robustness:
        if not 0.0 <= r < 1.0:
            raise CliError(f"robustness {r:g} outside [0, 1)")
    _check_bounds(args)
    try:
        grid = simulator.sweep_grid(args.step)
    except SimulationError as exc:
        raise CliError(str(exc)) from None
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sweeps, hists, exceeds, summary = {}, {}, {}, []
    for r in args.robustness:
        scenario = blocksworld.slippery_blocks(
            r, args.success_prob, stack_failure=args.stack_failure, v_min=args.v_min, v_max=args.v_max
        )
        try:
            p = plan_bnb(scenario)
        except ModelError as exc:
            raise CliError(str(exc), EXIT_SEMANTIC) from None
        tag = f"R{r:g}"
        label = f"R = {r:g}"
        write_atomic(out / f"plan_{tag}.json", dumps_plan(p))
        sweep = simulator.probability_sweep(p, grid, args.sweep_trials, args.seed)
        write_atomic(out / f"sweep_{tag}.csv", simulator.csv_text(simulator.SWEEP_HEADER, sweep))
        stats = simulator.monte_carlo(
            p, ExecutionConfig(trials=args.trials, execution_probability=args.success_prob, seed=args.seed)
        )
        write_atomic(
            out / f"hist_{tag}.csv", simulator.csv_text(simulator.HISTOGRAM_HEADER, list(stats.histogram.items()))
        )
        dist = simulator.exact_distribution(p, args.success_prob)
        points = simulator.exceedance(dist)
        write_atomic(out / f"exceedance_{tag}.csv", simulator.csv_text(simulator.EXCEEDANCE_HEADER, points))
        sweeps[label], hists[label], exceeds[label] = sweep, stats.histogram, points
        moves = " ".join(f"{b}->{d}" for b, d in blocksworld.moves(p.success_path()))
        summary.append(
            (r, p.eu, dist.mean, dist.stddev, stats.mean, stats.stddev, p.success_leaf().value, moves)
        )
        print(f"{label}: eu {p.eu:.6f}  exact mean {dist.mean:.4f} sd {dist.stddev:.4f}  "
              f"mc mean {stats.mean:.4f} sd {stats.stddev:.4f}  success path {moves}")
    header = ("robustness", "root_eu", "exact_mean", "exact_stddev", "mc_mean", "mc_stddev", "success_value", "moves")
    write_atomic(out / "summary.csv", simulator.csv_text(header, summary))
    save_figure(plotting.plot_sweep, sweeps, out / "sweep.png")
    save_figure(plotting.plot_histogram, hists, out / "histogram.png")
    save_figure(plotting.plot_exceedance, exceeds, out / "exceedance.png")
    save_figure(plotting.plot_utility_curves, [0.0, *args.robustness, 0.9], out / "utility.png")
    return 0


def _blocks_model_flags(sp) -> None:
    sp.add_argument(
        "--stack-failure",
        choices=blocksworld.STACK_FAILURES,
        default="stay",
        help="what a failed stack does: keep holding the block (default) or drop it on the table",
    )
    sp.add_argument("--v-min", type=float, default=0.0, help="normalization lower bound")
    sp.add_argument("--v-max", type=float, default=55.0, help="normalization upper bound")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robust-planner", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("plan", help="solve a scenario and write the conditional plan as JSON")
    sp.add_argument("domain")
    sp.add_argument("scenario")
    sp.add_argument("--bnb", action="store_true", help="use alpha pruning")
    sp.add_argument("--out", help="plan JSON output path")
    sp.set_defaults(func=cmd_plan)

    seed = default_seed()

    sp = sub.add_parser("simulate", help="Monte Carlo execution of a plan")
    sp.add_argument("plan")
    sp.add_argument("--trials", type=_positive_int, default=10000)
    sp.add_argument("--exec-prob", type=_probability, default=None)
    sp.add_argument("--seed", type=int, default=seed)
    sp.add_argument("--hist", help="histogram CSV output")
    sp.add_argument("--exceedance", help="exceedance CSV output")
    sp.add_argument("--plot", action="store_true", help="also write a PNG next to each CSV")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="mean value across execution probabilities")
    sp.add_argument("plan")
    sp.add_argument("--trials", type=_positive_int, default=1000)
    sp.add_argument("--step", type=float, default=0.1)
    sp.add_argument("--seed", type=int, default=seed)
    sp.add_argument("--out", help="CSV output (stdout if omitted)")
    sp.add_argument("--plot", action="store_true", help="also write a PNG next to the CSV")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("gen-blocksworld", help="write the slippery blocks domain and the fig9 scenario")
    sp.add_argument("--success-prob", type=float, default=0.72)
    sp.add_argument("--robustness", type=float, default=0.5)
    sp.add_argument("--out-dir", default=".")
    _blocks_model_flags(sp)
    sp.set_defaults(func=cmd_gen_blocksworld)

    sp = sub.add_parser("report", help="full blocks-world experiment: CSVs and figures")
    sp.add_argument("--out-dir", default="report")
    sp.add_argument("--success-prob", type=_probability, default=0.72)
    sp.add_argument("--robustness", type=float, nargs="+", default=[0.5, 0.6])
    sp.add_argument("--trials", type=_positive_int, default=10000)
    sp.add_argument("--sweep-trials", type=_positive_int, default=1000)
    sp.add_argument("--step", type=float, default=0.1)
    sp.add_argument("--seed", type=int, default=seed)
    _blocks_model_flags(sp)
    sp.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    try:
        parser = build_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            # argparse uses 2 for usage errors; flag problems are input errors here
            return EXIT_INPUT if exc.code else 0
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (SimulationError, DslError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC


if __name__ == "__main__":
    sys.exit(main())
