"""Monte Carlo execution of conditional plans, plus the exact leaf distribution.

A simulated run walks the plan from the root, draws one outcome per chosen
action and reports the value of the terminal state it lands on.  The
optional execution probability replaces the success probability of binary
success/failure actions, so a plan built for one success rate can be
executed under another.
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import SimulationError
from .planner import ActionNode, ConditionalPlan, StateNode


@dataclass(frozen=True)
class ExecutionConfig:
    trials: int = 1000
    execution_probability: float | None = None
    seed: int = 0
    bin_width: float = 1.0

    def __post_init__(self):
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < 1:
            raise SimulationError(f"trials must be a positive integer, got {self.trials!r}")
        p = self.execution_probability
        if p is not None and not 0.0 <= p <= 1.0:
            raise SimulationError(f"execution probability {p!r} outside [0, 1]")
        if not self.bin_width > 0:
            raise SimulationError("bin width must be positive")


@dataclass(frozen=True)
class ValueDistribution:
    """Probability mass over terminal values."""

    support: dict[float, float]

    @property
    def mean(self) -> float:
        return math.fsum(v * m for v, m in self.support.items())

    @property
    def stddev(self) -> float:
        mu = self.mean
        return math.sqrt(math.fsum(m * (v - mu) ** 2 for v, m in self.support.items()))

    @property
    def total_mass(self) -> float:
        return math.fsum(self.support.values())

    def prob_at_least(self, v: float) -> float:
        return math.fsum(m for x, m in self.support.items() if x >= v)


@dataclass
class SimStats:
    mean: float
    stddev: float
    trials: int
    histogram: dict[float, int] = field(default_factory=dict)
    values: np.ndarray | None = field(default=None, repr=False, compare=False)


def _outcome_probs(action: ActionNode, p: float | None) -> list[float]:
    if p is None:
        return [b.probability for b in action.outcomes]
    labels = [b.label for b in action.outcomes]
    if sorted(labels) != ["failure", "success"]:
        raise SimulationError(
            f"execution probability override needs success/failure outcomes; {action.action} has {labels}"
        )
    return [p if b.label == "success" else 1.0 - p for b in action.outcomes]


def check_override(plan: ConditionalPlan, p: float | None) -> None:
    """Raise SimulationError if ``p`` cannot be applied to every action of ``plan``."""
    if p is None:
        return
    for a in plan.action_nodes():
        _outcome_probs(a, p)


def simulate_once(plan: ConditionalPlan, config: ExecutionConfig, rng: np.random.Generator) -> float:
    """Value of the terminal state reached by one sampled execution."""
    node: StateNode = plan.root
    while node.chosen is not None:
        probs = _outcome_probs(node.chosen, config.execution_probability)
        u = rng.random()
        acc = 0.0
        branches = node.chosen.outcomes
        pick = len(branches) - 1
        for i, p in enumerate(probs):
            acc += p
            if u < acc:
                pick = i
                break
        # never land on a zero-probability branch through rounding
        while probs[pick] == 0.0 and pick > 0:
            pick -= 1
        node = branches[pick].child
    return node.value


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent generator for one trial, derived from (seed, trial index)."""
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, trial])


def _bin(v: float, width: float) -> float:
    if width == 1.0:
        return float(math.floor(v))
    return math.floor(v / width) * width


def monte_carlo(plan: ConditionalPlan, config: ExecutionConfig) -> SimStats:
    check_override(plan, config.execution_probability)
    values = np.array(
        [simulate_once(plan, config, trial_rng(config.seed, i)) for i in range(config.trials)],
        dtype=float,
    )
    hist = Counter(_bin(v, config.bin_width) for v in values.tolist())
    return SimStats(
        mean=float(values.mean()),
        stddev=float(values.std()),
        trials=config.trials,
        histogram=dict(sorted(hist.items())),
        values=values,
    )


def exact_distribution(plan: ConditionalPlan, execution_probability: float | None = None) -> ValueDistribution:
    """Enumerate every root-to-leaf path of the plan and pool mass by leaf value."""
    check_override(plan, execution_probability)
    mass: dict[float, float] = {}
    stack: list[tuple[StateNode, float]] = [(plan.root, 1.0)]
    while stack:
        node, pr = stack.pop()
        if node.chosen is None:
            mass[node.value] = mass.get(node.value, 0.0) + pr
            continue
        probs = _outcome_probs(node.chosen, execution_probability)
        for b, p in zip(node.chosen.outcomes, probs):
            if p > 0.0:
                stack.append((b.child, pr * p))
    return ValueDistribution(dict(sorted(mass.items())))


def exceedance(dist: ValueDistribution) -> list[tuple[float, float]]:
    """(v, P[value >= v]) at each support point, ascending in v."""
    items = sorted(dist.support.items())
    masses = [m for _, m in items]
    return [(v, math.fsum(masses[i:])) for i, (v, _) in enumerate(items)]


def probability_sweep(
    plan: ConditionalPlan, probabilities: Sequence[float], trials: int, seed: int
) -> list[tuple[float, float]]:
    """Mean simulated value at each execution probability."""
    rows = []
    for p in probabilities:
        stats = monte_carlo(plan, ExecutionConfig(trials=trials, execution_probability=p, seed=seed))
        rows.append((p, stats.mean))
    return rows


def sweep_grid(step: float) -> list[float]:
    """Probabilities 0, step, ..., 1; ``step`` must divide 1."""
    if not 0 < step <= 1:
        raise SimulationError(f"step {step!r} outside (0, 1]")
    n = round(1.0 / step)
    if abs(n * step - 1.0) > 1e-9:
        raise SimulationError(f"step {step!r} does not divide 1")
    return [i / n for i in range(n + 1)]


# --------------------------------------------------------------------------- CSV

SWEEP_HEADER = ("exec_prob", "mean_value")
HISTOGRAM_HEADER = ("value", "count")
EXCEEDANCE_HEADER = ("value", "prob_geq")


def fmt(x: float) -> str:
    """Reals go out with 6 significant digits."""
    return f"{x:.6g}"


def csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()
