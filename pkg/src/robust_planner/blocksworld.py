"""Slippery blocks world: four arm operators that fail by doing nothing.

Every operator succeeds with probability ``p`` and otherwise leaves the
state untouched.  A variant lets a failed ``stack`` drop the held block on
the table instead; the arm still ends up empty.  Generators emit documents in the :mod:`robust_planner.dsl`
format so the built-in domain goes through the same parser as user files.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core import Domain, Fact, Scenario, State, block_heights
from .dsl import format_number, greedy_tower_bound, parse_domain, parse_scenario
from .errors import ModelError, ValueRangeError

_OPERATORS = (
    (
        "pick-up(?b: block)",
        "clear(?b), on-table(?b), hand-empty",
        "holding(?b)",
        "on-table(?b), clear(?b), hand-empty",
    ),
    (
        "put-down(?b: block)",
        "holding(?b)",
        "on-table(?b), clear(?b), hand-empty",
        "holding(?b)",
    ),
    (
        "stack(?b: block, ?c: block)",
        "holding(?b), clear(?c)",
        "on(?b,?c), clear(?b), hand-empty",
        "holding(?b), clear(?c)",
    ),
    (
        "unstack(?b: block, ?c: block)",
        "on(?b,?c), clear(?b), hand-empty",
        "holding(?b), clear(?c)",
        "on(?b,?c), clear(?b), hand-empty",
    ),
)


STACK_FAILURES = ("stay", "drop")

# what a failed stack does under stack_failure="drop"
_DROPPED = ("on-table(?b), clear(?b), hand-empty", "holding(?b)")


def make_domain(p: float, stack_failure: str = "stay") -> str:
    """Domain text for success probability ``p``; ``p == 1`` drops the failure outcome.

    ``stack_failure="drop"`` makes a failed stack put the block on the table.
    """
    if not 0.0 < p <= 1.0:
        raise ModelError(f"success probability {p!r} outside (0, 1]")
    if stack_failure not in STACK_FAILURES:
        raise ModelError(f"stack failure mode must be one of {STACK_FAILURES}, got {stack_failure!r}")
    q = 1.0 - p
    lines = ["domain slippery-blocks", "  types block"]
    for header, pre, add, dele in _OPERATORS:
        fail_add, fail_del = _DROPPED if stack_failure == "drop" and header.startswith("stack(") else ("", "")
        lines.append(f"  operator {header}")
        lines.append(f"    pre: {pre}")
        lines.append(f"    outcome success prob {format_number(p)}:")
        lines.append(f"      add: [{add}]")
        lines.append(f"      del: [{dele}]")
        if p < 1.0:
            lines.append(f"    outcome failure prob {format_number(round(q, 12))}:")
            lines.append(f"      add: [{fail_add}]")
            lines.append(f"      del: [{fail_del}]")
    return "\n".join(lines) + "\n"


@dataclass
class BlocksScenarioSpec:
    """A blocks scenario described by towers (bottom to top) and block worths."""

    worths: dict[str, float]
    towers: list[list[str]]
    success_probability: float = 0.72
    depth_limit: int = 6
    robustness: float = 0.0
    name: str = "blocks"
    v_min: float = 0.0
    v_max: float | None = None
    held: str | None = None
    stack_failure: str = "stay"

    def __post_init__(self):
        placed = [b for t in self.towers for b in t] + ([self.held] if self.held else [])
        if sorted(placed) != sorted(set(placed)):
            raise ModelError("a block appears in more than one position")
        if set(placed) != set(self.worths):
            raise ModelError("every block needs exactly one position and a worth")

    @property
    def blocks(self) -> list[str]:
        return sorted(self.worths)

    def initial_facts(self) -> list[Fact]:
        facts = []
        for tower in self.towers:
            if not tower:
                continue
            facts.append(Fact("on-table", (tower[0],)))
            for lower, upper in zip(tower, tower[1:]):
                facts.append(Fact("on", (upper, lower)))
            facts.append(Fact("clear", (tower[-1],)))
        facts.append(Fact("holding", (self.held,)) if self.held else Fact("hand-empty"))
        return facts

    def scenario_text(self) -> str:
        v_max = self.v_max if self.v_max is not None else greedy_tower_bound(self.worths)
        worths = ", ".join(f"{b}:{format_number(w)}" for b, w in sorted(self.worths.items()))
        return "\n".join(
            [
                f"problem {self.name}",
                "  domain slippery-blocks",
                f"  objects {' '.join(self.blocks)} : block",
                "  init: " + ", ".join(str(f) for f in self.initial_facts()),
                f"  value-model blocksworld worths {{ {worths} }}",
                f"  vmin {format_number(self.v_min)}   vmax {format_number(v_max)}",
                f"  depth-limit {self.depth_limit}",
                f"  robustness {format_number(self.robustness)}",
            ]
        ) + "\n"

    def domain_text(self) -> str:
        return make_domain(self.success_probability, self.stack_failure)

    def build(self) -> Scenario:
        return parse_scenario(self.scenario_text(), parse_domain(self.domain_text()))


def fig9_spec(
    robustness: float = 0.5, success_probability: float = 0.72, stack_failure: str = "stay"
) -> BlocksScenarioSpec:
    """Towers [b2,b3] and [b4,b1] with b5 alone on the table; worth = block number."""
    return BlocksScenarioSpec(
        worths={f"b{i}": float(i) for i in range(1, 6)},
        towers=[["b2", "b3"], ["b4", "b1"], ["b5"]],
        success_probability=success_probability,
        depth_limit=6,
        robustness=robustness,
        name="fig9",
        v_min=0.0,
        v_max=55.0,
        stack_failure=stack_failure,
    )


def fig9_scenario(R: float, v_min: float = 0.0, v_max: float = 55.0) -> str:
    if not 0.0 <= R < 1.0:
        raise ModelError(f"robustness {R!r} outside [0, 1)")
    spec = fig9_spec(R)
    spec.v_min, spec.v_max = v_min, v_max
    return spec.scenario_text()


def slippery_blocks(robustness: float = 0.5, success_probability: float = 0.72, **overrides) -> Scenario:
    """Parsed fig9 scenario; keyword overrides go to :class:`BlocksScenarioSpec`."""
    spec = fig9_spec(robustness, success_probability)
    for key, val in overrides.items():
        setattr(spec, key, val)
    return spec.build()


def tower_state(towers: Sequence[Sequence[str]], held: str | None = None) -> State:
    """State with the given towers (bottom to top) and optionally one held block."""
    facts: list[Fact] = []
    for tower in towers:
        facts.append(Fact("on-table", (tower[0],)))
        facts.extend(Fact("on", (u, l)) for l, u in zip(tower, tower[1:]))
        facts.append(Fact("clear", (tower[-1],)))
    facts.append(Fact("holding", (held,)) if held else Fact("hand-empty"))
    return State(frozenset(facts))


def physical_violations(s: State, blocks: Iterable[str]) -> list[str]:
    """Ways in which ``s`` is not a physically possible blocks state (empty if fine)."""
    blocks = list(blocks)
    problems = []
    held = [f.args[0] for f in s.facts if f.predicate == "holding"]
    on = [f.args for f in s.facts if f.predicate == "on"]
    table = {f.args[0] for f in s.facts if f.predicate == "on-table"}
    clear = {f.args[0] for f in s.facts if f.predicate == "clear"}
    for b in blocks:
        places = (b in table) + sum(1 for x, _ in on if x == b) + held.count(b)
        if places != 1:
            problems.append(f"{b} has {places} positions")
    if len(held) > 1:
        problems.append(f"holding {len(held)} blocks")
    if (Fact("hand-empty") in s.facts) == bool(held):
        problems.append("hand-empty disagrees with holding")
    for b in blocks:
        covered = any(y == b for _, y in on)
        should_be_clear = not covered and b not in held
        if (b in clear) != should_be_clear:
            problems.append(f"clear({b}) is wrong")
    supports = [y for _, y in on]
    if len(supports) != len(set(supports)):
        problems.append("two blocks on one block")
    if not problems:
        try:
            block_heights(s, blocks)
        except ModelError as exc:
            problems.append(str(exc))
    return problems


_ACQUIRE = re.compile(r"^(pick-up|unstack)\(([^,)]+)")
_RELEASE = re.compile(r"^(stack|put-down)\(([^,)]+)(?:,([^)]+))?\)")


def moves(actions: Iterable[str]) -> list[tuple[str, str]]:
    """Collapse an action sequence into (moved block, destination) pairs.

    A move is an acquisition (pick-up/unstack) followed by a placement
    (stack onto a block, or put-down giving destination ``"table"``).
    """
    out = []
    holding = None
    for text in actions:
        m = _ACQUIRE.match(text)
        if m:
            holding = m.group(2)
            continue
        m = _RELEASE.match(text)
        if m and m.group(2) == holding:
            out.append((holding, m.group(3) or "table"))
            holding = None
    return out


@dataclass
class CalibrationResult:
    v_min: float
    v_max: float
    paths: dict[float, list[tuple[str, str]]] = field(default_factory=dict)
    matched: bool = False
    error: str | None = None


def calibrate(
    expected: dict[float, list[tuple[str, str]]],
    v_mins: Sequence[float],
    v_maxs: Sequence[float],
    make=None,
) -> list[CalibrationResult]:
    """Grid search over normalization bounds for plans whose success-path moves match ``expected``.

    ``expected`` maps robustness to the wanted move list; ``make(R, v_min, v_max)``
    builds the scenario (the fig9 scenario by default).  Every grid point is returned;
    matching points have ``matched`` set.
    """
    from .planner import plan

    if make is None:
        make = lambda R, lo, hi: slippery_blocks(R, v_min=lo, v_max=hi)  # noqa: E731
    results = []
    for lo, hi in itertools.product(v_mins, v_maxs):
        if not lo < hi:
            continue
        res = CalibrationResult(lo, hi)
        try:
            for R in expected:
                p = plan(make(R, lo, hi), memo=True)
                res.paths[R] = moves(p.success_path())
        except ValueRangeError as exc:
            # bounds tighter than the reachable values
            res.error = str(exc)
            results.append(res)
            continue
        res.matched = all(res.paths[R] == want for R, want in expected.items())
        results.append(res)
    return results
