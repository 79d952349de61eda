"""Ground representation of facts, states and probabilistic STRIPS operators.

Operators carry ``k >= 1`` outcomes, each with its own add list, delete list,
probability and value delta.  Everything here is immutable, so values can be
shared freely between planner nodes.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

from .errors import ModelError, ScenarioError

PROBABILITY_TOLERANCE = 1e-9


class Fact(NamedTuple):
    """A ground fact or fact pattern, e.g. ``on(b3,b2)`` or ``hand-empty``.

    Arguments beginning with ``?`` are variables (only meaningful inside
    operator schemas).
    """

    predicate: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(self.args)})"

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(a for a in self.args if a.startswith("?"))

    def substitute(self, binding: Mapping[str, str]) -> Fact:
        return Fact(self.predicate, tuple(binding.get(a, a) for a in self.args))


def fact(text: str) -> Fact:
    """Build a Fact from its printed form (``"on(b1,b2)"``, ``"hand-empty"``)."""
    text = text.strip()
    if "(" not in text:
        return Fact(text)
    pred, _, rest = text.partition("(")
    if not rest.endswith(")"):
        raise ValueError(f"malformed fact {text!r}")
    inner = rest[:-1].strip()
    args = tuple(a.strip() for a in inner.split(",")) if inner else ()
    return Fact(pred.strip(), args)


@dataclass(frozen=True, slots=True)
class State:
    facts: frozenset[Fact]
    acc_value: float = 0.0

    @classmethod
    def of(cls, facts: Iterable[Fact | str], acc_value: float = 0.0) -> State:
        return cls(frozenset(f if isinstance(f, Fact) else fact(f) for f in facts), acc_value)

    def __contains__(self, item: Fact) -> bool:
        return item in self.facts

    def sorted_facts(self) -> list[str]:
        return sorted(str(f) for f in self.facts)


@dataclass(frozen=True)
class OutcomeSpec:
    label: str
    probability: float
    add_list: tuple[Fact, ...] = ()
    delete_list: tuple[Fact, ...] = ()
    value_delta: float = 0.0


@dataclass(frozen=True)
class OperatorSchema:
    """A decision operator: typed parameters, preconditions, k outcomes."""

    name: str
    params: tuple[tuple[str, str], ...]
    preconditions: tuple[Fact, ...]
    outcomes: tuple[OutcomeSpec, ...]

    def __post_init__(self):
        if not self.outcomes:
            raise ModelError(f"operator {self.name}: needs at least one outcome")
        names = [p for p, _ in self.params]
        if len(set(names)) != len(names):
            raise ModelError(f"operator {self.name}: duplicate parameter")
        for o in self.outcomes:
            if not 0.0 < o.probability <= 1.0:
                raise ModelError(
                    f"operator {self.name}: outcome {o.label} probability {o.probability} not in (0,1]"
                )
        total = math.fsum(o.probability for o in self.outcomes)
        if abs(total - 1.0) > PROBABILITY_TOLERANCE:
            raise ModelError(f"operator {self.name}: outcome probabilities sum to {total:g}, not 1")
        patterns = list(self.preconditions)
        for o in self.outcomes:
            patterns.extend(o.add_list)
            patterns.extend(o.delete_list)
        bound = set(names)
        for p in patterns:
            for v in p.variables:
                if v not in bound:
                    raise ModelError(f"operator {self.name}: unbound variable {v} in {p}")

    @property
    def k(self) -> int:
        return len(self.outcomes)

    def ground(self, objects: Sequence[str]) -> GroundAction:
        if len(objects) != len(self.params):
            raise ModelError(f"operator {self.name}: expected {len(self.params)} arguments")
        binding = {var: obj for (var, _), obj in zip(self.params, objects)}
        outs = tuple(
            GroundOutcome(
                o.label,
                o.probability,
                frozenset(f.substitute(binding) for f in o.add_list),
                frozenset(f.substitute(binding) for f in o.delete_list),
                o.value_delta,
            )
            for o in self.outcomes
        )
        return GroundAction(
            self.name,
            tuple(objects),
            frozenset(f.substitute(binding) for f in self.preconditions),
            outs,
            schema=self,
        )


@dataclass(frozen=True, slots=True)
class GroundOutcome:
    label: str
    probability: float
    add: frozenset[Fact]
    delete: frozenset[Fact]
    value_delta: float = 0.0


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    preconditions: frozenset[Fact]
    outcomes: tuple[GroundOutcome, ...]
    schema: OperatorSchema | None = field(default=None, compare=False, repr=False)
    text: str = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "text", f"{self.name}({','.join(self.args)})")

    def __str__(self) -> str:
        return self.text

    @property
    def k(self) -> int:
        return len(self.outcomes)


@dataclass(frozen=True)
class Domain:
    name: str
    types: tuple[str, ...]
    operators: tuple[OperatorSchema, ...]

    def predicates(self) -> set[str]:
        preds = set()
        for op in self.operators:
            preds.update(f.predicate for f in op.preconditions)
            for o in op.outcomes:
                preds.update(f.predicate for f in o.add_list)
                preds.update(f.predicate for f in o.delete_list)
        return preds


@dataclass(frozen=True)
class DeltaValueModel:
    """Value of a state is its accumulated outcome value deltas."""


@dataclass(frozen=True)
class BlocksworldValueModel:
    """Value is the sum of worth times height over all blocks."""

    worths: Mapping[str, float]


ValueModel = Union[DeltaValueModel, BlocksworldValueModel]


@dataclass(frozen=True)
class Scenario:
    name: str
    domain: Domain
    objects: tuple[tuple[str, str], ...]
    initial: State
    value_model: ValueModel
    v_min: float
    v_max: float
    depth_limit: int
    robustness: float = 0.0

    def __post_init__(self):
        if not self.v_min < self.v_max:
            raise ScenarioError(f"vmin ({self.v_min:g}) must be below vmax ({self.v_max:g})")
        if not 0.0 <= self.robustness < 1.0:
            raise ScenarioError(f"robustness {self.robustness:g} outside [0, 1)")
        if isinstance(self.depth_limit, bool) or not isinstance(self.depth_limit, int) or self.depth_limit < 0:
            raise ScenarioError(f"depth limit must be a non-negative integer, got {self.depth_limit!r}")
        if isinstance(self.value_model, BlocksworldValueModel):
            names = {o for o, _ in self.objects}
            missing = names - set(self.value_model.worths)
            if missing:
                raise ScenarioError(f"no worth given for {', '.join(sorted(missing))}")
            extra = set(self.value_model.worths) - names
            if extra:
                raise ScenarioError(f"worth given for undeclared object {', '.join(sorted(extra))}")

    @property
    def operators(self) -> tuple[OperatorSchema, ...]:
        return self.domain.operators

    def with_(self, **changes) -> Scenario:
        return replace(self, **changes)


def apply_outcome(s: State, a: GroundAction, i: int) -> State:
    """Return result_i(a, s): delete list removed first, then add list inserted."""
    if not 0 <= i < len(a.outcomes):
        raise IndexError(f"{a}: outcome index {i} out of range (k={len(a.outcomes)})")
    o = a.outcomes[i]
    if not o.add and not o.delete and o.value_delta == 0:
        return s
    return State((s.facts - o.delete) | o.add, s.acc_value + o.value_delta)


def applicable(s: State, a: GroundAction) -> bool:
    return a.preconditions <= s.facts


@functools.lru_cache(maxsize=64)
def _all_groundings(
    schemas: tuple[OperatorSchema, ...], objects: tuple[tuple[str, str], ...]
) -> tuple[GroundAction, ...]:
    by_type: dict[str, list[str]] = {}
    for name, typ in objects:
        by_type.setdefault(typ, []).append(name)
    for names in by_type.values():
        names.sort()
    out = []
    for schema in schemas:
        pools = [by_type.get(typ, []) for _, typ in schema.params]
        for combo in itertools.product(*pools):
            if len(set(combo)) != len(combo):
                continue
            out.append(schema.ground(combo))
    return tuple(out)


def ground_actions(
    schemas: Sequence[OperatorSchema], objects: Iterable[tuple[str, str]], s: State
) -> list[GroundAction]:
    """All type-correct ground actions applicable in ``s``.

    Ordered by schema declaration, then lexicographically by bound objects.
    A binding never repeats an object.
    """
    candidates = _all_groundings(tuple(schemas), tuple(objects))
    facts = s.facts
    return [a for a in candidates if a.preconditions <= facts]


def block_heights(s: State, blocks: Iterable[str]) -> dict[str, int]:
    """Height of each block: 1 on the table, parent + 1 when stacked, 0 when held."""
    below: dict[str, str | None] = {}
    for f in s.facts:
        if f.predicate == "on" and len(f.args) == 2:
            below[f.args[0]] = f.args[1]
        elif f.predicate == "on-table" and len(f.args) == 1:
            below[f.args[0]] = None
        elif f.predicate == "holding" and len(f.args) == 1:
            below[f.args[0]] = "<hand>"
    heights: dict[str, int] = {}

    def height(b: str, seen: tuple[str, ...] = ()) -> int:
        if b in heights:
            return heights[b]
        if b not in below:
            raise ModelError(f"malformed blocks state: {b} has no position")
        if b in seen:
            raise ModelError(f"malformed blocks state: cycle through {b}")
        under = below[b]
        if under is None:
            h = 1
        elif under == "<hand>":
            h = 0
        else:
            h = height(under, seen + (b,)) + 1
        heights[b] = h
        return h

    return {b: height(b) for b in blocks}


def state_value(s: State, m: ValueModel) -> float:
    """v(s) under the given value model."""
    if isinstance(m, DeltaValueModel):
        return s.acc_value
    if isinstance(m, BlocksworldValueModel):
        h = block_heights(s, m.worths)
        return float(sum(w * h[b] for b, w in m.worths.items()))
    raise ModelError(f"unknown value model {m!r}")
