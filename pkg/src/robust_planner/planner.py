"""Depth-limited expected-utility search over the AND/OR tree of a scenario.

States are OR nodes (pick the action of highest expected utility), actions
are AND nodes (every outcome gets its own contingency subtree).  The solved
tree is a :class:`ConditionalPlan`.

Two entry points share one search routine: :func:`plan` evaluates every
applicable action, :func:`plan_bnb` abandons an action as soon as the
optimistic bound on its expected utility cannot beat the best sibling.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator

from .core import GroundAction, Scenario, State, apply_outcome, fact, ground_actions, state_value
from .errors import PlanFormatError
from .utility import normalize, utility

# Utility is normalized, so U_R(1) = 1 bounds every expected utility.
U_MAX = 1.0


@dataclass(frozen=True, eq=True)
class OutcomeBranch:
    label: str
    probability: float
    child: StateNode


@dataclass(frozen=True, eq=True)
class ActionNode:
    action: str
    eu: float
    outcomes: tuple[OutcomeBranch, ...]
    ground: GroundAction | None = field(default=None, compare=False, repr=False)

    @property
    def children(self) -> tuple[StateNode, ...]:
        return tuple(b.child for b in self.outcomes)


@dataclass(frozen=True, eq=True)
class StateNode:
    state: State
    depth: int
    eu: float
    value: float
    chosen: ActionNode | None = None

    @property
    def terminal(self) -> bool:
        return self.chosen is None


@dataclass
class SearchStats:
    expanded_state_nodes: int = 0
    expanded_action_nodes: int = 0
    pruned_action_nodes: int = 0


@dataclass(frozen=True)
class ConditionalPlan:
    root: StateNode
    scenario: Scenario | None = field(default=None, compare=False, repr=False)
    stats: SearchStats = field(default_factory=SearchStats, compare=False)

    @property
    def eu(self) -> float:
        return self.root.eu

    def state_nodes(self) -> Iterator[StateNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if node.chosen is not None:
                stack.extend(reversed(node.chosen.children))

    def action_nodes(self) -> Iterator[ActionNode]:
        for node in self.state_nodes():
            if node.chosen is not None:
                yield node.chosen

    def success_path(self, label: str = "success") -> list[str]:
        """Chosen actions along the branch where every action takes ``label``.

        Actions without an outcome of that name follow their first outcome.
        """
        path = []
        node = self.root
        while node.chosen is not None:
            path.append(node.chosen.action)
            branch = next((b for b in node.chosen.outcomes if b.label == label), node.chosen.outcomes[0])
            node = branch.child
        return path

    def success_leaf(self, label: str = "success") -> StateNode:
        node = self.root
        while node.chosen is not None:
            node = next((b for b in node.chosen.outcomes if b.label == label), node.chosen.outcomes[0]).child
        return node


class Planner:
    """Recursive solver for one scenario.

    ``prune`` enables alpha pruning at each OR node.  ``memo`` caches solved
    (state, depth) subtrees; the cached subtree is the one a fresh search
    would rebuild, so outputs are unchanged while counters shrink.
    """

    def __init__(self, scenario: Scenario, *, prune: bool = False, memo: bool = False):
        self.scenario = scenario
        self.prune = prune
        self.memo = memo
        self.stats = SearchStats()
        self._leaf_cache: dict[State, tuple[float, float]] = {}
        self._actions_cache: dict[frozenset, list[GroundAction]] = {}
        self._memo: dict[tuple[State, int], StateNode] = {}

    def leaf(self, s: State) -> tuple[float, float]:
        """(v(s), U_R(V(s))) for a state, cached."""
        hit = self._leaf_cache.get(s)
        if hit is None:
            sc = self.scenario
            v = state_value(s, sc.value_model)
            hit = (v, utility(normalize(v, sc.v_min, sc.v_max), sc.robustness))
            self._leaf_cache[s] = hit
        return hit

    def actions(self, s: State) -> list[GroundAction]:
        """Applicable actions in evaluation order (canonical text order)."""
        hit = self._actions_cache.get(s.facts)
        if hit is None:
            sc = self.scenario
            hit = sorted(ground_actions(sc.operators, sc.objects, s), key=lambda a: a.text)
            self._actions_cache[s.facts] = hit
        return hit

    def expected_utility_state(self, s: State, depth: int) -> tuple[float, StateNode]:
        if self.memo:
            hit = self._memo.get((s, depth))
            if hit is not None:
                return hit.eu, hit
        self.stats.expanded_state_nodes += 1
        value, terminal_eu = self.leaf(s)
        best: ActionNode | None = None
        if depth < self.scenario.depth_limit:
            for a in self.actions(s):
                alpha = best.eu if (self.prune and best is not None) else -math.inf
                eu, node = self.expected_utility_action(a, s, depth, alpha)
                if node is None:
                    continue
                # actions come in text order, so strict > keeps the smallest text on ties
                if best is None or eu > best.eu:
                    best = node
        if best is None:
            result = StateNode(s, depth, terminal_eu, value, None)
        else:
            result = StateNode(s, depth, best.eu, value, best)
        if self.memo:
            self._memo[(s, depth)] = result
        return result.eu, result

    def expected_utility_action(
        self, a: GroundAction, s: State, depth: int, alpha: float = -math.inf
    ) -> tuple[float, ActionNode | None]:
        """Back up the expected utility of ``a`` in ``s``.

        Returns ``(eu, None)`` when the action was abandoned because its
        optimistic bound fell to ``alpha`` or below; ``eu`` is then that bound.
        """
        self.stats.expanded_action_nodes += 1
        total = 0.0
        branches = []
        outcomes = a.outcomes
        for i, o in enumerate(outcomes):
            if alpha > -math.inf:
                # summed in the same order as ``total`` so rounding cannot let eu exceed bound
                bound = total
                for rest in outcomes[i:]:
                    bound = bound + rest.probability * U_MAX
                if bound <= alpha:
                    self.stats.pruned_action_nodes += 1
                    return bound, None
            child_eu, child = self.expected_utility_state(apply_outcome(s, a, i), depth + 1)
            total = total + o.probability * child_eu
            branches.append(OutcomeBranch(o.label, o.probability, child))
        return total, ActionNode(a.text, total, tuple(branches), a)

    def solve(self) -> ConditionalPlan:
        _, root = self.expected_utility_state(self.scenario.initial, 0)
        return ConditionalPlan(root, self.scenario, self.stats)


def plan(scenario: Scenario, *, memo: bool = False) -> ConditionalPlan:
    """Solve the full depth-limited AND/OR tree."""
    return Planner(scenario, memo=memo).solve()


def plan_bnb(scenario: Scenario, *, prune: bool = True, memo: bool = False) -> ConditionalPlan:
    """Solve with alpha pruning; same chosen actions and utilities as :func:`plan`."""
    return Planner(scenario, prune=prune, memo=memo).solve()


# --------------------------------------------------------------------------- JSON


def _state_to_json(node: StateNode) -> dict:
    chosen = None
    if node.chosen is not None:
        chosen = {
            "action": node.chosen.action,
            "eu": node.chosen.eu,
            "outcomes": [
                {"label": b.label, "prob": b.probability, "child": _state_to_json(b.child)}
                for b in node.chosen.outcomes
            ],
        }
    return {
        "facts": node.state.sorted_facts(),
        "acc_value": node.state.acc_value,
        "value": node.value,
        "depth": node.depth,
        "eu": node.eu,
        "chosen": chosen,
    }


def export_plan(p: ConditionalPlan) -> dict:
    return _state_to_json(p.root)


def dumps_plan(p: ConditionalPlan) -> str:
    return json.dumps(export_plan(p), indent=1) + "\n"


def _num(doc: dict, key: str, where: str) -> float:
    if key not in doc:
        raise PlanFormatError(f"{where}: missing '{key}'")
    x = doc[key]
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise PlanFormatError(f"{where}: '{key}' must be a number")
    return float(x)


def _state_from_json(doc, where: str) -> StateNode:
    if not isinstance(doc, dict):
        raise PlanFormatError(f"{where}: state node must be an object")
    facts = doc.get("facts")
    if not isinstance(facts, list) or not all(isinstance(f, str) for f in facts):
        raise PlanFormatError(f"{where}: 'facts' must be a list of strings")
    try:
        state = State(frozenset(fact(f) for f in facts), _num(doc, "acc_value", where))
    except ValueError as exc:
        raise PlanFormatError(f"{where}: {exc}") from None
    depth = doc.get("depth")
    if isinstance(depth, bool) or not isinstance(depth, int) or depth < 0:
        raise PlanFormatError(f"{where}: 'depth' must be a non-negative integer")
    eu = _num(doc, "eu", where)
    value = _num(doc, "value", where)
    if "chosen" not in doc:
        raise PlanFormatError(f"{where}: missing 'chosen'")
    chosen_doc = doc["chosen"]
    chosen = None
    if chosen_doc is not None:
        if not isinstance(chosen_doc, dict):
            raise PlanFormatError(f"{where}: 'chosen' must be an object or null")
        action = chosen_doc.get("action")
        if not isinstance(action, str) or not action:
            raise PlanFormatError(f"{where}: action node needs an 'action' string")
        a_eu = _num(chosen_doc, "eu", where + "/" + action)
        outs = chosen_doc.get("outcomes")
        if not isinstance(outs, list) or not outs:
            raise PlanFormatError(f"{where}/{action}: 'outcomes' must be a non-empty list")
        branches = []
        for j, o in enumerate(outs):
            w = f"{where}/{action}[{j}]"
            if not isinstance(o, dict) or "child" not in o or not isinstance(o.get("label"), str):
                raise PlanFormatError(f"{w}: outcome needs 'label', 'prob' and 'child'")
            prob = _num(o, "prob", w)
            if not 0.0 <= prob <= 1.0:
                raise PlanFormatError(f"{w}: probability {prob} outside [0,1]")
            child = _state_from_json(o["child"], w)
            if child.depth != depth + 1:
                raise PlanFormatError(f"{w}: child depth {child.depth}, expected {depth + 1}")
            branches.append(OutcomeBranch(o["label"], prob, child))
        if abs(math.fsum(b.probability for b in branches) - 1.0) > 1e-9:
            raise PlanFormatError(f"{where}/{action}: outcome probabilities do not sum to 1")
        labels = [b.label for b in branches]
        if len(set(labels)) != len(labels):
            raise PlanFormatError(f"{where}/{action}: duplicate outcome labels")
        chosen = ActionNode(action, a_eu, tuple(branches))
    return StateNode(state, depth, eu, value, chosen)


def import_plan(doc) -> ConditionalPlan:
    """Rebuild a plan from its JSON document (a dict or a JSON string)."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise PlanFormatError(f"not valid JSON: {exc}") from None
    root = _state_from_json(doc, "root")
    if root.depth != 0:
        raise PlanFormatError("root node must have depth 0")
    return ConditionalPlan(root)


def check_plan(p: ConditionalPlan, tol: float = 1e-12) -> None:
    """Raise PlanFormatError unless backed-up utilities are consistent."""
    for node in p.state_nodes():
        if node.chosen is None:
            continue
        a = node.chosen
        backed = sum(b.probability * b.child.eu for b in a.outcomes)
        if abs(backed - a.eu) > tol:
            raise PlanFormatError(f"{a.action} at depth {node.depth}: eu {a.eu} != backed-up {backed}")
        if abs(node.eu - a.eu) > tol:
            raise PlanFormatError(f"state at depth {node.depth}: eu differs from chosen action")
