"""Line-oriented text format for domains and scenarios.

Domain documents::

    domain slippery-blocks
      types block
      operator stack(?b: block, ?c: block)
        pre: holding(?b), clear(?c)
        outcome success prob 0.72:
          add: [on(?b,?c), clear(?b), hand-empty]
          del: [holding(?b), clear(?c)]
        outcome failure prob 0.28:
          add: []
          del: []

Scenario documents::

    problem fig9
      domain slippery-blocks
      objects b1 b2 b3 b4 b5 : block
      init: on-table(b2), on(b3,b2), clear(b3), hand-empty, ...
      value-model blocksworld worths { b1:1, b2:2, b3:3, b4:4, b5:5 }
      vmin 0   vmax 55
      depth-limit 6
      robustness 0.5

Indentation is ignored, ``;`` starts a comment, and a line ending in ``,``
(or with an unclosed ``[``/``{``) continues on the next line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal

from .core import (
    BlocksworldValueModel,
    DeltaValueModel,
    Domain,
    Fact,
    OperatorSchema,
    OutcomeSpec,
    Scenario,
    State,
)
from .errors import DslError, ModelError

_IDENT = r"[A-Za-z_][A-Za-z0-9_\-]*"
_IDENT_RE = re.compile(_IDENT)
_VAR_RE = re.compile(r"\?" + _IDENT)
_NUMBER_RE = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)")
_INT_RE = re.compile(r"[+-]?\d+")


@dataclass
class _Line:
    text: str
    lineno: int
    # column offset of each character in ``text`` (continuations keep their own columns)
    cols: list[int]


def _logical_lines(text: str) -> list[_Line]:
    out: list[_Line] = []
    pending: _Line | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split(";", 1)[0].rstrip()
        stripped = body.lstrip()
        if not stripped:
            continue
        start = len(body) - len(stripped)
        cols = list(range(start + 1, len(body) + 1))
        if pending is None:
            pending = _Line(stripped, lineno, cols)
        else:
            pending.text += " " + stripped
            pending.cols += [cols[0]] + cols
        depth = pending.text.count("[") - pending.text.count("]")
        depth += pending.text.count("{") - pending.text.count("}")
        if pending.text.endswith(",") or depth > 0:
            continue
        out.append(pending)
        pending = None
    if pending is not None:
        out.append(pending)
    return out


class _Cursor:
    """Character scanner over one logical line, reporting 1-based columns."""

    def __init__(self, line: _Line):
        self.line = line
        self.text = line.text
        self.pos = 0

    def error(self, message: str) -> DslError:
        i = min(self.pos, len(self.line.cols) - 1)
        return DslError(message, self.line.lineno, self.line.cols[i] if self.line.cols else None)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def accept(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def match(self, pattern: re.Pattern, what: str) -> str:
        self.skip_ws()
        m = pattern.match(self.text, self.pos)
        if not m:
            raise self.error(f"expected {what}")
        self.pos = m.end()
        return m.group(0)

    def ident(self) -> str:
        return self.match(_IDENT_RE, "identifier")

    def word(self) -> str:
        """Next whitespace-delimited token (used for keywords)."""
        self.skip_ws()
        m = re.compile(r"[^\s:(\[{]+").match(self.text, self.pos)
        if not m:
            raise self.error("expected keyword")
        self.pos = m.end()
        return m.group(0)

    def number(self) -> float:
        return float(self.match(_NUMBER_RE, "decimal number"))

    def integer(self) -> int:
        tok = self.match(_NUMBER_RE, "integer")
        if not _INT_RE.fullmatch(tok):
            raise self.error(f"expected integer, got {tok}")
        return int(tok)

    def end(self) -> None:
        if not self.at_end():
            raise self.error(f"unexpected text {self.text[self.pos:]!r}")

    def arg(self) -> str:
        self.skip_ws()
        if self.peek() == "?":
            return self.match(_VAR_RE, "variable")
        return self.ident()

    def fact(self) -> Fact:
        pred = self.ident()
        args: list[str] = []
        if self.accept("("):
            if not self.accept(")"):
                args.append(self.arg())
                while self.accept(","):
                    args.append(self.arg())
                self.expect(")")
        return Fact(pred, tuple(args))

    def fact_list(self, bracketed: bool) -> list[Fact]:
        facts: list[Fact] = []
        if bracketed:
            self.expect("[")
            if self.accept("]"):
                return facts
        elif self.at_end():
            return facts
        facts.append(self.fact())
        while self.accept(","):
            facts.append(self.fact())
        if bracketed:
            self.expect("]")
        return facts


# --------------------------------------------------------------------------- domain


@dataclass
class _OutcomeDraft:
    label: str
    prob: float
    add: list[Fact] | None = None
    delete: list[Fact] | None = None
    value: float = 0.0


@dataclass
class _OperatorDraft:
    name: str
    params: list[tuple[str, str]]
    lineno: int
    pre: list[Fact] | None = None
    outcomes: list[_OutcomeDraft] | None = None


def parse_domain(text: str) -> Domain:
    """Parse and validate a domain document.

    All-or-nothing: any error raises :class:`DslError` and nothing is returned.
    """
    lines = _logical_lines(text)
    if not lines:
        raise DslError("empty domain document")
    name: str | None = None
    types: list[str] = []
    ops: list[_OperatorDraft] = []
    for line in lines:
        cur = _Cursor(line)
        kw = cur.word()
        if name is None and kw != "domain":
            raise cur.error("document must start with 'domain <name>'")
        if kw == "domain":
            if name is not None:
                raise cur.error("duplicate 'domain' line")
            name = cur.ident()
            cur.end()
        elif kw == "types":
            while not cur.at_end():
                types.append(cur.ident())
        elif kw == "operator":
            op_name = cur.ident()
            cur.expect("(")
            params: list[tuple[str, str]] = []
            if not cur.accept(")"):
                while True:
                    var = cur.match(_VAR_RE, "parameter variable")
                    cur.expect(":")
                    typ = cur.ident()
                    if typ not in types:
                        raise cur.error(f"operator {op_name}: unknown type {typ}")
                    params.append((var, typ))
                    if cur.accept(")"):
                        break
                    cur.expect(",")
            cur.end()
            if any(o.name == op_name for o in ops):
                raise DslError(f"duplicate operator {op_name}", line.lineno)
            ops.append(_OperatorDraft(op_name, params, line.lineno))
        elif kw in ("pre:", "pre"):
            op = _current_op(ops, cur)
            cur.accept(":")
            if op.pre is not None:
                raise cur.error(f"operator {op.name}: duplicate 'pre'")
            bracketed = cur.peek() == "["
            op.pre = cur.fact_list(bracketed)
            cur.end()
        elif kw == "outcome":
            op = _current_op(ops, cur)
            label = cur.ident()
            if cur.word() != "prob":
                raise cur.error("expected 'prob'")
            prob = cur.number()
            cur.expect(":")
            cur.end()
            op.outcomes = op.outcomes or []
            if any(o.label == label for o in op.outcomes):
                raise cur.error(f"operator {op.name}: duplicate outcome {label}")
            op.outcomes.append(_OutcomeDraft(label, prob))
        elif kw in ("add", "add:", "del", "del:"):
            out = _current_outcome(ops, cur)
            cur.accept(":")
            facts = cur.fact_list(bracketed=True)
            cur.end()
            attr = "add" if kw.startswith("add") else "delete"
            if getattr(out, attr) is not None:
                raise cur.error(f"duplicate '{kw.rstrip(':')}' in outcome {out.label}")
            setattr(out, attr, facts)
        elif kw in ("value", "value:"):
            out = _current_outcome(ops, cur)
            cur.accept(":")
            out.value = cur.number()
            cur.end()
        else:
            raise DslError(f"unknown keyword {kw!r}", line.lineno, line.cols[0])

    schemas = []
    for op in ops:
        if not op.outcomes:
            raise DslError(f"operator {op.name}: no outcomes", op.lineno)
        try:
            schemas.append(
                OperatorSchema(
                    op.name,
                    tuple(op.params),
                    tuple(op.pre or ()),
                    tuple(
                        OutcomeSpec(o.label, o.prob, tuple(o.add or ()), tuple(o.delete or ()), o.value)
                        for o in op.outcomes
                    ),
                )
            )
        except ModelError as exc:
            raise DslError(str(exc), op.lineno) from None
    return Domain(name, tuple(types), tuple(schemas))


def _current_op(ops: list[_OperatorDraft], cur: _Cursor) -> _OperatorDraft:
    if not ops:
        raise cur.error("clause outside of an operator")
    return ops[-1]


def _current_outcome(ops: list[_OperatorDraft], cur: _Cursor) -> _OutcomeDraft:
    op = _current_op(ops, cur)
    if not op.outcomes:
        raise cur.error(f"operator {op.name}: clause outside of an outcome")
    return op.outcomes[-1]


# --------------------------------------------------------------------------- scenario


def greedy_tower_bound(worths: dict[str, float]) -> float:
    """Value of one tower holding every block, ascending worth bottom to top."""
    return float(sum(w * h for h, w in enumerate(sorted(worths.values()), start=1)))


def parse_scenario(text: str, domain: Domain) -> Scenario:
    """Parse a scenario document against an already-parsed domain.

    Reference errors raise :class:`DslError`; range violations (bounds,
    robustness) raise :class:`~robust_planner.errors.ScenarioError`.
    """
    lines = _logical_lines(text)
    if not lines:
        raise DslError("empty scenario document")
    name: str | None = None
    objects: list[tuple[str, str]] = []
    init: list[tuple[Fact, _Cursor]] | None = None
    value_model = None
    fields: dict[str, float] = {}
    arities: dict[str, set[int]] = {}
    for op in domain.operators:
        for f in op.preconditions:
            arities.setdefault(f.predicate, set()).add(len(f.args))
        for o in op.outcomes:
            for f in o.add_list + o.delete_list:
                arities.setdefault(f.predicate, set()).add(len(f.args))

    for line in lines:
        cur = _Cursor(line)
        kw = cur.word()
        if name is None and kw != "problem":
            raise cur.error("document must start with 'problem <name>'")
        if kw == "problem":
            if name is not None:
                raise cur.error("duplicate 'problem' line")
            name = cur.ident()
            cur.end()
            continue
        if kw in ("init:", "init"):
            cur.accept(":")
            if init is not None:
                raise cur.error("duplicate 'init'")
            init = []
            bracketed = cur.peek() == "["
            for f in cur.fact_list(bracketed):
                init.append((f, cur))
            cur.end()
            continue
        if kw == "objects":
            names = []
            while cur.peek() != ":":
                if cur.at_end():
                    raise cur.error("expected ': <type>' after object names")
                names.append(cur.ident())
            cur.expect(":")
            typ = cur.ident()
            cur.end()
            if typ not in domain.types:
                raise cur.error(f"unknown type {typ}")
            for n in names:
                if any(n == o for o, _ in objects):
                    raise cur.error(f"duplicate object {n}")
                objects.append((n, typ))
            continue
        if kw == "value-model":
            if value_model is not None:
                raise cur.error("duplicate 'value-model'")
            variant = cur.word()
            if variant == "delta":
                value_model = DeltaValueModel()
            elif variant == "blocksworld":
                if cur.word() != "worths":
                    raise cur.error("expected 'worths'")
                cur.expect("{")
                worths: dict[str, float] = {}
                if not cur.accept("}"):
                    while True:
                        obj = cur.ident()
                        cur.expect(":")
                        if obj in worths:
                            raise cur.error(f"duplicate worth for {obj}")
                        worths[obj] = cur.number()
                        if cur.accept("}"):
                            break
                        cur.expect(",")
                value_model = BlocksworldValueModel(worths)
            else:
                raise cur.error(f"unknown value model {variant!r}")
            cur.end()
            continue
        # scalar keyword/value pairs, several allowed per line
        cur.pos = 0
        while not cur.at_end():
            key = cur.word()
            if key in fields:
                raise cur.error(f"duplicate '{key}'")
            if key == "domain":
                dname = cur.ident()
                if dname != domain.name:
                    raise cur.error(f"scenario expects domain {dname}, got {domain.name}")
                fields[key] = 0.0
            elif key in ("vmin", "vmax", "robustness"):
                fields[key] = cur.number()
            elif key == "depth-limit":
                fields[key] = cur.integer()
            else:
                raise cur.error(f"unknown keyword {key!r}")

    if "depth-limit" not in fields:
        raise DslError("scenario is missing 'depth-limit'")
    if value_model is None:
        raise DslError("scenario is missing 'value-model'")
    declared = {o for o, _ in objects}
    facts = []
    for f, cur in init or ():
        if f.predicate not in arities:
            raise DslError(f"unknown predicate {f.predicate} in init", cur.line.lineno)
        if len(f.args) not in arities[f.predicate]:
            raise DslError(f"wrong arity for {f} in init", cur.line.lineno)
        for a in f.args:
            if a.startswith("?"):
                raise DslError(f"variable {a} in init fact {f}", cur.line.lineno)
            if a not in declared:
                raise DslError(f"undeclared object {a} in init fact {f}", cur.line.lineno)
        facts.append(f)
    if isinstance(value_model, BlocksworldValueModel):
        undeclared = set(value_model.worths) - declared
        if undeclared:
            raise DslError(f"worth given for undeclared object {', '.join(sorted(undeclared))}")
        v_max = fields.get("vmax", greedy_tower_bound(dict(value_model.worths)))
    else:
        if "vmax" not in fields:
            raise DslError("delta value model requires an explicit 'vmax'")
        v_max = fields["vmax"]
    return Scenario(
        name=name,
        domain=domain,
        objects=tuple(objects),
        initial=State(frozenset(facts)),
        value_model=value_model,
        v_min=fields.get("vmin", 0.0),
        v_max=v_max,
        depth_limit=int(fields["depth-limit"]),
        robustness=fields.get("robustness", 0.0),
    )


# --------------------------------------------------------------------------- printing


def format_number(x: float) -> str:
    """Shortest decimal (never exponent) form that parses back to ``x``."""
    x = float(x)
    if x.is_integer():
        return str(int(x))
    return format(Decimal(repr(x)), "f")


def _facts(facts) -> str:
    return ", ".join(str(f) for f in facts)


def format_domain(domain: Domain) -> str:
    out = [f"domain {domain.name}"]
    if domain.types:
        out.append("  types " + " ".join(domain.types))
    for op in domain.operators:
        params = ", ".join(f"{v}: {t}" for v, t in op.params)
        out.append(f"  operator {op.name}({params})")
        out.append(f"    pre: {_facts(op.preconditions)}".rstrip())
        for o in op.outcomes:
            out.append(f"    outcome {o.label} prob {format_number(o.probability)}:")
            out.append(f"      add: [{_facts(o.add_list)}]")
            out.append(f"      del: [{_facts(o.delete_list)}]")
            if o.value_delta:
                out.append(f"      value: {format_number(o.value_delta)}")
    return "\n".join(out) + "\n"


def format_scenario(scenario: Scenario) -> str:
    out = [f"problem {scenario.name}", f"  domain {scenario.domain.name}"]
    by_type: dict[str, list[str]] = {}
    for o, t in scenario.objects:
        by_type.setdefault(t, []).append(o)
    for t, names in by_type.items():
        out.append(f"  objects {' '.join(names)} : {t}")
    out.append(f"  init: {_facts(sorted(scenario.initial.facts, key=str))}".rstrip())
    vm = scenario.value_model
    if isinstance(vm, BlocksworldValueModel):
        worths = ", ".join(f"{b}:{format_number(w)}" for b, w in vm.worths.items())
        out.append(f"  value-model blocksworld worths {{ {worths} }}")
    else:
        out.append("  value-model delta")
    out.append(f"  vmin {format_number(scenario.v_min)}   vmax {format_number(scenario.v_max)}")
    out.append(f"  depth-limit {scenario.depth_limit}")
    out.append(f"  robustness {format_number(scenario.robustness)}")
    return "\n".join(out) + "\n"


def load_domain(path) -> Domain:
    with open(path, encoding="utf-8") as fh:
        return parse_domain(fh.read())


def load_scenario(path, domain: Domain) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read(), domain)
