"""Abstract syntax of the supported ASP subset.

Terms, atoms, literals, rules and programs are immutable values shared by
every later stage (grounding, solving, explanation, learning).  Rules carry
a stable identifier, an optional trace template used by the explainer, and
an origin tag distinguishing article text from judgment-derived rules and
user-supplied evidence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Iterator, Optional, Union

CONST = "const"
STRING = "string"
INT = "int"
VAR = "var"

COMPARISON_OPS = ("=", "!=", "<", "<=", ">", ">=")

ORIGIN_ARTICLE = "article"
ORIGIN_LEARNED = "learned-judgment"
ORIGIN_EVIDENCE = "user-evidence"

_CLASS_RANK = {INT: 0, CONST: 1, STRING: 2}


class SourceError(Exception):
    """Error tied to a position in a source file."""

    def __init__(self, message: str, line: int = 0, col: int = 0, path: str = ""):
        self.message = message
        self.line = line
        self.col = col
        self.path = path
        where = f"{path or '<input>'}:{line}:{col}: " if line else ""
        super().__init__(f"{where}{message}")


class ParseError(SourceError):
    pass


class SafetyError(SourceError):
    """A rule variable is not bound by any positive body atom."""

    def __init__(self, variable: str, rule_text: str, line: int = 0, col: int = 0, path: str = ""):
        self.variable = variable
        super().__init__(
            f"unsafe variable {variable} in rule: {rule_text}", line, col, path
        )


class DuplicateRuleIdError(SourceError):
    pass


@dataclass(frozen=True, order=True)
class Term:
    kind: str
    text: str

    @staticmethod
    def const(name: str) -> "Term":
        return Term(CONST, name)

    @staticmethod
    def string(value: str) -> "Term":
        return Term(STRING, value)

    @staticmethod
    def integer(value: int) -> "Term":
        return Term(INT, str(value))

    @staticmethod
    def var(name: str) -> "Term":
        return Term(VAR, name)

    @property
    def is_ground(self) -> bool:
        return self.kind != VAR

    def order_key(self):
        """Total order on ground terms: integers by value, then constant
        symbols, then quoted strings; lexicographic within a class."""
        if self.kind == INT:
            return (0, int(self.text), "")
        return (_CLASS_RANK[self.kind], 0, self.text)

    def __str__(self) -> str:
        if self.kind == STRING:
            return f'"{self.text}"'
        return self.text


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()

    @property
    def signature(self) -> tuple[str, int]:
        return (self.predicate, len(self.args))

    @property
    def is_ground(self) -> bool:
        return all(t.is_ground for t in self.args)

    def variables(self) -> Iterator[str]:
        for t in self.args:
            if t.kind == VAR:
                yield t.text

    def substitute(self, sub: dict[str, Term]) -> "Atom":
        if not self.args:
            return self
        return Atom(self.predicate, tuple(sub.get(t.text, t) if t.kind == VAR else t for t in self.args))

    def sort_key(self):
        return (self.predicate, tuple(t.order_key() for t in self.args))

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(str(t) for t in self.args)})"


@dataclass(frozen=True)
class AtomLiteral:
    atom: Atom
    negated: bool = False

    def variables(self) -> Iterator[str]:
        return self.atom.variables()

    def substitute(self, sub: dict[str, Term]) -> "AtomLiteral":
        return AtomLiteral(self.atom.substitute(sub), self.negated)

    def __str__(self) -> str:
        return f"not {self.atom}" if self.negated else str(self.atom)


@dataclass(frozen=True)
class Comparison:
    left: Term
    op: str
    right: Term

    def variables(self) -> Iterator[str]:
        for t in (self.left, self.right):
            if t.kind == VAR:
                yield t.text

    def substitute(self, sub: dict[str, Term]) -> "Comparison":
        left = sub.get(self.left.text, self.left) if self.left.kind == VAR else self.left
        right = sub.get(self.right.text, self.right) if self.right.kind == VAR else self.right
        return Comparison(left, self.op, right)

    def evaluate(self) -> bool:
        """Evaluate a ground comparison under the term ordering."""
        if not (self.left.is_ground and self.right.is_ground):
            raise ValueError(f"comparison {self} is not ground")
        lk, rk = self.left.order_key(), self.right.order_key()
        if self.op == "=":
            return lk == rk
        if self.op == "!=":
            return lk != rk
        if self.op == "<":
            return lk < rk
        if self.op == "<=":
            return lk <= rk
        if self.op == ">":
            return lk > rk
        if self.op == ">=":
            return lk >= rk
        raise ValueError(f"unknown comparison operator {self.op}")

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"


BodyLiteral = Union[AtomLiteral, Comparison]


@dataclass(frozen=True)
class ChoiceElement:
    atom: Atom
    condition: tuple[AtomLiteral, ...] = ()
    # Local-variable bindings recorded when a conditional element is expanded
    # at grounding time; used to instantiate trace templates per element.
    bindings: tuple[tuple[str, Term], ...] = ()

    def __str__(self) -> str:
        if self.condition:
            return f"{self.atom} : {', '.join(str(c) for c in self.condition)}"
        return str(self.atom)


@dataclass(frozen=True)
class ChoiceHead:
    lb: int
    ub: Optional[int]  # None = number of elements, resolved at grounding
    elements: tuple[ChoiceElement, ...]

    def resolved_ub(self) -> int:
        return len(self.elements) if self.ub is None else self.ub

    def __str__(self) -> str:
        inner = "; ".join(str(e) for e in self.elements)
        ub = "" if self.ub is None else f" {self.ub}"
        return f"{self.lb} {{{inner}}}{ub}"


@dataclass(frozen=True)
class Rule:
    id: str
    head: Union[Atom, ChoiceHead, None]
    body: tuple[BodyLiteral, ...] = ()
    annotation: Optional[str] = None
    origin: str = ORIGIN_ARTICLE
    specific_over: Optional[str] = None

    @property
    def is_denial(self) -> bool:
        return self.head is None

    @property
    def is_choice(self) -> bool:
        return isinstance(self.head, ChoiceHead)

    @property
    def is_normal(self) -> bool:
        return isinstance(self.head, Atom)

    @property
    def is_fact(self) -> bool:
        return isinstance(self.head, Atom) and not self.body

    def head_atoms(self) -> tuple[Atom, ...]:
        if isinstance(self.head, Atom):
            return (self.head,)
        if isinstance(self.head, ChoiceHead):
            return tuple(e.atom for e in self.head.elements)
        return ()

    def positive_body(self) -> tuple[Atom, ...]:
        return tuple(l.atom for l in self.body if isinstance(l, AtomLiteral) and not l.negated)

    def negative_body(self) -> tuple[Atom, ...]:
        return tuple(l.atom for l in self.body if isinstance(l, AtomLiteral) and l.negated)

    def comparisons(self) -> tuple[Comparison, ...]:
        return tuple(l for l in self.body if isinstance(l, Comparison))

    def variables(self) -> list[str]:
        """All variable names, in first-occurrence order (head, then body)."""
        seen: list[str] = []

        def visit(names: Iterator[str]):
            for n in names:
                if n not in seen:
                    seen.append(n)

        if isinstance(self.head, Atom):
            visit(self.head.variables())
        elif isinstance(self.head, ChoiceHead):
            for e in self.head.elements:
                visit(e.atom.variables())
                for c in e.condition:
                    visit(c.variables())
        for lit in self.body:
            visit(lit.variables())
        return seen

    @property
    def is_ground(self) -> bool:
        return not self.variables()

    def __str__(self) -> str:
        return rule_text(self)


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...] = ()

    def __post_init__(self):
        seen: set[str] = set()
        for r in self.rules:
            if r.id in seen:
                raise DuplicateRuleIdError(f"duplicate rule id {r.id!r}")
            seen.add(r.id)

    @property
    def annotations(self) -> dict[str, str]:
        return {r.id: r.annotation for r in self.rules if r.annotation is not None}

    def facts(self) -> tuple[Atom, ...]:
        return tuple(r.head for r in self.rules if r.is_fact)

    def extend(self, rules: tuple[Rule, ...] | list[Rule]) -> "Program":
        return Program(self.rules + tuple(rules))

    def __str__(self) -> str:
        return program_text(self)


def check_safety(rule: Rule, line: int = 0, col: int = 0, path: str = "") -> None:
    """Raise SafetyError unless every variable is bound.

    A variable is bound when it occurs in a positive, non-comparison body
    literal; a variable local to a choice element may instead be bound by
    the element's condition.
    """
    body_bound = {v for a in rule.positive_body() for v in a.variables()}
    global_vars: set[str] = set(body_bound)
    for lit in rule.body:
        global_vars.update(lit.variables())
    if isinstance(rule.head, Atom):
        global_vars.update(rule.head.variables())
        for v in rule.head.variables():
            if v not in body_bound:
                raise SafetyError(v, rule_text(rule), line, col, path)
    for v in global_vars:
        if v not in body_bound:
            raise SafetyError(v, rule_text(rule), line, col, path)
    if isinstance(rule.head, ChoiceHead):
        for e in rule.head.elements:
            for c in e.condition:
                if c.negated:
                    raise ValueError(f"negated condition {c} in choice element of {rule.id}")
            local_bound = body_bound | {v for c in e.condition for v in c.atom.variables()}
            for v in e.atom.variables():
                if v not in local_bound:
                    raise SafetyError(v, rule_text(rule), line, col, path)


def _render_body(body: tuple[BodyLiteral, ...]) -> str:
    return ", ".join(str(l) for l in body)


def rule_text(rule: Rule) -> str:
    """Deterministic source rendering with the rule's own variable names."""
    if rule.is_denial:
        return f":- {_render_body(rule.body)}."
    head = str(rule.head)
    if not rule.body:
        return f"{head}."
    return f"{head} :- {_render_body(rule.body)}."


def rename_variables(rule: Rule, prefix: str = "V") -> Rule:
    """Rename variables to V1, V2, ... by first occurrence."""
    mapping = {v: Term.var(f"{prefix}{i + 1}") for i, v in enumerate(rule.variables())}
    return substitute_rule(rule, mapping)


def substitute_rule(rule: Rule, sub: dict[str, Term]) -> Rule:
    head: Union[Atom, ChoiceHead, None]
    if isinstance(rule.head, Atom):
        head = rule.head.substitute(sub)
    elif isinstance(rule.head, ChoiceHead):
        head = ChoiceHead(
            rule.head.lb,
            rule.head.ub,
            tuple(
                ChoiceElement(
                    e.atom.substitute(sub),
                    tuple(c.substitute(sub) for c in e.condition),
                    e.bindings,
                )
                for e in rule.head.elements
            ),
        )
    else:
        head = None
    body = tuple(l.substitute(sub) for l in rule.body)
    return replace(rule, head=head, body=body)


def canonical_text(rule: Rule) -> str:
    """Canonical rendering: variables renamed to V1, V2, ... by first
    occurrence; identical up to variable names means identical text."""
    return rule_text(rename_variables(rule))


def program_text(program: Program, canonical: bool = False) -> str:
    """Serialize a program; re-parsing yields a structurally equal program.

    Rule ids and trace templates are emitted as %#id / %!trace lines so they
    survive the round trip.
    """
    lines: list[str] = []
    for r in program.rules:
        lines.append(f"%#id {r.id}")
        if r.specific_over:
            lines.append(f"%#specific-over {r.specific_over}")
        if r.annotation is not None:
            lines.append(f'%!trace "{r.annotation}"')
        lines.append(canonical_text(r) if canonical else rule_text(r))
    return "\n".join(lines) + ("\n" if lines else "")


_PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*|[0-9]+)\}")


def render_template(template: str, variables: dict[str, Term], positional: tuple[Term, ...] = ()) -> str:
    """Instantiate a trace template.

    ``{Var}`` placeholders take the bound term's unquoted text; ``{1}``,
    ``{2}``, ... index the arguments of an annotated fact.  Unresolved
    placeholders are left verbatim (choice templates keep element-local
    placeholders until the element is chosen).
    """

    def repl(m: re.Match) -> str:
        name = m.group(1)
        if name.isdigit():
            idx = int(name) - 1
            if 0 <= idx < len(positional):
                return positional[idx].text
            return m.group(0)
        term = variables.get(name)
        if term is None or not term.is_ground:
            return m.group(0)
        return term.text

    return _PLACEHOLDER.sub(repl, template)


# --- learning-task syntax -------------------------------------------------

MODE_FLAGS = ("positive", "symmetric", "anti_reflexive")


@dataclass(frozen=True)
class Placeholder:
    kind: str  # 'var' | 'const'
    type: str

    def __str__(self) -> str:
        return f"{self.kind}({self.type})"


SchemaArg = Union[Placeholder, Term]


@dataclass(frozen=True)
class ModeDecl:
    kind: str  # 'modeh' | 'modeha' | 'modeb' | 'modec'
    predicate: Optional[str] = None
    schema: tuple[SchemaArg, ...] = ()
    recall: Optional[int] = None
    flags: frozenset[str] = frozenset()
    comparison: Optional[tuple[SchemaArg, str, SchemaArg]] = None

    def __post_init__(self):
        bad = self.flags - set(MODE_FLAGS)
        if bad:
            raise ValueError(f"unknown mode flags {sorted(bad)}")
        if self.flags & {"symmetric", "anti_reflexive"} and len(self.schema) != 2:
            raise ValueError(
                f"symmetric/anti_reflexive require a binary schema, got {self.predicate}/{len(self.schema)}"
            )


@dataclass(frozen=True)
class ExampleSpec:
    polarity: str  # 'pos' | 'neg'
    inclusions: frozenset[Atom]
    exclusions: frozenset[Atom]
    context: Program = Program()
    label: str = ""

    def __post_init__(self):
        overlap = self.inclusions & self.exclusions
        if overlap:
            raise ValueError(f"inclusions and exclusions overlap: {sorted(str(a) for a in overlap)}")


@dataclass(frozen=True)
class LearningTask:
    background: Program = Program()
    explicit_space: tuple[tuple[int, Rule], ...] = ()
    modes: tuple[ModeDecl, ...] = ()
    maxv: Optional[int] = None
    constants: tuple[tuple[str, Term], ...] = ()
    examples: tuple[ExampleSpec, ...] = ()

    def constant_pool(self, type_name: str) -> tuple[Term, ...]:
        return tuple(t for n, t in self.constants if n == type_name)
