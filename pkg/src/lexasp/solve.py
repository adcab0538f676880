"""Stable-model enumeration for ground programs.

Search is DPLL-style over the (sorted) herbrand base: unit propagation on
rule bodies, support pruning for unsupported atoms, and chronological
backtracking, branching false-first so model order is reproducible.  Every
total assignment is verified with `is_stable` (reduct + least model), which
doubles as the correctness backstop; `exhaustive_stable_models` provides the
brute-force oracle used by the test suite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from .ground import GroundProgram
from .syntax import Atom, AtomLiteral, ChoiceHead, Rule


@dataclass(frozen=True)
class StableModel:
    atoms: frozenset[Atom]

    def __contains__(self, atom: Atom) -> bool:
        return atom in self.atoms

    def satisfies(self, inclusions: Iterable[Atom], exclusions: Iterable[Atom]) -> bool:
        return all(a in self.atoms for a in inclusions) and not any(a in self.atoms for a in exclusions)

    def to_line(self) -> str:
        return " ".join(str(a) for a in sorted(self.atoms, key=Atom.sort_key))

    def __iter__(self):
        return iter(sorted(self.atoms, key=Atom.sort_key))


def reduct(gp: GroundProgram, candidate: frozenset[Atom] | set[Atom]) -> GroundProgram:
    """The definite program obtained for a candidate model: rules blocked by
    a negated atom true in the candidate are dropped, remaining negations are
    deleted, and a choice rule contributes one definite rule per chosen
    element; denials contribute nothing."""
    out: list[Rule] = []
    for r in gp.rules:
        if r.is_denial:
            continue
        if any(a in candidate for a in r.negative_body()):
            continue
        pos = tuple(AtomLiteral(a) for a in r.positive_body())
        if r.is_choice:
            for e in r.head.elements:
                if e.atom in candidate:
                    out.append(Rule(r.id, e.atom, pos, r.annotation, r.origin))
        else:
            out.append(Rule(r.id, r.head, pos, r.annotation, r.origin))
    base: set[Atom] = set()
    for r in out:
        base.update(r.head_atoms())
        base.update(r.positive_body())
    return GroundProgram(tuple(out), frozenset(base))


def least_model(definite: GroundProgram | Iterable[Rule]) -> frozenset[Atom]:
    rules = definite.rules if isinstance(definite, GroundProgram) else tuple(definite)
    for r in rules:
        if r.negative_body() or r.is_denial or r.is_choice:
            raise ValueError(f"least_model requires definite rules, got: {r}")
    derived: set[Atom] = set()
    changed = True
    while changed:
        changed = False
        for r in rules:
            if r.head not in derived and all(a in derived for a in r.positive_body()):
                derived.add(r.head)
                changed = True
    return frozenset(derived)


def _body_satisfied(rule: Rule, model: frozenset[Atom] | set[Atom]) -> bool:
    return all(a in model for a in rule.positive_body()) and not any(
        a in model for a in rule.negative_body()
    )


def is_stable(gp: GroundProgram, candidate: frozenset[Atom] | set[Atom]) -> bool:
    """Candidate satisfies all denials and choice bounds, and equals the
    least model of its reduct."""
    candidate = frozenset(candidate)
    for r in gp.rules:
        if r.is_denial and _body_satisfied(r, candidate):
            return False
        if r.is_choice and _body_satisfied(r, candidate):
            head: ChoiceHead = r.head
            chosen = sum(1 for e in head.elements if e.atom in candidate)
            if not (head.lb <= chosen <= head.resolved_ub()):
                return False
    return least_model(reduct(gp, candidate)) == candidate


class _RuleView:
    __slots__ = ("rule", "pos", "neg", "head", "elements", "lb", "ub", "kind")

    def __init__(self, rule: Rule, idx: dict[Atom, int]):
        self.rule = rule
        self.pos = [idx[a] for a in rule.positive_body()]
        self.neg = [idx[a] for a in rule.negative_body()]
        if rule.is_denial:
            self.kind = "denial"
            self.head = -1
            self.elements = []
        elif rule.is_choice:
            self.kind = "choice"
            self.head = -1
            self.elements = [idx[e.atom] for e in rule.head.elements]
            self.lb = rule.head.lb
            self.ub = rule.head.resolved_ub()
        else:
            self.kind = "normal"
            self.head = idx[rule.head]
            self.elements = []


class _Search:
    def __init__(self, gp: GroundProgram):
        self.gp = gp
        self.atoms = gp.atoms_sorted()
        self.idx = {a: i for i, a in enumerate(self.atoms)}
        self.views = [_RuleView(r, self.idx) for r in gp.rules]
        self.deriving: list[list[_RuleView]] = [[] for _ in self.atoms]
        for v in self.views:
            if v.kind == "normal":
                self.deriving[v.head].append(v)
            elif v.kind == "choice":
                for e in set(v.elements):
                    self.deriving[e].append(v)

    def _body_state(self, v: _RuleView, assign: list[Optional[bool]]) -> str:
        satisfied = True
        for i in v.pos:
            val = assign[i]
            if val is False:
                return "falsified"
            if val is None:
                satisfied = False
        for i in v.neg:
            val = assign[i]
            if val is True:
                return "falsified"
            if val is None:
                satisfied = False
        return "satisfied" if satisfied else "open"

    def _propagate(self, assign: list[Optional[bool]]) -> bool:
        changed = True
        while changed:
            changed = False
            for v in self.views:
                state = self._body_state(v, assign)
                if state != "satisfied":
                    continue
                if v.kind == "denial":
                    return False
                if v.kind == "normal":
                    if assign[v.head] is False:
                        return False
                    if assign[v.head] is None:
                        assign[v.head] = True
                        changed = True
                else:
                    true_n = sum(1 for i in v.elements if assign[i] is True)
                    open_n = sum(1 for i in v.elements if assign[i] is None)
                    if true_n > v.ub or true_n + open_n < v.lb:
                        return False
                    if open_n:
                        if true_n == v.ub:
                            for i in v.elements:
                                if assign[i] is None:
                                    assign[i] = False
                            changed = True
                        elif true_n + open_n == v.lb:
                            for i in v.elements:
                                if assign[i] is None:
                                    assign[i] = True
                            changed = True
            # an atom with no potentially-applicable deriving rule is false
            for i, val in enumerate(assign):
                if val is False:
                    continue
                if not any(self._body_state(v, assign) != "falsified" for v in self.deriving[i]):
                    if val is True:
                        return False
                    assign[i] = False
                    changed = True
        return True

    def enumerate(self) -> Iterator[StableModel]:
        yield from self._search([None] * len(self.atoms))

    def _search(self, assign: list[Optional[bool]]) -> Iterator[StableModel]:
        if not self._propagate(assign):
            return
        try:
            branch = assign.index(None)
        except ValueError:
            model = frozenset(self.atoms[i] for i, val in enumerate(assign) if val)
            if is_stable(self.gp, model):
                yield StableModel(model)
            return
        for value in (False, True):
            child = list(assign)
            child[branch] = value
            yield from self._search(child)


def enumerate_stable_models(gp: GroundProgram, limit: Optional[int] = None) -> Iterator[StableModel]:
    """Yield every stable model exactly once, in the deterministic order
    induced by sorting atoms and branching false-first."""
    if limit is not None and limit <= 0:
        return
    count = 0
    for model in _Search(gp).enumerate():
        yield model
        count += 1
        if limit is not None and count >= limit:
            return


def exhaustive_stable_models(gp: GroundProgram, max_atoms: int = 20) -> list[StableModel]:
    """Brute-force oracle: test every subset of the herbrand base."""
    atoms = gp.atoms_sorted()
    if len(atoms) > max_atoms:
        raise ValueError(f"herbrand base too large for exhaustive search: {len(atoms)} > {max_atoms}")
    out = []
    for bits in itertools.product((False, True), repeat=len(atoms)):
        candidate = frozenset(a for a, b in zip(atoms, bits) if b)
        if is_stable(gp, candidate):
            out.append(StableModel(candidate))
    return out


def has_stable_model(gp: GroundProgram) -> bool:
    return next(enumerate_stable_models(gp, limit=1), None) is not None


def brave_entails(gp: GroundProgram, inclusions: Iterable[Atom], exclusions: Iterable[Atom]) -> bool:
    """True iff some stable model contains all inclusions and no exclusion."""
    inclusions = tuple(inclusions)
    exclusions = tuple(exclusions)
    return any(m.satisfies(inclusions, exclusions) for m in enumerate_stable_models(gp))


def cautious_entails(gp: GroundProgram, inclusions: Iterable[Atom], exclusions: Iterable[Atom]) -> bool:
    """True iff the program is consistent and every stable model contains all
    inclusions and no exclusion."""
    inclusions = tuple(inclusions)
    exclusions = tuple(exclusions)
    seen_any = False
    for m in enumerate_stable_models(gp):
        seen_any = True
        if not m.satisfies(inclusions, exclusions):
            return False
    return seen_any
