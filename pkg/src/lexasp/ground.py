"""Bottom-up instantiation of a safe program into an equivalent ground one.

Substitutions are found by matching positive body literals against the set
of potentially derivable atoms (facts plus heads of already-instantiated
rules), iterated to fixpoint.  Comparisons are evaluated during substitution:
instantiations with a false comparison are dropped, true comparisons are
removed from the body.  Conditional choice elements expand over the
program's facts; trace templates are rendered with the substitution so every
ground rule carries its final annotation text.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import (
    Atom,
    AtomLiteral,
    ChoiceElement,
    ChoiceHead,
    Comparison,
    Program,
    Rule,
    Term,
    render_template,
)


class GroundingError(Exception):
    pass


@dataclass(frozen=True)
class GroundProgram:
    rules: tuple[Rule, ...]
    herbrand_base: frozenset[Atom]

    def atoms_sorted(self) -> list[Atom]:
        return sorted(self.herbrand_base, key=Atom.sort_key)

    def to_text(self) -> str:
        return "\n".join(str(r) for r in self.rules) + ("\n" if self.rules else "")


def _unify(pattern: Atom, ground: Atom, sub: dict[str, Term]) -> dict[str, Term] | None:
    if pattern.predicate != ground.predicate or len(pattern.args) != len(ground.args):
        return None
    out = sub
    for pt, gt in zip(pattern.args, ground.args):
        if pt.kind == "var":
            bound = out.get(pt.text)
            if bound is None:
                if out is sub:
                    out = dict(sub)
                out[pt.text] = gt
            elif bound != gt:
                return None
        elif pt != gt:
            return None
    return out


def _match_positive(
    atoms: tuple[Atom, ...], index: dict[tuple[str, int], list[Atom]], sub: dict[str, Term]
) -> list[dict[str, Term]]:
    """All substitutions extending `sub` that map every pattern atom to a
    derivable ground atom, in deterministic order."""
    subs = [sub]
    for pattern in atoms:
        candidates = sorted(index.get(pattern.signature, ()), key=Atom.sort_key)
        next_subs = []
        for s in subs:
            bound = pattern.substitute(s)
            for g in candidates:
                s2 = _unify(bound, g, s)
                if s2 is not None:
                    next_subs.append(s2 if s2 is not s else dict(s))
        subs = next_subs
        if not subs:
            break
    return subs


def expand_conditional_choice(
    head: ChoiceHead,
    facts: frozenset[Atom] | set[Atom],
    rule_defined: frozenset[str] | set[str] = frozenset(),
    sub: dict[str, Term] | None = None,
) -> list[ChoiceElement]:
    """Ground the elements of a choice head over the given domain facts.

    Condition predicates must be defined by facts only; an element whose
    condition has no satisfying facts contributes no atoms.
    """
    sub = sub or {}
    index: dict[tuple[str, int], list[Atom]] = {}
    for a in facts:
        index.setdefault(a.signature, []).append(a)
    out: list[ChoiceElement] = []
    seen: set[Atom] = set()
    for element in head.elements:
        for cond in element.condition:
            if cond.atom.predicate in rule_defined:
                raise GroundingError(
                    f"choice condition predicate {cond.atom.predicate!r} is defined by a"
                    " non-fact rule; conditions may range over facts only"
                )
        cond_atoms = tuple(c.atom for c in element.condition)
        for local in _match_positive(cond_atoms, index, sub):
            atom = element.atom.substitute(local)
            if not atom.is_ground or atom in seen:
                continue
            seen.add(atom)
            bindings = tuple(sorted((v, t) for v, t in local.items() if v not in sub))
            out.append(ChoiceElement(atom, (), bindings))
    return out


def ground_program(program: Program) -> GroundProgram:
    facts = {r.head for r in program.rules if r.is_fact}
    rule_defined = {
        a.predicate
        for r in program.rules
        if not r.is_fact
        for a in r.head_atoms()
    }

    derivable: dict[tuple[str, int], list[Atom]] = {}
    derivable_set: set[Atom] = set()

    def derive(atom: Atom) -> bool:
        if atom in derivable_set:
            return False
        derivable_set.add(atom)
        derivable.setdefault(atom.signature, []).append(atom)
        return True

    # keyed per source rule so output order is (source order, substitution order)
    emitted: list[dict[tuple, Rule]] = [dict() for _ in program.rules]

    grew = True
    while grew:
        grew = False
        for ri, rule in enumerate(program.rules):
            pos_atoms = rule.positive_body()
            for sub in _match_positive(pos_atoms, derivable, {}):
                comparisons = [c.substitute(sub) for c in rule.comparisons()]
                if not all(c.evaluate() for c in comparisons):
                    continue
                body = tuple(
                    l.substitute(sub)
                    for l in rule.body
                    if isinstance(l, AtomLiteral)
                )
                if rule.is_denial:
                    key = ("denial", body)
                    if key not in emitted[ri]:
                        emitted[ri][key] = Rule(rule.id, None, body, rule.annotation, rule.origin, rule.specific_over)
                    continue
                if isinstance(rule.head, ChoiceHead):
                    elements = expand_conditional_choice(rule.head, facts, rule_defined, sub)
                    ub = rule.head.ub if rule.head.ub is not None else len(elements)
                    head = ChoiceHead(rule.head.lb, ub, tuple(elements))
                    annotation = (
                        render_template(rule.annotation, sub) if rule.annotation is not None else None
                    )
                    key = ("choice", head, body)
                    if key not in emitted[ri]:
                        emitted[ri][key] = Rule(rule.id, head, body, annotation, rule.origin, rule.specific_over)
                        for e in elements:
                            grew |= derive(e.atom)
                    continue
                head_atom = rule.head.substitute(sub)
                annotation = rule.annotation
                if annotation is not None:
                    positional = head_atom.args if rule.is_fact else ()
                    annotation = render_template(annotation, sub, positional)
                key = ("normal", head_atom, body)
                if key not in emitted[ri]:
                    emitted[ri][key] = Rule(rule.id, head_atom, body, annotation, rule.origin, rule.specific_over)
                    grew |= derive(head_atom)

    rules: list[Rule] = []
    for per_rule in emitted:
        rules.extend(per_rule[k] for k in sorted(per_rule.keys(), key=_ground_key))

    base: set[Atom] = set()
    for r in rules:
        base.update(r.head_atoms())
        base.update(r.positive_body())
        base.update(r.negative_body())
    return GroundProgram(tuple(rules), frozenset(base))


def _ground_key(key: tuple):
    tag = key[0]
    if tag == "normal":
        return (tag, key[1].sort_key(), _body_key(key[2]))
    if tag == "denial":
        return (tag, (), _body_key(key[1]))
    head: ChoiceHead = key[1]
    return (tag, tuple(e.atom.sort_key() for e in head.elements), _body_key(key[2]))


def _body_key(body: tuple[AtomLiteral, ...]):
    return tuple((l.negated, l.atom.sort_key()) for l in body)
