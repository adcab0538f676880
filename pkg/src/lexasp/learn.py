"""Inductive learning of rules from encoded judgments.

The hypothesis space comes either from explicit `N ~ rule.` entries or from
mode declarations.  Mode-generated candidates are linked rules: every head
variable must be consumed by at least one positive body literal drawn from a
#modeb schema.  Each variable of type t pulls a type guard t(V) into the
body, an `anti_reflexive` schema adds the inequality of its two variables,
and guards, inequalities and comparisons all count toward rule length.

Search is iterative deepening on total hypothesis length with lexicographic
tie-breaking over canonical rule texts; `exhaustive_learn` is the brute-force
oracle used to bound correctness on small spaces.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

from .ground import ground_program
from .solve import StableModel, brave_entails, enumerate_stable_models
from .syntax import (
    Atom,
    AtomLiteral,
    BodyLiteral,
    ChoiceElement,
    ChoiceHead,
    Comparison,
    ExampleSpec,
    LearningTask,
    ModeDecl,
    Placeholder,
    Program,
    Rule,
    Term,
    canonical_text,
    check_safety,
)

DEFAULT_MAXV = 3
DEFAULT_SPACE_CAP = 10**6

STAGE_ROWS = (
    "Pre-processing",
    "Hypothesis space generation",
    "Conflict analysis",
    "Counterexample search",
    "Hypothesis search",
)


class LearnError(Exception):
    pass


class EmptySpaceError(LearnError):
    pass


class SpaceCapError(LearnError):
    pass


class UnsatisfiableTaskError(LearnError):
    pass


@dataclass(frozen=True)
class Candidate:
    rule: Rule
    length: int

    @property
    def text(self) -> str:
        return canonical_text(self.rule)


@dataclass(frozen=True)
class HypothesisSpace:
    candidates: tuple[Candidate, ...]
    provenance: str  # 'explicit' | 'mode-generated'

    def __len__(self) -> int:
        return len(self.candidates)


@dataclass(frozen=True)
class Hypothesis:
    candidates: tuple[Candidate, ...]

    @property
    def rules(self) -> tuple[Rule, ...]:
        return tuple(c.rule for c in self.candidates)

    @property
    def total_length(self) -> int:
        return sum(c.length for c in self.candidates)

    def texts(self) -> tuple[str, ...]:
        return tuple(c.text for c in self.candidates)


@dataclass(frozen=True)
class CoverageResult:
    per_example: tuple[tuple[str, bool], ...]
    witnesses: tuple[tuple[str, frozenset[Atom]], ...] = ()

    @property
    def all_covered(self) -> bool:
        return all(ok for _, ok in self.per_example)


# --- hypothesis-space generation ---------------------------------------------


@dataclass(frozen=True)
class _VarCtx:
    """Typed variables introduced so far, in introduction order."""

    names: tuple[str, ...] = ()
    types: tuple[str, ...] = ()

    def of_type(self, t: str) -> list[str]:
        return [n for n, ty in zip(self.names, self.types) if ty == t]

    def fresh(self, t: str) -> "_VarCtx":
        return _VarCtx(self.names + (f"V{len(self.names) + 1}",), self.types + (t,))

    def type_of(self, name: str) -> str:
        return self.types[self.names.index(name)]

    def index(self, name: str) -> int:
        return self.names.index(name)


def _instantiate_schema(
    schema: tuple, ctx: _VarCtx, maxv: int, pools: dict[str, list[Term]]
) -> Iterator[tuple[tuple[Term, ...], _VarCtx]]:
    """Argument tuples for a schema: var(t) reuses a typed variable or
    introduces the next fresh one, const(t) draws from the typed pool."""

    def rec(i: int, args: list[Term], ctx: _VarCtx):
        if i == len(schema):
            yield tuple(args), ctx
            return
        ph = schema[i]
        if isinstance(ph, Placeholder):
            if ph.kind == "var":
                for name in ctx.of_type(ph.type):
                    yield from rec(i + 1, args + [Term.var(name)], ctx)
                if len(ctx.names) < maxv:
                    nxt = ctx.fresh(ph.type)
                    yield from rec(i + 1, args + [Term.var(nxt.names[-1])], nxt)
            else:
                for const in pools.get(ph.type, ()):
                    yield from rec(i + 1, args + [const], ctx)
        else:
            yield from rec(i + 1, args + [ph], ctx)

    yield from rec(0, [], ctx)


def _schema_instance_ok(
    decl: ModeDecl, args: tuple[Term, ...], ctx: _VarCtx
) -> tuple[bool, Optional[tuple[str, str]]]:
    """Apply anti_reflexive/symmetric restrictions to one instance; returns
    (keep, variable pair needing an added inequality)."""
    inequality = None
    if "anti_reflexive" in decl.flags:
        a, b = args
        if a == b:
            return False, None
        if a.kind == "var" and b.kind == "var":
            inequality = (a.text, b.text)
    if "symmetric" in decl.flags:
        a, b = args
        if a.kind == "var" and b.kind == "var":
            if ctx.index(a.text) > ctx.index(b.text):
                return False, None
        elif a.is_ground and b.is_ground and a.order_key() > b.order_key():
            return False, None
    return True, inequality


def _comparison_options(
    comps: Sequence[ModeDecl], ctx: _VarCtx, used_vars: Sequence[str], pools: dict[str, list[Term]]
) -> Iterator[tuple[Comparison, ...]]:
    """Every way of adding at most one instance of each #modec schema over the
    variables already used by the rule."""

    def side(arg) -> list[Term]:
        if isinstance(arg, Placeholder):
            if arg.kind == "var":
                return [Term.var(n) for n in used_vars if ctx.type_of(n) == arg.type]
            return list(pools.get(arg.type, ()))
        return [arg]

    per_decl: list[list[Optional[Comparison]]] = []
    for decl in comps:
        left, op, right = decl.comparison
        insts: list[Optional[Comparison]] = [None]
        for lt in side(left):
            for rt in side(right):
                if lt != rt:
                    insts.append(Comparison(lt, op, rt))
        per_decl.append(insts)
    for picks in itertools.product(*per_decl):
        yield tuple(c for c in picks if c is not None)


def _mode_candidates(
    modes: Sequence[ModeDecl], maxv: int, pools: dict[str, list[Term]]
) -> Iterator[tuple[Rule, int]]:
    heads = [m for m in modes if m.kind in ("modeh", "modeha")]
    modebs = [m for m in modes if m.kind == "modeb"]
    modecs = [m for m in modes if m.kind == "modec"]

    def finalize(head_decl, head_atom, ctx, literals, ineqs):
        head_vars = set(head_atom.variables())
        positive = [l for l in literals if not l.negated]
        for v in head_vars:
            if not any(v in set(l.atom.variables()) for l in positive):
                return
        used: list[str] = []
        for name in ctx.names:
            in_head = name in head_vars
            in_body = any(name in set(l.atom.variables()) for l in literals)
            in_ineq = any(name in pair for pair in ineqs)
            if in_head or in_body or in_ineq:
                used.append(name)
        base: list[BodyLiteral] = []
        seen_pairs: set[frozenset[str]] = set()
        for a, b in ineqs:
            key = frozenset((a, b))
            if key not in seen_pairs:
                seen_pairs.add(key)
                base.append(Comparison(Term.var(a), "!=", Term.var(b)))
        for name in used:
            base.append(AtomLiteral(Atom(ctx.type_of(name), (Term.var(name),))))
        base.extend(literals)
        for extra in _comparison_options(modecs, ctx, used, pools):
            body = tuple(base) + tuple(extra)
            if head_decl.kind == "modeha":
                head: Atom | ChoiceHead = ChoiceHead(0, 1, (ChoiceElement(head_atom),))
            else:
                head = head_atom
            rule = Rule("candidate", head, body)
            check_safety(rule)
            yield rule, 1 + len(body)

    def extend(head_decl, head_atom, ctx, literals, ineqs, counts, last_key):
        yield from finalize(head_decl, head_atom, ctx, literals, ineqs)
        for bi, decl in enumerate(modebs):
            if counts[bi] >= (decl.recall or 1):
                continue
            for args, ctx2 in _instantiate_schema(decl.schema, ctx, maxv, pools):
                keep, ineq = _schema_instance_ok(decl, args, ctx2)
                if not keep:
                    continue
                atom = Atom(decl.predicate, args)
                polarities = (False,) if "positive" in decl.flags else (False, True)
                for negated in polarities:
                    key = (bi, negated, tuple(str(a) for a in args))
                    if key < last_key:
                        continue
                    lit = AtomLiteral(atom, negated)
                    if lit in literals:
                        continue
                    counts2 = list(counts)
                    counts2[bi] += 1
                    yield from extend(
                        head_decl,
                        head_atom,
                        ctx2,
                        literals + [lit],
                        ineqs + ([ineq] if ineq else []),
                        counts2,
                        key,
                    )

    start_key = (-1, False, ())
    for head_decl in heads:
        for head_args, ctx in _instantiate_schema(head_decl.schema, _VarCtx(), maxv, pools):
            keep, ineq = _schema_instance_ok(head_decl, head_args, ctx)
            if not keep:
                continue
            head_atom = Atom(head_decl.predicate, head_args)
            ineqs = [ineq] if ineq else []
            yield from extend(head_decl, head_atom, ctx, [], ineqs, [0] * len(modebs), start_key)


def generate_hypothesis_space(
    modes: Sequence[ModeDecl] = (),
    maxv: Optional[int] = None,
    explicit: Sequence[tuple[int, Rule]] = (),
    constants: Sequence[tuple[str, Term]] = (),
    cap: int = DEFAULT_SPACE_CAP,
) -> HypothesisSpace:
    maxv = maxv if maxv is not None else DEFAULT_MAXV
    pools: dict[str, list[Term]] = {}
    for t, term in constants:
        pools.setdefault(t, []).append(term)
    for pool in pools.values():
        pool.sort(key=Term.order_key)

    by_text: dict[str, Candidate] = {}

    def add(rule: Rule, length: int):
        text = canonical_text(rule)
        if text not in by_text:
            if len(by_text) >= cap:
                raise SpaceCapError(
                    f"hypothesis space exceeds the cap of {cap} candidates; tighten the mode"
                    " bias (#maxv, recall, positive/anti_reflexive/symmetric flags)"
                )
            by_text[text] = Candidate(rule, length)

    for declared, rule in explicit:
        add(rule, declared)
    for rule, length in _mode_candidates(modes, maxv, pools):
        add(rule, length)

    if not by_text:
        raise EmptySpaceError("empty hypothesis space: no explicit rules and no mode candidates")
    candidates = tuple(sorted(by_text.values(), key=lambda c: c.text))
    provenance = "mode-generated" if any(m.kind in ("modeh", "modeha") for m in modes) else "explicit"
    return HypothesisSpace(candidates, provenance)


def space_for_task(task: LearningTask, cap: int = DEFAULT_SPACE_CAP) -> HypothesisSpace:
    return generate_hypothesis_space(
        modes=task.modes, maxv=task.maxv, explicit=task.explicit_space, constants=task.constants, cap=cap
    )


# --- coverage -----------------------------------------------------------------


def _combined_program(background: Program, rules: Sequence[Rule], context: Program) -> Program:
    hyp = tuple(
        Rule(f"hyp{i}", r.head, r.body, r.annotation, "learned-judgment") for i, r in enumerate(rules)
    )
    return Program(background.rules + hyp + context.rules)


def covers(
    background: Program, hypothesis: Hypothesis | Sequence[Rule], example: ExampleSpec
) -> bool:
    """Positive examples need one stable model of B + H + context realizing
    the inclusions without the exclusions; negative examples need none."""
    rules = hypothesis.rules if isinstance(hypothesis, Hypothesis) else tuple(hypothesis)
    gp = ground_program(_combined_program(background, rules, example.context))
    realized = brave_entails(gp, example.inclusions, example.exclusions)
    return realized if example.polarity == "pos" else not realized


def coverage_witness(
    background: Program, hypothesis: Hypothesis | Sequence[Rule], example: ExampleSpec
) -> Optional[StableModel]:
    rules = hypothesis.rules if isinstance(hypothesis, Hypothesis) else tuple(hypothesis)
    gp = ground_program(_combined_program(background, rules, example.context))
    for m in enumerate_stable_models(gp):
        if m.satisfies(example.inclusions, example.exclusions):
            return m
    return None


def check_coverage(background: Program, hypothesis: Hypothesis, examples: Sequence[ExampleSpec]) -> CoverageResult:
    per = []
    witnesses = []
    for ex in examples:
        ok = covers(background, hypothesis, ex)
        per.append((ex.label, ok))
        if ok and ex.polarity == "pos":
            witness = coverage_witness(background, hypothesis, ex)
            if witness is not None:
                witnesses.append((ex.label, witness.atoms))
    return CoverageResult(tuple(per), tuple(witnesses))


# --- search --------------------------------------------------------------------


def subsets_by_total_length(candidates: Sequence[Candidate]) -> Iterator[tuple[Candidate, ...]]:
    """Subsets ordered by increasing total length; ties in lexicographic order
    of the members' canonical texts (candidates must be text-sorted)."""
    total = sum(c.length for c in candidates)

    def combos(start: int, remaining: int, acc: list[Candidate]) -> Iterator[tuple[Candidate, ...]]:
        if remaining == 0:
            yield tuple(acc)
            return
        for i in range(start, len(candidates)):
            if candidates[i].length <= remaining:
                acc.append(candidates[i])
                yield from combos(i + 1, remaining - candidates[i].length, acc)
                acc.pop()

    for length in range(0, total + 1):
        yield from combos(0, length, [])


@dataclass
class LearnReport:
    space_size: int = 0
    timings: dict[str, float] = field(default_factory=lambda: {row: 0.0 for row in STAGE_ROWS})
    hypotheses_checked: int = 0

    @property
    def total(self) -> float:
        return sum(self.timings.values())

    def rows(self) -> list[tuple[str, float]]:
        return [(row, self.timings[row]) for row in STAGE_ROWS] + [("Total", self.total)]


def learn_optimal(task: LearningTask, cap: int = DEFAULT_SPACE_CAP, report: Optional[LearnReport] = None) -> Hypothesis:
    """Minimal-total-length hypothesis covering all examples, or raise
    UnsatisfiableTaskError."""
    report = report if report is not None else LearnReport()
    t0 = time.perf_counter()
    space = space_for_task(task, cap)
    report.space_size = len(space)
    report.timings["Hypothesis space generation"] += time.perf_counter() - t0

    t_search = time.perf_counter()
    coverage_time = 0.0
    found: Optional[Hypothesis] = None
    for subset in subsets_by_total_length(space.candidates):
        hyp = Hypothesis(subset)
        report.hypotheses_checked += 1
        tc = time.perf_counter()
        ok = all(covers(task.background, hyp, ex) for ex in task.examples)
        coverage_time += time.perf_counter() - tc
        if ok:
            found = hyp
            break
    report.timings["Conflict analysis"] += coverage_time
    report.timings["Hypothesis search"] += time.perf_counter() - t_search - coverage_time

    tv = time.perf_counter()
    if found is not None:
        counterexamples = [ex.label for ex in task.examples if not covers(task.background, found, ex)]
    report.timings["Counterexample search"] += time.perf_counter() - tv
    if found is None:
        raise UnsatisfiableTaskError("unsatisfiable: no subset of the hypothesis space covers all examples")
    if counterexamples:
        raise LearnError(f"internal error: counterexamples {counterexamples} for accepted hypothesis")
    return found


@dataclass(frozen=True)
class LearnResult:
    hypothesis: Hypothesis
    report: LearnReport
    space: HypothesisSpace


def run_learning(task: LearningTask, cap: int = DEFAULT_SPACE_CAP) -> LearnResult:
    """learn_optimal plus the staged wall-clock report used by the CLI."""
    report = LearnReport()
    t0 = time.perf_counter()
    # normalization work ahead of the search proper
    _ = [ex.label for ex in task.examples]
    report.timings["Pre-processing"] += time.perf_counter() - t0
    hypothesis = learn_optimal(task, cap=cap, report=report)
    space = space_for_task(task, cap)
    return LearnResult(hypothesis, report, space)


def exhaustive_learn(
    background: Program, space: HypothesisSpace, examples: Sequence[ExampleSpec]
) -> Optional[Hypothesis]:
    """Powerset oracle: scan every subset, keep the covering one with minimal
    total length (ties by sorted canonical texts)."""
    best: Optional[Hypothesis] = None
    for k in range(0, len(space.candidates) + 1):
        for combo in itertools.combinations(space.candidates, k):
            hyp = Hypothesis(combo)
            if not all(covers(background, hyp, ex) for ex in examples):
                continue
            if best is None or (hyp.total_length, hyp.texts()) < (best.total_length, best.texts()):
                best = hyp
    return best


# --- cautious learning (Algorithm-1 style) --------------------------------------


def cautious_learn(
    background: Program,
    space: HypothesisSpace,
    e_plus: Iterable[Atom],
    e_minus: Iterable[Atom],
    accept_inconsistent: bool = False,
) -> Optional[Hypothesis]:
    """Smallest subset H (by total length, ties lexicographic) such that
    B + H is consistent and every stable model contains all of e_plus and
    none of e_minus; None when no subset qualifies.

    With accept_inconsistent=True an inconsistent B + H is accepted as soon
    as it is reached (the literal reading of the published pseudocode, kept
    for comparison); the default requires consistency.
    """
    e_plus = tuple(e_plus)
    e_minus = tuple(e_minus)
    for subset in subsets_by_total_length(space.candidates):
        hyp = Hypothesis(subset)
        gp = ground_program(_combined_program(background, hyp.rules, Program()))
        seen_model = False
        violated = False
        for m in enumerate_stable_models(gp):
            seen_model = True
            if not m.satisfies(e_plus, e_minus):
                violated = True
                break
        if violated:
            continue
        if seen_model or accept_inconsistent:
            return hyp
    return None
