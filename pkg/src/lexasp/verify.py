"""Static verification of the KB against the judgment corpus.

Three phases per case: (1) every case fact, alone (and cumulatively, when
enabled), must be consistent with the KB — an inconsistency means the rules
are too restrictive; (2) with all facts asserted and pinned by denials, some
stable model must contain the expected verdict atoms — otherwise the rules
are too weak; (3) dropping up to `max_gap` facts surfaces subsets whose
verdict projection diverges from the full case, i.e. potential exceptions
for human review.  Evidence denials can be injected to prune scenarios; they
can only ever shrink the model set.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Optional

import itertools

from .ground import ground_program
from .kb import JudgmentRecord, KnowledgeBase
from .solve import enumerate_stable_models
from .syntax import Atom, AtomLiteral, ORIGIN_EVIDENCE, Program, Rule


@dataclass(frozen=True)
class FactCheck:
    facts: tuple[Atom, ...]  # singleton for individual checks, prefix for cumulative
    consistent: bool


@dataclass(frozen=True)
class Phase1Result:
    individual: tuple[FactCheck, ...]
    cumulative: tuple[FactCheck, ...] = ()

    @property
    def ok(self) -> bool:
        return all(c.consistent for c in self.individual + self.cumulative)

    def inconsistent_facts(self) -> tuple[Atom, ...]:
        out: list[Atom] = []
        for c in self.individual + self.cumulative:
            if not c.consistent:
                out.extend(a for a in c.facts if a not in out)
        return tuple(out)


@dataclass(frozen=True)
class Phase2Result:
    status: str  # 'match' | 'too-weak' | 'inconsistent'
    missing: tuple[Atom, ...] = ()
    model_count: int = 0


@dataclass(frozen=True)
class SubsetFinding:
    dropped: tuple[Atom, ...]
    scenarios: tuple[frozenset[Atom], ...]  # distinct verdict projections
    divergent: bool


@dataclass(frozen=True)
class Phase3Result:
    findings: tuple[SubsetFinding, ...]
    examined: int


@dataclass(frozen=True)
class RefinementReport:
    case_id: str
    phase1: Phase1Result
    phase2: Phase2Result
    phase3: Optional[Phase3Result]
    diagnosis: str  # 'ok' | 'too-restrictive' | 'too-weak'

    @property
    def ok(self) -> bool:
        return self.diagnosis == "ok"


def check_fact_consistency(kb: KnowledgeBase, case: JudgmentRecord, cumulative: bool = False) -> Phase1Result:
    """Run the solver on KB + {fact} for each case fact; with cumulative=True
    also on every prefix union, which catches inter-fact clashes."""
    individual = []
    for fact in case.facts:
        _, models = kb.solve_case([fact], limit=1)
        individual.append(FactCheck((fact,), bool(models)))
    prefixes = []
    if cumulative:
        for k in range(1, len(case.facts) + 1):
            prefix = case.facts[:k]
            _, models = kb.solve_case(prefix, limit=1)
            prefixes.append(FactCheck(tuple(prefix), bool(models)))
    return Phase1Result(tuple(individual), tuple(prefixes))


def _pin_facts(program: Program, facts: Iterable[Atom]) -> Program:
    pins = tuple(
        Rule(f"pin:{i + 1}", None, (AtomLiteral(a, negated=True),), origin=ORIGIN_EVIDENCE)
        for i, a in enumerate(facts)
    )
    return program.extend(pins)


def check_expected_model(kb: KnowledgeBase, case: JudgmentRecord) -> Phase2Result:
    """Assert the case facts, pin each with a `:- not fact.` denial, and look
    for a stable model containing every expected verdict atom."""
    program = _pin_facts(kb.case_program(case.facts), case.facts)
    models = list(enumerate_stable_models(ground_program(program)))
    if not models:
        return Phase2Result("inconsistent")
    best: Optional[frozenset[Atom]] = None
    for m in models:
        missing = case.expected_verdict - m.atoms
        if not missing:
            return Phase2Result("match", model_count=len(models))
        if best is None or len(missing) < len(best):
            best = missing
    return Phase2Result("too-weak", tuple(sorted(best, key=Atom.sort_key)), len(models))


def _verdict_projection(kb: KnowledgeBase, models) -> tuple[frozenset[Atom], ...]:
    projections = []
    for m in models:
        proj = frozenset(a for a in m.atoms if a.signature in kb.verdict_predicates)
        if proj not in projections:
            projections.append(proj)
    return tuple(sorted(projections, key=lambda p: sorted(a.sort_key() for a in p)))


def explore_subsets(kb: KnowledgeBase, case: JudgmentRecord, max_gap: int = 2) -> Phase3Result:
    """Solve every fact subset missing at most max_gap facts and record the
    verdict projections; subsets that diverge from the full case are the
    potential exceptions."""
    _, full_models = kb.solve_case(case.facts)
    full = _verdict_projection(kb, full_models)
    findings = [SubsetFinding((), full, False)]
    examined = 1
    fact_list = list(case.facts)
    for gap in range(1, max_gap + 1):
        if gap > len(fact_list):
            break
        for dropped in itertools.combinations(fact_list, gap):
            examined += 1
            remaining = [f for f in fact_list if f not in dropped]
            _, models = kb.solve_case(remaining)
            projection = _verdict_projection(kb, models)
            if projection != full:
                findings.append(SubsetFinding(tuple(dropped), projection, True))
    return Phase3Result(tuple(findings), examined)


def add_evidence_constraint(kb: Program, constraint: Rule) -> Program:
    """Append an evidence denial; the model set can only shrink."""
    if not constraint.is_denial:
        raise ValueError(f"evidence constraints must be denials, got: {constraint}")
    rid = constraint.id
    existing = {r.id for r in kb.rules}
    k = 1
    while rid in existing:
        k += 1
        rid = f"{constraint.id}#{k}"
    return kb.extend((replace(constraint, id=rid, origin=ORIGIN_EVIDENCE),))


def verify_case(
    kb: KnowledgeBase,
    case: JudgmentRecord,
    max_gap: int = 2,
    cumulative: bool = True,
    subsets: bool = False,
) -> RefinementReport:
    phase1 = check_fact_consistency(kb, case, cumulative=cumulative)
    phase2 = check_expected_model(kb, case)
    phase3 = explore_subsets(kb, case, max_gap) if subsets else None
    if not phase1.ok:
        diagnosis = "too-restrictive"
    elif phase2.status != "match":
        diagnosis = "too-weak"
    else:
        diagnosis = "ok"
    return RefinementReport(case.id, phase1, phase2, phase3, diagnosis)


def corpus_gate(kb: KnowledgeBase, max_gap: int = 0) -> tuple[bool, list[RefinementReport]]:
    """Every shipped judgment must pass phase 1 (individually and
    cumulatively) and phase 2; nonzero exit material for CI."""
    reports = [verify_case(kb, case, max_gap=max_gap, cumulative=True) for case in kb.judgments]
    return all(r.ok for r in reports), reports


def report_to_dict(report: RefinementReport) -> dict:
    doc = {
        "schema": "lexasp/refinement-report/1",
        "case": report.case_id,
        "diagnosis": report.diagnosis,
        "phase1": {
            "individual": [
                {"facts": [str(a) for a in c.facts], "consistent": c.consistent}
                for c in report.phase1.individual
            ],
            "cumulative": [
                {"facts": [str(a) for a in c.facts], "consistent": c.consistent}
                for c in report.phase1.cumulative
            ],
        },
        "phase2": {
            "status": report.phase2.status,
            "missing": [str(a) for a in report.phase2.missing],
            "models": report.phase2.model_count,
        },
    }
    if report.phase3 is not None:
        doc["phase3"] = {
            "examined": report.phase3.examined,
            "findings": [
                {
                    "dropped": [str(a) for a in f.dropped],
                    "scenarios": [sorted(str(a) for a in s) for s in f.scenarios],
                    "divergent": f.divergent,
                }
                for f in report.phase3.findings
            ],
        }
    return doc


def report_summary(report: RefinementReport) -> str:
    lines = [f"case {report.case_id}: {report.diagnosis}"]
    bad = report.phase1.inconsistent_facts()
    if bad:
        lines.append("  inconsistent facts: " + ", ".join(str(a) for a in bad))
    if report.phase2.status == "match":
        lines.append(f"  expected verdict reached ({report.phase2.model_count} scenario(s))")
    elif report.phase2.status == "too-weak":
        lines.append("  missing verdict atoms: " + ", ".join(str(a) for a in report.phase2.missing))
    else:
        lines.append("  no stable model under pinned facts")
    if report.phase3 is not None:
        divergent = [f for f in report.phase3.findings if f.divergent]
        lines.append(
            f"  subsets examined: {report.phase3.examined}, divergent: {len(divergent)}"
        )
        for f in divergent:
            lines.append("    without " + ", ".join(str(a) for a in f.dropped) + ":")
            for s in f.scenarios:
                lines.append("      " + (", ".join(sorted(str(a) for a in s)) or "(no verdict)"))
    return "\n".join(lines)
