"""The encoded article sets, judgment corpus and contradiction machinery.

A knowledge-base directory contains `articles/*.lp` (criminal-code rules),
`judgments/*.case` plus `*.meta.json` sidecars (prior rulings: facts,
expected verdict atoms and citation metadata) and `learned/*.lp` (rules
learned from judgments, installed with a `using_judgment` marker so every
conclusion they produce is visibly precedent-based).  Conflicting rulings
surface as `contradiction/3` atoms; `resolve_priority` applies the three
interpretation maxims (lex specialis, lex superior, lex posterior).
"""

from __future__ import annotations

import datetime
import json
import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .explain import _compute_supports
from .ground import ground_program
from .parser import parse_ground_atom, parse_program
from .solve import enumerate_stable_models
from .syntax import (
    Atom,
    ChoiceElement,
    ChoiceHead,
    ORIGIN_EVIDENCE,
    ORIGIN_LEARNED,
    Program,
    Rule,
    Term,
)

MANIFEST_SCHEMA = "lexasp/kb-manifest/1"
META_SCHEMA = "lexasp/judgment-meta/1"

COURT_LEVELS = {1: "tribunale", 2: "appello", 3: "cassazione"}

MAXIM_SPECIALIS = "specialis"
MAXIM_SUPERIOR = "superior"
MAXIM_POSTERIOR = "posterior"


class KbError(Exception):
    pass


class LintError(KbError):
    pass


class InconsistentCaseError(KbError):
    """The program admits no stable model; reported as a diagnostic distinct
    from a contradiction finding."""


@dataclass(frozen=True)
class ArticleSet:
    id: str
    articles: tuple[str, ...]
    files: tuple[str, ...]


@dataclass(frozen=True)
class JudgmentRecord:
    id: str
    citation: str
    court_level: int
    date: datetime.date
    number: str
    facts: tuple[Atom, ...] = ()
    expected_verdict: frozenset[Atom] = frozenset()
    learned_rule_ids: tuple[str, ...] = ()

    def __post_init__(self):
        prefix = COURT_LEVELS.get(self.court_level)
        if prefix is None:
            raise KbError(f"{self.id}: court level must be 1..3, got {self.court_level}")
        lowered = self.citation.lower()
        consistent = {
            1: lowered.startswith("tribunale"),
            2: lowered.startswith(("corte d'appello", "appello", "corte di appello")),
            3: lowered.startswith("cassazione"),
        }[self.court_level]
        if not consistent:
            raise KbError(
                f"{self.id}: citation {self.citation!r} does not match court level"
                f" {self.court_level} ({prefix})"
            )


@dataclass(frozen=True)
class SourceRef:
    kind: str  # 'judgment' | 'article' | 'case-fact'
    rule_id: str
    judgment: Optional[JudgmentRecord] = None
    specific_over: Optional[str] = None

    def describe(self) -> str:
        if self.judgment is not None:
            return self.judgment.citation
        return f"{self.kind} {self.rule_id}"


@dataclass(frozen=True)
class ContradictionFinding:
    claim_a: str
    claim_b: str
    subject: str
    atom: Atom
    sources: tuple[SourceRef, SourceRef]
    resolution: str = "unresolved"  # 'a-wins' | 'b-wins' | 'unresolved'
    applied_maxims: frozenset[str] = frozenset()
    diagnostic: str = ""


@dataclass(frozen=True)
class LintReport:
    errors: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors


@dataclass(frozen=True)
class KnowledgeBase:
    kb_dir: Path
    program: Program  # articles plus integrated learned rules
    article_sets: tuple[ArticleSet, ...]
    verdict_predicates: frozenset[tuple[str, int]]
    judgments: tuple[JudgmentRecord, ...]  # corpus cases (with facts)
    judgment_meta: dict[str, JudgmentRecord]  # every known ruling, by id
    lint: LintReport

    def vocabulary(self) -> list[tuple[str, int]]:
        seen: set[tuple[str, int]] = set()
        for r in self.program.rules:
            for a in r.head_atoms() + r.positive_body() + r.negative_body():
                seen.add(a.signature)
        return sorted(seen)

    def case_program(self, facts: Iterable[Atom], constraints: Iterable[Rule] = ()) -> Program:
        rules = list(self.program.rules)
        for i, fact in enumerate(sorted(set(facts), key=Atom.sort_key)):
            rules.append(Rule(f"case:fact{i + 1}", fact, (), origin=ORIGIN_EVIDENCE))
        for i, denial in enumerate(constraints):
            rules.append(replace(denial, id=f"case:constraint{i + 1}", origin=ORIGIN_EVIDENCE))
        return Program(tuple(rules))

    def solve_case(self, facts: Iterable[Atom], constraints: Iterable[Rule] = (), limit: Optional[int] = None):
        gp = ground_program(self.case_program(facts, constraints))
        return gp, list(enumerate_stable_models(gp, limit))


def default_kb_dir() -> Path:
    return Path(str(resources.files("lexasp") / "kb"))


# --- loading -----------------------------------------------------------------


def load_kb(paths: Sequence[Path | str], strict: bool = True) -> Program:
    """Parse and merge article files into a single program; lint errors
    (conflicting predicate arities, duplicate ids) are raised when strict."""
    rules: list[Rule] = []
    for path in paths:
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        program = parse_program(text, path.name)
        rules.extend(program.rules)
    merged = Program(tuple(rules))
    if strict:
        report = lint_program(merged)
        if not report.ok:
            raise LintError("; ".join(report.errors))
    return merged


_PLURAL_ALLOWED = re.compile(r"(ss|us|is)$")


def lint_program(program: Program, wordlist: frozenset[str] = frozenset()) -> LintReport:
    """Vocabulary lint: a predicate name must keep one arity everywhere; the
    singular-noun / singular-present-verb convention is checked against the
    wordlist with warnings only."""
    errors: list[str] = []
    warnings: list[str] = []
    arities: dict[str, set[int]] = {}
    for r in program.rules:
        for a in r.head_atoms() + r.positive_body() + r.negative_body():
            arities.setdefault(a.predicate, set()).add(len(a.args))
    for name in sorted(arities):
        if len(arities[name]) > 1:
            errors.append(
                f"predicate {name!r} is used with arities {sorted(arities[name])};"
                " the same concept must keep the same predicate"
            )
    for name in sorted(arities):
        if name in wordlist:
            continue
        for part in name.split("_"):
            if part.endswith("ed") and part not in ("need",):
                warnings.append(f"predicate {name!r}: {part!r} looks past-tense; use singular present")
                break
            if part.endswith("s") and not _PLURAL_ALLOWED.search(part):
                warnings.append(f"predicate {name!r}: {part!r} looks plural; use the singular")
                break
    return LintReport(tuple(errors), tuple(warnings))


def _load_wordlist(kb_dir: Path) -> frozenset[str]:
    path = kb_dir / "wordlist.txt"
    if not path.exists():
        return frozenset()
    return frozenset(
        line.strip() for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip() and not line.startswith("#")
    )


def _load_meta(path: Path) -> JudgmentRecord:
    doc = json.loads(path.read_text(encoding="utf-8"))
    if doc.get("schema") != META_SCHEMA:
        raise KbError(f"{path.name}: unknown metadata schema {doc.get('schema')!r}")
    return JudgmentRecord(
        id=doc["id"],
        citation=doc["citation"],
        court_level=int(doc["court_level"]),
        date=datetime.date.fromisoformat(doc["date"]),
        number=str(doc["number"]),
    )


_EXPECT_RE = re.compile(r"^\s*%#expect\s+(.+?)\s*$", re.MULTILINE)


def _load_case(path: Path, meta: JudgmentRecord) -> JudgmentRecord:
    text = path.read_text(encoding="utf-8")
    program = parse_program(text, path.name, origin=ORIGIN_EVIDENCE)
    for r in program.rules:
        if not r.is_fact:
            raise KbError(f"{path.name}: case files may contain only ground facts, got: {r}")
    expected = frozenset(parse_ground_atom(m.group(1), path.name) for m in _EXPECT_RE.finditer(text))
    return replace(meta, facts=program.facts(), expected_verdict=expected)


def load_kb_dir(kb_dir: Optional[Path | str] = None) -> KnowledgeBase:
    kb_dir = Path(kb_dir) if kb_dir is not None else default_kb_dir()
    manifest_path = kb_dir / "manifest.json"
    if not manifest_path.exists():
        raise KbError(f"no manifest.json in {kb_dir}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if manifest.get("schema") != MANIFEST_SCHEMA:
        raise KbError(f"unknown manifest schema {manifest.get('schema')!r}")

    article_sets = tuple(
        ArticleSet(s["id"], tuple(s["articles"]), tuple(s["files"]))
        for s in manifest["article_sets"]
    )
    verdicts = frozenset(_parse_signature(s) for s in manifest["verdict_predicates"])

    files = [kb_dir / f for s in article_sets for f in s.files]
    files.extend(kb_dir / f for f in manifest.get("support_files", ()))
    program = load_kb(files, strict=False)

    # judgment metadata (every ruling we can cite), then corpus cases
    meta: dict[str, JudgmentRecord] = {}
    judgments_dir = kb_dir / "judgments"
    if judgments_dir.is_dir():
        for meta_path in sorted(judgments_dir.glob("*.meta.json")):
            record = _load_meta(meta_path)
            meta[record.id] = record
        cases = []
        for case_path in sorted(judgments_dir.glob("*.case")):
            case_id = case_path.name[: -len(".case")]
            if case_id not in meta:
                raise KbError(f"{case_path.name}: missing sidecar {case_id}.meta.json")
            record = _load_case(case_path, meta[case_id])
            meta[case_id] = record
            cases.append(record)
    else:
        cases = []

    # learned rules are shipped raw and installed with their markers here
    learned_dir = kb_dir / "learned"
    if learned_dir.is_dir():
        for lp in sorted(learned_dir.glob("*.lp")):
            learned = parse_program(lp.read_text(encoding="utf-8"), lp.name, origin=ORIGIN_LEARNED)
            for rule in learned.rules:
                judgment = meta.get(rule.id)
                if judgment is None:
                    raise KbError(
                        f"{lp.name}: learned rule id {rule.id!r} has no judgment metadata"
                        f" (judgments/{rule.id}.meta.json)"
                    )
                program = integrate_learned_rule(program, rule, judgment)
                meta[rule.id] = replace(judgment, learned_rule_ids=judgment.learned_rule_ids + (rule.id,))

    lint = lint_program(program, _load_wordlist(kb_dir))
    if not lint.ok:
        raise LintError("; ".join(lint.errors))
    return KnowledgeBase(
        kb_dir=kb_dir,
        program=program,
        article_sets=article_sets,
        verdict_predicates=verdicts,
        judgments=tuple(cases),
        judgment_meta=meta,
        lint=lint,
    )


def _parse_signature(text: str) -> tuple[str, int]:
    name, _, arity = text.partition("/")
    return (name.strip(), int(arity))


# --- learned-rule integration -------------------------------------------------


def marker_constant(citation_or_id: str) -> str:
    out = re.sub(r"[^a-z0-9_]+", "_", citation_or_id.lower()).strip("_")
    if not out or not out[0].isalpha():
        out = "j_" + out
    return out


def integrate_learned_rule(kb: Program, rule: Rule, judgment: JudgmentRecord) -> Program:
    """Install a learned rule so that whenever its body fires, both the
    conclusion and a `using_judgment` marker hold: the rule `h :- body`
    becomes the choice rule `2 {h; using_judgment(id)} 2 :- body.`"""
    if not rule.is_normal:
        raise KbError(f"only normal learned rules can be integrated, got: {rule}")
    marker = Atom("using_judgment", (Term.const(marker_constant(judgment.id)),))
    head = ChoiceHead(2, 2, (ChoiceElement(rule.head), ChoiceElement(marker)))
    integrated = Rule(
        rule.id,
        head,
        rule.body,
        annotation=rule.annotation,
        origin=ORIGIN_LEARNED,
        specific_over=rule.specific_over,
    )
    return kb.extend((integrated,))  # duplicate id -> DuplicateRuleIdError


# --- contradictions -------------------------------------------------------------


def detect_contradictions(
    kb: KnowledgeBase | Program,
    case_facts: Iterable[Atom],
    judgment_meta: Optional[dict[str, JudgmentRecord]] = None,
) -> list[ContradictionFinding]:
    """Solve kb + case facts and turn every contradiction/3 atom found in any
    stable model into a finding, with source attribution taken from the rules
    supporting its claims.  An inconsistent program raises
    InconsistentCaseError."""
    if isinstance(kb, KnowledgeBase):
        program = kb.case_program(case_facts)
        judgment_meta = judgment_meta if judgment_meta is not None else kb.judgment_meta
    else:
        rules = list(kb.rules)
        for i, fact in enumerate(sorted(set(case_facts), key=Atom.sort_key)):
            rules.append(Rule(f"case:fact{i + 1}", fact, (), origin=ORIGIN_EVIDENCE))
        program = Program(tuple(rules))
        judgment_meta = judgment_meta or {}
    gp = ground_program(program)
    models = list(enumerate_stable_models(gp))
    if not models:
        raise InconsistentCaseError("the case admits no stable model (evidence conflicts with the KB)")
    findings: dict[Atom, ContradictionFinding] = {}
    for model in models:
        for f in findings_for_model(gp, model.atoms, judgment_meta):
            findings.setdefault(f.atom, f)
    return [findings[a] for a in sorted(findings, key=Atom.sort_key)]


def findings_for_model(
    gp,
    model_atoms: frozenset[Atom],
    judgment_meta: dict[str, JudgmentRecord],
    supports: Optional[dict] = None,
) -> list[ContradictionFinding]:
    """Contradiction findings visible in one stable model, unresolved; the
    claims' sources come from the rules supporting the claim atoms."""
    out: list[ContradictionFinding] = []
    for atom in sorted(model_atoms, key=Atom.sort_key):
        if atom.signature != ("contradiction", 3):
            continue
        if supports is None:
            supports = _compute_supports(gp, model_atoms)
        rule = supports[atom].rule
        claims = rule.positive_body()[:2]
        sources = tuple(_source_of(supports[c].rule, judgment_meta) for c in claims)
        out.append(
            ContradictionFinding(
                claim_a=atom.args[0].text,
                claim_b=atom.args[1].text,
                subject=atom.args[2].text,
                atom=atom,
                sources=sources,
            )
        )
    return out


def finding_to_dict(finding: ContradictionFinding) -> dict:
    return {
        "claim_a": finding.claim_a,
        "claim_b": finding.claim_b,
        "subject": finding.subject,
        "atom": str(finding.atom),
        "resolution": finding.resolution,
        "applied_maxims": sorted(finding.applied_maxims),
        "diagnostic": finding.diagnostic,
        "sources": [
            {
                "kind": s.kind,
                "rule": s.rule_id,
                "citation": s.judgment.citation if s.judgment else None,
                "court_level": s.judgment.court_level if s.judgment else None,
                "date": s.judgment.date.isoformat() if s.judgment else None,
            }
            for s in finding.sources
        ],
    }


def _source_of(rule: Rule, judgment_meta: dict[str, JudgmentRecord]) -> SourceRef:
    if rule.origin == ORIGIN_LEARNED:
        return SourceRef("judgment", rule.id, judgment_meta.get(rule.id), rule.specific_over)
    if rule.origin == ORIGIN_EVIDENCE:
        return SourceRef("case-fact", rule.id, None, rule.specific_over)
    return SourceRef("article", rule.id, None, rule.specific_over)


def resolve_priority(finding: ContradictionFinding) -> ContradictionFinding:
    """Apply the interpretation maxims to the finding's two sources.

    An explicit specialis declaration dominates; otherwise superior (higher
    court) and posterior (later date) must agree, else the finding stays
    unresolved with the applied maxims recorded.
    """
    a, b = finding.sources
    if a.judgment is None or b.judgment is None:
        missing = [s.describe() for s in (a, b) if s.judgment is None]
        return replace(
            finding,
            resolution="unresolved",
            applied_maxims=frozenset(),
            diagnostic=f"missing maxim metadata for: {', '.join(missing)}",
        )
    applied: set[str] = set()
    votes: dict[str, str] = {}
    if a.specific_over == b.judgment.id and b.specific_over == a.judgment.id:
        return replace(
            finding,
            resolution="unresolved",
            applied_maxims=frozenset({MAXIM_SPECIALIS}),
            diagnostic="both sources declare themselves more specific",
        )
    if a.specific_over == b.judgment.id:
        applied.add(MAXIM_SPECIALIS)
        votes[MAXIM_SPECIALIS] = "a-wins"
    elif b.specific_over == a.judgment.id:
        applied.add(MAXIM_SPECIALIS)
        votes[MAXIM_SPECIALIS] = "b-wins"
    if a.judgment.court_level != b.judgment.court_level:
        applied.add(MAXIM_SUPERIOR)
        votes[MAXIM_SUPERIOR] = "a-wins" if a.judgment.court_level > b.judgment.court_level else "b-wins"
    if a.judgment.date != b.judgment.date:
        applied.add(MAXIM_POSTERIOR)
        votes[MAXIM_POSTERIOR] = "a-wins" if a.judgment.date > b.judgment.date else "b-wins"
    if MAXIM_SPECIALIS in votes:
        return replace(finding, resolution=votes[MAXIM_SPECIALIS], applied_maxims=frozenset(applied))
    if not votes:
        return replace(
            finding,
            resolution="unresolved",
            applied_maxims=frozenset(),
            diagnostic="no maxim discriminates between the sources",
        )
    outcomes = set(votes.values())
    if len(outcomes) == 1:
        return replace(finding, resolution=outcomes.pop(), applied_maxims=frozenset(applied))
    return replace(finding, resolution="unresolved", applied_maxims=frozenset(applied))
