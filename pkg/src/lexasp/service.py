"""HTTP/JSON service exposing the case workflow to scripts and the UI.

Sessions accumulate facts and evidence denials over an immutable KB
snapshot; every mutation invalidates the cached scenario list.  Scenario
numbering follows the solver's deterministic model order, an inconsistent
session is an explicit 409 (never an empty list), and invalid fact or denial
text surfaces the parse/safety error verbatim as a 422.
"""

from __future__ import annotations

import os
import threading
import uuid
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .explain import _compute_supports, export_dag, justification_tree, support_dag
from .ground import ground_program
from .kb import (
    InconsistentCaseError,
    KnowledgeBase,
    finding_to_dict,
    findings_for_model,
    load_kb_dir,
    resolve_priority,
)
from .parser import parse_ground_atom, parse_statement
from .solve import enumerate_stable_models
from .syntax import Atom, ORIGIN_EVIDENCE, Rule, SourceError

SCHEMA_PREFIX = "lexasp"


class FactsIn(BaseModel):
    facts: list[str]


class ConstraintIn(BaseModel):
    text: str


@dataclass
class Scenario:
    index: int
    atoms: frozenset[Atom]
    verdicts: list[str]
    assumptions: list[dict]
    using_judgment: list[str]
    contradictions: list[dict]

    def to_dict(self, include_atoms: bool = False) -> dict:
        doc = {
            "index": self.index,
            "verdicts": self.verdicts,
            "assumptions": self.assumptions,
            "using_judgment": self.using_judgment,
            "contradictions": self.contradictions,
        }
        if include_atoms:
            doc["atoms"] = sorted(str(a) for a in self.atoms)
        return doc


@dataclass
class CaseSession:
    id: str
    facts: list[Atom] = field(default_factory=list)
    constraints: list[Rule] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    cache: Optional[tuple] = None  # (ground program, scenarios)

    def invalidate(self):
        self.cache = None


def _compute_scenarios(kb: KnowledgeBase, session: CaseSession):
    gp = ground_program(kb.case_program(session.facts, session.constraints))
    models = list(enumerate_stable_models(gp))
    if not models:
        raise InconsistentCaseError("no consistent scenario: the evidence contradicts the KB")
    scenarios = []
    for i, model in enumerate(models):
        supports = _compute_supports(gp, model.atoms)
        verdicts = sorted(
            str(a)
            for a in model.atoms
            if a.signature in kb.verdict_predicates
            and a.predicate not in ("using_judgment", "contradiction")
        )
        assumptions = [
            {"atom": str(a), "label": supports[a].label(), "rule": supports[a].rule.id}
            for a in sorted(model.atoms, key=Atom.sort_key)
            if supports[a].is_assumption and a.predicate != "using_judgment"
        ]
        markers = sorted(a.args[0].text for a in model.atoms if a.signature == ("using_judgment", 1))
        contradictions = [
            finding_to_dict(resolve_priority(f))
            for f in findings_for_model(gp, model.atoms, kb.judgment_meta, supports)
        ]
        scenarios.append(Scenario(i, model.atoms, verdicts, assumptions, markers, contradictions))
    return gp, scenarios


def create_app(kb: Optional[KnowledgeBase] = None) -> FastAPI:
    kb = kb if kb is not None else load_kb_dir(os.environ.get("KB_DIR"))
    app = FastAPI(title="lexasp", version="1")
    # the browser workbench is served as static files from another origin
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    sessions: dict[str, CaseSession] = {}
    registry_lock = threading.Lock()

    def get_session(case_id: str) -> CaseSession:
        with registry_lock:
            session = sessions.get(case_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {case_id!r}")
        return session

    def scenarios_of(session: CaseSession):
        with session.lock:
            if session.cache is None:
                try:
                    session.cache = _compute_scenarios(kb, session)
                except InconsistentCaseError as exc:
                    raise HTTPException(status_code=409, detail=str(exc))
            return session.cache

    @app.get("/kb/articles")
    def kb_articles():
        return {
            "schema": f"{SCHEMA_PREFIX}/articles/1",
            "article_sets": [
                {"id": s.id, "articles": list(s.articles), "files": list(s.files)}
                for s in kb.article_sets
            ],
            "vocabulary": [
                {"predicate": name, "arity": arity} for name, arity in kb.vocabulary()
            ],
            "verdict_predicates": [f"{n}/{a}" for n, a in sorted(kb.verdict_predicates)],
        }

    @app.post("/cases", status_code=201)
    def create_case():
        case_id = uuid.uuid4().hex[:12]
        with registry_lock:
            sessions[case_id] = CaseSession(case_id)
        return {"schema": f"{SCHEMA_PREFIX}/case/1", "id": case_id}

    @app.delete("/cases/{case_id}", status_code=204)
    def delete_case(case_id: str):
        with registry_lock:
            if case_id not in sessions:
                raise HTTPException(status_code=404, detail=f"unknown session {case_id!r}")
            del sessions[case_id]
        return Response(status_code=204)

    @app.post("/cases/{case_id}/facts")
    def add_facts(case_id: str, body: FactsIn):
        session = get_session(case_id)
        try:
            atoms = [parse_ground_atom(text) for text in body.facts]
        except SourceError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        with session.lock:
            for a in atoms:
                if a not in session.facts:
                    session.facts.append(a)
            session.invalidate()
            return {
                "schema": f"{SCHEMA_PREFIX}/case/1",
                "id": case_id,
                "facts": sorted(str(a) for a in session.facts),
            }

    @app.delete("/cases/{case_id}/facts")
    def remove_fact(case_id: str, fact: str):
        session = get_session(case_id)
        try:
            atom = parse_ground_atom(fact)
        except SourceError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        with session.lock:
            if atom not in session.facts:
                raise HTTPException(status_code=404, detail=f"fact {fact!r} is not asserted")
            session.facts.remove(atom)
            session.invalidate()
            return {
                "schema": f"{SCHEMA_PREFIX}/case/1",
                "id": case_id,
                "facts": sorted(str(a) for a in session.facts),
            }

    @app.post("/cases/{case_id}/constraints")
    def add_constraint(case_id: str, body: ConstraintIn):
        session = get_session(case_id)
        try:
            rule = parse_statement(body.text, f"evidence{len(session.constraints) + 1}", origin=ORIGIN_EVIDENCE)
        except SourceError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        if not rule.is_denial:
            raise HTTPException(status_code=422, detail="evidence constraints must be denials (:- body.)")
        with session.lock:
            session.constraints.append(rule)
            session.invalidate()
            return {
                "schema": f"{SCHEMA_PREFIX}/case/1",
                "id": case_id,
                "constraints": [str(r) for r in session.constraints],
            }

    @app.get("/cases/{case_id}/scenarios")
    def get_scenarios(case_id: str, atoms: bool = False):
        session = get_session(case_id)
        _, scenarios = scenarios_of(session)
        return {
            "schema": f"{SCHEMA_PREFIX}/scenarios/1",
            "case": case_id,
            "scenarios": [s.to_dict(include_atoms=atoms) for s in scenarios],
        }

    @app.get("/cases/{case_id}/scenarios/{index}/explanation")
    def get_explanation(case_id: str, index: int, format: str = "dag", query: Optional[str] = None):
        session = get_session(case_id)
        gp, scenarios = scenarios_of(session)
        if not 0 <= index < len(scenarios):
            raise HTTPException(status_code=404, detail=f"no scenario {index}")
        model = scenarios[index].atoms
        if format == "dag":
            import json as _json

            return _json.loads(export_dag(support_dag(gp, model), "structured-document"))
        if format == "tree":
            if not query:
                raise HTTPException(status_code=422, detail="tree explanations need a ?query=ATOM")
            try:
                atom = parse_ground_atom(query)
            except SourceError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            if atom not in model:
                raise HTTPException(status_code=422, detail=f"atom {query} is not in scenario {index}")
            tree = justification_tree(gp, model, atom)
            return {
                "schema": f"{SCHEMA_PREFIX}/justification-tree/1",
                "query": str(atom),
                "text": tree.render(),
            }
        raise HTTPException(status_code=422, detail=f"unknown format {format!r} (use dag or tree)")

    return app


def main(port: Optional[int] = None, kb_dir: Optional[str] = None):
    import uvicorn

    if kb_dir:
        os.environ["KB_DIR"] = kb_dir
    port = port if port is not None else int(os.environ.get("PORT", "8000"))
    uvicorn.run(create_app(), host="127.0.0.1", port=port, log_level="warning")
