"""Explanations of a stable model.

Two complementary views: a supportedness DAG (every derived atom points at
one rule instance whose satisfied body explains it) and an annotated
justification tree built from the trace templates attached to rules and
facts.  Support is chosen in least-fixpoint order — the first rule, in
program order, whose positive body is already explained — which keeps the
positive support relation acyclic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .ground import GroundProgram
from .solve import StableModel, _body_satisfied, is_stable
from .syntax import Atom, ChoiceElement, Rule, render_template
from .parser import parse_ground_atom


class ExplanationError(Exception):
    pass


@dataclass(frozen=True)
class DagEdge:
    source: Atom
    rule_id: str
    targets: tuple[Atom, ...]
    absent: tuple[Atom, ...] = ()


@dataclass(frozen=True)
class ExplanationDag:
    nodes: tuple[tuple[Atom, str], ...]  # (atom, "fact" | "derived")
    edges: tuple[DagEdge, ...]
    roots: frozenset[Atom]

    def node_kind(self, atom: Atom) -> Optional[str]:
        for a, kind in self.nodes:
            if a == atom:
                return kind
        return None


@dataclass(frozen=True)
class Support:
    rule: Rule
    element: Optional[ChoiceElement] = None  # set for choice-supported atoms

    @property
    def is_assumption(self) -> bool:
        return self.element is not None

    def label(self) -> Optional[str]:
        """Rendered trace label, or a generated one for assumptions."""
        if self.is_assumption:
            if self.rule.annotation is not None:
                return render_template(self.rule.annotation, dict(self.element.bindings))
            return f"assumed: {self.element.atom} (chosen by {self.rule.id})"
        return self.rule.annotation


def _compute_supports(gp: GroundProgram, model: frozenset[Atom]) -> dict[Atom, Support]:
    supports: dict[Atom, Support] = {}
    for r in gp.rules:
        if r.is_fact and r.head in model and r.head not in supports:
            supports[r.head] = Support(r)
    changed = True
    while changed:
        changed = False
        for r in gp.rules:
            if r.is_denial or not _body_satisfied(r, model):
                continue
            if not all(a in supports for a in r.positive_body()):
                continue
            if r.is_choice:
                for e in r.head.elements:
                    if e.atom in model and e.atom not in supports:
                        supports[e.atom] = Support(r, e)
                        changed = True
            elif r.head in model and r.head not in supports:
                supports[r.head] = Support(r)
                changed = True
    missing = model - set(supports)
    if missing:
        raise ExplanationError(
            f"unsupported model atoms (model not stable?): {sorted(str(a) for a in missing)}"
        )
    return supports


def support_dag(gp: GroundProgram, model: StableModel | frozenset[Atom]) -> ExplanationDag:
    atoms = model.atoms if isinstance(model, StableModel) else frozenset(model)
    if not is_stable(gp, atoms):
        raise ExplanationError("model is not a stable model of the program")
    supports = _compute_supports(gp, atoms)
    nodes = []
    edges = []
    for atom in sorted(atoms, key=Atom.sort_key):
        sup = supports[atom]
        if sup.rule.is_fact:
            nodes.append((atom, "fact"))
        else:
            nodes.append((atom, "derived"))
            edges.append(
                DagEdge(atom, sup.rule.id, sup.rule.positive_body(), sup.rule.negative_body())
            )
    return ExplanationDag(tuple(nodes), tuple(edges), atoms)


# --- justification trees ----------------------------------------------------


@dataclass(frozen=True)
class TreeNode:
    label: str
    children: tuple["TreeNode", ...] = ()


@dataclass(frozen=True)
class JustificationTree:
    root: TreeNode

    def render(self) -> str:
        lines: list[str] = []

        def walk(node: TreeNode, depth: int):
            lines.append("|  " * (depth - 1) + "|__" + node.label)
            for child in node.children:
                walk(child, depth + 1)

        walk(self.root, 1)
        return "\n".join(lines)


def justification_tree(gp: GroundProgram, model: StableModel | frozenset[Atom], query: Atom) -> JustificationTree:
    """Tree rooted at the query's annotation; unannotated atoms are traversed
    transparently, their annotated supports promoted to the current level."""
    atoms = model.atoms if isinstance(model, StableModel) else frozenset(model)
    if query not in atoms:
        raise ExplanationError(f"query atom {query} is not in the model")
    supports = _compute_supports(gp, atoms)

    def annotated_children(atom: Atom) -> tuple[TreeNode, ...]:
        out: list[TreeNode] = []
        for child in supports[atom].rule.positive_body():
            label = supports[child].label()
            if label is not None:
                out.append(TreeNode(label, annotated_children(child)))
            else:
                out.extend(annotated_children(child))
        return tuple(out)

    def bare(atom: Atom) -> TreeNode:
        return TreeNode(str(atom), tuple(bare(a) for a in supports[atom].rule.positive_body()))

    root_label = supports[query].label()
    children = annotated_children(query)
    if root_label is None and not children:
        return JustificationTree(bare(query))
    return JustificationTree(TreeNode(root_label or str(query), children))


# --- exports ----------------------------------------------------------------

DAG_SCHEMA = "lexasp/explanation-dag/1"


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dag(dag: ExplanationDag, format: str = "graph-description", include_negated: bool = False) -> str:
    if format in ("graph-description", "dot"):
        return _export_dot(dag, include_negated)
    if format in ("structured-document", "json"):
        return _export_json(dag)
    raise ValueError(f"unknown export format {format!r}")


def _export_dot(dag: ExplanationDag, include_negated: bool) -> str:
    lines = ["digraph explanation {", "  node [shape=box, style=filled];"]
    for atom, kind in dag.nodes:
        color = "darkgreen" if kind == "fact" else "lightgreen"
        font = ', fontcolor="white"' if kind == "fact" else ""
        lines.append(f"  {_dot_quote(str(atom))} [fillcolor=\"{color}\"{font}];")
    for edge in dag.edges:
        for target in edge.targets:
            lines.append(
                f"  {_dot_quote(str(edge.source))} -> {_dot_quote(str(target))}"
                f" [label={_dot_quote(edge.rule_id)}];"
            )
        if include_negated:
            for absent in edge.absent:
                lines.append(
                    f"  {_dot_quote('not ' + str(absent))} [fillcolor=\"white\", style=\"dashed\"];"
                )
                lines.append(
                    f"  {_dot_quote(str(edge.source))} -> {_dot_quote('not ' + str(absent))}"
                    f" [label={_dot_quote(edge.rule_id)}, style=dashed];"
                )
    lines.append("}")
    return "\n".join(lines) + "\n"


def _export_json(dag: ExplanationDag) -> str:
    doc = {
        "schema": DAG_SCHEMA,
        "nodes": [{"atom": str(a), "kind": kind} for a, kind in dag.nodes],
        "edges": [
            {
                "from": str(e.source),
                "rule": e.rule_id,
                "to": [str(t) for t in e.targets],
                "absent": [str(a) for a in e.absent],
            }
            for e in dag.edges
        ],
        "roots": [str(a) for a in sorted(dag.roots, key=Atom.sort_key)],
    }
    return json.dumps(doc, indent=2)


def parse_dag(text: str) -> ExplanationDag:
    """Round-trip parser for the structured-document export."""
    doc = json.loads(text)
    if doc.get("schema") != DAG_SCHEMA:
        raise ExplanationError(f"unknown DAG schema {doc.get('schema')!r}")
    nodes = tuple((parse_ground_atom(n["atom"]), n["kind"]) for n in doc["nodes"])
    edges = tuple(
        DagEdge(
            parse_ground_atom(e["from"]),
            e["rule"],
            tuple(parse_ground_atom(t) for t in e["to"]),
            tuple(parse_ground_atom(a) for a in e.get("absent", [])),
        )
        for e in doc["edges"]
    )
    roots = frozenset(parse_ground_atom(a) for a in doc["roots"])
    return ExplanationDag(nodes, edges, roots)
