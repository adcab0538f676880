"""Report rendering: delimited outputs plus matplotlib figures.

The learn and verify report paths write tab-separated tables next to PNG
figures; explanation DAGs render to a layered PNG where fact nodes are dark
green and inferred nodes light green, with rule ids on the edges.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import FancyArrowPatch

from .explain import ExplanationDag
from .learn import LearnResult
from .syntax import Atom
from .verify import RefinementReport

FACT_COLOR = "#1b5e20"
DERIVED_COLOR = "#a5d6a7"


def _layers(dag: ExplanationDag) -> dict[Atom, int]:
    """Longest-path layering: facts at depth 0, every derived node one past
    its deepest support."""
    targets = {e.source: e.targets for e in dag.edges}
    depth: dict[Atom, int] = {}

    def of(atom: Atom) -> int:
        if atom not in depth:
            deps = targets.get(atom, ())
            depth[atom] = 0 if not deps else 1 + max(of(t) for t in deps)
        return depth[atom]

    for atom, _ in dag.nodes:
        of(atom)
    return depth


def render_dag_png(dag: ExplanationDag, path: Path | str) -> Path:
    path = Path(path)
    depth = _layers(dag)
    layers: dict[int, list[Atom]] = {}
    for atom, _ in dag.nodes:
        layers.setdefault(depth[atom], []).append(atom)
    for atoms in layers.values():
        atoms.sort(key=Atom.sort_key)
    positions: dict[Atom, tuple[float, float]] = {}
    width = max(len(v) for v in layers.values()) if layers else 1
    for d, atoms in layers.items():
        offset = (width - len(atoms)) / 2
        for i, atom in enumerate(atoms):
            positions[atom] = (offset + i, d)

    n_layers = max(layers) + 1 if layers else 1
    fig, ax = plt.subplots(figsize=(max(6, 2.4 * width), max(4, 1.4 * n_layers)))
    kinds = dict(dag.nodes)
    for edge in dag.edges:
        x1, y1 = positions[edge.source]
        for target in edge.targets:
            x2, y2 = positions[target]
            arrow = FancyArrowPatch(
                (x1, y1), (x2, y2), arrowstyle="-|>", mutation_scale=12,
                color="gray", shrinkA=18, shrinkB=18, zorder=1,
            )
            ax.add_patch(arrow)
            ax.annotate(
                edge.rule_id, ((x1 + x2) / 2, (y1 + y2) / 2),
                fontsize=6, color="dimgray", ha="center", zorder=2,
            )
    for atom, (x, y) in positions.items():
        fact = kinds.get(atom) == "fact"
        ax.annotate(
            str(atom), (x, y), ha="center", va="center", fontsize=8,
            color="white" if fact else "black", zorder=3,
            bbox=dict(
                boxstyle="round,pad=0.35",
                facecolor=FACT_COLOR if fact else DERIVED_COLOR,
                edgecolor="black",
            ),
        )
    ax.set_xlim(-0.8, width - 0.2)
    ax.set_ylim(-0.6, (max(layers) if layers else 0) + 0.6)
    ax.invert_yaxis()
    ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def write_learn_report(result: LearnResult, outdir: Path | str) -> list[Path]:
    """hypothesis.lp, the stage table as report.tsv, and a stage bar chart."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    hyp_path = outdir / "hypothesis.lp"
    hyp_path.write_text("".join(f"{text}\n" for text in result.hypothesis.texts()), encoding="utf-8")

    tsv_path = outdir / "report.tsv"
    lines = ["metric\tvalue", f"space size\t{result.report.space_size}"]
    for row, secs in result.report.rows():
        lines.append(f"{row}\t{secs:.6f}")
    tsv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    fig_path = outdir / "stages.png"
    rows = result.report.rows()[:-1]
    labels = [r for r, _ in rows]
    values = [max(s, 0.0) for _, s in rows]
    fig, ax = plt.subplots(figsize=(7, 3.2))
    ax.barh(labels, values, color="#4c72b0")
    ax.set_xlabel("seconds")
    ax.set_title(f"learning stages (|S| = {result.report.space_size})")
    ax.invert_yaxis()
    fig.tight_layout()
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)
    return [hyp_path, tsv_path, fig_path]


def write_verify_report(reports: Sequence[RefinementReport], outdir: Path | str) -> list[Path]:
    """Per-case phase results as cases.tsv plus a status figure."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    tsv_path = outdir / "cases.tsv"
    lines = ["case\tphase1\tphase2\tmodels\tdiagnosis"]
    for r in reports:
        lines.append(
            f"{r.case_id}\t{'ok' if r.phase1.ok else 'inconsistent'}\t"
            f"{r.phase2.status}\t{r.phase2.model_count}\t{r.diagnosis}"
        )
    tsv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    fig_path = outdir / "corpus.png"
    names = [r.case_id for r in reports]
    counts = [r.phase2.model_count for r in reports]
    colors = ["#2e7d32" if r.ok else "#c62828" for r in reports]
    fig, ax = plt.subplots(figsize=(7, 0.5 * max(len(reports), 4) + 1.2))
    ax.barh(names, counts, color=colors)
    ax.set_xlabel("scenarios under pinned facts")
    ax.set_title("corpus gate (green = pass)")
    ax.invert_yaxis()
    fig.tight_layout()
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)
    return [tsv_path, fig_path]
