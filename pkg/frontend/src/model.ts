/** View models derived 1:1 from service payloads.
 *
 * The UI performs no legal inference of its own: every verdict, assumption
 * and contradiction on a card is a string taken verbatim from a payload.
 */

import type { Finding, PredicateInfo, ScenarioDoc, ScenariosDoc } from "./types.js";

export interface ContradictionView {
  headline: string;
  resolution: string;
  maxims: string[];
  sources: string[];
  diagnostic: string;
}

export interface ScenarioCard {
  index: number;
  /** full atom texts, e.g. robbery("Giulio","Veronica") */
  verdicts: string[];
  /** predicate names used as badge labels, e.g. robbery */
  badges: string[];
  /** judgment ids; non-empty means the precedent marker is shown */
  usingJudgment: string[];
  assumptions: { atom: string; label: string }[];
  contradictions: ContradictionView[];
}

export function predicateOf(atom: string): string {
  const open = atom.indexOf("(");
  return open === -1 ? atom : atom.slice(0, open);
}

export function contradictionView(finding: Finding): ContradictionView {
  const outcome =
    finding.resolution === "a-wins"
      ? `"${finding.claim_a}" prevails`
      : finding.resolution === "b-wins"
        ? `"${finding.claim_b}" prevails`
        : "unresolved";
  return {
    headline: `${finding.claim_a} vs ${finding.claim_b} — ${finding.subject}`,
    resolution: outcome,
    maxims: finding.applied_maxims,
    sources: finding.sources.map((s) => s.citation ?? `${s.kind} ${s.rule}`),
    diagnostic: finding.diagnostic,
  };
}

export function scenarioCard(doc: ScenarioDoc): ScenarioCard {
  return {
    index: doc.index,
    verdicts: [...doc.verdicts],
    badges: doc.verdicts.map(predicateOf),
    usingJudgment: [...doc.using_judgment],
    assumptions: doc.assumptions.map(({ atom, label }) => ({ atom, label })),
    contradictions: doc.contradictions.map(contradictionView),
  };
}

/** Card order mirrors the service's deterministic scenario order. */
export function buildCards(doc: ScenariosDoc): ScenarioCard[] {
  return doc.scenarios.map(scenarioCard);
}

// --- fact entry ----------------------------------------------------------------

/** Compose a fact atom statement from the builder form.  Entity names are
 * quoted strings by KB convention; integers (adherence levels) stay bare.
 * Bare constant symbols can still be entered through free-text facts. */
export function buildFact(predicate: string, args: string[]): string {
  const rendered = args.map((raw) => {
    const text = raw.trim();
    if (/^-?[0-9]+$/.test(text)) return text;
    return `"${text.replace(/"/g, "")}"`;
  });
  return rendered.length ? `${predicate}(${rendered.join(", ")}).` : `${predicate}.`;
}

/** Vocabulary entries offered by the fact builder (verdict-side predicates
 * are conclusions, not inputs, but stay selectable for what-if entry). */
export function vocabularyOptions(vocabulary: PredicateInfo[]): PredicateInfo[] {
  return [...vocabulary].sort((a, b) =>
    a.predicate === b.predicate ? a.arity - b.arity : a.predicate.localeCompare(b.predicate),
  );
}

// --- evidence-constraint builder -------------------------------------------------

export const LEVEL_OPS = ["<", "<=", ">", ">=", "=", "!="] as const;
export type LevelOp = (typeof LEVEL_OPS)[number];

/** The adherence-level denial of the constraint builder.  Emits exactly the
 * text a power user would submit by hand. */
export function buildLevelDenial(op: LevelOp, value: number): string {
  return `:- adherence(V,C,L), level(L), L ${op} ${value}, subtracted_obj(C), victim(V).`;
}

/** A denial forbidding the co-occurrence of the given ground atoms. */
export function buildCooccurrenceDenial(atoms: string[]): string {
  const body = atoms.map((a) => a.replace(/\.\s*$/, "")).join(", ");
  return `:- ${body}.`;
}
