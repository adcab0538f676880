/** Payload types mirrored from the service's versioned JSON schemas. */

export interface ArticleSet {
  id: string;
  articles: string[];
  files: string[];
}

export interface PredicateInfo {
  predicate: string;
  arity: number;
}

export interface ArticlesDoc {
  schema: string;
  article_sets: ArticleSet[];
  vocabulary: PredicateInfo[];
  verdict_predicates: string[];
}

export interface FindingSource {
  kind: "judgment" | "article" | "case-fact";
  rule: string;
  citation: string | null;
  court_level: number | null;
  date: string | null;
}

export interface Finding {
  claim_a: string;
  claim_b: string;
  subject: string;
  atom: string;
  resolution: "a-wins" | "b-wins" | "unresolved";
  applied_maxims: string[];
  diagnostic: string;
  sources: FindingSource[];
}

export interface Assumption {
  atom: string;
  label: string;
  rule: string;
}

export interface ScenarioDoc {
  index: number;
  verdicts: string[];
  assumptions: Assumption[];
  using_judgment: string[];
  contradictions: Finding[];
  atoms?: string[];
}

export interface ScenariosDoc {
  schema: string;
  case: string;
  scenarios: ScenarioDoc[];
}

export interface DagNode {
  atom: string;
  kind: "fact" | "derived";
}

export interface DagEdge {
  from: string;
  rule: string;
  to: string[];
  absent: string[];
}

export interface DagDoc {
  schema: string;
  nodes: DagNode[];
  edges: DagEdge[];
  roots: string[];
}

export interface TreeDoc {
  schema: string;
  query: string;
  text: string;
}

export interface CaseDoc {
  schema: string;
  id: string;
  facts?: string[];
  constraints?: string[];
}
