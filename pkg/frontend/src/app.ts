/** Browser workbench: build a case, explore verdict scenarios, add evidence
 * denials, inspect explanation DAGs and justification trees. */

import { ApiClient, ApiError } from "./api.js";
import { layoutDag } from "./dag.js";
import {
  LEVEL_OPS,
  ScenarioCard,
  buildCards,
  buildFact,
  buildLevelDenial,
  vocabularyOptions,
  type LevelOp,
} from "./model.js";
import type { ArticlesDoc, DagDoc } from "./types.js";

const params = new URLSearchParams(location.search);
const api = new ApiClient(params.get("api") ?? "http://127.0.0.1:8000");

const $ = <T extends HTMLElement = HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

let caseId = "";
let articles: ArticlesDoc;
let facts: string[] = [];
let constraints: string[] = [];
let scenarioAbort: AbortController | null = null;
let mutationInFlight = false;
let selectedScenario = 0;

function setStatus(text: string, kind: "info" | "error" | "warn" = "info") {
  const el = $("status");
  el.textContent = text;
  el.className = `status ${kind}`;
}

function inlineError(id: string, message: string) {
  $(id).textContent = message;
}

function clearInlineErrors() {
  for (const el of document.querySelectorAll(".inline-error")) el.textContent = "";
}

// --- session ----------------------------------------------------------------------

async function ensureSession(): Promise<void> {
  const fromHash = location.hash.match(/#case=([0-9a-f]+)/)?.[1];
  if (fromHash) {
    try {
      await api.scenarios(fromHash);
      caseId = fromHash;
      return;
    } catch (e) {
      if (!(e instanceof ApiError && e.status === 404)) {
        caseId = fromHash; // 409/422 still means the session exists
        return;
      }
    }
  }
  caseId = await api.createCase();
  location.hash = `case=${caseId}`;
}

// --- fact builder -----------------------------------------------------------------

function renderVocabulary() {
  const select = $<HTMLSelectElement>("fact-predicate");
  select.innerHTML = "";
  for (const entry of vocabularyOptions(articles.vocabulary)) {
    const option = document.createElement("option");
    option.value = `${entry.predicate}/${entry.arity}`;
    option.textContent = `${entry.predicate}/${entry.arity}`;
    select.appendChild(option);
  }
  select.onchange = renderArgInputs;
  renderArgInputs();
}

function renderArgInputs() {
  const select = $<HTMLSelectElement>("fact-predicate");
  const arity = Number(select.value.split("/")[1] ?? 0);
  const holder = $("fact-args");
  holder.innerHTML = "";
  for (let i = 0; i < arity; i++) {
    const input = document.createElement("input");
    input.type = "text";
    input.placeholder = `arg ${i + 1}`;
    input.className = "fact-arg";
    holder.appendChild(input);
  }
}

function renderFacts() {
  const list = $("fact-list");
  list.innerHTML = "";
  for (const fact of facts) {
    const item = document.createElement("li");
    const text = document.createElement("code");
    text.textContent = fact;
    const remove = document.createElement("button");
    remove.textContent = "remove";
    remove.onclick = () => mutate(() => api.removeFact(caseId, fact));
    item.append(text, remove);
    list.appendChild(item);
  }
  const constraintList = $("constraint-list");
  constraintList.innerHTML = "";
  for (const c of constraints) {
    const item = document.createElement("li");
    const text = document.createElement("code");
    text.textContent = c;
    item.appendChild(text);
    constraintList.appendChild(item);
  }
}

// --- mutations (one in flight; scenario refresh cancels and replaces) ----------------

async function mutate(op: () => Promise<{ facts?: string[]; constraints?: string[] }>) {
  if (mutationInFlight) return;
  mutationInFlight = true;
  clearInlineErrors();
  try {
    const doc = await op();
    if (doc.facts) facts = doc.facts;
    if (doc.constraints) constraints = doc.constraints;
    renderFacts();
    await refreshScenarios();
  } catch (e) {
    if (e instanceof ApiError && e.status === 422) {
      inlineError("fact-error", e.detail);
    } else {
      setStatus(String(e), "error");
    }
  } finally {
    mutationInFlight = false;
  }
}

// --- scenarios -----------------------------------------------------------------------

async function refreshScenarios() {
  scenarioAbort?.abort();
  scenarioAbort = new AbortController();
  const panel = $("scenarios");
  try {
    const doc = await api.scenarios(caseId, scenarioAbort.signal);
    renderCards(buildCards(doc));
    setStatus(`${doc.scenarios.length} scenario(s)`);
  } catch (e) {
    if (e instanceof DOMException && e.name === "AbortError") return;
    if (e instanceof ApiError && e.status === 409) {
      panel.innerHTML = "";
      const alert = document.createElement("div");
      alert.className = "inconsistent";
      alert.textContent = "no consistent scenario — review evidence";
      panel.appendChild(alert);
      setStatus(e.detail, "warn");
      $("explanation").innerHTML = "";
      return;
    }
    setStatus(String(e), "error");
  }
}

function renderCards(cards: ScenarioCard[]) {
  const panel = $("scenarios");
  panel.innerHTML = "";
  for (const card of cards) {
    const el = document.createElement("article");
    el.className = "card" + (card.index === selectedScenario ? " selected" : "");

    const header = document.createElement("header");
    const title = document.createElement("span");
    title.textContent = `scenario ${card.index}`;
    header.appendChild(title);
    if (card.usingJudgment.length > 0) {
      const marker = document.createElement("span");
      marker.className = "badge judgment";
      marker.title = card.usingJudgment.join(", ");
      marker.textContent = "using judgment";
      header.appendChild(marker);
    }
    el.appendChild(header);

    const verdicts = document.createElement("div");
    verdicts.className = "verdicts";
    card.verdicts.forEach((verdict, i) => {
      const badge = document.createElement("span");
      badge.className = "badge verdict";
      badge.title = verdict;
      badge.textContent = card.badges[i];
      verdicts.appendChild(badge);
    });
    if (card.verdicts.length === 0) {
      verdicts.textContent = "(no verdict)";
    }
    el.appendChild(verdicts);

    if (card.assumptions.length > 0) {
      const assumptions = document.createElement("ul");
      assumptions.className = "assumptions";
      for (const a of card.assumptions) {
        const item = document.createElement("li");
        item.textContent = a.label;
        item.title = a.atom;
        assumptions.appendChild(item);
      }
      el.appendChild(assumptions);
    }

    for (const finding of card.contradictions) {
      const alert = document.createElement("div");
      alert.className = "contradiction";
      const head = document.createElement("strong");
      head.textContent = `contradiction: ${finding.headline}`;
      const detail = document.createElement("div");
      detail.textContent =
        `${finding.resolution}` +
        (finding.maxims.length ? ` (maxims: ${finding.maxims.join(", ")})` : "") +
        (finding.diagnostic ? ` — ${finding.diagnostic}` : "");
      const sources = document.createElement("div");
      sources.textContent = finding.sources.join(" vs ");
      alert.append(head, detail, sources);
      el.appendChild(alert);
    }

    el.onclick = () => {
      selectedScenario = card.index;
      renderCards(cards);
      void showExplanation(card);
    };
    panel.appendChild(el);
  }
  const current = cards.find((c) => c.index === selectedScenario) ?? cards[0];
  if (current) {
    selectedScenario = current.index;
    void showExplanation(current);
  }
}

// --- explanations ----------------------------------------------------------------------

async function showExplanation(card: ScenarioCard) {
  const holder = $("explanation");
  holder.innerHTML = "";
  try {
    const dag = await api.explanationDag(caseId, card.index);
    holder.appendChild(renderDagSvg(dag));
    const queryAtom = card.verdicts[0];
    if (queryAtom) {
      const tree = await api.explanationTree(caseId, card.index, queryAtom);
      const pre = document.createElement("pre");
      pre.className = "tree";
      pre.textContent = tree.text;
      holder.appendChild(pre);
    } else {
      const hint = document.createElement("p");
      hint.className = "hint";
      hint.textContent = "no verdict atom to explain in this scenario";
      holder.appendChild(hint);
    }
  } catch (e) {
    setStatus(String(e), "error");
  }
}

const CELL_W = 190;
const CELL_H = 70;

function renderDagSvg(doc: DagDoc): SVGSVGElement {
  const layout = layoutDag(doc);
  const svgNS = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(svgNS, "svg");
  const width = layout.columns * CELL_W + 40;
  const height = layout.layers * CELL_H + 40;
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "dag");
  svg.dataset.nodeCount = String(layout.nodes.length);

  const pos = new Map(layout.nodes.map((n) => [n.atom, n]));
  const px = (x: number) => 20 + x * CELL_W + CELL_W / 2;
  const py = (y: number) => height - (20 + y * CELL_H + CELL_H / 2);

  for (const edge of layout.edges) {
    const a = pos.get(edge.from)!;
    const b = pos.get(edge.to)!;
    const line = document.createElementNS(svgNS, "line");
    line.setAttribute("x1", String(px(a.x)));
    line.setAttribute("y1", String(py(a.y)));
    line.setAttribute("x2", String(px(b.x)));
    line.setAttribute("y2", String(py(b.y)));
    line.setAttribute("class", "dag-edge");
    const title = document.createElementNS(svgNS, "title");
    title.textContent = edge.rule;
    line.appendChild(title);
    svg.appendChild(line);
  }
  for (const node of layout.nodes) {
    const group = document.createElementNS(svgNS, "g");
    const rect = document.createElementNS(svgNS, "rect");
    rect.setAttribute("x", String(px(node.x) - CELL_W / 2 + 10));
    rect.setAttribute("y", String(py(node.y) - 16));
    rect.setAttribute("width", String(CELL_W - 20));
    rect.setAttribute("height", "32");
    rect.setAttribute("rx", "8");
    rect.setAttribute("class", node.kind === "fact" ? "dag-fact" : "dag-derived");
    const label = document.createElementNS(svgNS, "text");
    label.setAttribute("x", String(px(node.x)));
    label.setAttribute("y", String(py(node.y) + 4));
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("class", node.kind === "fact" ? "dag-label-fact" : "dag-label");
    label.textContent = node.atom;
    const title = document.createElementNS(svgNS, "title");
    title.textContent = node.atom;
    group.append(rect, label, title);
    svg.appendChild(group);
  }
  return svg;
}

// --- wiring -------------------------------------------------------------------------------

function wireForms() {
  $("fact-form").onsubmit = (event) => {
    event.preventDefault();
    const predicate = $<HTMLSelectElement>("fact-predicate").value.split("/")[0];
    const args = [...document.querySelectorAll<HTMLInputElement>(".fact-arg")].map(
      (input) => input.value,
    );
    if (args.some((a) => a.trim() === "")) {
      inlineError("fact-error", "fill every argument");
      return;
    }
    void mutate(() => api.addFacts(caseId, [buildFact(predicate, args)]));
  };

  $("fact-free-form").onsubmit = (event) => {
    event.preventDefault();
    const input = $<HTMLInputElement>("fact-free");
    if (!input.value.trim()) return;
    void mutate(() => api.addFacts(caseId, [input.value.trim()]));
    input.value = "";
  };

  const opSelect = $<HTMLSelectElement>("level-op");
  for (const op of LEVEL_OPS) {
    const option = document.createElement("option");
    option.value = op;
    option.textContent = op;
    opSelect.appendChild(option);
  }
  $("constraint-form").onsubmit = (event) => {
    event.preventDefault();
    const op = opSelect.value as LevelOp;
    const value = Number($<HTMLInputElement>("level-value").value);
    void mutate(() => api.addConstraint(caseId, buildLevelDenial(op, value)));
  };
  $("constraint-free-form").onsubmit = (event) => {
    event.preventDefault();
    const input = $<HTMLInputElement>("constraint-free");
    if (!input.value.trim()) return;
    void mutate(() => api.addConstraint(caseId, input.value.trim()));
    input.value = "";
  };

  $("new-case").onclick = async () => {
    await api.deleteCase(caseId).catch(() => undefined);
    facts = [];
    constraints = [];
    caseId = await api.createCase();
    location.hash = `case=${caseId}`;
    renderFacts();
    await refreshScenarios();
  };
}

async function main() {
  setStatus("connecting…");
  try {
    articles = await api.articles();
    await ensureSession();
  } catch (e) {
    setStatus(`cannot reach the service at ${api.base}: ${e}`, "error");
    return;
  }
  $("kb-summary").textContent = articles.article_sets
    .map((s) => `${s.id} (${s.articles.join(", ")})`)
    .join(" · ");
  renderVocabulary();
  wireForms();
  renderFacts();
  await refreshScenarios();
}

void main();
