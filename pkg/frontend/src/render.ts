import { chartSpec, type ChartSpec } from "./charts";
import type { Action, ExplorerState, StepId } from "./flow";
import type { BiasReport, Catalogs, MetricEntry } from "./types";

export type Dispatch = (action: Action) => void;

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 280;
const HEIGHT = 48;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function svg(tag: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

function toX(spec: ChartSpec, v: number): number {
  const { min, max } = spec.axis;
  return ((v - min) / (max - min)) * WIDTH;
}

function chartSvg(spec: ChartSpec): SVGElement {
  const root = svg("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    class: "metric-axis",
    role: "img",
  });
  root.appendChild(
    svg("line", {
      x1: "0",
      y1: String(HEIGHT / 2),
      x2: String(WIDTH),
      y2: String(HEIGHT / 2),
      class: "axis-line",
    }),
  );
  if (spec.band) {
    const [lo, hi] = spec.band;
    root.appendChild(
      svg("rect", {
        x: String(toX(spec, lo)),
        y: String(HEIGHT / 4),
        width: String(toX(spec, hi) - toX(spec, lo)),
        height: String(HEIGHT / 2),
        class: "fair-band",
      }),
    );
  }
  if (spec.ideal !== null) {
    const x = String(toX(spec, spec.ideal));
    root.appendChild(
      svg("line", { x1: x, y1: "4", x2: x, y2: String(HEIGHT - 4), class: "ideal-line" }),
    );
  }
  if (spec.marker !== null) {
    root.appendChild(
      svg("circle", {
        cx: String(toX(spec, spec.marker)),
        cy: String(HEIGHT / 2),
        r: "6",
        class: `marker ${spec.styled}${spec.capped ? " capped" : ""}`,
      }),
    );
  }
  return root;
}

export function renderMetricChart(entry: MetricEntry): HTMLElement {
  const spec = chartSpec(entry);
  const box = el("section", `metric-chart ${spec.styled}`);
  box.dataset.metric = spec.metricId;
  box.appendChild(el("h3", "metric-name", spec.metricId));

  if (spec.kind === "no-value") {
    // nothing to chart; show why instead
    box.classList.add("no-value");
    box.appendChild(el("p", "metric-undefined", spec.explanation.text));
    return box;
  }

  const value = el("p", "metric-value", spec.display);
  if (spec.capped) {
    value.append(" ");
    value.appendChild(el("span", "capped-note", "(beyond axis)"));
  }
  box.appendChild(value);
  box.appendChild(chartSvg(spec));

  const overlay = el("details", "explain-overlay");
  overlay.appendChild(el("summary", undefined, "what this means"));
  overlay.appendChild(el("p", "explain-definition", spec.explanation.meta.definition));
  overlay.appendChild(el("p", "explain-text", spec.explanation.text));
  box.appendChild(overlay);
  return box;
}

export function renderStepper(state: ExplorerState, dispatch: Dispatch): HTMLElement {
  const nav = el("nav", "stepper");
  const steps: Array<{ id: StepId; title: string }> = [
    { id: "dataset", title: "1. Dataset" },
    { id: "check", title: "2. Check bias" },
    { id: "mitigate", title: "3. Mitigate" },
    { id: "compare", title: "4. Compare" },
  ];
  for (const s of steps) {
    const btn = el("button", s.id === state.step ? "active" : undefined, s.title);
    btn.addEventListener("click", () => dispatch({ kind: "go-to", step: s.id }));
    nav.appendChild(btn);
  }
  return nav;
}

export function renderDatasetStep(
  catalogs: Catalogs,
  state: ExplorerState,
  dispatch: Dispatch,
): HTMLElement {
  const box = el("section", "step step-dataset");
  box.appendChild(el("h2", undefined, "Pick a dataset"));
  for (const ds of catalogs.datasets) {
    const card = el("div", "dataset-card");
    card.dataset.dataset = ds.id;
    card.appendChild(el("h3", undefined, ds.id));

    const picker = el("label", undefined, "protected attribute ");
    const select = el("select");
    for (const attr of ds.protected_attributes) {
      const opt = el("option", undefined, attr);
      opt.value = attr;
      select.appendChild(opt);
    }
    if (state.dataset === ds.id && state.protectedAttr) {
      select.value = state.protectedAttr;
    }
    picker.appendChild(select);
    card.appendChild(picker);

    const go = el("button", "select-dataset", "check bias");
    go.addEventListener("click", () =>
      dispatch({
        kind: "select-dataset",
        dataset: ds.id,
        protectedAttr: select.value,
      }),
    );
    card.appendChild(go);
    box.appendChild(card);
  }
  return box;
}

function reportHeading(report: BiasReport): HTMLElement {
  return el(
    "p",
    "report-groups",
    `${report.privileged} vs ${report.unprivileged} (seed ${report.seed})`,
  );
}

export function renderCheckStep(state: ExplorerState, dispatch: Dispatch): HTMLElement {
  const box = el("section", "step step-check");
  box.appendChild(el("h2", undefined, `Bias check: ${state.dataset ?? ""}`));
  if (state.baseline === null) {
    box.appendChild(el("p", "placeholder", state.loading ? "measuring..." : "no report yet"));
    return box;
  }
  box.appendChild(reportHeading(state.baseline));
  const grid = el("div", "chart-grid");
  for (const entry of state.baseline.before.metrics) {
    grid.appendChild(renderMetricChart(entry));
  }
  box.appendChild(grid);
  const next = el("button", "to-mitigate", "pick a mitigation");
  next.addEventListener("click", () => dispatch({ kind: "go-to", step: "mitigate" }));
  box.appendChild(next);
  return box;
}

export function renderMitigateStep(
  catalogs: Catalogs,
  state: ExplorerState,
  dispatch: Dispatch,
): HTMLElement {
  const box = el("section", "step step-mitigate");
  box.appendChild(el("h2", undefined, "Pick a mitigation"));
  for (const algo of catalogs.algorithms) {
    const card = el("div", "algorithm-card");
    card.dataset.algorithm = algo.id;
    card.appendChild(el("h3", undefined, `${algo.id} (${algo.category})`));
    card.appendChild(el("p", undefined, algo.summary));
    const go = el("button", "select-algorithm", "compare");
    go.addEventListener("click", () =>
      dispatch({ kind: "select-algorithm", algorithm: algo.id }),
    );
    card.appendChild(go);
    box.appendChild(card);
  }
  return box;
}

export function renderCompareStep(state: ExplorerState): HTMLElement {
  const box = el("section", "step step-compare");
  box.appendChild(
    el("h2", undefined, `Before vs after: ${state.algorithm ?? ""}`),
  );
  const report = state.mitigated;
  if (
    report === null ||
    state.algorithm === null ||
    report.algorithm !== state.algorithm ||
    report.after === undefined
  ) {
    box.appendChild(el("p", "placeholder", state.loading ? "mitigating..." : "no report yet"));
    return box;
  }
  box.appendChild(reportHeading(report));
  const grid = el("div", "compare-grid");
  report.before.metrics.forEach((beforeEntry, i) => {
    const afterEntry = report.after!.metrics[i]!;
    const row = el("div", "compare-row");
    row.dataset.metric = beforeEntry.metric_id;

    const beforeCell = el("div", "compare-cell before");
    beforeCell.appendChild(el("p", "phase-label", "before"));
    beforeCell.appendChild(renderMetricChart(beforeEntry));

    const afterCell = el("div", "compare-cell after");
    afterCell.appendChild(el("p", "phase-label", "after"));
    afterCell.appendChild(renderMetricChart(afterEntry));

    row.appendChild(beforeCell);
    row.appendChild(afterCell);
    grid.appendChild(row);
  });
  box.appendChild(grid);
  const acc = report.accuracy;
  box.appendChild(
    el(
      "p",
      "accuracy-note",
      `balanced accuracy ${String(acc.balanced_accuracy_before)} before, ` +
        `${String(acc.balanced_accuracy_after)} after`,
    ),
  );
  return box;
}

export function renderApp(
  root: HTMLElement,
  catalogs: Catalogs,
  state: ExplorerState,
  dispatch: Dispatch,
): void {
  root.innerHTML = "";
  root.appendChild(renderStepper(state, dispatch));
  if (state.error !== null) {
    root.appendChild(el("div", "error-panel", state.error));
  }
  switch (state.step) {
    case "dataset":
      root.appendChild(renderDatasetStep(catalogs, state, dispatch));
      break;
    case "check":
      root.appendChild(renderCheckStep(state, dispatch));
      break;
    case "mitigate":
      root.appendChild(renderMitigateStep(catalogs, state, dispatch));
      break;
    case "compare":
      root.appendChild(renderCompareStep(state));
      break;
  }
}
