/** Application wiring: upload, step through dimensions, download labels. */

import { ApiError, SdcClient, type ResultPayload } from "./api.js";
import { renderGraph } from "./chart.js";
import {
  addBoundary,
  canSubmit,
  initialState,
  moveBoundary,
  removeBoundary,
  type GraphViewState,
} from "./state.js";

function readFileText(file: File): Promise<string> {
  if (typeof file.text === "function") return file.text();
  return new Promise((resolve, reject) => {
    const reader = new FileReader();
    reader.onload = () => resolve(String(reader.result ?? ""));
    reader.onerror = () => reject(reader.error);
    reader.readAsText(file);
  });
}

export function labelsToCsv(result: ResultPayload): string {
  const lines = ["object_id,cluster_id"];
  for (const entry of result.labels) {
    lines.push(`${entry.objectId},${entry.clusterId}`);
  }
  return lines.join("\n") + "\n";
}

export class App {
  state: GraphViewState | null = null;
  result: ResultPayload | null = null;
  pending: Promise<void> = Promise.resolve();

  private root!: HTMLElement;

  constructor(readonly client: SdcClient) {}

  /** Await the most recent asynchronous action (for scripted drivers). */
  settle(): Promise<void> {
    return this.pending;
  }

  mount(root: HTMLElement, sessionId: string | null = null): void {
    this.root = root;
    root.innerHTML = `
      <header><h1>Single-dimension decision graphs</h1></header>
      <section id="upload-view">
        <form id="upload-form">
          <label>Dataset CSV <input type="file" id="file-input" accept=".csv,text/csv"></label>
          <label>Missing marker <input type="text" id="marker-input" value=""></label>
          <label><input type="checkbox" id="header-input"> first row is a header</label>
          <label><input type="checkbox" id="normalize-input" checked> normalize</label>
          <label><input type="checkbox" id="enhance-input" checked> enhance</label>
          <button type="submit" id="upload-btn">Start session</button>
        </form>
      </section>
      <section id="graph-view" hidden>
        <div id="progress"></div>
        <svg id="chart"></svg>
        <div id="boundary-list"></div>
        <div class="controls">
          <button id="submit-btn">Submit thresholds</button>
          <button id="log-toggle">Toggle log density</button>
          <button id="abort-btn">Abort session</button>
        </div>
        <div id="step-summary"></div>
      </section>
      <section id="result-view" hidden>
        <div id="result-summary"></div>
        <a id="download-link" download="labels.csv">Download labels CSV</a>
      </section>
      <div id="error-box" role="alert" hidden></div>
    `;
    this.query<HTMLFormElement>("#upload-form").addEventListener("submit", (evt) => {
      evt.preventDefault();
      this.track(this.startSessionFromForm());
    });
    this.query<HTMLButtonElement>("#submit-btn").addEventListener("click", () => {
      this.track(this.submitThresholds());
    });
    this.query<HTMLButtonElement>("#log-toggle").addEventListener("click", () => {
      if (!this.state) return;
      this.state.logScale = !this.state.logScale;
      this.renderChart();
    });
    this.query<HTMLButtonElement>("#abort-btn").addEventListener("click", () => {
      this.track(this.abortSession());
    });
    if (sessionId) {
      this.track(this.attach(sessionId));
    }
  }

  private query<T extends Element>(selector: string): T {
    const node = this.root.querySelector(selector);
    if (!node) throw new Error(`missing element ${selector}`);
    return node as T;
  }

  private track(work: Promise<void>): void {
    this.pending = work.catch((err) => this.showError(err));
  }

  private showError(err: unknown): void {
    const box = this.query<HTMLElement>("#error-box");
    box.hidden = false;
    box.textContent = err instanceof ApiError
      ? `Server rejected the request (${err.status}): ${err.message}`
      : `Error: ${String(err)}`;
  }

  private clearError(): void {
    const box = this.query<HTMLElement>("#error-box");
    box.hidden = true;
    box.textContent = "";
  }

  private async startSessionFromForm(): Promise<void> {
    this.clearError();
    const input = this.query<HTMLInputElement>("#file-input");
    const file = input.files && input.files[0];
    if (!file) {
      throw new Error("choose a CSV file first");
    }
    const text = await readFileText(file);
    const info = await this.client.createSession(text, {
      missingMarker: this.query<HTMLInputElement>("#marker-input").value,
      header: this.query<HTMLInputElement>("#header-input").checked,
      normalize: this.query<HTMLInputElement>("#normalize-input").checked,
      enhance: this.query<HTMLInputElement>("#enhance-input").checked,
    });
    await this.attach(info.sessionId, info.dimCount);
  }

  async attach(sessionId: string, dimCount = 0): Promise<void> {
    this.state = initialState(sessionId, dimCount);
    await this.loadGraph();
  }

  private async loadGraph(): Promise<void> {
    if (!this.state) return;
    const graph = await this.client.getGraph(this.state.sessionId);
    this.state.dimIndex = graph.dimIndex;
    this.state.dimCount = graph.dimCount;
    this.state.clusterCountSoFar = graph.clusterCountSoFar;
    this.state.points = graph.points;
    this.state.boundaries = [];
    this.showView("graph");
    this.renderChart();
  }

  async submitThresholds(): Promise<void> {
    if (!this.state || !canSubmit(this.state)) return;
    this.clearError();
    this.state.inFlight = true;
    this.renderControls();
    try {
      const step = await this.client.postThresholds(
        this.state.sessionId, this.state.dimIndex, this.state.boundaries);
      this.state.lastSizes = step.fusionClusterSizes;
      this.state.finished = step.finished;
      this.query<HTMLElement>("#step-summary").textContent =
        `dimension ${step.dimIndex}: fused cluster sizes [${step.fusionClusterSizes.join(", ")}]`;
      if (step.finished) {
        await this.loadResult();
      } else {
        await this.loadGraph();
      }
    } finally {
      this.state.inFlight = false;
      this.renderControls();
    }
  }

  private async loadResult(): Promise<void> {
    if (!this.state) return;
    this.result = await this.client.getResult(this.state.sessionId);
    const summary = this.query<HTMLElement>("#result-summary");
    summary.textContent =
      `Finished: ${this.result.labels.length} objects in ${this.result.clusterCount} clusters.`;
    const link = this.query<HTMLAnchorElement>("#download-link");
    link.href = "data:text/csv;charset=utf-8," + encodeURIComponent(labelsToCsv(this.result));
    this.showView("result");
  }

  private async abortSession(): Promise<void> {
    if (!this.state) return;
    await this.client.abort(this.state.sessionId);
    this.state = null;
    this.result = null;
    this.showView("upload");
  }

  private showView(view: "upload" | "graph" | "result"): void {
    this.query<HTMLElement>("#upload-view").hidden = view !== "upload";
    this.query<HTMLElement>("#graph-view").hidden = view !== "graph";
    this.query<HTMLElement>("#result-view").hidden = view !== "result";
  }

  private renderControls(): void {
    if (!this.state) return;
    this.query<HTMLButtonElement>("#submit-btn").disabled = !canSubmit(this.state);
    this.query<HTMLElement>("#progress").textContent =
      `Dimension ${this.state.dimIndex} of ${this.state.dimCount}` +
      ` | fused clusters so far: ${this.state.clusterCountSoFar}`;
    const list = this.query<HTMLElement>("#boundary-list");
    list.textContent = this.state.boundaries.length
      ? "Boundaries: " + this.state.boundaries.map((b) => b.toPrecision(6)).join(", ")
      : "No boundaries placed (single mountain).";
  }

  renderChart(): void {
    if (!this.state) return;
    this.renderControls();
    const svg = this.query<SVGSVGElement>("#chart");
    renderGraph(svg, this.state.points, this.state.boundaries, this.state.logScale, {
      onAdd: (value) => {
        if (!this.state || this.state.inFlight) return;
        addBoundary(this.state, value);
        this.renderChart();
      },
      onMove: (index, value) => {
        if (!this.state || this.state.inFlight) return;
        moveBoundary(this.state, index, value);
        this.renderChart();
      },
      onRemove: (index) => {
        if (!this.state || this.state.inFlight) return;
        removeBoundary(this.state, index);
        this.renderChart();
      },
    });
  }
}

export function mountApp(doc: Document, baseUrl = ""): App {
  const client = new SdcClient(baseUrl, (...args) => fetch(...args));
  const app = new App(client);
  const params = new URLSearchParams(doc.defaultView?.location.search ?? "");
  const root = doc.getElementById("app");
  if (!root) throw new Error("missing #app container");
  app.mount(root as HTMLElement, params.get("session"));
  return app;
}
