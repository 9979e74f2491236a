/** Browser bootstrap: wires the workspace controller to the DOM. Everything
 * interesting lives in the pure modules; this file only mounts them. */

import { MatchbenchClient } from "./api.js";
import { breakdownChart, radarChart, upsetChart } from "./charts.js";
import { Workspace } from "./controller.js";
import { buildHeatmapModel, visibleWindow } from "./heatmap.js";
import {
  renderBanner,
  renderBreakdown,
  renderCandidateActions,
  renderCellDetail,
  renderExportLinks,
  renderHeatmap,
  renderMatcherList,
  renderProvenance,
  renderRadar,
  renderUpset,
} from "./render.js";

const VIEWPORT_ROWS = 40;
const VIEWPORT_COLS = 25;

declare global {
  interface Window {
    MATCHBENCH_API?: string;
  }
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing #${id}`);
  }
  return node as T;
}

class App {
  private readonly workspace: Workspace;
  private pollTimer: number | null = null;
  private rowOffset = 0;
  private colOffset = 0;

  constructor(baseUrl: string) {
    this.workspace = new Workspace(new MatchbenchClient(baseUrl));
  }

  start(): void {
    el<HTMLButtonElement>("open-session").addEventListener("click", () => {
      const id = el<HTMLInputElement>("session-id").value.trim();
      if (id) {
        void this.openSession(id);
      }
    });
    el<HTMLInputElement>("cutoff").addEventListener("change", (event) => {
      const value = Number((event.target as HTMLInputElement).value);
      void this.workspace.changeCutoff(value).then(() => this.draw());
    });
    el<HTMLSelectElement>("group").addEventListener("change", (event) => {
      const value = (event.target as HTMLSelectElement).value || null;
      void this.workspace.changeGroup(value).then(() => this.draw());
    });
    el<HTMLInputElement>("developer-mode").addEventListener("change", () => {
      this.workspace.toggleDeveloper();
      this.draw();
    });
    el<HTMLElement>("heatmap").addEventListener("click", (event) => {
      const cell = (event.target as HTMLElement).closest<HTMLElement>("[data-source]");
      if (cell && cell.dataset.source && cell.dataset.target) {
        this.workspace.select(cell.dataset.source, cell.dataset.target);
        void this.showDetail(cell.dataset.source, cell.dataset.target);
        this.draw();
      }
    });
    el<HTMLElement>("selection").addEventListener("click", (event) => {
      const button = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
      const selected = this.workspace.state.selected;
      if (!button || !selected) {
        return;
      }
      const action = button.dataset.action as string;
      const note = action === "note" ? window.prompt("note text") ?? undefined : undefined;
      void this.workspace.decide(selected.source, selected.target, action, note).then(() => this.draw());
    });
    el<HTMLButtonElement>("register-matcher").addEventListener("click", () => {
      void this.registerFromEditor();
    });
    el<HTMLElement>("matchers").addEventListener("click", (event) => {
      const button = (event.target as HTMLElement).closest<HTMLElement>("[data-remove]");
      if (button && button.dataset.remove && window.confirm(`remove ${button.dataset.remove}?`)) {
        void this.workspace.removeMatcher(button.dataset.remove).then(() => this.draw());
      }
    });
  }

  private async openSession(id: string): Promise<void> {
    await this.workspace.openSession(id);
    this.schedulePolling();
    this.draw();
  }

  private schedulePolling(): void {
    if (this.pollTimer !== null) {
      window.clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
    const cadence = this.workspace.state.pollMs;
    if (cadence > 0) {
      this.pollTimer = window.setInterval(() => {
        void this.workspace.pollStatus().then(async () => {
          if (this.workspace.state.pollMs === 0) {
            // job just finished: one full refresh, then stop polling
            await this.workspace.refresh();
            this.schedulePolling();
          }
          this.draw();
        });
      }, cadence);
    }
  }

  private async registerFromEditor(): Promise<void> {
    const id = el<HTMLInputElement>("matcher-id").value;
    const code = el<HTMLTextAreaElement>("matcher-code").value;
    const result = await this.workspace.registerMatcher({ id, code });
    el<HTMLElement>("editor-error").textContent = result.ok ? "" : result.error;
    this.draw();
  }

  private async showDetail(source: string, target: string): Promise<void> {
    const sessionId = this.workspace.state.sessionId;
    if (!sessionId) return;
    try {
      const [src, tgt, vm] = await Promise.all([
        this.workspace.client.profile(sessionId, source, "source"),
        this.workspace.client.profile(sessionId, target, "target"),
        this.workspace.client.valueMap(sessionId, source, target),
      ]);
      el<HTMLElement>("detail").innerHTML = renderCellDetail(src.profile, tgt.profile, vm.mapping);
    } catch {
      el<HTMLElement>("detail").innerHTML = "";
    }
  }

  private draw(): void {
    const { state, page, metrics, breakdown, consensus, matchers, provenance } = this.workspace.snapshot();
    el<HTMLElement>("banner").innerHTML = renderBanner(state.banner);
    if (page) {
      const model = buildHeatmapModel(page);
      const cells = visibleWindow(model, state.cutoff, this.rowOffset, VIEWPORT_ROWS, this.colOffset, VIEWPORT_COLS);
      el<HTMLElement>("heatmap").innerHTML = renderHeatmap(model, cells);
    }
    if (state.selected && page) {
      const cand = page.candidates.find(
        (c) => c.source === state.selected?.source && c.target === state.selected?.target,
      );
      el<HTMLElement>("selection").innerHTML = cand ? renderCandidateActions(cand) : "";
    }
    if (state.developerMode) {
      if (metrics) el<HTMLElement>("radar").innerHTML = renderRadar(radarChart(metrics));
      if (breakdown) el<HTMLElement>("breakdown").innerHTML = renderBreakdown(breakdownChart(breakdown));
      if (consensus) el<HTMLElement>("upset").innerHTML = renderUpset(upsetChart(consensus));
      if (matchers) el<HTMLElement>("matchers").innerHTML = renderMatcherList(matchers);
    }
    el<HTMLElement>("provenance").innerHTML = renderProvenance(provenance);
    if (state.sessionId) {
      el<HTMLElement>("exports").innerHTML = renderExportLinks((kind) =>
        this.workspace.client.exportUrl(state.sessionId as string, kind),
      );
    }
  }
}

if (typeof document !== "undefined" && typeof window !== "undefined") {
  const api = window.MATCHBENCH_API ?? window.location.origin;
  window.addEventListener("DOMContentLoaded", () => new App(api).start());
}

export { App };
