/** Application wiring: exemplar view, subset selection, query submission,
 *  side-by-side method comparison, iterative steering. */

import { ApiClient, ServiceError } from "./api.js";
import { renderCourt } from "./court.js";
import { renderGallery } from "./gallery.js";
import { SelectionState } from "./selection.js";
import type { PlayPayload, QueryResponse, RankedItem } from "./types.js";
import { agentTokens } from "./types.js";

export interface AppElements {
  exemplarInput: HTMLInputElement;
  loadButton: HTMLButtonElement;
  submitButton: HTMLButtonElement;
  compareToggle: HTMLInputElement;
  courtHost: HTMLElement;
  treePanel: HTMLElement;
  baselinePanel: HTMLElement;
  status: HTMLElement;
}

export class App {
  selection: SelectionState = new SelectionState([]);
  exemplar: PlayPayload | null = null;
  lastRequestSelected: string[] = [];
  private inflight: AbortController | null = null;

  constructor(
    private api: ApiClient,
    private el: AppElements,
    private k = 10,
  ) {
    el.loadButton.addEventListener("click", () => {
      void this.loadExemplar(el.exemplarInput.value.trim());
    });
    el.submitButton.addEventListener("click", () => {
      void this.submit();
    });
  }

  setStatus(text: string, isError = false): void {
    this.el.status.textContent = text;
    this.el.status.classList.toggle("error", isError);
  }

  async loadExemplar(playId: string): Promise<void> {
    if (!playId) {
      this.setStatus("enter a play id", true);
      return;
    }
    try {
      const play = await this.api.getPlay(playId);
      this.setExemplar(play);
      this.setStatus(`loaded ${playId}`);
    } catch (err) {
      this.setStatus(this.describe(err), true);
    }
  }

  setExemplar(play: PlayPayload): void {
    this.exemplar = play;
    this.selection.reset(agentTokens(play));
    this.el.courtHost.replaceChildren(
      renderCourt(play, { selection: this.selection }),
    );
    this.el.exemplarInput.value = play.play_id;
  }

  /** Submit the current selection; a new submission cancels the previous
   *  in-flight queries. */
  async submit(): Promise<void> {
    if (!this.exemplar) {
      this.setStatus("load an exemplar first", true);
      return;
    }
    const selected = this.selection.selected();
    if (selected.length === 0) {
      this.setStatus("select at least one trajectory", true);
      return;
    }
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    this.lastRequestSelected = [...selected];
    this.setStatus("querying…");
    const base: Parameters<ApiClient["query"]>[0] = {
      play_id: this.exemplar.play_id,
      selected,
      k: this.k,
    };
    try {
      const wantBaseline = this.el.compareToggle.checked;
      const [tree, baseline] = await Promise.all([
        this.api.query({ ...base, method: "tree" }, controller.signal),
        wantBaseline
          ? this.api.query({ ...base, method: "baseline" }, controller.signal)
          : Promise.resolve(null),
      ]);
      this.showPanel(this.el.treePanel, "tree", tree);
      if (baseline) {
        this.showPanel(this.el.baselinePanel, "baseline", baseline);
      } else {
        this.el.baselinePanel.replaceChildren();
      }
      this.setStatus(`${tree.results.length} results`);
    } catch (err) {
      if (controller.signal.aborted) return; // superseded by a newer query
      this.setStatus(this.describe(err), true);
      this.offerRetry();
    }
  }

  private showPanel(host: HTMLElement, label: string, resp: QueryResponse): void {
    renderGallery(host, resp.results, {
      label,
      onPromote: (item: RankedItem) => {
        // iterative steering: the clicked result becomes the new exemplar
        this.setExemplar(item.play);
      },
    });
  }

  private offerRetry(): void {
    const retry = document.createElement("button");
    retry.textContent = "retry";
    retry.className = "retry";
    retry.addEventListener("click", () => {
      retry.remove();
      void this.submit();
    });
    this.el.status.appendChild(retry);
  }

  private describe(err: unknown): string {
    if (err instanceof ServiceError) return `service error ${err.status}: ${err.message}`;
    if (err instanceof Error) return `service unreachable: ${err.message}`;
    return "service unreachable";
  }
}

/** Build the static page skeleton and mount the app onto it. */
export function mount(root: HTMLElement, api: ApiClient = new ApiClient()): App {
  root.innerHTML = `
    <header>
      <input class="exemplar-id" placeholder="play id" />
      <button class="load">load</button>
      <button class="submit">search</button>
      <label><input type="checkbox" class="compare" checked /> compare methods</label>
      <span class="status"></span>
    </header>
    <main>
      <section class="court-host"></section>
      <section class="panels">
        <div class="tree-panel"></div>
        <div class="baseline-panel"></div>
      </section>
    </main>`;
  const pick = <T extends Element>(sel: string): T => {
    const el = root.querySelector<T>(sel);
    if (!el) throw new Error(`missing element ${sel}`);
    return el;
  };
  return new App(api, {
    exemplarInput: pick<HTMLInputElement>(".exemplar-id"),
    loadButton: pick<HTMLButtonElement>(".load"),
    submitButton: pick<HTMLButtonElement>(".submit"),
    compareToggle: pick<HTMLInputElement>(".compare"),
    courtHost: pick<HTMLElement>(".court-host"),
    treePanel: pick<HTMLElement>(".tree-panel"),
    baselinePanel: pick<HTMLElement>(".baseline-panel"),
    status: pick<HTMLElement>(".status"),
  });
}
