/**
 * Application wiring: fetch state from the review service, render, and send
 * decisions/regenerations back. No optimistic updates — after every
 * mutation the queue and the detail pane are re-fetched from the server,
 * so what is on screen is always what the server confirmed. Server errors
 * are rendered inline, never swallowed.
 */

import { ApiError, ReviewClient } from "./api.js";
import type { AlignmentDetail, AlignmentSummary, CodePreview } from "./api.js";
import { Poller } from "./poll.js";
import { renderDetail, renderError, renderQueue } from "./view.js";

export interface AppOptions {
  client?: ReviewClient;
  actor?: string;
  pollIntervalMs?: number;
}

export class ReviewApp {
  readonly client: ReviewClient;
  readonly poller: Poller;
  private readonly actor: string;

  private filter: string = "flagged";
  private selectedId: string | null = null;
  private items: AlignmentSummary[] = [];
  private detail: AlignmentDetail | null = null;
  private code: CodePreview | null = null;
  private errorMessage: string | null = null;

  constructor(private readonly root: HTMLElement, options: AppOptions = {}) {
    this.client = options.client ?? new ReviewClient();
    this.actor = options.actor ?? "reviewer";
    this.poller = new Poller(() => this.refreshQueue(), options.pollIntervalMs ?? 5000);
    this.buildShell();
  }

  private buildShell(): void {
    this.root.innerHTML = `
      <header class="app-header">
        <h1>Alignment review</h1>
        <label class="filter-label">Show
          <select id="status-filter" aria-label="status filter">
            <option value="flagged" selected>flagged</option>
            <option value="approved">approved</option>
            <option value="rejected">rejected</option>
            <option value="auto_accepted">auto accepted</option>
            <option value="">all</option>
          </select>
        </label>
      </header>
      <div id="error-region" class="error-region" aria-live="polite"></div>
      <main class="layout">
        <section id="queue" class="queue-pane" aria-label="review queue"></section>
        <section id="detail" class="detail-pane" aria-label="item detail"></section>
        <section class="action-pane" aria-label="actions">
          <button id="approve" type="button" disabled>Approve</button>
          <button id="reject" type="button" disabled>Reject</button>
          <form id="regenerate-form">
            <label for="constraint">Regeneration constraint</label>
            <textarea id="constraint" rows="3"
              placeholder="e.g. prefer-signal WiperState"></textarea>
            <button id="regenerate" type="submit" disabled>Regenerate</button>
          </form>
        </section>
      </main>
    `;
    this.select("#status-filter").addEventListener("change", (event) => {
      this.filter = (event.target as HTMLSelectElement).value;
      void this.refreshQueue();
    });
    this.select("#approve").addEventListener("click", () => {
      void this.decide("approve");
    });
    this.select("#reject").addEventListener("click", () => {
      void this.decide("reject");
    });
    this.select("#regenerate-form").addEventListener("submit", (event) => {
      event.preventDefault();
      void this.regenerate();
    });
  }

  private select<T extends HTMLElement = HTMLElement>(selector: string): T {
    const node = this.root.querySelector<T>(selector);
    if (!node) throw new Error(`missing element ${selector}`);
    return node;
  }

  async start(): Promise<void> {
    await this.refreshQueue();
    this.poller.start();
  }

  stop(): void {
    this.poller.stop();
  }

  async refreshQueue(): Promise<void> {
    try {
      const payload = await this.client.listAlignments(this.filter || undefined);
      this.items = payload.items;
      this.errorMessage = null;
    } catch (error) {
      this.errorMessage = describeError(error);
    }
    this.render();
  }

  async open(id: string): Promise<void> {
    this.selectedId = id;
    try {
      this.detail = await this.client.getAlignment(id);
      this.code = await this.client.getCode(id).catch(() => null);
      this.errorMessage = null;
    } catch (error) {
      this.detail = null;
      this.code = null;
      this.errorMessage = describeError(error);
    }
    this.render();
  }

  async decide(action: "approve" | "reject"): Promise<void> {
    if (!this.selectedId) return;
    let failure: string | null = null;
    try {
      await this.client.postDecision(this.selectedId, action, this.actor);
    } catch (error) {
      failure = describeError(error);
    }
    // State refreshes from the server after every mutation; a rejected
    // mutation stays visible through the refresh.
    await this.refreshQueue();
    if (this.selectedId) await this.open(this.selectedId);
    if (failure) {
      this.errorMessage = failure;
      this.render();
    }
  }

  async regenerate(): Promise<void> {
    if (!this.selectedId) return;
    const field = this.select<HTMLTextAreaElement>("#constraint");
    let failure: string | null = null;
    try {
      await this.client.postRegeneration(
        this.selectedId,
        field.value,
        this.actor,
      );
      field.value = "";
    } catch (error) {
      failure = describeError(error);
    }
    await this.refreshQueue();
    if (this.selectedId) await this.open(this.selectedId);
    if (failure) {
      this.errorMessage = failure;
      this.render();
    }
  }

  private render(): void {
    renderError(this.select("#error-region"), this.errorMessage);
    renderQueue(this.select("#queue"), this.items, this.selectedId, (id) => {
      void this.open(id);
    });
    renderDetail(this.select("#detail"), this.detail, this.code);
    const hasSelection = this.detail !== null;
    const flagged = this.detail?.status === "flagged";
    this.select<HTMLButtonElement>("#approve").disabled = !(hasSelection && flagged);
    this.select<HTMLButtonElement>("#reject").disabled = !(hasSelection && flagged);
    this.select<HTMLButtonElement>("#regenerate").disabled = !hasSelection;
  }
}

function describeError(error: unknown): string {
  if (error instanceof ApiError) {
    return `Server rejected the request (${error.status}): ${error.message}`;
  }
  if (error instanceof Error) {
    return `Request failed: ${error.message}`;
  }
  return "Request failed.";
}
