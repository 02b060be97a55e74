import { beforeEach, describe, expect, it } from "vitest";

import { ReviewApp } from "../src/app.js";
import { StubReviewServer } from "./stub-server.js";

function mount(): HTMLElement {
  document.body.innerHTML = '<div id="app"></div>';
  return document.getElementById("app")!;
}

function queueRows(root: HTMLElement): HTMLButtonElement[] {
  return [...root.querySelectorAll<HTMLButtonElement>(".queue-item")];
}

async function bootApp(server: StubReviewServer): Promise<{ app: ReviewApp; root: HTMLElement }> {
  server.install();
  const root = mount();
  const app = new ReviewApp(root, { actor: "expert", pollIntervalMs: 60_000 });
  await app.refreshQueue();
  return { app, root };
}

describe("review dashboard", () => {
  let server: StubReviewServer;

  beforeEach(() => {
    server = new StubReviewServer();
  });

  it("renders the server's queue items verbatim", async () => {
    const { root } = await bootApp(server);
    const rows = queueRows(root);
    const expected = server.summaries("flagged");
    expect(rows).toHaveLength(expected.length);
    for (const [index, summary] of expected.entries()) {
      const row = rows[index];
      expect(row.querySelector(".queue-property")!.textContent).toBe(
        summary.property,
      );
      expect(row.querySelector(".status-badge")!.textContent).toBe(summary.status);
      expect(row.querySelector(".queue-signals")!.textContent).toBe(
        summary.contributing_signals.join(", "),
      );
    }
  });

  it("shows candidates with similarity values in the detail pane", async () => {
    const { app, root } = await bootApp(server);
    await app.open("speed");
    const scores = [...root.querySelectorAll(".candidate-score")].map(
      (node) => node.textContent,
    );
    expect(scores).toEqual(["0.440", "0.420"]);
    // The alignment record is rendered as its JSON template.
    expect(root.querySelector(".record-json")!.textContent).toContain(
      '"mapping_kind": "transformed"',
    );
    // Codec preview comes from the artifacts endpoint.
    expect(root.querySelector(".codec-source")!.textContent).toContain(
      "read_VehicleSpeed",
    );
  });

  it("round-trips a decision and refreshes the queue from the server", async () => {
    const { app, root } = await bootApp(server);
    await app.open("wiperActive");
    await app.decide("approve");

    // The server now holds the truth; the flagged queue lost the row.
    const names = queueRows(root).map(
      (row) => row.querySelector(".queue-property")!.textContent,
    );
    expect(names).toEqual(["speed", "tripTime"]);
    // Detail pane reflects the server-confirmed status.
    expect(root.querySelector(".detail-header .status-badge")!.textContent).toBe(
      "approved",
    );
    // The mutation was a POST followed by GET refreshes (no optimistic UI).
    const postIndex = server.requests.findIndex((r) =>
      r.startsWith("POST /api/alignments/wiperActive/decision"),
    );
    expect(postIndex).toBeGreaterThan(-1);
    expect(
      server.requests
        .slice(postIndex + 1)
        .some((r) => r.startsWith("GET /api/alignments?")),
    ).toBe(true);
  });

  it("shows a submitted regeneration constraint in the history timeline", async () => {
    const { app, root } = await bootApp(server);
    await app.open("tripTime");
    const field = root.querySelector<HTMLTextAreaElement>("#constraint")!;
    field.value = "prefer-signal TimeOfTrip";
    await app.regenerate();

    const entries = [...root.querySelectorAll(".history-entry")].map(
      (node) => node.textContent,
    );
    expect(
      entries.some((text) => text!.includes("prefer-signal TimeOfTrip")),
    ).toBe(true);
  });

  it("surfaces server errors inline instead of swallowing them", async () => {
    const { app, root } = await bootApp(server);
    await app.open("wiperActive");
    await app.decide("approve");
    // Second approval: the server answers 409; the message must be visible.
    await app.open("wiperActive");
    // Force the buttons' state aside and call the handler directly: the
    // server remains the authority on legality.
    await app.decide("approve");
    const error = root.querySelector(".error-box");
    expect(error).not.toBeNull();
    expect(error!.textContent).toContain("409");
    expect(error!.textContent).toContain("cannot move");
  });

  it("keeps the core loop reachable by keyboard (buttons and form controls)", async () => {
    const { app, root } = await bootApp(server);
    // Queue entries are real buttons: focusable and activatable by keyboard.
    const firstRow = queueRows(root)[0];
    expect(firstRow.tagName).toBe("BUTTON");
    firstRow.focus();
    expect(document.activeElement).toBe(firstRow);
    firstRow.click(); // keyboards synthesize click on Enter for buttons
    await new Promise((resolve) => setTimeout(resolve, 0));
    await app.open(firstRow.dataset.itemId!);
    const approve = root.querySelector<HTMLButtonElement>("#approve")!;
    expect(approve.disabled).toBe(false);
    approve.focus();
    expect(document.activeElement).toBe(approve);
    const constraint = root.querySelector<HTMLTextAreaElement>("#constraint")!;
    constraint.focus();
    expect(document.activeElement).toBe(constraint);
  });

  it("polls the queue without overlapping ticks", async () => {
    const { app } = await bootApp(server);
    const before = server.requests.filter((r) => r.startsWith("GET /api/alignments?")).length;
    await app.poller.tick();
    await app.poller.tick();
    const after = server.requests.filter((r) => r.startsWith("GET /api/alignments?")).length;
    expect(after).toBe(before + 2);
  });
});
