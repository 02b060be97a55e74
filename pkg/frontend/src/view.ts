/**
 * DOM rendering. Pure view layer: every function takes server payloads and
 * rebuilds its region; nothing here decides statuses or transitions.
 */

import type { AlignmentDetail, AlignmentSummary, CodePreview } from "./api.js";

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

export function renderQueue(
  container: HTMLElement,
  items: AlignmentSummary[],
  selectedId: string | null,
  onSelect: (id: string) => void,
): void {
  container.replaceChildren();
  if (items.length === 0) {
    container.appendChild(el("p", "queue-empty", "No items for this filter."));
    return;
  }
  const list = el("ul", "queue-list");
  list.setAttribute("role", "list");
  for (const item of items) {
    const row = el("li", "queue-row");
    const button = el("button", "queue-item");
    button.type = "button";
    button.dataset.itemId = item.id;
    if (item.id === selectedId) button.classList.add("selected");
    button.addEventListener("click", () => onSelect(item.id));

    button.appendChild(el("span", "queue-property", item.property));
    button.appendChild(el("span", `status-badge status-${item.status}`, item.status));
    button.appendChild(el("span", "queue-kind", item.mapping_kind));
    button.appendChild(
      el("span", "queue-signals", item.contributing_signals.join(", ")),
    );
    row.appendChild(button);
    list.appendChild(row);
  }
  container.appendChild(list);
}

function similarityBars(candidates: AlignmentSummary["candidates"]): HTMLElement {
  const wrap = el("div", "candidates");
  wrap.appendChild(el("h3", undefined, "Candidate signals"));
  for (const candidate of candidates) {
    const row = el("div", "candidate-row");
    row.appendChild(el("span", "candidate-name", candidate.signal));
    const track = el("div", "similarity-track");
    const bar = el("div", "similarity-bar");
    bar.style.width = `${Math.round(candidate.similarity * 100)}%`;
    track.appendChild(bar);
    row.appendChild(track);
    row.appendChild(
      el("span", "candidate-score", candidate.similarity.toFixed(3)),
    );
    wrap.appendChild(row);
  }
  return wrap;
}

function historyTimeline(detail: AlignmentDetail): HTMLElement {
  const wrap = el("div", "history");
  wrap.appendChild(el("h3", undefined, "History"));
  const list = el("ol", "history-list");
  for (const entry of detail.history) {
    const item = el("li", "history-entry");
    let text = `${entry.action} by ${entry.actor}`;
    if (entry.constraint) text += ` — ${entry.constraint}`;
    item.textContent = text;
    list.appendChild(item);
  }
  wrap.appendChild(list);
  return wrap;
}

export function renderDetail(
  container: HTMLElement,
  detail: AlignmentDetail | null,
  code: CodePreview | null,
): void {
  container.replaceChildren();
  if (detail === null) {
    container.appendChild(
      el("p", "detail-empty", "Select an item from the queue."),
    );
    return;
  }
  const header = el("div", "detail-header");
  header.appendChild(el("h2", "detail-property", detail.property));
  header.appendChild(
    el("span", `status-badge status-${detail.status}`, detail.status),
  );
  container.appendChild(header);

  container.appendChild(similarityBars(detail.candidates));

  const record = el("div", "alignment-record");
  record.appendChild(el("h3", undefined, "Alignment record"));
  const pre = el("pre", "record-json");
  pre.textContent = JSON.stringify(detail.alignment, null, 2);
  record.appendChild(pre);
  container.appendChild(record);

  if (code && Object.keys(code.code).length > 0) {
    const codeWrap = el("div", "codec-preview");
    codeWrap.appendChild(el("h3", undefined, "Generated signal code"));
    for (const [signal, source] of Object.entries(code.code)) {
      codeWrap.appendChild(el("h4", "codec-signal", signal));
      const block = el("pre", "codec-source");
      block.textContent = source;
      codeWrap.appendChild(block);
    }
    container.appendChild(codeWrap);
  }

  container.appendChild(historyTimeline(detail));
}

export function renderError(container: HTMLElement, message: string | null): void {
  container.replaceChildren();
  if (message) {
    const box = el("div", "error-box");
    box.setAttribute("role", "alert");
    box.textContent = message;
    container.appendChild(box);
  }
}
