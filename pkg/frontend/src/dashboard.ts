/**
 * Progress dashboard: poll the service and display its numbers verbatim.
 * Consensus totals come straight from /api/progress; the record list from
 * /api/consensus is only counted, never re-aggregated by category.
 */

import { fetchConsensus, fetchProgress, type ConsensusRecord, type Progress } from "./api.js";

export interface DashboardView {
  refresh(): Promise<void>;
  start(pollMs: number): void;
  stop(): void;
  idle(): Promise<void>;
  destroy(): void;
}

export function createDashboardView(root: HTMLElement): DashboardView {
  root.innerHTML = `
    <section class="status">
      <h2>Queue</h2>
      <div class="status-body"></div>
    </section>
    <section class="histogram">
      <h2>Consensus by category</h2>
      <div class="histogram-body"></div>
    </section>
    <section class="annotators">
      <h2>Annotators</h2>
      <div class="annotators-body"></div>
    </section>
    <section class="records">
      <h2>Export</h2>
      <div class="records-body"></div>
    </section>
  `;

  const body = {
    status: root.querySelector(".status-body") as HTMLElement,
    histogram: root.querySelector(".histogram-body") as HTMLElement,
    annotators: root.querySelector(".annotators-body") as HTMLElement,
    records: root.querySelector(".records-body") as HTMLElement,
  };

  function fail(section: HTMLElement, what: string): void {
    section.innerHTML = "";
    const p = document.createElement("p");
    p.className = "section-error";
    p.textContent = `Could not load ${what}; showing nothing rather than stale numbers.`;
    section.appendChild(p);
  }

  function renderProgress(progress: Progress): void {
    const items = progress.items;
    body.status.innerHTML = `
      <p class="queue-counts">
        <span class="count-open">${items.open} open</span> /
        <span class="count-consensus">${items.consensus} consensus</span> /
        <span class="count-exhausted">${items.exhausted} exhausted</span> /
        <span class="count-total">${items.total} total</span>
      </p>
      <p class="event-count">${progress.events} label events recorded</p>
    `;

    const totals = Object.entries(progress.consensus_by_category);
    const peak = Math.max(1, ...totals.map(([, n]) => n));
    body.histogram.innerHTML = "";
    for (const [category, count] of totals) {
      const row = document.createElement("div");
      row.className = "bar-row";
      row.dataset.category = category;
      const label = document.createElement("span");
      label.className = "bar-label";
      label.textContent = category.replace(/_/g, " ");
      const bar = document.createElement("span");
      bar.className = "bar";
      bar.style.width = `${(count / peak) * 100}%`;
      const value = document.createElement("span");
      value.className = "bar-value";
      value.textContent = String(count);
      row.append(label, bar, value);
      body.histogram.appendChild(row);
    }

    body.annotators.innerHTML = "";
    const names = Object.entries(progress.annotators);
    if (names.length === 0) {
      body.annotators.textContent = "No labels submitted yet.";
    } else {
      const list = document.createElement("ul");
      list.className = "annotator-list";
      for (const [name, count] of names) {
        const entry = document.createElement("li");
        entry.dataset.annotator = name;
        entry.textContent = `${name}: ${count} label${count === 1 ? "" : "s"}`;
        list.appendChild(entry);
      }
      body.annotators.appendChild(list);
    }
  }

  function renderRecords(records: ConsensusRecord[]): void {
    body.records.innerHTML = "";
    const p = document.createElement("p");
    p.className = "record-count";
    p.textContent = `${records.length} consensus row${records.length === 1 ? "" : "s"} ready to export.`;
    body.records.appendChild(p);
  }

  let lastRefresh: Promise<void> = Promise.resolve();
  let timer: ReturnType<typeof setInterval> | null = null;

  function refresh(): Promise<void> {
    lastRefresh = Promise.allSettled([fetchProgress(), fetchConsensus()]).then(
      ([progress, records]) => {
        if (progress.status === "fulfilled") {
          renderProgress(progress.value);
        } else {
          fail(body.status, "queue progress");
          fail(body.histogram, "consensus totals");
          fail(body.annotators, "annotator counts");
        }
        if (records.status === "fulfilled") {
          renderRecords(records.value);
        } else {
          fail(body.records, "the consensus record list");
        }
      },
    );
    return lastRefresh;
  }

  return {
    refresh,
    start(pollMs: number): void {
      if (timer !== null) return;
      void refresh();
      timer = setInterval(() => void refresh(), pollMs);
    },
    stop(): void {
      if (timer !== null) clearInterval(timer);
      timer = null;
    },
    idle: () => lastRefresh,
    destroy(): void {
      if (timer !== null) clearInterval(timer);
      timer = null;
      root.innerHTML = "";
    },
  };
}
