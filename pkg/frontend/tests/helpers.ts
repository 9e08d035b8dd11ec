/**
 * In-memory stand-in for the survey service, installed as a fetch stub.
 * Returns plain objects shaped like Response because jsdom has no
 * Response constructor.
 */

import { vi } from "vitest";
import type { ConsensusRecord, Progress, QueueItem } from "../src/api.js";

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

interface StubResponse {
  ok: boolean;
  status: number;
  statusText: string;
  json(): Promise<unknown>;
}

function ok(data: unknown): StubResponse {
  return { ok: true, status: 200, statusText: "OK", json: async () => data };
}

function err(status: number, detail: string): StubResponse {
  return { ok: false, status, statusText: "Error", json: async () => ({ detail }) };
}

export function makeItem(n: number): QueueItem {
  const wid = `n${String(10000000 + n).padStart(8, "0")}`;
  return {
    item_id: `${wid}/train/img_${n}.JPEG`,
    wordnet_id: wid,
    split: "train",
    file_name: `img_${n}.JPEG`,
    class_label: `class ${n}`,
    mean_nsfw_train: 0.5,
    status: "open",
  };
}

export function emptyProgress(): Progress {
  return {
    items: { total: 0, open: 0, consensus: 0, exhausted: 0 },
    annotators: {},
    consensus_by_category: {
      beach_voyeur: 0,
      exposed_private_parts: 0,
      upskirt: 0,
      verifiably_pornographic: 0,
    },
    events: 0,
  };
}

export class FakeApi {
  /** Consumed one entry per /api/queue/next call; empty means null item. */
  queue: QueueItem[] = [];
  progress: Progress = emptyProgress();
  consensus: ConsensusRecord[] = [];
  /** Consumed one entry per POST /api/labels; empty means accept. */
  labelResponses: Array<{ status: number; detail: string }> = [];
  progressError = false;
  consensusError = false;
  /** One-shot: the next fetch of any kind dies before being recorded. */
  failNextFetch = false;
  calls: RecordedCall[] = [];

  install(): void {
    vi.stubGlobal("fetch", (url: string, init?: RequestInit) => this.handle(url, init));
  }

  labelCalls(): RecordedCall[] {
    return this.calls.filter((c) => c.url === "/api/labels");
  }

  private async handle(url: string, init?: RequestInit): Promise<StubResponse> {
    if (this.failNextFetch) {
      this.failNextFetch = false;
      throw new TypeError("fetch failed");
    }
    const method = init?.method ?? "GET";
    const body = typeof init?.body === "string" ? JSON.parse(init.body) : null;
    this.calls.push({ url, method, body });

    if (url.startsWith("/api/queue/next")) {
      return ok({ item: this.queue.shift() ?? null });
    }
    if (url === "/api/labels") {
      const scripted = this.labelResponses.shift();
      if (scripted !== undefined) return err(scripted.status, scripted.detail);
      const itemId = (body as { item_id: string }).item_id;
      return ok({ item_id: itemId, status: "open" });
    }
    if (url === "/api/progress") {
      return this.progressError ? err(500, "boom") : ok(this.progress);
    }
    if (url === "/api/consensus") {
      return this.consensusError ? err(500, "boom") : ok({ records: this.consensus });
    }
    throw new Error(`unexpected url in test: ${url}`);
  }
}
