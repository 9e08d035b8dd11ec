/**
 * Typed client for the hand-survey service. Every number shown in the UI
 * comes from these endpoints; nothing is aggregated client-side.
 */

export const CATEGORIES = [
  "beach_voyeur",
  "exposed_private_parts",
  "upskirt",
  "verifiably_pornographic",
  "none_of_these",
] as const;

export type Category = (typeof CATEGORIES)[number];

export interface QueueItem {
  item_id: string;
  wordnet_id: string;
  split: string;
  file_name: string;
  class_label: string;
  mean_nsfw_train: number;
  status: string;
}

export interface Progress {
  items: { total: number; open: number; consensus: number; exhausted: number };
  annotators: Record<string, number>;
  consensus_by_category: Record<string, number>;
  events: number;
}

export interface ConsensusRecord {
  item_id: string;
  category: string;
  n_annotators: number;
}

/** Non-2xx response; status 409 means the item closed under us. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, init);
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = (await resp.json()) as { detail?: unknown };
      if (typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; the status text will have to do
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export async function fetchNextItem(annotator: string): Promise<QueueItem | null> {
  const body = await request<{ item: QueueItem | null }>(
    `/api/queue/next?annotator=${encodeURIComponent(annotator)}`,
  );
  return body.item;
}

export function submitLabel(
  annotator: string,
  itemId: string,
  category: Category,
): Promise<{ item_id: string; status: string }> {
  return request("/api/labels", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ annotator, item_id: itemId, category }),
  });
}

export function fetchProgress(): Promise<Progress> {
  return request("/api/progress");
}

export async function fetchConsensus(): Promise<ConsensusRecord[]> {
  const body = await request<{ records: ConsensusRecord[] }>("/api/consensus");
  return body.records;
}

/** Item ids contain slashes that the image route expects verbatim. */
export function imageUrl(itemId: string): string {
  const path = itemId.split("/").map(encodeURIComponent).join("/");
  return `/api/items/${path}/image`;
}
