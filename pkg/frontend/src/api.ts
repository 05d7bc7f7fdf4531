/** Typed client for the review service HTTP API. */

export interface Category {
  id: number;
  name: string;
  definition: string;
}

export interface Review {
  reviewer: string;
  decision: string;
  final: number[];
  role: string;
  ts: string;
}

export interface ReviewItem {
  item_id: string;
  grant_id: string;
  title: string;
  abstract: string;
  proposed: number[];
  rationale: string;
  status: string;
  final: number[] | null;
  reviews: Review[];
}

export interface QueueStats {
  pending: number;
  verified: number;
  disputed: number;
  rejected: number;
}

export interface Proposal {
  grant_id: string;
  categories: number[];
  rationale: string;
}

export type Decision = "accept" | "modify" | "reject";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) return;
  let code = `HTTP${response.status}`;
  let detail = response.statusText;
  try {
    const body = (await response.json()) as { error?: string; detail?: unknown };
    if (body.error) code = body.error;
    if (body.detail) detail = JSON.stringify(body.detail);
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, code, detail);
}

/** The slice of the API a review session needs; lets tests stub the client. */
export interface ReviewServiceClient {
  taxonomy(): Promise<Category[]>;
  nextItem(reviewer: string): Promise<ReviewItem | null>;
  submitReview(
    itemId: string,
    reviewer: string,
    decision: Decision,
    final: number[],
  ): Promise<ReviewItem>;
  stats(): Promise<QueueStats>;
}

export class ReviewApi implements ReviewServiceClient {
  constructor(private readonly baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async taxonomy(): Promise<Category[]> {
    const response = await fetch(this.url("/api/taxonomy"));
    await raiseForStatus(response);
    return (await response.json()) as Category[];
  }

  /** Next pending item for this reviewer, or null when the queue is empty. */
  async nextItem(reviewer: string): Promise<ReviewItem | null> {
    const query = new URLSearchParams({ reviewer });
    const response = await fetch(this.url(`/api/queue/next?${query}`));
    if (response.status === 204) return null;
    await raiseForStatus(response);
    return (await response.json()) as ReviewItem;
  }

  async submitReview(
    itemId: string,
    reviewer: string,
    decision: Decision,
    final: number[],
  ): Promise<ReviewItem> {
    const response = await fetch(this.url(`/api/reviews/${encodeURIComponent(itemId)}`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ reviewer, decision, final }),
    });
    await raiseForStatus(response);
    return (await response.json()) as ReviewItem;
  }

  async stats(): Promise<QueueStats> {
    const response = await fetch(this.url("/api/stats"));
    await raiseForStatus(response);
    return (await response.json()) as QueueStats;
  }

  async items(status?: string): Promise<ReviewItem[]> {
    const suffix = status ? `?${new URLSearchParams({ status })}` : "";
    const response = await fetch(this.url(`/api/items${suffix}`));
    await raiseForStatus(response);
    return (await response.json()) as ReviewItem[];
  }

  async enqueueProposals(proposals: Proposal[]): Promise<number> {
    const response = await fetch(this.url("/api/proposals"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ proposals }),
    });
    await raiseForStatus(response);
    return ((await response.json()) as { enqueued: number }).enqueued;
  }

  /** Verified items as JSONL text, one project record per line. */
  async exportVerified(): Promise<string> {
    const response = await fetch(this.url("/api/export/verified"));
    await raiseForStatus(response);
    return await response.text();
  }
}
