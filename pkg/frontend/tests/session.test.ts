import { beforeEach, describe, expect, it } from "vitest";

import {
  ApiError,
  Category,
  Decision,
  QueueStats,
  ReviewItem,
  ReviewServiceClient,
} from "../src/api.js";
import { ReviewSession } from "../src/session.js";

const TAXONOMY: Category[] = Array.from({ length: 12 }, (_, i) => ({
  id: i + 1,
  name: `Category ${i + 1}`,
  definition: `definition ${i + 1}`,
}));

function item(id: string, proposed: number[]): ReviewItem {
  return {
    item_id: id,
    grant_id: `G-${id}`,
    title: `title ${id}`,
    abstract: `abstract ${id}`,
    proposed,
    rationale: "because",
    status: "pending",
    final: null,
    reviews: [],
  };
}

class StubClient implements ReviewServiceClient {
  queue: ReviewItem[] = [];
  submissions: Array<{ itemId: string; reviewer: string; decision: Decision; final: number[] }> =
    [];
  failNextSubmitWith: ApiError | null = null;

  async taxonomy(): Promise<Category[]> {
    return TAXONOMY;
  }

  async nextItem(_reviewer: string): Promise<ReviewItem | null> {
    return this.queue.length > 0 ? this.queue[0]! : null;
  }

  async submitReview(
    itemId: string,
    reviewer: string,
    decision: Decision,
    final: number[],
  ): Promise<ReviewItem> {
    if (this.failNextSubmitWith) {
      const err = this.failNextSubmitWith;
      this.failNextSubmitWith = null;
      throw err;
    }
    this.submissions.push({ itemId, reviewer, decision, final });
    const current = this.queue.shift();
    if (!current) throw new Error("queue empty");
    return { ...current, status: "pending" };
  }

  async stats(): Promise<QueueStats> {
    return { pending: this.queue.length, verified: 0, disputed: 0, rejected: 0 };
  }
}

describe("ReviewSession", () => {
  let client: StubClient;
  let session: ReviewSession;

  beforeEach(() => {
    client = new StubClient();
    session = new ReviewSession(client, "alice");
  });

  it("preselects the proposed categories on load", async () => {
    client.queue = [item("i1", [1, 7])];
    await session.start();
    expect(session.view().selected).toEqual([1, 7]);
    expect(session.isSelected(7)).toBe(true);
    expect(session.isSelected(2)).toBe(false);
  });

  it("shows the empty-queue state when there is nothing to review", async () => {
    await session.start();
    expect(session.view().queueEmpty).toBe(true);
    expect(session.view().item).toBeNull();
  });

  it("accept with unchanged toggles round-trips the proposal exactly", async () => {
    client.queue = [item("i1", [1, 7])];
    await session.start();
    expect(session.impliedDecision()).toBe("accept");
    expect(await session.submit()).toBe(true);
    expect(client.submissions).toEqual([
      { itemId: "i1", reviewer: "alice", decision: "accept", final: [1, 7] },
    ]);
  });

  it("modify sends the edited set", async () => {
    client.queue = [item("i1", [1, 7])];
    await session.start();
    session.toggle(7); // uncheck
    session.toggle(4); // check
    expect(session.impliedDecision()).toBe("modify");
    await session.submit();
    expect(client.submissions[0]!.decision).toBe("modify");
    expect(client.submissions[0]!.final).toEqual([1, 4]);
  });

  it("reject submits an empty final set", async () => {
    client.queue = [item("i1", [1, 7])];
    await session.start();
    await session.submit("reject");
    expect(client.submissions[0]!.decision).toBe("reject");
    expect(client.submissions[0]!.final).toEqual([]);
  });

  it("never toggles ids outside the taxonomy", async () => {
    client.queue = [item("i1", [1])];
    await session.start();
    expect(session.toggle(13)).toBe(false);
    expect(session.toggle(0)).toBe(false);
    expect(session.view().selected).toEqual([1]);
  });

  it("drops proposed ids the taxonomy does not define", async () => {
    client.queue = [item("i1", [1, 99])];
    await session.start();
    expect(session.view().selected).toEqual([1]);
  });

  it("refuses accept with an empty selection", async () => {
    client.queue = [item("i1", [2])];
    await session.start();
    session.toggle(2);
    expect(await session.submit()).toBe(false);
    expect(client.submissions).toEqual([]);
    expect(session.view().message).toMatch(/at least one category/);
  });

  it("advances to the next item after a successful submit", async () => {
    client.queue = [item("i1", [1]), item("i2", [2])];
    await session.start();
    await session.submit();
    expect(session.view().item?.item_id).toBe("i2");
    expect(session.view().selected).toEqual([2]);
  });

  it("surfaces service errors and moves on after a duplicate-review race", async () => {
    client.queue = [item("i1", [1]), item("i2", [2])];
    await session.start();
    client.failNextSubmitWith = new ApiError(409, "DuplicateReviewerError", "already reviewed");
    expect(await session.submit()).toBe(false);
    expect(session.view().message).toContain("DuplicateReviewerError");
  });
});
