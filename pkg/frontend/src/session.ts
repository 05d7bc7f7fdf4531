/** Review session state: current item, category toggles, and submission flow.
 *
 * All category edits go through the taxonomy loaded from the service, so ids
 * outside it can never be selected or submitted. Submitting accept/modify
 * requires a non-empty selection; reject always submits an empty final set.
 */

import {
  ApiError,
  Category,
  Decision,
  QueueStats,
  ReviewItem,
  ReviewServiceClient,
} from "./api.js";

export interface SessionView {
  item: ReviewItem | null;
  selected: number[];
  queueEmpty: boolean;
  stats: QueueStats | null;
  message: string | null;
  busy: boolean;
}

export class ReviewSession {
  private taxonomyIds = new Set<number>();
  private categories: Category[] = [];
  private item: ReviewItem | null = null;
  private selected = new Set<number>();
  private queueEmpty = false;
  private stats: QueueStats | null = null;
  private message: string | null = null;
  private busy = false;

  constructor(
    private readonly api: ReviewServiceClient,
    readonly reviewer: string,
  ) {}

  async start(): Promise<void> {
    this.categories = await this.api.taxonomy();
    this.taxonomyIds = new Set(this.categories.map((c) => c.id));
    await this.loadNext();
  }

  get taxonomy(): Category[] {
    return this.categories;
  }

  view(): SessionView {
    return {
      item: this.item,
      selected: [...this.selected].sort((a, b) => a - b),
      queueEmpty: this.queueEmpty,
      stats: this.stats,
      message: this.message,
      busy: this.busy,
    };
  }

  async loadNext(): Promise<void> {
    this.busy = true;
    try {
      this.item = await this.api.nextItem(this.reviewer);
      this.queueEmpty = this.item === null;
      this.selected = new Set(
        (this.item?.proposed ?? []).filter((id) => this.taxonomyIds.has(id)),
      );
      this.stats = await this.api.stats();
      this.message = null;
    } catch (err) {
      this.message = describe(err);
    } finally {
      this.busy = false;
    }
  }

  /** Toggle a category; ignores ids the taxonomy does not define. */
  toggle(id: number): boolean {
    if (!this.taxonomyIds.has(id) || this.item === null) return false;
    if (this.selected.has(id)) {
      this.selected.delete(id);
    } else {
      this.selected.add(id);
    }
    return true;
  }

  isSelected(id: number): boolean {
    return this.selected.has(id);
  }

  /** accept when the selection still equals the proposal, modify otherwise. */
  impliedDecision(): Decision {
    if (this.item === null) return "accept";
    const proposed = [...this.item.proposed].sort((a, b) => a - b).join(",");
    const selected = [...this.selected].sort((a, b) => a - b).join(",");
    return proposed === selected ? "accept" : "modify";
  }

  async submit(decision?: Decision): Promise<boolean> {
    if (this.item === null || this.busy) return false;
    const chosen = decision ?? this.impliedDecision();
    const final = chosen === "reject" ? [] : [...this.selected].sort((a, b) => a - b);
    if (chosen !== "reject" && final.length === 0) {
      this.message = "select at least one category, or reject the proposal";
      return false;
    }
    this.busy = true;
    try {
      await this.api.submitReview(this.item.item_id, this.reviewer, chosen, final);
    } catch (err) {
      const note = describe(err);
      this.busy = false;
      // another reviewer may have raced us; move on rather than wedge the queue
      if (err instanceof ApiError && err.code === "DuplicateReviewerError") {
        await this.loadNext();
      }
      this.message = note;
      return false;
    }
    this.busy = false;
    await this.loadNext();
    return true;
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}
