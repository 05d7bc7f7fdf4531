/** DOM layer: renders the session and wires the keyboard-first review flow.
 *
 * Keys: 1-9 toggle categories 1-9, 0 toggles 10, minus toggles 11, equals
 * toggles 12; Enter submits (accept when unchanged, modify otherwise); R
 * rejects; N reloads the next item.
 */

import { Category } from "./api.js";
import { ReviewSession } from "./session.js";

const KEY_TO_CATEGORY: Record<string, number> = {
  "1": 1, "2": 2, "3": 3, "4": 4, "5": 5, "6": 6, "7": 7, "8": 8, "9": 9,
  "0": 10, "-": 11, "=": 12,
};

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

export class ReviewApp {
  constructor(
    private readonly root: HTMLElement,
    private readonly session: ReviewSession,
  ) {}

  async start(): Promise<void> {
    await this.session.start();
    document.addEventListener("keydown", (event) => this.onKey(event));
    this.render();
  }

  private async act(action: () => Promise<unknown>): Promise<void> {
    await action();
    this.render();
  }

  private onKey(event: KeyboardEvent): void {
    if (event.target instanceof HTMLInputElement && event.target.type === "text") return;
    const category = KEY_TO_CATEGORY[event.key];
    if (category !== undefined) {
      this.session.toggle(category);
      this.render();
    } else if (event.key === "Enter") {
      void this.act(() => this.session.submit());
    } else if (event.key === "r" || event.key === "R") {
      void this.act(() => this.session.submit("reject"));
    } else if (event.key === "n" || event.key === "N") {
      void this.act(() => this.session.loadNext());
    }
  }

  render(): void {
    const view = this.session.view();
    this.root.replaceChildren();

    const header = el("header", "topbar");
    header.append(el("span", "reviewer", `reviewer: ${this.session.reviewer}`));
    if (view.stats) {
      const counters = el("span", "counters");
      counters.append(
        badge("pending", view.stats.pending),
        badge("verified", view.stats.verified),
        badge("disputed", view.stats.disputed),
      );
      header.append(counters);
    }
    this.root.append(header);

    if (view.message) {
      const banner = el("div", "banner", view.message);
      const retry = el("button", "retry", "retry");
      retry.addEventListener("click", () => void this.act(() => this.session.loadNext()));
      banner.append(retry);
      this.root.append(banner);
    }

    if (view.queueEmpty) {
      this.root.append(el("div", "empty", "queue empty: no items left for you to review"));
      return;
    }
    const item = view.item;
    if (!item) return;

    const card = el("main", "card");
    card.append(el("h1", "title", item.title || item.grant_id));
    card.append(el("div", "grant-id", item.grant_id));
    card.append(el("p", "abstract", item.abstract));
    const proposal = el("section", "proposal");
    proposal.append(el("h2", undefined, "model proposal"));
    proposal.append(el("p", "rationale", item.rationale));
    proposal.append(
      el("p", "proposed", `proposed categories: ${item.proposed.join(", ") || "none"}`),
    );
    card.append(proposal);
    card.append(this.checklist(view.selected));

    const actions = el("div", "actions");
    const submit = el(
      "button",
      "submit",
      this.session.impliedDecision() === "accept" ? "accept (enter)" : "modify (enter)",
    );
    submit.addEventListener("click", () => void this.act(() => this.session.submit()));
    const reject = el("button", "reject", "reject (r)");
    reject.addEventListener("click", () => void this.act(() => this.session.submit("reject")));
    actions.append(submit, reject);
    card.append(actions);
    this.root.append(card);
  }

  private checklist(selected: number[]): HTMLElement {
    const list = el("ul", "categories");
    for (const category of this.session.taxonomy) {
      const entry = el("li");
      const label = el("label");
      label.title = category.definition; // definition on hover
      const box = el("input") as HTMLInputElement;
      box.type = "checkbox";
      box.checked = selected.includes(category.id);
      box.dataset.categoryId = String(category.id);
      box.addEventListener("change", () => {
        this.session.toggle(category.id);
        this.render();
      });
      label.append(box, el("span", "name", ` ${category.id}. ${category.name}`));
      entry.append(label);
      list.append(entry);
    }
    return list;
  }
}

function badge(name: string, count: number): HTMLElement {
  const span = document.createElement("span");
  span.className = `badge badge-${name}`;
  span.textContent = `${name} ${count}`;
  return span;
}
