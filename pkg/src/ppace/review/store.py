"""Event-sourced review queue implementing the two-concordant-reviewer rule.

Model-proposed annotations enter as pending items. Regular reviewers accept,
modify, or reject; an item becomes verified once ``required_reviews``
reviewers submit identical final category sets, disputed on the first
discordant pair, and rejected when the required number of reviewers all
reject. A disputed item can only be settled by a configured resolver, whose
final set is authoritative.

Every mutation is validated first, then appended to the event log, then
applied to the in-memory state, so replaying the log always reproduces the
state exactly. Statuses only move forward: pending -> verified | disputed |
rejected, disputed -> verified.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from ..corpus import CorpusStore, Project
from ..errors import PpaceError
from ..store import AppendLog
from ..taxonomy import category_set_from

PENDING = "pending"
VERIFIED = "verified"
DISPUTED = "disputed"
REJECTED = "rejected"

ACCEPT = "accept"
MODIFY = "modify"
REJECT = "reject"
DECISIONS = (ACCEPT, MODIFY, REJECT)


class UnknownProjectError(PpaceError):
    pass


class UnknownItemError(PpaceError):
    pass


class DuplicateReviewerError(PpaceError):
    pass


class EmptyFinalOnAcceptError(PpaceError):
    pass


class ItemClosedError(PpaceError):
    pass


class NotResolverError(PpaceError):
    pass


class InvalidResolutionError(PpaceError):
    pass


@dataclass
class Review:
    reviewer: str
    decision: str
    final: tuple[int, ...]
    role: str
    ts: str


@dataclass
class ReviewItem:
    item_id: str
    grant_id: str
    proposed: tuple[int, ...]
    rationale: str
    order: int
    status: str = PENDING
    reviews: list[Review] = field(default_factory=list)
    final: tuple[int, ...] | None = None


def proposal_item_id(grant_id: str, categories: Sequence[int], rationale: str) -> str:
    key = f"{grant_id}|{','.join(str(c) for c in categories)}|{rationale}"
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class ReviewStore:
    def __init__(
        self,
        log_path: str | Path,
        corpus: CorpusStore,
        required_reviews: int = 2,
        resolvers: Iterable[str] = (),
    ):
        if required_reviews < 1:
            raise ValueError("required_reviews must be >= 1")
        self._log = AppendLog(log_path)
        self._corpus = corpus
        self.required_reviews = required_reviews
        self.resolvers = frozenset(resolvers)
        self._items: dict[str, ReviewItem] = {}
        self._lock = threading.Lock()
        for event in self._log.records():
            self._apply(event)

    # -- state --------------------------------------------------------------

    def _apply(self, event: dict) -> None:
        if event["event"] == "proposal":
            item_id = event["item_id"]
            if item_id not in self._items:
                self._items[item_id] = ReviewItem(
                    item_id=item_id,
                    grant_id=event["grant_id"],
                    proposed=tuple(event["categories"]),
                    rationale=event["rationale"],
                    order=len(self._items),
                )
        elif event["event"] == "review":
            item = self._items[event["item_id"]]
            review = Review(
                reviewer=event["reviewer"],
                decision=event["decision"],
                final=tuple(event["final"]),
                role=event["role"],
                ts=event["ts"],
            )
            item.reviews.append(review)
            if review.role == "resolver":
                item.status = VERIFIED
                item.final = review.final
                return
            finals = [r.final for r in item.reviews if r.role == "reviewer"]
            if any(f != finals[0] for f in finals[1:]):
                item.status = DISPUTED
            elif len(finals) >= self.required_reviews:
                if finals[0]:
                    item.status = VERIFIED
                    item.final = finals[0]
                else:
                    item.status = REJECTED

    # -- operations ---------------------------------------------------------

    def enqueue_proposal(self, grant_id: str, categories: Sequence[int], rationale: str) -> bool:
        """Queue one proposal; returns False when the same proposal already exists."""
        with self._lock:
            if self._corpus.get(grant_id) is None:
                raise UnknownProjectError(f"no project {grant_id!r} in the corpus")
            cats = category_set_from(categories)
            item_id = proposal_item_id(grant_id, cats, rationale)
            if item_id in self._items:
                return False
            event = {
                "event": "proposal",
                "item_id": item_id,
                "grant_id": grant_id,
                "categories": list(cats),
                "rationale": rationale,
                "ts": _now(),
            }
            self._log.append(event)
            self._apply(event)
            return True

    def enqueue_proposals(self, proposals: Iterable[tuple[str, Sequence[int], str]]) -> int:
        return sum(
            1 for grant_id, cats, rationale in proposals
            if self.enqueue_proposal(grant_id, cats, rationale)
        )

    def items(self, status: str | None = None) -> list[ReviewItem]:
        ordered = sorted(self._items.values(), key=lambda i: i.order)
        return [i for i in ordered if status is None or i.status == status]

    def get_item(self, item_id: str) -> ReviewItem:
        if item_id not in self._items:
            raise UnknownItemError(f"no review item {item_id!r}")
        return self._items[item_id]

    def next_pending(self, reviewer: str) -> ReviewItem | None:
        """Oldest pending item this reviewer has not reviewed yet."""
        for item in self.items(PENDING):
            if all(r.reviewer != reviewer for r in item.reviews):
                return item
        return None

    def counts(self) -> dict[str, int]:
        out = {PENDING: 0, VERIFIED: 0, DISPUTED: 0, REJECTED: 0}
        for item in self._items.values():
            out[item.status] += 1
        return out

    def submit_review(
        self, item_id: str, reviewer: str, decision: str, final: Sequence[int]
    ) -> ReviewItem:
        with self._lock:
            item = self.get_item(item_id)
            if decision not in DECISIONS:
                raise ValueError(f"decision must be one of {DECISIONS}")
            final_set = category_set_from(final) if decision != REJECT else ()

            if item.status in (VERIFIED, REJECTED):
                raise ItemClosedError(f"item {item_id} is already {item.status}")
            if item.status == DISPUTED:
                if reviewer not in self.resolvers:
                    raise NotResolverError(
                        f"item {item_id} is disputed; only a resolver may settle it"
                    )
                if decision == REJECT or not final_set:
                    raise InvalidResolutionError(
                        "a resolution must supply a non-empty final category set"
                    )
                role = "resolver"
            else:
                if any(r.reviewer == reviewer for r in item.reviews):
                    raise DuplicateReviewerError(f"{reviewer} already reviewed item {item_id}")
                if decision != REJECT and not final_set:
                    raise EmptyFinalOnAcceptError("accept/modify requires a non-empty final set")
                role = "reviewer"

            event = {
                "event": "review",
                "item_id": item_id,
                "reviewer": reviewer,
                "decision": decision,
                "final": list(final_set),
                "role": role,
                "ts": _now(),
            }
            self._log.append(event)
            self._apply(event)
            return item

    def export_verified(self, path: str | Path) -> int:
        """Write verified items as labeled project records, ready for re-ingest."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        count = 0
        with path.open("w", encoding="utf-8") as fh:
            import json

            for item in self.items(VERIFIED):
                project = self._corpus.get(item.grant_id)
                if project is None:
                    continue
                record = Project(
                    grant_id=project.grant_id,
                    title=project.title,
                    abstract=project.abstract,
                    funder=project.funder,
                    gold=item.final,
                    split=project.split,
                    status="verified",
                    translated=project.translated,
                )
                fh.write(json.dumps(record.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")
                count += 1
        return count

    def state_fingerprint(self) -> list[tuple]:
        """Stable summary for replay-equivalence checks."""
        return [
            (i.item_id, i.grant_id, i.status, i.final,
             tuple((r.reviewer, r.decision, r.final, r.role) for r in i.reviews))
            for i in self.items()
        ]
