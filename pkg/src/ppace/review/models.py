"""Request/response models for the review service API."""

from __future__ import annotations

from pydantic import BaseModel, Field

from .store import Review, ReviewItem


class ReviewModel(BaseModel):
    reviewer: str
    decision: str
    final: list[int]
    role: str
    ts: str

    @classmethod
    def from_review(cls, review: Review) -> "ReviewModel":
        return cls(
            reviewer=review.reviewer,
            decision=review.decision,
            final=list(review.final),
            role=review.role,
            ts=review.ts,
        )


class ReviewItemModel(BaseModel):
    item_id: str
    grant_id: str
    title: str = ""
    abstract: str = ""
    proposed: list[int]
    rationale: str
    status: str
    final: list[int] | None = None
    reviews: list[ReviewModel] = Field(default_factory=list)

    @classmethod
    def from_item(cls, item: ReviewItem, title: str = "", abstract: str = "") -> "ReviewItemModel":
        return cls(
            item_id=item.item_id,
            grant_id=item.grant_id,
            title=title,
            abstract=abstract,
            proposed=list(item.proposed),
            rationale=item.rationale,
            status=item.status,
            final=list(item.final) if item.final is not None else None,
            reviews=[ReviewModel.from_review(r) for r in item.reviews],
        )


class ReviewRequest(BaseModel):
    reviewer: str
    decision: str
    final: list[int] = Field(default_factory=list)


class ProposalModel(BaseModel):
    grant_id: str
    categories: list[int]
    rationale: str = ""


class ProposalBatch(BaseModel):
    proposals: list[ProposalModel]


class EnqueueResult(BaseModel):
    enqueued: int


class CategoryModel(BaseModel):
    id: int
    name: str
    definition: str


class QueueStats(BaseModel):
    pending: int
    verified: int
    disputed: int
    rejected: int
