"""HTTP surface of the annotation review workflow."""

from __future__ import annotations

import io
import json
from pathlib import Path

from fastapi import FastAPI, Query, Response
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from ..corpus import CorpusStore, Project
from ..errors import PpaceError
from ..taxonomy import DEFAULT_TAXONOMY, OutOfRangeCategoryError, Taxonomy
from . import store as review_store
from .models import (
    CategoryModel,
    EnqueueResult,
    ProposalBatch,
    QueueStats,
    ReviewItemModel,
    ReviewRequest,
)

_ERROR_STATUS = {
    review_store.UnknownItemError: 404,
    review_store.UnknownProjectError: 404,
    review_store.DuplicateReviewerError: 409,
    review_store.ItemClosedError: 409,
    review_store.NotResolverError: 403,
    review_store.InvalidResolutionError: 422,
    review_store.EmptyFinalOnAcceptError: 422,
    OutOfRangeCategoryError: 422,
}


def create_app(
    reviews: review_store.ReviewStore,
    corpus: CorpusStore,
    taxonomy: Taxonomy = DEFAULT_TAXONOMY,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="ppace review service")

    @app.exception_handler(PpaceError)
    async def _ppace_error(request, exc: PpaceError):
        status = _ERROR_STATUS.get(type(exc), 400)
        return JSONResponse(status_code=status, content={"error": exc.code, "detail": str(exc)})

    def _item_model(item: review_store.ReviewItem) -> ReviewItemModel:
        project = corpus.get(item.grant_id)
        return ReviewItemModel.from_item(
            item,
            title=project.title if project else "",
            abstract=project.abstract if project else "",
        )

    @app.get("/api/queue/next", response_model=ReviewItemModel)
    def queue_next(reviewer: str = Query(...)):
        item = reviews.next_pending(reviewer)
        if item is None:
            return Response(status_code=204)
        return _item_model(item)

    @app.post("/api/reviews/{item_id}", response_model=ReviewItemModel)
    def submit_review(item_id: str, body: ReviewRequest):
        item = reviews.submit_review(item_id, body.reviewer, body.decision, body.final)
        return _item_model(item)

    @app.get("/api/items", response_model=list[ReviewItemModel])
    def list_items(status: str | None = Query(default=None)):
        return [_item_model(i) for i in reviews.items(status)]

    @app.post("/api/proposals", response_model=EnqueueResult)
    def enqueue(body: ProposalBatch):
        count = reviews.enqueue_proposals(
            [(p.grant_id, p.categories, p.rationale) for p in body.proposals]
        )
        return EnqueueResult(enqueued=count)

    @app.get("/api/export/verified")
    def export_verified():
        buffer = io.StringIO()
        for item in reviews.items(review_store.VERIFIED):
            project = corpus.get(item.grant_id)
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
            buffer.write(json.dumps(record.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")
        return PlainTextResponse(buffer.getvalue(), media_type="application/x-ndjson")

    @app.get("/api/taxonomy", response_model=list[CategoryModel])
    def get_taxonomy():
        return [
            CategoryModel(id=c.id, name=c.name, definition=c.definition)
            for c in taxonomy.categories
        ]

    @app.get("/api/stats", response_model=QueueStats)
    def get_stats():
        return QueueStats(**reviews.counts())

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
