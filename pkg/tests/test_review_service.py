import pytest
from fastapi.testclient import TestClient

from ppace.corpus import CorpusStore, ingest
from ppace.review.app import create_app
from ppace.review.store import (
    DISPUTED,
    PENDING,
    REJECTED,
    VERIFIED,
    DuplicateReviewerError,
    EmptyFinalOnAcceptError,
    InvalidResolutionError,
    ItemClosedError,
    NotResolverError,
    ReviewStore,
    UnknownItemError,
    UnknownProjectError,
)

from conftest import make_projects


@pytest.fixture()
def corpus(tmp_path) -> CorpusStore:
    store = CorpusStore(tmp_path / "corpus.jsonl")
    for project in make_projects([(1, 4), (2,), (9, 10)], prefix="R"):
        store.append(project)
    return store


@pytest.fixture()
def reviews(tmp_path, corpus) -> ReviewStore:
    return ReviewStore(tmp_path / "reviews.jsonl", corpus,
                       required_reviews=2, resolvers=("lead",))


def _seed(reviews: ReviewStore, n=3):
    proposals = [
        ("R-001", (1, 7), "model thinks pathogen and vaccines"),
        ("R-002", (2,), "animal research"),
        ("R-003", (9, 10), "policy and secondary impacts"),
    ]
    return reviews.enqueue_proposals(proposals[:n])


def test_enqueue_creates_pending_items(reviews):
    assert _seed(reviews) == 3
    assert [i.status for i in reviews.items()] == [PENDING] * 3


def test_enqueue_idempotent(reviews):
    _seed(reviews)
    assert _seed(reviews) == 0
    assert len(reviews.items()) == 3


def test_enqueue_unknown_project(reviews):
    with pytest.raises(UnknownProjectError):
        reviews.enqueue_proposal("R-999", (1,), "whatever")


def test_next_pending_empty_queue(reviews):
    assert reviews.next_pending("r1") is None


def test_next_pending_fifo_and_reviewer_exclusion(reviews):
    _seed(reviews, 2)
    first = reviews.next_pending("r1")
    assert first.grant_id == "R-001"
    reviews.submit_review(first.item_id, "r1", "accept", first.proposed)
    assert reviews.next_pending("r1").grant_id == "R-002"
    # r2 still sees the first item, r1 never sees it again
    assert reviews.next_pending("r2").grant_id == "R-001"


def test_two_concordant_accepts_verify(reviews):
    _seed(reviews, 1)
    item = reviews.next_pending("r1")
    reviews.submit_review(item.item_id, "r1", "accept", (1, 4))
    updated = reviews.submit_review(item.item_id, "r2", "accept", (1, 4))
    assert updated.status == VERIFIED
    assert updated.final == (1, 4)


def test_discordant_finals_dispute(reviews):
    _seed(reviews, 1)
    item = reviews.next_pending("r1")
    reviews.submit_review(item.item_id, "r1", "accept", (1, 4))
    updated = reviews.submit_review(item.item_id, "r2", "modify", (1,))
    assert updated.status == DISPUTED


def test_resolver_settles_dispute(reviews):
    _seed(reviews, 1)
    item = reviews.next_pending("r1")
    reviews.submit_review(item.item_id, "r1", "accept", (1, 4))
    reviews.submit_review(item.item_id, "r2", "modify", (1,))
    updated = reviews.submit_review(item.item_id, "lead", "modify", (1, 4))
    assert updated.status == VERIFIED
    assert updated.final == (1, 4)


def test_non_resolver_cannot_settle_dispute(reviews):
    _seed(reviews, 1)
    item = reviews.next_pending("r1")
    reviews.submit_review(item.item_id, "r1", "accept", (1, 4))
    reviews.submit_review(item.item_id, "r2", "accept", (2,))
    with pytest.raises(NotResolverError):
        reviews.submit_review(item.item_id, "r3", "accept", (1, 4))


def test_resolver_cannot_reject_dispute(reviews):
    _seed(reviews, 1)
    item = reviews.next_pending("r1")
    reviews.submit_review(item.item_id, "r1", "accept", (1, 4))
    reviews.submit_review(item.item_id, "r2", "accept", (2,))
    with pytest.raises(InvalidResolutionError):
        reviews.submit_review(item.item_id, "lead", "reject", ())


def test_required_rejects_reject(reviews):
    _seed(reviews, 1)
    item = reviews.next_pending("r1")
    reviews.submit_review(item.item_id, "r1", "reject", ())
    updated = reviews.submit_review(item.item_id, "r2", "reject", ())
    assert updated.status == REJECTED


def test_duplicate_reviewer_blocked(reviews):
    _seed(reviews, 1)
    item = reviews.next_pending("r1")
    reviews.submit_review(item.item_id, "r1", "accept", (1, 4))
    with pytest.raises(DuplicateReviewerError):
        reviews.submit_review(item.item_id, "r1", "accept", (1, 4))


def test_accept_requires_final(reviews):
    _seed(reviews, 1)
    item = reviews.next_pending("r1")
    with pytest.raises(EmptyFinalOnAcceptError):
        reviews.submit_review(item.item_id, "r1", "accept", ())


def test_closed_item_rejects_reviews(reviews):
    _seed(reviews, 1)
    item = reviews.next_pending("r1")
    reviews.submit_review(item.item_id, "r1", "accept", (1, 4))
    reviews.submit_review(item.item_id, "r2", "accept", (1, 4))
    with pytest.raises(ItemClosedError):
        reviews.submit_review(item.item_id, "r3", "accept", (1, 4))


def test_unknown_item(reviews):
    with pytest.raises(UnknownItemError):
        reviews.submit_review("nope", "r1", "accept", (1,))


def test_replay_reproduces_state(tmp_path, corpus, reviews):
    _seed(reviews)
    i1, i2, i3 = reviews.items()
    reviews.submit_review(i1.item_id, "r1", "accept", (1, 7))
    reviews.submit_review(i1.item_id, "r2", "accept", (1, 7))
    reviews.submit_review(i2.item_id, "r1", "accept", (2,))
    reviews.submit_review(i2.item_id, "r2", "modify", (2, 3))
    reviews.submit_review(i2.item_id, "lead", "modify", (3,))
    reviews.submit_review(i3.item_id, "r1", "reject", ())

    replayed = ReviewStore(reviews._log.path, corpus, required_reviews=2, resolvers=("lead",))
    assert replayed.state_fingerprint() == reviews.state_fingerprint()
    assert replayed.counts() == {PENDING: 1, VERIFIED: 2, DISPUTED: 0, REJECTED: 0}


def test_statuses_never_regress(reviews):
    _seed(reviews, 1)
    item = reviews.next_pending("r1")
    seen = [reviews.get_item(item.item_id).status]
    reviews.submit_review(item.item_id, "r1", "accept", (1,))
    seen.append(reviews.get_item(item.item_id).status)
    reviews.submit_review(item.item_id, "r2", "accept", (2,))
    seen.append(reviews.get_item(item.item_id).status)
    reviews.submit_review(item.item_id, "lead", "accept", (1,))
    seen.append(reviews.get_item(item.item_id).status)
    assert seen == [PENDING, PENDING, DISPUTED, VERIFIED]


def test_export_verified_roundtrips_through_ingest(tmp_path, corpus, reviews):
    _seed(reviews, 2)
    for item in list(reviews.items(PENDING)):
        reviews.submit_review(item.item_id, "r1", "accept", item.proposed)
        reviews.submit_review(item.item_id, "r2", "accept", item.proposed)
    out = tmp_path / "verified.jsonl"
    assert reviews.export_verified(out) == 2

    fresh = CorpusStore(tmp_path / "fresh.jsonl")
    result = ingest(fresh, out, "jsonl", "train")
    assert result.count == 2 and not result.problems
    snapshot = fresh.snapshot()
    assert {p.grant_id: p.gold for p in snapshot} == {"R-001": (1, 7), "R-002": (2,)}
    assert all(p.status == "verified" for p in snapshot)


def test_export_verified_empty(tmp_path, reviews):
    out = tmp_path / "verified.jsonl"
    assert reviews.export_verified(out) == 0
    assert out.read_text(encoding="utf-8") == ""


# -- HTTP surface ------------------------------------------------------------


@pytest.fixture()
def client(reviews, corpus):
    return TestClient(create_app(reviews, corpus))


def test_http_queue_next_and_204(client, reviews):
    assert client.get("/api/queue/next", params={"reviewer": "r1"}).status_code == 204
    _seed(reviews, 1)
    response = client.get("/api/queue/next", params={"reviewer": "r1"})
    assert response.status_code == 200
    body = response.json()
    assert body["grant_id"] == "R-001"
    assert body["proposed"] == [1, 7]
    assert body["title"].startswith("study number 1")


def test_http_submit_review_flow(client, reviews):
    _seed(reviews, 1)
    item = client.get("/api/queue/next", params={"reviewer": "r1"}).json()
    r1 = client.post(f"/api/reviews/{item['item_id']}",
                     json={"reviewer": "r1", "decision": "accept", "final": [1, 7]})
    assert r1.status_code == 200 and r1.json()["status"] == PENDING
    r2 = client.post(f"/api/reviews/{item['item_id']}",
                     json={"reviewer": "r2", "decision": "accept", "final": [1, 7]})
    assert r2.json()["status"] == VERIFIED
    assert r2.json()["final"] == [1, 7]


def test_http_error_codes(client, reviews):
    _seed(reviews, 1)
    item = client.get("/api/queue/next", params={"reviewer": "r1"}).json()
    client.post(f"/api/reviews/{item['item_id']}",
                json={"reviewer": "r1", "decision": "accept", "final": [1]})
    dup = client.post(f"/api/reviews/{item['item_id']}",
                      json={"reviewer": "r1", "decision": "accept", "final": [1]})
    assert dup.status_code == 409
    assert dup.json()["error"] == "DuplicateReviewerError"
    missing = client.post("/api/reviews/absent",
                          json={"reviewer": "r1", "decision": "accept", "final": [1]})
    assert missing.status_code == 404


def test_http_items_filter_and_stats(client, reviews):
    _seed(reviews)
    assert len(client.get("/api/items", params={"status": PENDING}).json()) == 3
    stats = client.get("/api/stats").json()
    assert stats == {"pending": 3, "verified": 0, "disputed": 0, "rejected": 0}


def test_http_enqueue_proposals(client):
    body = {"proposals": [
        {"grant_id": "R-001", "categories": [1, 7], "rationale": "x"},
        {"grant_id": "R-002", "categories": [2], "rationale": "y"},
    ]}
    assert client.post("/api/proposals", json=body).json() == {"enqueued": 2}
    assert client.post("/api/proposals", json=body).json() == {"enqueued": 0}


def test_http_taxonomy(client):
    rows = client.get("/api/taxonomy").json()
    assert len(rows) == 12
    assert rows[0]["name"].startswith("Pathogen")
    assert rows[11]["id"] == 12


def test_http_export_verified_stream(client, reviews):
    _seed(reviews, 1)
    item = reviews.items()[0]
    reviews.submit_review(item.item_id, "r1", "accept", (1, 7))
    reviews.submit_review(item.item_id, "r2", "accept", (1, 7))
    response = client.get("/api/export/verified")
    lines = [l for l in response.text.splitlines() if l]
    assert len(lines) == 1
    import json

    record = json.loads(lines[0])
    assert record["grant_id"] == "R-001" and record["gold"] == [1, 7]
