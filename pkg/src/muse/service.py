"""Persistence and the rating service.

The store is a single-directory embedded database: an append-only JSONL
event log that is the source of truth, plus an optional snapshot file for
inspection. Replaying the log reproduces the state exactly; every write
is one flushed line. No external database, so the whole loop stays
hermetic.

The HTTP API serves unrated suggestions to raters (newest model ranking
first when a model is attached), collects 1-5 ratings, and exports the
labeled training set.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .features import TOP25_FEATURE_IDS
from .ideation import MODES, IdeaRecord
from .models import InterestModel, predict

__all__ = [
    "RatingEvent",
    "Store",
    "ValidationError",
    "NotFoundError",
    "RATER_CAP",
    "create_app",
]

RATER_CAP = 48
API_SCHEMA = "muse.api/v1"


class ValidationError(Exception):
    """Request payload out of contract (HTTP 400)."""


class NotFoundError(Exception):
    """Unknown idea or rater (HTTP 404)."""


@dataclass(frozen=True)
class RatingEvent:
    idea_id: str
    rater_id: str
    rating: int
    submitted_at: str

    def __post_init__(self):
        if not isinstance(self.rating, int) or self.rating not in (1, 2, 3, 4, 5):
            raise ValidationError(f"rating must be an integer 1..5, got {self.rating!r}")


class Store:
    """Append-only event log with replayed in-memory state."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.log_path = self.root / "events.log"
        self.ideas: dict[str, IdeaRecord] = {}
        self.raters: set[str] = set()
        self.ratings: dict[tuple[str, str], RatingEvent] = {}
        self.model: InterestModel | None = None
        if self.log_path.exists():
            with self.log_path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        self._apply(json.loads(line))
        model_path = self.root / "interest_model.npz"
        if model_path.exists():
            self.model = InterestModel.load(model_path)

    # -- event machinery ------------------------------------------------

    def _apply(self, event: dict) -> None:
        kind = event["t"]
        if kind == "idea_added":
            idea = IdeaRecord.from_json(event["idea"])
            self.ideas[idea.idea_id] = idea
        elif kind == "rater_registered":
            self.raters.add(event["rater_id"])
        elif kind == "rating_submitted":
            key = (event["idea_id"], event["rater_id"])
            self.ratings[key] = RatingEvent(
                idea_id=event["idea_id"],
                rater_id=event["rater_id"],
                rating=event["rating"],
                submitted_at=event["submitted_at"],
            )
        else:
            raise ValueError(f"unknown event type {kind!r} in log")

    def _append(self, event: dict) -> None:
        with self.log_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")
            fh.flush()
        self._apply(event)

    def write_snapshot(self) -> Path:
        """Materialized state, for inspection; the log stays authoritative."""
        snap = {
            "ideas": [idea.to_json() for _, idea in sorted(self.ideas.items())],
            "raters": sorted(self.raters),
            "ratings": [
                self.ratings[key].__dict__ for key in sorted(self.ratings)
            ],
        }
        path = self.root / "snapshot.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(snap, ensure_ascii=False, indent=1), encoding="utf-8")
        tmp.replace(path)
        return path

    # -- writes ----------------------------------------------------------

    def add_idea(self, idea: IdeaRecord) -> None:
        self._append({"t": "idea_added", "idea": idea.to_json()})

    def register_rater(self, rater_id: str) -> None:
        self._append({"t": "rater_registered", "rater_id": rater_id})

    def attach_model(self, model: InterestModel) -> None:
        model.save(self.root / "interest_model.npz")
        self.model = model

    def submit_rating(self, event: RatingEvent) -> dict:
        """Validate, append, and acknowledge; duplicates overwrite with audit."""
        if event.idea_id not in self.ideas:
            raise NotFoundError(f"unknown idea {event.idea_id!r}")
        prior = self.ratings.get((event.idea_id, event.rater_id))
        self._append(
            {
                "t": "rating_submitted",
                "idea_id": event.idea_id,
                "rater_id": event.rater_id,
                "rating": event.rating,
                "submitted_at": event.submitted_at,
                "prior_rating": prior.rating if prior else None,
            }
        )
        return {"ok": True, "overwrote": prior.rating if prior else None}

    # -- reads -----------------------------------------------------------

    def ratings_by_rater(self, rater_id: str) -> list[RatingEvent]:
        return [ev for (_, rid), ev in self.ratings.items() if rid == rater_id]

    def next_suggestions(self, rater_id: str, limit: int = RATER_CAP) -> list[IdeaRecord]:
        """Unrated ideas addressed to the rater, best predicted first.

        With no model attached the queue balances generation modes
        round-robin in insertion order. A rater never sees more than 48
        ideas in total (already-rated ones count against the cap).
        """
        if rater_id not in self.raters:
            raise NotFoundError(f"unknown rater {rater_id!r}")
        limit = min(limit, RATER_CAP)
        rated = {idea_id for (idea_id, rid) in self.ratings if rid == rater_id}
        budget = max(0, RATER_CAP - len(rated))
        limit = min(limit, budget)
        pending = [
            idea
            for idea in self.ideas.values()
            if idea.researcher_a == rater_id and idea.idea_id not in rated
        ]
        if self.model is not None:
            def score(idea: IdeaRecord) -> float:
                if idea.features is None:
                    return -1.0
                return float(predict(self.model, [idea.features[f] for f in self.model.feature_ids]))

            pending.sort(key=lambda idea: (-score(idea), idea.idea_id))
            return pending[:limit]
        by_mode: dict[str, list[IdeaRecord]] = {mode: [] for mode in MODES}
        for idea in pending:  # insertion order within each mode
            by_mode[idea.mode].append(idea)
        queue: list[IdeaRecord] = []
        while len(queue) < len(pending):
            for mode in MODES:
                if by_mode[mode]:
                    queue.append(by_mode[mode].pop(0))
        return queue[:limit]

    def stats(self, rater_id: str | None = None) -> dict:
        """Rating histogram and per-mode breakdown; optional per-rater block."""
        histogram = {str(i): 0 for i in range(1, 6)}
        by_mode = {
            mode: {"count": 0, "histogram": {str(i): 0 for i in range(1, 6)}} for mode in MODES
        }
        for event in self.ratings.values():
            histogram[str(event.rating)] += 1
            idea = self.ideas.get(event.idea_id)
            if idea is not None:
                by_mode[idea.mode]["count"] += 1
                by_mode[idea.mode]["histogram"][str(event.rating)] += 1
        out = {
            "total_ratings": len(self.ratings),
            "total_ideas": len(self.ideas),
            "total_raters": len(self.raters),
            "histogram": histogram,
            "by_mode": by_mode,
        }
        if rater_id is not None:
            if rater_id not in self.raters:
                raise NotFoundError(f"unknown rater {rater_id!r}")
            own = self.ratings_by_rater(rater_id)
            own_hist = {str(i): 0 for i in range(1, 6)}
            for event in own:
                own_hist[str(event.rating)] += 1
            assigned = sum(1 for idea in self.ideas.values() if idea.researcher_a == rater_id)
            out["rater"] = {
                "rater_id": rater_id,
                "rated": len(own),
                "assigned": min(assigned, RATER_CAP),
                "cap": RATER_CAP,
                "histogram": own_hist,
            }
        return out

    def export_training_set(self, out_dir: str | Path | None = None) -> dict:
        """Write training.csv (pair ideas) and sanity.csv (no-pair ideas).

        One row per latest rating of an idea; the label is 1 iff the
        rating is 4 or 5. Pair rows carry the top-25 feature values.
        """
        out_dir = Path(out_dir) if out_dir else self.root
        out_dir.mkdir(parents=True, exist_ok=True)
        training_path = out_dir / "training.csv"
        sanity_path = out_dir / "sanity.csv"
        n_training = n_sanity = n_skipped = 0
        with training_path.open("w", encoding="utf-8", newline="") as ft, sanity_path.open(
            "w", encoding="utf-8", newline=""
        ) as fs:
            train_writer = csv.writer(ft)
            train_writer.writerow(
                [
                    "idea_id",
                    "rater_id",
                    "researcher_a",
                    "researcher_b",
                    "concept_a",
                    "concept_b",
                    *TOP25_FEATURE_IDS,
                    "rating",
                    "label",
                ]
            )
            sanity_writer = csv.writer(fs)
            sanity_writer.writerow(["idea_id", "rater_id", "researcher_a", "researcher_b", "rating", "label"])
            for key in sorted(self.ratings):
                event = self.ratings[key]
                idea = self.ideas.get(event.idea_id)
                if idea is None:
                    continue
                label = int(event.rating >= 4)
                if idea.concept_pair is None:
                    sanity_writer.writerow(
                        [idea.idea_id, event.rater_id, idea.researcher_a, idea.researcher_b, event.rating, label]
                    )
                    n_sanity += 1
                elif idea.features is None:
                    n_skipped += 1
                else:
                    train_writer.writerow(
                        [
                            idea.idea_id,
                            event.rater_id,
                            idea.researcher_a,
                            idea.researcher_b,
                            idea.concept_pair[0],
                            idea.concept_pair[1],
                            *(repr(idea.features[f]) for f in TOP25_FEATURE_IDS),
                            event.rating,
                            label,
                        ]
                    )
                    n_training += 1
        return {
            "training_path": training_path,
            "sanity_path": sanity_path,
            "training_rows": n_training,
            "sanity_rows": n_sanity,
            "skipped_missing_features": n_skipped,
        }


def load_training_csv(path: str | Path):
    """Read a training export back into LabeledExamples."""
    from .models import LabeledExample

    examples = []
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            values = [float(row[f]) for f in TOP25_FEATURE_IDS]
            examples.append(LabeledExample.from_rating(values, int(row["rating"])))
    return examples


def _suggestion_view(idea: IdeaRecord, current_rating: int | None) -> dict:
    # deliberately omits mode and concept_pair: raters stay blinded
    return {
        "idea_id": idea.idea_id,
        "title": idea.idea_title or "(untitled suggestion)",
        "body": idea.idea_body or idea.response,
        "collaborator": idea.researcher_b,
        "current_rating": current_rating,
    }


def create_app(store: Store) -> FastAPI:
    """FastAPI app over a store; all payloads carry a schema field."""
    app = FastAPI(title="muse rating service", docs_url=None, redoc_url=None)

    @app.exception_handler(NotFoundError)
    async def _not_found(_req: Request, exc: NotFoundError):
        return JSONResponse({"schema": API_SCHEMA, "error": str(exc)}, status_code=404)

    @app.exception_handler(ValidationError)
    async def _bad_request(_req: Request, exc: ValidationError):
        return JSONResponse({"schema": API_SCHEMA, "error": str(exc)}, status_code=400)

    @app.get("/api/raters/{rater_id}/suggestions")
    def suggestions(rater_id: str, limit: int = RATER_CAP):
        if limit < 1:
            raise ValidationError("limit must be positive")
        ideas = store.next_suggestions(rater_id, limit=limit)
        return {
            "schema": API_SCHEMA,
            "rater_id": rater_id,
            "suggestions": [_suggestion_view(i, None) for i in ideas],
        }

    @app.post("/api/ratings")
    async def post_rating(request: Request):
        try:
            body = await request.json()
        except Exception as exc:  # malformed JSON is a client error
            raise ValidationError(f"body is not valid JSON: {exc}") from exc
        if not isinstance(body, dict):
            raise ValidationError("body must be a JSON object")
        missing = [k for k in ("idea_id", "rater_id", "rating") if k not in body]
        if missing:
            raise ValidationError(f"missing fields: {', '.join(missing)}")
        rating = body["rating"]
        if isinstance(rating, bool) or not isinstance(rating, int):
            raise ValidationError(f"rating must be an integer 1..5, got {rating!r}")
        event = RatingEvent(
            idea_id=str(body["idea_id"]),
            rater_id=str(body["rater_id"]),
            rating=rating,
            submitted_at=datetime.now(timezone.utc).isoformat(),
        )
        ack = store.submit_rating(event)
        return {"schema": API_SCHEMA, **ack}

    @app.get("/api/stats")
    def stats(rater_id: str | None = None):
        return {"schema": API_SCHEMA, **store.stats(rater_id=rater_id)}

    @app.get("/api/export/training.csv")
    def export_training():
        result = store.export_training_set()
        text = Path(result["training_path"]).read_text(encoding="utf-8")
        return PlainTextResponse(text, media_type="text/csv")

    return app


def serve(store_dir: str | Path, host: str = "127.0.0.1", port: int = 8781) -> None:
    """Run the rating service until interrupted."""
    import uvicorn

    store = Store(store_dir)
    uvicorn.run(create_app(store), host=host, port=port, log_level="warning")
