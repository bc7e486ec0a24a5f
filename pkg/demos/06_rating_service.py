#!/usr/bin/env python3
"""The rating loop: queue suggestions, collect ratings, export labels.

Drives the embedded store directly; `muse serve --store <dir>` exposes
the same state over HTTP for the browser interface in frontend/.
"""

import tempfile
from pathlib import Path

from muse.features import TOP25_FEATURE_IDS
from muse.ideation import IdeaRecord
from muse.service import RatingEvent, Store

store_dir = Path(tempfile.mkdtemp(prefix="muse_store_"))
store = Store(store_dir)
store.register_rater("r-ada")

for k in range(6):
    store.add_idea(
        IdeaRecord(
            idea_id=f"demo{k:02d}",
            researcher_a="r-ada",
            researcher_b="r-boole",
            mode="random_pair" if k % 2 else "no_pair",
            concept_pair=("alpha flux", "beta flux") if k % 2 else None,
            prompt="(prompt text)",
            response="(response text)",
            idea_title=f"Demo idea {k}",
            idea_body="One-paragraph objective.",
            features={fid: float(k + i) for i, fid in enumerate(TOP25_FEATURE_IDS)}
            if k % 2
            else None,
        )
    )

queue = store.next_suggestions("r-ada", limit=10)
print(f"queue for r-ada: {[i.idea_id for i in queue]}")

for rating, idea in zip((5, 4, 3, 2, 1, 4), queue):
    store.submit_rating(RatingEvent(idea.idea_id, "r-ada", rating, "2024-01-01T00:00:00+00:00"))
print(f"after rating everything, queue is {store.next_suggestions('r-ada')}")

stats = store.stats(rater_id="r-ada")
print(f"histogram: {stats['histogram']}")
print(f"rater progress: {stats['rater']['rated']}/{stats['rater']['assigned']}")

export = store.export_training_set()
print(f"export: {export['training_rows']} training rows -> {export['training_path']}")
print(f"        {export['sanity_rows']} sanity rows   -> {export['sanity_path']}")
print(f"replaying the log reproduces the state: "
      f"{Store(store_dir).ratings == store.ratings}")
