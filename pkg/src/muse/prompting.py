"""Versioned prompt templates.

Templates live as text assets under muse/prompts and are content-addressed:
``template_hash`` changes whenever the asset changes, which guards the
bit-exactness of recorded transcripts.
"""

from __future__ import annotations

import hashlib
from functools import lru_cache
from importlib import resources

TEMPLATE_NAMES = ("refine_concepts", "idea_pair", "idea_no_pair", "rank_match")


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    if name not in TEMPLATE_NAMES:
        raise ValueError(f"unknown prompt template: {name!r}")
    text = (resources.files("muse") / "prompts" / f"{name}.txt").read_text(encoding="utf-8")
    # assets are stored with a trailing newline; prompts end at the last character
    return text[:-1] if text.endswith("\n") else text


@lru_cache(maxsize=None)
def template_hash(name: str) -> str:
    return hashlib.sha256(load_template(name).encode("utf-8")).hexdigest()


def numbered_block(titles: list[str], start: int, sep: str) -> str:
    """Render a list of titles as 'N<sep> title' lines."""
    return "\n".join(f"{i}{sep} {t}" for i, t in enumerate(titles, start=start))
