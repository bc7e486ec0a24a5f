"""Idea generation: concept-pair selection, prompting, and records.

Three selection modes feed the idea prompt: a seeded uniform random
concept pair, the pair with the highest predicted impact, or no pair at
all (the prompt then asks the model to pick concepts from the paper
titles). Prompts carry at most the seven newest paper titles per
researcher. Idea identity is a content hash of (prompt, response), so a
replayed transcript reproduces records exactly.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .features import TOP25_FEATURE_IDS, compute_pair_features
from .judge import JudgeClient
from .prompting import load_template, numbered_block, template_hash

__all__ = [
    "MODES",
    "IdeaRecord",
    "select_pair_random",
    "select_pair_high_impact",
    "build_idea_prompt",
    "parse_idea_response",
    "generate_idea",
    "generate_batch",
    "save_ideas",
    "load_ideas",
]

MODES = ("random_pair", "high_impact_pair", "no_pair")

MAX_TITLES = 7

_TITLE_LINE_RE = re.compile(r"(?i)^[\s#*]*project\s+title\b[\s:*-]*(.*)$")


@dataclass
class IdeaRecord:
    """One generated suggestion and everything needed to audit it."""

    idea_id: str
    researcher_a: str
    researcher_b: str
    mode: str
    concept_pair: tuple[str, str] | None
    prompt: str
    response: str
    idea_title: str
    idea_body: str
    template_hash: str = ""
    created_at: str = field(default="", compare=False)
    rating: int | None = None
    elo: float | None = None
    flagged: bool = False
    features: dict[str, float] | None = None  # top-25 values, when pair-mode

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode: {self.mode!r}")
        if (self.mode == "no_pair") != (self.concept_pair is None):
            raise ValueError("concept_pair must be absent exactly for no_pair ideas")
        if self.rating is not None and self.rating not in (1, 2, 3, 4, 5):
            raise ValueError(f"rating must be 1..5, got {self.rating}")

    def to_json(self) -> dict:
        out = dict(self.__dict__)
        out["concept_pair"] = list(self.concept_pair) if self.concept_pair else None
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "IdeaRecord":
        obj = dict(obj)
        if obj.get("concept_pair"):
            obj["concept_pair"] = tuple(obj["concept_pair"])
        return cls(**obj)


def select_pair_random(a_concepts, b_concepts, seed: int) -> tuple[str, str]:
    """Uniform draw from a_concepts x b_concepts minus identical pairs."""
    a_sorted = sorted(a_concepts)
    b_sorted = sorted(b_concepts)
    b_set = set(b_sorted)
    total = sum(len(b_sorted) - (a in b_set) for a in a_sorted)
    if total == 0:
        raise ValueError("no valid concept pair (sets empty or identical singletons)")
    k = int(np.random.default_rng(seed).integers(total))
    for a in a_sorted:
        row = len(b_sorted) - (a in b_set)
        if k >= row:
            k -= row
            continue
        for b in b_sorted:
            if b == a:
                continue
            if k == 0:
                return (a, b)
            k -= 1
    raise AssertionError("unreachable")


def select_pair_high_impact(a_concepts, b_concepts, impact) -> tuple[str, str]:
    """Highest predicted-impact pair; ties go to the lexicographically first."""
    pairs = [
        (a, b) for a in sorted(a_concepts) for b in sorted(b_concepts) if a != b
    ]
    if not pairs:
        raise ValueError("no valid concept pair (sets empty or identical singletons)")
    scores = impact.score_pairs(pairs)
    best = int(np.argmax(scores))  # argmax returns the first maximum: lexicographic winner
    return pairs[best]


def build_idea_prompt(
    pair: tuple[str, str] | None, titles_a: list[str], titles_b: list[str]
) -> str:
    """Instantiate the idea-generation template (pair or no-pair variant).

    Title lists arrive newest first and are truncated to the newest
    seven; empty lists are an error.
    """
    if not titles_a or not titles_b:
        raise ValueError("both researchers need at least one paper title")
    titles_a = list(titles_a)[:MAX_TITLES]
    titles_b = list(titles_b)[:MAX_TITLES]
    blocks = {
        "titles_a": numbered_block(titles_a, start=1, sep=":"),
        "titles_b": numbered_block(titles_b, start=1, sep=":"),
    }
    if pair is None:
        return load_template("idea_no_pair").format(**blocks)
    return load_template("idea_pair").format(concept1=pair[0], concept2=pair[1], **blocks)


def parse_idea_response(response: str) -> tuple[str, str] | None:
    """Positional parse of the final project title and objective paragraph.

    The prompt fixes the response outline, so we take the last line that
    introduces a project title and the paragraph that follows it. Returns
    None when the outline was not followed.
    """
    lines = response.splitlines()
    title_idx = None
    title = ""
    for i, line in enumerate(lines):
        m = _TITLE_LINE_RE.match(line)
        if m:
            title_idx = i
            title = m.group(1).strip().strip('*"').strip()
    if title_idx is None:
        return None
    i = title_idx + 1
    if not title:
        while i < len(lines) and not lines[i].strip():
            i += 1
        if i == len(lines):
            return None
        title = lines[i].strip().strip('*"').strip()
        i += 1
    while i < len(lines) and not lines[i].strip():
        i += 1
    body_lines = []
    while i < len(lines) and lines[i].strip():
        body_lines.append(lines[i].strip())
        i += 1
    if not title:
        return None
    return title, " ".join(body_lines)


def _idea_id(prompt: str, response: str) -> str:
    return hashlib.sha256((prompt + "\n\x00\n" + response).encode("utf-8")).hexdigest()[:16]


def generate_idea(
    prompt: str,
    judge: JudgeClient,
    *,
    researcher_a: str = "",
    researcher_b: str = "",
    mode: str = "no_pair",
    concept_pair: tuple[str, str] | None = None,
    features: dict[str, float] | None = None,
) -> IdeaRecord:
    """Run one prompt through the judge and parse the resulting idea.

    A response that does not follow the outline is kept raw and flagged
    rather than dropped.
    """
    response = judge.complete(prompt)
    parsed = parse_idea_response(response)
    flagged = parsed is None
    title, body = parsed if parsed else ("", "")
    return IdeaRecord(
        idea_id=_idea_id(prompt, response),
        researcher_a=researcher_a,
        researcher_b=researcher_b,
        mode=mode,
        concept_pair=concept_pair,
        prompt=prompt,
        response=response,
        idea_title=title,
        idea_body=body,
        template_hash=template_hash("idea_no_pair" if concept_pair is None else "idea_pair"),
        created_at=datetime.now(timezone.utc).isoformat(),
        flagged=flagged,
        features=features,
    )


def generate_batch(
    pairs,
    mode_counts: dict[str, int],
    judge: JudgeClient,
    seed: int = 0,
    graph=None,
    impact=None,
) -> list[IdeaRecord]:
    """Generate ideas over researcher pairs with an exact mode mix.

    ``pairs`` is a list of SubgraphPair; researcher pairs are cycled
    round-robin while modes are emitted in the requested counts. Pair
    modes attach the top-25 feature values to the record.
    """
    for mode in mode_counts:
        if mode not in MODES:
            raise ValueError(f"unknown mode: {mode!r}")
    if "high_impact_pair" in mode_counts and mode_counts["high_impact_pair"] > 0 and impact is None:
        raise ValueError("high_impact_pair mode needs an impact model")
    schedule = [mode for mode in MODES for _ in range(mode_counts.get(mode, 0))]
    rng = np.random.default_rng(seed)
    ideas = []
    for i, mode in enumerate(schedule):
        ctx = pairs[i % len(pairs)]
        profile_a, profile_b = ctx.profile_a, ctx.profile_b
        concept_pair = None
        features = None
        if mode == "random_pair":
            concept_pair = select_pair_random(
                profile_a.concepts, profile_b.concepts, seed=int(rng.integers(2**63 - 1))
            )
        elif mode == "high_impact_pair":
            concept_pair = select_pair_high_impact(profile_a.concepts, profile_b.concepts, impact)
        if concept_pair is not None and graph is not None:
            imp = impact.score_pair(*concept_pair) if impact is not None else 0.0
            vec = compute_pair_features(*concept_pair, graph, pair_ctx=ctx, impact=imp)
            features = {fid: float(v) for fid, v in zip(TOP25_FEATURE_IDS, vec.top25())}
        prompt = build_idea_prompt(
            concept_pair, profile_a.recent_titles(), profile_b.recent_titles()
        )
        ideas.append(
            generate_idea(
                prompt,
                judge,
                researcher_a=profile_a.researcher_id,
                researcher_b=profile_b.researcher_id,
                mode=mode,
                concept_pair=concept_pair,
                features=features,
            )
        )
    return ideas


def save_ideas(ideas: list[IdeaRecord], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for idea in ideas:
            fh.write(json.dumps(idea.to_json(), ensure_ascii=False) + "\n")


def load_ideas(path: str | Path) -> list[IdeaRecord]:
    return [
        IdeaRecord.from_json(json.loads(line))
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
