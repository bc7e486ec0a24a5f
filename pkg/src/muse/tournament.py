"""Zero-shot pairwise ranking with an ELO tournament.

Ideas start at a rating of 1400. Matches draw uniform random distinct
pairs, present them in randomized slot order, ask the judge which
suggestion the evaluating researcher would find more interesting, and
apply the standard ELO update. Responses are parsed for the last
"RESULT: SUGGESTION 1|2" token; anything else discards the match (with a
counter) rather than re-asking, which keeps match-count semantics clean.
Symmetric updates conserve the rating sum to float precision.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import models
from .ideation import IdeaRecord
from .judge import JudgeClient, JudgeTransportError
from .prompting import load_template, numbered_block

__all__ = [
    "MatchResult",
    "EloTable",
    "InvalidMatchError",
    "elo_expected",
    "elo_update",
    "build_match_prompt",
    "judge_match",
    "run_tournament",
    "ranking_auc",
    "auc_over_matches",
    "save_matches",
    "load_matches",
    "export_ranking_csv",
]

INITIAL_RATING = 1400.0
DEFAULT_K = 32.0

_VERDICT_RE = re.compile(r"(?i)result:\s*suggestion\s*([12])")


class InvalidMatchError(Exception):
    """The judge's response contained no parsable verdict."""


@dataclass(frozen=True)
class MatchResult:
    """Outcome of one pairwise comparison, slots as presented."""

    idea_1: str
    idea_2: str
    winner: int
    raw_response: str = ""
    seed_position_swap: bool = False

    def __post_init__(self):
        if self.idea_1 == self.idea_2:
            raise ValueError("a match needs two distinct ideas")
        if self.winner not in (1, 2):
            raise ValueError(f"winner must be 1 or 2, got {self.winner}")


@dataclass
class EloTable:
    """Ratings, match counts, and full history for one tournament."""

    ratings: dict[str, float] = field(default_factory=dict)
    matches_played: dict[str, int] = field(default_factory=dict)
    k_factor: float = DEFAULT_K
    initial_rating: float = INITIAL_RATING
    history: list[MatchResult] = field(default_factory=list)
    discarded: int = 0

    @classmethod
    def for_ideas(cls, idea_ids, k_factor: float = DEFAULT_K, initial: float = INITIAL_RATING):
        return cls(
            ratings={i: initial for i in idea_ids},
            matches_played={i: 0 for i in idea_ids},
            k_factor=k_factor,
            initial_rating=initial,
        )

    def ranking(self) -> list[tuple[str, float]]:
        """Ideas from highest to lowest rating (ties by id, deterministic)."""
        return sorted(self.ratings.items(), key=lambda kv: (-kv[1], kv[0]))


def elo_expected(r_a: float, r_b: float) -> float:
    """Expected score of the first player: 1 / (1 + 10^((r_b - r_a)/400))."""
    if not (np.isfinite(r_a) and np.isfinite(r_b)):
        raise ValueError("ratings must be finite")
    return 1.0 / (1.0 + 10.0 ** ((r_b - r_a) / 400.0))


def elo_update(table: EloTable, match: MatchResult) -> EloTable:
    """Apply one match: winner gains K(1-E_w), loser loses K*E_l."""
    for idea in (match.idea_1, match.idea_2):
        if idea not in table.ratings:
            raise KeyError(f"unknown idea in match: {idea!r}")
    winner = match.idea_1 if match.winner == 1 else match.idea_2
    loser = match.idea_2 if match.winner == 1 else match.idea_1
    expected_w = elo_expected(table.ratings[winner], table.ratings[loser])
    expected_l = elo_expected(table.ratings[loser], table.ratings[winner])
    table.ratings[winner] += table.k_factor * (1.0 - expected_w)
    table.ratings[loser] += table.k_factor * (0.0 - expected_l)
    table.matches_played[winner] += 1
    table.matches_played[loser] += 1
    table.history.append(match)
    return table


def _suggestion_text(idea: IdeaRecord) -> str:
    if idea.idea_title:
        return f"{idea.idea_title}. {idea.idea_body}" if idea.idea_body else idea.idea_title
    return idea.response.strip()


def build_match_prompt(
    idea_1: IdeaRecord,
    idea_2: IdeaRecord,
    papers_a1: list[str],
    papers_a2: list[str],
) -> str:
    """Instantiate the pairwise-ranking template for two slotted ideas."""
    if not papers_a1 or not papers_a2:
        raise ValueError("both evaluating researchers need paper titles for context")
    return load_template("rank_match").format(
        papers_a1=numbered_block(list(papers_a1), start=1, sep=":"),
        papers_a2=numbered_block(list(papers_a2), start=1, sep=":"),
        suggestion1=_suggestion_text(idea_1),
        suggestion2=_suggestion_text(idea_2),
    )


def judge_match(
    prompt: str,
    judge: JudgeClient,
    idea_1: str,
    idea_2: str,
    seed_position_swap: bool = False,
) -> MatchResult:
    """Ask the judge and parse the last RESULT: SUGGESTION token."""
    response = judge.complete(prompt)
    verdicts = _VERDICT_RE.findall(response)
    if not verdicts:
        raise InvalidMatchError(f"no verdict in response: {response[-120:]!r}")
    winner = int(verdicts[-1])
    return MatchResult(
        idea_1=idea_1,
        idea_2=idea_2,
        winner=winner,
        raw_response=response,
        seed_position_swap=seed_position_swap,
    )


def run_tournament(
    ideas: list[IdeaRecord],
    judge: JudgeClient,
    n_matches: int,
    seed: int = 0,
    papers_by_researcher: dict[str, list[str]] | None = None,
    k_factor: float = DEFAULT_K,
    initial_rating: float = INITIAL_RATING,
) -> EloTable:
    """Seeded tournament: uniform random pairs, randomized slot order.

    Updates apply sequentially in match order; invalid responses are
    discarded and counted. ``papers_by_researcher`` supplies each
    evaluating researcher's paper titles for prompt context.
    """
    if len(ideas) < 2:
        raise ValueError("a tournament needs at least two ideas")
    if n_matches < 1:
        raise ValueError("n_matches must be positive")
    papers_by_researcher = papers_by_researcher or {}
    table = EloTable.for_ideas([i.idea_id for i in ideas], k_factor, initial_rating)
    rng = np.random.default_rng(seed)
    for _ in range(n_matches):
        i, j = rng.choice(len(ideas), size=2, replace=False)
        swap = bool(rng.integers(2))
        slot1, slot2 = (ideas[j], ideas[i]) if swap else (ideas[i], ideas[j])
        prompt = build_match_prompt(
            slot1,
            slot2,
            papers_by_researcher.get(slot1.researcher_a, [slot1.idea_title or "untitled"]),
            papers_by_researcher.get(slot2.researcher_a, [slot2.idea_title or "untitled"]),
        )
        try:
            match = judge_match(prompt, judge, slot1.idea_id, slot2.idea_id, swap)
        except (InvalidMatchError, JudgeTransportError):
            table.discarded += 1
            continue
        elo_update(table, match)
    return table


def ranking_auc(table: EloTable, labels: dict[str, int]) -> float:
    """AUC of the ELO scores against binary labels keyed by idea id."""
    ids = sorted(labels)
    scores = [table.ratings[i] for i in ids]
    return models.auc(scores, [labels[i] for i in ids])


def auc_over_matches(
    idea_ids,
    history: list[MatchResult],
    labels: dict[str, int],
    step: int = 100,
    k_factor: float = DEFAULT_K,
    initial_rating: float = INITIAL_RATING,
) -> list[tuple[int, float]]:
    """Replay a match history, reporting ranking AUC every ``step`` matches."""
    table = EloTable.for_ideas(idea_ids, k_factor, initial_rating)
    points = []
    for n, match in enumerate(history, start=1):
        elo_update(table, match)
        if n % step == 0 or n == len(history):
            points.append((n, ranking_auc(table, labels)))
    return points


def save_matches(history: list[MatchResult], path: str | Path) -> None:
    """Append-only line-delimited match log."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for match in history:
            fh.write(json.dumps(match.__dict__, ensure_ascii=False) + "\n")


def load_matches(path: str | Path) -> list[MatchResult]:
    return [
        MatchResult(**json.loads(line))
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]


def export_ranking_csv(table: EloTable, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["idea_id", "elo", "matches_played"])
        for idea_id, rating in table.ranking():
            writer.writerow([idea_id, repr(rating), table.matches_played[idea_id]])
