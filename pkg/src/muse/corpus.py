"""Paper metadata ingestion and filtering.

Input is line-delimited JSON, one record per line, with fields
``paper_id``, ``title``, ``abstract``, ``year`` and ``citations_by_year``
(year string -> citation count). Unusable lines are skipped and tallied
instead of aborting the whole ingest; the file being unreadable at all is
fatal. A parsed corpus is immutable and sorted by (year, paper_id).
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path

from .matching import ConceptMatcher, normalize_text

__all__ = [
    "MIN_YEAR",
    "IngestError",
    "PaperRecord",
    "Corpus",
    "parse_corpus",
    "save_corpus",
    "filter_usable",
    "normalize_text",
]

MIN_YEAR = 1665  # earliest admissible publication year

_HEADER_SCHEMA = "muse.corpus/v1"


class IngestError(Exception):
    """Corpus file unreadable or structurally unusable."""


@dataclass(frozen=True)
class PaperRecord:
    """One publication with its per-year citation series.

    ``title`` and ``abstract`` are stored normalized. ``citations_by_year``
    maps calendar year -> citations received that year (all >= 0, never
    before the publication year).
    """

    paper_id: str
    title: str
    abstract: str
    year: int
    citations_by_year: dict[int, int]

    @property
    def text(self) -> str:
        """Title plus abstract, with a phrase boundary between them."""
        if self.abstract:
            return self.title + ". " + self.abstract
        return self.title

    def to_json(self) -> dict:
        return {
            "paper_id": self.paper_id,
            "title": self.title,
            "abstract": self.abstract,
            "year": self.year,
            "citations_by_year": {str(y): c for y, c in sorted(self.citations_by_year.items())},
        }


@dataclass(frozen=True)
class Corpus:
    """Immutable, (year, paper_id)-sorted collection of paper records."""

    records: tuple[PaperRecord, ...]
    cutoff_year: int
    source_label: str = ""
    skipped: int = 0
    skip_reasons: dict[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def _parse_record(obj: dict, cutoff_year: int | None, tallies: Counter) -> PaperRecord | None:
    paper_id = obj.get("paper_id")
    if not isinstance(paper_id, str) or not paper_id:
        tallies["missing_paper_id"] += 1
        return None
    title = normalize_text(obj.get("title") or "")
    if not title:
        tallies["missing_title"] += 1
        return None
    year = obj.get("year")
    if isinstance(year, bool) or not isinstance(year, int):
        tallies["missing_year"] += 1
        return None
    if year < MIN_YEAR or (cutoff_year is not None and year > cutoff_year):
        tallies["year_out_of_range"] += 1
        return None
    abstract = normalize_text(obj.get("abstract") or "")

    raw_cites = obj.get("citations_by_year")
    citations: dict[int, int] = {}
    if raw_cites is None:
        tallies["no_citation_data"] += 1
    elif isinstance(raw_cites, dict):
        for key, count in raw_cites.items():
            try:
                cite_year = int(key)
                count = int(count)
            except (TypeError, ValueError):
                tallies["bad_citation_entry"] += 1
                return None
            if count < 0:
                tallies["bad_citation_entry"] += 1
                return None
            if cite_year < year:
                # a paper cannot collect citations before it exists
                tallies["citation_before_publication"] += 1
                continue
            if count:
                citations[cite_year] = citations.get(cite_year, 0) + count
    else:
        tallies["bad_citation_entry"] += 1
        return None

    return PaperRecord(paper_id, title, abstract, year, citations)


def parse_corpus(
    path: str | Path,
    fmt: str = "jsonl",
    cutoff_year: int | None = None,
    source_label: str | None = None,
) -> Corpus:
    """Parse a line-delimited corpus file.

    Lines missing a usable paper_id, title, or year are skipped and
    tallied, as are duplicate ids and malformed JSON. ``cutoff_year``
    bounds admissible publication years; when omitted it defaults to the
    newest year seen (or a header value, for files written by
    :func:`save_corpus`).
    """
    if fmt != "jsonl":
        raise ValueError(f"unsupported corpus format: {fmt!r}")
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IngestError(f"cannot read corpus file {path}: {exc}") from exc

    tallies: Counter = Counter()
    header: dict = {}
    records: dict[str, PaperRecord] = {}
    for line in lines:
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            tallies["malformed_json"] += 1
            continue
        if not isinstance(obj, dict):
            tallies["malformed_json"] += 1
            continue
        if obj.get("schema") == _HEADER_SCHEMA:
            header = obj
            if cutoff_year is None:
                cutoff_year = header.get("cutoff_year")
            continue
        record = _parse_record(obj, cutoff_year, tallies)
        if record is None:
            continue
        if record.paper_id in records:
            tallies["duplicate_id"] += 1
            continue
        records[record.paper_id] = record

    ordered = tuple(sorted(records.values(), key=lambda r: (r.year, r.paper_id)))
    if cutoff_year is None:
        cutoff_year = max((r.year for r in ordered), default=MIN_YEAR)
    if source_label is None:
        source_label = header.get("source_label", path.name)

    # skip tallies exclude flags that kept the record
    flags = {"no_citation_data", "citation_before_publication"}
    skipped = sum(n for reason, n in tallies.items() if reason not in flags)
    if header:
        skipped += header.get("skipped", 0)
        for reason, n in header.get("skip_reasons", {}).items():
            tallies[reason] += n
    return Corpus(
        records=ordered,
        cutoff_year=cutoff_year,
        source_label=source_label,
        skipped=skipped,
        skip_reasons=dict(sorted(tallies.items())),
    )


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus with a header line; reload with :func:`parse_corpus`."""
    path = Path(path)
    header = {
        "schema": _HEADER_SCHEMA,
        "cutoff_year": corpus.cutoff_year,
        "source_label": corpus.source_label,
        "skipped": corpus.skipped,
        "skip_reasons": corpus.skip_reasons,
    }
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for record in corpus.records:
            fh.write(json.dumps(record.to_json(), ensure_ascii=False) + "\n")


def filter_usable(corpus: Corpus, lexicon) -> Corpus:
    """Keep records whose title+abstract mention at least two distinct concepts.

    ``lexicon`` is a ConceptLexicon or any iterable of concept phrases.
    """
    concepts = getattr(lexicon, "concepts", lexicon)
    concepts = set(concepts)
    if not concepts:
        raise ValueError("cannot filter against an empty lexicon")
    matcher = ConceptMatcher(concepts)
    kept = tuple(r for r in corpus.records if len(matcher.find(r.text)) >= 2)
    return replace(corpus, records=kept)
