#!/usr/bin/env python3
"""Mine a concept lexicon from a synthetic paper corpus.

Walks the full refinement pipeline: RAKE candidates over titles and
abstracts, document-frequency thresholds, rule cleanup, an (offline)
LLM filter, and the final accounting check.
"""

from muse import synth
from muse.concepts import (
    build_lexicon,
    collect_candidates,
    rake_extract,
    rule_cleanup,
    threshold_filter,
)
from muse.corpus import parse_corpus
from muse.judge import JudgeClient

records, vocab, stopwords = synth.synth_corpus_records(n_papers=400, seed=1)
path = synth.write_corpus_file(records, "/tmp/muse_demo_corpus.jsonl")
corpus = parse_corpus(path, cutoff_year=2023)
print(f"corpus: {len(corpus)} records, {corpus.skipped} skipped")

# RAKE on a single document first, to see the scoring at work
doc = corpus.records[0]
print(f"\nfirst paper: {doc.title!r}")
for cand in sorted(rake_extract(doc.text, stopwords), key=lambda c: -c.rake_score)[:5]:
    print(f"  {cand.rake_score:5.1f}  {cand.phrase}")

# now the whole corpus
candidates = collect_candidates(corpus, stopwords)
print(f"\n{len(candidates)} distinct candidate phrases")
thresholded = threshold_filter(candidates, min_df_2word=3, min_df_longer=2)
print(f"{len(thresholded)} survive the document-frequency thresholds")
cleaned, removed = rule_cleanup(thresholded)
print(f"{removed} removed by cleanup rules, {len(cleaned)} left")

# the LLM filter runs against a deterministic offline judge here; point
# JudgeClient.http() at a real endpoint for live runs
judge = JudgeClient.from_callable(synth.scripted_judge(drop_every=11))
lexicon = build_lexicon(
    corpus, stopwords, judge=judge, min_df_2word=3, min_df_longer=2,
    whitelist=set(vocab["quantum"][:3]),
)
print("\nstage accounting:")
for stage, count in lexicon.stage_counts.items():
    print(f"  {stage:>22}: {count}")
print("\nsample concepts:", sorted(lexicon.concepts)[:6])
