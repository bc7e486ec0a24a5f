#!/usr/bin/env python3
"""Build the co-occurrence graph and look at its time slices.

Shows degree growth over the years, new-neighbor counts, and the
PageRank ranking at the cutoff.
"""

from muse import synth
from muse.concepts import build_lexicon
from muse.corpus import filter_usable, parse_corpus
from muse.kgraph import build_graph, new_neighbors

records, vocab, stopwords = synth.synth_corpus_records(n_papers=400, seed=2)
path = synth.write_corpus_file(records, "/tmp/muse_demo_corpus2.jsonl")
corpus = parse_corpus(path, cutoff_year=2023)
lexicon = build_lexicon(corpus, stopwords, min_df_2word=3, min_df_longer=2)
usable = filter_usable(corpus, lexicon)
print(f"{len(usable)} of {len(corpus)} papers mention at least two concepts")

graph = build_graph(usable, lexicon)
print(f"graph: {len(graph.vertex_stats)} vertices, {len(graph.edges)} edges")

concept = max(graph.vertex_stats, key=lambda c: graph.snapshot(2023).degree(c))
print(f"\nbusiest concept: {concept!r}")
for year in range(2016, 2024):
    snap = graph.snapshot(year)
    print(f"  end of {year}: degree {snap.degree(concept):3d}, "
          f"papers {snap.papers_until(concept):3d}, "
          f"citations {snap.citations_until(concept):4d}")
print(f"  new neighbors 2021 -> 2023: {new_neighbors(graph, concept, 2021, 2023)}")

ranks = graph.snapshot(2023).pagerank()
print(f"\nPageRank sums to {sum(ranks.values()):.12f}; top five:")
for c in sorted(ranks, key=ranks.get, reverse=True)[:5]:
    print(f"  {ranks[c]:.5f}  {c}")
