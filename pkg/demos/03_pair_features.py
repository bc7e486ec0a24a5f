#!/usr/bin/env python3
"""Per-pair feature vectors, researcher distances, and trend bins.

Builds researcher profiles, computes their semantic distances, fills the
full feature catalog for one concept pair, and runs the z-score +
equal-bin trend analysis over a batch of pairs.
"""

import numpy as np

from muse import synth
from muse.concepts import build_lexicon
from muse.corpus import filter_usable, parse_corpus
from muse.features import CATALOG, compute_pair_features, export_trends, trend_rows
from muse.ideation import select_pair_random
from muse.kgraph import build_graph
from muse.profiles import build_profile, make_pair

records, vocab, stopwords = synth.synth_corpus_records(n_papers=400, seed=3)
path = synth.write_corpus_file(records, "/tmp/muse_demo_corpus3.jsonl")
corpus = parse_corpus(path, cutoff_year=2023)
lexicon = build_lexicon(corpus, stopwords, min_df_2word=3, min_df_longer=2)
graph = build_graph(filter_usable(corpus, lexicon), lexicon)

by_id = {r.paper_id: r for r in corpus.records}
profiles = [
    build_profile(d["researcher_id"], [by_id[i] for i in d["paper_ids"]], lexicon)
    for d in synth.synth_researchers(records, n_researchers=4, seed=3)
]
for p in profiles:
    print(f"{p.researcher_id}: {len(p.papers)} recent papers, {len(p.concepts)} concepts")

snap = graph.snapshot(graph.cutoff_year)
pair = make_pair(profiles[0], profiles[1], snap)
print(f"\ndistances {profiles[0].researcher_id} vs {profiles[1].researcher_id}: "
      f"concept {pair.distance_concept:.3f}, neighborhood {pair.distance_neighborhood:.3f}")

c_a, c_b = select_pair_random(profiles[0].concepts, profiles[1].concepts, seed=0)
vec = compute_pair_features(c_a, c_b, graph, pair_ctx=pair)
print(f"\nfeature vector for ({c_a!r}, {c_b!r}), catalog {vec.catalog_version}:")
for fid, value in list(vec.as_dict().items())[:8]:
    print(f"  {fid:>24} = {value:.4f}")
print(f"  ... {len(CATALOG)} features total")

# trend analysis: z-score a feature, bin it, watch the interest means
rng = np.random.default_rng(0)
n = 600
feature = rng.normal(size=n)
interest = np.clip(np.round(3 + feature + 0.8 * rng.normal(size=n)), 1, 5)
rows = trend_rows({"demo_feature": feature}, interest, impact=rng.random(n), n_bins=20)
export_trends("/tmp/muse_demo_trends.csv", rows)
print("\nbin means for the 'all' subset (first five bins):")
for row in [r for r in rows if r["subset"] == "all"][:5]:
    print(f"  bin {row['bin']:2d}: feature {row['mean_feature']:+.3f} "
          f"interest {row['mean_interest']:.2f} +- {row['std_interest']:.2f}")
print("full table (all / top50 / top25) -> /tmp/muse_demo_trends.csv")
