#!/usr/bin/env python3
"""Generate ideas in all three selection modes and rank them by ELO.

Runs fully offline: a deterministic scripted judge answers the
refinement, ideation, and pairwise-ranking prompts, and every exchange
is recorded to a transcript that could replay this run byte-for-byte.
"""

from muse import synth
from muse.concepts import build_lexicon
from muse.corpus import filter_usable, parse_corpus
from muse.ideation import generate_batch
from muse.judge import JudgeClient
from muse.kgraph import build_graph
from muse.models import TrainingConfig, train_impact_proxy
from muse.profiles import build_profile, make_pair
from muse.tournament import run_tournament

records, vocab, stopwords = synth.synth_corpus_records(n_papers=400, seed=5)
path = synth.write_corpus_file(records, "/tmp/muse_demo_corpus5.jsonl")
corpus = parse_corpus(path, cutoff_year=2023)
lexicon = build_lexicon(corpus, stopwords, min_df_2word=3, min_df_longer=2)
graph = build_graph(filter_usable(corpus, lexicon), lexicon)

judge = JudgeClient.from_callable(
    synth.scripted_judge(), transcript_path="/tmp/muse_demo_transcript.jsonl"
)
by_id = {r.paper_id: r for r in corpus.records}
profiles = [
    build_profile(d["researcher_id"], [by_id[i] for i in d["paper_ids"]], lexicon, judge=judge)
    for d in synth.synth_researchers(records, n_researchers=6, seed=5)
]
snap = graph.snapshot(graph.cutoff_year)
pairs = [
    make_pair(profiles[i], profiles[j], snap)
    for i in range(len(profiles))
    for j in range(i + 1, len(profiles))
]

impact = train_impact_proxy(graph, horizon_years=2, seed=0, config=TrainingConfig(epochs=60))
ideas = generate_batch(
    pairs,
    {"random_pair": 8, "high_impact_pair": 8, "no_pair": 4},
    judge,
    seed=0,
    graph=graph,
    impact=impact,
)
print(f"{len(ideas)} ideas generated:")
for idea in ideas[:4]:
    print(f"  [{idea.mode:>16}] {idea.idea_title}")

papers_ctx = {p.researcher_id: p.recent_titles() for p in profiles}
table = run_tournament(ideas, judge, n_matches=200, seed=1, papers_by_researcher=papers_ctx)
print(f"\ntournament: {len(table.history)} matches, {table.discarded} discarded")
print("top five by ELO:")
for idea_id, rating in table.ranking()[:5]:
    played = table.matches_played[idea_id]
    title = next(i.idea_title for i in ideas if i.idea_id == idea_id)
    print(f"  {rating:7.1f} ({played:2d} matches)  {title}")
