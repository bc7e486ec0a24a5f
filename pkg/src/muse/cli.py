"""The muse command line: ingest, concepts, graph, ideate, eval, rank,
serve, export, stats, train."""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from . import concepts as concepts_mod
from . import corpus as corpus_mod
from . import ideation as ideation_mod
from . import kgraph as kgraph_mod
from . import models as models_mod
from . import profiles as profiles_mod
from . import service as service_mod
from . import tournament as tournament_mod
from .judge import JudgeClient


def _judge_from_options(judge_url: str | None, transcript: str | None) -> JudgeClient | None:
    if transcript and judge_url:
        return JudgeClient.http(endpoint=judge_url, transcript_path=transcript)
    if transcript:
        return JudgeClient.replay(transcript)
    if judge_url:
        return JudgeClient.http(endpoint=judge_url)
    return None


@click.group()
def main():
    """Knowledge-graph mining, idea generation, and interest ranking."""


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--cutoff-year", type=int, required=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--source-label", default=None)
def ingest(in_path, cutoff_year, out_path, source_label):
    """Parse raw paper metadata into a normalized corpus file."""
    corpus = corpus_mod.parse_corpus(in_path, cutoff_year=cutoff_year, source_label=source_label)
    corpus_mod.save_corpus(corpus, out_path)
    click.echo(f"{len(corpus)} records, {corpus.skipped} skipped -> {out_path}")


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--stopwords", required=True, type=click.Path(exists=True))
@click.option("--whitelist", type=click.Path(exists=True), default=None)
@click.option("--rules", "rules_path", type=click.Path(exists=True), default=None)
@click.option("--blocklist", type=click.Path(exists=True), default=None)
@click.option("--judge", "judge_url", default=None)
@click.option("--transcript", default=None, type=click.Path())
@click.option("--min-df-2word", type=int, default=9, show_default=True)
@click.option("--min-df-longer", type=int, default=6, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def concepts(corpus_path, stopwords, whitelist, rules_path, blocklist, judge_url, transcript,
             min_df_2word, min_df_longer, out_path):
    """Build the refined concept lexicon from a corpus."""
    corpus = corpus_mod.parse_corpus(corpus_path)
    stop = set(Path(stopwords).read_text(encoding="utf-8").split())
    white = set(Path(whitelist).read_text(encoding="utf-8").splitlines()) if whitelist else set()
    block = set(Path(blocklist).read_text(encoding="utf-8").splitlines()) if blocklist else None
    rules = concepts_mod.DEFAULT_RULES
    if rules_path:
        rules = tuple(
            line.strip()
            for line in Path(rules_path).read_text(encoding="utf-8").splitlines()
            if line.strip() and not line.startswith("#")
        )
    judge = _judge_from_options(judge_url, transcript)
    lexicon = concepts_mod.build_lexicon(
        corpus, stop, judge=judge, whitelist=white, rules=rules, blocklist=block,
        min_df_2word=min_df_2word, min_df_longer=min_df_longer,
    )
    concepts_mod.save_lexicon(lexicon, out_path)
    click.echo(json.dumps(lexicon.stage_counts))


@main.group()
def graph():
    """Build, inspect, and export the knowledge graph."""


@graph.command("build")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--lexicon", "lexicon_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def graph_build(corpus_path, lexicon_path, out_path):
    corpus = corpus_mod.parse_corpus(corpus_path)
    lexicon = concepts_mod.load_lexicon(lexicon_path)
    usable = corpus_mod.filter_usable(corpus, lexicon)
    g = kgraph_mod.build_graph(usable, lexicon)
    kgraph_mod.save_graph(g, out_path)
    click.echo(f"{len(g.vertex_stats)} vertices, {len(g.edges)} edges -> {out_path}")


@graph.command("stats")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
def graph_stats(graph_path):
    g = kgraph_mod.load_graph(graph_path)
    snap = g.snapshot(g.cutoff_year)
    degrees = [snap.degree(c) for c in g.vertex_stats]
    click.echo(
        json.dumps(
            {
                "vertices": len(g.vertex_stats),
                "edges": len(g.edges),
                "cutoff_year": g.cutoff_year,
                "max_degree": max(degrees, default=0),
                "mean_degree": sum(degrees) / len(degrees) if degrees else 0.0,
            }
        )
    )


@graph.command("export-csv")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def graph_export_csv(graph_path, out_path):
    """Per-concept degree and PageRank at the cutoff year."""
    g = kgraph_mod.load_graph(graph_path)
    snap = g.snapshot(g.cutoff_year)
    ranks = snap.pagerank()
    with Path(out_path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["concept", "degree", "pagerank"])
        for concept in snap.concepts:
            writer.writerow([concept, snap.degree(concept), repr(ranks[concept])])
    click.echo(f"{len(ranks)} concepts -> {out_path}")


@main.command()
@click.option("--profiles", "profiles_path", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--lexicon", "lexicon_path", required=True, type=click.Path(exists=True))
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--mode", type=click.Choice(ideation_mod.MODES), required=True)
@click.option("--n", "n_ideas", type=int, required=True)
@click.option("--judge", "judge_url", default=None)
@click.option("--transcript", default=None, type=click.Path())
@click.option("--impact-horizon", type=int, default=2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def ideate(profiles_path, corpus_path, lexicon_path, graph_path, mode, n_ideas,
           judge_url, transcript, impact_horizon, seed, out_path):
    """Generate personalized research ideas for researcher pairs."""
    corpus = corpus_mod.parse_corpus(corpus_path)
    lexicon = concepts_mod.load_lexicon(lexicon_path)
    g = kgraph_mod.load_graph(graph_path)
    judge = _judge_from_options(judge_url, transcript)
    if judge is None:
        raise click.UsageError("ideation needs --judge or --transcript")
    descriptors = profiles_mod.load_profiles(profiles_path, corpus)
    profs = [
        profiles_mod.build_profile(d["researcher_id"], d["papers"], lexicon, judge=judge)
        for d in descriptors
    ]
    snap = g.snapshot(g.cutoff_year)
    pairs = [
        profiles_mod.make_pair(profs[i], profs[j], snap)
        for i in range(len(profs))
        for j in range(i + 1, len(profs))
    ]
    impact = None
    if mode == "high_impact_pair":
        impact = models_mod.train_impact_proxy(g, impact_horizon, seed=seed)
    ideas = ideation_mod.generate_batch(
        pairs, {mode: n_ideas}, judge, seed=seed, graph=g, impact=impact
    )
    ideation_mod.save_ideas(ideas, out_path)
    click.echo(f"{len(ideas)} ideas -> {out_path}")


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--epochs", type=int, default=200, show_default=True)
def train(data_path, out_path, seed, epochs):
    """Train the interest model on an exported training set."""
    examples = service_mod.load_training_csv(data_path)
    config = models_mod.TrainingConfig(epochs=epochs)
    model = models_mod.train_interest_model(examples, config=config, seed=seed)
    model.save(out_path)
    click.echo(f"trained on {len(examples)} examples -> {out_path}")


@main.command("eval")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--report", "report_path", required=True, type=click.Path())
@click.option("--max-n", type=int, default=20, show_default=True)
def eval_cmd(model_path, data_path, report_path, max_n):
    """ROC points, AUC, and top-N tables against a labeled export."""
    model = models_mod.InterestModel.load(model_path)
    examples = service_mod.load_training_csv(data_path)
    scores = models_mod.predict(model, [ex.values for ex in examples])
    labels = [ex.label for ex in examples]
    area = models_mod.auc(scores, labels)
    n_pos = sum(labels)
    with Path(report_path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["section", "x", "y", "extra"])
        writer.writerow(["auc", "", repr(area), ""])
        for fpr, tpr in models_mod.roc_curve(scores, labels):
            writer.writerow(["roc", repr(fpr), repr(tpr), ""])
        for n in range(1, min(max_n, len(labels)) + 1):
            writer.writerow(
                ["topn_precision", n, repr(models_mod.topn_precision(scores, labels, n)), ""]
            )
            writer.writerow(
                [
                    "topn_hit_probability",
                    n,
                    repr(models_mod.topn_hit_probability(scores, labels, n)),
                    repr(models_mod.random_hit_probability(len(labels), n_pos, n)),
                ]
            )
    click.echo(f"AUC {area:.4f} on {len(labels)} examples -> {report_path}")


@main.command()
@click.option("--ideas", "ideas_path", required=True, type=click.Path(exists=True))
@click.option("--matches", "n_matches", type=int, required=True)
@click.option("--k", "k_factor", type=float, default=32.0, show_default=True)
@click.option("--judge", "judge_url", default=None)
@click.option("--transcript", default=None, type=click.Path())
@click.option("--profiles", "profiles_path", type=click.Path(exists=True), default=None)
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--log", "log_path", type=click.Path(), default=None)
@click.option("--auc-curve", "curve_path", type=click.Path(), default=None,
              help="CSV of ranking AUC vs match count (ideas must carry ratings).")
def rank(ideas_path, n_matches, k_factor, judge_url, transcript, profiles_path,
         corpus_path, seed, out_path, log_path, curve_path):
    """Run a pairwise ELO tournament over generated ideas."""
    ideas = ideation_mod.load_ideas(ideas_path)
    judge = _judge_from_options(judge_url, transcript)
    if judge is None:
        raise click.UsageError("ranking needs --judge or --transcript")
    papers = {}
    if profiles_path:
        corpus = corpus_mod.parse_corpus(corpus_path) if corpus_path else None
        for d in profiles_mod.load_profiles(profiles_path, corpus):
            papers[d["researcher_id"]] = profiles_mod.recent_titles(d["papers"])
    table = tournament_mod.run_tournament(
        ideas, judge, n_matches, seed=seed, papers_by_researcher=papers, k_factor=k_factor
    )
    tournament_mod.export_ranking_csv(table, out_path)
    if log_path:
        tournament_mod.save_matches(table.history, log_path)
    if curve_path:
        labels = {i.idea_id: int(i.rating >= 4) for i in ideas if i.rating is not None}
        if len(set(labels.values())) < 2:
            raise click.UsageError("--auc-curve needs rated ideas of both classes")
        points = tournament_mod.auc_over_matches(
            [i.idea_id for i in ideas], table.history, labels,
            step=max(1, len(table.history) // 50),
        )
        with Path(curve_path).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["matches", "ranking_auc"])
            for n, value in points:
                writer.writerow([n, repr(value)])
    click.echo(
        f"{len(table.history)} matches ({table.discarded} discarded) -> {out_path}"
    )


@main.command()
@click.option("--store", "store_dir", required=True, type=click.Path())
@click.option("--addr", default="127.0.0.1:8781", show_default=True)
def serve(store_dir, addr):
    """Serve the rating API over HTTP."""
    host, _, port = addr.partition(":")
    service_mod.serve(store_dir, host=host or "127.0.0.1", port=int(port or 8781))


@main.command()
@click.option("--store", "store_dir", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", default=None, type=click.Path())
def export(store_dir, out_dir):
    """Write training.csv and sanity.csv from the store."""
    store = service_mod.Store(store_dir)
    result = store.export_training_set(out_dir)
    click.echo(
        f"{result['training_rows']} training rows, {result['sanity_rows']} sanity rows "
        f"-> {result['training_path']}"
    )


@main.command()
@click.option("--store", "store_dir", required=True, type=click.Path(exists=True))
@click.option("--rater", "rater_id", default=None)
def stats(store_dir, rater_id):
    """Rating histogram and per-mode counts."""
    store = service_mod.Store(store_dir)
    click.echo(json.dumps(store.stats(rater_id=rater_id), indent=1))


if __name__ == "__main__":
    sys.exit(main())
