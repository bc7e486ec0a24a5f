"""muse: mine concept graphs from paper metadata, generate personalized
research-collaboration ideas, and predict which ones people will find
interesting."""

from .concepts import (
    ConceptLexicon,
    PhraseCandidate,
    build_lexicon,
    collect_candidates,
    finalize_lexicon,
    llm_filter,
    rake_extract,
    rule_cleanup,
    threshold_filter,
    whitelist_restore,
)
from .corpus import Corpus, PaperRecord, filter_usable, normalize_text, parse_corpus
from .features import (
    CATALOG,
    TOP25_FEATURE_IDS,
    FeatureVector,
    bin_aggregate,
    compute_pair_features,
    filter_top_impact,
    zscore,
)
from .ideation import (
    IdeaRecord,
    build_idea_prompt,
    generate_idea,
    select_pair_high_impact,
    select_pair_random,
)
from .judge import JudgeClient
from .kgraph import GraphSnapshot, KnowledgeGraph, build_graph, new_neighbors
from .models import (
    CvReport,
    InterestModel,
    LabeledExample,
    TrainingConfig,
    auc,
    mc_cross_validate,
    predict,
    roc_curve,
    select_top_features,
    topn_hit_probability,
    topn_precision,
    train_impact_proxy,
    train_interest_model,
)
from .profiles import (
    ResearcherProfile,
    SubgraphPair,
    build_profile,
    extract_researcher_concepts,
    refine_profile,
    semantic_distance_concepts,
    semantic_distance_neighborhood,
)
from .service import RatingEvent, Store, create_app
from .tournament import (
    EloTable,
    MatchResult,
    build_match_prompt,
    elo_expected,
    elo_update,
    judge_match,
    ranking_auc,
    run_tournament,
)

__version__ = "0.1.0"
