"""Rediscover missing web pages from lexical signatures of their backlinks."""
from .corpus import (
    DfCache,
    LiveFetcher,
    OfflineCorpus,
    PageRecord,
    RetryPolicy,
    df_lookup,
    fetch,
    load_corpus,
    save_corpus,
)
from .filters import FilterChain, FilterVerdict, detect_filetype, detect_soft404, jaccard, run_filter_chain
from .lexsig import (
    LexicalSignature,
    SignatureConfig,
    compute_signature,
    inverse_document_frequency,
    term_frequency,
    tokenize,
    truncate,
)
from .neighborhood import LinkNeighborhood, build_neighborhood, get_backlinks
from .render import RADII, NoLinkFoundError, extract_radius, mark_links, marker_for, render, render_for_target
from .search import Pipeline, bucket, dcg_star, ndcg, offline_rank, rediscover, search
from .sweep import SweepSpec, emit_report, report_from_log, run_sweep
from .synth import synthetic_corpus
from .uri import CanonicalUri, canonicalize, uri_equal

__version__ = "0.1.0"
