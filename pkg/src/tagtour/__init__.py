"""tagtour: explore photo-recognition keywords as a tree, then find spots.

The pipeline turns a tagged photo corpus into a keyword co-occurrence graph,
clusters it with key-node separation, simplifies the clusters into an
explorable root/hub tree decorated with representative photos, and retrieves
ranked sightseeing spots for interactively selected keywords plus a region.
"""

from .config import PipelineParams, ServiceConfig
from .graph import KeywordGraph, KeywordVector, build_graph, build_vectors
from .ingest import (
    CorpusError,
    FixtureRecognizer,
    KeywordStats,
    MalformedRecordError,
    PhotoCorpus,
    PhotoRecord,
    RecognizerError,
    TagAssignment,
    compute_stats,
    filter_keywords,
    load_corpus,
    make_corpus,
    recognize,
)
from .pipeline import PipelineResult, run_pipeline, run_pipeline_from_manifest
from .spots import (
    FixtureProvider,
    GeoPhoto,
    ProviderError,
    Spot,
    SpotDetails,
    SpotParams,
    SpotQuery,
    aggregate_spots,
    count_nearby,
    haversine_m,
    rank_spots,
    search_spots,
)
from .tree import (
    Cluster,
    ExplorationTree,
    PhotoNode,
    TreeNode,
    build_tree,
    cluster_graph,
    detect_key_nodes,
    expand_node,
    find_nodes_by_keyword,
    score_photo,
    select_photo_nodes,
    select_representative,
)

__version__ = "0.1.0"
