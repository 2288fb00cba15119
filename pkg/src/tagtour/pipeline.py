"""End-to-end pipeline shared by the CLI and the HTTP service.

One code path produces the graph and tree for both entry points, which is
what makes their JSON artifacts identical for identical inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .config import PipelineParams
from .graph import KeywordGraph, build_graph, build_vectors, export_graph
from .ingest import PhotoCorpus, filter_keywords, load_corpus
from .tree import (
    ExplorationTree,
    build_tree,
    cluster_graph,
    detect_key_nodes,
    export_tree,
    with_params,
)


@dataclass(frozen=True)
class PipelineResult:
    corpus: PhotoCorpus
    graph: KeywordGraph
    key_nodes: frozenset[str]
    tree: ExplorationTree


def run_pipeline(corpus: PhotoCorpus, params: PipelineParams) -> PipelineResult:
    """Ingest stats -> vectors -> graph -> clusters -> tree."""
    params.validate()
    corpus = filter_keywords(corpus, params.min_appear)
    vectors = build_vectors(corpus)
    graph = build_graph(vectors, threshold=params.threshold)
    key_nodes = detect_key_nodes(
        graph, key_quantile=params.key_quantile, key_min_degree=params.key_min_degree
    )
    clusters = cluster_graph(
        graph, key_nodes, alpha=params.alpha, merge_threshold=params.merge_threshold
    )
    if clusters:
        tree = build_tree(
            clusters,
            graph,
            corpus,
            hub_min_edges=params.hub_min_edges,
            photos_per_node=params.photos_per_node,
            score_mode=params.score_mode,
        )
    else:
        tree = ExplorationTree(nodes={}, root_id="", params={})
    return PipelineResult(
        corpus=corpus,
        graph=graph,
        key_nodes=frozenset(key_nodes),
        tree=with_params(tree, params.as_dict()),
    )


def run_pipeline_from_manifest(
    manifest: Path | str, params: PipelineParams
) -> PipelineResult:
    return run_pipeline(load_corpus(manifest), params)


def canonical_json(payload: object) -> str:
    """Stable serialization for artifacts: sorted keys, 2-space indent."""
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_artifact(path: Path, payload: object) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json(payload), encoding="utf-8")


def graph_artifact(result: PipelineResult) -> dict:
    return export_graph(result.graph)


def tree_artifact(result: PipelineResult) -> dict:
    return export_tree(result.tree)
