"""Offline pipeline driver and service launcher.

Subcommands::

    tagtour build  MANIFEST [pipeline flags] --out DIR
    tagtour spots  TREE_FILE --region NAME (--keywords ... | --node ID ...)
                   [--provider fixture --provider-data DIR] [mode flags]
    tagtour serve  --config FILE

``build`` writes ``graph.json`` and ``tree.json``; ``spots`` writes
``spots.json``. Both use the same core as the HTTP service, so artifacts for
identical inputs and parameters are identical.

Exit codes: 0 success, 1 usage error, 2 data error, 3 provider error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .config import PipelineParams, ServiceConfig, validate_spot_params
from .ingest import CorpusError
from .pipeline import (
    canonical_json,
    graph_artifact,
    run_pipeline_from_manifest,
    tree_artifact,
    write_artifact,
)
from .spots import (
    RANKING_MODES,
    FixtureProvider,
    ProviderError,
    SpotParams,
    SpotQuery,
    export_spots,
    search_spots,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PROVIDER = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse variant that raises instead of exiting with its own code."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    defaults = PipelineParams()
    parser.add_argument("--threshold", type=float, default=defaults.threshold,
                        help="edge threshold on vector inner products (default %(default)s)")
    parser.add_argument("--min-appear", type=int, default=defaults.min_appear,
                        help="drop keywords seen in fewer photos (default %(default)s)")
    parser.add_argument("--alpha", type=float, default=defaults.alpha,
                        help="cosine weight in the clustering similarity (default %(default)s)")
    parser.add_argument("--merge-threshold", type=float, default=defaults.merge_threshold,
                        help="stop merging below this similarity (default %(default)s)")
    parser.add_argument("--key-quantile", type=float, default=defaults.key_quantile,
                        help="degree quantile for key-node separation (default %(default)s)")
    parser.add_argument("--key-min-degree", type=int, default=defaults.key_min_degree,
                        help="absolute degree floor for key nodes (default %(default)s)")
    parser.add_argument("--hub-min-edges", type=int, default=defaults.hub_min_edges,
                        help="root links needed (strictly more) to make a hub (default %(default)s)")
    parser.add_argument("--photos-per-node", type=int, default=defaults.photos_per_node,
                        help="photo nodes attached per tree node (default %(default)s)")
    parser.add_argument("--child-min-appear", type=int, default=defaults.child_min_appear,
                        help="appearance floor for expandable children (default %(default)s)")
    parser.add_argument("--score-mode", choices=("per_photo", "aggregate"),
                        default=defaults.score_mode,
                        help="photo scoring confidence source (default %(default)s)")


def _add_spot_flags(parser: argparse.ArgumentParser) -> None:
    defaults = SpotParams()
    parser.add_argument("--radius-m", type=float, default=defaults.radius_m,
                        help="clustering radius in meters (default %(default)s)")
    parser.add_argument("--min-nearby", type=int, default=defaults.min_nearby,
                        help="photos needed to promote a spot (default %(default)s)")
    parser.add_argument("--min-relevance", type=float, default=defaults.min_relevance,
                        help="mean relevance needed to promote a spot (default %(default)s)")
    parser.add_argument("--limit", type=int, default=defaults.limit,
                        help="maximum spots returned (default %(default)s)")


def _build_cli() -> _Parser:
    parser = _Parser(prog="tagtour", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="manifest -> graph.json + tree.json")
    p_build.add_argument("manifest", type=Path)
    _add_pipeline_flags(p_build)
    p_build.add_argument("--out", type=Path, default=Path("out"),
                         help="artifact directory (default %(default)s)")

    p_spots = sub.add_parser("spots", help="tree + region + keywords -> spots.json")
    p_spots.add_argument("tree_file", type=Path)
    p_spots.add_argument("--region", required=True)
    p_spots.add_argument("--keywords", nargs="+", default=[],
                         help="query keywords")
    p_spots.add_argument("--node", action="append", default=[],
                         help="tree node id whose representative joins the query (repeatable)")
    p_spots.add_argument("--provider", default="fixture",
                         help="search provider (default %(default)s)")
    p_spots.add_argument("--provider-data", type=Path,
                         help="fixture provider data directory")
    p_spots.add_argument("--provider-mode", choices=("photo_search", "place_search"),
                         default="photo_search")
    p_spots.add_argument("--ranking", choices=RANKING_MODES, default=None,
                         help="spot ordering (default: review_score for place search, "
                              "keyword_relevance otherwise)")
    _add_spot_flags(p_spots)
    p_spots.add_argument("--out", type=Path, default=Path("out"),
                         help="artifact directory (default %(default)s)")
    p_spots.add_argument("--top", type=int, default=5,
                         help="rows in the printed table (default %(default)s)")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--config", type=Path, required=True,
                         help="JSON service config (see README)")

    return parser


def _params_from_args(args: argparse.Namespace) -> PipelineParams:
    params = PipelineParams(
        threshold=args.threshold,
        min_appear=args.min_appear,
        alpha=args.alpha,
        merge_threshold=args.merge_threshold,
        key_quantile=args.key_quantile,
        key_min_degree=args.key_min_degree,
        hub_min_edges=args.hub_min_edges,
        photos_per_node=args.photos_per_node,
        child_min_appear=args.child_min_appear,
        score_mode=args.score_mode,
    )
    try:
        params.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return params


def cmd_build(args: argparse.Namespace) -> int:
    params = _params_from_args(args)
    result = run_pipeline_from_manifest(args.manifest, params)
    graph_path = args.out / "graph.json"
    tree_path = args.out / "tree.json"
    write_artifact(graph_path, graph_artifact(result))
    write_artifact(tree_path, tree_artifact(result))

    corpus, graph, tree = result.corpus, result.graph, result.tree
    clusters = {node.cluster.cluster_id for node in tree.nodes.values()}
    root_rep = tree.nodes[tree.root_id].representative if tree.nodes else "-"
    if corpus.n == 0:
        print("warning: empty corpus; the tree has no nodes", file=sys.stderr)
    print(
        f"summary: n={corpus.n} m={corpus.m} edges={len(graph.edges)} "
        f"clusters={len(clusters)} root={root_rep}"
    )
    print(f"wrote {graph_path}")
    print(f"wrote {tree_path}")
    return EXIT_OK


def _query_keywords(args: argparse.Namespace) -> list[str]:
    keywords: list[str] = []
    if args.node:
        try:
            payload = json.loads(args.tree_file.read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise CorpusError(f"tree file not found: {args.tree_file}") from exc
        except (OSError, json.JSONDecodeError) as exc:
            raise CorpusError(f"tree file unreadable: {exc}") from exc
        reps = {node["id"]: node["representative"] for node in payload.get("nodes", [])}
        for node_id in args.node:
            if node_id not in reps:
                raise CorpusError(f"node {node_id!r} not in {args.tree_file}")
            keywords.append(reps[node_id])
    keywords.extend(args.keywords)
    seen: set[str] = set()
    ordered = []
    for k in keywords:
        if k not in seen:
            seen.add(k)
            ordered.append(k)
    return ordered


def cmd_spots(args: argparse.Namespace) -> int:
    if args.provider != "fixture":
        raise UsageError(
            f"unknown provider: {args.provider!r} (this build ships 'fixture')"
        )
    if args.provider_data is None:
        raise UsageError("--provider-data is required for the fixture provider")
    spot_params = SpotParams(
        radius_m=args.radius_m,
        min_nearby=args.min_nearby,
        min_relevance=args.min_relevance,
        limit=args.limit,
    )
    try:
        validate_spot_params(spot_params)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    keywords = _query_keywords(args)
    if not keywords:
        raise UsageError("no query keywords: pass --keywords or --node")
    try:
        query = SpotQuery(
            region=args.region,
            keywords=tuple(keywords),
            provider_mode=args.provider_mode,
            ranking_mode=args.ranking,
        )
        provider = FixtureProvider(args.provider_data)
        ranked = search_spots(query, provider, spot_params)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    payload = export_spots(ranked)
    spots_path = args.out / "spots.json"
    write_artifact(spots_path, payload)

    print(f"{len(ranked)} spot(s) for region {args.region!r}, keywords {keywords}")
    for rank, spot in enumerate(ranked[: args.top], start=1):
        review = "-" if spot.review_score is None else f"{spot.review_score:.1f}"
        print(
            f"{rank:>3}. {spot.name}  [{spot.spot_id}]  "
            f"photos={spot.nearby_count} relevance={spot.relevance:.2f} review={review}"
        )
    print(f"wrote {spots_path}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    try:
        config = ServiceConfig.from_file(args.config)
    except FileNotFoundError as exc:
        raise CorpusError(f"config file not found: {args.config}") from exc
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad config: {exc}") from exc
    try:
        serve(config)
    except OSError as exc:
        raise CorpusError(f"cannot start service: {exc}") from exc
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_cli()
    try:
        args = parser.parse_args(argv)
        if args.command == "build":
            return cmd_build(args)
        if args.command == "spots":
            return cmd_spots(args)
        if args.command == "serve":
            return cmd_serve(args)
        raise UsageError(f"unknown command: {args.command}")
    except UsageError as exc:
        print(f"tagtour: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CorpusError as exc:
        print(f"tagtour: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ProviderError as exc:
        print(f"tagtour: provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except KeyboardInterrupt:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
