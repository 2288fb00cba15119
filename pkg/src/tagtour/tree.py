"""Key-node separation, keyword clustering, and the exploration tree.

High-degree vertices (broad concepts that co-occur with many keywords) are
split off as singleton key clusters. The remaining vertices are grouped by
greedy average-linkage agglomeration over a blended similarity: vector cosine
mixed with the Jaccard overlap of non-key neighborhoods. The clusters are
then simplified into a tree: the cluster holding the highest-degree vertex
becomes the root, clusters strongly connected to it become hubs, and
everything else hangs off its best-connected placed neighbor.

Every ordering and tie-break is deterministic (lexicographic) so that the
same corpus and parameters always yield a byte-identical tree export.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Collection, Iterable, Mapping, Sequence

import numpy as np

from .graph import KeywordGraph, cosine, sparse_dot
from .ingest import KeywordStats, PhotoCorpus, PhotoRecord

SCORE_MODES = ("per_photo", "aggregate")


@dataclass(frozen=True)
class Cluster:
    """A set of keywords; key clusters are separated high-degree singletons."""

    cluster_id: str
    members: frozenset[str]
    is_key: bool = False


@dataclass(frozen=True)
class PhotoNode:
    """A representative photo attached to a tree node, with its summed score."""

    photo_id: str
    score: float
    node_id: str


@dataclass(frozen=True)
class TreeNode:
    node_id: str
    cluster: Cluster
    role: str  # "root" | "hub" | "child"
    parent: str | None
    children: tuple[str, ...]
    representative: str
    representative_appear: int
    photo_nodes: tuple[PhotoNode, ...]


@dataclass(frozen=True)
class ExplorationTree:
    """Immutable tree over keyword clusters, ready to serve and export."""

    nodes: Mapping[str, TreeNode]
    root_id: str
    params: Mapping[str, object]

    def depth(self, node_id: str) -> int:
        node = self.nodes[node_id]
        depth = 0
        while node.parent is not None:
            node = self.nodes[node.parent]
            depth += 1
        return depth


def detect_key_nodes(
    graph: KeywordGraph,
    key_quantile: float = 0.95,
    key_min_degree: int = 3,
) -> set[str]:
    """High-degree vertices to separate from clusters.

    A vertex qualifies when its degree reaches both the ``key_quantile``-th
    quantile of all degrees (linear interpolation) and the absolute
    ``key_min_degree`` floor.
    """
    if not 0.0 < key_quantile <= 1.0:
        raise ValueError(f"key_quantile must be in (0, 1], got {key_quantile}")
    if key_min_degree < 0:
        raise ValueError(f"key_min_degree must be >= 0, got {key_min_degree}")
    if not graph.vertices:
        return set()
    degrees = [graph.degree(k) for k in graph.keywords]
    cutoff = max(float(key_min_degree), float(np.quantile(degrees, key_quantile)))
    return {k for k in graph.keywords if graph.degree(k) >= cutoff}


def blended_similarity(
    graph: KeywordGraph,
    u: str,
    v: str,
    key_nodes: Collection[str],
    alpha: float = 0.5,
) -> float:
    """alpha * cosine(vectors) + (1 - alpha) * Jaccard(non-key neighborhoods).

    Key nodes are excluded from both neighborhoods so two keywords are not
    deemed similar merely for sharing a hub neighbor; two empty neighborhoods
    score a Jaccard of 0.
    """
    cos = cosine(graph.vector(u), graph.vector(v))
    keys = set(key_nodes)
    nu = set(graph.neighbors(u)) - keys
    nv = set(graph.neighbors(v)) - keys
    union = len(nu | nv)
    jac = len(nu & nv) / union if union else 0.0
    return alpha * cos + (1.0 - alpha) * jac


def cluster_graph(
    graph: KeywordGraph,
    key_nodes: Collection[str],
    alpha: float = 0.5,
    merge_threshold: float = 0.3,
) -> list[Cluster]:
    """Partition the vertex set into key singletons and merged groups.

    Non-key vertices start as singletons and are merged greedily under
    average linkage while the best pair's blended similarity is at least
    ``merge_threshold``. Ties pick the lexicographically smallest pair of
    cluster anchors (anchor = smallest member).
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    vertex_set = set(graph.keywords)
    keys = set(key_nodes)
    unknown = keys - vertex_set
    if unknown:
        raise ValueError(f"key nodes not in graph: {sorted(unknown)}")

    rest = [k for k in graph.keywords if k not in keys]

    # base pairwise similarities between singletons, then Lance-Williams
    # average-linkage updates as clusters grow
    norms = {k: graph.vector(k).norm() for k in rest}
    neighborhoods = {k: set(graph.neighbors(k)) - keys for k in rest}
    members: dict[str, list[str]] = {k: [k] for k in rest}
    sims: dict[tuple[str, str], float] = {}
    for i, u in enumerate(rest):
        for v in rest[i + 1 :]:
            cos = 0.0
            if norms[u] > 0.0 and norms[v] > 0.0:
                cos = sparse_dot(graph.vector(u), graph.vector(v)) / (norms[u] * norms[v])
            nu, nv = neighborhoods[u], neighborhoods[v]
            union = len(nu | nv)
            jac = len(nu & nv) / union if union else 0.0
            sims[(u, v)] = alpha * cos + (1.0 - alpha) * jac

    while len(members) > 1:
        best_pair: tuple[str, str] | None = None
        best_sim = float("-inf")
        for pair, sim in sims.items():
            if sim > best_sim or (sim == best_sim and (best_pair is None or pair < best_pair)):
                best_sim = sim
                best_pair = pair
        if best_pair is None or best_sim < merge_threshold:
            break
        a, b = best_pair  # a < b, so a stays the merged cluster's anchor
        size_a, size_b = len(members[a]), len(members[b])
        for c in list(members):
            if c in (a, b):
                continue
            key_ac = (a, c) if a < c else (c, a)
            key_bc = (b, c) if b < c else (c, b)
            merged = (size_a * sims[key_ac] + size_b * sims[key_bc]) / (size_a + size_b)
            sims[key_ac] = merged
            del sims[key_bc]
        del sims[(a, b)]
        members[a] = sorted(members[a] + members[b])
        del members[b]

    groups: list[tuple[str, frozenset[str], bool]] = []
    for k in sorted(keys):
        groups.append((k, frozenset([k]), True))
    for anchor in sorted(members):
        groups.append((anchor, frozenset(members[anchor]), False))
    groups.sort(key=lambda g: g[0])
    return [
        Cluster(cluster_id=f"c{i:04d}", members=m, is_key=is_key)
        for i, (_, m, is_key) in enumerate(groups)
    ]


def select_representative(
    members: Collection[str], stats: Mapping[str, KeywordStats]
) -> str:
    """The member appearing in the most photos.

    Ties fall back to higher confidence total, then the lexicographically
    smaller keyword.
    """
    if not members:
        raise ValueError("cannot pick a representative from an empty cluster")
    return min(
        members,
        key=lambda k: (-stats[k].appear, -stats[k].conf_total, k),
    )


def score_photo(
    photo: PhotoRecord,
    members: Collection[str],
    stats: Mapping[str, KeywordStats],
    score_mode: str = "per_photo",
) -> float:
    """Summed keyword score of a photo against a node's members.

    Each shared keyword contributes confidence / appearance-count; in
    ``per_photo`` mode the confidence is the photo's own, in ``aggregate``
    mode it is the keyword's corpus-wide confidence total. Contributions are
    summed in sorted keyword order.
    """
    if score_mode not in SCORE_MODES:
        raise ValueError(f"unknown score_mode: {score_mode!r}")
    tag_map = photo.tag_map()
    shared = sorted(k for k in members if k in tag_map)
    if not shared:
        raise ValueError(f"photo {photo.photo_id!r} shares no keyword with the node")
    total = 0.0
    for k in shared:
        conf = tag_map[k] if score_mode == "per_photo" else stats[k].conf_total
        total += conf / stats[k].appear
    return total


def select_photo_nodes(
    node_id: str,
    members: Collection[str],
    corpus: PhotoCorpus,
    photos_per_node: int = 4,
    score_mode: str = "per_photo",
) -> list[PhotoNode]:
    """The highest-scoring photos for a node, descending score.

    Ties order by photo_id; photos sharing no member (or scoring 0) are
    skipped, and fewer than ``photos_per_node`` results is fine.
    """
    member_set = set(members)
    scored: list[tuple[float, str]] = []
    for photo in corpus.photos:
        if member_set.isdisjoint(photo.tag_map()):
            continue
        score = score_photo(photo, members, corpus.stats, score_mode)
        if score > 0.0:
            scored.append((score, photo.photo_id))
    scored.sort(key=lambda t: (-t[0], t[1]))
    return [
        PhotoNode(photo_id=pid, score=score, node_id=node_id)
        for score, pid in scored[:photos_per_node]
    ]


def _cross_edge_counts(
    graph: KeywordGraph, cluster_of: Mapping[str, str]
) -> dict[tuple[str, str], int]:
    counts: dict[tuple[str, str], int] = {}
    for a, b in graph.edges:
        ca, cb = cluster_of[a], cluster_of[b]
        if ca == cb:
            continue
        key = (ca, cb) if ca < cb else (cb, ca)
        counts[key] = counts.get(key, 0) + 1
    return counts


def build_tree(
    clusters: Sequence[Cluster],
    graph: KeywordGraph,
    corpus: PhotoCorpus,
    hub_min_edges: int = 2,
    photos_per_node: int = 4,
    score_mode: str = "per_photo",
) -> ExplorationTree:
    """Simplify clusters into a root/hub/child tree with photo nodes.

    The root is the cluster holding the globally highest-degree vertex (ties:
    larger cluster, then lexicographic representative). Clusters joined to
    the root by strictly more than ``hub_min_edges`` inter-cluster edges
    become hubs; the rest attach beneath their best-connected placed neighbor
    (maximum-spanning-tree order), and clusters with no path to the root
    hang directly under it.
    """
    if not clusters:
        raise ValueError("empty cluster list")
    cluster_of: dict[str, str] = {}
    for cluster in clusters:
        if not cluster.members:
            raise ValueError(f"cluster {cluster.cluster_id} has no members")
        for k in cluster.members:
            if k in cluster_of:
                raise ValueError(f"keyword {k!r} appears in two clusters")
            cluster_of[k] = cluster.cluster_id
    missing = set(graph.keywords) - set(cluster_of)
    if missing:
        raise ValueError(f"clusters do not cover vertices: {sorted(missing)}")

    stats = corpus.stats
    by_cid = {c.cluster_id: c for c in clusters}
    reps = {c.cluster_id: select_representative(c.members, stats) for c in clusters}
    # node ids follow the sorted representatives so exports are reproducible
    ordered_cids = sorted(by_cid, key=lambda cid: reps[cid])
    node_id_of = {cid: f"n{i:04d}" for i, cid in enumerate(ordered_cids)}

    max_degree = max(graph.degree(k) for k in graph.keywords)
    root_candidates = [
        cid
        for cid in ordered_cids
        if any(graph.degree(k) == max_degree for k in by_cid[cid].members)
    ]
    root_cid = min(
        root_candidates, key=lambda cid: (-len(by_cid[cid].members), reps[cid])
    )

    cross = _cross_edge_counts(graph, cluster_of)

    def w(cid_a: str, cid_b: str) -> int:
        key = (cid_a, cid_b) if cid_a < cid_b else (cid_b, cid_a)
        return cross.get(key, 0)

    parent: dict[str, str | None] = {root_cid: None}
    role: dict[str, str] = {root_cid: "root"}
    placed: list[str] = [root_cid]
    for cid in ordered_cids:
        if cid != root_cid and w(root_cid, cid) > hub_min_edges:
            parent[cid] = root_cid
            role[cid] = "hub"
            placed.append(cid)

    unplaced = [cid for cid in ordered_cids if cid not in role]
    while unplaced:
        best: tuple[int, str, str] | None = None  # (w, child_nid, parent_nid)
        best_pair: tuple[str, str] | None = None
        for cid in unplaced:
            for pid in placed:
                weight = w(cid, pid)
                if weight <= 0:
                    continue
                cand = (-weight, node_id_of[cid], node_id_of[pid])
                if best is None or cand < best:
                    best = cand
                    best_pair = (cid, pid)
        if best_pair is None:
            break
        child_cid, parent_cid = best_pair
        parent[child_cid] = parent_cid
        role[child_cid] = "child"
        placed.append(child_cid)
        unplaced.remove(child_cid)

    # clusters with no connection to anything placed hang under the root
    for cid in unplaced:
        parent[cid] = root_cid
        role[cid] = "child"
        placed.append(cid)

    children: dict[str, list[str]] = {cid: [] for cid in ordered_cids}
    for cid, pid in parent.items():
        if pid is not None:
            children[pid].append(node_id_of[cid])

    nodes: dict[str, TreeNode] = {}
    for cid in ordered_cids:
        nid = node_id_of[cid]
        cluster = by_cid[cid]
        rep = reps[cid]
        nodes[nid] = TreeNode(
            node_id=nid,
            cluster=cluster,
            role=role[cid],
            parent=node_id_of[parent[cid]] if parent[cid] is not None else None,
            children=tuple(sorted(children[cid])),
            representative=rep,
            representative_appear=stats[rep].appear,
            photo_nodes=tuple(
                select_photo_nodes(nid, cluster.members, corpus, photos_per_node, score_mode)
            ),
        )

    params = {
        "hub_min_edges": hub_min_edges,
        "photos_per_node": photos_per_node,
        "score_mode": score_mode,
    }
    return ExplorationTree(nodes=nodes, root_id=node_id_of[root_cid], params=params)


def with_params(tree: ExplorationTree, params: Mapping[str, object]) -> ExplorationTree:
    """Copy of the tree with its exported parameter block replaced."""
    return replace(tree, params=dict(params))


def expand_node(
    tree: ExplorationTree, node_id: str, child_min_appear: int = 5
) -> list[TreeNode]:
    """Child nodes whose representative appears often enough to show.

    Read-only and idempotent; which children a client has revealed is a view
    concern, not tree state.
    """
    if node_id not in tree.nodes:
        raise KeyError(f"unknown node: {node_id!r}")
    node = tree.nodes[node_id]
    return [
        tree.nodes[child_id]
        for child_id in node.children
        if tree.nodes[child_id].representative_appear >= child_min_appear
    ]


def find_nodes_by_keyword(tree: ExplorationTree, text: str) -> list[str]:
    """Nodes with any member containing ``text`` (case-insensitive substring),
    ordered by tree depth then node id."""
    needle = text.lower()
    hits = [
        (tree.depth(nid), nid)
        for nid, node in tree.nodes.items()
        if any(needle in member for member in node.cluster.members)
    ]
    hits.sort()
    return [nid for _, nid in hits]


def export_tree(tree: ExplorationTree) -> dict:
    """JSON-ready tree structure rendered by the UI."""
    return {
        "format_version": 1,
        "nodes": [
            {
                "id": node.node_id,
                "role": node.role,
                "members": sorted(node.cluster.members),
                "representative": node.representative,
                "parent": node.parent,
                "children": list(node.children),
                "photo_nodes": [
                    {"photo_id": pn.photo_id, "score": pn.score}
                    for pn in node.photo_nodes
                ],
            }
            for node in (tree.nodes[nid] for nid in sorted(tree.nodes))
        ],
        "params": dict(tree.params),
    }
