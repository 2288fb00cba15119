"""Per-keyword confidence vectors and the co-occurrence graph.

Each keyword becomes a vector over the corpus photos (canonical sorted
photo_id order); two keywords are connected when the inner product of their
vectors is strictly greater than the edge threshold. Vectors are stored
sparse (photo index -> confidence) but behave as dense n-dimensional vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .ingest import PhotoCorpus

DEFAULT_EDGE_THRESHOLD = 0.1


@dataclass(frozen=True)
class KeywordVector:
    """Confidence-per-photo vector for one keyword.

    ``entries`` maps canonical photo index to confidence; absent photos are 0.
    """

    keyword: str
    n: int
    entries: Mapping[int, float]

    def dense(self) -> list[float]:
        return [self.entries.get(i, 0.0) for i in range(self.n)]

    def norm(self) -> float:
        # summed in ascending index order for run-to-run reproducibility
        total = 0.0
        for i in sorted(self.entries):
            total += self.entries[i] * self.entries[i]
        return math.sqrt(total)


def sparse_dot(u: KeywordVector, v: KeywordVector) -> float:
    """Inner product over shared photo indices, ascending index order."""
    a, b = u.entries, v.entries
    if len(b) < len(a):
        a, b = b, a
    total = 0.0
    for i in sorted(a):
        if i in b:
            total += a[i] * b[i]
    return total


def cosine(u: KeywordVector, v: KeywordVector) -> float:
    nu, nv = u.norm(), v.norm()
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return sparse_dot(u, v) / (nu * nv)


def build_vectors(corpus: PhotoCorpus) -> list[KeywordVector]:
    """One vector per retained keyword, coordinates in sorted photo_id order."""
    n = corpus.n
    entries: dict[str, dict[int, float]] = {k: {} for k in corpus.stats}
    for index, photo in enumerate(corpus.photos):
        for tag in photo.tags:
            entries[tag.keyword][index] = tag.confidence
    return [
        KeywordVector(keyword=k, n=n, entries=entries[k]) for k in sorted(entries)
    ]


@dataclass(frozen=True)
class KeywordGraph:
    """Undirected keyword graph with inner-product edge weights.

    ``edges`` keys are (a, b) keyword pairs with a < b lexicographically.
    """

    vertices: tuple[KeywordVector, ...]
    edges: Mapping[tuple[str, str], float]
    threshold: float

    def __post_init__(self) -> None:
        adjacency: dict[str, list[str]] = {v.keyword: [] for v in self.vertices}
        for a, b in self.edges:
            adjacency[a].append(b)
            adjacency[b].append(a)
        for neighbors in adjacency.values():
            neighbors.sort()
        object.__setattr__(self, "_adjacency", adjacency)
        object.__setattr__(
            self, "_by_keyword", {v.keyword: v for v in self.vertices}
        )

    @property
    def keywords(self) -> tuple[str, ...]:
        return tuple(v.keyword for v in self.vertices)

    def vector(self, keyword: str) -> KeywordVector:
        return self._by_keyword[keyword]  # type: ignore[attr-defined]

    def neighbors(self, keyword: str) -> tuple[str, ...]:
        return tuple(self._adjacency[keyword])  # type: ignore[attr-defined]

    def degree(self, keyword: str) -> int:
        if keyword not in self._adjacency:  # type: ignore[attr-defined]
            raise KeyError(f"unknown keyword: {keyword!r}")
        return len(self._adjacency[keyword])  # type: ignore[attr-defined]

    def weight(self, a: str, b: str) -> float:
        key = (a, b) if a < b else (b, a)
        return self.edges[key]


def build_graph(
    vectors: Sequence[KeywordVector],
    threshold: float = DEFAULT_EDGE_THRESHOLD,
) -> KeywordGraph:
    """Connect keyword pairs whose vector inner product exceeds ``threshold``.

    The inequality is strict: a product exactly at the threshold yields no
    edge. Accumulation happens photo by photo in canonical order, so weights
    are reproducible bit for bit.
    """
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    ordered = sorted(vectors, key=lambda v: v.keyword)
    dims = {v.n for v in ordered}
    if len(dims) > 1:
        raise ValueError(f"vectors have mismatched dimensions: {sorted(dims)}")
    n = dims.pop() if dims else 0

    # invert to per-photo tag lists so only co-occurring pairs are touched
    per_photo: dict[int, list[tuple[str, float]]] = {}
    for v in ordered:
        for index, confidence in v.entries.items():
            per_photo.setdefault(index, []).append((v.keyword, confidence))

    acc: dict[tuple[str, str], float] = {}
    for index in sorted(per_photo):
        tags = sorted(per_photo[index])
        for i in range(len(tags)):
            ka, ca = tags[i]
            for j in range(i + 1, len(tags)):
                kb, cb = tags[j]
                key = (ka, kb)
                acc[key] = acc.get(key, 0.0) + ca * cb

    edges = {pair: w for pair, w in acc.items() if w > threshold}
    return KeywordGraph(vertices=tuple(ordered), edges=edges, threshold=threshold)


def export_graph(graph: KeywordGraph) -> dict:
    """JSON-ready graph structure consumed by the tree layer and UI tooling."""
    return {
        "format_version": 1,
        "vertices": [v.keyword for v in graph.vertices],
        "edges": [
            {"a": a, "b": b, "w": w}
            for (a, b), w in sorted(graph.edges.items())
        ],
        "threshold": graph.threshold,
    }
