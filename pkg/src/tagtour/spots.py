"""Sightseeing-spot retrieval from geotagged photo or place search.

The photo-search pipeline: fetch query-matching geotagged photos for a
region, cluster them greedily around the densest photo, promote clusters that
are both big enough and relevant enough into spots, rank, and fetch details.
The place-search pipeline asks the provider for place candidates directly and
ranks those. Providers are pluggable; the offline fixture provider is the
deterministic reference used by every test.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Protocol, Sequence

from .ingest import normalize_keyword

EARTH_RADIUS_M = 6_371_000.0

PROVIDER_MODES = ("photo_search", "place_search")
RANKING_MODES = ("review_score", "keyword_relevance", "photo_count")


class ProviderError(Exception):
    """A search provider failed; carries the provider's identity."""

    def __init__(self, provider: str, message: str) -> None:
        super().__init__(f"provider {provider!r}: {message}")
        self.provider = provider


@dataclass(frozen=True)
class GeoPhoto:
    """A geotagged photo returned by a photo-search provider."""

    photo_id: str
    lat: float
    lng: float
    title: str
    tags: tuple[str, ...]
    relevance: float


@dataclass(frozen=True)
class SpotDetails:
    description: str
    address: str | None = None
    url: str | None = None


@dataclass(frozen=True)
class Spot:
    """A candidate or promoted sightseeing place."""

    spot_id: str
    name: str
    lat: float
    lng: float
    nearby_count: int
    relevance: float
    review_score: float | None = None
    details: SpotDetails | None = None
    member_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class SpotQuery:
    region: str
    keywords: tuple[str, ...]
    provider_mode: str = "photo_search"
    ranking_mode: str | None = None  # None: review_score for places, else relevance

    def resolved_ranking(self) -> str:
        if self.ranking_mode is not None:
            return self.ranking_mode
        return "review_score" if self.provider_mode == "place_search" else "keyword_relevance"


@dataclass(frozen=True)
class SpotParams:
    radius_m: float = 300.0
    min_nearby: int = 5
    min_relevance: float = 0.5
    limit: int = 20


class Provider(Protocol):
    """Pluggable regional search backend."""

    name: str

    def search_photos(self, region: str, keywords: Sequence[str]) -> list[GeoPhoto]: ...

    def search_places(self, region: str, keywords: Sequence[str]) -> list[Spot]: ...

    def fetch_details(self, spot: Spot) -> SpotDetails: ...


def haversine_m(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Great-circle distance in meters between (lat, lng) points in degrees."""
    lat1, lng1 = math.radians(a[0]), math.radians(a[1])
    lat2, lng2 = math.radians(b[0]), math.radians(b[1])
    dlat = lat2 - lat1
    dlng = lng2 - lng1
    h = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlng / 2) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def count_nearby(
    photos: Sequence[GeoPhoto], center: tuple[float, float], radius_m: float
) -> int:
    """Photos within ``radius_m`` of the center (a photo at the center counts)."""
    if radius_m <= 0:
        raise ValueError(f"radius_m must be > 0, got {radius_m}")
    return sum(1 for p in photos if haversine_m((p.lat, p.lng), center) <= radius_m)


def keyword_relevance(
    keywords: Sequence[str], tags: Sequence[str], title: str = ""
) -> float:
    """Fraction of query keywords present among tags or title tokens."""
    if not keywords:
        return 0.0
    haystack = {normalize_keyword(t) for t in tags}
    haystack.update(normalize_keyword(tok) for tok in title.split())
    haystack.discard("")
    hits = sum(1 for k in keywords if normalize_keyword(k) in haystack)
    return hits / len(keywords)


def aggregate_spots(
    photos: Sequence[GeoPhoto],
    radius_m: float = 300.0,
    min_nearby: int = 5,
    min_relevance: float = 0.5,
) -> list[Spot]:
    """Greedy centroid clustering of geotagged photos into candidate spots.

    Repeatedly seeds on the unassigned photo with the most unassigned
    neighbors within ``radius_m`` (ties: smallest photo_id), assigns every
    unassigned photo in range, and promotes the cluster when it meets both
    the size and the mean-relevance thresholds.
    """
    if radius_m <= 0 or min_nearby <= 0:
        raise ValueError("radius_m and min_nearby must be positive")
    remaining = sorted(photos, key=lambda p: p.photo_id)
    spots: list[Spot] = []
    seq = 0
    while remaining:
        counts = [
            sum(
                1
                for q in remaining
                if haversine_m((p.lat, p.lng), (q.lat, q.lng)) <= radius_m
            )
            for p in remaining
        ]
        # remaining is photo_id-sorted and max() keeps the first maximum,
        # so count ties resolve to the smallest photo_id
        seed = remaining[max(range(len(remaining)), key=counts.__getitem__)]
        cluster = [
            q
            for q in remaining
            if haversine_m((seed.lat, seed.lng), (q.lat, q.lng)) <= radius_m
        ]
        assigned = {q.photo_id for q in cluster}
        remaining = [q for q in remaining if q.photo_id not in assigned]
        lat = sum(q.lat for q in cluster) / len(cluster)
        lng = sum(q.lng for q in cluster) / len(cluster)
        relevance = sum(q.relevance for q in cluster) / len(cluster)
        if len(cluster) >= min_nearby and relevance >= min_relevance:
            spots.append(
                Spot(
                    spot_id=f"s{seq:03d}",
                    name=seed.title or seed.photo_id,
                    lat=lat,
                    lng=lng,
                    nearby_count=len(cluster),
                    relevance=relevance,
                    member_ids=tuple(q.photo_id for q in cluster),
                )
            )
            seq += 1
    return spots


def rank_spots(spots: Sequence[Spot], mode: str) -> list[Spot]:
    """Order spots by the chosen mode; ties (and missing scores) by spot_id."""
    if mode not in RANKING_MODES:
        raise ValueError(f"unknown ranking mode: {mode!r}")
    if mode == "review_score":
        key = lambda s: (s.review_score is None, -(s.review_score or 0.0), s.spot_id)
    elif mode == "keyword_relevance":
        key = lambda s: (-s.relevance, s.spot_id)
    else:  # photo_count
        key = lambda s: (-s.nearby_count, s.spot_id)
    return sorted(spots, key=key)


def normalize_query(query: SpotQuery) -> SpotQuery:
    """Validate the query and canonicalize its keywords."""
    if not query.region.strip():
        raise ValueError("region must be non-empty")
    keywords = tuple(
        k for k in (normalize_keyword(kw) for kw in query.keywords) if k
    )
    if not keywords:
        raise ValueError("at least one non-empty keyword is required")
    if query.provider_mode not in PROVIDER_MODES:
        raise ValueError(f"unknown provider mode: {query.provider_mode!r}")
    ranking = query.resolved_ranking()
    if ranking not in RANKING_MODES:
        raise ValueError(f"unknown ranking mode: {ranking!r}")
    return replace(query, keywords=keywords)


def search_spots(
    query: SpotQuery,
    provider: Provider,
    params: SpotParams | None = None,
) -> list[Spot]:
    """Run the full retrieval pipeline for a region + keyword query.

    Photo mode: search photos, aggregate into spots, rank, fetch details for
    the capped result list. Place mode: search place candidates, rank, fetch
    details. Provider failures surface as ProviderError with no partial
    results; an empty list is a legitimate outcome.
    """
    params = params or SpotParams()
    query = normalize_query(query)

    def guarded(step: str, fn, *args):
        try:
            return fn(*args)
        except ProviderError:
            raise
        except Exception as exc:
            raise ProviderError(provider.name, f"{step} failed: {exc}") from exc

    if query.provider_mode == "photo_search":
        photos = guarded("search_photos", provider.search_photos, query.region, list(query.keywords))
        candidates = aggregate_spots(
            photos,
            radius_m=params.radius_m,
            min_nearby=params.min_nearby,
            min_relevance=params.min_relevance,
        )
    else:
        candidates = guarded("search_places", provider.search_places, query.region, list(query.keywords))

    ranked = rank_spots(candidates, query.resolved_ranking())[: params.limit]
    detailed = []
    for spot in ranked:
        details = guarded("fetch_details", provider.fetch_details, spot)
        detailed.append(replace(spot, details=details))
    return detailed


def export_spots(spots: Sequence[Spot]) -> list[dict]:
    """JSON-ready ranked spot list."""
    out = []
    for s in spots:
        out.append(
            {
                "spot_id": s.spot_id,
                "name": s.name,
                "lat": s.lat,
                "lng": s.lng,
                "nearby_count": s.nearby_count,
                "relevance": s.relevance,
                "review_score": s.review_score,
                "member_photo_ids": list(s.member_ids),
                "details": None
                if s.details is None
                else {
                    "description": s.details.description,
                    "address": s.details.address,
                    "url": s.details.url,
                },
            }
        )
    return out


class FixtureProvider:
    """Offline, deterministic provider backed by per-region JSON files.

    ``data_dir`` holds one ``<region>.json`` per region (region name
    lowercased, spaces collapsed to ``_``) shaped as::

        {"region": str,
         "photos": [{"photo_id", "lat", "lng", "title", "tags": [str, ...]}],
         "places": [{"spot_id", "name", "lat", "lng", "review_score",
                     "keywords": [str, ...],
                     "details": {"description", "address", "url"}}]}

    Photo relevance is the fraction of query keywords found among a photo's
    tags or title tokens; only photos and places matching at least one
    keyword are returned.
    """

    name = "fixture"
    DETAIL_MATCH_RADIUS_M = 500.0

    def __init__(self, data_dir: Path | str) -> None:
        self.data_dir = Path(data_dir)
        if not self.data_dir.is_dir():
            raise ProviderError(self.name, f"fixture directory not found: {self.data_dir}")

    def _region_payload(self, region: str) -> dict | None:
        slug = "_".join(normalize_keyword(region).split())
        path = self.data_dir / f"{slug}.json"
        if not path.is_file():
            return None
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ProviderError(self.name, f"fixture for {region!r} unreadable: {exc}") from exc
        if not isinstance(payload, Mapping):
            raise ProviderError(self.name, f"fixture for {region!r} must be an object")
        return dict(payload)

    def search_photos(self, region: str, keywords: Sequence[str]) -> list[GeoPhoto]:
        payload = self._region_payload(region)
        if payload is None:
            return []
        photos = []
        for item in payload.get("photos", []):
            tags = tuple(str(t) for t in item.get("tags", []))
            title = str(item.get("title", ""))
            relevance = keyword_relevance(keywords, tags, title)
            if relevance <= 0.0:
                continue
            photos.append(
                GeoPhoto(
                    photo_id=str(item["photo_id"]),
                    lat=float(item["lat"]),
                    lng=float(item["lng"]),
                    title=title,
                    tags=tags,
                    relevance=relevance,
                )
            )
        photos.sort(key=lambda p: p.photo_id)
        return photos

    def search_places(self, region: str, keywords: Sequence[str]) -> list[Spot]:
        payload = self._region_payload(region)
        if payload is None:
            return []
        places = []
        for item in payload.get("places", []):
            tags = tuple(str(t) for t in item.get("keywords", []))
            name = str(item.get("name", ""))
            relevance = keyword_relevance(keywords, tags, name)
            if relevance <= 0.0:
                continue
            places.append(
                Spot(
                    spot_id=str(item["spot_id"]),
                    name=name,
                    lat=float(item["lat"]),
                    lng=float(item["lng"]),
                    nearby_count=0,
                    relevance=relevance,
                    review_score=(
                        float(item["review_score"]) if item.get("review_score") is not None else None
                    ),
                )
            )
        places.sort(key=lambda s: s.spot_id)
        return places

    def fetch_details(self, spot: Spot) -> SpotDetails:
        # nearest fixture place within range lends its details to
        # photo-derived spots; otherwise synthesize a stable description
        best: tuple[float, str, dict] | None = None
        for path in sorted(self.data_dir.glob("*.json")):
            try:
                payload = json.loads(path.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError):
                continue
            for item in payload.get("places", []):
                if str(item.get("spot_id")) == spot.spot_id:
                    return self._details_of(item)
                d = haversine_m((spot.lat, spot.lng), (float(item["lat"]), float(item["lng"])))
                if d <= self.DETAIL_MATCH_RADIUS_M:
                    cand = (d, str(item.get("spot_id")), item)
                    if best is None or cand[:2] < best[:2]:
                        best = cand
        if best is not None:
            return self._details_of(best[2])
        return SpotDetails(
            description=f"{spot.name}: cluster of {spot.nearby_count} geotagged photos"
        )

    @staticmethod
    def _details_of(item: Mapping) -> SpotDetails:
        details = item.get("details", {})
        return SpotDetails(
            description=str(details.get("description", item.get("name", ""))),
            address=details.get("address"),
            url=details.get("url"),
        )


class RemotePlacesProvider:
    """Adapter for a hosted place-text-search HTTP API (not used in tests).

    Expects ``GET {endpoint}?query=<keywords in region>`` returning
    ``{"results": [{"place_id", "name", "geometry": {"location": {"lat",
    "lng"}}, "rating"}]}``.
    """

    name = "remote-places"

    def __init__(self, endpoint: str, api_key: str | None = None, timeout_s: float = 10.0) -> None:
        self.endpoint = endpoint
        self.api_key = api_key
        self.timeout_s = timeout_s

    def _get(self, params: dict) -> dict:
        import requests

        if self.api_key:
            params = {**params, "key": self.api_key}
        try:
            resp = requests.get(self.endpoint, params=params, timeout=self.timeout_s)
            resp.raise_for_status()
            return resp.json()
        except Exception as exc:
            raise ProviderError(self.name, str(exc)) from exc

    def search_photos(self, region: str, keywords: Sequence[str]) -> list[GeoPhoto]:
        raise ProviderError(self.name, "photo search is not supported by the places adapter")

    def search_places(self, region: str, keywords: Sequence[str]) -> list[Spot]:
        payload = self._get({"query": f"{' '.join(keywords)} in {region}"})
        places = []
        for item in payload.get("results", []):
            loc = item.get("geometry", {}).get("location", {})
            places.append(
                Spot(
                    spot_id=str(item.get("place_id", item.get("name", ""))),
                    name=str(item.get("name", "")),
                    lat=float(loc.get("lat", 0.0)),
                    lng=float(loc.get("lng", 0.0)),
                    nearby_count=0,
                    relevance=keyword_relevance(keywords, [], str(item.get("name", ""))),
                    review_score=float(item["rating"]) if item.get("rating") is not None else None,
                )
            )
        places.sort(key=lambda s: s.spot_id)
        return places

    def fetch_details(self, spot: Spot) -> SpotDetails:
        return SpotDetails(description=spot.name)


class RemotePhotosProvider:
    """Adapter for a hosted geotagged-photo-search HTTP API (not used in tests).

    Expects ``GET {endpoint}?text=<keywords>&region=<region>`` returning
    ``{"photos": [{"id", "latitude", "longitude", "title", "tags"}]}``.
    """

    name = "remote-photos"

    def __init__(self, endpoint: str, api_key: str | None = None, timeout_s: float = 10.0) -> None:
        self.endpoint = endpoint
        self.api_key = api_key
        self.timeout_s = timeout_s

    def search_photos(self, region: str, keywords: Sequence[str]) -> list[GeoPhoto]:
        import requests

        params = {"text": " ".join(keywords), "region": region}
        if self.api_key:
            params["key"] = self.api_key
        try:
            resp = requests.get(self.endpoint, params=params, timeout=self.timeout_s)
            resp.raise_for_status()
            payload = resp.json()
        except Exception as exc:
            raise ProviderError(self.name, str(exc)) from exc
        photos = []
        for item in payload.get("photos", []):
            tags = tuple(str(t) for t in item.get("tags", "").split())
            title = str(item.get("title", ""))
            photos.append(
                GeoPhoto(
                    photo_id=str(item["id"]),
                    lat=float(item["latitude"]),
                    lng=float(item["longitude"]),
                    title=title,
                    tags=tags,
                    relevance=keyword_relevance(keywords, tags, title),
                )
            )
        photos.sort(key=lambda p: p.photo_id)
        return photos

    def search_places(self, region: str, keywords: Sequence[str]) -> list[Spot]:
        raise ProviderError(self.name, "place search is not supported by the photos adapter")

    def fetch_details(self, spot: Spot) -> SpotDetails:
        return SpotDetails(
            description=f"{spot.name}: cluster of {spot.nearby_count} geotagged photos"
        )
