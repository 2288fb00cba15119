"""Photo corpus loading, tag recognition, and per-keyword statistics.

A corpus manifest is a UTF-8 JSON array of photo objects::

    {"photo_id": str, "uri": str, "taken_at": ISO-8601 str (optional),
     "geo": {"lat": number, "lng": number} (optional),
     "tags": [{"keyword": str, "confidence": number}, ...]}

Keywords are normalized to lowercase with trimmed and collapsed whitespace so
the same recognized concept lines up across photos. Within one photo a
duplicate keyword keeps the maximum confidence; zero-confidence tags are
dropped because they carry no signal and would break the aggregate-stats
invariants downstream.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

_WS = re.compile(r"\s+")


class CorpusError(Exception):
    """A corpus manifest is missing, unreadable, or inconsistent."""


class MalformedRecordError(CorpusError):
    """A manifest record violates the documented schema.

    Carries the offending ``photo_id`` and field name so the caller can point
    at the exact input.
    """

    def __init__(self, photo_id: str, field: str, message: str) -> None:
        super().__init__(f"photo {photo_id!r}, field {field!r}: {message}")
        self.photo_id = photo_id
        self.field = field


class RecognizerError(Exception):
    """A recognizer is unavailable or produced an unusable response."""


def normalize_keyword(raw: str) -> str:
    """Lowercase, trim, and collapse internal whitespace."""
    return _WS.sub(" ", raw.strip()).lower()


@dataclass(frozen=True)
class TagAssignment:
    """One recognized keyword on one photo, with its confidence in [0, 1]."""

    keyword: str
    confidence: float


@dataclass(frozen=True)
class PhotoRecord:
    """One photo with its recognized tags and optional geo/time metadata.

    ``tags`` is sorted by keyword and holds at most one entry per keyword.
    """

    photo_id: str
    uri: str
    tags: tuple[TagAssignment, ...]
    taken_at: str | None = None
    geo: tuple[float, float] | None = None

    def tag_map(self) -> dict[str, float]:
        return {t.keyword: t.confidence for t in self.tags}


@dataclass(frozen=True)
class KeywordStats:
    keyword: str
    conf_total: float
    appear: int


@dataclass(frozen=True)
class PhotoCorpus:
    """Immutable photo collection plus precomputed per-keyword statistics.

    ``photos`` is sorted by photo_id; that ordering is the canonical
    coordinate order for all downstream vectors.
    """

    photos: tuple[PhotoRecord, ...]
    stats: Mapping[str, KeywordStats]

    @property
    def n(self) -> int:
        return len(self.photos)

    @property
    def m(self) -> int:
        return len(self.stats)

    def photo(self, photo_id: str) -> PhotoRecord:
        for p in self.photos:
            if p.photo_id == photo_id:
                return p
        raise KeyError(photo_id)


def normalize_tags(
    raw: Iterable[tuple[str, object]], *, photo_id: str
) -> tuple[TagAssignment, ...]:
    """Validate and canonicalize (keyword, confidence) pairs for one photo.

    Applies keyword normalization, enforces confidence in [0, 1], keeps the
    maximum confidence on duplicate keywords, and drops zero-confidence tags.
    """
    merged: dict[str, float] = {}
    for keyword_raw, confidence_raw in raw:
        if not isinstance(keyword_raw, str):
            raise MalformedRecordError(photo_id, "keyword", "must be a string")
        keyword = normalize_keyword(keyword_raw)
        if not keyword:
            raise MalformedRecordError(photo_id, "keyword", "empty after trimming")
        if isinstance(confidence_raw, bool) or not isinstance(confidence_raw, (int, float)):
            raise MalformedRecordError(photo_id, "confidence", "missing or not a number")
        confidence = float(confidence_raw)
        if not 0.0 <= confidence <= 1.0:
            raise MalformedRecordError(
                photo_id, "confidence", f"out of range [0, 1]: {confidence}"
            )
        if keyword not in merged or confidence > merged[keyword]:
            merged[keyword] = confidence
    return tuple(
        TagAssignment(k, c) for k, c in sorted(merged.items()) if c > 0.0
    )


def compute_stats(photos: Sequence[PhotoRecord]) -> dict[str, KeywordStats]:
    """Per-keyword appearance counts and confidence totals.

    Permutation-invariant over photo order: accumulation runs in sorted
    photo_id order regardless of the input ordering.
    """
    totals: dict[str, float] = {}
    counts: dict[str, int] = {}
    for photo in sorted(photos, key=lambda p: p.photo_id):
        for tag in photo.tags:
            totals[tag.keyword] = totals.get(tag.keyword, 0.0) + tag.confidence
            counts[tag.keyword] = counts.get(tag.keyword, 0) + 1
    return {
        k: KeywordStats(keyword=k, conf_total=totals[k], appear=counts[k])
        for k in sorted(counts)
    }


def make_corpus(photos: Iterable[PhotoRecord]) -> PhotoCorpus:
    """Assemble a corpus: sort photos canonically, reject duplicate ids."""
    ordered = sorted(photos, key=lambda p: p.photo_id)
    seen: set[str] = set()
    for p in ordered:
        if p.photo_id in seen:
            raise CorpusError(f"duplicate photo_id: {p.photo_id!r}")
        seen.add(p.photo_id)
    return PhotoCorpus(photos=tuple(ordered), stats=compute_stats(ordered))


class Recognizer(Protocol):
    """Source of raw recognition tags for a photo asset."""

    name: str

    def raw_tags(self, photo_id: str, uri: str) -> Sequence[Mapping[str, object]]:
        """Return raw tag objects ({"keyword": ..., "confidence": ...})."""
        ...


class FixtureRecognizer:
    """Deterministic recognizer backed by a sidecar JSON file.

    The sidecar maps photo_id to a tag array in the same shape as the
    manifest's "tags" field. A photo_id missing from the sidecar is treated
    as an unreadable asset; an explicit empty array means the recognizer saw
    nothing it could name.
    """

    name = "fixture"

    def __init__(self, sidecar_path: Path | str) -> None:
        path = Path(sidecar_path)
        if not path.is_file():
            raise RecognizerError(f"sidecar tag file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise RecognizerError(f"sidecar tag file unreadable: {exc}") from exc
        if not isinstance(data, dict):
            raise RecognizerError("sidecar tag file must map photo_id to tag arrays")
        self._tags: dict[str, list] = data

    def raw_tags(self, photo_id: str, uri: str) -> Sequence[Mapping[str, object]]:
        if photo_id not in self._tags:
            raise RecognizerError(f"asset unreadable: no sidecar entry for {photo_id!r}")
        entry = self._tags[photo_id]
        if not isinstance(entry, list):
            raise RecognizerError(f"sidecar entry for {photo_id!r} is not a tag array")
        return entry


class RemoteVisionRecognizer:
    """Adapter for a hosted vision-tagging HTTP API.

    Not exercised by the test suite; the fixture recognizer is authoritative.
    Expects the endpoint to accept ``POST {"uri": ...}`` and answer with
    ``{"tags": [{"keyword": ..., "confidence": ...}]}``.
    """

    name = "remote-vision"

    def __init__(self, endpoint: str, api_key: str | None = None, timeout_s: float = 10.0) -> None:
        self.endpoint = endpoint
        self.api_key = api_key
        self.timeout_s = timeout_s

    def raw_tags(self, photo_id: str, uri: str) -> Sequence[Mapping[str, object]]:
        import requests

        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        try:
            resp = requests.post(
                self.endpoint, json={"uri": uri}, headers=headers, timeout=self.timeout_s
            )
            resp.raise_for_status()
            payload = resp.json()
        except Exception as exc:
            raise RecognizerError(f"remote recognizer failed for {photo_id!r}: {exc}") from exc
        tags = payload.get("tags")
        if not isinstance(tags, list):
            raise RecognizerError(f"remote recognizer returned no tag array for {photo_id!r}")
        return tags


def recognize(photo_id: str, uri: str, recognizer: Recognizer) -> tuple[TagAssignment, ...]:
    """Obtain normalized tags for one photo asset via a recognizer."""
    raw = recognizer.raw_tags(photo_id, uri)
    pairs: list[tuple[str, object]] = []
    for item in raw:
        if not isinstance(item, Mapping) or "keyword" not in item:
            raise RecognizerError(f"recognizer response for {photo_id!r} has a malformed tag")
        if "confidence" not in item:
            raise RecognizerError(
                f"recognizer response for {photo_id!r} is missing a confidence"
            )
        pairs.append((item["keyword"], item["confidence"]))
    try:
        return normalize_tags(pairs, photo_id=photo_id)
    except MalformedRecordError as exc:
        raise RecognizerError(str(exc)) from exc


def _parse_taken_at(value: object, photo_id: str) -> str | None:
    if value is None:
        return None
    if not isinstance(value, str):
        raise MalformedRecordError(photo_id, "taken_at", "must be an ISO-8601 string")
    try:
        datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError as exc:
        raise MalformedRecordError(photo_id, "taken_at", f"not ISO-8601: {exc}") from exc
    return value


def _parse_geo(value: object, photo_id: str) -> tuple[float, float] | None:
    if value is None:
        return None
    if not isinstance(value, Mapping) or "lat" not in value or "lng" not in value:
        raise MalformedRecordError(photo_id, "geo", "must be an object with lat and lng")
    try:
        lat = float(value["lat"])  # type: ignore[arg-type]
        lng = float(value["lng"])  # type: ignore[arg-type]
    except (TypeError, ValueError) as exc:
        raise MalformedRecordError(photo_id, "geo", "lat/lng must be numbers") from exc
    if not -90.0 <= lat <= 90.0:
        raise MalformedRecordError(photo_id, "geo", f"lat out of range: {lat}")
    if not -180.0 <= lng <= 180.0:
        raise MalformedRecordError(photo_id, "geo", f"lng out of range: {lng}")
    return (lat, lng)


def load_corpus(path: Path | str, recognizer: Recognizer | None = None) -> PhotoCorpus:
    """Load a corpus manifest and compute its keyword statistics.

    Records without a "tags" field fall back to the recognizer when one is
    given; otherwise they are malformed.
    """
    manifest = Path(path)
    if not manifest.is_file():
        raise CorpusError(f"manifest not found: {manifest}")
    try:
        data = json.loads(manifest.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise CorpusError("manifest must be a JSON array of photo records")

    photos: list[PhotoRecord] = []
    for record in data:
        if not isinstance(record, Mapping):
            raise CorpusError("manifest entries must be objects")
        photo_id = record.get("photo_id")
        if not isinstance(photo_id, str) or not photo_id:
            raise MalformedRecordError(str(photo_id), "photo_id", "missing or empty")
        uri = record.get("uri")
        if not isinstance(uri, str) or not uri:
            raise MalformedRecordError(photo_id, "uri", "missing or empty")

        if "tags" in record:
            raw_tags = record["tags"]
            if not isinstance(raw_tags, list):
                raise MalformedRecordError(photo_id, "tags", "must be an array")
            pairs = []
            for item in raw_tags:
                if not isinstance(item, Mapping) or "keyword" not in item:
                    raise MalformedRecordError(photo_id, "tags", "tag without keyword")
                pairs.append((item["keyword"], item.get("confidence")))
            tags = normalize_tags(pairs, photo_id=photo_id)
        elif recognizer is not None:
            tags = recognize(photo_id, uri, recognizer)
        else:
            raise MalformedRecordError(photo_id, "tags", "missing and no recognizer given")

        photos.append(
            PhotoRecord(
                photo_id=photo_id,
                uri=uri,
                tags=tags,
                taken_at=_parse_taken_at(record.get("taken_at"), photo_id),
                geo=_parse_geo(record.get("geo"), photo_id),
            )
        )
    return make_corpus(photos)


def filter_keywords(corpus: PhotoCorpus, min_appear: int) -> PhotoCorpus:
    """Drop keywords appearing in fewer than ``min_appear`` photos.

    Photo count is unchanged; tags of dropped keywords disappear from every
    photo and the stats are recomputed from the filtered photos.
    """
    if min_appear < 1:
        raise ValueError(f"min_appear must be >= 1, got {min_appear}")
    if min_appear == 1:
        return corpus
    keep = {k for k, s in corpus.stats.items() if s.appear >= min_appear}
    photos = [
        PhotoRecord(
            photo_id=p.photo_id,
            uri=p.uri,
            tags=tuple(t for t in p.tags if t.keyword in keep),
            taken_at=p.taken_at,
            geo=p.geo,
        )
        for p in corpus.photos
    ]
    return PhotoCorpus(photos=tuple(photos), stats=compute_stats(photos))
