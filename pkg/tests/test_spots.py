from __future__ import annotations

import json
import math
import random

import pytest
from hypothesis import given, strategies as st

from tagtour.spots import (
    EARTH_RADIUS_M,
    FixtureProvider,
    GeoPhoto,
    ProviderError,
    Spot,
    SpotParams,
    SpotQuery,
    aggregate_spots,
    count_nearby,
    haversine_m,
    keyword_relevance,
    rank_spots,
    search_spots,
)

from oracles import (
    brute_force_rank,
    brute_force_spot_clusters,
    gen_geo_photos,
    oracle_distance_m,
)


def _photo(pid, lat, lng, relevance=1.0, tags=("lake",), title=""):
    return GeoPhoto(pid, lat, lng, title or pid, tuple(tags), relevance)


# --- distance ----------------------------------------------------------------

def test_haversine_identical_points_is_zero():
    assert haversine_m((35.0, 139.0), (35.0, 139.0)) == 0.0


def test_haversine_antipodal_points():
    half_circumference = math.pi * EARTH_RADIUS_M
    assert haversine_m((0.0, 0.0), (0.0, 180.0)) == pytest.approx(half_circumference)
    assert haversine_m((90.0, 0.0), (-90.0, 0.0)) == pytest.approx(half_circumference)


def test_haversine_tokyo_to_osaka():
    # frozen from the independent atan2-form calculator (law of cosines agrees)
    distance = haversine_m((35.6762, 139.6503), (34.6937, 135.5023))
    assert distance == pytest.approx(
        oracle_distance_m((35.6762, 139.6503), (34.6937, 135.5023)), rel=1e-9
    )
    assert distance == pytest.approx(392_441.23, abs=1_000.0)


def test_haversine_symmetry_and_triangle_inequality():
    rng = random.Random(8)
    for _ in range(200):
        pts = [
            (rng.uniform(-89.0, 89.0), rng.uniform(-179.0, 179.0)) for _ in range(3)
        ]
        a, b, c = pts
        assert haversine_m(a, b) == haversine_m(b, a)
        ab, bc, ac = haversine_m(a, b), haversine_m(b, c), haversine_m(a, c)
        assert ac <= ab + bc + 1e-6 * max(1.0, ac)


# --- nearby counting ------------------------------------------------------------

def test_count_nearby_empty():
    assert count_nearby([], (42.0, 141.0), 300.0) == 0


def test_count_nearby_all_at_center():
    photos = [_photo(f"p{i}", 42.0, 141.0) for i in range(5)]
    assert count_nearby(photos, (42.0, 141.0), 300.0) == 5


def test_count_nearby_authored_fixture():
    center = (42.6080, 140.8390)
    near = [
        _photo("n1", 42.6080, 140.8390),
        _photo("n2", 42.6085, 140.8395),
        _photo("n3", 42.6076, 140.8385),
        _photo("n4", 42.6082, 140.8398),
        _photo("n5", 42.6078, 140.8382),
        _photo("n6", 42.6088, 140.8390),
    ]
    far = [
        _photo("f1", 42.7660, 141.3330),
        _photo("f2", 43.0000, 141.0000),
        _photo("f3", 42.6300, 140.8390),
        _photo("f4", 42.6080, 140.9000),
    ]
    for p in near:
        assert haversine_m((p.lat, p.lng), center) <= 300.0
    for p in far:
        assert haversine_m((p.lat, p.lng), center) > 300.0
    assert count_nearby(near + far, center, 300.0) == 6


def test_count_nearby_rejects_nonpositive_radius():
    with pytest.raises(ValueError):
        count_nearby([], (0.0, 0.0), 0.0)


# --- relevance -------------------------------------------------------------------

def test_keyword_relevance_fraction():
    assert keyword_relevance(["lake", "onsen"], ["lake", "water"], "morning") == 0.5
    assert keyword_relevance(["lake"], [], "Lake Toya shoreline") == 1.0
    assert keyword_relevance(["temple"], ["lake"], "water") == 0.0


# --- aggregation -----------------------------------------------------------------

def test_aggregate_empty_when_nothing_relevant():
    photos = [_photo(f"p{i}", 42.0, 141.0, relevance=0.1) for i in range(8)]
    assert aggregate_spots(photos) == []


def test_aggregate_single_dense_cluster():
    photos = [_photo(f"p{i}", 42.0, 141.0, relevance=1.0) for i in range(8)]
    spots = aggregate_spots(photos)
    assert len(spots) == 1
    assert spots[0].nearby_count == 8
    assert spots[0].relevance == 1.0
    assert spots[0].lat == pytest.approx(42.0)


def test_aggregate_two_cluster_fixture(provider_dir):
    provider = FixtureProvider(provider_dir)
    photos = provider.search_photos("Hokkaido", ["lake"])
    assert len(photos) == 15  # 7 near Toya, 6 near Shikotsu, 2 isolated
    spots = aggregate_spots(photos)
    assert [s.nearby_count for s in spots] == [7, 6]
    assert {s.spot_id for s in spots} == {"s000", "s001"}
    member_sets = [set(s.member_ids) for s in spots]
    assert member_sets[0] == {f"ht{i:02d}" for i in range(1, 8)}
    assert member_sets[1] == {f"hs{i:02d}" for i in range(1, 7)}


def test_aggregate_matches_brute_force_on_random_photo_sets():
    rng = random.Random(20250810)
    for _ in range(20):
        photos = gen_geo_photos(rng)
        radius = rng.choice([200.0, 300.0, 500.0])
        min_nearby = rng.choice([2, 5])
        min_relevance = rng.choice([0.0, 0.3, 0.5])
        got = aggregate_spots(photos, radius, min_nearby, min_relevance)
        expected = brute_force_spot_clusters(photos, radius, min_nearby, min_relevance)
        assert len(got) == len(expected)
        for spot, ref in zip(got, expected):
            assert spot.member_ids == ref["member_ids"]
            assert spot.nearby_count == ref["nearby_count"]
            assert spot.lat == ref["lat"]
            assert spot.lng == ref["lng"]
            assert spot.relevance == ref["relevance"]


def test_aggregate_promoted_spots_partition_their_photos():
    rng = random.Random(77)
    for _ in range(10):
        photos = gen_geo_photos(rng)
        spots = aggregate_spots(photos, min_nearby=2, min_relevance=0.0)
        seen: set[str] = set()
        for s in spots:
            ids = set(s.member_ids)
            assert not ids & seen
            seen |= ids


def test_aggregate_spots_respect_thresholds_post_hoc():
    rng = random.Random(123)
    for _ in range(10):
        photos = gen_geo_photos(rng)
        for s in aggregate_spots(photos):
            assert s.nearby_count >= 5
            assert s.relevance >= 0.5


# --- ranking ------------------------------------------------------------------------

def _spots_sample():
    return [
        Spot("sA", "A", 0, 0, nearby_count=7, relevance=0.8, review_score=4.0),
        Spot("sB", "B", 0, 0, nearby_count=6, relevance=0.9, review_score=None),
        Spot("sC", "C", 0, 0, nearby_count=6, relevance=0.9, review_score=4.5),
    ]


def test_rank_single_spot_under_every_mode():
    spot = [Spot("s0", "X", 0, 0, 5, 0.5, None)]
    for mode in ("review_score", "keyword_relevance", "photo_count"):
        assert rank_spots(spot, mode) == spot


def test_rank_photo_count_orders_by_nearby(provider_dir):
    provider = FixtureProvider(provider_dir)
    spots = aggregate_spots(provider.search_photos("Hokkaido", ["lake"]))
    ranked = rank_spots(spots, "photo_count")
    assert [s.nearby_count for s in ranked] == [7, 6]


def test_rank_missing_review_scores_sort_last():
    ranked = rank_spots(_spots_sample(), "review_score")
    assert [s.spot_id for s in ranked] == ["sC", "sA", "sB"]


def test_rank_relevance_ties_break_by_spot_id():
    ranked = rank_spots(_spots_sample(), "keyword_relevance")
    assert [s.spot_id for s in ranked] == ["sB", "sC", "sA"]


def test_rank_unknown_mode():
    with pytest.raises(ValueError):
        rank_spots([], "popularity")


@given(
    st.lists(
        st.tuples(
            st.integers(min_value=0, max_value=20),
            st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
            st.one_of(st.none(), st.floats(min_value=0.0, max_value=5.0, allow_nan=False)),
        ),
        max_size=12,
    ),
    st.sampled_from(["review_score", "keyword_relevance", "photo_count"]),
)
def test_rank_is_a_permutation_matching_the_reference(rows, mode):
    spots = [
        Spot(f"s{i:02d}", f"S{i}", 0, 0, nearby, relevance, review)
        for i, (nearby, relevance, review) in enumerate(rows)
    ]
    ranked = rank_spots(spots, mode)
    assert sorted(s.spot_id for s in ranked) == sorted(s.spot_id for s in spots)
    assert [s.spot_id for s in ranked] == [s.spot_id for s in brute_force_rank(spots, mode)]


# --- end-to-end pipeline ---------------------------------------------------------------

def test_search_spots_hokkaido_lake(provider_dir):
    provider = FixtureProvider(provider_dir)
    query = SpotQuery(region="Hokkaido", keywords=("lake",))
    ranked = search_spots(query, provider)
    assert [s.spot_id for s in ranked] == ["s000", "s001"]
    assert [s.nearby_count for s in ranked] == [7, 6]
    assert ranked[0].details is not None
    assert "Caldera lake" in ranked[0].details.description
    assert ranked[1].details is not None
    assert "caldera lake" in ranked[1].details.description


def test_search_spots_nothing_matches(provider_dir):
    provider = FixtureProvider(provider_dir)
    ranked = search_spots(SpotQuery(region="Hokkaido", keywords=("temple",)), provider)
    assert ranked == []


def test_search_spots_unknown_region_is_empty(provider_dir):
    provider = FixtureProvider(provider_dir)
    ranked = search_spots(SpotQuery(region="Atlantis", keywords=("lake",)), provider)
    assert ranked == []


def test_search_spots_place_mode_defaults_to_review_order(provider_dir):
    provider = FixtureProvider(provider_dir)
    query = SpotQuery(region="Hokkaido", keywords=("lake",), provider_mode="place_search")
    ranked = search_spots(query, provider)
    assert [s.spot_id for s in ranked] == ["p_toya", "p_shikotsu"]
    assert [s.review_score for s in ranked] == [4.5, 4.4]
    assert all(s.details is not None for s in ranked)


def test_search_spots_mountain_photos_below_min_nearby(provider_dir):
    provider = FixtureProvider(provider_dir)
    ranked = search_spots(SpotQuery(region="Hokkaido", keywords=("mountain",)), provider)
    assert ranked == []  # only 3 mountain photos, below the floor of 5


def test_search_spots_provider_failure_carries_identity(tmp_path):
    (tmp_path / "hokkaido.json").write_text("{not json", encoding="utf-8")
    provider = FixtureProvider(tmp_path)
    with pytest.raises(ProviderError) as err:
        search_spots(SpotQuery(region="Hokkaido", keywords=("lake",)), provider)
    assert err.value.provider == "fixture"


def test_search_spots_validates_query(provider_dir):
    provider = FixtureProvider(provider_dir)
    with pytest.raises(ValueError, match="region"):
        search_spots(SpotQuery(region="  ", keywords=("lake",)), provider)
    with pytest.raises(ValueError, match="keyword"):
        search_spots(SpotQuery(region="Hokkaido", keywords=("  ",)), provider)
    with pytest.raises(ValueError, match="provider mode"):
        search_spots(
            SpotQuery(region="Hokkaido", keywords=("lake",), provider_mode="teleport"),
            provider,
        )


def test_search_spots_limit_caps_results(provider_dir):
    provider = FixtureProvider(provider_dir)
    query = SpotQuery(region="Hokkaido", keywords=("lake",))
    ranked = search_spots(query, provider, SpotParams(limit=1))
    assert [s.spot_id for s in ranked] == ["s000"]


def test_fixture_provider_normalizes_region_name(provider_dir):
    provider = FixtureProvider(provider_dir)
    assert provider.search_photos("  HOKKAIDO ", ["lake"]) == provider.search_photos(
        "Hokkaido", ["lake"]
    )


def test_fixture_provider_missing_directory(tmp_path):
    with pytest.raises(ProviderError):
        FixtureProvider(tmp_path / "nope")


def test_full_pipeline_matches_brute_force_reference(provider_dir):
    provider = FixtureProvider(provider_dir)
    photos = provider.search_photos("Hokkaido", ["lake"])
    params = SpotParams()
    got = search_spots(SpotQuery(region="Hokkaido", keywords=("lake",)), provider, params)
    clusters = brute_force_spot_clusters(
        photos, params.radius_m, params.min_nearby, params.min_relevance
    )
    ref_spots = [
        Spot(
            spot_id=f"s{i:03d}",
            name=next(p.title for p in photos if p.photo_id == c["seed"]),
            lat=c["lat"],
            lng=c["lng"],
            nearby_count=c["nearby_count"],
            relevance=c["relevance"],
            member_ids=c["member_ids"],
        )
        for i, c in enumerate(clusters)
    ]
    expected = brute_force_rank(ref_spots, "keyword_relevance")[: params.limit]
    assert [(s.spot_id, s.nearby_count, s.lat, s.lng, s.relevance) for s in got] == [
        (s.spot_id, s.nearby_count, s.lat, s.lng, s.relevance) for s in expected
    ]
