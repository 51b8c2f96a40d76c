import json
import math

import numpy as np
import pytest

from mallsim.errors import (
    CyclicHierarchy,
    DanglingReference,
    NoRoute,
    UnknownConcept,
    UnsupportedLanguage,
)
from mallsim.semantic_map import (
    RouteConstraints,
    compute_route,
    guidance_acts,
    load_map,
    resolve_place,
    verbalize_route,
)

from .oracles import route_oracle


def test_minimall_loads(minimall):
    assert sorted(minimall.places) == ["cafe", "shoe_shop", "toy_shop"]
    assert sorted(minimall.access_points) == ["esc_1", "opening_1", "stairs_1"]
    assert sorted(minimall.regions) == ["corridor", "floor2", "square"]


def test_dangling_concept_parent():
    doc = {"concepts": {"ShoeShop": {"parents": ["Shop"]}},
           "regions": [], "places": [], "access_points": []}
    with pytest.raises(DanglingReference):
        load_map(doc)


def test_cyclic_hierarchy():
    doc = {"concepts": {"A": {"parents": ["B"]}, "B": {"parents": ["A"]}},
           "regions": [], "places": [], "access_points": []}
    with pytest.raises(CyclicHierarchy):
        load_map(doc)


def test_place_validation(minimall_doc):
    doc = json.loads(minimall_doc)
    doc["places"][0]["region"] = "nowhere"
    with pytest.raises(DanglingReference):
        load_map(doc)
    doc = json.loads(minimall_doc)
    doc["places"][0]["footprint"] = [[0, 0], [1, 0]]
    with pytest.raises(Exception):
        load_map(doc)


def test_is_a(minimall):
    assert minimall.is_a("Shop", "Shop")
    assert minimall.is_a("ShoeShop", "Shop")
    assert minimall.is_a("ShoeShop", "Place")
    assert not minimall.is_a("Shop", "ShoeShop")
    with pytest.raises(UnknownConcept):
        minimall.is_a("Shoes?", "Shop")


def test_is_a_reflexive_transitive_random():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(3, 12))
        names = [f"C{i}" for i in range(n)]
        concepts = {}
        for i, name in enumerate(names):
            # parents only among earlier names keeps the hierarchy acyclic
            k = int(rng.integers(0, min(i, 2) + 1))
            parents = list(rng.choice(names[:i], size=k, replace=False)) if i and k else []
            concepts[name] = {"parents": parents}
        smap = load_map({"concepts": concepts, "regions": [], "places": [], "access_points": []})
        for x in names:
            assert smap.is_a(x, x)
        for x in names:
            for y in names:
                for z in names:
                    if smap.is_a(x, y) and smap.is_a(y, z):
                        assert smap.is_a(x, z)


def test_resolve_place(minimall):
    assert [p.id for p in resolve_place("shoe shop", minimall)] == ["shoe_shop"]
    assert [p.id for p in resolve_place("shop", minimall)] == ["shoe_shop", "toy_shop", "cafe"]
    assert resolve_place("xyzzy", minimall) == []
    assert resolve_place("   ", minimall) == []
    # sold-item concepts resolve at lowest priority
    assert [p.id for p in resolve_place("toys", minimall)] == ["toy_shop"]


def test_route_same_region(minimall):
    route = compute_route("square", "cafe", RouteConstraints(), minimall)
    assert route.steps == ()
    # straight line from the square anchor (10,10) to the cafe centroid (3.5,3.5)
    assert route.total_length == pytest.approx(math.dist((10, 10), (3.5, 3.5)), abs=0.0)


def test_route_prefers_stairs(minimall):
    route = compute_route("square", "toy_shop", RouteConstraints(), minimall)
    assert route.access_point_ids() == ("stairs_1",)
    expected = route_oracle(minimall, "square", "toy_shop")
    assert route.total_length == expected[0]


def test_route_no_stairs(minimall):
    route = compute_route("square", "toy_shop", RouteConstraints(no_stairs=True), minimall)
    assert route.access_point_ids() == ("esc_1",)
    assert all(minimall.access_points[ap].kind != "stairs" for ap in route.access_point_ids())
    expected = route_oracle(minimall, "square", "toy_shop", no_stairs=True)
    assert route.total_length == expected[0]


def test_route_unreachable():
    doc = {
        "concepts": {"Shop": {"parents": []}},
        "regions": [
            {"id": "a", "floor": 1, "anchor": [0, 0]},
            {"id": "b", "floor": 2, "anchor": [5, 5]},
        ],
        "places": [{"id": "s", "concept": "Shop", "label": "S", "region": "b",
                    "footprint": [[4, 4], [6, 4], [6, 6], [4, 6]]}],
        "access_points": [{"id": "st", "kind": "stairs", "connects": ["a", "b"],
                           "anchors": {"a": [1, 0], "b": [1, 0]}, "traversal_length": 3.0}],
    }
    smap = load_map(doc)
    ok = compute_route("a", "s", RouteConstraints(), smap)
    assert ok.access_point_ids() == ("st",)
    with pytest.raises(NoRoute):
        compute_route("a", "s", RouteConstraints(no_stairs=True), smap)


def _random_topology(rng):
    n_regions = int(rng.integers(2, 13))
    regions = [{"id": f"r{i}", "floor": int(rng.integers(1, 4)),
                "anchor": [float(rng.integers(0, 40)), float(rng.integers(0, 40))]}
               for i in range(n_regions)]
    access_points = []
    n_edges = int(rng.integers(n_regions - 1, n_regions + 6))
    for j in range(n_edges):
        a, b = rng.choice(n_regions, size=2, replace=False)
        kind = ["stairs", "escalator", "elevator", "opening"][int(rng.integers(0, 4))]
        access_points.append({
            "id": f"ap{j:02d}", "kind": kind, "connects": [f"r{a}", f"r{b}"],
            "anchors": {f"r{a}": [float(rng.integers(0, 40)), float(rng.integers(0, 40))],
                        f"r{b}": [float(rng.integers(0, 40)), float(rng.integers(0, 40))]},
            "traversal_length": float(rng.integers(1, 20)),
        })
    dest_region = f"r{int(rng.integers(0, n_regions))}"
    doc = {
        "concepts": {"Shop": {"parents": []}},
        "regions": regions,
        "places": [{"id": "dest", "concept": "Shop", "label": "Dest", "region": dest_region,
                    "footprint": [[0, 0], [2, 0], [2, 2], [0, 2]]}],
        "access_points": access_points,
    }
    return load_map(doc)


@pytest.mark.parametrize("no_stairs", [False, True])
def test_route_matches_oracle_random(no_stairs):
    rng = np.random.default_rng(17 if no_stairs else 5)
    checked = 0
    for _ in range(100):
        smap = _random_topology(rng)
        start = sorted(smap.regions)[int(rng.integers(0, len(smap.regions)))]
        expected = route_oracle(smap, start, "dest", no_stairs=no_stairs)
        if expected is None:
            with pytest.raises(NoRoute):
                compute_route(start, "dest", RouteConstraints(no_stairs=no_stairs), smap)
            continue
        route = compute_route(start, "dest", RouteConstraints(no_stairs=no_stairs), smap)
        assert route.total_length == expected[0]
        if no_stairs:
            assert all(smap.access_points[ap].kind != "stairs"
                       for ap in route.access_point_ids())
        checked += 1
    assert checked > 50


def test_verbalize(minimall):
    stairs = compute_route("square", "toy_shop", RouteConstraints(), minimall)
    same = compute_route("square", "cafe", RouteConstraints(), minimall)
    assert verbalize_route(same, minimall) == "Cafe is right here in this square."
    assert verbalize_route(stairs, minimall) == "Take the stairs up to floor 2. Toy Shop is there."
    fi = verbalize_route(stairs, minimall, "fi")
    assert fi == "Mene portaita ylös kerrokseen 2. Toy Shop on siellä."
    with pytest.raises(UnsupportedLanguage):
        verbalize_route(stairs, minimall, "de")
    # byte-identical across calls
    assert verbalize_route(stairs, minimall) == verbalize_route(stairs, minimall)


class _FakePlacement:
    robot_pose = (10.0, 10.0, 0.0)


def test_guidance_acts_orders(minimall):
    stairs = compute_route("square", "toy_shop", RouteConstraints(), minimall)
    acts = guidance_acts(stairs, _FakePlacement(), minimall)
    assert [a["act"] for a in acts] == ["point", "point", "say"]
    assert acts[0]["target_kind"] == "destination"
    assert acts[1]["target_kind"] == "access_point"
    assert acts[1]["target_id"] == "stairs_1"
    assert acts[0]["amplitude"] == 0.8 and acts[0]["speed"] == 0.5

    same = compute_route("square", "cafe", RouteConstraints(), minimall)
    acts = guidance_acts(same, _FakePlacement(), minimall)
    assert [a["act"] for a in acts] == ["point", "say"]


def test_guidance_acts_points_first_access_point_only():
    doc = {
        "concepts": {"Shop": {"parents": []}},
        "regions": [
            {"id": "a", "floor": 1, "anchor": [0.0, 0.0]},
            {"id": "b", "floor": 2, "anchor": [10.0, 0.0]},
            {"id": "c", "floor": 3, "anchor": [20.0, 0.0]},
        ],
        "places": [{"id": "s", "concept": "Shop", "label": "S", "region": "c",
                    "footprint": [[19, 0], [21, 0], [21, 2], [19, 2]]}],
        "access_points": [
            {"id": "ap1", "kind": "stairs", "connects": ["a", "b"],
             "anchors": {"a": [5.0, 0.0], "b": [5.0, 0.0]}, "traversal_length": 4.0},
            {"id": "ap2", "kind": "escalator", "connects": ["b", "c"],
             "anchors": {"b": [15.0, 0.0], "c": [15.0, 0.0]}, "traversal_length": 4.0},
        ],
    }
    smap = load_map(doc)
    route = compute_route("a", "s", RouteConstraints(), smap)
    assert route.access_point_ids() == ("ap1", "ap2")
    acts = guidance_acts(route, _FakePlacement(), smap)
    points = [a for a in acts if a["act"] == "point" and a["target_kind"] == "access_point"]
    assert len(points) == 1 and points[0]["target_id"] == "ap1"
