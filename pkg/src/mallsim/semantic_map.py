"""Semantic spatial representation of the mall.

Holds the concept hierarchy, places, regions and access points, computes
constrained routes over the region topology and turns them into spoken text.
The map is immutable after loading and safe to share across threads.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field

from .errors import (
    CyclicHierarchy,
    DanglingReference,
    NoRoute,
    SchemaError,
    UnknownConcept,
    UnsupportedLanguage,
)
from .geometry import (
    Point,
    bearing,
    dist,
    perimeter_points,
    point_in_polygon,
    polygon_centroid,
    square_around,
)

ACCESS_KINDS = ("stairs", "escalator", "elevator", "opening")


@dataclass(frozen=True)
class Concept:
    name: str
    parents: tuple[str, ...]


@dataclass(frozen=True)
class Place:
    id: str
    concept: str
    label: str
    floor: int
    footprint: tuple[Point, ...]
    centroid: Point
    region: str
    sells: tuple[str, ...] = ()


@dataclass(frozen=True)
class AccessPoint:
    id: str
    kind: str
    connects: tuple[str, str]
    anchors: dict[str, Point]
    traversal_length: float

    def anchor(self, region: str) -> Point:
        return self.anchors[region]

    def other_side(self, region: str) -> str:
        a, b = self.connects
        return b if region == a else a


@dataclass(frozen=True)
class Region:
    id: str
    floor: int
    anchor: Point
    bounds: tuple[float, float, float, float] | None = None
    grid: dict | None = None
    obstacles: tuple[tuple[float, float, float, float], ...] = ()


@dataclass(frozen=True)
class RouteConstraints:
    no_stairs: bool = False


@dataclass(frozen=True)
class RouteStep:
    from_region: str
    access_point: str
    to_region: str


@dataclass(frozen=True)
class Route:
    steps: tuple[RouteStep, ...]
    destination: str
    total_length: float

    def access_point_ids(self) -> tuple[str, ...]:
        return tuple(s.access_point for s in self.steps)


@dataclass
class SemanticMap:
    concepts: dict[str, Concept]
    regions: dict[str, Region]
    places: dict[str, Place]
    access_points: dict[str, AccessPoint]
    _ancestors: dict[str, frozenset[str]] = field(default_factory=dict)

    # -- concepts -----------------------------------------------------------

    def is_a(self, concept: str, ancestor: str) -> bool:
        if concept not in self.concepts:
            raise UnknownConcept(concept)
        if ancestor not in self.concepts:
            raise UnknownConcept(ancestor)
        return ancestor in self._ancestors[concept]

    # -- landmarks ----------------------------------------------------------

    def landmark_ids(self) -> list[str]:
        return sorted(self.places) + sorted(self.access_points)

    def landmark_polygon(self, landmark_id: str, region: str | None = None) -> list[Point]:
        """Footprint used for visibility sampling; access points get a 1x1 m square."""
        if landmark_id in self.places:
            return list(self.places[landmark_id].footprint)
        if landmark_id in self.access_points:
            ap = self.access_points[landmark_id]
            reg = region if region is not None and region in ap.anchors else ap.connects[0]
            return square_around(ap.anchor(reg), 0.5)
        raise DanglingReference(f"unknown landmark {landmark_id!r}")

    def landmark_point(self, landmark_id: str, region: str | None = None) -> Point:
        if landmark_id in self.places:
            return self.places[landmark_id].centroid
        ap = self.access_points[landmark_id]
        reg = region if region is not None and region in ap.anchors else ap.connects[0]
        return ap.anchor(reg)


# ---------------------------------------------------------------------------
# Loading and validation
# ---------------------------------------------------------------------------


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise SchemaError(msg)


def _as_point(v, ctx: str) -> Point:
    _require(isinstance(v, (list, tuple)) and len(v) == 2, f"{ctx}: expected [x, y]")
    x, y = v
    _require(isinstance(x, (int, float)) and isinstance(y, (int, float)), f"{ctx}: non-numeric point")
    _require(math.isfinite(x) and math.isfinite(y), f"{ctx}: non-finite point")
    return (float(x), float(y))


def load_map(document: str | dict) -> SemanticMap:
    """Parse and validate a map document (JSON text or an already-parsed dict)."""
    if isinstance(document, str):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as e:
            raise SchemaError(f"map document is not valid JSON: {e}") from None
    else:
        doc = document
    _require(isinstance(doc, dict), "map document must be an object")
    for key in ("concepts", "regions", "places", "access_points"):
        _require(key in doc, f"missing top-level key {key!r}")

    concepts: dict[str, Concept] = {}
    raw_concepts = doc["concepts"]
    _require(isinstance(raw_concepts, dict), "concepts must be an object of name -> {parents}")
    for name, spec in raw_concepts.items():
        _require(isinstance(spec, dict), f"concept {name!r} must be an object")
        parents = spec.get("parents", [])
        _require(isinstance(parents, list) and all(isinstance(p, str) for p in parents),
                 f"concept {name!r}: parents must be a list of names")
        concepts[name] = Concept(name=name, parents=tuple(parents))

    for c in concepts.values():
        for p in c.parents:
            if p not in concepts:
                raise DanglingReference(f"concept {c.name!r} has unknown parent {p!r}")

    ancestors = _closure(concepts)

    regions: dict[str, Region] = {}
    for spec in doc["regions"]:
        _require(isinstance(spec, dict) and "id" in spec, "region entries need an id")
        rid = spec["id"]
        _require(rid not in regions, f"duplicate region id {rid!r}")
        bounds = None
        if "bounds" in spec:
            b = spec["bounds"]
            _require(isinstance(b, list) and len(b) == 4, f"region {rid!r}: bounds must be [x0,y0,x1,y1]")
            bounds = tuple(float(v) for v in b)
        obstacles = []
        for ob in spec.get("obstacles", []):
            _require(isinstance(ob, list) and len(ob) == 4, f"region {rid!r}: obstacle must be [x0,y0,x1,y1]")
            obstacles.append(tuple(float(v) for v in ob))
        regions[rid] = Region(
            id=rid,
            floor=int(spec.get("floor", 1)),
            anchor=_as_point(spec.get("anchor"), f"region {rid!r} anchor"),
            bounds=bounds,
            grid=spec.get("grid"),
            obstacles=tuple(obstacles),
        )

    places: dict[str, Place] = {}
    for spec in doc["places"]:
        _require(isinstance(spec, dict) and "id" in spec, "place entries need an id")
        pid = spec["id"]
        _require(pid not in places, f"duplicate place id {pid!r}")
        footprint = spec.get("footprint")
        _require(isinstance(footprint, list) and len(footprint) >= 3,
                 f"place {pid!r}: footprint needs at least 3 vertices")
        poly = [_as_point(v, f"place {pid!r} footprint") for v in footprint]
        centroid = (_as_point(spec["centroid"], f"place {pid!r} centroid")
                    if "centroid" in spec else polygon_centroid(poly))
        _require(point_in_polygon(centroid, poly), f"place {pid!r}: centroid outside footprint")
        concept = spec.get("concept")
        if concept not in concepts:
            raise DanglingReference(f"place {pid!r} has unknown concept {concept!r}")
        region = spec.get("region")
        if region not in regions:
            raise DanglingReference(f"place {pid!r} has unknown region {region!r}")
        sells = tuple(spec.get("sells", []))
        for s in sells:
            if s not in concepts:
                raise DanglingReference(f"place {pid!r} sells unknown concept {s!r}")
        places[pid] = Place(
            id=pid,
            concept=concept,
            label=str(spec.get("label", pid)),
            floor=int(spec.get("floor", regions[region].floor)),
            footprint=tuple(poly),
            centroid=centroid,
            region=region,
            sells=sells,
        )

    access_points: dict[str, AccessPoint] = {}
    for spec in doc["access_points"]:
        _require(isinstance(spec, dict) and "id" in spec, "access point entries need an id")
        aid = spec["id"]
        _require(aid not in access_points, f"duplicate access point id {aid!r}")
        kind = spec.get("kind")
        _require(kind in ACCESS_KINDS, f"access point {aid!r}: kind must be one of {ACCESS_KINDS}")
        connects = spec.get("connects")
        _require(isinstance(connects, list) and len(connects) == 2, f"access point {aid!r}: connects must name 2 regions")
        for r in connects:
            if r not in regions:
                raise DanglingReference(f"access point {aid!r} connects unknown region {r!r}")
        anchors_raw = spec.get("anchors")
        _require(isinstance(anchors_raw, dict), f"access point {aid!r}: anchors must map region -> [x, y]")
        anchors = {}
        for r in connects:
            _require(r in anchors_raw, f"access point {aid!r}: missing anchor for region {r!r}")
            anchors[r] = _as_point(anchors_raw[r], f"access point {aid!r} anchor")
        length = spec.get("traversal_length")
        _require(isinstance(length, (int, float)) and length > 0, f"access point {aid!r}: traversal_length must be > 0")
        access_points[aid] = AccessPoint(
            id=aid, kind=kind, connects=(connects[0], connects[1]),
            anchors=anchors, traversal_length=float(length),
        )

    return SemanticMap(
        concepts=concepts,
        regions=regions,
        places=places,
        access_points=access_points,
        _ancestors=ancestors,
    )


def _closure(concepts: dict[str, Concept]) -> dict[str, frozenset[str]]:
    """Reflexive-transitive parent closure; raises on cycles."""
    closure: dict[str, frozenset[str]] = {}
    state: dict[str, int] = {}  # 0 = visiting, 1 = done

    def visit(name: str, chain: tuple[str, ...]) -> frozenset[str]:
        if state.get(name) == 1:
            return closure[name]
        if state.get(name) == 0:
            raise CyclicHierarchy(" -> ".join(chain + (name,)))
        state[name] = 0
        acc = {name}
        for p in concepts[name].parents:
            acc |= visit(p, chain + (name,))
        state[name] = 1
        closure[name] = frozenset(acc)
        return closure[name]

    for name in concepts:
        visit(name, ())
    return closure


# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------


def _norm(text: str) -> str:
    return "".join(ch for ch in text.lower() if ch.isalnum())


def resolve_place(query: str, smap: SemanticMap) -> list[Place]:
    """Places matching a free-text query, best match first.

    Ranking: exact label, then label substring, then concept subsumption,
    then sold-item concepts. Ties are broken by place id.
    """
    q = query.strip().lower()
    if not q:
        return []
    qn = _norm(query)
    matched_concepts = [c for c in smap.concepts if _norm(c) == qn]
    ranked: dict[str, int] = {}
    for pid, place in smap.places.items():
        label = place.label.lower()
        rank: int | None = None
        if label == q:
            rank = 0
        elif q in label:
            rank = 1
        else:
            for c in matched_concepts:
                if smap.is_a(place.concept, c):
                    rank = 2
                    break
            if rank is None:
                for sold in place.sells:
                    if any(smap.is_a(sold, c) for c in matched_concepts) or _norm(sold) == qn:
                        rank = 3
                        break
        if rank is not None:
            ranked[pid] = rank
    order = sorted(ranked.items(), key=lambda kv: (kv[1], kv[0]))
    return [smap.places[pid] for pid, _ in order]


# ---------------------------------------------------------------------------
# Route search
# ---------------------------------------------------------------------------


def compute_route(
    start_region: str,
    destination: str,
    constraints: RouteConstraints,
    smap: SemanticMap,
    start_point: Point | None = None,
) -> Route:
    """Minimum-length route over the region graph.

    Edge weight is the access point's traversal length plus the straight-line
    leg from the previous anchor within the region. Ties are broken by the
    lexicographically smallest access-point id sequence.
    """
    if start_region not in smap.regions:
        raise DanglingReference(f"unknown region {start_region!r}")
    if destination not in smap.places:
        raise DanglingReference(f"unknown place {destination!r}")
    dest = smap.places[destination]
    origin = start_point if start_point is not None else smap.regions[start_region].anchor

    if dest.region == start_region:
        return Route(steps=(), destination=destination, total_length=dist(origin, dest.centroid))

    edges: dict[str, list[AccessPoint]] = {r: [] for r in smap.regions}
    for ap in smap.access_points.values():
        if constraints.no_stairs and ap.kind == "stairs":
            continue
        a, b = ap.connects
        edges[a].append(ap)
        edges[b].append(ap)

    # Dijkstra over (region, arrival point) states, carrying the id sequence
    # for deterministic tie-breaking.
    start_state = (start_region, origin)
    best: dict[tuple[str, Point], tuple[float, tuple[str, ...]]] = {start_state: (0.0, ())}
    heap: list[tuple[float, tuple[str, ...], int, tuple[str, Point], tuple[RouteStep, ...]]] = []
    counter = 0
    heapq.heappush(heap, (0.0, (), counter, start_state, ()))
    goal: tuple[float, tuple[str, ...], tuple[RouteStep, ...]] | None = None

    while heap:
        cost, seq, _, (region, point), steps = heapq.heappop(heap)
        if best.get((region, point)) != (cost, seq):
            continue
        if region == dest.region:
            total = cost + dist(point, dest.centroid)
            if goal is None or (total, seq) < (goal[0], goal[1]):
                goal = (total, seq, steps)
            # keep expanding: re-entering through a closer anchor can win
        for ap in sorted(edges[region], key=lambda a: a.id):
            nxt = ap.other_side(region)
            leg = dist(point, ap.anchor(region))
            ncost = cost + leg + ap.traversal_length
            nseq = seq + (ap.id,)
            nstate = (nxt, ap.anchor(nxt))
            prev = best.get(nstate)
            if prev is None or (ncost, nseq) < prev:
                best[nstate] = (ncost, nseq)
                counter += 1
                heapq.heappush(heap, (ncost, nseq, counter, nstate, steps + (RouteStep(region, ap.id, nxt),)))

    if goal is None:
        raise NoRoute(f"no route from {start_region!r} to {destination!r}"
                      + (" without stairs" if constraints.no_stairs else ""))
    total, _, steps = goal
    return Route(steps=steps, destination=destination, total_length=total)


# ---------------------------------------------------------------------------
# Verbalization and guidance acts
# ---------------------------------------------------------------------------

_KIND_EN = {"stairs": "stairs", "escalator": "escalator", "elevator": "elevator", "opening": "corridor"}
_KIND_FI = {"stairs": "portaita", "escalator": "rullaportaita", "elevator": "hissillä", "opening": "käytävää pitkin"}


def verbalize_route(route: Route, smap: SemanticMap, language: str = "en") -> str:
    """Deterministic template text for a route, one clause per step."""
    if language not in ("en", "fi"):
        raise UnsupportedLanguage(language)
    dest = smap.places[route.destination]
    if not route.steps:
        if language == "en":
            return f"{dest.label} is right here in this square."
        return f"{dest.label} on täällä tällä aukiolla."
    clauses = []
    for step in route.steps:
        ap = smap.access_points[step.access_point]
        from_floor = smap.regions[step.from_region].floor
        to_floor = smap.regions[step.to_region].floor
        if language == "en":
            direction = "up" if to_floor > from_floor else ("down" if to_floor < from_floor else "over")
            clauses.append(f"Take the {_KIND_EN[ap.kind]} {direction} to floor {to_floor}.")
        else:
            direction = "ylös" if to_floor > from_floor else ("alas" if to_floor < from_floor else "eteenpäin")
            clauses.append(f"Mene {_KIND_FI[ap.kind]} {direction} kerrokseen {to_floor}.")
    if language == "en":
        clauses.append(f"{dest.label} is there.")
    else:
        clauses.append(f"{dest.label} on siellä.")
    return " ".join(clauses)


def guidance_acts(
    route: Route,
    placement,
    smap: SemanticMap,
    language: str = "en",
    amplitude: float = 0.8,
    speed: float = 0.5,
) -> list[dict]:
    """Ordered pointing/speech acts for a guidance interaction.

    First point in the direction of the destination, then (if the route
    crosses regions) at the first access point, then speak the route. The
    speech act is tagged to accompany the final pointing act.
    """
    dest = smap.places[route.destination]
    robot_xy = (placement.robot_pose[0], placement.robot_pose[1])
    acts: list[dict] = [{
        "act": "point",
        "target_kind": "destination",
        "target_id": dest.id,
        "target": [dest.centroid[0], dest.centroid[1]],
        "bearing": bearing(robot_xy, dest.centroid),
        "amplitude": amplitude,
        "speed": speed,
    }]
    if route.steps:
        ap = smap.access_points[route.steps[0].access_point]
        anchor = ap.anchor(route.steps[0].from_region)
        acts.append({
            "act": "point",
            "target_kind": "access_point",
            "target_id": ap.id,
            "target": [anchor[0], anchor[1]],
            "bearing": bearing(robot_xy, anchor),
            "amplitude": amplitude,
            "speed": speed,
        })
    acts.append({"act": "say", "text": verbalize_route(route, smap, language)})
    return acts
