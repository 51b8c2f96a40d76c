"""Cascading world states with stamped symbolic predicates.

Worlds form an inheritance chain: a child world sees its parent's nodes
unless it overrides (or masks) them locally. Per-human belief worlds are
forked from a frozen snapshot of the robot's world and updated copy-on-look.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DuplicateName, UnknownPerson, UnknownWorld
from .geometry import Point, point_in_polygon

PREDICATE_NAMES = ("isInsideArea", "isLookingAt", "isSpeakingTo", "isVisibleFrom")

# Ticks a predicate may be instantaneously false before its interval closes.
CLOSE_HYSTERESIS = 2


@dataclass(frozen=True)
class SceneNode:
    id: str
    parent: str | None = None
    x: float = 0.0
    y: float = 0.0
    yaw: float = 0.0
    height: float | None = None
    shape: tuple[Point, ...] | None = None

    def __post_init__(self):
        for v in (self.x, self.y, self.yaw):
            if not math.isfinite(v):
                raise ValueError(f"non-finite transform on node {self.id!r}")


@dataclass(frozen=True)
class StampedPredicate:
    name: str
    args: tuple[str, ...]
    t_start: int
    t_end: int | None  # None while open

    def overlaps(self, a: int, b: int) -> bool:
        end = self.t_end if self.t_end is not None else math.inf
        return self.t_start <= b and end >= a


class World:
    def __init__(self, name: str, parent: "World | None" = None):
        self.name = name
        self.parent = parent
        # node id -> SceneNode, or None for a mask of an inherited node
        self.overrides: dict[str, SceneNode | None] = {}

    def effective(self) -> dict[str, SceneNode]:
        base = self.parent.effective() if self.parent is not None else {}
        for nid, node in self.overrides.items():
            if node is None:
                base.pop(nid, None)
            else:
                base[nid] = node
        return base

    def get(self, node_id: str) -> SceneNode | None:
        if node_id in self.overrides:
            return self.overrides[node_id]
        if self.parent is not None:
            return self.parent.get(node_id)
        return None


class WorldStore:
    """Owns all worlds plus the per-person belief bookkeeping."""

    def __init__(self):
        self.worlds: dict[str, World] = {"robot": World("robot")}
        self._belief_of: dict[str, str] = {}
        # (person, node) -> tick of the last copy-on-look
        self._looked_at: dict[tuple[str, str], int] = {}

    @property
    def robot_world(self) -> World:
        return self.worlds["robot"]

    def world(self, name: str) -> World:
        try:
            return self.worlds[name]
        except KeyError:
            raise UnknownWorld(name) from None

    def fork_world(self, parent: str, name: str) -> World:
        if name in self.worlds:
            raise DuplicateName(name)
        w = World(name, parent=self.world(parent))
        self.worlds[name] = w
        return w

    def set_node(self, world: str, node: SceneNode) -> None:
        self.world(world).overrides[node.id] = node

    def remove_node(self, world: str, node_id: str) -> None:
        self.world(world).overrides[node_id] = None

    # -- belief worlds -------------------------------------------------------

    def ensure_belief_world(self, person: str, tick: int) -> World:
        """Fork a belief world for a newly seen person.

        The parent is a frozen snapshot of the robot world at first sight, so
        later robot-world changes do not leak into the belief unless the
        person actually looks at the changed node.
        """
        if person in self._belief_of:
            return self.worlds[self._belief_of[person]]
        snap = World(f"belief_snapshot_{person}")
        snap.overrides = dict(self.robot_world.effective())
        self.worlds[snap.name] = snap
        belief = self.fork_world(snap.name, f"belief_{person}")
        self._belief_of[person] = belief.name
        return belief

    def belief_world(self, person: str) -> World:
        if person not in self._belief_of:
            raise UnknownPerson(person)
        return self.worlds[self._belief_of[person]]

    def update_belief(self, person: str, vfoa_target: str | None, tick: int) -> World:
        """Copy-on-look: the looked-at node's current state enters the belief."""
        belief = self.belief_world(person)
        if vfoa_target is not None:
            node = self.robot_world.get(vfoa_target)
            if node is not None:
                belief.overrides[vfoa_target] = node
                self._looked_at[(person, vfoa_target)] = tick
        return belief

    def last_looked(self, person: str, node_id: str) -> int | None:
        return self._looked_at.get((person, node_id))


# ---------------------------------------------------------------------------
# Instantaneous predicate computation
# ---------------------------------------------------------------------------


def compute_predicates(
    areas: dict[str, tuple[Point, ...]],
    track_positions: dict[str, Point],
    vfoa: dict[str, str | None],
    speakers: set[str],
    visibility: dict[str, dict[str, bool]] | None = None,
) -> set[tuple[str, tuple[str, ...]]]:
    """The set of (name, args) relations that hold this tick.

    isInsideArea(p, a): the track position lies inside the area footprint
    (boundary included). isLookingAt(p, t): the VFOA estimate selected t.
    isSpeakingTo(p, t): p has an assigned speech event and isLookingAt(p, t).
    isVisibleFrom(m, p): supplied by the caller from the visibility grids.
    """
    out: set[tuple[str, tuple[str, ...]]] = set()
    for pid in sorted(track_positions):
        pos = track_positions[pid]
        for aid in sorted(areas):
            if point_in_polygon(pos, list(areas[aid])):
                out.add(("isInsideArea", (pid, aid)))
        target = vfoa.get(pid)
        if target is not None:
            out.add(("isLookingAt", (pid, target)))
            if pid in speakers:
                out.add(("isSpeakingTo", (pid, target)))
    if visibility:
        for landmark in sorted(visibility):
            for pid, visible in sorted(visibility[landmark].items()):
                if visible:
                    out.add(("isVisibleFrom", (landmark, pid)))
    return out


class PredicateStore:
    """Interval bookkeeping over instantaneous predicate sets.

    An open predicate survives short dropouts: it closes only after
    CLOSE_HYSTERESIS consecutive ticks of absence, with t_end stamped at the
    last tick it actually held.
    """

    def __init__(self):
        self._open: dict[tuple[str, tuple[str, ...]], tuple[int, int]] = {}  # key -> (t_start, last_true)
        self._closed: list[StampedPredicate] = []

    def update(self, tick: int, current: set[tuple[str, tuple[str, ...]]]) -> tuple[list, list]:
        """Returns (opened, closed) StampedPredicate lists for this tick."""
        opened: list[StampedPredicate] = []
        closed: list[StampedPredicate] = []
        for key in sorted(current):
            if key in self._open:
                start, _ = self._open[key]
                self._open[key] = (start, tick)
            else:
                self._open[key] = (tick, tick)
                opened.append(StampedPredicate(key[0], key[1], tick, None))
        for key in sorted(self._open):
            if key in current:
                continue
            start, last_true = self._open[key]
            if tick - last_true >= CLOSE_HYSTERESIS:
                del self._open[key]
                sp = StampedPredicate(key[0], key[1], start, last_true)
                self._closed.append(sp)
                closed.append(sp)
        return opened, closed

    def holds_now(self, name: str, args: tuple[str, ...], tick: int) -> bool:
        entry = self._open.get((name, args))
        return entry is not None and entry[1] == tick

    def all_stamped(self) -> list[StampedPredicate]:
        out = list(self._closed)
        for (name, args), (start, _last) in sorted(self._open.items()):
            out.append(StampedPredicate(name, args, start, None))
        return sorted(out, key=lambda p: (p.t_start, p.name, p.args))

    def query(
        self,
        name: str | None = None,
        args: tuple[str | None, ...] | None = None,
        interval: tuple[int, int] = (0, 2**62),
    ) -> list[StampedPredicate]:
        """Stamped predicates overlapping [a, b] and matching the pattern.

        None entries act as wildcards, both for the name and for individual
        argument positions.
        """
        a, b = interval
        out = []
        for sp in self.all_stamped():
            if name is not None and sp.name != name:
                continue
            if args is not None:
                if len(args) != len(sp.args):
                    continue
                if any(pat is not None and pat != got for pat, got in zip(args, sp.args)):
                    continue
            if sp.overlaps(a, b):
                out.append(sp)
        return out
