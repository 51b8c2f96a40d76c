"""Scenario files: scripted persons, robot start, seeds and end conditions."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..errors import ScenarioError
from ..geometry import Point


@dataclass
class HeadEntry:
    tick: int
    yaw: float | None = None
    pitch: float = 0.0
    look_at: str | None = None


@dataclass
class ScriptedPerson:
    id: str
    waypoints: list[tuple[int, Point]]
    head: list[HeadEntry]
    utterances: list[tuple[int, str]]
    speaking: list[tuple[int, int]]
    absent: list[tuple[int, int]]

    def position_at(self, tick: int) -> Point:
        wps = self.waypoints
        if not wps:
            return (0.0, 0.0)
        if tick <= wps[0][0]:
            return wps[0][1]
        for (t0, p0), (t1, p1) in zip(wps, wps[1:]):
            if t0 <= tick <= t1:
                if t1 == t0:
                    return p1
                f = (tick - t0) / (t1 - t0)
                return (p0[0] + f * (p1[0] - p0[0]), p0[1] + f * (p1[1] - p0[1]))
        return wps[-1][1]

    def head_at(self, tick: int) -> HeadEntry:
        current = self.head[0] if self.head else HeadEntry(tick=0, yaw=0.0)
        for entry in self.head:
            if entry.tick <= tick:
                current = entry
            else:
                break
        return current

    def speaking_at(self, tick: int) -> bool:
        return any(a <= tick < b for a, b in self.speaking)

    def present_at(self, tick: int) -> bool:
        return not any(a <= tick < b for a, b in self.absent)

    def utterances_at(self, tick: int) -> list[str]:
        return [text for t, text in self.utterances if t == tick]


@dataclass
class Scenario:
    name: str
    map_name: str
    seed: int
    tick_rate: float
    max_ticks: int
    language: str
    robot_start: tuple[float, float, float]
    persons: list[ScriptedPerson]
    sensor: dict = field(default_factory=dict)
    fusion: dict = field(default_factory=dict)
    nav: dict = field(default_factory=dict)
    guidance: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


def _sorted_pairs(entries, what: str) -> list[tuple[int, int]]:
    out = []
    for e in entries:
        if not (isinstance(e, list) and len(e) == 2):
            raise ScenarioError(f"{what} intervals must be [start, end] pairs")
        a, b = int(e[0]), int(e[1])
        if b < a:
            raise ScenarioError(f"{what} interval ends before it starts: {e}")
        out.append((a, b))
    if out != sorted(out):
        raise ScenarioError(f"{what} intervals must be time-ordered")
    return out


def load_scenario(source: str | dict | Path, name: str | None = None) -> Scenario:
    """Parse and validate a scenario document (path, JSON text or dict)."""
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        path = Path(source)
        if not path.exists():
            bundled = resources.files("mallsim") / "data" / "scenarios" / f"{source}.json"
            if bundled.is_file():
                doc = json.loads(bundled.read_text(encoding="utf-8"))
                name = name or str(source)
            else:
                raise ScenarioError(f"scenario {source!r} not found")
        else:
            doc = json.loads(path.read_text(encoding="utf-8"))
            name = name or path.stem
    elif isinstance(source, str):
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as e:
            raise ScenarioError(f"scenario is not valid JSON: {e}") from None
    else:
        doc = source
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be an object")
    if "seed" not in doc:
        raise ScenarioError("scenario must declare a seed (replays depend on it)")

    persons: list[ScriptedPerson] = []
    seen_ids = set()
    for spec in doc.get("persons", []):
        pid = spec.get("id")
        if not pid or pid in seen_ids:
            raise ScenarioError(f"person entries need unique ids (got {pid!r})")
        seen_ids.add(pid)
        waypoints = []
        for wp in spec.get("waypoints", []):
            if "tick" not in wp or "pos" not in wp:
                raise ScenarioError(f"person {pid!r}: waypoints need tick and pos")
            waypoints.append((int(wp["tick"]), (float(wp["pos"][0]), float(wp["pos"][1]))))
        if [t for t, _ in waypoints] != sorted(t for t, _ in waypoints):
            raise ScenarioError(f"person {pid!r}: waypoints must be time-ordered")
        head = []
        for he in spec.get("head", []):
            entry = HeadEntry(
                tick=int(he.get("tick", 0)),
                yaw=float(he["yaw"]) if "yaw" in he else None,
                pitch=float(he.get("pitch", 0.0)),
                look_at=he.get("look_at"),
            )
            if entry.yaw is None and entry.look_at is None:
                raise ScenarioError(f"person {pid!r}: head entries need yaw or look_at")
            if entry.yaw is not None and abs(entry.yaw) > math.pi:
                raise ScenarioError(f"person {pid!r}: head yaw must be within [-pi, pi]")
            head.append(entry)
        if [h.tick for h in head] != sorted(h.tick for h in head):
            raise ScenarioError(f"person {pid!r}: head schedule must be time-ordered")
        utterances = []
        for ut in spec.get("utterances", []):
            if "tick" not in ut or "text" not in ut:
                raise ScenarioError(f"person {pid!r}: utterances need tick and text")
            utterances.append((int(ut["tick"]), str(ut["text"])))
        if [t for t, _ in utterances] != sorted(t for t, _ in utterances):
            raise ScenarioError(f"person {pid!r}: utterances must be time-ordered")
        persons.append(ScriptedPerson(
            id=pid,
            waypoints=waypoints,
            head=head,
            utterances=utterances,
            speaking=_sorted_pairs(spec.get("speaking", []), f"person {pid!r} speaking"),
            absent=_sorted_pairs(spec.get("absent", []), f"person {pid!r} absent"),
        ))

    robot = doc.get("robot", {})
    start = robot.get("start", [10.0, 10.0])
    language = doc.get("language", "en")
    if language not in ("en", "fi"):
        raise ScenarioError(f"unsupported scenario language {language!r}")
    return Scenario(
        name=name or doc.get("name", "scenario"),
        map_name=doc.get("map", "minimall"),
        seed=int(doc["seed"]),
        tick_rate=float(doc.get("tick_rate", 10.0)),
        max_ticks=int(doc.get("max_ticks", 100)),
        language=language,
        robot_start=(float(start[0]), float(start[1]), float(robot.get("yaw", 0.0))),
        persons=persons,
        sensor=dict(doc.get("sensor", {})),
        fusion=dict(doc.get("fusion", {})),
        nav=dict(doc.get("nav", {})),
        guidance=dict(doc.get("guidance", {})),
        raw=doc,
    )
