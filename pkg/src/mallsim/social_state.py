"""Attention fusion and interactant selection.

Four per-track component probabilities (head pose, robot gaze, screen gaze,
distance) are fused by a weighted average; the track with the highest fused
value above a threshold is picked, with recent interactants penalised via a
cooldown ledger.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import UnknownEvent

INTERACTING = "interacting"
COOLDOWN = "cooldown"
_FOREVER = 2**62


@dataclass(frozen=True)
class FusionConfig:
    centroids: tuple[tuple[float, float], ...] = ((0.0, 0.0), (0.4, -0.1), (-0.4, -0.1))
    d_norm: float = 0.6
    d_min: float = 1.2
    d_max: float = 5.0
    weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    threshold: float = 0.5
    cooldown_ticks: int = 100
    penalty_factor: float = 0.2

    def __post_init__(self):
        if len(self.centroids) != 3:
            raise ValueError("exactly 3 head-pose centroids required")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        if not self.d_min < self.d_max:
            raise ValueError("d_min must be below d_max")


@dataclass(frozen=True)
class AttentionRecord:
    track_id: str
    p_head: float
    p_robot_gaze: float
    p_screen_gaze: float
    p_dist: float
    p_fused: float
    distance: float
    tick: int


@dataclass
class LedgerEntry:
    state: str
    until: int


def p_head_pose(head_yaw: float, head_pitch: float, config: FusionConfig) -> float:
    """1 at a centroid, falling linearly to 0 at distance d_norm.

    The head pose is expected in a robot-relative frame (zero yaw means the
    person faces the robot), matching how the centroids are expressed.
    """
    d = min(
        math.sqrt((head_yaw - cy) ** 2 + (head_pitch - cp) ** 2)
        for cy, cp in config.centroids
    )
    return max(0.0, 1.0 - d / config.d_norm)


def p_distance(d: float, config: FusionConfig) -> float:
    """1 inside d_min, linear to 0 at d_max, 0 beyond."""
    if d <= config.d_min:
        return 1.0
    if d >= config.d_max:
        return 0.0
    return (config.d_max - d) / (config.d_max - config.d_min)


def fuse(
    p_head: float,
    p_robot_gaze: float,
    p_screen_gaze: float,
    p_dist: float,
    weights: tuple[float, float, float, float],
) -> float:
    w = weights
    return w[0] * p_head + w[1] * p_robot_gaze + w[2] * p_screen_gaze + w[3] * p_dist


class EngagementLedger:
    def __init__(self):
        self.entries: dict[str, LedgerEntry] = {}

    def prune(self, tick: int) -> None:
        for tid in [t for t, e in self.entries.items() if e.until < tick]:
            del self.entries[tid]

    def penalized(self, track_id: str, tick: int) -> bool:
        e = self.entries.get(track_id)
        return e is not None and e.until >= tick

    def snapshot(self) -> dict[str, dict]:
        return {tid: {"state": e.state, "until": e.until} for tid, e in sorted(self.entries.items())}


def select_interactant(
    records: list[AttentionRecord],
    ledger: EngagementLedger,
    config: FusionConfig,
    tick: int,
) -> str | None:
    """Highest effective attention above the threshold, or None.

    Tracks in the ledger (interacting or cooling down) have their fused value
    multiplied by the penalty factor. Ties break on distance, then track id.
    """
    ledger.prune(tick)
    best: tuple[float, float, str] | None = None
    for rec in records:
        p = rec.p_fused
        if ledger.penalized(rec.track_id, tick):
            p = p * config.penalty_factor
        if p < config.threshold:
            continue
        key = (-p, rec.distance, rec.track_id)
        if best is None or key < best:
            best = key
    return best[2] if best is not None else None


def on_task_event(
    event: str,
    track_id: str,
    ledger: EngagementLedger,
    config: FusionConfig,
    tick: int,
) -> EngagementLedger:
    """Apply an interaction lifecycle event to the ledger."""
    if event == "interaction_started":
        ledger.entries[track_id] = LedgerEntry(state=INTERACTING, until=_FOREVER)
    elif event == "interaction_ended":
        # ending an interaction nobody started is a no-op
        if track_id in ledger.entries:
            ledger.entries[track_id] = LedgerEntry(state=COOLDOWN, until=tick + config.cooldown_ticks)
    else:
        raise UnknownEvent(event)
    ledger.prune(tick)
    return ledger
