"""Noisy ground-truth sensor model.

Stands in for the on-robot detection/tracking stack: persons inside the
sensor range and field of view produce perturbed tracks and speech events,
the visual focus of attention comes from an angular cone around the head
direction, and returning tracklets are re-identified by descriptor voting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguousSpeaker
from .geometry import Point, angular_offset, bearing, wrap_angle

DESCRIPTOR_DIM = 16


@dataclass(frozen=True)
class GroundTruthPerson:
    id: str
    position: Point
    head_yaw: float
    head_pitch: float = 0.0
    speaking: bool = False
    descriptor: tuple[float, ...] = ()


@dataclass(frozen=True)
class PersonTrack:
    track_id: str
    position: Point
    head_yaw: float
    head_pitch: float
    distance: float
    azimuth: float  # bearing in the robot frame
    tick: int
    descriptor: tuple[float, ...] = ()


@dataclass(frozen=True)
class SpeechEvent:
    azimuth: float
    p_speech: float
    tick: int


@dataclass(frozen=True)
class SensorConfig:
    range_max: float = 5.0
    fov_half_angle: float = 0.61
    sigma_pos: float = 0.0
    sigma_angle: float = 0.0
    dropout: float = 0.0
    vfoa_cone: float = 0.26
    speech_tolerance: float = 0.35
    speech_ambiguity: float = 0.05
    sigma_descriptor: float = 0.05


def make_descriptor(rng: np.random.Generator) -> tuple[float, ...]:
    v = rng.normal(0.0, 1.0, DESCRIPTOR_DIM)
    v /= np.linalg.norm(v)
    return tuple(float(x) for x in v)


def sample_descriptor(mean: tuple[float, ...], sigma: float, rng: np.random.Generator) -> tuple[float, ...]:
    v = np.asarray(mean) + rng.normal(0.0, sigma, DESCRIPTOR_DIM)
    v /= np.linalg.norm(v)
    return tuple(float(x) for x in v)


def sense(
    persons: list[GroundTruthPerson],
    robot_pose: tuple[float, float, float],
    config: SensorConfig,
    rng: np.random.Generator,
    tick: int,
) -> tuple[list[PersonTrack], list[SpeechEvent]]:
    """One tick of simulated perception.

    Track ids carry the ground-truth id; the harness-side tracker re-keys
    them to perceived identities (see Tracker). Deterministic given the rng
    state: every person consumes a fixed number of draws whether or not a
    track is emitted.
    """
    rx, ry, ryaw = robot_pose
    tracks: list[PersonTrack] = []
    events: list[SpeechEvent] = []
    for gt in persons:
        noise = rng.normal(0.0, 1.0, 6)
        drop = rng.random()
        desc = sample_descriptor(gt.descriptor, config.sigma_descriptor, rng) if gt.descriptor else ()
        dx = gt.position[0] - rx
        dy = gt.position[1] - ry
        true_dist = math.sqrt(dx * dx + dy * dy)
        true_azimuth = wrap_angle(math.atan2(dy, dx) - ryaw)
        if true_dist > config.range_max:
            continue
        if gt.speaking:
            # the microphone array hears all around, range-limited only
            events.append(SpeechEvent(
                azimuth=wrap_angle(true_azimuth + config.sigma_angle * float(noise[4])),
                p_speech=1.0 if config.sigma_angle == 0.0 else min(1.0, max(0.0, 1.0 - 0.05 * abs(float(noise[5])))),
                tick=tick,
            ))
        if abs(true_azimuth) > config.fov_half_angle:
            continue
        if drop < config.dropout:
            continue  # tracklet break
        ex = gt.position[0] + config.sigma_pos * float(noise[0])
        ey = gt.position[1] + config.sigma_pos * float(noise[1])
        edx = ex - rx
        edy = ey - ry
        tracks.append(PersonTrack(
            track_id=gt.id,
            position=(ex, ey),
            head_yaw=wrap_angle(gt.head_yaw + config.sigma_angle * float(noise[2])),
            head_pitch=gt.head_pitch + config.sigma_angle * float(noise[3]),
            distance=math.sqrt(edx * edx + edy * edy),
            azimuth=wrap_angle(math.atan2(edy, edx) - ryaw),
            tick=tick,
            descriptor=desc,
        ))
    return tracks, events


def estimate_vfoa(
    track: PersonTrack,
    targets: list[tuple[str, Point]],
    config: SensorConfig,
) -> str | None:
    """Target with the smallest angular offset from the head direction, if
    that offset falls inside the attention cone."""
    best: tuple[float, str] | None = None
    for tid, pos in targets:
        off = angular_offset(track.head_yaw, bearing(track.position, pos))
        if best is None or (off, tid) < best:
            best = (off, tid)
    if best is not None and best[0] < config.vfoa_cone:
        return best[1]
    return None


def assign_speech(
    event: SpeechEvent,
    tracks: list[PersonTrack],
    config: SensorConfig,
) -> str | None:
    """Track whose azimuth best explains a speech event, or None.

    Raises AmbiguousSpeaker when the two best candidates stand too close
    together to attribute the speech safely.
    """
    candidates = sorted(
        (t for t in tracks if angular_offset(t.azimuth, event.azimuth) <= config.speech_tolerance),
        key=lambda t: (angular_offset(t.azimuth, event.azimuth), t.track_id),
    )
    if not candidates:
        return None
    if len(candidates) >= 2:
        first, second = candidates[0], candidates[1]
        if angular_offset(first.azimuth, second.azimuth) <= config.speech_ambiguity:
            raise AmbiguousSpeaker(f"{first.track_id} vs {second.track_id}")
    return candidates[0].track_id


def reidentify(
    samples: list[tuple[float, ...]],
    gallery: dict[str, list[tuple[float, ...]]],
    match_radius: float = 0.7,
    mint: str | None = None,
) -> str:
    """Identity for a new tracklet by descriptor voting.

    Each sample votes for the identity of its nearest stored descriptor,
    provided that neighbour lies within match_radius; otherwise the sample
    votes for a fresh identity. A new identity (the `mint` name) is returned
    when the gallery is empty or the winning share is below 0.5.
    """
    mint = mint if mint is not None else f"id{len(gallery) + 1}"
    if not gallery or not samples:
        return mint
    votes: dict[str, int] = {}
    for sample in samples:
        s = np.asarray(sample)
        best_id: str | None = None
        best_d = math.inf
        for ident in sorted(gallery):
            for stored in gallery[ident]:
                d = float(np.linalg.norm(s - np.asarray(stored)))
                if d < best_d:
                    best_d = d
                    best_id = ident
        if best_id is not None and best_d <= match_radius:
            votes[best_id] = votes.get(best_id, 0) + 1
    if not votes:
        return mint
    winner = min(votes.items(), key=lambda kv: (-kv[1], kv[0]))
    if winner[1] / len(samples) < 0.5:
        return mint
    return winner[0]


@dataclass
class Tracker:
    """Keeps perceived identities stable across tracklet breaks.

    While a person stays continuously in view their public id is pinned; a
    reappearance after any missed tick starts a new tracklet whose identity
    is recovered by descriptor voting against the gallery.
    """

    config: SensorConfig
    gallery: dict[str, list[tuple[float, ...]]] = field(default_factory=dict)
    _binding: dict[str, str] = field(default_factory=dict)  # raw id -> public id
    _last_seen: dict[str, int] = field(default_factory=dict)
    _minted: int = 0
    gallery_cap: int = 40

    def update(self, raw_tracks: list[PersonTrack], tick: int) -> list[PersonTrack]:
        out: list[PersonTrack] = []
        for t in raw_tracks:
            cont = self._binding.get(t.track_id)
            last = self._last_seen.get(t.track_id)
            if cont is None or last is None or tick - last > 1:
                cont = self._reidentify_tracklet(t)
                self._binding[t.track_id] = cont
            self._last_seen[t.track_id] = tick
            if t.descriptor:
                bucket = self.gallery.setdefault(cont, [])
                bucket.append(t.descriptor)
                if len(bucket) > self.gallery_cap:
                    del bucket[0]
            out.append(PersonTrack(
                track_id=cont,
                position=t.position,
                head_yaw=t.head_yaw,
                head_pitch=t.head_pitch,
                distance=t.distance,
                azimuth=t.azimuth,
                tick=t.tick,
                descriptor=t.descriptor,
            ))
        return out

    def _reidentify_tracklet(self, t: PersonTrack) -> str:
        self._minted += 1
        candidate = f"p{self._minted}"
        if not t.descriptor:
            return candidate
        ident = reidentify([t.descriptor], self.gallery, mint=candidate)
        if ident != candidate:
            self._minted -= 1
        return ident

    def public_id(self, raw_id: str) -> str | None:
        return self._binding.get(raw_id)
