import math

import numpy as np
import pytest

from mallsim.errors import AmbiguousSpeaker
from mallsim.geometry import angular_offset, bearing, wrap_angle
from mallsim.perception import (
    DESCRIPTOR_DIM,
    GroundTruthPerson,
    PersonTrack,
    SensorConfig,
    SpeechEvent,
    Tracker,
    estimate_vfoa,
    assign_speech,
    make_descriptor,
    reidentify,
    sample_descriptor,
    sense,
)


def _person(pid, pos, yaw=0.0, speaking=False, desc=()):
    return GroundTruthPerson(id=pid, position=pos, head_yaw=yaw, speaking=speaking,
                             descriptor=desc)


def _track(tid, pos, head_yaw=0.0, distance=1.0, azimuth=0.0):
    return PersonTrack(track_id=tid, position=pos, head_yaw=head_yaw, head_pitch=0.0,
                       distance=distance, azimuth=azimuth, tick=0)


ZERO_NOISE = SensorConfig(sigma_pos=0.0, sigma_angle=0.0, dropout=0.0)


def test_zero_noise_exact_track():
    rng = np.random.default_rng(0)
    tracks, events = sense([_person("p1", (2.0, 0.0), yaw=1.0, speaking=False)],
                           (0.0, 0.0, 0.0), ZERO_NOISE, rng, tick=3)
    assert len(tracks) == 1 and not events
    t = tracks[0]
    assert t.position == (2.0, 0.0)
    assert t.head_yaw == 1.0
    assert t.distance == 2.0
    assert t.azimuth == 0.0
    assert t.tick == 3


def test_range_cut_at_default_five_metres():
    rng = np.random.default_rng(0)
    tracks, _ = sense([_person("p1", (6.0, 0.0))], (0.0, 0.0, 0.0), ZERO_NOISE, rng, 0)
    assert tracks == []
    tracks, _ = sense([_person("p1", (4.9, 0.0))], (0.0, 0.0, 0.0), ZERO_NOISE, rng, 0)
    assert len(tracks) == 1


def test_fov_cut():
    rng = np.random.default_rng(0)
    # 0.7 rad off-axis is beyond the 0.61 default half-angle
    pos = (2.0 * math.cos(0.7), 2.0 * math.sin(0.7))
    tracks, _ = sense([_person("p1", pos)], (0.0, 0.0, 0.0), ZERO_NOISE, rng, 0)
    assert tracks == []


def test_speaking_person_emits_event_in_range_only():
    rng = np.random.default_rng(0)
    _, events = sense([_person("p1", (2.0, 2.0), speaking=True)], (0.0, 0.0, 0.0),
                      ZERO_NOISE, rng, 0)
    assert len(events) == 1
    assert events[0].azimuth == pytest.approx(math.atan2(2.0, 2.0), abs=0.0)
    assert events[0].p_speech == 1.0
    _, events = sense([_person("p1", (20.0, 0.0), speaking=True)], (0.0, 0.0, 0.0),
                      ZERO_NOISE, rng, 0)
    assert events == []


def test_same_seed_identical_outputs():
    cfg = SensorConfig(sigma_pos=0.1, sigma_angle=0.05, dropout=0.3)
    people = [_person(f"p{i}", (1.0 + i, float(i) * 0.3), speaking=i % 2 == 0,
                      desc=make_descriptor(np.random.default_rng(i)))
              for i in range(4)]
    out1 = sense(people, (0.0, 0.0, 0.0), cfg, np.random.default_rng(42), 0)
    out2 = sense(people, (0.0, 0.0, 0.0), cfg, np.random.default_rng(42), 0)
    assert out1 == out2


def test_dropout_breaks_track_but_not_speech():
    cfg = SensorConfig(dropout=1.0)
    rng = np.random.default_rng(1)
    tracks, events = sense([_person("p1", (2.0, 0.0), speaking=True)],
                           (0.0, 0.0, 0.0), cfg, rng, 0)
    assert tracks == [] and len(events) == 1


# --- VFOA ------------------------------------------------------------------------


def test_vfoa_dead_ahead():
    t = _track("p1", (0.0, 0.0), head_yaw=0.0)
    assert estimate_vfoa(t, [("tv", (3.0, 0.0))], ZERO_NOISE) == "tv"


def test_vfoa_picks_smaller_offset_within_cone():
    # robot 0.1 rad off the head direction, screen 0.7 rad off
    t = _track("p1", (0.0, 0.0), head_yaw=0.0)
    robot = (3.0 * math.cos(0.1), 3.0 * math.sin(0.1))
    screen = (3.0 * math.cos(0.7), 3.0 * math.sin(0.7))
    assert estimate_vfoa(t, [("robot", robot), ("screen", screen)], ZERO_NOISE) == "robot"


def test_vfoa_outside_cone_is_none():
    t = _track("p1", (0.0, 0.0), head_yaw=0.0)
    target = (3.0 * math.cos(0.5), 3.0 * math.sin(0.5))
    assert estimate_vfoa(t, [("x", target)], ZERO_NOISE) is None
    assert estimate_vfoa(t, [], ZERO_NOISE) is None


def test_vfoa_matches_bruteforce_oracle():
    rng = np.random.default_rng(123)
    cfg = SensorConfig()
    for _ in range(1000):
        t = _track("p", (float(rng.uniform(-5, 5)), float(rng.uniform(-5, 5))),
                   head_yaw=float(rng.uniform(-math.pi, math.pi)))
        targets = [(f"t{i}", (float(rng.uniform(-5, 5)), float(rng.uniform(-5, 5))))
                   for i in range(int(rng.integers(0, 6)))]
        got = estimate_vfoa(t, targets, cfg)
        offsets = sorted(
            (angular_offset(t.head_yaw, bearing(t.position, pos)), tid)
            for tid, pos in targets
        )
        expected = offsets[0][1] if offsets and offsets[0][0] < cfg.vfoa_cone else None
        assert got == expected


# --- speech assignment ----------------------------------------------------------------


def test_assign_speech_nearest():
    tracks = [_track("a", (1, 1), azimuth=0.14), _track("b", (1, -1), azimuth=1.05)]
    ev = SpeechEvent(azimuth=0.17, p_speech=1.0, tick=0)
    assert assign_speech(ev, tracks, ZERO_NOISE) == "a"


def test_assign_speech_tolerance_cut():
    tracks = [_track("a", (1, 1), azimuth=1.0)]
    ev = SpeechEvent(azimuth=0.0, p_speech=1.0, tick=0)
    assert assign_speech(ev, tracks, ZERO_NOISE) is None


def test_assign_speech_ambiguous():
    tracks = [_track("a", (1, 1), azimuth=0.20), _track("b", (1, -1), azimuth=0.22)]
    ev = SpeechEvent(azimuth=0.21, p_speech=1.0, tick=0)
    with pytest.raises(AmbiguousSpeaker):
        assign_speech(ev, tracks, ZERO_NOISE)


# --- re-identification ------------------------------------------------------------------


def _noisy(mean, sigma, rng):
    return sample_descriptor(mean, sigma, rng)


def test_reidentify_majority_vote():
    rng = np.random.default_rng(7)
    mean2 = make_descriptor(np.random.default_rng(100))
    mean7 = make_descriptor(np.random.default_rng(200))
    gallery = {"id2": [_noisy(mean2, 0.05, rng) for _ in range(5)],
               "id7": [_noisy(mean7, 0.05, rng) for _ in range(5)]}
    samples = [_noisy(mean2, 0.05, rng) for _ in range(3)] + [_noisy(mean7, 0.05, rng) for _ in range(2)]
    assert reidentify(samples, gallery) == "id2"


def test_reidentify_empty_gallery_mints():
    assert reidentify([tuple(np.zeros(DESCRIPTOR_DIM))], {}, mint="fresh") == "fresh"


def test_reidentify_exact_match_full_votes():
    mean = make_descriptor(np.random.default_rng(5))
    gallery = {"idA": [mean]}
    assert reidentify([mean, mean, mean], gallery) == "idA"


def test_reidentify_far_samples_mint_new():
    rng = np.random.default_rng(8)
    gallery = {"idA": [make_descriptor(np.random.default_rng(1))]}
    far = [make_descriptor(np.random.default_rng(1000 + i)) for i in range(5)]
    # random unit vectors in 16-d sit ~sqrt(2) apart: beyond the match radius
    assert reidentify(far, gallery, mint="new") == "new"


def test_reid_consistency_separated_galleries():
    rng = np.random.default_rng(14)
    sigma = 0.05
    means = {f"id{i}": make_descriptor(np.random.default_rng(300 + i)) for i in range(4)}
    # enforce separation of at least twice the noise radius
    noise_radius = sigma * math.sqrt(DESCRIPTOR_DIM)
    for a in means:
        for b in means:
            if a < b:
                d = float(np.linalg.norm(np.array(means[a]) - np.array(means[b])))
                assert d >= 2 * noise_radius
    gallery = {ident: [_noisy(m, sigma, rng) for _ in range(6)] for ident, m in means.items()}
    hits = 0
    trials = 0
    for ident, m in means.items():
        for _ in range(25):
            tracklet = [_noisy(m, sigma, rng) for _ in range(5)]
            trials += 1
            hits += reidentify(tracklet, gallery) == ident
    assert hits == trials  # 100%


def test_tracker_keeps_identity_across_break():
    cfg = SensorConfig(sigma_pos=0.0, sigma_angle=0.0, dropout=0.0, sigma_descriptor=0.02)
    tracker = Tracker(cfg)
    mean = make_descriptor(np.random.default_rng(77))
    rng = np.random.default_rng(3)

    def raw(tick):
        return [PersonTrack(track_id="gt1", position=(2.0, 0.0), head_yaw=0.0, head_pitch=0.0,
                            distance=2.0, azimuth=0.0, tick=tick,
                            descriptor=sample_descriptor(mean, 0.02, rng))]

    first = tracker.update(raw(0), 0)[0].track_id
    tracker.update(raw(1), 1)
    # ticks 2-4 missing: tracklet break
    out = tracker.update(raw(5), 5)
    assert out[0].track_id == first
