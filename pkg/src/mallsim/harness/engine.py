"""The deterministic tick loop wiring perception, state estimation, dialogue,
supervision and navigation together, and the transcript it produces."""

from __future__ import annotations

import math
from importlib import resources

from .. import navigation, social_state
from ..dialogue import ConversationContext, DialogueEngine, load_quiz_bank, parse
from ..dialogue.quiz import QuizState
from ..errors import AmbiguousSpeaker, MallSimError
from ..geometry import Point, bearing, dist, perimeter_points, wrap_angle
from ..perception import (
    GroundTruthPerson,
    SensorConfig,
    Tracker,
    assign_speech,
    estimate_vfoa,
    make_descriptor,
    sense,
)
from ..rng import stream
from ..semantic_map import RouteConstraints, SemanticMap, compute_route, guidance_acts, load_map, verbalize_route
from ..supervision import ExecContext, GuidanceParams, Task, TaskArbiter
from ..svp import OccupancyGrid, SvpConfig, compute_visibility_grid, plan_svp, pointing_angles
from ..world_model import PredicateStore, SceneNode, WorldStore, compute_predicates
from .scenario import Scenario
from .transcript import Transcript

SCREEN_OFFSET = 0.2  # tablet sits this far in front of the robot base
SPEECH_THRESHOLD = 0.5
ARRIVE_TOLERANCE = 0.3
SVP_ARRIVE_TOLERANCE = 1.0
PROTOCOL_VERSION = 1


def load_bundled_map(name: str) -> SemanticMap:
    path = resources.files("mallsim") / "data" / "maps" / f"{name}.json"
    if path.is_file():
        return load_map(path.read_text(encoding="utf-8"))
    with open(name, "r", encoding="utf-8") as f:
        return load_map(f.read())


class Engine:
    """One simulation session over a scenario."""

    def __init__(self, scenario: Scenario, smap: SemanticMap | None = None):
        self.scenario = scenario
        self.smap = smap if smap is not None else load_bundled_map(scenario.map_name)
        self.language = scenario.language
        self.tick = 0
        self.paused = False

        self.robot_region = self._find_grid_region()
        self.grid = OccupancyGrid.from_region(self.smap.regions[self.robot_region])
        self.robot_pose = scenario.robot_start

        self.sensor_cfg = SensorConfig(**scenario.sensor)
        fusion_kwargs = dict(scenario.fusion)
        if "centroids" in fusion_kwargs:
            fusion_kwargs["centroids"] = tuple(tuple(c) for c in fusion_kwargs["centroids"])
        if "weights" in fusion_kwargs:
            fusion_kwargs["weights"] = tuple(fusion_kwargs["weights"])
        self.fusion_cfg = social_state.FusionConfig(**fusion_kwargs)
        self.nav_cfg = navigation.NavConfig(**scenario.nav)
        self.svp_cfg = SvpConfig()
        self.guidance_params = GuidanceParams(**scenario.guidance)

        self.rng_perception = stream(scenario.seed, "perception")
        rng_desc = stream(scenario.seed, "descriptors")
        self.descriptors = {p.id: make_descriptor(rng_desc) for p in scenario.persons}

        self.tracker = Tracker(self.sensor_cfg)
        self.worlds = WorldStore()
        self.predicates = PredicateStore()
        self.ledger = social_state.EngagementLedger()
        self.arbiter = TaskArbiter()
        self.dialogue = DialogueEngine(self.smap, self.language)
        self.context = ConversationContext(language=self.language)
        self.transcript = Transcript()

        self.engaged: str | None = None
        self.absent_streak: dict[str, int] = {}
        self.last_track_pos: dict[str, Point] = {}
        self.tracks = []
        self.attention_records = []
        self.selected: str | None = None

        self.nav_active = False
        self.nav_path: navigation.Path | None = None
        self.nav_goal: tuple[float, float, float] | None = None

        self._vis_cache: dict[str, object] = {}
        self._manual_positions: dict[str, Point] = {}
        self._manual_targets: dict[str, Point] = {}
        self._manual_head: dict[str, dict] = {}
        self._manual_speaking: dict[str, bool] = {}
        self._spawned: dict[str, dict] = {}
        self._injected_utterances: list[tuple[str, str]] = []
        self._dialogue_log: list[dict] = []

        self._landmark_nodes: dict[str, Point] = {}
        self._init_world_nodes()

    # -- setup ----------------------------------------------------------------

    def _find_grid_region(self) -> str:
        for rid in sorted(self.smap.regions):
            if self.smap.regions[rid].grid is not None:
                return rid
        raise MallSimError("map has no gridded region for the robot")

    def _init_world_nodes(self) -> None:
        region = self.smap.regions[self.robot_region]
        for pid in sorted(self.smap.places):
            place = self.smap.places[pid]
            if place.region != self.robot_region:
                continue
            self.worlds.set_node("robot", SceneNode(
                id=pid, x=place.centroid[0], y=place.centroid[1], shape=place.footprint))
            self._landmark_nodes[pid] = place.centroid
        for aid in sorted(self.smap.access_points):
            ap = self.smap.access_points[aid]
            if self.robot_region not in ap.connects:
                continue
            anchor = ap.anchor(self.robot_region)
            self.worlds.set_node("robot", SceneNode(id=aid, x=anchor[0], y=anchor[1]))
            self._landmark_nodes[aid] = anchor
        for i, (x0, y0, x1, y1) in enumerate(region.obstacles):
            self.worlds.set_node("robot", SceneNode(
                id=f"obstacle_{i}", x=(x0 + x1) / 2.0, y=(y0 + y1) / 2.0,
                shape=((x0, y0), (x1, y0), (x1, y1), (x0, y1))))
        self.worlds.set_node("robot", SceneNode(
            id="robot", x=self.robot_pose[0], y=self.robot_pose[1], yaw=self.robot_pose[2]))
        self.worlds.set_node("robot", SceneNode(id="screen", x=self.robot_pose[0], y=self.robot_pose[1]))

    # -- public API -------------------------------------------------------------

    def run(self) -> Transcript:
        while self.tick < self.scenario.max_ticks:
            self.step()
        return self.transcript

    def step(self) -> None:
        if self.paused:
            return
        tick = self.tick
        persons = self._ground_truth(tick)
        self._sense_and_track(persons, tick)
        self._update_worlds(tick)
        self._update_predicates(tick)
        self._update_attention(tick)
        self._manage_engagement(tick)
        self._process_utterances(persons, tick)
        self._supervision_tick(tick)
        self._navigation_tick(tick)
        self.tick += 1

    # -- scripted world ----------------------------------------------------------

    def _ground_truth(self, tick: int) -> list[GroundTruthPerson]:
        out = []
        for sp in self.scenario.persons:
            if not sp.present_at(tick):
                self._manual_positions.pop(sp.id, None)
                continue
            pos = self._scripted_position(sp, tick)
            head = self._manual_head.get(sp.id) or {}
            if head:
                yaw = self._resolve_head(head, pos)
                pitch = head.get("pitch", 0.0)
            else:
                entry = sp.head_at(tick)
                yaw = self._resolve_head(
                    {"yaw": entry.yaw, "look_at": entry.look_at}, pos)
                pitch = entry.pitch
            speaking = self._manual_speaking.get(sp.id, sp.speaking_at(tick))
            out.append(GroundTruthPerson(
                id=sp.id, position=pos, head_yaw=yaw, head_pitch=pitch,
                speaking=speaking, descriptor=self.descriptors[sp.id]))
        for pid in sorted(self._spawned):
            spec = self._spawned[pid]
            pos = self._scripted_position_manual(pid, spec)
            yaw = self._resolve_head(self._manual_head.get(pid, {"yaw": 0.0}), pos)
            out.append(GroundTruthPerson(
                id=pid, position=pos, head_yaw=yaw,
                speaking=self._manual_speaking.get(pid, False),
                descriptor=self.descriptors[pid]))
        return out

    def _scripted_position(self, sp, tick: int) -> Point:
        if sp.id in self._manual_targets or sp.id in self._manual_positions:
            return self._scripted_position_manual(sp.id, {})
        return sp.position_at(tick)

    def _scripted_position_manual(self, pid: str, spec: dict) -> Point:
        pos = self._manual_positions.get(pid, spec.get("pos", (0.0, 0.0)))
        target = self._manual_targets.get(pid)
        if target is not None:
            step = 1.2 / self.scenario.tick_rate  # walking speed
            d = dist(pos, target)
            if d <= step:
                pos = target
                del self._manual_targets[pid]
            else:
                f = step / d
                pos = (pos[0] + f * (target[0] - pos[0]), pos[1] + f * (target[1] - pos[1]))
        self._manual_positions[pid] = pos
        return pos

    def _resolve_head(self, head: dict, pos: Point) -> float:
        look_at = head.get("look_at")
        if look_at is None:
            return float(head.get("yaw") or 0.0)
        if look_at == "robot":
            return bearing(pos, (self.robot_pose[0], self.robot_pose[1]))
        if look_at == "screen":
            return bearing(pos, self._screen_pos())
        if look_at in self._landmark_nodes:
            return bearing(pos, self._landmark_nodes[look_at])
        if look_at in self.last_track_pos:
            return bearing(pos, self.last_track_pos[look_at])
        return 0.0

    def _screen_pos(self) -> Point:
        x, y, yaw = self.robot_pose
        return (x + SCREEN_OFFSET * math.cos(yaw), y + SCREEN_OFFSET * math.sin(yaw))

    # -- perception --------------------------------------------------------------

    def _sense_and_track(self, persons: list[GroundTruthPerson], tick: int) -> None:
        raw_tracks, speech_events = sense(
            persons, self.robot_pose, self.sensor_cfg, self.rng_perception, tick)
        self.tracks = self.tracker.update(raw_tracks, tick)
        present = {t.track_id for t in self.tracks}
        for pid in present:
            self.absent_streak[pid] = 0
        for pid in self.absent_streak:
            if pid not in present:
                self.absent_streak[pid] += 1
        for t in self.tracks:
            self.last_track_pos[t.track_id] = t.position

        targets = [("robot", (self.robot_pose[0], self.robot_pose[1])), ("screen", self._screen_pos())]
        for lid in sorted(self._landmark_nodes):
            targets.append((lid, self._landmark_nodes[lid]))
        self.vfoa: dict[str, str | None] = {}
        for t in self.tracks:
            others = [(o.track_id, o.position) for o in self.tracks if o.track_id != t.track_id]
            self.vfoa[t.track_id] = estimate_vfoa(t, targets + others, self.sensor_cfg)

        speech_payload = []
        self.speakers: set[str] = set()
        for ev in speech_events:
            entry = {"azimuth": ev.azimuth, "p_speech": ev.p_speech, "track": None}
            if ev.p_speech >= SPEECH_THRESHOLD:
                try:
                    assigned = assign_speech(ev, self.tracks, self.sensor_cfg)
                except AmbiguousSpeaker as e:
                    entry["error"] = f"ambiguous speaker: {e}"
                    assigned = None
                entry["track"] = assigned
                if assigned is not None:
                    self.speakers.add(assigned)
            speech_payload.append(entry)

        self.transcript.append(tick, "perception", {
            "robot": {"x": self.robot_pose[0], "y": self.robot_pose[1], "yaw": self.robot_pose[2]},
            "tracks": [
                {"id": t.track_id, "x": t.position[0], "y": t.position[1],
                 "head_yaw": t.head_yaw, "head_pitch": t.head_pitch,
                 "distance": t.distance, "azimuth": t.azimuth,
                 "vfoa": self.vfoa[t.track_id]}
                for t in self.tracks
            ],
            "speech": speech_payload,
        })

    # -- world model ---------------------------------------------------------------

    def _update_worlds(self, tick: int) -> None:
        self.worlds.set_node("robot", SceneNode(
            id="robot", x=self.robot_pose[0], y=self.robot_pose[1], yaw=self.robot_pose[2]))
        sx, sy = self._screen_pos()
        self.worlds.set_node("robot", SceneNode(id="screen", x=sx, y=sy))
        for t in self.tracks:
            self.worlds.set_node("robot", SceneNode(
                id=t.track_id, x=t.position[0], y=t.position[1], yaw=t.head_yaw))
            self.worlds.ensure_belief_world(t.track_id, tick)
            self.worlds.update_belief(t.track_id, self.vfoa[t.track_id], tick)

    def _areas(self) -> dict[str, tuple[Point, ...]]:
        areas: dict[str, tuple[Point, ...]] = {}
        floor = self.smap.regions[self.robot_region].floor
        for rid in sorted(self.smap.regions):
            region = self.smap.regions[rid]
            if region.floor != floor or region.bounds is None:
                continue
            x0, y0, x1, y1 = region.bounds
            areas[rid] = ((x0, y0), (x1, y0), (x1, y1), (x0, y1))
        for pid in sorted(self.smap.places):
            place = self.smap.places[pid]
            if place.floor == floor:
                areas[pid] = place.footprint
        return areas

    def _update_predicates(self, tick: int) -> None:
        visibility: dict[str, dict[str, bool]] = {}
        for lid in sorted(self._vis_cache):
            vis = self._vis_cache[lid]
            visibility[lid] = {
                t.track_id: vis.value_at(t.position) >= self.svp_cfg.v_min
                for t in self.tracks
            }
        current = compute_predicates(
            self._areas(),
            {t.track_id: t.position for t in self.tracks},
            self.vfoa,
            self.speakers,
            visibility,
        )
        opened, closed = self.predicates.update(tick, current)
        for sp in opened:
            self.transcript.append(tick, "predicate", {
                "event": "open", "name": sp.name, "args": list(sp.args), "t_start": sp.t_start})
        for sp in closed:
            self.transcript.append(tick, "predicate", {
                "event": "close", "name": sp.name, "args": list(sp.args),
                "t_start": sp.t_start, "t_end": sp.t_end})

    # -- social state ----------------------------------------------------------------

    def _update_attention(self, tick: int) -> None:
        records = []
        for t in self.tracks:
            rel_yaw = wrap_angle(t.head_yaw - bearing(t.position, (self.robot_pose[0], self.robot_pose[1])))
            p_head = social_state.p_head_pose(rel_yaw, t.head_pitch, self.fusion_cfg)
            p_rg = 1.0 if self.vfoa[t.track_id] == "robot" else 0.0
            p_sg = 1.0 if self.vfoa[t.track_id] == "screen" else 0.0
            p_d = social_state.p_distance(t.distance, self.fusion_cfg)
            fused = social_state.fuse(p_head, p_rg, p_sg, p_d, self.fusion_cfg.weights)
            records.append(social_state.AttentionRecord(
                track_id=t.track_id, p_head=p_head, p_robot_gaze=p_rg,
                p_screen_gaze=p_sg, p_dist=p_d, p_fused=fused,
                distance=t.distance, tick=tick))
        self.attention_records = records
        self.selected = social_state.select_interactant(records, self.ledger, self.fusion_cfg, tick)
        self.transcript.append(tick, "attention", {
            "records": [
                {"track": r.track_id, "p_head": r.p_head, "p_robot_gaze": r.p_robot_gaze,
                 "p_screen_gaze": r.p_screen_gaze, "p_dist": r.p_dist,
                 "p_fused": r.p_fused, "distance": r.distance}
                for r in records
            ],
            "selected": self.selected,
            "ledger": self.ledger.snapshot(),
        })

    # -- engagement --------------------------------------------------------------------

    def _manage_engagement(self, tick: int) -> None:
        if self.engaged is not None:
            streak = self.absent_streak.get(self.engaged, 0)
            if streak >= self.guidance_params.t_lost:
                self.arbiter.abort_all("human_lost")
                self._drain_task_events(tick)
                self._end_engagement(tick)
                return
        if self.engaged is None and self.selected is not None:
            self._start_engagement(self.selected, tick)

    def _start_engagement(self, person: str, tick: int) -> None:
        self.engaged = person
        self.context.person_id = person
        self.context.mode = "chat"
        social_state.on_task_event("interaction_started", person, self.ledger, self.fusion_cfg, tick)
        self._emit_action(tick, {"act": "say", "text": self.dialogue.templates["greeting"]})

    def _end_engagement(self, tick: int) -> None:
        if self.engaged is not None:
            social_state.on_task_event("interaction_ended", self.engaged, self.ledger, self.fusion_cfg, tick)
        self.engaged = None
        self.context = ConversationContext(language=self.language)

    # -- dialogue ----------------------------------------------------------------------

    def _quiz_state(self) -> QuizState | None:
        for task in self.arbiter.active_tasks():
            if task.goal.get("kind") == "quiz" and "quiz" in task.memory:
                return task.memory["quiz"]
        return None

    def _sync_context(self) -> None:
        running = self.arbiter.running
        if running is None:
            self.context.mode = "chat" if self.engaged is not None else "idle"
            self.context.pending_question = None
            self.context.pending_expected = ()
        else:
            kind = running.goal.get("kind")
            self.context.mode = "quiz" if kind == "quiz" else ("guidance" if kind == "guidance" else "chat")
            self.context.pending_question = running.pending_question if running.waiting == "ask" else None
            self.context.pending_expected = running.pending_expected if running.waiting == "ask" else ()

    def _process_utterances(self, persons: list[GroundTruthPerson], tick: int) -> None:
        utterances: list[tuple[str, str]] = []
        for sp in self.scenario.persons:
            if sp.present_at(tick):
                for text in sp.utterances_at(tick):
                    utterances.append((sp.id, text))
        utterances.extend(self._injected_utterances)
        self._injected_utterances = []

        for gt_id, text in utterances:
            speaker = self.tracker.public_id(gt_id)
            self._sync_context()
            quiz = self._quiz_state()
            nlu = parse(text, quiz_active=self.context.mode == "quiz", smap=self.smap)
            in_rec = {"dir": "in", "person": speaker, "text": text,
                      "act": nlu.act,
                      "frames": [{"name": f.name,
                                  "elements": [{"role": e.role, "value": e.value} for e in f.elements]}
                                 for f in nlu.frames]}
            if self.engaged is not None and speaker is not None and speaker != self.engaged:
                in_rec["ignored"] = True
                self.transcript.append(tick, "dialogue", in_rec)
                self._dialogue_log.append(in_rec)
                continue
            self.transcript.append(tick, "dialogue", in_rec)
            self._dialogue_log.append(in_rec)
            if self.engaged is None and speaker is not None:
                self._start_engagement(speaker, tick)
                self._sync_context()

            if nlu.act == "quit" and not self.arbiter.expects("quit"):
                response = self.dialogue.respond(nlu, self.context, quiz)
                self._emit_say(tick, response)
                self.arbiter.abort_all("user_quit")
                self._drain_task_events(tick)
                self._end_engagement(tick)
                continue

            response = self.dialogue.respond(nlu, self.context, quiz)
            if response.task_answer is not None:
                self.arbiter.deliver_act(nlu.act, nlu.value)
            if response.task_goal is not None:
                goal = dict(response.task_goal)
                self.arbiter.submit_goal(goal, person_id=speaker or self.engaged,
                                         params=self.guidance_params)
            self._emit_say(tick, response, bot=response.bot)
            self._drain_task_events(tick)

    def _emit_say(self, tick: int, response, bot: str | None = None) -> None:
        if response.text:
            out_rec = {"dir": "out", "person": self.engaged, "text": response.text}
            if bot:
                out_rec["bot"] = bot
            self.transcript.append(tick, "dialogue", out_rec)
            self._dialogue_log.append(out_rec)

    # -- supervision ----------------------------------------------------------------------

    def _supervision_tick(self, tick: int) -> None:
        actions: list[dict] = []
        ctx = ExecContext(
            tick=tick,
            emit=actions.append,
            computes=self._computes(tick, actions),
            checks=self._checks(tick),
            templates=self.dialogue.templates,
            navigation_done=lambda: not self.nav_active,
            absent_ticks=lambda pid: self.absent_streak.get(pid, 0),
        )
        self.arbiter.tick(ctx)
        for action in actions:
            self._emit_action(tick, action)
        self._drain_task_events(tick)

    def _drain_task_events(self, tick: int) -> None:
        for event in self.arbiter.events:
            payload = dict(event)
            self.transcript.append(tick, "task", payload)
            person = event.get("person")
            if person is not None:
                if event["event"] in ("started", "resumed"):
                    social_state.on_task_event("interaction_started", person, self.ledger, self.fusion_cfg, tick)
                elif event["event"] in ("done", "aborted"):
                    social_state.on_task_event("interaction_ended", person, self.ledger, self.fusion_cfg, tick)
            if event["event"] == "aborted":
                self.nav_active = False
        self.arbiter.events = []

    def _emit_action(self, tick: int, action: dict) -> None:
        payload = dict(action)
        if payload.get("act") == "say":
            self._dialogue_log.append({"dir": "out", "person": self.engaged, "text": payload["text"]})
        self.transcript.append(tick, "action", payload)

    # -- supervision callbacks ---------------------------------------------------------------

    def visibility_grid(self, landmark: str):
        if landmark not in self._vis_cache:
            poly = self.smap.landmark_polygon(landmark, region=self.robot_region)
            samples = perimeter_points(poly, self.svp_cfg.samples_per_landmark)
            self._vis_cache[landmark] = compute_visibility_grid(self.grid, landmark, samples)
        return self._vis_cache[landmark]

    def _person_position(self, person: str | None) -> Point:
        if person is not None and person in self.last_track_pos:
            return self.last_track_pos[person]
        return (self.robot_pose[0], self.robot_pose[1])

    def _computes(self, tick: int, actions: list) -> dict:
        def plan_route(task: Task) -> None:
            constraints = RouteConstraints(no_stairs=bool(task.memory.get("no_stairs")))
            route = compute_route(self.robot_region, task.goal["place"], constraints,
                                  self.smap, start_point=(self.robot_pose[0], self.robot_pose[1]))
            task.memory["route"] = route
            task.memory["route_text"] = verbalize_route(route, self.smap, self.language)

        def replan_no_stairs(task: Task) -> None:
            task.memory["no_stairs"] = True
            plan_route(task)

        def plan_svp_op(task: Task) -> None:
            route = task.memory["route"]
            landmark = route.steps[0].access_point if route.steps else route.destination
            vis = self.visibility_grid(landmark)
            human_pose = self._person_position(task.person_id)
            placement = plan_svp(human_pose, landmark,
                                 self.smap.landmark_point(landmark, region=self.robot_region),
                                 vis, self.svp_cfg)
            task.memory["landmark"] = landmark
            task.memory["placement"] = placement
            task.memory["acts"] = guidance_acts(route, placement, self.smap, self.language)
            task.memory.setdefault("repeats_left", task.params.repeat_limit)

        def start_navigation(task: Task) -> bool:
            placement = task.memory["placement"]
            goal = placement.robot_pose
            here = (self.robot_pose[0], self.robot_pose[1])
            if dist(here, (goal[0], goal[1])) <= ARRIVE_TOLERANCE:
                self.robot_pose = (here[0], here[1], goal[2])
                return False
            path = navigation.plan_global(self.grid, here, (goal[0], goal[1]), self.nav_cfg)
            self.nav_path = path
            self.nav_goal = goal
            self.nav_active = True
            actions.append({"act": "navigate", "goal": [goal[0], goal[1], goal[2]],
                            "path_length": path.total_length})
            return True

        def point(task: Task) -> None:
            act = task.memory["acts"][0]
            angles = pointing_angles(self.robot_pose, tuple(act["target"]),
                                     amplitude=act["amplitude"], speed=act["speed"])
            payload = {"act": "point", "target_kind": act["target_kind"],
                       "target_id": act["target_id"], "target": act["target"]}
            payload.update(angles)
            actions.append(payload)
            task.memory["pointed_tick"] = tick

        def point_and_say(task: Task) -> None:
            acts = task.memory["acts"]
            pointed = [a for a in acts if a["act"] == "point" and a["target_kind"] == "access_point"]
            if pointed:
                act = pointed[0]
                angles = pointing_angles(self.robot_pose, tuple(act["target"]),
                                         amplitude=act["amplitude"], speed=act["speed"])
                payload = {"act": "point", "target_kind": act["target_kind"],
                           "target_id": act["target_id"], "target": act["target"]}
                payload.update(angles)
                actions.append(payload)
                task.memory["pointed_tick"] = tick
                task.memory["pointed_landmark"] = act["target_id"]
            else:
                task.memory.setdefault("pointed_landmark", task.memory["route"].destination)
            say_act = [a for a in acts if a["act"] == "say"][0]
            actions.append({"act": "say", "text": say_act["text"]})

        def consume_repeat(task: Task) -> None:
            task.memory["repeats_left"] = task.memory.get("repeats_left", 0) - 1
            task.memory["answer_act"] = None

        def quiz_start(task: Task) -> None:
            state = QuizState(questions=load_quiz_bank(self.language))
            task.memory["quiz"] = state
            intro = self.dialogue.templates["quiz_intro"]
            actions.append({"act": "say", "text": f"{intro} {state.current.text}"})
            task.memory["quiz_question"] = state.current.text

        def quiz_step(task: Task) -> None:
            from ..dialogue.nlu import NluResult
            from ..dialogue.quiz import quiz_turn
            state: QuizState = task.memory["quiz"]
            nlu = NluResult(act=task.memory.get("answer_act") or "statement", frames=(),
                            raw="", value=task.memory.get("answer_value"))
            feedback, _ = quiz_turn(nlu, state, self.dialogue.templates)
            if feedback:
                actions.append({"act": "say", "text": feedback})
            if not state.finished:
                task.memory["quiz_question"] = state.current.text

        return {
            "plan_route": plan_route,
            "replan_no_stairs": replan_no_stairs,
            "plan_svp": plan_svp_op,
            "start_navigation": start_navigation,
            "point": point,
            "point_and_say": point_and_say,
            "consume_repeat": consume_repeat,
            "quiz_start": quiz_start,
            "quiz_step": quiz_step,
        }

    def _checks(self, tick: int) -> dict:
        def route_has_stairs(task: Task) -> bool:
            route = task.memory["route"]
            return any(self.smap.access_points[s.access_point].kind == "stairs" for s in route.steps)

        def answer_deny(task: Task) -> bool:
            return task.memory.get("answer_act") == "deny"

        def deny_and_repeats_left(task: Task) -> bool:
            return (task.memory.get("answer_act") == "deny"
                    and task.memory.get("repeats_left", 0) > 0)

        def quiz_finished(task: Task) -> bool:
            return task.memory["quiz"].finished

        def human_at_svp(task: Task) -> bool:
            placement = task.memory["placement"]
            person = task.person_id
            track = next((t for t in self.tracks if t.track_id == person), None)
            if track is None:
                return False
            if dist(track.position, placement.human_target) > SVP_ARRIVE_TOLERANCE:
                return False
            vis = self.visibility_grid(task.memory["landmark"])
            return vis.value_at(track.position) >= self.svp_cfg.v_min

        def human_looked(task: Task) -> bool:
            person = task.person_id
            landmark = task.memory.get("pointed_landmark") or task.memory.get("landmark")
            if person is None or landmark is None:
                return False
            looked = self.worlds.last_looked(person, landmark)
            return looked is not None and looked >= task.memory.get("pointed_tick", 0)

        return {
            "route_has_stairs": route_has_stairs,
            "answer_deny": answer_deny,
            "deny_and_repeats_left": deny_and_repeats_left,
            "quiz_finished": quiz_finished,
            "human_at_svp": human_at_svp,
            "human_looked": human_looked,
        }

    # -- navigation -----------------------------------------------------------------------

    def _navigation_tick(self, tick: int) -> None:
        if not self.nav_active or self.nav_path is None or self.nav_goal is None:
            return
        humans = [t.position for t in self.tracks]
        dt = 1.0 / self.scenario.tick_rate
        new_pose, _plan = navigation.step_local(
            self.robot_pose, self.nav_path, humans, self.grid, self.nav_cfg, dt)
        self.robot_pose = new_pose
        gx, gy, gyaw = self.nav_goal
        if dist((new_pose[0], new_pose[1]), (gx, gy)) <= ARRIVE_TOLERANCE:
            self.robot_pose = (new_pose[0], new_pose[1], gyaw)
            self.nav_active = False
            self.nav_path = None
            self.nav_goal = None
            self._emit_action(tick, {"act": "navigate_arrived",
                                     "pose": [self.robot_pose[0], self.robot_pose[1], self.robot_pose[2]]})

    # -- serve support ------------------------------------------------------------------------

    def apply_command(self, cmd: dict) -> None:
        """Apply one operator command at a tick boundary. Raises on bad input."""
        kind = cmd.get("command")
        if kind == "utter":
            self._injected_utterances.append((str(cmd["person"]), str(cmd["text"])))
        elif kind == "move_person":
            pid = str(cmd["person"])
            self._require_person(pid)
            self._manual_targets[pid] = (float(cmd["pos"][0]), float(cmd["pos"][1]))
            if pid not in self._manual_positions:
                sp = self._scenario_person(pid)
                start = sp.position_at(self.tick) if sp is not None else self._spawned[pid]["pos"]
                self._manual_positions[pid] = start
        elif kind == "set_head":
            pid = str(cmd["person"])
            self._require_person(pid)
            head = {}
            if "yaw" in cmd:
                head["yaw"] = float(cmd["yaw"])
            if "look_at" in cmd:
                head["look_at"] = cmd["look_at"]
            if not head:
                raise MallSimError("set_head needs yaw or look_at")
            self._manual_head[pid] = head
        elif kind == "set_speaking":
            pid = str(cmd["person"])
            self._require_person(pid)
            self._manual_speaking[pid] = bool(cmd["speaking"])
        elif kind == "spawn_person":
            pid = str(cmd["person"])
            if self._scenario_person(pid) is not None or pid in self._spawned:
                raise MallSimError(f"person {pid!r} already exists")
            pos = (float(cmd["pos"][0]), float(cmd["pos"][1]))
            self._spawned[pid] = {"pos": pos}
            self._manual_positions[pid] = pos
            rng = stream(self.scenario.seed, f"descriptor:{pid}")
            self.descriptors[pid] = make_descriptor(rng)
        elif kind == "pause":
            self.paused = True
        elif kind == "resume":
            self.paused = False
        elif kind == "inject_goal":
            goal = cmd.get("goal") or {}
            self.arbiter.submit_goal(dict(goal), person_id=cmd.get("person") or self.engaged,
                                     params=self.guidance_params)
            self._drain_task_events(self.tick)
        else:
            raise MallSimError(f"unknown command {kind!r}")

    def _scenario_person(self, pid: str):
        for sp in self.scenario.persons:
            if sp.id == pid:
                return sp
        return None

    def _require_person(self, pid: str) -> None:
        if self._scenario_person(pid) is None and pid not in self._spawned:
            raise MallSimError(f"unknown person {pid!r}")

    def snapshot(self) -> dict:
        running = self.arbiter.running
        task_payload = None
        if running is not None:
            task_payload = {"id": running.id, "goal": running.goal, "state": running.state,
                            "person": running.person_id,
                            "pending_question": running.pending_question}
        persons = []
        for gt in self._ground_truth(self.tick):
            persons.append({"id": gt.id, "x": gt.position[0], "y": gt.position[1],
                            "head_yaw": gt.head_yaw, "speaking": gt.speaking})
        last_perc = next((r for r in reversed(self.transcript.records)
                          if r["channel"] == "perception"), None)
        last_att = next((r for r in reversed(self.transcript.records)
                         if r["channel"] == "attention"), None)
        return {
            "kind": "snapshot",
            "protocol_version": PROTOCOL_VERSION,
            "tick": self.tick,
            "paused": self.paused,
            "robot": {"x": self.robot_pose[0], "y": self.robot_pose[1], "yaw": self.robot_pose[2]},
            "persons": persons,
            "tracks": last_perc["tracks"] if last_perc else [],
            "attention": {
                "records": last_att["records"] if last_att else [],
                "selected": last_att["selected"] if last_att else None,
            },
            "task": task_payload,
            "engaged": self.engaged,
            "dialogue": self._dialogue_log[-20:],
            "visibility_grids": sorted(self._vis_cache),
        }

    def visgrid_payload(self, landmark: str) -> dict:
        if landmark not in self.smap.places and landmark not in self.smap.access_points:
            raise MallSimError(f"unknown landmark {landmark!r}")
        vis = self.visibility_grid(landmark)
        return {
            "kind": "visgrid",
            "protocol_version": PROTOCOL_VERSION,
            "tick": self.tick,
            "landmark": landmark,
            "origin": [vis.grid.origin[0], vis.grid.origin[1]],
            "resolution": vis.grid.resolution,
            "width": vis.grid.width,
            "height": vis.grid.height,
            "values": [float(v) for row in vis.values for v in row],
        }

    def map_payload(self) -> dict:
        region = self.smap.regions[self.robot_region]
        return {
            "kind": "hello",
            "protocol_version": PROTOCOL_VERSION,
            "tick": self.tick,
            "map": {
                "region": self.robot_region,
                "bounds": list(region.bounds) if region.bounds else None,
                "resolution": self.grid.resolution,
                "width": self.grid.width,
                "height": self.grid.height,
                "obstacles": [list(o) for o in region.obstacles],
                "places": [
                    {"id": p.id, "label": p.label,
                     "footprint": [[x, y] for x, y in p.footprint],
                     "centroid": [p.centroid[0], p.centroid[1]],
                     "region": p.region}
                    for p in (self.smap.places[k] for k in sorted(self.smap.places))
                ],
                "access_points": [
                    {"id": a.id, "kind": a.kind,
                     "anchor": ([*a.anchor(self.robot_region)]
                                if self.robot_region in a.anchors else [*a.anchor(a.connects[0])])}
                    for a in (self.smap.access_points[k] for k in sorted(self.smap.access_points))
                ],
            },
        }


def run_scenario(scenario: Scenario) -> Transcript:
    return Engine(scenario).run()
