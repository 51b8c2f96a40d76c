import pytest

from mallsim.errors import NoRoute, UnknownGoal
from mallsim.supervision import (
    ABORTED,
    DONE,
    PAUSED,
    RUNNING,
    ExecContext,
    GuidanceParams,
    Recipe,
    TaskArbiter,
    ask,
    branch,
    compute,
    goto,
    guidance_recipe,
    quiz_recipe,
    route_description_recipe,
    say,
)

TEMPLATES = {
    "stairs_question": "stairs?",
    "understood_question": "understood?",
    "repeat_intro": "again.",
    "closing": "closing.",
    "no_route": "no route.",
    "no_view": "no view.",
}


class Harness:
    """Minimal stand-in for the engine around a TaskArbiter."""

    def __init__(self):
        self.arbiter = TaskArbiter()
        self.tick = 0
        self.actions = []
        self.absent = {}
        self.computes = {}
        self.checks = {}
        self.nav_done = True

    def ctx(self):
        return ExecContext(
            tick=self.tick,
            emit=self.actions.append,
            computes=self.computes,
            checks=self.checks,
            templates=TEMPLATES,
            navigation_done=lambda: self.nav_done,
            absent_ticks=lambda pid: self.absent.get(pid, 0),
        )

    def step(self):
        self.arbiter.tick(self.ctx())
        self.tick += 1

    def events(self, kind=None):
        return [e for e in self.arbiter.events if kind is None or e["event"] == kind]


def _noop_recipe(name="noop", steps=None):
    return Recipe(name=name, steps=tuple(steps or (say("closing"),)))


def test_submit_unknown_goal():
    with pytest.raises(UnknownGoal):
        TaskArbiter().submit_goal({"kind": "karaoke"})


def test_submit_pauses_running_task():
    h = Harness()
    guidance = h.arbiter.submit_goal({"kind": "guidance", "place": "toy_shop"}, "p1")
    assert guidance.state == RUNNING
    quiz = h.arbiter.submit_goal({"kind": "quiz"}, "p1")
    assert guidance.state == PAUSED
    assert quiz.state == RUNNING
    assert h.arbiter.running is quiz
    assert h.arbiter.resume_stack == [guidance]


def test_single_runner_invariant():
    h = Harness()
    for kind in ("guidance", "quiz", "route-description"):
        goal = {"kind": kind, "place": "toy_shop"} if kind != "quiz" else {"kind": kind}
        h.arbiter.submit_goal(goal, "p1")
        running = [t for t in h.arbiter.tasks.values() if t.state == RUNNING]
        assert len(running) == 1


def test_lifo_resume_with_three_interruptions():
    h = Harness()
    order = []
    for i in range(3):
        recipe = _noop_recipe(f"t{i}")
        task = h.arbiter.submit_goal({"kind": "quiz"}, "p1")
        task.recipe = recipe
        task.ops = recipe.compile()
        task.memory["tag"] = i
    # running task is #2; the stack holds [0, 1]
    finished = []
    for _ in range(12):
        before = h.arbiter.running
        h.step()
        if before is not None and before.state == DONE:
            finished.append(before.memory["tag"])
    assert finished == [2, 1, 0]


def test_pending_question_reraised_within_two_ticks_of_resume():
    h = Harness()
    asker = h.arbiter.submit_goal({"kind": "quiz"}, "p1")
    recipe = Recipe("asker", (ask("stairs_question", ("affirm", "deny")), say("closing")))
    asker.recipe, asker.ops = recipe, recipe.compile()
    h.step()  # emits the question, task now blocked
    assert h.actions == [{"act": "say", "text": "stairs?"}]
    assert asker.pending_question == "stairs?"

    interrupter = h.arbiter.submit_goal({"kind": "quiz"}, "p1")
    interrupter.recipe, interrupter.ops = _noop_recipe(), _noop_recipe().compile()
    resume_tick = None
    h.actions.clear()
    for _ in range(6):
        h.step()
        if h.arbiter.running is asker and resume_tick is None:
            resume_tick = h.tick
        if any(a["text"] == "stairs?" for a in h.actions):
            break
    assert any(a["text"] == "stairs?" for a in h.actions)
    assert h.tick - resume_tick <= 2


def test_answer_delivery_and_branching():
    h = Harness()
    task = h.arbiter.submit_goal({"kind": "guidance", "place": "x"}, "p1")
    recipe = Recipe("mini", (
        ask("stairs_question", ("affirm", "deny")),
        branch("answer_deny", then_steps=(say("repeat_intro"),)),
        say("closing"),
    ))
    task.recipe, task.ops = recipe, recipe.compile()
    h.checks["answer_deny"] = lambda t: t.memory.get("answer_act") == "deny"
    h.step()
    assert not h.arbiter.deliver_act("quit")  # not among the expected acts
    assert h.arbiter.deliver_act("deny")
    assert task.pending_question is None
    h.step()
    h.step()
    assert [a["text"] for a in h.actions] == ["stairs?", "again.", "closing."]
    assert task.state == DONE


def test_goto_loop_executes_again():
    h = Harness()
    task = h.arbiter.submit_goal({"kind": "quiz"}, "p1")
    recipe = Recipe("loop", (
        say("repeat_intro", label="top"),
        branch("again", then_steps=(compute("mark"), goto("top"))),
        say("closing"),
    ))
    task.recipe, task.ops = recipe, recipe.compile()
    h.checks["again"] = lambda t: not t.memory.get("done_once")
    h.computes["mark"] = lambda t: t.memory.__setitem__("done_once", True)
    for _ in range(6):
        h.step()
    texts = [a["text"] for a in h.actions]
    assert texts == ["again.", "again.", "closing."]


def test_compute_failure_aborts_with_apology():
    h = Harness()
    task = h.arbiter.submit_goal({"kind": "route-description", "place": "x"}, "p1")
    recipe = route_description_recipe("x")
    task.recipe, task.ops = recipe, recipe.compile()

    def boom(t):
        raise NoRoute("nope")

    h.computes["plan_route"] = boom
    h.step()
    assert task.state == ABORTED and task.abort_reason == "planning_failed"
    assert h.actions == [{"act": "say", "text": "no route."}]
    aborted = h.events("aborted")
    assert len(aborted) == 1 and aborted[0]["reason"] == "planning_failed"


def test_abort_emits_exactly_one_task_ended_event():
    h = Harness()
    task = h.arbiter.submit_goal({"kind": "quiz"}, "p1")
    h.arbiter.abort(task, "user_quit")
    h.arbiter.abort(task, "user_quit")  # second abort is a no-op
    assert len(h.events("aborted")) == 1
    assert task.state == ABORTED


def test_watchdog_aborts_after_t_lost():
    h = Harness()
    params = GuidanceParams(t_lost=100)
    task = h.arbiter.submit_goal({"kind": "guidance", "place": "x"}, "p1", params=params)
    recipe = Recipe("wait", (ask("stairs_question", ("affirm",)),))
    task.recipe, task.ops = recipe, recipe.compile()
    h.absent["p1"] = 99
    h.step()
    assert task.state == RUNNING
    h.absent["p1"] = 101
    h.step()
    assert task.state == ABORTED and task.abort_reason == "human_lost"


def test_watchdog_resets_on_reappearance():
    h = Harness()
    task = h.arbiter.submit_goal({"kind": "guidance", "place": "x"}, "p1")
    recipe = Recipe("wait", (ask("stairs_question", ("affirm",)),))
    task.recipe, task.ops = recipe, recipe.compile()
    for streak in (3, 0, 3, 0):
        h.absent["p1"] = streak
        h.step()
    assert task.state == RUNNING


def test_watchdog_noop_when_done():
    h = Harness()
    task = h.arbiter.submit_goal({"kind": "quiz"}, "p1")
    task.recipe, task.ops = _noop_recipe(), _noop_recipe().compile()
    h.step()
    assert task.state == DONE
    h.absent["p1"] = 1000
    h.step()
    assert task.state == DONE


def test_guidance_params_validation():
    with pytest.raises(ValueError):
        GuidanceParams(t_lost=0)


def test_guidance_recipe_step_order():
    recipe = guidance_recipe("toy_shop", GuidanceParams())
    kinds = [(s.kind, s.phys_kind or s.compute or s.check or s.condition or s.text_key)
             for s in recipe.steps]
    assert kinds == [
        ("compute", "plan_route"),
        ("branch", "route_has_stairs"),
        ("compute", "plan_svp"),
        ("physical", "navigate"),
        ("check", "human_at_svp"),
        ("physical", "point"),
        ("physical", "point_and_say"),
        ("check", "human_looked"),
        ("ask", None),
        ("branch", "deny_and_repeats_left"),
        ("say", "closing"),
    ]
    no_nav = guidance_recipe("toy_shop", GuidanceParams(navigate_enabled=False))
    assert all(s.phys_kind != "navigate" for s in no_nav.steps)


def test_recipe_validation():
    with pytest.raises(ValueError):
        ask("q", ())
    with pytest.raises(ValueError):
        Recipe("bad", (goto("missing"),)).compile()
    quiz = quiz_recipe()
    ops = quiz.compile()
    assert any(op[0] == "jump" for op in ops)


def test_recipe_from_dict_roundtrip():
    from mallsim.supervision import recipe_from_dict

    doc = {
        "name": "probe",
        "steps": [
            {"kind": "compute", "compute": "plan_route"},
            {"kind": "branch", "condition": "route_has_stairs", "then": [
                {"kind": "ask", "prompt_key": "stairs_question", "expected": ["affirm", "deny"]},
            ]},
            {"kind": "say", "text_key": "closing", "label": "end"},
            {"kind": "goto", "goto": "end"},
        ],
    }
    recipe = recipe_from_dict(doc)
    assert recipe.name == "probe"
    assert recipe.steps[0].compute == "plan_route"
    assert recipe.steps[1].then_steps[0].expected == ("affirm", "deny")
    with pytest.raises(ValueError):
        recipe_from_dict({"steps": [{"kind": "dance"}]})
    with pytest.raises(ValueError):
        recipe_from_dict({"steps": [{"kind": "goto", "goto": "nowhere"}]})
