"""Recipe-driven task supervision.

Tasks execute ordered recipes of dialogue and physical steps, one step per
tick, on a single logical runner. Submitting a new goal pauses the current
task; paused tasks resume in LIFO order and re-raise their open question.
A watchdog aborts a task when its person has not been perceived for a
configurable stretch of ticks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import MallSimError, NoRoute, NoRobotPose, NoSharedPerspective, UnknownGoal

PENDING = "pending"
RUNNING = "running"
PAUSED = "paused"
DONE = "done"
ABORTED = "aborted"

GOAL_KINDS = ("guidance", "route-description", "quiz")


@dataclass(frozen=True)
class GuidanceParams:
    t_lost: int = 100       # ticks without the person before aborting
    repeat_limit: int = 2   # additional pointing rounds offered
    navigate_enabled: bool = True
    svp_check_timeout: int = 150
    look_check_timeout: int = 60

    def __post_init__(self):
        if self.t_lost <= 0:
            raise ValueError("t_lost must be positive")


# ---------------------------------------------------------------------------
# Recipe structure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Step:
    """One recipe step; the constructor helpers below are the public surface."""

    kind: str  # say | ask | physical | check | compute | branch | goto
    label: str | None = None
    text_key: str | None = None            # say
    prompt_key: str | None = None          # ask (None = silent, question kept in memory)
    expected: tuple[str, ...] = ()         # ask
    phys_kind: str | None = None           # physical: navigate | point | point_and_say
    params: dict | None = None
    check: str | None = None               # check
    timeout: int = 0
    on_timeout: str | None = None          # proceed | svp_replan_once | abort
    compute: str | None = None             # compute: registry key
    condition: str | None = None           # branch
    then_steps: tuple["Step", ...] = ()
    else_steps: tuple["Step", ...] = ()
    goto: str | None = None

    def __post_init__(self):
        if self.kind == "ask" and not self.expected:
            raise ValueError("ask steps must declare expected acts")
        if self.kind == "check" and self.timeout <= 0:
            raise ValueError("check steps need a positive timeout")


def say(text_key: str, label: str | None = None) -> Step:
    return Step(kind="say", text_key=text_key, label=label)


def ask(prompt_key: str | None, expected: tuple[str, ...], label: str | None = None) -> Step:
    return Step(kind="ask", prompt_key=prompt_key, expected=expected, label=label)


def physical(phys_kind: str, label: str | None = None, **params) -> Step:
    return Step(kind="physical", phys_kind=phys_kind, params=params or None, label=label)


def check(name: str, timeout: int, on_timeout: str, label: str | None = None) -> Step:
    return Step(kind="check", check=name, timeout=timeout, on_timeout=on_timeout, label=label)


def compute(name: str, label: str | None = None) -> Step:
    return Step(kind="compute", compute=name, label=label)


def branch(condition: str, then_steps: tuple[Step, ...] = (), else_steps: tuple[Step, ...] = (),
           label: str | None = None) -> Step:
    return Step(kind="branch", condition=condition, then_steps=tuple(then_steps),
                else_steps=tuple(else_steps), label=label)


def goto(target: str) -> Step:
    return Step(kind="goto", goto=target)


@dataclass(frozen=True)
class Recipe:
    name: str
    steps: tuple[Step, ...]

    def compile(self) -> list[tuple]:
        """Flatten nested branches into (op, ...) tuples with jump targets."""
        ops: list = []
        labels: dict[str, int] = {}
        fixups: list[tuple[int, str]] = []

        def emit(step: Step) -> None:
            if step.label:
                labels[step.label] = len(ops)
            if step.kind == "branch":
                cond_at = len(ops)
                ops.append(None)  # placeholder: ("branch", condition, else_target)
                for s in step.then_steps:
                    emit(s)
                end_jump_at = len(ops)
                ops.append(None)  # placeholder: ("jump", end)
                else_at = len(ops)
                for s in step.else_steps:
                    emit(s)
                end_at = len(ops)
                ops[cond_at] = ("branch", step.condition, else_at)
                ops[end_jump_at] = ("jump", end_at)
            elif step.kind == "goto":
                fixups.append((len(ops), step.goto))
                ops.append(None)
            else:
                ops.append(("step", step))

        for s in self.steps:
            emit(s)
        for at, target in fixups:
            if target not in labels:
                raise ValueError(f"goto target {target!r} not found in recipe {self.name!r}")
            ops[at] = ("jump", labels[target])
        return ops


def guidance_recipe(place_id: str, params: GuidanceParams) -> Recipe:
    """The full route guidance plan with its contingencies."""
    steps = [
        compute("plan_route"),
        branch("route_has_stairs", then_steps=(
            ask("stairs_question", ("affirm", "deny")),
            branch("answer_deny", then_steps=(compute("replan_no_stairs"),)),
        )),
        compute("plan_svp"),
    ]
    if params.navigate_enabled:
        steps.append(physical("navigate"))
    steps += [
        check("human_at_svp", timeout=params.svp_check_timeout, on_timeout="svp_replan_once"),
        physical("point", label="pointing"),
        physical("point_and_say"),
        check("human_looked", timeout=params.look_check_timeout, on_timeout="proceed"),
        ask("understood_question", ("affirm", "deny")),
        branch("deny_and_repeats_left", then_steps=(
            compute("consume_repeat"),
            say("repeat_intro"),
            goto("pointing"),
        )),
        say("closing"),
    ]
    return Recipe(name=f"guidance:{place_id}", steps=tuple(steps))


def route_description_recipe(place_id: str) -> Recipe:
    return Recipe(name=f"route-description:{place_id}", steps=(
        compute("plan_route"),
        say("mem:route_text"),
    ))


def quiz_recipe() -> Recipe:
    return Recipe(name="quiz", steps=(
        compute("quiz_start"),
        ask(None, ("answer", "quit"), label="quiz_ask"),
        compute("quiz_step"),
        branch("quiz_finished", else_steps=(goto("quiz_ask"),)),
    ))


def recipe_from_dict(doc: dict) -> Recipe:
    """Structured-text (JSON) recipe override format, see docs/recipes.md.

    Each step is an object with a `kind` plus the fields of that kind;
    branch steps nest `then`/`else` step lists.
    """

    def parse_step(spec: dict) -> Step:
        kind = spec.get("kind")
        label = spec.get("label")
        if kind == "say":
            return say(spec["text_key"], label=label)
        if kind == "ask":
            return ask(spec.get("prompt_key"), tuple(spec["expected"]), label=label)
        if kind == "physical":
            return physical(spec["phys_kind"], label=label, **spec.get("params", {}))
        if kind == "check":
            return check(spec["check"], int(spec["timeout"]), spec["on_timeout"], label=label)
        if kind == "compute":
            return compute(spec["compute"], label=label)
        if kind == "branch":
            return branch(
                spec["condition"],
                then_steps=tuple(parse_step(s) for s in spec.get("then", [])),
                else_steps=tuple(parse_step(s) for s in spec.get("else", [])),
                label=label,
            )
        if kind == "goto":
            return goto(spec["goto"])
        raise ValueError(f"unknown recipe step kind {kind!r}")

    steps = tuple(parse_step(s) for s in doc["steps"])
    recipe = Recipe(name=str(doc.get("name", "override")), steps=steps)
    recipe.compile()  # validate labels eagerly
    return recipe


# ---------------------------------------------------------------------------
# Tasks and the arbiter
# ---------------------------------------------------------------------------


@dataclass
class Task:
    id: int
    goal: dict
    recipe: Recipe
    person_id: str | None
    params: GuidanceParams
    state: str = PENDING
    pc: int = 0
    waiting: str | None = None  # ask | check | navigate
    pending_question: str | None = None
    pending_expected: tuple[str, ...] = ()
    check_deadline: int | None = None
    abort_reason: str | None = None
    memory: dict = field(default_factory=dict)
    ops: list = field(default_factory=list)

    def __post_init__(self):
        self.ops = self.recipe.compile()


class ExecContext:
    """Callbacks the arbiter needs from the surrounding engine.

    computes: name -> fn(task) -> None, may emit actions and raise module
    errors. checks: name -> fn(task) -> bool. Actions emitted through emit()
    are collected per tick by the engine.
    """

    def __init__(self, tick: int, emit, computes: dict, checks: dict,
                 templates: dict, navigation_done, absent_ticks):
        self.tick = tick
        self.emit = emit
        self.computes = computes
        self.checks = checks
        self.templates = templates
        self.navigation_done = navigation_done
        self.absent_ticks = absent_ticks  # fn(person_id) -> int


class TaskArbiter:
    def __init__(self):
        self._ids = itertools.count(1)
        self.tasks: dict[int, Task] = {}
        self.running: Task | None = None
        self.resume_stack: list[Task] = []
        self.events: list[dict] = []  # drained by the engine every tick

    # -- lifecycle -----------------------------------------------------------

    def _event(self, kind: str, task: Task, **extra) -> None:
        e = {"event": kind, "task": task.id, "goal": task.goal, "person": task.person_id}
        e.update(extra)
        self.events.append(e)

    def submit_goal(self, goal: dict, person_id: str | None = None,
                    params: GuidanceParams | None = None) -> Task:
        kind = goal.get("kind")
        if kind not in GOAL_KINDS:
            raise UnknownGoal(str(kind))
        params = params or GuidanceParams()
        if kind == "guidance":
            recipe = guidance_recipe(goal["place"], params)
        elif kind == "route-description":
            recipe = route_description_recipe(goal["place"])
        else:
            recipe = quiz_recipe()
        task = Task(id=next(self._ids), goal=dict(goal), recipe=recipe,
                    person_id=person_id, params=params)
        self.tasks[task.id] = task
        self._event("submitted", task)
        if self.running is not None:
            self.running.state = PAUSED
            self.resume_stack.append(self.running)
            self._event("paused", self.running)
            self.running = None
        task.state = RUNNING
        self.running = task
        self._event("started", task)
        return task

    def abort(self, task: Task, reason: str) -> None:
        if task.state in (DONE, ABORTED):
            return
        task.state = ABORTED
        task.abort_reason = reason
        task.waiting = None
        if self.running is task:
            self.running = None
        if task in self.resume_stack:
            self.resume_stack.remove(task)
        self._event("aborted", task, reason=reason)

    def abort_all(self, reason: str) -> None:
        if self.running is not None:
            self.abort(self.running, reason)
        for t in list(self.resume_stack):
            self.abort(t, reason)

    def active_tasks(self) -> list[Task]:
        out = [t for t in (self.running,) if t is not None]
        out.extend(self.resume_stack)
        return out

    # -- answers from dialogue -------------------------------------------------

    def deliver_act(self, act: str, value: int | None = None) -> bool:
        """Feed a dialogue act to the running task's open question."""
        t = self.running
        if t is None or t.waiting != "ask" or act not in t.pending_expected:
            return False
        t.memory["answer_act"] = act
        t.memory["answer_value"] = value
        t.pending_question = None
        t.pending_expected = ()
        t.waiting = None
        t.pc += 1
        self._event("answered", t, act=act, value=value)
        return True

    def expects(self, act: str) -> bool:
        t = self.running
        return t is not None and t.waiting == "ask" and act in t.pending_expected

    # -- watchdog ---------------------------------------------------------------

    def watchdog(self, task: Task, ctx: ExecContext) -> bool:
        """Abort when the bound person has been unseen for too long."""
        if task.state != RUNNING or task.person_id is None:
            return False
        if ctx.absent_ticks(task.person_id) >= task.params.t_lost:
            self.abort(task, "human_lost")
            return True
        return False

    # -- the per-tick step -------------------------------------------------------

    def tick(self, ctx: ExecContext) -> None:
        if self.running is None and self.resume_stack:
            task = self.resume_stack.pop()
            task.state = RUNNING
            self.running = task
            self._event("resumed", task)
            if task.pending_question is not None:
                ctx.emit({"act": "say", "text": task.pending_question})
                self._event("question", task, text=task.pending_question, reraised=True)
            return
        task = self.running
        if task is None:
            return
        if self.watchdog(task, ctx):
            return
        if task.waiting == "ask":
            return
        if task.waiting == "navigate":
            if ctx.navigation_done():
                task.waiting = None
                task.pc += 1
            return
        if task.waiting == "check":
            op = task.ops[task.pc]
            step: Step = op[1]
            if ctx.checks[step.check](task):
                task.waiting = None
                task.check_deadline = None
                task.pc += 1
            elif task.check_deadline is not None and ctx.tick >= task.check_deadline:
                self._timeout(task, step, ctx)
            return
        self._execute(task, ctx)

    def _timeout(self, task: Task, step: Step, ctx: ExecContext) -> None:
        self._event("contingency", task, check=step.check, outcome=step.on_timeout)
        if step.on_timeout == "proceed":
            task.waiting = None
            task.check_deadline = None
            task.pc += 1
        elif step.on_timeout == "svp_replan_once" and not task.memory.get("svp_replanned"):
            task.memory["svp_replanned"] = True
            try:
                ctx.computes["plan_svp"](task)
            except MallSimError as e:
                self._planning_failure(task, e, ctx)
                return
            task.check_deadline = ctx.tick + step.timeout
        else:
            self._planning_failure(task, NoSharedPerspective("gave up waiting"), ctx)

    def _planning_failure(self, task: Task, err: MallSimError, ctx: ExecContext) -> None:
        if isinstance(err, NoRoute):
            key = "no_route"
        elif isinstance(err, (NoSharedPerspective, NoRobotPose)):
            key = "no_view"
        else:
            key = "no_route"
        ctx.emit({"act": "say", "text": ctx.templates[key]})
        self.abort(task, "planning_failed")

    def _execute(self, task: Task, ctx: ExecContext) -> None:
        while True:
            if task.pc >= len(task.ops):
                task.state = DONE
                self._event("done", task)
                if self.running is task:
                    self.running = None
                return
            op = task.ops[task.pc]
            if op[0] == "jump":
                task.pc = op[1]
                continue
            if op[0] == "branch":
                cond = ctx.checks[op[1]](task)
                if cond:
                    task.pc += 1
                else:
                    task.pc = op[2]
                continue
            break
        step: Step = op[1]
        if step.kind == "say":
            text = self._resolve_text(step.text_key, task, ctx)
            ctx.emit({"act": "say", "text": text})
            task.pc += 1
        elif step.kind == "ask":
            if step.prompt_key is not None:
                question = self._resolve_text(step.prompt_key, task, ctx)
                ctx.emit({"act": "say", "text": question})
            else:
                question = task.memory.get("quiz_question", "")
            task.pending_question = question
            task.pending_expected = step.expected
            task.waiting = "ask"
            self._event("question", task, text=question, reraised=False)
        elif step.kind == "check":
            if ctx.checks[step.check](task):
                task.pc += 1
            else:
                task.waiting = "check"
                task.check_deadline = ctx.tick + step.timeout
        elif step.kind == "compute":
            try:
                ctx.computes[step.compute](task)
            except MallSimError as e:
                self._planning_failure(task, e, ctx)
                return
            task.pc += 1
        elif step.kind == "physical":
            try:
                if step.phys_kind == "navigate":
                    started = ctx.computes["start_navigation"](task)
                    if started:
                        task.waiting = "navigate"
                    else:
                        task.pc += 1
                else:
                    ctx.computes[step.phys_kind](task)
                    task.pc += 1
            except MallSimError as e:
                self._planning_failure(task, e, ctx)
                return
        else:
            raise AssertionError(f"unhandled step kind {step.kind!r}")
        if task.pc >= len(task.ops) and task.waiting is None:
            task.state = DONE
            self._event("done", task)
            if self.running is task:
                self.running = None

    @staticmethod
    def _resolve_text(key: str | None, task: Task, ctx: ExecContext) -> str:
        if key is None:
            return ""
        if key.startswith("mem:"):
            return str(task.memory.get(key[4:], ""))
        return ctx.templates[key]
