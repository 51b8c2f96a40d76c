"""Bot ensemble and response arbitration.

Every bot may propose a response for a parsed utterance; the arbiter picks
the highest priority (task 30, quiz 20, chat 10, fallback 0). Task-capable
bots attach a task goal that the supervision layer turns into a running
task; answers expected by a blocked task step are routed through instead of
being answered conversationally.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from ..errors import NoRoute
from ..semantic_map import RouteConstraints, SemanticMap, compute_route, resolve_place, verbalize_route
from .nlu import NluResult
from .quiz import QuizState, quiz_turn

TASK_PRIORITY = 30
QUIZ_PRIORITY = 20
CHAT_PRIORITY = 10
FALLBACK_PRIORITY = 0

FALLBACKS_BEFORE_CAPABILITIES = 3


@dataclass(frozen=True)
class BotResponse:
    bot: str
    text: str
    priority: int
    task_goal: dict | None = None
    task_answer: str | None = None  # act forwarded to a waiting task step


@dataclass
class ConversationContext:
    mode: str = "idle"  # idle | chat | quiz | guidance
    pending_question: str | None = None
    pending_expected: tuple[str, ...] = ()
    person_id: str | None = None
    language: str = "en"
    fallback_streak: int = 0
    smalltalk_turn: int = 0


def load_templates(language: str = "en") -> dict:
    pkg = resources.files("mallsim.dialogue") / "data"
    path = pkg / f"templates_{language}.json"
    if not path.is_file():
        path = pkg / "templates_en.json"
    return json.loads(path.read_text(encoding="utf-8"))


class DialogueEngine:
    """Parse-independent response generation over the bot ensemble."""

    def __init__(self, smap: SemanticMap, language: str = "en"):
        self.smap = smap
        self.language = language
        self.templates = load_templates(language)

    # -- individual bots -----------------------------------------------------

    def _task_bot(self, nlu: NluResult, context: ConversationContext) -> BotResponse | None:
        if context.pending_question is not None and nlu.act in context.pending_expected:
            # a supervised task is waiting for exactly this act
            return BotResponse(bot="task", text="", priority=TASK_PRIORITY, task_answer=nlu.act)
        for frame_name, goal_kind, accept_key in (
            ("RequestGuidance", "guidance", "guidance_accept"),
            ("RequestDirections", "route-description", "directions_accept"),
        ):
            frame = nlu.frame(frame_name)
            if frame is None:
                continue
            place_id = frame.element("place")
            if place_id is None or place_id not in self.smap.places:
                return BotResponse(bot="task", text=self.templates["unknown_place"], priority=TASK_PRIORITY)
            label = self.smap.places[place_id].label
            return BotResponse(
                bot="task",
                text=self.templates[accept_key].format(label=label),
                priority=TASK_PRIORITY,
                task_goal={"kind": goal_kind, "place": place_id},
            )
        return None

    def _quiz_bot(self, nlu: NluResult, context: ConversationContext,
                  quiz: QuizState | None) -> BotResponse | None:
        if nlu.frame("StartQuiz") is not None and context.mode != "quiz":
            # the quiz task introduces itself, so the proposal carries no text
            return BotResponse(
                bot="quiz",
                text="",
                priority=QUIZ_PRIORITY,
                task_goal={"kind": "quiz"},
            )
        if context.mode == "quiz" and quiz is not None and nlu.act in ("answer", "quit"):
            text, _ = quiz_turn(nlu, quiz, self.templates)
            return BotResponse(bot="quiz", text=text, priority=QUIZ_PRIORITY)
        return None

    def _chat_bot(self, nlu: NluResult, context: ConversationContext) -> BotResponse | None:
        t = self.templates
        if nlu.act == "greeting":
            return BotResponse(bot="chat", text=t["greeting_reply"], priority=CHAT_PRIORITY)
        if nlu.act == "quit":
            return BotResponse(bot="chat", text=t["farewell"], priority=CHAT_PRIORITY)
        if nlu.act == "affirm":
            return BotResponse(bot="chat", text=t["affirm_ack"], priority=CHAT_PRIORITY)
        if nlu.act == "deny":
            return BotResponse(bot="chat", text=t["deny_ack"], priority=CHAT_PRIORITY)
        if nlu.act == "question":
            return BotResponse(bot="chat", text=t["chat_question"], priority=CHAT_PRIORITY)
        if nlu.act == "answer":
            # numerals outside a quiz read as smalltalk
            return BotResponse(bot="chat", text=t["smalltalk"][0], priority=CHAT_PRIORITY)
        return None

    def _fallback_bot(self, context: ConversationContext) -> BotResponse:
        t = self.templates
        if context.fallback_streak + 1 >= FALLBACKS_BEFORE_CAPABILITIES:
            return BotResponse(bot="fallback", text=t["capabilities"], priority=FALLBACK_PRIORITY)
        pick = t["fallback"][context.fallback_streak % len(t["fallback"])]
        return BotResponse(bot="fallback", text=pick, priority=FALLBACK_PRIORITY)

    # -- arbitration ---------------------------------------------------------

    def respond(self, nlu: NluResult, context: ConversationContext,
                quiz: QuizState | None = None) -> BotResponse:
        """Exactly one arbitrated response for any input.

        Bots are consulted in fixed priority order and the first proposal
        wins; because each bot's priority is a constant this is the same
        selection as collecting every proposal and taking the maximum, but
        it keeps losing bots from touching the quiz state.
        """
        chosen: BotResponse | None = None
        for maker in (lambda: self._task_bot(nlu, context),
                      lambda: self._quiz_bot(nlu, context, quiz),
                      lambda: self._chat_bot(nlu, context)):
            chosen = maker()
            if chosen is not None:
                break
        if chosen is None:
            chosen = self._fallback_bot(context)
            context.fallback_streak += 1
            if chosen.text == self.templates["capabilities"]:
                context.fallback_streak = 0
        else:
            context.fallback_streak = 0
        # a live quiz occasionally pulls the conversation back to the open question
        if (context.mode == "quiz" and quiz is not None and not quiz.finished
                and chosen.bot in ("chat", "fallback")):
            reraise, _ = quiz_turn(nlu, quiz, self.templates)
            if reraise:
                text = f"{chosen.text} {reraise}" if chosen.text else reraise
                chosen = BotResponse(bot=chosen.bot, text=text, priority=chosen.priority,
                                     task_goal=chosen.task_goal, task_answer=chosen.task_answer)
        return chosen

    # -- route description (dialogue-only mode) -------------------------------

    def route_description_reply(self, place_id: str, start_region: str,
                                start_point=None) -> str:
        """Spoken route description with no physical acts."""
        if place_id not in self.smap.places:
            return self.templates["unknown_place"]
        try:
            route = compute_route(start_region, place_id, RouteConstraints(), self.smap,
                                  start_point=start_point)
        except NoRoute:
            return self.templates["no_route"]
        return verbalize_route(route, self.smap, self.language)
