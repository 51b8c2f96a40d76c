"""Multiple-choice quiz state and turn handling."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .nlu import NluResult


@dataclass(frozen=True)
class QuizQuestion:
    text: str
    options: tuple[str, ...]
    correct: int  # 1-based

    def __post_init__(self):
        if len(self.options) < 2:
            raise ValueError("quiz questions need at least two options")
        if not 1 <= self.correct <= len(self.options):
            raise ValueError("correct index out of range")


@dataclass
class QuizState:
    questions: list[QuizQuestion]
    length: int = 3
    index: int = 0
    asked: int = 1
    off_topic: int = 0
    score: int = 0
    finished: bool = False

    @property
    def current(self) -> QuizQuestion:
        return self.questions[self.index]


def load_quiz_bank(language: str = "en") -> list[QuizQuestion]:
    name = f"quiz_{language}.json"
    pkg = resources.files("mallsim.dialogue") / "data"
    path = pkg / name
    if not path.is_file():
        path = pkg / "quiz_en.json"
    doc = json.loads(path.read_text(encoding="utf-8"))
    return [
        QuizQuestion(text=q["text"], options=tuple(q["options"]), correct=int(q["correct"]))
        for q in doc["questions"]
    ]


def quiz_turn(nlu: NluResult, state: QuizState, templates: dict) -> tuple[str, QuizState]:
    """Process one utterance against the quiz; returns the feedback text.

    Answers are graded against the 1-based correct index; out-of-range
    numbers ask for clarification without advancing; a quit act closes the
    quiz with a score summary; anything else counts as an off-topic turn and
    every second one re-raises the open question.
    """
    if state.finished:
        return "", state
    q = state.current
    if nlu.act == "quit":
        state.finished = True
        return templates["quiz_summary"].format(score=state.score, asked=state.asked), state
    if nlu.act == "answer" and nlu.value is not None:
        n = nlu.value
        if not 1 <= n <= len(q.options):
            return templates["quiz_clarify"].format(n=len(q.options)), state
        if n == q.correct:
            state.score += 1
            feedback = templates["quiz_correct"]
        else:
            feedback = templates["quiz_incorrect"].format(answer=q.options[q.correct - 1])
        state.off_topic = 0
        if state.asked >= state.length:
            state.finished = True
            summary = templates["quiz_summary"].format(score=state.score, asked=state.asked)
            return f"{feedback} {summary}", state
        state.index = (state.index + 1) % len(state.questions)
        state.asked += 1
        return f"{feedback} {state.current.text}", state
    # off-topic input while the quiz is live
    state.off_topic += 1
    if state.off_topic >= 2:
        state.off_topic = 0
        return templates["quiz_reraise"].format(question=q.text), state
    return "", state
