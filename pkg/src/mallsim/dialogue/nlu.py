"""Rule-based natural language understanding.

Produces dialogue acts plus semantic frames with the same output shape a
learned tagger would have, so the rules can be swapped out later. Place
mentions are resolved against the semantic map's labels and concepts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..semantic_map import SemanticMap, resolve_place

ACTS = ("greeting", "statement", "question", "command", "answer", "affirm", "deny", "quit")
FRAME_NAMES = ("RequestDirections", "RequestGuidance", "StartQuiz", "Smalltalk")


@dataclass(frozen=True)
class FrameElement:
    role: str
    value: str


@dataclass(frozen=True)
class Frame:
    name: str
    elements: tuple[FrameElement, ...] = ()

    def element(self, role: str) -> str | None:
        for e in self.elements:
            if e.role == role:
                return e.value
        return None


@dataclass(frozen=True)
class NluResult:
    act: str
    frames: tuple[Frame, ...]
    raw: str
    value: int | None = None  # numeric payload for answer acts

    def frame(self, name: str) -> Frame | None:
        for f in self.frames:
            if f.name == name:
                return f
        return None


_GREETING = re.compile(r"^\s*(hello|hi|hey|good (morning|afternoon|evening)|moi|hei)\b", re.I)
_QUIT = re.compile(r"^\s*(quit|stop|exit|bye|goodbye|enough|never mind|lopeta)\b", re.I)
_AFFIRM = re.compile(r"^\s*(yes|yeah|yep|sure|ok|okay|of course|certainly|kyll\w*|joo)\b", re.I)
_DENY = re.compile(r"^\s*(no|nope|nah|not really|i can'?t|i cannot|en|ei)\b", re.I)
_NUMBER = re.compile(r"^\s*(?:answer\s+|number\s+|option\s+)?(\d+)\s*[.!]?\s*$", re.I)
_NUMBER_WORDS = {"one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
                 "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10}
_QUIZ = re.compile(r"\b(quiz|trivia)\b|\blet'?s play\b", re.I)
_GUIDE = re.compile(
    r"\b(guide me|take me|lead me|walk me|show me (the way|how to get))\b", re.I)
_WHERE = re.compile(
    r"\b(where is|where can i find|where('s| is) the|how (do|can) i get to|how to get to|directions to|looking for)\b",
    re.I)
_QUESTION = re.compile(r"\?\s*$|^\s*(what|where|who|when|why|how|which|can|could|do|does|is|are)\b", re.I)
_COMMAND = re.compile(r"^\s*(guide|take|show|point|tell|play|start|bring)\b", re.I)


def _extract_place(text: str, smap: SemanticMap | None) -> str | None:
    """Best-matching place id mentioned anywhere in the text."""
    if smap is None:
        return None
    cleaned = re.sub(r"[^\w\s]", " ", text.lower())
    words = cleaned.split()
    best: tuple[int, int, str] | None = None  # (-ngram length, rank proxy, place id)
    for n in range(min(4, len(words)), 0, -1):
        for i in range(len(words) - n + 1):
            phrase = " ".join(words[i:i + n])
            if phrase in ("the", "a", "an", "to", "is", "me", "way"):
                continue
            hits = resolve_place(phrase, smap)
            if hits:
                cand = (-n, i, hits[0].id)
                if best is None or cand < best:
                    best = cand
        if best is not None:
            break
    return best[2] if best is not None else None


def parse(text: str, quiz_active: bool = False, smap: SemanticMap | None = None) -> NluResult:
    """Deterministic, total parse of one utterance."""
    raw = text
    stripped = text.strip()
    if not stripped:
        return NluResult(act="statement", frames=(Frame("Smalltalk"),), raw=raw)

    m = _NUMBER.match(stripped)
    if m is None and quiz_active:
        w = stripped.lower().rstrip(".!")
        if w in _NUMBER_WORDS:
            return NluResult(act="answer", frames=(), raw=raw, value=_NUMBER_WORDS[w])
    if m is not None:
        return NluResult(act="answer", frames=(), raw=raw, value=int(m.group(1)))

    if _QUIT.match(stripped):
        return NluResult(act="quit", frames=(), raw=raw)
    if _GREETING.match(stripped):
        return NluResult(act="greeting", frames=(), raw=raw)
    if _AFFIRM.match(stripped):
        return NluResult(act="affirm", frames=(), raw=raw)
    if _DENY.match(stripped):
        return NluResult(act="deny", frames=(), raw=raw)

    if _QUIZ.search(stripped):
        act = "command" if _COMMAND.match(stripped) or not _QUESTION.search(stripped) else "question"
        return NluResult(act=act, frames=(Frame("StartQuiz"),), raw=raw)

    place = _extract_place(stripped, smap)
    if _GUIDE.search(stripped):
        elements = (FrameElement("place", place),) if place else ()
        return NluResult(act="command", frames=(Frame("RequestGuidance", elements),), raw=raw)
    if _WHERE.search(stripped):
        elements = (FrameElement("place", place),) if place else ()
        return NluResult(act="question", frames=(Frame("RequestDirections", elements),), raw=raw)
    if place is not None and _QUESTION.search(stripped):
        return NluResult(act="question",
                         frames=(Frame("RequestDirections", (FrameElement("place", place),)),), raw=raw)

    if _QUESTION.search(stripped):
        return NluResult(act="question", frames=(Frame("Smalltalk"),), raw=raw)
    if _COMMAND.match(stripped):
        return NluResult(act="command", frames=(Frame("Smalltalk"),), raw=raw)
    return NluResult(act="statement", frames=(Frame("Smalltalk"),), raw=raw)
