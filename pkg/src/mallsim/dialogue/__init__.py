from .bots import (
    BotResponse,
    ConversationContext,
    DialogueEngine,
    load_templates,
)
from .nlu import Frame, FrameElement, NluResult, parse
from .quiz import QuizQuestion, QuizState, load_quiz_bank, quiz_turn

__all__ = [
    "BotResponse",
    "ConversationContext",
    "DialogueEngine",
    "load_templates",
    "Frame",
    "FrameElement",
    "NluResult",
    "parse",
    "QuizQuestion",
    "QuizState",
    "load_quiz_bank",
    "quiz_turn",
]
