"""Exception types shared across the simulator modules."""


class MallSimError(Exception):
    """Base class for all simulator errors."""


# --- semantic map ---------------------------------------------------------

class SchemaError(MallSimError):
    pass


class DanglingReference(MallSimError):
    pass


class CyclicHierarchy(MallSimError):
    pass


class UnknownConcept(MallSimError):
    pass


class NoRoute(MallSimError):
    pass


class UnsupportedLanguage(MallSimError):
    pass


# --- world model ----------------------------------------------------------

class UnknownWorld(MallSimError):
    pass


class DuplicateName(MallSimError):
    pass


class UnknownPerson(MallSimError):
    pass


# --- perception -----------------------------------------------------------

class AmbiguousSpeaker(MallSimError):
    pass


# --- placement / pointing -------------------------------------------------

class NoSharedPerspective(MallSimError):
    pass


class NoRobotPose(MallSimError):
    pass


class DegenerateTarget(MallSimError):
    pass


# --- navigation -----------------------------------------------------------

class GoalBlocked(MallSimError):
    pass


class NoPath(MallSimError):
    pass


# --- supervision ----------------------------------------------------------

class UnknownGoal(MallSimError):
    pass


class UnknownEvent(MallSimError):
    pass


# --- harness --------------------------------------------------------------

class ScenarioError(MallSimError):
    pass


class BindError(MallSimError):
    pass
