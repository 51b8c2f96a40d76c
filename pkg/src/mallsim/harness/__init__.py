from .engine import Engine, run_scenario
from .scenario import Scenario, load_scenario
from .transcript import Transcript

__all__ = ["Engine", "run_scenario", "Scenario", "load_scenario", "Transcript"]
