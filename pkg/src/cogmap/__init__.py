"""Compact cognitive maps: crowd navigation planned on an excitable lattice.

The agent explores the arena with a travelling wave on a FitzHugh-Nagumo
lattice. Moving pedestrians, predicted by a small linear recurrent network,
freeze into effective obstacles where the wave meets them, and the path is
read back by gradient descent on the arrival-time field. Two crowd models
are available: pedestrians that ignore the agent (``avus``) and pedestrians
that step aside when approached head-on (``cous``).
"""

from .core import AVUS, COUS, GridMapping, Pedestrian, Scenario, Vec2
from .defaults import DEFAULTS
from .planner import build_map, build_map_avus, build_map_cous, to_world_trajectory, trace
from .scenarios import generate, preset
from .sim import run_ensemble, simulate

__version__ = "0.1.0"

__all__ = ["AVUS", "COUS", "DEFAULTS", "GridMapping", "Pedestrian", "Scenario", "Vec2", "build_map",
           "build_map_avus", "build_map_cous", "generate", "preset", "run_ensemble", "simulate",
           "to_world_trajectory", "trace"]
