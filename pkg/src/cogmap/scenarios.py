"""Seeded generators for the demonstration scenes and the crowd experiment families.

Every family uses the same layout: the agent starts near the bottom edge
and heads for a door in the top edge. Pedestrians walk in straight lines
toward their goals. Randomness comes from one seed per scenario, split into
an independent stream per pedestrian, so that adding a pedestrian leaves
the others unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import AVUS, Disc, GridMapping, Pedestrian, Rect, Scenario, Vec2
from .errors import InvalidScenario, TemplateInfeasible

FAMILIES = ("static_demo", "dynamic_demo", "head_on", "cluttered_flow", "dense_group", "line_up")
SEGMENTS = ("center", "left_extreme", "right_extreme")


@dataclass(frozen=True)
class ScenarioTemplate:
    family: str = "head_on"
    arena: float = 8.0
    n: int = 80
    corridor_width: float = 8.0      # m, centered on the door
    door_center: float = 4.0         # m, x of the door
    door_width: float = 2.0          # m
    door_walls: bool = False         # close the top edge outside the door
    count: int = 6                   # pedestrians
    speed_min: float = 0.4           # m/s
    speed_max: float = 1.0           # m/s
    jitter: float = 0.5              # m, lateral spread
    goal_jitter: float = 0.5         # m, spread of cluttered-flow goals
    aim: float = 1.0                 # cluttered-flow goals: 0 straight down, 1 at the agent start
    spacing: float = 0.9             # m, chain / row spacing
    depth: float = 2.5               # m, depth of the cluttered bunch below the door
    segment: str = "center"
    seed: int = 0
    mode: str = AVUS
    agent_start: tuple = (4.0, 0.6)
    agent_radius: float = 0.2
    agent_speed: float = 1.0
    nav_tolerance: float = 0.2
    time_base: float = 0.1
    personal_radius: float = 0.4
    reaction_distance: float = 2.0
    retries: int = 20

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidScenario(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.segment not in SEGMENTS:
            raise InvalidScenario(f"unknown door segment {self.segment!r}")
        if self.count < 0 or not self.door_width > 0 or not self.corridor_width > 0:
            raise InvalidScenario("count, door_width and corridor_width must be positive")

    @property
    def door_y(self):
        """Height of the goal line just inside the door."""
        return self.arena - 0.4


def _rng(seed, attempt, index):
    return np.random.default_rng(np.random.SeedSequence([seed, attempt], spawn_key=(index,)))


def door_segment_target(template, segment=None, rng=None):
    """Uniform sample inside one door segment.

    The door is split left to right into quarter, half and quarter: the
    middle half is ``center``, the outer quarters are the extremes (left is
    smaller x).
    """
    lo, hi = segment_bounds(template, segment or template.segment)
    rng = rng if rng is not None else _rng(template.seed, 0, 10_000)
    return Vec2(float(rng.uniform(lo, hi)), template.door_y)


def segment_bounds(template, segment):
    c, w = template.door_center, template.door_width
    return {"center": (c - w / 4, c + w / 4),
            "left_extreme": (c - w / 2, c - w / 4),
            "right_extreme": (c + w / 4, c + w / 2)}[segment]


def _ped(t, pid, pos, speed, goal):
    d = np.subtract(goal, pos)
    v = d / np.hypot(*d) * speed if speed > 0 else np.zeros(2)
    return Pedestrian(pid, Vec2(float(pos[0]), float(pos[1])), Vec2(float(v[0]), float(v[1])),
                      Vec2(float(goal[0]), float(goal[1])), t.personal_radius, t.reaction_distance)


def _corridor(t):
    """x-extent of the walkable corridor, clipped to the arena."""
    return (max(t.door_center - t.corridor_width / 2, 0.0),
            min(t.door_center + t.corridor_width / 2, t.arena))


def _walls(t):
    out = []
    lo, hi = _corridor(t)
    if lo > 0.0:
        out.append(Rect(0.0, 0.0, lo, t.arena))
    if hi < t.arena:
        out.append(Rect(hi, 0.0, t.arena, t.arena))
    if t.door_walls:
        top = t.arena - 0.2
        a, b = t.door_center - t.door_width / 2, t.door_center + t.door_width / 2
        if a > lo:
            out.append(Rect(lo, top, a, t.arena))
        if b < hi:
            out.append(Rect(b, top, hi, t.arena))
    return tuple(out)


def _static_demo(t, attempt):
    r = _rng(t.seed, attempt, 1)
    gap = float(r.uniform(1.5, 6.5))
    walls = (Rect(0.0, 3.9, gap - 0.6, 4.1), Rect(gap + 0.6, 3.9, t.arena, 4.1))
    discs = []
    for k in range(max(t.count, 0)):
        rk = _rng(t.seed, attempt, 100 + k)
        discs.append(Disc(Vec2(float(rk.uniform(1.0, 7.0)), float(rk.uniform(1.8, 6.5))),
                          float(rk.uniform(0.2, 0.5))))
    return [], walls + tuple(discs)


def _dynamic_demo(t, attempt):
    peds = []
    for k in range(t.count):
        r = _rng(t.seed, attempt, k)
        y = float(r.uniform(2.5, 6.0))
        side = 1.0 if r.random() < 0.5 else -1.0
        x0 = 4.0 - side * float(r.uniform(2.0, 3.5))
        speed = float(r.uniform(t.speed_min, t.speed_max))
        peds.append(_ped(t, k + 1, (x0, y), speed, (4.0 + side * 3.9, y + float(r.uniform(-1, 1)))))
    return peds, ()


def _head_on(t, attempt):
    speed = 0.5 * (t.speed_min + t.speed_max)
    c = t.door_center
    return [_ped(t, 1, (c, 6.0), speed, (c, 0.0))], ()


def _cluttered_flow(t, attempt):
    """A bunch of humans leaving the door area, faster the farther they are from it.

    Each pedestrian draws from his own stream and redraws only while he
    overlaps someone drawn before him.
    """
    peds = []
    ax = t.agent_start[0]
    top = t.door_y - 0.3
    for k in range(t.count):
        r = _rng(t.seed, attempt, k)
        for _ in range(50):
            x = t.door_center + float(r.uniform(-t.jitter, t.jitter))
            y = top - float(r.uniform(0.0, t.depth))
            if all(math.hypot(x - p.position.x, y - p.position.y)
                   >= t.personal_radius + p.personal_radius for p in peds):
                break
        else:
            return [], ()
        frac = (top - y) / t.depth
        speed = t.speed_min + (t.speed_max - t.speed_min) * frac
        gx = x + t.aim * (ax - x) + float(r.uniform(-t.goal_jitter, t.goal_jitter))
        goal = (gx, 0.0)
        peds.append(_ped(t, k + 1, (x, y), speed, goal))
    return peds, _walls(t)


def _dense_group(t, attempt):
    """A row across the whole corridor walking at the agent."""
    r = _rng(t.seed, attempt, 0)
    width = t.corridor_width
    x_lo = t.door_center - width / 2
    count = max(t.count, int(math.ceil(width / t.spacing)))
    # anchor one member on the agent's line, the rest at fixed spacing
    offset = (t.agent_start[0] - x_lo) % t.spacing
    xs = x_lo + offset + t.spacing * np.arange(count)
    xs = xs[xs <= x_lo + width]
    y = float(r.uniform(5.0, 5.6))
    speed = float(r.uniform(t.speed_min, t.speed_max))
    peds = [_ped(t, k + 1, (float(x), y), speed, (float(x), 0.0)) for k, x in enumerate(xs)]
    return peds, _walls(t)


def _line_up(t, attempt):
    """Single file emerging from a narrow door, walking at the agent."""
    peds = []
    y = t.door_y - 0.1
    speed = 0.5 * (t.speed_min + t.speed_max)
    half = t.door_width / 2
    for k in range(t.count):
        r = _rng(t.seed, attempt, k)
        x = t.door_center + float(r.uniform(-1, 1)) * min(t.jitter, half)
        goal = (x + float(r.uniform(-0.2, 0.2)), 0.0)
        peds.append(_ped(t, k + 1, (x, y), speed, goal))
        y -= t.spacing * float(r.uniform(1.0, 1.1))
    return peds, _walls(t)


_BUILDERS = {"static_demo": _static_demo, "dynamic_demo": _dynamic_demo, "head_on": _head_on,
             "cluttered_flow": _cluttered_flow, "dense_group": _dense_group, "line_up": _line_up}


def _feasible(peds, t, start):
    if t.count and not peds and t.family != "static_demo":
        return False
    pts = np.array([p.position for p in peds]).reshape(-1, 2)
    lo, hi = _corridor(t)
    walled = lo > 0.0 or hi < t.arena
    for a in range(len(pts)):
        r = peds[a].personal_radius
        if walled and not lo + r <= pts[a][0] <= hi - r:
            return False
        if np.hypot(*(pts[a] - start)) < peds[a].personal_radius + t.agent_radius:
            return False
        for b in range(a):
            if np.hypot(*(pts[a] - pts[b])) < peds[a].personal_radius + peds[b].personal_radius:
                return False
        if not (0.0 <= pts[a][0] <= t.arena and 0.0 <= pts[a][1] <= t.arena):
            return False
    return True


def generate(template):
    """Concrete scenario for ``template``; deterministic in ``template.seed``."""
    t = template
    start = np.array(t.agent_start, dtype=float)
    for attempt in range(t.retries):
        peds, obstacles = _BUILDERS[t.family](t, attempt)
        if not _feasible(peds, t, start):
            continue
        target = door_segment_target(t, t.segment, _rng(t.seed, attempt, 10_000))
        return Scenario(GridMapping(t.arena, t.arena, t.n), Vec2(*t.agent_start), target,
                        t.agent_radius, t.nav_tolerance, tuple(peds), tuple(obstacles), t.mode,
                        t.time_base, t.agent_speed, t.seed)
    raise TemplateInfeasible(f"{t.family}: no feasible layout after {t.retries} attempts")


def preset(family, **overrides):
    """Template with the tuned defaults of ``family``."""
    base = dict(_PRESETS.get(family, {}))
    base.update(overrides)
    return ScenarioTemplate(family=family, **base)


_PRESETS = {
    "static_demo": dict(count=3),
    "dynamic_demo": dict(count=4),
    "head_on": dict(count=1, speed_min=0.6, speed_max=0.6),
    "cluttered_flow": dict(count=6, jitter=1.6, goal_jitter=0.4, depth=3.0, door_width=3.0,
                           corridor_width=4.4, door_walls=True),
    "dense_group": dict(spacing=1.1, speed_min=0.5, speed_max=0.7),
    "line_up": dict(count=5, door_width=1.0, door_walls=True, jitter=0.1, spacing=0.9,
                    speed_min=0.6, speed_max=0.8),
}


def with_seed(template, seed):
    return replace(template, seed=seed)
