"""Geometry, world/lattice mapping and the scenario data model.

Lattice indices are 1-based ``(i, j)`` with ``i`` along x and ``j`` along y.
Arrays holding lattice fields have shape ``(n, n)`` and cell ``(i, j)``
lives at ``arr[i - 1, j - 1]`` (row-major, one array row per x index).
Continuous "cell coordinates" ``u = x / cell_size - 0.5`` put cell centers
on integer array indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import BadIndex, InvalidScenario, OutOfArena

AVUS = "avus"
COUS = "cous"
MODES = (AVUS, COUS)


class Vec2(NamedTuple):
    x: float
    y: float

    def __add__(self, other):
        return Vec2(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Vec2(self.x - other[0], self.y - other[1])

    def __mul__(self, k):
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def norm(self):
        return math.hypot(self.x, self.y)


class GridIndex(NamedTuple):
    i: int
    j: int


@dataclass(frozen=True)
class GridMapping:
    arena_width: float = 8.0
    arena_height: float = 8.0
    n: int = 80

    def __post_init__(self):
        if self.n < 2:
            raise InvalidScenario("lattice side n must be >= 2")
        if not (self.arena_width > 0 and self.arena_height > 0):
            raise InvalidScenario("arena dimensions must be positive")

    @property
    def cell_size(self):
        return self.arena_width / self.n

    def contains(self, p):
        return 0.0 <= p[0] <= self.arena_width and 0.0 <= p[1] <= self.arena_height

    def to_cells(self, p):
        """World point -> continuous cell coordinates (0-based, centers at integers)."""
        cs = self.cell_size
        return np.array([p[0] / cs - 0.5, p[1] / cs - 0.5])

    def to_world(self, u):
        cs = self.cell_size
        return np.array([(u[0] + 0.5) * cs, (u[1] + 0.5) * cs])

    def centers(self):
        """World coordinates of all cell centers, two ``(n, n)`` arrays."""
        ax = (np.arange(self.n) + 0.5) * self.cell_size
        return np.meshgrid(ax, ax, indexing="ij")


def world_to_grid(p, m: GridMapping) -> GridIndex:
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)) or not m.contains((x, y)):
        raise OutOfArena(f"point ({x}, {y}) outside arena")
    cs = m.cell_size
    i = min(max(int(math.floor(x / cs)) + 1, 1), m.n)
    j = min(max(int(math.floor(y / cs)) + 1, 1), m.n)
    return GridIndex(i, j)


def grid_to_world(g, m: GridMapping) -> Vec2:
    i, j = g
    if not (1 <= i <= m.n and 1 <= j <= m.n):
        raise BadIndex(f"index ({i}, {j}) outside 1..{m.n}")
    cs = m.cell_size
    return Vec2((i - 0.5) * cs, (j - 0.5) * cs)


def disc_mask(center, radius, m: GridMapping, out=None):
    """Boolean ``(n, n)`` mask of cells whose centers lie within ``radius``."""
    if out is None:
        out = np.zeros((m.n, m.n), dtype=bool)
    cs = m.cell_size
    u, v = center[0] / cs - 0.5, center[1] / cs - 0.5
    rc = radius / cs
    i0, i1 = max(int(math.floor(u - rc)), 0), min(int(math.ceil(u + rc)), m.n - 1)
    j0, j1 = max(int(math.floor(v - rc)), 0), min(int(math.ceil(v + rc)), m.n - 1)
    if i0 > i1 or j0 > j1:
        return out
    ii = np.arange(i0, i1 + 1)[:, None]
    jj = np.arange(j0, j1 + 1)[None, :]
    inside = (ii - u) ** 2 + (jj - v) ** 2 <= rc * rc
    out[i0:i1 + 1, j0:j1 + 1] |= inside
    return out


def inflate_footprint(center, radius, agent_radius, m: GridMapping):
    """Configuration-space footprint of a disc: cells within ``radius + agent_radius``."""
    if radius < 0 or agent_radius < 0:
        raise ValueError("radii must be non-negative")
    mask = disc_mask(center, radius + agent_radius, m)
    ii, jj = np.nonzero(mask)
    return {GridIndex(int(a) + 1, int(b) + 1) for a, b in zip(ii, jj)}


@dataclass(frozen=True)
class Disc:
    center: Vec2
    radius: float

    def mask(self, agent_radius, m):
        return disc_mask(self.center, self.radius + agent_radius, m)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle ``[x0, x1] x [y0, y1]``."""
    x0: float
    y0: float
    x1: float
    y1: float

    def mask(self, agent_radius, m):
        # Minkowski sum with a disc: distance from cell center to the box
        X, Y = m.centers()
        dx = np.maximum(np.maximum(self.x0 - X, X - self.x1), 0.0)
        dy = np.maximum(np.maximum(self.y0 - Y, Y - self.y1), 0.0)
        return dx * dx + dy * dy <= agent_radius * agent_radius


@dataclass(frozen=True)
class Pedestrian:
    id: int
    position: Vec2
    velocity: Vec2
    goal: Vec2
    personal_radius: float = 0.4
    reaction_distance: float = 2.0

    def __post_init__(self):
        if not self.personal_radius > 0:
            raise InvalidScenario(f"pedestrian {self.id}: personal_radius must be > 0")
        if not self.reaction_distance > self.personal_radius:
            raise InvalidScenario(
                f"pedestrian {self.id}: reaction_distance must exceed personal_radius")
        if not all(math.isfinite(c) for c in (*self.position, *self.velocity, *self.goal)):
            raise InvalidScenario(f"pedestrian {self.id}: non-finite state")

    @property
    def speed(self):
        return math.hypot(*self.velocity)


@dataclass(frozen=True)
class Scenario:
    mapping: GridMapping
    agent_start: Vec2
    target: Vec2
    agent_radius: float = 0.2
    nav_tolerance: float = 0.2
    pedestrians: tuple = ()
    obstacles: tuple = ()
    mode: str = AVUS
    time_base: float = 0.1
    agent_speed: float = 1.0
    seed: int = 0

    def __post_init__(self):
        m = self.mapping
        if self.mode not in MODES:
            raise InvalidScenario(f"mode must be one of {MODES}, got {self.mode!r}")
        for name in ("agent_start", "target"):
            p = getattr(self, name)
            if not m.contains(p):
                raise InvalidScenario(f"{name} {tuple(p)} outside arena")
        if Vec2(*self.agent_start) == Vec2(*self.target):
            raise InvalidScenario("agent_start and target coincide")
        if not self.nav_tolerance > 0:
            raise InvalidScenario("nav_tolerance must be > 0")
        if self.agent_radius < 0:
            raise InvalidScenario("agent_radius must be >= 0")
        if not self.time_base > 0 or not self.agent_speed > 0:
            raise InvalidScenario("time_base and agent_speed must be > 0")
        ids = [p.id for p in self.pedestrians]
        if len(set(ids)) != len(ids) or 0 in ids:
            raise InvalidScenario("pedestrian ids must be unique and non-zero (0 is the agent)")

    def with_mode(self, mode):
        return replace(self, mode=mode)

    def static_mask(self):
        """Inflated footprint of the static obstacles."""
        out = np.zeros((self.mapping.n, self.mapping.n), dtype=bool)
        for ob in self.obstacles:
            out |= ob.mask(self.agent_radius, self.mapping)
        return out
