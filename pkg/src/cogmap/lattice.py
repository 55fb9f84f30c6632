"""Excitable FitzHugh-Nagumo lattice that explores the arena with a wavefront.

The agent cell is clamped high and launches a switching front. Cells record
the mental time at which the front first crosses ``r_th``; cells that lie in
the occupancy set ``B(k)`` while inside the front band ``[1, 2]`` freeze and
become effective objects, which the front then has to go around.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import GridIndex, GridMapping, world_to_grid
from .defaults import DEFAULTS
from .errors import InvalidStart, UnstableIntegration


def f_cubic(r):
    return (-(r * r * r) + 4.0 * (r * r) - 2.0 * r - 2.0) / 7.0


@dataclass(frozen=True)
class LatticeParams:
    d: float = 0.2
    eps: float = 0.04
    dtau: float = 0.05
    substeps: int = 2
    r_agent: float = 5.0
    band: tuple = (1.0, 2.0)
    r_th: float = 1.5
    max_steps: int = 20000
    patience: int = 300
    blowup: float = 50.0

    def __post_init__(self):
        if not self.dtau > 0 or self.substeps < 1:
            raise ValueError("dtau must be > 0 and substeps >= 1")
        if self.r_th < self.band[0]:
            raise ValueError("r_th must not lie below the detection band")

    @property
    def h(self):
        """Mental time per mental step."""
        return self.dtau * self.substeps

    @classmethod
    def from_config(cls, cfg=None):
        cfg = {**DEFAULTS, **(cfg or {})}
        return cls(d=cfg["coupling"], eps=cfg["recovery_rate"], dtau=cfg["dtau"],
                   substeps=int(cfg["substeps"]), r_agent=cfg["r_agent"],
                   band=(cfg["band_low"], cfg["band_high"]), r_th=cfg["r_th"],
                   max_steps=int(cfg["max_mental_steps"]), patience=int(cfg["patience"]),
                   blowup=cfg["blowup"])


class EffectiveObjectSet:
    """Growing set of frozen cells, each tagged with the mental step it joined."""

    def __init__(self, joined):
        self.joined = joined

    @classmethod
    def empty(cls, n):
        return cls(np.full((n, n), -1, dtype=np.int64))

    @property
    def mask(self):
        return self.joined >= 0

    def __len__(self):
        return int(np.count_nonzero(self.joined >= 0))

    def __contains__(self, g):
        return bool(self.joined[g[0] - 1, g[1] - 1] >= 0)

    def cells(self):
        ii, jj = np.nonzero(self.joined >= 0)
        return {GridIndex(int(a) + 1, int(b) + 1) for a, b in zip(ii, jj)}

    def issubset(self, other):
        return not np.any(self.mask & ~other.mask)


@dataclass
class LatticeState:
    r: np.ndarray
    z: np.ndarray
    q: np.ndarray
    c: np.ndarray
    omega_step: np.ndarray
    agent: tuple | None
    k: int = 0
    h: float = 0.1
    _prev: np.ndarray = field(default=None, repr=False)

    @classmethod
    def at_rest(cls, n, agent=None, params=LatticeParams()):
        """All cells at ``r = z = 0``; ``agent`` (0-based) is clamped to ``r_agent``."""
        r = np.zeros((n, n))
        z = np.zeros((n, n))
        q = np.ones((n, n), dtype=np.uint8)
        c = np.full((n, n), np.inf)
        if agent is not None:
            r[agent] = params.r_agent
            q[agent] = 0
            c[agent] = 0.0
        return cls(r, z, q, c, np.full((n, n), -1, dtype=np.int64), agent, 0, params.h)

    @property
    def n(self):
        return self.r.shape[0]

    @property
    def omega(self):
        return EffectiveObjectSet(self.omega_step)

    def copy(self):
        return LatticeState(self.r.copy(), self.z.copy(), self.q.copy(), self.c.copy(),
                            self.omega_step.copy(), self.agent, self.k, self.h)


def accrete_effective_objects(state, B_k, params=LatticeParams()):
    """Omega after merging the cells of ``B_k`` that currently sit in the front band.

    Pure: ``state`` is not modified.
    """
    joined = state.omega_step.copy()
    q = state.q.copy()
    kernels.accrete(state.r, q, joined, np.asarray(B_k, dtype=bool),
                    state.k + 1, params.band[0], params.band[1])
    return EffectiveObjectSet(joined)


def integrate_mental_step(state, B_k, params=LatticeParams()):
    """Advance ``state`` by one mental step in place and return it.

    Order: accrete band cells of ``B_k`` into Omega, integrate ``substeps``
    explicit Euler substeps, then stamp arrival times of cells that crossed
    ``r_th`` upward. Returns the state; ``state.last_arrivals`` holds the
    number of new arrivals.
    """
    k = state.k + 1
    kernels.accrete(state.r, state.q, state.omega_step, np.asarray(B_k, dtype=bool),
                    k, params.band[0], params.band[1])
    if state._prev is None:
        state._prev = np.empty_like(state.r)
    np.copyto(state._prev, state.r)
    big = kernels.fhn_substeps(state.r, state.z, state.q, params.d, params.eps,
                               params.dtau, params.substeps)
    if not np.isfinite(big) or big > params.blowup:
        raise UnstableIntegration(
            f"|r| reached {big:.3g} at mental step {k}; reduce dtau")
    state.last_arrivals = kernels.record_arrivals(state._prev, state.r, state.q, state.c,
                                                  k * params.h, params.r_th)
    state.k = k
    return state


@dataclass(frozen=True)
class CompactCognitiveMap:
    """Static map left behind by the exploring front.

    ``c`` holds arrival mental times (``inf`` where the front never arrived),
    ``omega_step`` the accretion step of effective-object cells (-1 elsewhere).
    """
    c: np.ndarray
    omega_step: np.ndarray
    mapping: GridMapping
    agent: GridIndex
    mode: str = "static"
    v_w: float = float("nan")
    h: float = 0.1
    r_th: float = 1.5
    steps: int = 0
    origin: tuple | None = None
    cooperation_onsets: dict = field(default_factory=dict)
    excluded: frozenset = frozenset()

    @property
    def omega(self):
        return self.omega_step >= 0

    @property
    def reachable(self):
        return np.isfinite(self.c) & (self.omega_step < 0)

    @property
    def omega_count(self):
        return int(np.count_nonzero(self.omega_step >= 0))

    def is_reachable(self, g):
        return bool(self.reachable[g[0] - 1, g[1] - 1])


def run_wave(scenario, stream, params=LatticeParams(), mode="static", v_w=float("nan")):
    """Explore the arena of ``scenario`` and return the compact map.

    ``stream(k, state)`` yields the boolean occupancy mask ``B(k)``; it is
    called with ``k = 0`` once to validate the start cell.
    """
    m = scenario.mapping
    g = world_to_grid(scenario.agent_start, m)
    agent = (g.i - 1, g.j - 1)
    state = LatticeState.at_rest(m.n, agent, params)
    if stream(0, state)[agent]:
        raise InvalidStart(f"agent cell {tuple(g)} lies inside an obstacle footprint")
    idle = 0
    for k in range(1, params.max_steps + 1):
        integrate_mental_step(state, stream(k, state), params)
        if state.last_arrivals:
            idle = 0
        else:
            idle += 1
            if idle >= params.patience:
                break
        if k % 25 == 0 and not np.isinf(state.c[state.q == 1]).any():
            break
    return CompactCognitiveMap(state.c, state.omega_step, m, g, mode, v_w, params.h,
                               params.r_th, state.k)


def static_stream(mask):
    def stream(k, state):
        return mask
    return stream


@functools.lru_cache(maxsize=16)
def measure_front_speed(n=80, params=LatticeParams(), annulus=(0.3, 0.9)):
    """Front speed in an empty lattice, cells per unit mental time.

    Launches the front from the central cell and fits arrival time against
    radial distance over ``annulus`` (fractions of the half-width), which
    skips the curvature-dominated transient near the source.
    """
    state = LatticeState.at_rest(n, (n // 2, n // 2), params)
    empty = np.zeros((n, n), dtype=bool)
    for _ in range(params.max_steps):
        integrate_mental_step(state, empty, params)
        if not np.isinf(state.c).any():
            break
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    rho = np.hypot(ii - n // 2, jj - n // 2)
    half = n / 2
    sel = (rho >= annulus[0] * half) & (rho <= annulus[1] * half) & np.isfinite(state.c)
    slope, _ = np.polyfit(rho[sel], state.c[sel], 1)
    return float(1.0 / slope)
