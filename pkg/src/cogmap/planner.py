"""Map construction under both crowd assumptions, and path extraction.

Time bases
----------
The lattice front advances ``v_w`` cells per unit of mental time. Matching
it to the agent's walking speed gives ``seconds_per_tau = v_w * cell_size /
agent_speed`` seconds of real time per unit of mental time. Pedestrian
motion is predicted by the trajectory network in steps of
``scenario.time_base`` seconds and interpolated to each mental step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels, lattice, tmnn
from .core import AVUS, COUS, Vec2, disc_mask, world_to_grid
from .defaults import merged
from .errors import NoPath, OutOfArena
from .lattice import CompactCognitiveMap, LatticeParams
from .social import LEFT, RIGHT, lateral_offset

__all__ = ["CompactCognitiveMap", "Path", "Timebase", "build_map", "build_map_avus",
           "build_map_cous", "trace", "to_world_trajectory", "front_speed"]


def front_speed(n, params=LatticeParams()):
    return lattice.measure_front_speed(n, params)


@dataclass(frozen=True)
class Timebase:
    v_w: float              # cells per unit mental time
    cell_size: float        # m
    agent_speed: float      # m/s
    h_lattice: float        # mental time per mental step
    time_base: float        # seconds per prediction step

    @property
    def seconds_per_tau(self):
        return self.v_w * self.cell_size / self.agent_speed

    @property
    def seconds_per_step(self):
        return self.seconds_per_tau * self.h_lattice

    def prediction_index(self, k):
        """Fractional prediction-step index of mental step ``k``."""
        return k * self.seconds_per_step / self.time_base

    @classmethod
    def for_scenario(cls, scenario, params=LatticeParams()):
        m = scenario.mapping
        return cls(front_speed(m.n, params), m.cell_size, scenario.agent_speed, params.h,
                   scenario.time_base)


def _track_momenta(pedestrians, scenario):
    """Momentum vectors (cells, per prediction step) from three sensed positions."""
    m = scenario.mapping
    h = scenario.time_base
    xs, ys = [], []
    for p in pedestrians:
        v = np.asarray(p.velocity, dtype=float)
        p0 = np.asarray(p.position, dtype=float)
        samples = [m.to_cells(p0 - 2.0 * h * v), m.to_cells(p0 - h * v), m.to_cells(p0)]
        xi_x, xi_y = tmnn.estimate_momenta(*samples, h=1.0)
        xs.append(xi_x)
        ys.append(xi_y)
    return np.array(xs), np.array(ys)


class _Tracks:
    """Predicted positions of a set of movers, sampled at mental steps."""

    def __init__(self, W, xi_x, xi_y, n_pred, kappa0=None):
        m = xi_x.shape[0]
        self.kappa0 = np.zeros(m) if kappa0 is None else np.asarray(kappa0, dtype=float)
        if m:
            xi = np.concatenate([xi_x, xi_y], axis=0)
            pos = tmnn.predict_many(W, xi, n_pred)
            self.pos = np.stack([pos[:, :m], pos[:, m:]], axis=2)   # (K+1, m, 2)
        else:
            self.pos = np.zeros((n_pred + 1, 0, 2))
        self.vel = np.stack([xi_x[:, 1], xi_y[:, 1]], axis=1) if m else np.zeros((0, 2))

    def at(self, kappa, idx=None):
        idx = slice(None) if idx is None else idx
        local = np.maximum(kappa - self.kappa0[idx], 0.0)
        last = self.pos.shape[0] - 1
        lo = np.minimum(np.floor(local).astype(np.int64), last - 1)
        frac = (local - lo)[:, None]
        cols = np.arange(self.pos.shape[1])[idx]
        a = self.pos[lo, cols]
        b = self.pos[lo + 1, cols]
        return a + frac * (b - a)


class _Occupancy:
    """Occupancy stream B(k) for the lattice, with or without cooperation."""

    def __init__(self, scenario, cfg, params, tb, cooperative, excluded=()):
        self.m = scenario.mapping
        cs = self.m.cell_size
        self.static = scenario.static_mask()
        self.tb = tb
        self.params = params
        self.cooperative = cooperative
        peds = list(scenario.pedestrians)
        self.peds = peds
        self.W = tmnn.trained_coupling(1.0, cfg["tmnn_rate"], int(cfg["tmnn_samples"]),
                                       int(cfg["tmnn_epochs"]))
        self.n_pred = int(math.ceil(tb.prediction_index(params.max_steps))) + 2
        xi_x, xi_y = _track_momenta(peds, scenario)
        self.tracks = _Tracks(self.W, xi_x, xi_y, self.n_pred)
        self.radius = np.array([(p.personal_radius + scenario.agent_radius) / cs for p in peds])
        self.zone = np.array([(p.reaction_distance + scenario.agent_radius) / cs for p in peds])
        self.cone = math.radians(cfg["crossing_angle"])
        self.body = scenario.agent_radius / cs
        self.gain = cfg["lateral_gain"]
        # 0 undecided, 1 never cooperates, 2 cooperating
        self.status = np.zeros(len(peds), dtype=np.int64)
        for a, p in enumerate(peds):
            if p.speed == 0.0 or p.id in excluded:
                self.status[a] = 1
        if not cooperative:
            self.status[:] = 1
        self.onset = np.full(len(peds), -1, dtype=np.int64)
        self.branches = []   # (ped index, left _Tracks, right _Tracks)

    def _spawn(self, a, k, kappa, pos):
        v = self.tracks.vel[a]
        wl = lateral_offset(v, LEFT, self.gain)
        wr = lateral_offset(v, RIGHT, self.gain)
        rows = []
        for w in (wl, wr):
            vx, vy = v[0] + w[0], v[1] + w[1]
            rows.append((np.array([[pos[0], vx, 0.0]]), np.array([[pos[1], vy, 0.0]])))
        remaining = self.n_pred - int(math.floor(kappa)) + 2
        left = _Tracks(self.W, rows[0][0], rows[0][1], remaining, [kappa])
        right = _Tracks(self.W, rows[1][0], rows[1][1], remaining, [kappa])
        self.branches.append((a, left, right))
        self.onset[a] = k

    def __call__(self, k, state):
        mask = self.static.copy()
        if not self.peds:
            return mask
        kappa = self.tb.prediction_index(k)
        pos = self.tracks.at(np.full(len(self.peds), kappa))
        if self.cooperative and k > 0:
            und = np.nonzero(self.status == 0)[0]
            if und.size:
                vel = self.tracks.vel[und]
                heading = vel / np.linalg.norm(vel, axis=1)[:, None]
                res = kernels.zone_contact(state.r, state.q, state.omega_step,
                                           np.ascontiguousarray(pos[und]),
                                           np.ascontiguousarray(heading), self.zone[und],
                                           self.cone, self.body, self.params.band[0],
                                           self.params.band[1])
                for a, s in zip(und, res):
                    if s == 1:
                        self.status[a] = 1
                    elif s == 2:
                        self.status[a] = 2
                        self._spawn(a, k, kappa, pos[a])
        full = self.status != 2
        if full.any():
            kernels.stamp_discs(mask, np.ascontiguousarray(pos[full]), self.radius[full])
        if self.branches:
            c1 = np.array([left.at(np.array([kappa]))[0] for _, left, _ in self.branches])
            c2 = np.array([right.at(np.array([kappa]))[0] for _, _, right in self.branches])
            radii = np.array([self.radius[a] for a, _, _ in self.branches])
            kernels.stamp_lenses(mask, c1, c2, radii)
        return mask


def _build(scenario, mode, cfg=None, excluded=()):
    cfg = merged(cfg)
    params = LatticeParams.from_config(cfg)
    tb = Timebase.for_scenario(scenario, params)
    occ = _Occupancy(scenario, cfg, params, tb, cooperative=(mode == COUS), excluded=excluded)
    cmap = lattice.run_wave(scenario, occ, params, mode=mode, v_w=tb.v_w)
    onsets = {p.id: int(occ.onset[a]) for a, p in enumerate(occ.peds) if occ.onset[a] >= 0}
    return replace(cmap, origin=Vec2(*scenario.agent_start), cooperation_onsets=onsets)


def build_map_avus(scenario, cfg=None):
    """Map that treats every pedestrian as a moving object ignoring the agent."""
    return _build(scenario, AVUS, cfg)


def build_map_cous(scenario, cfg=None, max_rounds=None):
    """Map that expects eligible pedestrians to dodge once the front reaches them.

    A pedestrian's eligibility is settled at the first mental step the front
    band enters his (inflated) forward reaction zone: if any band cell inside
    the zone is also seen inside his cooperation cone, his disc is replaced
    from then on by the shrinking intersection of the left and right dodge
    discs; otherwise he stays a full moving disc for the whole run.

    The front reaches every direction at once, so that test is optimistic.
    An internal loop rehearses the traced plan against the pedestrian model:
    anyone the map relied on who would be touched by the planned motion is
    treated as non-cooperative and the map is rebuilt. A pedestrian who never
    reacts because the plan passes him by costs nothing and stays. The
    excluded set only grows, so at most ``M + 1`` maps are built.
    """
    from .sim import rehearse

    cfg = merged(cfg)
    excluded = set()
    rounds = len(scenario.pedestrians) + 1 if max_rounds is None else max_rounds
    cmap = None
    for _ in range(max(rounds, 1)):
        cmap = _build(scenario, COUS, cfg, excluded)
        assumed = set(cmap.cooperation_onsets)
        if not assumed:
            break
        try:
            path = trace(cmap, scenario.target, cfg["descent_step"], scenario.nav_tolerance)
        except NoPath:
            break
        traj = to_world_trajectory(path, scenario, cfg["execution_timing"], v_w=cmap.v_w)
        _, touched = rehearse(scenario, traj, cfg)
        wrong = assumed & touched
        if not wrong:
            break
        excluded |= wrong
    return replace(cmap, excluded=frozenset(excluded))


def build_map(scenario, mode=None, cfg=None):
    mode = mode or scenario.mode
    return build_map_cous(scenario, cfg) if mode == COUS else build_map_avus(scenario, cfg)


@dataclass(frozen=True)
class Path:
    points: np.ndarray        # (N, 2) world coordinates, agent -> target
    mental_time: np.ndarray   # (N,) arrival mental time at each vertex

    def __len__(self):
        return len(self.points)

    @property
    def length(self):
        return float(np.sum(np.linalg.norm(np.diff(self.points, axis=0), axis=1)))


def trace(cmap, target, step=0.5, tolerance=None, max_iter=None):
    """Descend the arrival field from ``target`` to the agent; return agent -> target.

    The walk starts at the target cell when it is reachable (and the exact
    target point closes the path), else at the lowest reachable cell whose
    center lies within ``tolerance`` meters of the target.
    """
    m = cmap.mapping
    R = cmap.reachable
    c = cmap.c
    try:
        g = world_to_grid(target, m)
    except OutOfArena as exc:
        raise NoPath(str(exc)) from None
    tail = None
    if R[g.i - 1, g.j - 1]:
        a, b = g.i - 1, g.j - 1
        tail = np.asarray(target, dtype=float)
    else:
        cand = disc_mask(target, tolerance, m) & R if tolerance else np.zeros_like(R)
        if not cand.any():
            raise NoPath(f"target {tuple(target)} is not reachable")
        vals = np.where(cand, c, np.inf)
        a, b = np.unravel_index(int(np.argmin(vals)), vals.shape)
    if max_iter is None:
        max_iter = int(10 * m.n / step)
    out = np.empty((max_iter + 2, 3))
    ai, aj = cmap.agent.i - 1, cmap.agent.j - 1
    cnt, status = kernels.descend(c, R, float(a), float(b), float(c[a, b]),
                                  float(ai), float(aj), float(step), max_iter, out)
    if status != 1:
        raise NoPath("descent did not reach the agent cell")
    cells = out[:cnt]
    pts = [np.asarray(cmap.origin if cmap.origin is not None else m.to_world((ai, aj)),
                      dtype=float)[None, :],
           m.to_world(cells[:, :2].T).T[::-1]]
    times = [[0.0], cells[::-1, 2]]
    if tail is not None:
        pts.append(tail[None, :])
        times.append([c[a, b]])
    return Path(np.ascontiguousarray(np.vstack(pts)), np.concatenate(times))


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray      # (N,) seconds
    xy: np.ndarray     # (N, 2) meters

    @property
    def duration(self):
        return float(self.t[-1] - self.t[0])

    def position(self, t):
        if t <= self.t[0]:
            return self.xy[0].copy()
        if t >= self.t[-1]:
            return self.xy[-1].copy()
        k = int(np.searchsorted(self.t, t, side="right")) - 1
        span = self.t[k + 1] - self.t[k]
        frac = 0.0 if span <= 0 else (t - self.t[k]) / span
        return self.xy[k] + frac * (self.xy[k + 1] - self.xy[k])


def to_world_trajectory(path, scenario, timing="speed", v_w=None, h_lattice=0.1):
    """Timestamp path vertices.

    ``timing="speed"`` walks the polyline at ``scenario.agent_speed``.
    ``timing="map"`` uses the arrival field instead: a vertex reached at
    mental time ``c`` is visited at ``c * seconds_per_tau``, which keeps the
    executed motion synchronised with the predictions used to build the map.
    """
    pts = np.asarray(path.points, dtype=float)
    if timing == "speed":
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        t = np.concatenate([[0.0], np.cumsum(seg)]) / scenario.agent_speed
    elif timing == "map":
        if v_w is None:
            raise ValueError("map timing needs the front speed v_w")
        spt = v_w * scenario.mapping.cell_size / scenario.agent_speed
        t = np.maximum.accumulate(np.asarray(path.mental_time, dtype=float)) * spt
    else:
        raise ValueError(f"unknown timing {timing!r}")
    return Trajectory(t, pts)
