"""Execute a planned trajectory among pedestrians that follow the heuristic model.

The agent replays its one-shot plan; pedestrians walk straight at their
goals and, in cooperative mode, step aside when the agent enters their
reaction zone head-on. Collisions are recorded, never resolved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import planner
from .core import AVUS, COUS
from .defaults import merged
from .errors import NoPath
from .social import HumanModel, cooperative_velocity, dodge_side, in_cone, in_reaction_zone

# cooperation status of a pedestrian
IDLE, DODGING, DONE = 0, 1, 2


@dataclass
class PedState:
    id: int
    position: np.ndarray
    velocity: np.ndarray
    goal: np.ndarray
    v_orig: np.ndarray
    model: HumanModel
    status: int = IDLE
    side: str | None = None
    v_base: np.ndarray = None        # heading the dodge is applied to
    stopped: bool = False
    travelled: float = 0.0
    cooperation: list = field(default_factory=list)   # [t_on, t_off]


@dataclass
class WorldState:
    t: float
    agent: np.ndarray
    trajectory: planner.Trajectory
    pedestrians: list
    arena: tuple
    agent_radius: float
    reaim: bool = True
    agent_velocity: np.ndarray = field(default_factory=lambda: np.zeros(2))
    events: list = field(default_factory=list)
    _contact: set = field(default_factory=set)

    @classmethod
    def initial(cls, scenario, trajectory, cfg=None):
        cfg = merged(cfg)
        peds = []
        for p in scenario.pedestrians:
            v = np.array(p.velocity, dtype=float)
            peds.append(PedState(p.id, np.array(p.position, dtype=float), v.copy(),
                                 np.array(p.goal, dtype=float), v.copy(),
                                 HumanModel.for_pedestrian(p, cfg)))
        m = scenario.mapping
        dt = cfg["sim_dt"]
        p0 = trajectory.position(0.0)
        # the agent is seen already heading along its plan
        v0 = (trajectory.position(dt) - p0) / dt
        return cls(0.0, p0, trajectory, peds, (m.arena_width, m.arena_height),
                   scenario.agent_radius, bool(cfg["reaim_after_cooperation"]), v0)


def _move(ped, dt, arena):
    if ped.stopped:
        return
    step = ped.velocity * dt
    to_goal = ped.goal - ped.position
    dist = math.hypot(*to_goal)
    s = math.hypot(*step)
    if s == 0.0:
        return
    if dist <= s and float(step @ to_goal) > 0.0:
        ped.travelled += dist
        ped.position = ped.goal.copy()
        ped.stopped = True
        return
    new = ped.position + step
    clipped = np.clip(new, 0.0, arena)
    if not np.array_equal(clipped, new):
        # walk up to the boundary along the heading, then stop
        frac = 1.0
        for ax in range(2):
            if new[ax] != clipped[ax]:
                frac = min(frac, (clipped[ax] - ped.position[ax]) / step[ax])
        new = ped.position + max(frac, 0.0) * step
        ped.stopped = True
    ped.travelled += math.hypot(*(new - ped.position))
    ped.position = new


def _react(ped, w):
    """Cooperative response of one pedestrian to the agent position."""
    if ped.stopped:
        return
    reach = ped.model.reaction_distance + w.agent_radius
    if ped.status == IDLE:
        if not in_reaction_zone(ped.position, ped.velocity, w.agent, reach):
            return
        if not in_cone(ped.position, ped.velocity, w.agent,
                       ped.model.crossing_angle_threshold, w.agent_radius):
            return
        ped.v_base = ped.velocity.copy()
        ped.side = dodge_side(ped.position, ped.v_base, w.agent, w.agent_velocity)
        ped.velocity = np.array(cooperative_velocity(ped.v_base, ped.side, ped.model))
        ped.status = DODGING
        ped.cooperation.append([w.t, None])
    elif ped.status == DODGING:
        if in_reaction_zone(ped.position, ped.v_base, w.agent, reach):
            # keep stepping away from the side the agent is passing on
            side = dodge_side(ped.position, ped.v_base, w.agent, w.agent_velocity)
            if side != ped.side:
                ped.side = side
                ped.velocity = np.array(cooperative_velocity(ped.v_base, side, ped.model))
            return
        ped.status = DONE
        ped.cooperation[-1][1] = w.t
        if w.reaim:
            d = ped.goal - ped.position
            n = math.hypot(*d)
            if n > 0:
                ped.velocity = d / n * math.hypot(*ped.v_orig)


def step_world(w, dt, mode):
    """Advance ``w`` by ``dt`` seconds in place and return it."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if mode == COUS:
        for ped in w.pedestrians:
            if math.hypot(*ped.velocity) > 0.0:
                _react(ped, w)
    for ped in w.pedestrians:
        _move(ped, dt, np.asarray(w.arena))
    t = w.t + dt
    new = w.trajectory.position(t)
    w.agent_velocity = (new - w.agent) / dt
    w.agent = new
    w.t = t
    for ped in w.pedestrians:
        if ped.stopped:
            w._contact.discard(ped.id)
            continue
        d = math.hypot(*(ped.position - w.agent))
        if d < ped.model.personal_radius + w.agent_radius:
            if ped.id not in w._contact:
                w.events.append((t, 0, ped.id, d))
                w._contact.add(ped.id)
        else:
            w._contact.discard(ped.id)
    return w


def rehearse(scenario, trajectory, cfg=None):
    """Replay ``trajectory`` against the cooperative pedestrian model.

    Returns ``(cooperators, collided)``: ids of pedestrians that react to the
    planned motion, and ids the agent would touch.
    """
    cfg = merged(cfg)
    w = WorldState.initial(scenario, trajectory, cfg)
    dt = cfg["sim_dt"]
    n_steps = int(math.ceil(min(trajectory.duration, cfg["sim_time_cap"]) / dt))
    for _ in range(n_steps):
        step_world(w, dt, COUS)
    return {p.id for p in w.pedestrians if p.cooperation}, {e[2] for e in w.events}


@dataclass
class SimulationResult:
    scenario: object
    mode: str
    completed: bool
    cause: str | None = None
    cmap: object = None
    path: object = None
    t: np.ndarray = None            # (T,)
    agent: np.ndarray = None        # (T, 2)
    pedestrians: dict = None        # id -> (T, 2)
    events: list = field(default_factory=list)
    cooperation: dict = field(default_factory=dict)   # id -> [(t_on, t_off)]
    ped_lengths: dict = field(default_factory=dict)   # id -> L_i

    @property
    def collisions(self):
        return len(self.events)


def _ped_length(ped, start):
    base = math.hypot(*(ped.goal - start))
    rest = math.hypot(*(ped.goal - ped.position))
    if base == 0.0:
        return 1.0
    return (ped.travelled + rest) / base


def simulate(scenario, mode=None, cfg=None, cmap=None):
    """Plan in ``mode`` and execute the plan; NoPath is reported, not raised."""
    mode = mode or scenario.mode
    cfg = merged(cfg)
    if cmap is None:
        cmap = planner.build_map(scenario, mode, cfg)
    try:
        path = planner.trace(cmap, scenario.target, cfg["descent_step"], scenario.nav_tolerance)
    except NoPath as exc:
        return SimulationResult(scenario, mode, False, f"NoPath: {exc}", cmap)
    traj = planner.to_world_trajectory(path, scenario, cfg["execution_timing"], v_w=cmap.v_w)
    w = WorldState.initial(scenario, traj, cfg)
    starts = {p.id: p.position.copy() for p in w.pedestrians}
    dt = cfg["sim_dt"]
    n_steps = int(math.ceil(min(traj.duration, cfg["sim_time_cap"]) / dt))
    ts = [0.0]
    agent = [w.agent.copy()]
    peds = {p.id: [p.position.copy()] for p in w.pedestrians}
    for _ in range(n_steps):
        step_world(w, dt, mode)
        ts.append(w.t)
        agent.append(w.agent.copy())
        for p in w.pedestrians:
            peds[p.id].append(p.position.copy())
    target = np.asarray(scenario.target, dtype=float)
    done = math.hypot(*(w.agent - target)) <= scenario.nav_tolerance
    res = SimulationResult(scenario, mode, done, None if done else "time cap", cmap, path,
                           np.array(ts), np.array(agent),
                           {k: np.array(v) for k, v in peds.items()}, w.events)
    for p in w.pedestrians:
        res.cooperation[p.id] = [tuple(c) for c in p.cooperation]
        res.ped_lengths[p.id] = _ped_length(p, starts[p.id])
    return res




@dataclass
class RunRecord:
    run: int
    seed: int
    mode: str
    segment: str
    completed: bool
    cause: str | None
    metrics: object            # MetricsRecord or None
    collisions: int
    omega_cells: int

    def row(self):
        m = self.metrics
        vals = (m.L, m.S, m.E, m.M) if m is not None else ("", "", "", "")
        return (self.run, self.seed, self.mode, self.segment, int(self.completed),
                self.cause or "", *vals, self.collisions, self.omega_cells)


def _one_run(args):
    from . import scenarios
    from .metrics import evaluate
    template, run, modes, cfg = args
    sc = scenarios.generate(template)
    out = []
    for mode in modes:
        res = simulate(sc, mode, cfg)
        met = evaluate(res, cfg["d_crt"]) if res.completed else None
        om = res.cmap.omega_count if res.cmap is not None else 0
        out.append(RunRecord(run, template.seed, mode, template.segment, res.completed, res.cause,
                             met, res.collisions, om))
    return out


def run_ensemble(template, runs, seed=0, modes=(AVUS, COUS), cfg=None, workers=1):
    """Simulate ``runs`` seeds of ``template`` (seeds ``seed .. seed + runs - 1``) in each mode.

    Records come back ordered by run then mode whatever the worker count.
    """
    from dataclasses import replace as _replace
    cfg = merged(cfg)
    jobs = [(_replace(template, seed=seed + k), k, tuple(modes), cfg) for k in range(runs)]
    if workers and workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(workers) as pool:
            chunks = list(pool.map(_one_run, jobs))
    else:
        chunks = [_one_run(j) for j in jobs]
    return [r for chunk in chunks for r in chunk]


def ensemble_stats(records):
    from .metrics import EnsembleStats
    by_mode = {}
    for r in records:
        if r.metrics is not None:
            by_mode.setdefault(r.mode, []).append(r.metrics)
    return EnsembleStats.from_records(by_mode)


__all__ = ["AVUS", "COUS", "WorldState", "SimulationResult", "RunRecord", "step_world", "simulate",
           "run_ensemble", "ensemble_stats",
           "rehearse"]
