"""Heuristic pedestrian response model used under the cooperative strategy.

A walking pedestrian cooperates only when the other agent is inside the
forward reaction zone and within a narrow cone around the visual axis. A
cooperating pedestrian adds a lateral component of half its speed, which
keeps the forward component unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Vec2, disc_mask
from .errors import DegenerateVelocity, NoVisualAxis

LEFT = "left"
RIGHT = "right"


@dataclass(frozen=True)
class HumanModel:
    crossing_angle_threshold: float = 5.0   # degrees
    lateral_gain: float = 0.5
    reaction_distance: float = 2.0
    personal_radius: float = 0.4

    def __post_init__(self):
        if not self.crossing_angle_threshold > 0:
            raise ValueError("crossing angle threshold must be positive")

    @classmethod
    def for_pedestrian(cls, ped, cfg=None):
        cfg = cfg or {}
        return cls(cfg.get("crossing_angle", 5.0), cfg.get("lateral_gain", 0.5),
                   ped.reaction_distance, ped.personal_radius)


def crossing_angle(human_pos, human_vel, point):
    """Signed bearing of ``point`` from the visual axis, degrees in (-180, 180].

    Positive means the point lies to the left of the walking direction.
    """
    vx, vy = human_vel
    if vx == 0.0 and vy == 0.0:
        raise NoVisualAxis("a standing human has no visual axis")
    dx, dy = point[0] - human_pos[0], point[1] - human_pos[1]
    return math.degrees(math.atan2(vx * dy - vy * dx, vx * dx + vy * dy))


def in_reaction_zone(human_pos, human_vel, point, reaction_distance):
    """Forward half-disc of radius ``reaction_distance`` in front of the human."""
    dx, dy = point[0] - human_pos[0], point[1] - human_pos[1]
    if math.hypot(dx, dy) > reaction_distance:
        return False
    return dx * human_vel[0] + dy * human_vel[1] >= 0.0


def in_cone(human_pos, human_vel, point, threshold, body_radius=0.0):
    """True when a disc of ``body_radius`` at ``point`` reaches into the visual cone.

    With ``body_radius = 0`` this is ``|crossing_angle| < threshold``; a body
    of radius b at distance D widens the cone by ``asin(b / D)``.
    """
    phi = abs(crossing_angle(human_pos, human_vel, point))
    dist = math.hypot(point[0] - human_pos[0], point[1] - human_pos[1])
    slack = math.degrees(math.asin(min(body_radius / dist, 1.0))) if dist > 0 else 90.0
    return phi < threshold + slack


def cooperation_eligible(human, point, model=None, body_radius=0.0):
    model = model or HumanModel.for_pedestrian(human)
    pos = human.position
    if math.hypot(point[0] - pos[0], point[1] - pos[1]) > model.reaction_distance:
        return False
    try:
        return in_cone(pos, human.velocity, point, model.crossing_angle_threshold, body_radius)
    except NoVisualAxis:
        return False


def lateral_offset(v, side, gain=0.5):
    """The lateral vector ``w``: perpendicular to ``v`` with ``|w| = gain |v|``."""
    vx, vy = v
    if vx == 0.0 and vy == 0.0:
        raise DegenerateVelocity("cannot dodge without a walking direction")
    if side == LEFT:
        return Vec2(-vy * gain, vx * gain)
    if side == RIGHT:
        return Vec2(vy * gain, -vx * gain)
    raise ValueError(f"side must be {LEFT!r} or {RIGHT!r}")


def cooperative_velocity(v_old, side, model=None):
    gain = HumanModel().lateral_gain if model is None else model.lateral_gain
    w = lateral_offset(v_old, side, gain)
    return Vec2(v_old[0] + w[0], v_old[1] + w[1])


@dataclass(frozen=True)
class BranchPair:
    """The two hypothetical dodges spawned when cooperation starts.

    Positions are in world coordinates at ``onset`` (seconds, or any clock
    the caller uses consistently); both branches start where the human is.
    """
    onset: float
    origin: Vec2
    left_velocity: Vec2
    right_velocity: Vec2

    @classmethod
    def spawn(cls, onset, position, v_old, model=None):
        return cls(onset, Vec2(*position), cooperative_velocity(v_old, LEFT, model),
                   cooperative_velocity(v_old, RIGHT, model))

    def centers(self, t):
        dt = t - self.onset
        o = self.origin
        return (Vec2(o.x + self.left_velocity.x * dt, o.y + self.left_velocity.y * dt),
                Vec2(o.x + self.right_velocity.x * dt, o.y + self.right_velocity.y * dt))


def virtual_obstacle(branches, inflated_radius, m, t):
    """Boolean mask of the cells shared by both inflated branch discs at time ``t``.

    ``inflated_radius`` is the personal radius plus the agent radius.
    """
    if t < branches.onset:
        raise ValueError("virtual obstacle requested before the branches exist")
    a, b = branches.centers(t)
    if math.hypot(a.x - b.x, a.y - b.y) >= 2.0 * inflated_radius:
        return np.zeros((m.n, m.n), dtype=bool)
    return disc_mask(a, inflated_radius, m) & disc_mask(b, inflated_radius, m)


def dodge_side(human_pos, human_vel, agent_pos, agent_vel):
    """Side that increases the lateral separation from the approaching agent.

    The agent's lateral offset is taken at the moment of closest approach of
    the relative motion, so a pedestrian reads where the agent is heading,
    not only where it is. Ties go to the right.
    """
    vx, vy = human_vel
    speed = math.hypot(vx, vy)
    if speed == 0.0:
        raise DegenerateVelocity("standing humans do not dodge")
    rx, ry = agent_pos[0] - human_pos[0], agent_pos[1] - human_pos[1]
    wx, wy = agent_vel[0] - vx, agent_vel[1] - vy
    w2 = wx * wx + wy * wy
    t_star = max(0.0, -(rx * wx + ry * wy) / w2) if w2 > 0 else 0.0
    px, py = rx + wx * t_star, ry + wy * t_star
    lateral = (vx * py - vy * px) / speed
    return RIGHT if lateral >= 0.0 else LEFT
