import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cogmap import social
from cogmap.core import GridMapping, Pedestrian, Vec2, disc_mask
from cogmap.errors import DegenerateVelocity, NoVisualAxis
from cogmap.social import LEFT, RIGHT, BranchPair, HumanModel


def test_crossing_angle_cardinal():
    assert social.crossing_angle((0, 0), (1, 0), (3, 0)) == 0.0
    assert social.crossing_angle((0, 0), (1, 0), (0, 2)) == pytest.approx(90.0)
    assert abs(social.crossing_angle((0, 0), (1, 0), (-2, 0))) == pytest.approx(180.0)
    with pytest.raises(NoVisualAxis):
        social.crossing_angle((0, 0), (0, 0), (1, 0))


def _walker(v=(0.0, -1.0)):
    return Pedestrian(1, Vec2(4.0, 6.0), Vec2(*v), Vec2(4.0, 0.0))


def test_eligibility():
    h = _walker()
    assert social.cooperation_eligible(h, (4.0, 4.5))
    off = (4.0 + 1.5 * math.sin(math.radians(10)), 6.0 - 1.5 * math.cos(math.radians(10)))
    assert not social.cooperation_eligible(h, off)
    assert not social.cooperation_eligible(h, (4.0, 3.5))          # beyond d_r
    assert not social.cooperation_eligible(_walker((0.0, 0.0)), (4.0, 5.0))


def test_body_slack_widens_cone():
    pos, vel = (0.0, 0.0), (1.0, 0.0)
    p = (2.0, 2.0 * math.tan(math.radians(8)))
    assert not social.in_cone(pos, vel, p, 5.0)
    assert social.in_cone(pos, vel, p, 5.0, body_radius=0.2)


def test_cooperative_velocity_convention():
    assert tuple(social.cooperative_velocity((1.0, 0.0), RIGHT)) == (1.0, -0.5)
    assert tuple(social.cooperative_velocity((1.0, 0.0), LEFT)) == (1.0, 0.5)
    with pytest.raises(DegenerateVelocity):
        social.cooperative_velocity((0.0, 0.0), LEFT)
    with pytest.raises(ValueError):
        social.lateral_offset((1.0, 0.0), "up")


@settings(max_examples=50, deadline=None)
@given(vx=st.floats(-3, 3), vy=st.floats(-3, 3), side=st.sampled_from([LEFT, RIGHT]))
def test_cooperative_velocity_properties(vx, vy, side):
    if math.hypot(vx, vy) < 1e-3:
        return
    v = np.array([vx, vy])
    w = np.array(social.cooperative_velocity(v, side))
    assert np.linalg.norm(w) == pytest.approx(np.linalg.norm(v) * math.sqrt(1.25))
    assert w @ v == pytest.approx(v @ v)
    back = w - np.array(social.lateral_offset(v, side))
    assert back == pytest.approx(v)


def test_branch_speeds():
    b = BranchPair.spawn(0.0, (1.0, 1.0), (0.0, -0.8))
    for v in (b.left_velocity, b.right_velocity):
        assert math.hypot(*v) == pytest.approx(0.8 * math.sqrt(1.25))
    a, c = b.centers(0.0)
    assert a == c == Vec2(1.0, 1.0)


def _branches_at(sep, R=0.6):
    # centers separate by |v_l - v_r| = |v| per unit time
    b = BranchPair.spawn(0.0, (4.0, 4.0), (1.0, 0.0))
    return b, sep / 1.0


def test_virtual_obstacle_at_onset_is_full_disc():
    m = GridMapping(8.0, 8.0, 80)
    b = BranchPair.spawn(0.0, (4.02, 3.97), (0.0, 1.0))
    assert np.array_equal(social.virtual_obstacle(b, 0.6, m, 0.0), disc_mask((4.02, 3.97), 0.6, m))
    with pytest.raises(ValueError):
        social.virtual_obstacle(b, 0.6, m, -1.0)


def test_virtual_obstacle_tangent_is_empty():
    m = GridMapping(8.0, 8.0, 80)
    b, t = _branches_at(1.2)
    assert not social.virtual_obstacle(b, 0.6, m, t).any()


def test_virtual_obstacle_lens_area():
    m = GridMapping(8.0, 8.0, 80)
    R = 0.6
    b, t = _branches_at(R, R)
    got = int(social.virtual_obstacle(b, R, m, t).sum())
    # brute-force enumeration of cell centers in both discs
    a, c = b.centers(t)
    X, Y = m.centers()
    ref = int((((X - a.x) ** 2 + (Y - a.y) ** 2 <= R * R) & ((X - c.x) ** 2 + (Y - c.y) ** 2 <= R * R)).sum())
    assert abs(got - ref) <= 4
    area = 2 * R * R * (math.pi / 3 - math.sqrt(3) / 4)
    assert abs(got - area / m.cell_size ** 2) <= 4


def test_virtual_obstacle_shrinks_and_stays_inside():
    m = GridMapping(8.0, 8.0, 80)
    b = BranchPair.spawn(0.0, (4.0, 4.0), (0.3, 0.9))
    prev = None
    for t in np.linspace(0.0, 1.4, 15):
        lens = social.virtual_obstacle(b, 0.6, m, t)
        a, c = b.centers(t)
        assert not np.any(lens & ~disc_mask(a, 0.6, m))
        assert not np.any(lens & ~disc_mask(c, 0.6, m))
        if prev is not None:
            assert lens.sum() <= prev
        prev = lens.sum()


def test_dodge_side_head_on():
    # agent approaching slightly to the human's left: human dodges right
    assert social.dodge_side((0, 0), (0, -1), (0.1, -2.0), (0, 1)) == RIGHT
    assert social.dodge_side((0, 0), (0, -1), (-0.1, -2.0), (0, 1)) == LEFT
    with pytest.raises(DegenerateVelocity):
        social.dodge_side((0, 0), (0, 0), (1, 1), (0, 0))


def test_human_model_defaults():
    m = HumanModel()
    assert (m.crossing_angle_threshold, m.lateral_gain) == (5.0, 0.5)
    with pytest.raises(ValueError):
        HumanModel(crossing_angle_threshold=0.0)
