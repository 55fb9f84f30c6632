import math

import numpy as np
import pytest

from cogmap import planner, scenarios
from cogmap.core import AVUS, COUS, GridMapping, Pedestrian, Rect, Scenario, Vec2
from cogmap.defaults import merged
from cogmap.errors import InvalidStart, NoPath
from cogmap.lattice import LatticeParams
from conftest import head_on_pedestrian


def _scene(peds=(), obstacles=(), start=(4.0, 0.6), target=(4.0, 7.6)):
    return Scenario(GridMapping(8.0, 8.0, 80), Vec2(*start), Vec2(*target),
                    pedestrians=tuple(peds), obstacles=tuple(obstacles))


@pytest.fixture(scope="module")
def empty_map(empty_scene):
    return planner.build_map_avus(empty_scene)


@pytest.fixture(scope="module")
def head_on_maps(head_on_scene):
    return planner.build_map_avus(head_on_scene), planner.build_map_cous(head_on_scene)


def test_empty_arena_path_nearly_straight(empty_scene, empty_map):
    path = planner.trace(empty_map, empty_scene.target)
    assert path.length / 7.0 <= 1.05
    assert np.allclose(path.points[0], empty_scene.agent_start)
    assert np.allclose(path.points[-1], empty_scene.target)
    assert np.all(np.diff(path.mental_time) >= 0)
    # consecutive vertices at most one cell diagonal apart
    assert np.linalg.norm(np.diff(path.points, axis=0), axis=1).max() <= 0.1 * math.sqrt(2) + 1e-9


def test_no_pedestrians_avus_equals_cous(empty_scene, empty_map):
    other = planner.build_map_cous(empty_scene)
    assert np.array_equal(empty_map.c, other.c)
    assert np.array_equal(empty_map.omega_step, other.omega_step)


def test_zero_velocity_crowd_reduces_to_static():
    peds = [Pedestrian(k + 1, Vec2(2.0 + 2 * k, 4.0), Vec2(0.0, 0.0), Vec2(2.0 + 2 * k, 0.0)) for k in range(3)]
    sc = _scene(peds)
    a, b = planner.build_map_avus(sc), planner.build_map_cous(sc)
    assert np.array_equal(a.c, b.c) and np.array_equal(a.omega_step, b.omega_step)


def test_wall_gap_path_uses_gap():
    walls = [Rect(0.0, 3.9, 5.0, 4.1), Rect(6.0, 3.9, 8.0, 4.1)]
    sc = _scene(obstacles=walls, start=(2.0, 1.0), target=(6.0, 7.0))
    path = planner.trace(planner.build_map_avus(sc), sc.target)
    near = path.points[np.abs(path.points[:, 1] - 4.0) < 0.1]
    assert len(near) and np.all((near[:, 0] > 5.0) & (near[:, 0] < 6.0))


def test_blocked_target_is_no_path():
    sc = _scene(obstacles=[Rect(0.0, 3.9, 8.0, 4.1)])
    cmap = planner.build_map_avus(sc)
    with pytest.raises(NoPath):
        planner.trace(cmap, sc.target, tolerance=0.2)
    with pytest.raises(NoPath):
        planner.trace(cmap, (9.0, 9.0))


def test_invalid_start_propagates():
    sc = _scene(obstacles=[Rect(3.5, 0.2, 4.5, 1.0)])
    with pytest.raises(InvalidStart):
        planner.build_map_avus(sc)


def test_head_on_cooperation_shrinks_obstacle(head_on_maps):
    av, co = head_on_maps
    assert av.omega_count > 0
    assert co.omega_count < av.omega_count
    assert co.cooperation_onsets and not co.excluded


def test_head_on_avus_forces_detour(head_on_scene, head_on_maps):
    av, co = head_on_maps
    la = planner.trace(av, head_on_scene.target).length
    lc = planner.trace(co, head_on_scene.target).length
    assert la > lc > 7.0


def test_off_axis_crossers_identical_maps():
    # lateral crossers see the front at about 90 degrees, far outside the cone
    peds = [Pedestrian(1, Vec2(1.0, 3.0), Vec2(0.8, 0.0), Vec2(7.9, 3.0)),
            Pedestrian(2, Vec2(7.0, 5.0), Vec2(-0.6, 0.0), Vec2(0.1, 5.0))]
    sc = _scene(peds)
    a, b = planner.build_map_avus(sc), planner.build_map_cous(sc)
    assert not b.cooperation_onsets
    assert np.array_equal(a.c, b.c) and np.array_equal(a.omega_step, b.omega_step)


def test_cooperative_occupancy_is_subset():
    cfg = merged()
    params = LatticeParams.from_config(cfg)
    for seed in range(3):
        sc = scenarios.generate(scenarios.preset("cluttered_flow", seed=seed))
        tb = planner.Timebase.for_scenario(sc, params)
        co = planner._Occupancy(sc, cfg, params, tb, cooperative=True)
        av = planner._Occupancy(sc, cfg, params, tb, cooperative=False)
        bad = []

        def stream(k, state):
            b = co(k, state)
            bad.append(int(np.count_nonzero(b & ~av(k, state))))
            return b

        from cogmap.lattice import run_wave
        run_wave(sc, stream, params)
        assert co.onset.max() >= 0
        assert max(bad) == 0


def test_trace_start_off_target_cell():
    sc = _scene(obstacles=[Rect(3.8, 7.4, 4.2, 8.0)], target=(4.0, 7.75))
    cmap = planner.build_map_avus(sc)
    path = planner.trace(cmap, sc.target, tolerance=0.6)
    assert math.dist(path.points[-1], sc.target) <= 0.6
    with pytest.raises(NoPath):
        planner.trace(cmap, sc.target, tolerance=None)


def test_trajectory_speed_timing(empty_scene):
    pts = np.column_stack([np.full(11, 1.0), np.linspace(1.0, 6.0, 11)])
    path = planner.Path(pts, np.arange(11.0))
    traj = planner.to_world_trajectory(path, empty_scene)
    assert traj.duration == pytest.approx(5.0)
    fast = planner.to_world_trajectory(path, Scenario(empty_scene.mapping, empty_scene.agent_start,
                                                      empty_scene.target, agent_speed=2.0))
    assert fast.duration == pytest.approx(2.5)
    assert traj.position(2.5) == pytest.approx([1.0, 3.5])
    assert traj.position(-1.0) == pytest.approx([1.0, 1.0])
    assert traj.position(99.0) == pytest.approx([1.0, 6.0])
    with pytest.raises(ValueError):
        planner.to_world_trajectory(path, empty_scene, timing="map")


def test_speed_timing_agrees_with_arrival_field(empty_scene, empty_map):
    path = planner.trace(empty_map, empty_scene.target)
    traj = planner.to_world_trajectory(path, empty_scene, "speed")
    spt = planner.Timebase.for_scenario(empty_scene).seconds_per_tau
    # the clamped source needs a while to launch the front, so compare increments
    # beyond the first meter
    far = np.nonzero(np.linalg.norm(path.points - np.asarray(empty_scene.agent_start), axis=1) > 1.0)[0]
    ref = far[0]
    later = far[traj.t[far] - traj.t[ref] > 1.0]
    dc = (path.mental_time[later] - path.mental_time[ref]) * spt
    dt = traj.t[later] - traj.t[ref]
    assert np.all(np.abs(dc / dt - 1.0) < 0.1)


def test_map_timing_follows_arrival_times(empty_scene, empty_map):
    path = planner.trace(empty_map, empty_scene.target)
    traj = planner.to_world_trajectory(path, empty_scene, "map", v_w=empty_map.v_w)
    spt = empty_map.v_w * 0.1 / empty_scene.agent_speed
    assert traj.t == pytest.approx(np.maximum.accumulate(path.mental_time) * spt)


def test_timebase_units():
    tb = planner.Timebase(0.16, 0.1, 1.0, 0.1, 0.1)
    assert tb.seconds_per_tau == pytest.approx(0.016)
    assert tb.seconds_per_step == pytest.approx(0.0016)
    assert tb.prediction_index(100) == pytest.approx(1.6)


def test_build_map_dispatch(head_on_scene, head_on_maps):
    av, _ = head_on_maps
    assert planner.build_map(head_on_scene, AVUS).mode == AVUS
    assert np.array_equal(planner.build_map(head_on_scene).c, av.c)   # scenario mode is avus
