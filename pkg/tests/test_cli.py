import os
import subprocess
import sys

import pytest

from cogmap import io
from cogmap.cli import main

SCENE = """\
arena = 8.0
agent_start = 4.0, 0.6
target = 4.0, 7.6
pedestrian:
    position = 4.0, 6.0
    velocity = 0.0, -0.6
    goal = 4.0, 0.0
"""


def _files(d):
    out = {}
    for name in sorted(os.listdir(d)):
        with open(os.path.join(d, name), "rb") as fh:
            out[name] = fh.read()
    return out


def test_plan_head_on_template(tmp_path, capsys):
    assert main(["plan", "--template", "head_on", "--out", str(tmp_path), "--no-timestamp"]) == 0
    files = _files(tmp_path)
    assert {"map_avus.txt", "map_cous.txt", "path_avus.csv", "path_cous.csv", "params.txt"} <= set(files)
    counts = {}
    for mode in ("avus", "cous"):
        with open(tmp_path / f"map_{mode}.txt") as fh:
            _, _, omega = io.read_map(fh)
        counts[mode] = omega.sum()
    assert counts["cous"] < counts["avus"]


def test_simulate_scenario_file_deterministic(tmp_path):
    f = tmp_path / "scene.txt"
    f.write_text(SCENE)
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["simulate", "--scenario", str(f), "--mode", "cous", "--out", str(out),
                     "--no-timestamp"]) == 0
    fa, fb = _files(a), _files(b)
    assert fa == fb
    assert {"metrics.csv", "events_cous.csv", "trajectories_cous.csv", "map_cous.txt"} <= set(fa)
    with open(a / "metrics.csv") as fh:
        header, rows = io.read_csv(fh)
    assert tuple(header) == io.METRICS_HEADER and rows[0][4] == "1"


def test_timestamp_line_is_the_only_difference(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["plan", "--template", "head_on", "--mode", "avus", "--out", str(a), "--no-timestamp"])
    main(["plan", "--template", "head_on", "--mode", "avus", "--out", str(b)])
    for name, data in _files(a).items():
        other = _files(b)[name]
        lines = [l for l in other.decode().splitlines() if not l.startswith("# generated")]
        assert data.decode().splitlines() == lines


def test_ensemble_outputs(tmp_path, capsys):
    assert main(["ensemble", "--template", "head_on", "--runs", "2", "--out", str(tmp_path),
                 "--no-timestamp"]) == 0
    with open(tmp_path / "stats.csv") as fh:
        summary, pvals = io.read_stats(fh)
    assert {r[0] for r in summary} == {"L", "S", "E"}
    assert {r[0] for r in pvals} == {"L", "S", "E"}
    assert "p(L)" in capsys.readouterr().out


def test_calibrate(tmp_path):
    assert main(["calibrate", "--sizes", "60", "80", "--out", str(tmp_path), "--no-timestamp"]) == 0
    lines = (tmp_path / "calibration.txt").read_text().splitlines()
    v = [float(l.split()[1]) for l in lines[1:]]
    assert len(v) == 2 and abs(v[0] - v[1]) / v[1] < 0.05


def test_set_overrides_echoed(tmp_path):
    assert main(["plan", "--template", "head_on", "--mode", "avus", "--set", "d_crt=0.5",
                 "--set", "count=1", "--out", str(tmp_path), "--no-timestamp"]) == 0
    with open(tmp_path / "params.txt") as fh:
        assert io.read_params(fh)["d_crt"] == "0.5"


@pytest.mark.parametrize("argv", [
    ["plan", "--scenario", "/nonexistent/scene.txt"],
    ["plan", "--template", "head_on", "--set", "nonsense=1"],
    ["plan", "--template", "head_on", "--set", "novalue"],
    ["ensemble", "--template", "head_on", "--runs", "0"],
])
def test_config_errors_exit_1(tmp_path, argv, capsys):
    assert main(argv + ["--out", str(tmp_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_numerical_failure_exit_2(tmp_path, capsys):
    assert main(["plan", "--template", "head_on", "--set", "dtau=3.0", "--out", str(tmp_path)]) == 2


def test_no_path_is_not_a_failure(tmp_path, capsys):
    assert main(["simulate", "--template", "dense_group", "--mode", "avus", "--out", str(tmp_path),
                 "--no-timestamp"]) == 0
    with open(tmp_path / "metrics.csv") as fh:
        _, rows = io.read_csv(fh)
    assert rows[0][4] == "0" and rows[0][5].startswith("NoPath")


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "cogmap", "calibrate", "--sizes", "40",
                        "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0 and "v_w" in r.stdout
