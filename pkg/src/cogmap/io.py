"""Text formats: scenario files, map dumps and the CSV reports.

Scenario files are line oriented ``key = value`` text. ``#`` starts a
comment. A line ``pedestrian:`` opens a block whose keys are indented::

    arena = 8.0
    n = 80
    agent_start = 4.0, 0.6
    target = 4.0, 7.6
    mode = cous
    obstacle_disc = 2.0, 4.0, 0.3
    pedestrian:
        position = 4.0, 6.0
        velocity = 0.0, -0.6
        goal = 4.0, 0.0

``template = <family>`` switches to the generator; the remaining top-level
keys then name template fields (``count``, ``door_width``, ``seed``, ...).
"""

from __future__ import annotations

import csv
import dataclasses
import datetime
import math

import numpy as np

from .defaults import merged
from .core import AVUS, MODES, Disc, GridMapping, Pedestrian, Rect, Scenario, Vec2
from .errors import ConfigError, InvalidScenario
from .lattice import CompactCognitiveMap
from . import scenarios as _scen

SCENARIO_KEYS = {"arena", "n", "agent_start", "agent_radius", "target", "nav_tolerance", "mode",
                 "time_base", "agent_speed", "seed", "obstacle_disc", "obstacle_rect", "template"}
PEDESTRIAN_KEYS = {"id", "position", "velocity", "personal_radius", "reaction_distance", "goal"}
_TEMPLATE_DEFAULTS = {f.name: f.default for f in dataclasses.fields(_scen.ScenarioTemplate)}
TEMPLATE_KEYS = set(_TEMPLATE_DEFAULTS) - {"family"}


def _floats(value, count, key, line):
    try:
        parts = [float(v) for v in value.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"{key}: expected numbers, got {value!r}", line) from None
    if len(parts) != count:
        raise ConfigError(f"{key}: expected {count} numbers, got {len(parts)}", line)
    if not all(math.isfinite(p) for p in parts):
        raise ConfigError(f"{key}: values must be finite", line)
    return parts


def _number(value, key, line, kind=float):
    try:
        return kind(value)
    except ValueError:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {value!r}", line) from None


def _tokenize(text):
    """Yield ``(line_no, indented, key, value)``; block headers have value None."""
    for no, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].rstrip()
        if not body.strip():
            continue
        indented = body[0] in " \t"
        s = body.strip()
        if s.endswith(":") and "=" not in s:
            yield no, indented, s[:-1].strip(), None
            continue
        if "=" not in s:
            raise ConfigError(f"expected 'key = value', got {s!r}", no)
        key, value = (p.strip() for p in s.split("=", 1))
        if not key:
            raise ConfigError("empty key", no)
        yield no, indented, key, value


def parse_scenario(text, cfg=None):
    """Scenario from file text; omitted values come from the defaults table (or ``cfg``)."""
    top = {}
    peds = []
    obstacles = []
    block = None
    for no, indented, key, value in _tokenize(text):
        if value is None:
            if key != "pedestrian" or indented:
                raise ConfigError(f"unknown block {key!r}", no)
            block = {"_line": no}
            peds.append(block)
            continue
        if indented:
            if block is None:
                raise ConfigError(f"indented key {key!r} outside a pedestrian block", no)
            if key not in PEDESTRIAN_KEYS:
                raise ConfigError(f"unknown pedestrian key {key!r}", no)
            if key in block:
                raise ConfigError(f"duplicate pedestrian key {key!r}", no)
            block[key] = (value, no)
            continue
        block = None
        if key in ("obstacle_disc", "obstacle_rect"):
            obstacles.append((key, value, no))
            continue
        if key in top:
            raise ConfigError(f"duplicate key {key!r}", no)
        top[key] = (value, no)
    if "template" in top:
        return _scen.generate(_template_from(top, peds, obstacles))
    for key, (_, no) in top.items():
        if key not in SCENARIO_KEYS:
            raise ConfigError(f"unknown key {key!r}", no)
    return _build_scenario(top, peds, obstacles, merged(cfg))


def parse_template(text):
    """ScenarioTemplate from file text holding a ``template = <family>`` line."""
    top = {}
    for no, indented, key, value in _tokenize(text):
        if value is None or indented:
            raise ConfigError("template files take top-level keys only", no)
        if key in top:
            raise ConfigError(f"duplicate key {key!r}", no)
        top[key] = (value, no)
    if "template" not in top:
        raise ConfigError("missing required key 'template'")
    return _template_from(top, [], [])


def _template_from(top, peds, obstacles):
    family, no = top.pop("template")
    if peds or obstacles:
        raise ConfigError("a template file cannot list pedestrians or obstacles", no)
    if family not in _scen.FAMILIES:
        raise ConfigError(f"unknown template {family!r}", no)
    kwargs = {}
    for key, (value, line) in top.items():
        if key == "agent_start":
            kwargs[key] = tuple(_floats(value, 2, key, line))
            continue
        if key not in TEMPLATE_KEYS:
            raise ConfigError(f"unknown template key {key!r}", line)
        ref = _TEMPLATE_DEFAULTS[key]
        if isinstance(ref, bool):
            kwargs[key] = value.lower() in ("1", "true", "yes", "on")
        elif isinstance(ref, int):
            kwargs[key] = _number(value, key, line, int)
        elif isinstance(ref, float):
            kwargs[key] = _number(value, key, line)
        else:
            kwargs[key] = value
    try:
        return _scen.preset(family, **kwargs)
    except InvalidScenario as exc:
        raise ConfigError(str(exc), no) from None


def _build_scenario(top, peds, obstacles, cfg):
    def get(key, default=None, parse=None):
        if key not in top:
            return default
        value, line = top[key]
        return parse(value, key, line)

    for key in ("agent_start", "target"):
        if key not in top:
            raise ConfigError(f"missing required key {key!r}")
    arena = get("arena", cfg["arena"], _number)
    n = get("n", cfg["n"], lambda v, k, l: _number(v, k, l, int))
    mode = get("mode", AVUS, lambda v, k, l: v.lower())
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}", top["mode"][1])
    pts = {k: get(k, None, lambda v, kk, l: _floats(v, 2, kk, l)) for k in ("agent_start", "target")}
    obs = []
    for key, value, line in obstacles:
        if key == "obstacle_disc":
            x, y, r = _floats(value, 3, key, line)
            obs.append(Disc(Vec2(x, y), r))
        else:
            obs.append(Rect(*_floats(value, 4, key, line)))
    pedestrians = []
    for k, block in enumerate(peds, 1):
        line = block.pop("_line")
        for req in ("position", "velocity", "goal"):
            if req not in block:
                raise ConfigError(f"pedestrian block missing {req!r}", line)
        def field(key, default, kind=float):
            if key not in block:
                return default
            return _number(block[key][0], key, block[key][1], kind)

        def pair(key):
            return Vec2(*_floats(block[key][0], 2, key, block[key][1]))

        try:
            pedestrians.append(Pedestrian(
                field("id", k, int), pair("position"), pair("velocity"), pair("goal"),
                field("personal_radius", cfg["personal_radius"]),
                field("reaction_distance", cfg["reaction_distance"])))
        except InvalidScenario as exc:
            raise ConfigError(f"invariant violated: {exc}", line) from None
    try:
        mapping = GridMapping(arena, arena, n)
        return Scenario(mapping, Vec2(*pts["agent_start"]), Vec2(*pts["target"]),
                        get("agent_radius", cfg["agent_radius"], _number),
                        get("nav_tolerance", cfg["nav_tolerance"], _number),
                        tuple(pedestrians), tuple(obs), mode, get("time_base", cfg["time_base"], _number),
                        get("agent_speed", cfg["agent_speed"], _number),
                        get("seed", 0, lambda v, k, l: _number(v, k, l, int)))
    except InvalidScenario as exc:
        raise ConfigError(f"invariant violated: {exc}") from None


def load_scenario(path, cfg=None):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from None
    return parse_scenario(text, cfg)


def _pair(v):
    return f"{float(v[0])!r}, {float(v[1])!r}"


def dump_scenario(sc):
    m = sc.mapping
    lines = [f"arena = {m.arena_width!r}", f"n = {m.n}", f"agent_start = {_pair(sc.agent_start)}",
             f"agent_radius = {sc.agent_radius!r}", f"target = {_pair(sc.target)}",
             f"nav_tolerance = {sc.nav_tolerance!r}", f"mode = {sc.mode}",
             f"time_base = {sc.time_base!r}", f"agent_speed = {sc.agent_speed!r}", f"seed = {sc.seed}"]
    for ob in sc.obstacles:
        if isinstance(ob, Disc):
            lines.append(f"obstacle_disc = {_pair(ob.center)}, {float(ob.radius)!r}")
        else:
            lines.append(f"obstacle_rect = {ob.x0!r}, {ob.y0!r}, {ob.x1!r}, {ob.y1!r}")
    for p in sc.pedestrians:
        lines += ["pedestrian:", f"    id = {p.id}", f"    position = {_pair(p.position)}",
                  f"    velocity = {_pair(p.velocity)}", f"    goal = {_pair(p.goal)}",
                  f"    personal_radius = {p.personal_radius!r}",
                  f"    reaction_distance = {p.reaction_distance!r}"]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- map dumps

def dump_map(cmap, fh):
    """Header ``n h r_th`` then one line per lattice row ``i`` (x index), ``j`` along the line."""
    n = cmap.mapping.n
    fh.write(f"n={n} h={cmap.h!r} r_th={cmap.r_th!r}\n")
    omega = cmap.omega
    for i in range(n):
        row = []
        for j in range(n):
            if omega[i, j]:
                row.append("obs")
            elif math.isinf(cmap.c[i, j]):
                row.append("inf")
            else:
                row.append(repr(float(cmap.c[i, j])))
        fh.write(" ".join(row) + "\n")


def read_map(fh):
    """Parse a map dump into ``(header, c, omega)``; Omega cells get ``c = inf``."""
    lines = [l for l in fh.read().splitlines() if l.strip() and not l.startswith("#")]
    header = dict(kv.split("=", 1) for kv in lines[0].split())
    n = int(header["n"])
    header = {"n": n, "h": float(header["h"]), "r_th": float(header["r_th"])}
    rows = [l.split() for l in lines[1:]]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ConfigError(f"map body must be {n} rows of {n} values")
    omega = np.array([[v == "obs" for v in r] for r in rows])
    c = np.array([[math.inf if v in ("obs", "inf") else float(v) for v in r] for r in rows])
    return header, c, omega


# -------------------------------------------------------------------- CSVs

def stamp(fh, enabled=True):
    if enabled:
        fh.write(f"# generated {datetime.datetime.now(datetime.timezone.utc).isoformat()}\n")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])


def read_csv(fh):
    """Return ``(header, rows)`` skipping ``#`` comment lines; values stay strings."""
    lines = [l for l in fh.read().splitlines() if not l.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


def path_rows(trajectory):
    return [(t, p[0], p[1]) for t, p in zip(trajectory.t, trajectory.xy)]


def trajectory_rows(result):
    rows = []
    for k, t in enumerate(result.t):
        rows.append((t, 0, result.agent[k, 0], result.agent[k, 1]))
        for pid in sorted(result.pedestrians):
            p = result.pedestrians[pid][k]
            rows.append((t, pid, p[0], p[1]))
    return rows


PATH_HEADER = ("t_seconds", "x_m", "y_m")
TRAJECTORY_HEADER = ("t", "entity_id", "x", "y")
EVENT_HEADER = ("t", "id_a", "id_b", "distance")
METRICS_HEADER = ("run", "seed", "mode", "segment", "completed", "cause", "L", "S", "E", "M",
                  "collisions", "omega_cells")
STATS_HEADER = ("measure", "mode", "mean", "std", "n")
PVALUE_HEADER = ("measure", "p_value")


def write_stats(fh, stats, method="welch", timestamp=True):
    stamp(fh, timestamp)
    write_csv(fh, STATS_HEADER, stats.summary())
    fh.write("\n")
    write_csv(fh, PVALUE_HEADER, sorted(stats.p_values(method).items()))


def read_stats(fh):
    text = "\n".join(l for l in fh.read().splitlines() if not l.startswith("#"))
    first, second = text.split("\n\n", 1)
    a = list(csv.reader(first.splitlines()))
    b = list(csv.reader(second.splitlines()))
    return a[1:], b[1:]


def write_params(fh, cfg, timestamp=True):
    stamp(fh, timestamp)
    for key in sorted(cfg):
        fh.write(f"{key} = {_fmt(cfg[key])}\n")


def read_params(fh):
    out = {}
    for no, indented, key, value in _tokenize(fh.read()):
        out[key] = value
    return out


__all__ = ["parse_scenario", "parse_template", "load_scenario", "dump_scenario", "dump_map", "read_map",
           "write_csv", "read_csv", "write_stats", "read_stats", "write_params", "read_params",
           "CompactCognitiveMap"]
