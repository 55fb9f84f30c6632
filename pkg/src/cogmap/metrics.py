"""Trajectory measures and the two-sample tests used to compare strategies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import EmptyTrajectory, IncompleteRun


def polyline_length(vertices):
    v = np.asarray(vertices, dtype=float)
    if len(v) < 2:
        return 0.0
    return float(np.sum(np.linalg.norm(np.diff(v, axis=0), axis=1)))


def trajectory_length(vertices, p_A, p_T, tolerance=None):
    """Path length over the straight distance ``|p_A - p_T|``.

    With ``tolerance`` given, a last vertex farther than that from ``p_T``
    raises IncompleteRun.
    """
    v = np.asarray(vertices, dtype=float)
    base = math.hypot(p_T[0] - p_A[0], p_T[1] - p_A[1])
    if base == 0.0:
        raise ValueError("start and target coincide")
    if len(v) == 0:
        raise IncompleteRun("no vertices")
    if tolerance is not None and math.hypot(*(v[-1] - np.asarray(p_T))) > tolerance:
        raise IncompleteRun("trajectory ends outside the target tolerance")
    return polyline_length(v) / base


def resample(vertices, spacing):
    """Points at fixed arc-length spacing along the polyline, ends included."""
    v = np.asarray(vertices, dtype=float)
    if len(v) == 0:
        raise EmptyTrajectory("empty trajectory")
    seg = np.linalg.norm(np.diff(v, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] == 0.0:
        return v[:1].copy()
    k = int(math.floor(s[-1] / spacing))
    at = np.append(np.arange(k + 1) * spacing, s[-1]) if k * spacing < s[-1] else np.arange(k + 1) * spacing
    keep = np.concatenate([[True], np.diff(s) > 0])
    return np.column_stack([np.interp(at, s[keep], v[keep, 0]), np.interp(at, s[keep], v[keep, 1])])


def trajectory_safety(vertices, omega, d_crt, mapping, spacing=None):
    """Fraction of trajectory points at least ``d_crt`` away from every Omega cell center.

    ``omega`` is a boolean ``(n, n)`` mask. Points are taken at ``spacing``
    (default: one cell) along the polyline; ``spacing=0`` uses the raw
    vertices.
    """
    if not d_crt > 0:
        raise ValueError("d_crt must be positive")
    v = np.asarray(vertices, dtype=float)
    if len(v) == 0:
        raise EmptyTrajectory("empty trajectory")
    if spacing is None:
        spacing = mapping.cell_size
    pts = v if spacing == 0 else resample(v, spacing)
    ii, jj = np.nonzero(np.asarray(omega))
    if ii.size == 0:
        return 1.0
    cs = mapping.cell_size
    centers = np.column_stack([(ii + 0.5) * cs, (jj + 0.5) * cs])
    near = np.zeros(len(pts), dtype=bool)
    for a in range(0, len(pts), 512):
        chunk = pts[a:a + 512]
        d2 = ((chunk[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        near[a:a + 512] = d2.min(axis=1) < d_crt * d_crt
    return 1.0 - near.sum() / len(pts)


def social_effort(lengths):
    """Mean elongation ``L_i - 1`` over the agent (first) and all pedestrians."""
    L = np.asarray(lengths, dtype=float)
    if L.size == 0:
        raise ValueError("need at least the agent's length")
    return float(np.mean(L - 1.0))


def _degenerate(ma, mb):
    return 1.0 if ma == mb else 0.0


def welch(a, b):
    """Two-sided Welch t-test; returns ``(t, dof, p)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least two values")
    ma, mb = a.mean(), b.mean()
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    se2 = va + vb
    if se2 == 0.0:
        return (0.0 if ma == mb else math.copysign(math.inf, ma - mb)), float("nan"), _degenerate(ma, mb)
    t = (ma - mb) / math.sqrt(se2)
    # normalised shares keep the Welch-Satterthwaite dof finite when variances underflow
    fa, fb = va / se2, vb / se2
    dof = 1.0 / (fa * fa / (a.size - 1) + fb * fb / (b.size - 1))
    p = 2.0 * stats.t.sf(abs(t), dof)
    return t, dof, float(min(max(p, 0.0), 1.0))


def pooled(a, b):
    """Two-sided Student t-test with pooled variance; returns ``(t, dof, p)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least two values")
    ma, mb = a.mean(), b.mean()
    dof = a.size + b.size - 2
    sp2 = ((a.size - 1) * a.var(ddof=1) + (b.size - 1) * b.var(ddof=1)) / dof
    if sp2 == 0.0:
        return (0.0 if ma == mb else math.copysign(math.inf, ma - mb)), float(dof), _degenerate(ma, mb)
    t = (ma - mb) / math.sqrt(sp2 * (1.0 / a.size + 1.0 / b.size))
    p = 2.0 * stats.t.sf(abs(t), dof)
    return t, float(dof), float(min(max(p, 0.0), 1.0))


def compare(samples_a, samples_b, method="welch"):
    """p-value of the two-sided test of equal means."""
    if method == "welch":
        return welch(samples_a, samples_b)[2]
    if method == "pooled":
        return pooled(samples_a, samples_b)[2]
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class MetricsRecord:
    L: float
    S: float
    E: float
    d_crt: float
    M: int


def evaluate(result, d_crt=0.3):
    """Metrics of a completed simulation; raises IncompleteRun otherwise."""
    if not result.completed:
        raise IncompleteRun(result.cause or "run did not complete")
    sc = result.scenario
    L = trajectory_length(result.agent, sc.agent_start, sc.target, sc.nav_tolerance)
    S = trajectory_safety(result.agent, result.cmap.omega, d_crt, sc.mapping)
    lengths = [L] + [result.ped_lengths[p.id] for p in sc.pedestrians]
    return MetricsRecord(L, S, social_effort(lengths), d_crt, len(sc.pedestrians))


MEASURES = ("L", "S", "E")


@dataclass
class EnsembleStats:
    samples: dict = field(default_factory=dict)    # (measure, mode) -> array

    @classmethod
    def from_records(cls, records_by_mode):
        out = cls()
        for mode, recs in records_by_mode.items():
            for name in MEASURES:
                out.samples[(name, mode)] = np.array([getattr(r, name) for r in recs])
        return out

    def modes(self):
        return sorted({m for _, m in self.samples})

    def summary(self):
        """Rows ``(measure, mode, mean, std, n)``; std uses ``ddof = 1``."""
        rows = []
        for name in MEASURES:
            for mode in self.modes():
                x = self.samples.get((name, mode), np.array([]))
                sd = float(x.std(ddof=1)) if x.size > 1 else float("nan")
                rows.append((name, mode, float(x.mean()) if x.size else float("nan"), sd, int(x.size)))
        return rows

    def p_values(self, method="welch"):
        modes = self.modes()
        if len(modes) != 2:
            return {}
        out = {}
        for name in MEASURES:
            a, b = self.samples[(name, modes[0])], self.samples[(name, modes[1])]
            out[name] = compare(a, b, method) if a.size >= 2 and b.size >= 2 else float("nan")
        return out

    def mean(self, measure, mode):
        return float(np.mean(self.samples[(measure, mode)]))
