"""Trajectory-modeling network: a three-neuron linear recurrent predictor.

Each spatial axis is handled by its own network whose state is the momentum
vector ``(position, velocity, acceleration)``. Training adapts the coupling
matrix online so that ``W @ xi(k-1) ~ xi(k)``; prediction iterates ``W``.
"""

from __future__ import annotations

import functools

import numpy as np

from .errors import LearningDiverged


def companion_matrix(h=1.0):
    """Exact one-step map of uniformly accelerated motion with step ``h``."""
    return np.array([[1.0, h, 0.5 * h * h],
                     [0.0, 1.0, h],
                     [0.0, 0.0, 1.0]])


def estimate_momenta(p_minus2, p_minus1, p0, h):
    """Momentum vectors for the x and y axes from three equally spaced samples.

    Second-order backward differences, exact for quadratic motion.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    a = np.asarray(p_minus2, dtype=float)
    b = np.asarray(p_minus1, dtype=float)
    c = np.asarray(p0, dtype=float)
    acc = (c - 2.0 * b + a) / (h * h)
    vel = (3.0 * c - 4.0 * b + a) / (2.0 * h)
    return np.array([c[0], vel[0], acc[0]]), np.array([c[1], vel[1], acc[1]])


def _as_trajectories(stream):
    arr = stream if isinstance(stream, np.ndarray) else None
    if arr is not None and arr.ndim == 2:
        return [arr]
    return [np.asarray(t, dtype=float) for t in stream]


def train(W0, stream, rate=1e-2, tolerance=1e-6, bound=1e6, epochs=1):
    """Apply the online coupling update over ``stream``.

    ``stream`` is either one ``(K, 3)`` sequence of momentum vectors or an
    iterable of such sequences; updates only pair consecutive samples of the
    same sequence. Pairs whose current input is at or below ``tolerance``
    (Euclidean norm) leave ``W`` untouched, as the network then runs
    autonomously instead of being driven by the input.
    """
    W = np.array(W0, dtype=float, copy=True)
    eye = np.eye(3)
    trajectories = _as_trajectories(stream)
    for _ in range(epochs):
        for traj in trajectories:
            for k in range(1, len(traj)):
                prev, cur = traj[k - 1], traj[k]
                if np.sqrt(cur @ cur) <= tolerance:
                    continue
                W = W @ (eye - rate * np.outer(prev, prev)) + rate * np.outer(cur, prev)
                if not np.all(np.isfinite(W)) or np.abs(W).max() > bound:
                    raise LearningDiverged(
                        f"coupling norm exceeded {bound:g}; learning rate {rate:g} too large")
    return W


def predict(W, xi0, K):
    """Positions ``(W^k xi0)[0]`` for ``k = 1..K``."""
    if K < 1:
        raise ValueError("K must be >= 1")
    W = np.asarray(W, dtype=float)
    eta = np.asarray(xi0, dtype=float).copy()
    out = np.empty(K)
    for k in range(K):
        eta = W @ eta
        out[k] = eta[0]
    return out


def predict_many(W, xi0, K):
    """Vectorised :func:`predict` for momenta stacked as ``(m, 3)``; returns ``(K + 1, m)``.

    Row 0 holds the initial positions.
    """
    W = np.asarray(W, dtype=float)
    eta = np.array(xi0, dtype=float, ndmin=2).T
    out = np.empty((K + 1, eta.shape[1]))
    out[0] = eta[0]
    for k in range(1, K + 1):
        eta = W @ eta
        out[k] = eta[0]
    return out


def quadratic_corpus(n_samples=200, length=4, h=1.0, seed=0):
    """Exact momentum sequences of random uniformly accelerated motions."""
    rng = np.random.default_rng(seed)
    Wc = companion_matrix(h)
    out = []
    for xi in rng.uniform(-1.0, 1.0, size=(n_samples, 3)):
        seq = np.empty((length, 3))
        seq[0] = xi
        for k in range(1, length):
            seq[k] = Wc @ seq[k - 1]
        out.append(seq)
    return out


@functools.lru_cache(maxsize=8)
def trained_coupling(h=1.0, rate=1e-2, samples=200, epochs=60, seed=0):
    """Coupling matrix trained from identity on the default corpus (cached, read-only)."""
    corpus = quadratic_corpus(samples, 4, h, seed)
    W = train(np.eye(3), corpus, rate=rate, epochs=epochs)
    W.setflags(write=False)
    return W


class TMNN:
    """Stateful network following the input/autonomous switching rule."""

    def __init__(self, W, tolerance=1e-6):
        self.W = np.asarray(W, dtype=float)
        self.tolerance = tolerance
        self.eta = np.zeros(3)

    def step(self, xi=None):
        xi = np.zeros(3) if xi is None else np.asarray(xi, dtype=float)
        if np.sqrt(xi @ xi) > self.tolerance:
            self.eta = xi.copy()
        else:
            self.eta = self.W @ self.eta
        return self.eta


def dump_weights(W, path):
    with open(path, "w", encoding="utf-8") as fh:
        for row in np.asarray(W):
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_weights(path):
    with open(path, encoding="utf-8") as fh:
        rows = [[float(v) for v in line.split()] for line in fh if line.strip()]
    W = np.array(rows)
    if W.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {W.shape}")
    return W
