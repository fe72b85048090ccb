"""Randomized residual suites for the geometry kernel."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import hyperbolic as hyp


@dataclass(frozen=True)
class SuiteResult:
    suite: str
    max_residual: float
    tolerance: float
    n_cases: int

    @property
    def violated(self):
        return not self.max_residual <= self.tolerance


def _rel(a, b):
    return np.abs(a - b) / (1.0 + np.abs(b))


def metric_axioms(rng, n=3, cases=2000):
    p, q, r = (hyp.random_points(rng, cases, n) for _ in range(3))
    dpq, dqp = hyp.dist(p, q), hyp.dist(q, p)
    sym = np.max(np.abs(dpq - dqp))
    tri = np.max(np.maximum(dpq - hyp.dist(p, r) - hyp.dist(r, q), 0.0) / (1.0 + dpq))
    ident = np.max(hyp.dist(p, p))
    pos = float(np.min(dpq)) >= 0.0
    return SuiteResult("metric_axioms", float(max(sym, tri, ident, 0.0 if pos else np.inf)), 1e-12, cases)


def isometry_invariance(rng, n=3, cases=2000):
    worst = 0.0
    per = 20
    for _ in range(cases // per):
        g = hyp.random_isometry(rng, n, k=int(rng.integers(1, 9)))
        p, q = hyp.random_points(rng, per, n), hyp.random_points(rng, per, n)
        worst = max(worst, float(np.max(_rel(hyp.dist(g(p), g(q)), hyp.dist(p, q)))))
    return SuiteResult("isometry_invariance", worst, 1e-10, cases)


def reflection_involution(rng, n=3, cases=2000):
    worst = 0.0
    per = 20
    for i in range(cases // per):
        c = hyp.random_points(rng, 1, n)[0]
        plane = hyp.Hyperplane.through(c, rng.normal(size=n))
        x = hyp.random_points(rng, per, n)
        back = plane.reflect(plane.reflect(x))
        worst = max(worst, float(np.max(hyp.dist(back, x))))
        # fixed points and distance preservation
        y = hyp.random_points(rng, per, n)
        worst = max(worst, float(np.max(_rel(hyp.dist(plane.reflect(x), plane.reflect(y)), hyp.dist(x, y)))))
    return SuiteResult("reflection_involution", worst, 1e-10, cases)


def model_round_trip(rng, n=3, cases=2000):
    x = hyp.random_points(rng, cases, n, spread=0.8)
    y = hyp.to_ball(x)
    a = float(np.max(hyp.dist(hyp.to_halfspace(y), x)))
    x2 = hyp.random_points(rng, cases, n, spread=0.8)
    b = float(np.max(_rel(hyp.dist_ball(y, hyp.to_ball(x2)), hyp.dist(x, x2))))
    return SuiteResult("model_round_trip", max(a, b), 1e-10, cases)


def exp_log_round_trip(rng, n=3, cases=2000):
    p = hyp.random_points(rng, cases, n)
    q = hyp.random_points(rng, cases, n)
    back = hyp.exp_map(p, hyp.log_map(p, q))
    d = hyp.dist(back, q)
    L = np.abs(hyp.norm(p, hyp.log_map(p, q)) - hyp.dist(p, q))
    return SuiteResult("exp_log_round_trip", float(max(d.max(), L.max())), 1e-9, cases)


def transport_configs(rng, n=3, cases=500):
    q = hyp.random_points(rng, cases, n)
    p = hyp.random_points(rng, cases, n)
    v = rng.normal(size=(cases, n)) * q[:, -1:]
    return q, p, v


def transport_oracle(rng, n=3, cases=500, steps=256):
    """Closed form against RK4 integration of the transport equation."""
    q, p, v = transport_configs(rng, n, cases)
    a = hyp.parallel_transport(q, p, v)
    b = hyp.parallel_transport_ode(q, p, v, steps=steps)
    return SuiteResult("transport_closed_vs_ode", float(np.max(hyp.norm(p, a - b))), 1e-6, cases)


def transport_frames(rng, n=3, cases=500):
    """Transported orthonormal frames stay orthonormal."""
    q, p, _ = transport_configs(rng, n, cases)
    worst = 0.0
    A = rng.normal(size=(cases, n, n))
    Qm, _ = np.linalg.qr(A)
    frames = np.swapaxes(Qm, -1, -2) * q[:, None, -1:]
    moved = hyp.parallel_transport(q[:, None, :], p[:, None, :], frames)
    G = np.einsum("kia,kja->kij", moved, moved) / p[:, -1, None, None] ** 2
    worst = float(np.max(np.abs(G - np.eye(n))))
    return SuiteResult("transport_frame_orthonormality", worst, 1e-8, cases)


def transport_worked_case():
    n = 3
    e2, e3 = hyp.basis(n, 1), hyp.basis(n, 2)
    out = hyp.parallel_transport(e2 + e3, e3, e2)
    return SuiteResult("transport_worked_case", float(np.max(np.abs(out - np.array([0.0, 0.6, 0.8])))), 1e-9, 1)


def core_suite(seed=0, n=3):
    rng = np.random.default_rng(seed)
    return [
        metric_axioms(rng, n),
        isometry_invariance(rng, n),
        reflection_involution(rng, n),
        model_round_trip(rng, n),
        exp_log_round_trip(rng, n),
        transport_oracle(rng, n),
        transport_frames(rng, n),
        transport_worked_case(),
    ]
