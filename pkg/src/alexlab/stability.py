"""Approximate center, annulus radii, center of mass and epsilon sweeps."""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import least_squares

from . import hyperbolic as hyp
from .moving_planes import DEFAULT_TOL_S, DirectionResult, run_direction
from .surfaces import PerturbedSphereSpec, StarSurface, osc_H, perturbed_sphere, refine_extremum


# oscillations below this are roundoff on an exact sphere
OSC_FLOOR = 1e-12


class NonIntersectionError(ValueError):
    def __init__(self, msg, pair=None, osc=None):
        super().__init__(msg)
        self.pair = pair
        self.osc = osc


def planes_intersect(a: hyp.Hyperplane, b: hyp.Hyperplane) -> bool:
    if a.kind == "vertical" and b.kind == "vertical":
        cross = abs(abs(float(a.normal @ b.normal)) - 1.0) > 1e-14
        return cross or abs(a.offset - float(a.normal @ b.normal) * b.offset) < 1e-14
    if a.kind == "vertical" or b.kind == "vertical":
        v, s = (a, b) if a.kind == "vertical" else (b, a)
        return abs(float(v.normal @ s.center) - v.offset) < s.radius
    d = float(np.linalg.norm(a.center - b.center))
    return abs(a.radius - b.radius) < d < a.radius + b.radius


@dataclass
class CenterResult:
    O: np.ndarray
    residuals: np.ndarray


def approximate_center(planes, start, osc=None) -> CenterResult:
    """Point minimizing the sum of squared distances to the given planes."""
    planes = list(planes)
    for i in range(len(planes)):
        for j in range(i + 1, len(planes)):
            if not planes_intersect(planes[i], planes[j]):
                raise NonIntersectionError(f"critical planes {i} and {j} do not intersect",
                                           (i, j), osc)
    start = hyp.check_points(start)

    def point(z):
        x = z.copy()
        x[-1] = np.exp(z[-1])
        return x

    def res(z):
        x = point(z)
        return np.array([pl.signed_distance(x) for pl in planes])

    z0 = start * 1.0
    z0[-1] = np.log(start[-1])
    sol = least_squares(res, z0, xtol=1e-15, ftol=1e-15, gtol=1e-15, method="lm")
    O = point(sol.x)
    return CenterResult(O, np.abs(res(sol.x)))


def plane_distance(O, plane: hyp.Hyperplane) -> float:
    return float(plane.distance(O))


def radii(S: StarSurface, O, refine=True):
    """(r, R): smallest and largest distance from ``O`` to the surface."""
    O = hyp.check_points(O)
    sm = S.samples
    d = hyp.dist(O, sm.points)
    r, R = float(d.min()), float(d.max())
    if refine and not S.is_round:
        f = lambda u: float(hyp.dist(O, S.position(u)))
        _, lo = refine_extremum(f, sm.params[np.argmin(d)], 1.0)
        _, hi = refine_extremum(f, sm.params[np.argmax(d)], -1.0)
        r, R = min(r, lo), max(R, hi)
    return r, R


# ---------------------------------------------------------------------------
# center of mass
# ---------------------------------------------------------------------------

class SamplerError(RuntimeError):
    pass


def sample_body(S: StarSurface, count, rng, max_rounds=50):
    """Points uniformly distributed in hyperbolic volume inside ``S``.

    Directions are uniform; the distance ``t`` from the surface center has
    density proportional to sinh^(n-1) t on [0, max radius] (inverse CDF on
    a fine table), and points beyond the radial function are rejected.
    """
    n = S.dim
    tmax = S.max_radius() * (1.0 + 1e-9)
    grid = np.linspace(0.0, tmax, 4097)
    dens = np.sinh(grid) ** (n - 1)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]
    out = []
    have = 0
    for _ in range(max_rounds):
        m = max(2 * (count - have), 1024)
        u = rng.normal(size=(m, n))
        u /= np.linalg.norm(u, axis=-1, keepdims=True)
        t = np.interp(rng.uniform(size=m), cdf, grid)
        keep = t < S.radial(u)
        y = np.tanh(0.5 * t[keep])[:, None] * u[keep]
        out.append(S.from_ball(y))
        have += int(keep.sum())
        if have >= count:
            break
    else:
        raise SamplerError("rejection sampler starved")
    return np.concatenate(out)[:count]


@dataclass
class CenterOfMassResult:
    O_cm: np.ndarray
    grad_norm: float
    stderr: float
    iterations: int


def center_of_mass(points, seed_point, max_iter=100, tol_factor=0.1) -> CenterOfMassResult:
    """Minimize P(p) = mean d(p, a)^2 / 2 over the sample ``points``.

    The gradient is -mean log_p(a); steps ``p <- exp_p(-step grad)`` with
    step halving on increase.  Stops when |grad P| falls below
    ``tol_factor`` Monte Carlo standard errors, so the optimization error is
    small next to the statistical one.
    """
    a = hyp.check_points(points)
    p = hyp.check_points(seed_point) * 1.0
    if len(a) < 10:
        raise SamplerError("too few samples")

    def stats(p):
        L = hyp.log_map(p, a)
        g = -L.mean(axis=0)
        gn = float(hyp.norm(p, g))
        cov = np.cov((L / p[-1]).T)
        se = float(np.sqrt(np.trace(cov) / len(a)))
        P = 0.5 * float(np.mean(hyp.dist(p, a) ** 2))
        return g, gn, se, P

    g, gn, se, P = stats(p)
    for it in range(1, max_iter + 1):
        if gn < tol_factor * se:
            return CenterOfMassResult(p, gn, se, it - 1)
        step = 1.0
        while True:
            q = hyp.exp_map(p, -step * g)
            g2, gn2, se2, P2 = stats(q)
            if P2 <= P or step < 1e-6:
                break
            step *= 0.5
        p, g, gn, se, P = q, g2, gn2, se2, P2
    if gn < tol_factor * se:
        return CenterOfMassResult(p, gn, se, max_iter)
    raise RuntimeError("center of mass iteration did not converge")


# ---------------------------------------------------------------------------
# radial graph over a geodesic sphere
# ---------------------------------------------------------------------------

class NotAGraphError(ValueError):
    pass


@dataclass
class SphereGraph:
    params: np.ndarray
    values: np.ndarray
    sup: float
    lipschitz: float


def sphere_graph(S: StarSurface, O, r, count=2000, k=6) -> SphereGraph:
    """Psi(u) = t*(u) - r where t*(u) is the distance from ``O`` to the
    surface along the geodesic ray from ``O`` in direction ``u``."""
    from scipy.spatial import cKDTree
    from .surfaces import parameter_samples

    O = hyp.check_points(O)
    n = S.dim
    u = parameter_samples(count, n)
    d = u * O[-1]
    horizon = 2.0 * (S.max_radius() + float(hyp.dist(O, S.center))) + 1.0
    ts = np.linspace(0.0, horizon, 257)[1:]
    inside = np.stack([S.depth(hyp.exp_map(O, d * t)) > 0 for t in ts])
    if not np.all(S.depth(O) > 0):
        raise NotAGraphError("center outside the body")
    if np.any(np.sum(inside[1:] != inside[:-1], axis=0) > 1) or np.any(inside[-1]):
        raise NotAGraphError("a ray from the center meets the surface more than once")
    first = np.argmax(~inside, axis=0)
    lo = np.where(first > 0, ts[np.maximum(first - 1, 0)], 0.0)
    hi = ts[first]
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        ins = S.depth(hyp.exp_map(O, d * mid[:, None])) > 0
        lo = np.where(ins, mid, lo)
        hi = np.where(ins, hi, mid)
    psi = 0.5 * (lo + hi) - r
    x = hyp.exp_map(O, d * r)
    dd, nb = cKDTree(u).query(u, k + 1)
    i = np.repeat(np.arange(count), k)
    j = nb[:, 1:].ravel()
    lip = float(np.max(np.abs(psi[i] - psi[j]) / hyp.dist(x[i], x[j])))
    return SphereGraph(u, psi, float(np.max(np.abs(psi))), lip)


# ---------------------------------------------------------------------------
# full analysis
# ---------------------------------------------------------------------------

@dataclass
class DirectionRecord:
    index: int
    omega: np.ndarray
    m: float
    kind: str
    plane_dist: float
    sup_defect: float
    neighborhood_defect: float
    margin_min: float
    flagged: int


@dataclass
class StabilityReport:
    eps: float
    osc_H: float
    O: np.ndarray
    r: float
    R: float
    center_residuals: np.ndarray
    directions: list = field(default_factory=list)
    runtime: float = 0.0

    @property
    def gap(self):
        return self.R - self.r

    @property
    def C_emp(self):
        """gap / osc(H); NaN when osc(H) is at roundoff level (0/0)."""
        return self.gap / self.osc_H if self.osc_H > OSC_FLOOR else float("nan")

    @property
    def max_plane_dist(self):
        return max((d.plane_dist for d in self.directions), default=0.0)

    @property
    def sup_defect(self):
        return max((d.sup_defect for d in self.directions), default=0.0)

    @property
    def neighborhood_defect(self):
        return max((d.neighborhood_defect for d in self.directions), default=0.0)


def _pmap(fun, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(fun, items))
    return [fun(x) for x in items]


def analyze(S: StarSurface, k=12, base=None, tol_s=DEFAULT_TOL_S, threads=1, defects=True,
            eps=0.0) -> StabilityReport:
    """Moving planes in the n coordinate directions (for the center) and in
    ``k`` quasi-uniform directions (for plane distances and defects)."""
    t0 = time.perf_counter()
    n = S.dim
    b = S.center if base is None else hyp.check_points(base)
    osc = osc_H(S)
    coord = [np.eye(n)[i] * b[-1] for i in range(n)]
    crit_coord = _pmap(lambda w: run_direction(S, w, b, tol_s, defects=False), coord, threads)
    start = hyp.exp_map(b, np.mean([hyp.log_map(b, c.crit.family.point(c.crit.m)) for c in crit_coord], axis=0))
    center = approximate_center([c.crit.plane for c in crit_coord], start, osc)
    O = center.O
    dirs = hyp.quasi_uniform_directions(k, n) * b[-1] if k > 0 else np.zeros((0, n))
    runs: list[DirectionResult] = _pmap(lambda w: run_direction(S, w, b, tol_s, defects=defects),
                                        list(dirs), threads)
    recs = []
    for i, rr in enumerate(runs):
        d = rr.defects
        recs.append(DirectionRecord(
            i, rr.omega, rr.crit.m, rr.crit.kind, plane_distance(O, rr.crit.plane),
            d.sup_defect if d else float("nan"), d.neighborhood_defect if d else float("nan"),
            float(np.min(rr.crit.profile_margin)), d.flagged if d else 0))
    r, R = radii(S, O)
    return StabilityReport(eps, osc, O, r, R, center.residuals, recs, time.perf_counter() - t0)


def loglog_slope(osc, gap):
    osc = np.asarray(osc, float)
    gap = np.asarray(gap, float)
    ok = (osc > OSC_FLOOR) & (gap > 0)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(osc[ok]), np.log(gap[ok]), 1)[0])


def run_sweep(template: PerturbedSphereSpec, eps_grid, k=12, n_samples=4000, tol_s=DEFAULT_TOL_S,
              threads=1, defects=True, progress=None):
    """One report per amplitude; returns (reports, slopes) where ``slopes[i]``
    is the log-log slope of gap against osc(H) over rows 0..i."""
    eps_grid = [float(e) for e in eps_grid]
    if not eps_grid:
        raise ValueError("empty amplitude grid")
    if any(e < 0 for e in eps_grid) or (any(e == 0 for e in eps_grid) and len(set(eps_grid)) > 1):
        raise ValueError("amplitude grid must be strictly positive or exactly {0}")
    if any(b >= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise ValueError("amplitude grid must be decreasing")
    if k < template.center.shape[-1] and k != 0:
        raise ValueError("need at least n directions")
    reports = []
    for e in eps_grid:
        S = perturbed_sphere(replace(template, eps=e), n_samples=n_samples)
        rep = analyze(S, k, tol_s=tol_s, threads=threads, defects=defects, eps=e)
        reports.append(rep)
        if progress:
            progress(rep)
    slopes = [loglog_slope([r.osc_H for r in reports[:i + 1]], [r.gap for r in reports[:i + 1]])
              for i in range(len(reports))]
    return reports, slopes
