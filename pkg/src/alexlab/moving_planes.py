"""Moving planes along a geodesic, the critical hyperplane and the
one-direction symmetry defects.

For a unit direction ``omega`` at a base point ``b`` the isometry
``g = normalize_to_standard(b, omega)`` sends the geodesic through ``b`` in
direction ``omega`` to the vertical axis, parametrized as ``e^s e_n``.  The
hyperplanes orthogonal to it are the half-spheres ``|x| = e^s``, the level
of a point is ``log|g(x)|`` and the reflection in the level-``s`` plane is
``x -> e^{2s} x / |x|^2``.  All caps are handled in these coordinates and
mapped back.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from . import hyperbolic as hyp
from .surfaces import StarSurface, refine_extremum


# relative tolerance of the containment test; the bisection bias is about
# half of it, so it must stay well below the level tolerance
CONTAINMENT_TOL = 1e-11
DEFAULT_TOL_S = 1e-9


class EngineError(RuntimeError):
    """Numerical failure of the engine; carries diagnostics."""

    def __init__(self, msg, **info):
        super().__init__(msg)
        self.info = info


@dataclass(frozen=True)
class PlaneFamily:
    base: np.ndarray
    direction: np.ndarray
    conj: hyp.Isometry
    conj_inv: hyp.Isometry

    def point(self, s):
        s = np.asarray(s, dtype=float)
        x = np.zeros(s.shape + self.base.shape)
        x[..., -1] = np.exp(s)
        return self.conj_inv(x)

    def tangent(self, s):
        """Unit velocity of the geodesic at level ``s``."""
        s = np.asarray(s, dtype=float)
        x = np.zeros(s.shape + self.base.shape)
        x[..., -1] = np.exp(s)
        v = np.zeros_like(x)
        v[..., -1] = np.exp(s)
        return self.conj_inv.push(x, v)

    def plane(self, s) -> hyp.Hyperplane:
        n = self.base.shape[-1]
        return hyp.Hyperplane.half_sphere(np.zeros(n), float(np.exp(s))).transformed(self.conj_inv)

    def side(self, x):
        X = self.conj(np.asarray(x, dtype=float))
        return np.log(np.linalg.norm(X, axis=-1))

    def reflect(self, s, x):
        X = self.conj(np.asarray(x, dtype=float))
        r2 = np.sum(X * X, axis=-1, keepdims=True)
        return self.conj_inv(np.exp(2.0 * s) * X / r2)

    def reflect_push(self, s, x, v):
        return self.plane(s).push(x, v)


def plane_family(omega, b) -> PlaneFamily:
    """Family of hyperplanes orthogonal to the geodesic through ``b`` with
    initial velocity ``omega``; ``omega`` is normalized."""
    b = hyp.check_points(b, "base")
    omega = np.asarray(omega, dtype=float)
    L = float(hyp.norm(b, omega))
    if not L > 1e-14:
        raise ValueError("zero direction")
    g = hyp.normalize_to_standard(b, omega / L)
    return PlaneFamily(b * 1.0, omega / L, g, g.inverse())


def side_coordinate(F: PlaneFamily, p):
    return F.side(p)


@dataclass(frozen=True)
class Containment:
    contained: bool
    margin: float
    empty: bool
    count: int


def _scale(S):
    return max(1.0, S.r0)


def cap_contained(S: StarSurface, F: PlaneFamily, s, tol=None, points=None, levels=None) -> Containment:
    """Is the reflection of the cap ``{level >= s}`` inside the closed body?

    ``margin`` is the minimum depth of the reflected cap samples.
    """
    if tol is None:
        tol = CONTAINMENT_TOL * _scale(S)
    if points is None:
        points = S.samples.points
    if levels is None:
        levels = F.side(points)
    cap = points[levels >= s]
    if len(cap) == 0:
        return Containment(True, np.inf, True, 0)
    m = float(np.min(S.depth(F.reflect(s, cap))))
    return Containment(m >= -tol, m, False, len(cap))


@dataclass
class CriticalResult:
    family: PlaneFamily
    m: float
    p0: np.ndarray
    kind: str
    bracket: tuple
    profile_s: np.ndarray
    profile_margin: np.ndarray
    monotone: bool
    tol: float
    plane: hyp.Hyperplane = field(init=False)

    def __post_init__(self):
        self.plane = self.family.plane(self.m)


def critical_value(S: StarSurface, F: PlaneFamily, tol_s=DEFAULT_TOL_S, tol=None, scan=64,
                   refine_p0=True) -> CriticalResult:
    """Smallest level whose reflected cap stays inside, by scan and bisection."""
    if tol is None:
        tol = CONTAINMENT_TOL * _scale(S)
    pts = S.samples.points
    lev = F.side(pts)
    smax, smin = float(lev.max()), float(lev.min())
    grid = np.linspace(smax, smin, scan + 1)
    margins = np.array([cap_contained(S, F, s, tol, pts, lev).margin for s in grid])
    ok = margins >= -tol
    if ok.all():
        raise EngineError("containment never fails over the scan", profile=(grid, margins))
    j = int(np.argmax(~ok))
    if j == 0:
        raise EngineError("containment fails at the top of the surface", profile=(grid, margins))
    monotone = bool(np.all(~ok[j:]))
    lo, hi = grid[j], grid[j - 1]
    while hi - lo > tol_s:
        mid = 0.5 * (lo + hi)
        if cap_contained(S, F, mid, tol, pts, lev).contained:
            hi = mid
        else:
            lo = mid
    m = 0.5 * (lo + hi)
    p0, kind = _tangency(S, F, m, pts, lev, refine_p0)
    return CriticalResult(F, m, p0, kind, (lo, hi), grid, margins, monotone, tol)


def _spacing(S):
    """Typical sample spacing on the surface (hyperbolic length)."""
    n = S.dim
    from .surfaces import area
    return float((area(S) / len(S.samples)) ** (1.0 / (n - 1)))


def _tangency(S, F, m, pts, lev, refine):
    """Reflected point of the cap closest to touching the surface."""
    idx = np.nonzero(lev >= m)[0]
    if len(idx) == 0:
        raise EngineError("empty cap at the critical level")
    refl = F.reflect(m, pts[idx])
    depth = S.depth(refl)
    dpl = lev[idx] - m
    h = _spacing(S)
    far = dpl > 0.5 * h
    if np.any(far):
        q = depth / np.maximum(dpl, 1e-300)
        q = np.where(far, q, np.inf)
        i = int(np.argmin(q))
    else:
        i = int(np.argmax(dpl))
    u0 = S.samples.params[idx[i]]
    p0 = refl[i]
    kind = "interior"
    if refine and abs(depth[i]) < 1e-3 * h and dpl[i] > 2 * h:
        def f(u):
            x = S.position(u)
            if F.side(x) < m:
                return np.inf
            return float(S.depth(F.reflect(m, x)))
        u, _ = refine_extremum(f, u0, 1.0)
        p0 = F.reflect(m, S.position(u))
    if hyp.Hyperplane.distance(F.plane(m), p0) < 2 * h or not np.any(far):
        kind = "boundary"
    return p0, kind


@dataclass
class Cap:
    side: str
    s: float
    indices: np.ndarray
    points: np.ndarray
    normals: np.ndarray

    def __len__(self):
        return len(self.indices)


def _components(params, subset, k=8):
    tree = cKDTree(params[subset])
    kk = min(k + 1, len(subset))
    d, nb = tree.query(params[subset], kk)
    hmed = np.median(d[:, 1:]) if kk > 1 else 0.0
    rows = np.repeat(np.arange(len(subset)), kk)
    cols = nb.ravel()
    keep = d.ravel() <= 3.0 * hmed
    A = coo_matrix((np.ones(keep.sum()), (rows[keep], cols[keep])), shape=(len(subset),) * 2)
    return connected_components(A, directed=False)[1]


def caps_sigma(S: StarSurface, crit: CriticalResult):
    """(Sigma, Sigma_hat): the component of the reflected + cap and of the
    - side containing the tangency point, by flood fill on a kNN graph of
    the parameter samples."""
    F, m = crit.family, crit.m
    sm = S.samples
    lev = F.side(sm.points)
    plus = np.nonzero(lev >= m)[0]
    minus = np.nonzero(lev <= m)[0]
    if len(plus) < 2 or len(minus) < 2:
        raise EngineError("cap too small for component extraction")
    p0 = crit.p0
    lab = _components(sm.params, plus)
    mirror = F.reflect(m, p0)
    i = int(np.argmin(hyp.dist(sm.points[plus], mirror)))
    sel = plus[lab == lab[i]]
    labm = _components(sm.params, minus)
    j = int(np.argmin(hyp.dist(sm.points[minus], p0)))
    selm = minus[labm == labm[j]]
    if len(sel) < 2 or len(selm) < 2:
        raise EngineError("tangency point isolated; increase the sample count")
    refl = F.reflect(m, sm.points[sel])
    rn = F.reflect_push(m, sm.points[sel], sm.normals[sel])
    sigma = Cap("+", m, sel, refl, rn)
    sigma_hat = Cap("-", m, selm, sm.points[selm], sm.normals[selm])
    return sigma, sigma_hat


def _first_exit(S, p, d, horizon, grid=48):
    """Smallest t > 0 with depth(exp_p(-t N)) = 0 along unit directions ``d``;
    NaN where no crossing occurs before ``horizon``."""
    n = len(p)
    d0 = S.depth(p)
    t_out = np.full(n, np.nan)
    at_start = d0 <= 0
    t_out[at_start] = 0.0
    ts = np.concatenate([[0.0], np.geomspace(1e-9, horizon, grid)])
    prev = np.zeros(n)
    lo = np.zeros(n)
    hi = np.full(n, np.nan)
    found = at_start.copy()
    for t in ts[1:]:
        x = hyp.exp_map(p, d * t)
        out = (S.depth(x) <= 0) & ~found
        lo[out] = prev[out]
        hi[out] = t
        found |= out
        prev = np.full(n, t)
    todo = found & ~at_start
    lo, hi = lo[todo], hi[todo]
    pp, dd = p[todo], d[todo]
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        ins = S.depth(hyp.exp_map(pp, dd * mid[:, None])) > 0
        lo = np.where(ins, mid, lo)
        hi = np.where(ins, hi, mid)
        if np.all(hi - lo <= 1e-15 * np.maximum(hi, 1e-300)):
            break
    t_out[todo] = 0.5 * (lo + hi)
    return t_out


@dataclass
class DefectResult:
    sup_defect: float
    neighborhood_defect: float
    distance_part: float
    normal_part: float
    flagged: int
    evaluated: int


def surface_foot(S: StarSurface, y, u0, iters=40):
    """Signed distance (positive inside) from ``y`` to the surface by
    tangential foot-point iteration started at parameters ``u0``."""
    u = np.array(u0, dtype=float)
    for _ in range(iters):
        p = S.position(u)
        N = S.inward_normal(u)
        v = hyp.log_map(p, y)
        a = hyp.inner(p, v, N)
        tang = v - a[:, None] * N
        u_new = S.parameter_of(hyp.exp_map(p, tang))
        if np.max(np.linalg.norm(u_new - u, axis=-1)) < 1e-14:
            u = u_new
            break
        u = u_new
    p = S.position(u)
    N = S.inward_normal(u)
    return hyp.inner(p, hyp.log_map(p, y), N), u


def symmetry_defect(S: StarSurface, crit: CriticalResult, caps=None) -> DefectResult:
    """Sup over Sigma of d(p, p_hat) + |N_p - tau(N_p_hat)|_p, where p_hat is
    the first point of the surface on the geodesic from p in direction -N_p,
    and the largest distance from the - side to Sigma union its mirror."""
    sigma, sigma_hat = caps_sigma(S, crit) if caps is None else caps
    F, m = crit.family, crit.m
    p = sigma.points
    N = sigma.normals
    Nn = N / hyp.norm(p, N)[:, None]
    horizon = 4.0 * 2.0 * S.max_radius()
    t = _first_exit(S, p, -Nn, horizon)
    ok = np.isfinite(t)
    ph = hyp.exp_map(p[ok], -Nn[ok] * t[ok, None])
    on_minus = F.side(ph) <= m + 1e-9
    good = np.nonzero(ok)[0][on_minus]
    ph = ph[on_minus]
    flagged = len(p) - len(good)
    if len(good) == 0:
        raise EngineError("no geodesic from Sigma reached the - side")
    Nh = S.normal_at(ph)
    tr = hyp.parallel_transport(ph, p[good], Nh)
    dpart = hyp.dist(p[good], ph)
    npart = hyp.norm(p[good], N[good] - tr)
    total = dpart + npart
    # neighborhood part: the mirror of a - side point against the + side
    mirror = F.reflect(m, sigma_hat.points)
    dist_sig, _ = surface_foot(S, mirror, S.parameter_of(mirror))
    nb = float(np.max(np.abs(dist_sig)))
    return DefectResult(float(total.max()), nb, float(dpart.max()), float(npart.max()),
                        flagged, len(good))


@dataclass
class DirectionResult:
    omega: np.ndarray
    crit: CriticalResult
    defects: DefectResult | None


def run_direction(S: StarSurface, omega, b, tol_s=DEFAULT_TOL_S, defects=True) -> DirectionResult:
    F = plane_family(omega, b)
    crit = critical_value(S, F, tol_s)
    d = symmetry_defect(S, crit) if defects else None
    return DirectionResult(F.direction, crit, d)
