"""Closed star-shaped test hypersurfaces and their curvature.

A surface is described about a center ``c`` by a hyperbolic radial function
``r(u) = r0 + eps * f(F^T u)`` over unit directions ``u``.  Geometry is
evaluated in the ball model centered at ``c`` where the surface is the
Euclidean radial graph ``tanh(r(u)/2) u``; hyperbolic principal curvatures
follow from the conformal change of metric.  Finite-difference routes
(graph charts, ambient Euclidean curvature) are kept as independent checks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import gamma, pi
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from . import hyperbolic as hyp


# ---------------------------------------------------------------------------
# perturbation profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Profile:
    """Polynomial ``f(z) = z^T A z + T[z, z, z]`` restricted to the sphere."""

    quad: np.ndarray
    cubic: np.ndarray | None = None
    name: str = "custom"

    @property
    def dim(self):
        return self.quad.shape[0]

    def value(self, z):
        out = np.einsum("...i,ij,...j->...", z, self.quad, z)
        if self.cubic is not None:
            out = out + np.einsum("...i,...j,...k,ijk->...", z, z, z, self.cubic)
        return out

    def grad(self, z):
        out = 2.0 * z @ self.quad
        if self.cubic is not None:
            out = out + 3.0 * np.einsum("...j,...k,ijk->...i", z, z, self.cubic)
        return out

    def hess(self, z):
        out = np.broadcast_to(2.0 * self.quad, z.shape + (z.shape[-1],)).copy()
        if self.cubic is not None:
            out = out + 6.0 * np.einsum("...k,ijk->...ij", z, self.cubic)
        return out


def _sym_cubic(n, terms):
    T = np.zeros((n, n, n))
    for (i, j, k), c in terms:
        idx = {(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)}
        for t in idx:
            T[t] += c / len(idx)
    return T


PROFILE_NAMES = ("none", "zonal", "saddle", "mixed")


def make_profile(name: str, n: int) -> Profile | None:
    """Built-in perturbation profiles.

    ``zonal``: (3 z_1^2 - |z|^2) / 2.  ``saddle``: z_1 z_2.  ``mixed``: a
    combination of degree-2 and degree-3 harmonics with no symmetry plane
    through the coordinate axes.  ``none``: the round sphere.
    """
    if name == "none":
        return None
    a, b, c = 0, 1 % n, n - 1
    zonal = -0.5 * np.eye(n)
    zonal[a, a] += 1.5
    saddle = np.zeros((n, n))
    saddle[a, b] = saddle[b, a] = 0.5
    if name == "zonal":
        return Profile(zonal, None, name)
    if name == "saddle":
        return Profile(saddle, None, name)
    if name == "mixed":
        quad = 0.6 * zonal + 0.8 * saddle
        if n >= 3:
            quad[b, c] = quad[c, b] = 0.25
        # z_c^3 - 3 z_c z_a^2 is harmonic
        cubic = 0.5 * _sym_cubic(n, [((c, c, c), 1.0), ((c, a, a), -3.0)])
        return Profile(quad, cubic, name)
    raise ValueError(f"unknown profile {name!r}")


# ---------------------------------------------------------------------------
# sampling of the parameter sphere
# ---------------------------------------------------------------------------

def sphere_area(n):
    """Area of the unit sphere S^{n-1} in R^n."""
    return 2.0 * pi ** (n / 2) / gamma(n / 2)


def parameter_samples(count, n):
    return hyp.quasi_uniform_directions(count, n)


@dataclass(frozen=True)
class SampleSet:
    params: np.ndarray
    points: np.ndarray
    normals: np.ndarray
    kappas: np.ndarray
    H: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.params)


# ---------------------------------------------------------------------------
# ball chart about the center
# ---------------------------------------------------------------------------

def _ball_to_half(y):
    z = np.array(y, dtype=float)
    z[..., -1] = 1.0 - z[..., -1]
    out = 2.0 * z / np.sum(z * z, axis=-1, keepdims=True)
    out[..., -1] -= 1.0
    return out


def _half_to_ball(x):
    z = np.array(x, dtype=float)
    z[..., -1] += 1.0
    z = 2.0 * z / np.sum(z * z, axis=-1, keepdims=True)
    z[..., -1] = 1.0 - z[..., -1]
    return z


def _householder_basis(nrm):
    """Orthonormal bases (..., n, n-1) of the complements of unit ``nrm``."""
    n = nrm.shape[-1]
    en = hyp.basis(n, -1)
    s = np.where(nrm[..., -1:] >= 0, 1.0, -1.0)
    w = nrm + s * en
    w = w / np.linalg.norm(w, axis=-1, keepdims=True)
    Hm = np.eye(n) - 2.0 * w[..., :, None] * w[..., None, :]
    return Hm[..., :, :-1]


@dataclass(frozen=True)
class StarSurface:
    """Closed hypersurface star-shaped about ``center``.

    ``radial(u) = r0 + eps * profile(frame^T u)``; ``eps = 0`` (or no
    profile) is the geodesic sphere of radius ``r0``.
    """

    center: np.ndarray
    r0: float
    profile: Profile | None = None
    eps: float = 0.0
    frame: np.ndarray | None = None
    n_samples: int = 4000
    name: str = "sphere"

    def __post_init__(self):
        c = hyp.check_points(self.center, "center")
        object.__setattr__(self, "center", c * 1.0)
        if self.frame is None:
            object.__setattr__(self, "frame", np.eye(c.shape[-1]))
        if not self.r0 > 0:
            raise ValueError("radius must be positive")
        if self.eps < 0:
            raise ValueError("amplitude must be nonnegative")
        u = parameter_samples(2000, self.dim)
        if np.min(self.radial(u)) <= 0.05 * self.r0:
            raise ValueError("perturbation too large: radial function not bounded away from 0")

    @property
    def dim(self):
        return self.center.shape[-1]

    @property
    def is_round(self):
        return self.profile is None or self.eps == 0.0

    # -- radial function ---------------------------------------------------
    def radial(self, u):
        u = np.asarray(u, dtype=float)
        if self.is_round:
            return np.full(u.shape[:-1], self.r0)
        return self.r0 + self.eps * self.profile.value(u @ self.frame)

    def _radial_derivs(self, u):
        """r, grad r and Hess r of the polynomial extension at ``u``."""
        r = self.radial(u)
        n = self.dim
        if self.is_round:
            return r, np.zeros(u.shape), np.zeros(u.shape + (n,))
        z = u @ self.frame
        g = self.eps * self.profile.grad(z) @ self.frame.T
        Hm = self.eps * np.einsum("ia,...ab,jb->...ij", self.frame, self.profile.hess(z), self.frame)
        return r, g, Hm

    # -- charts ------------------------------------------------------------
    def from_ball(self, y):
        x = _ball_to_half(y)
        c = self.center
        out = x * c[-1]
        out[..., :-1] += c[:-1]
        return out

    def to_ball(self, x):
        c = self.center
        z = (np.asarray(x, float) - c) / c[-1]
        z[..., -1] = np.asarray(x, float)[..., -1] / c[-1]
        return _half_to_ball(z)

    def ball_push(self, y, v):
        """Differential of the ball chart at ``y`` applied to ``v``."""
        z = np.array(y, dtype=float)
        z[..., -1] = 1.0 - z[..., -1]
        w = np.array(v, dtype=float)
        w[..., -1] = -w[..., -1]
        r2 = np.sum(z * z, axis=-1, keepdims=True)
        out = 2.0 / r2 * (w - 2.0 * z * np.sum(z * w, axis=-1, keepdims=True) / r2)
        return out * self.center[-1]

    # -- evaluators --------------------------------------------------------
    def position(self, u):
        u = np.asarray(u, dtype=float)
        return self.from_ball(np.tanh(0.5 * self.radial(u))[..., None] * u)

    def parameter_of(self, x):
        y = self.to_ball(x)
        s = np.linalg.norm(y, axis=-1, keepdims=True)
        en = hyp.basis(self.dim, -1)
        return np.where(s > 0, y / np.where(s > 0, s, 1.0), en)

    def depth(self, x):
        """Signed depth ``r(u(x)) - d(c, x)``: positive inside."""
        y = self.to_ball(hyp.check_points(x))
        s = np.linalg.norm(y, axis=-1)
        u = np.where((s > 0)[..., None], y / np.where(s > 0, s, 1.0)[..., None], hyp.basis(self.dim, -1))
        return self.radial(u) - 2.0 * np.arctanh(np.minimum(s, 1.0 - 1e-17))

    def inside(self, x, tol=0.0):
        return self.depth(x) > -tol

    def level(self, x):
        """Smooth defining function, negative inside, for finite differences."""
        y = self.to_ball(x)
        s = np.linalg.norm(y, axis=-1)
        u = y / s[..., None]
        return s - np.tanh(0.5 * self.radial(u))

    def _shape(self, u):
        """Ball point, ball unit normal (Euclidean), Euclidean and hyperbolic
        principal curvatures, and the spherical gradient of rho."""
        u = np.asarray(u, dtype=float)
        u = u / np.linalg.norm(u, axis=-1, keepdims=True)
        n = self.dim
        r, gr, Hr = self._radial_derivs(u)
        rho = np.tanh(0.5 * r)
        a = 0.5 * (1.0 - rho**2)
        b = -rho * a
        grho = a[..., None] * gr
        Hrho = a[..., None, None] * Hr + b[..., None, None] * gr[..., :, None] * gr[..., None, :]
        s = rho
        I = np.eye(n)
        P = I - u[..., :, None] * u[..., None, :]
        Du = P / s[..., None, None]
        gh = np.einsum("...ij,...j->...i", Du, grho)
        gu = np.sum(grho * u, axis=-1)
        Hh = np.einsum("...ia,...ab,...bj->...ij", Du, Hrho, Du)
        Hh = Hh + (
            -gu[..., None, None] * I
            - u[..., :, None] * grho[..., None, :]
            - grho[..., :, None] * u[..., None, :]
            + 3.0 * gu[..., None, None] * u[..., :, None] * u[..., None, :]
        ) / (s**2)[..., None, None]
        gG = u - gh
        HG = P / s[..., None, None] - Hh
        ng = np.linalg.norm(gG, axis=-1)
        nin = -gG / ng[..., None]
        E = _householder_basis(nin)
        K = np.einsum("...ai,...ab,...bj->...ij", E, HG, E) / ng[..., None, None]
        kE = np.linalg.eigvalsh(K)
        y = rho[..., None] * u
        kH = a[..., None] * kE - np.sum(y * nin, axis=-1)[..., None]
        return y, nin, kE, kH, np.einsum("...ij,...j->...i", P, grho)

    def principal_curvatures(self, u):
        return self._shape(u)[3]

    def mean_curvature_at(self, u):
        return np.mean(self.principal_curvatures(u), axis=-1)

    def inward_normal(self, u):
        """Unit (hyperbolic) inward normal at ``position(u)``."""
        y, nin, *_ = self._shape(u)
        Nb = nin * (0.5 * (1.0 - np.sum(y * y, axis=-1)))[..., None]
        return self.ball_push(y, Nb)

    def normal_at(self, x):
        return self.inward_normal(self.parameter_of(x))

    def area_density(self, u):
        """Hyperbolic area element relative to the unit-sphere measure."""
        y, _, _, _, gs = self._shape(u)
        rho = np.linalg.norm(y, axis=-1)
        n = self.dim
        dE = rho ** (n - 2) * np.sqrt(rho**2 + np.sum(gs * gs, axis=-1))
        return (2.0 / (1.0 - rho**2)) ** (n - 1) * dE

    def max_radius(self):
        return float(np.max(self.radial(parameter_samples(4000, self.dim))))

    def min_radius(self):
        return float(np.min(self.radial(parameter_samples(4000, self.dim))))

    # -- samples -----------------------------------------------------------
    @cached_property
    def samples(self) -> SampleSet:
        return self.sample(self.n_samples)

    def sample(self, count) -> SampleSet:
        u = parameter_samples(count, self.dim)
        y, nin, kE, kH, _ = self._shape(u)
        pts = self.from_ball(y)
        Nb = nin * (0.5 * (1.0 - np.sum(y * y, axis=-1)))[..., None]
        normals = self.ball_push(y, Nb)
        w = sphere_area(self.dim) / count * self.area_density(u)
        return SampleSet(u, pts, normals, kH, kH.mean(axis=-1), w)

    def transformed(self, iso: hyp.Isometry) -> "StarSurface":
        """Image of the surface under an isometry."""
        c = self.center
        c2 = iso(c)
        cols = iso.push(np.broadcast_to(c, (self.dim, self.dim)), c[-1] * np.eye(self.dim))
        O = cols.T / c2[-1]
        return StarSurface(c2, self.r0, self.profile, self.eps, O @ self.frame, self.n_samples, self.name)

    def with_samples(self, count) -> "StarSurface":
        return StarSurface(self.center, self.r0, self.profile, self.eps, self.frame, count, self.name)


@dataclass(frozen=True)
class PerturbedSphereSpec:
    center: np.ndarray
    r0: float
    profile: Profile | None
    eps: float
    frame: np.ndarray | None = None


def sphere(c, r, n_samples=4000) -> StarSurface:
    """Geodesic sphere of radius ``r`` about ``c``."""
    if not r > 0:
        raise ValueError("radius must be positive")
    return StarSurface(np.asarray(c, float), float(r), None, 0.0, None, n_samples, "sphere")


def perturbed_sphere(spec: PerturbedSphereSpec, n_samples=4000) -> StarSurface:
    if spec.profile is not None and spec.profile.dim != np.asarray(spec.center).shape[-1]:
        raise ValueError("profile dimension does not match the center")
    return StarSurface(np.asarray(spec.center, float), float(spec.r0), spec.profile, float(spec.eps),
                       spec.frame, n_samples, "perturbed")


def euclidean_sphere_of(c, r):
    """(Euclidean center, Euclidean radius) of the geodesic sphere B_r(c)."""
    c = hyp.check_points(c)
    center = c * 1.0
    center[-1] = c[-1] * np.cosh(r)
    return center, c[-1] * np.sinh(r)


# ---------------------------------------------------------------------------
# graph charts and mean curvature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GraphPatch:
    """Graph ``x -> (x, v(x))`` over the ball of given radius in the ideal plane."""

    value: Callable
    grad: Callable
    hess: Callable
    radius: float


def mean_curvature_graph(patch: GraphPatch, x) -> float:
    """Hyperbolic mean curvature of a graph w.r.t. the upward normal.

    H = v/(n-1) div(grad v / W) + 1/W with W = sqrt(1 + |grad v|^2).
    """
    x = np.asarray(x, dtype=float)
    if np.linalg.norm(x) >= patch.radius:
        raise ValueError("chart point outside the patch")
    v = patch.value(x)
    g = np.asarray(patch.grad(x), dtype=float)
    Hm = np.asarray(patch.hess(x), dtype=float)
    m = x.shape[-1]
    W = np.sqrt(1.0 + g @ g)
    div = np.trace(Hm) / W - g @ Hm @ g / W**3
    return float(v / m * div + 1.0 / W)


def horosphere_patch(n, height=1.0, radius=1.0):
    m = n - 1
    return GraphPatch(lambda x: height, lambda x: np.zeros(m), lambda x: np.zeros((m, m)), radius)


def hyperplane_patch(n, R):
    """Upper half-sphere of radius ``R`` about the origin (a hyperplane)."""
    m = n - 1

    def value(x):
        return np.sqrt(R * R - x @ x)

    def grad(x):
        return -x / np.sqrt(R * R - x @ x)

    def hess(x):
        s = R * R - x @ x
        return -np.eye(m) / np.sqrt(s) - np.outer(x, x) / s**1.5

    return GraphPatch(value, grad, hess, R)


def sphere_cap_patch(n, r):
    """Lower cap of the geodesic sphere of radius ``r`` about cosh(r) e_n."""
    m = n - 1
    C, S = np.cosh(r), np.sinh(r)

    def value(x):
        return C - np.sqrt(S * S - x @ x)

    def grad(x):
        return x / np.sqrt(S * S - x @ x)

    def hess(x):
        s = S * S - x @ x
        return np.eye(m) / np.sqrt(s) + np.outer(x, x) / s**1.5

    return GraphPatch(value, grad, hess, S)


def rho0(rho):
    """Euclidean radius of the ball of hyperbolic radius rho touching e_n from below."""
    return np.exp(-rho) * np.sinh(rho)


def rho1(rho):
    r0 = rho0(rho)
    return (1.0 - r0) * r0


def _bisect_vec(fun, lo, hi, iters=80):
    """Vectorized bisection for fun(lo) > 0 > fun(hi) elementwise."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        pos = fun(mid) > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
        if np.all(hi - lo <= 4e-16 * np.maximum(1.0, np.abs(hi))):
            break
    return 0.5 * (lo + hi)


def _fd_stencil(f, m, h):
    """Gradient and Hessian of ``f: (k, m) -> (k,)`` at 0 by Richardson-
    extrapolated central differences."""
    def raw(h):
        E = np.eye(m) * h
        pts = [np.zeros(m)]
        for i in range(m):
            pts += [E[i], -E[i]]
        for i in range(m):
            for j in range(i + 1, m):
                pts += [E[i] + E[j], E[i] - E[j], -E[i] + E[j], -E[i] - E[j]]
        vals = f(np.array(pts))
        f0 = vals[0]
        g = np.empty(m)
        Hm = np.empty((m, m))
        k = 1
        for i in range(m):
            fp, fm = vals[k], vals[k + 1]
            k += 2
            g[i] = (fp - fm) / (2 * h)
            Hm[i, i] = (fp - 2 * f0 + fm) / h**2
        for i in range(m):
            for j in range(i + 1, m):
                a, b, c, d = vals[k:k + 4]
                k += 4
                Hm[i, j] = Hm[j, i] = (a - b - c + d) / (4 * h * h)
        return f0, g, Hm

    f0, g1, H1 = raw(h)
    _, g2, H2 = raw(2 * h)
    return f0, (4 * g1 - g2) / 3, (4 * H1 - H2) / 3


def local_graph(S: StarSurface, u, iso: hyp.Isometry | None = None, bracket=None):
    """Chart function of the normalized surface near e_n.

    Applies ``iso`` (default: :func:`normalize_to_standard` at the surface
    point of parameter ``u``) and returns ``v`` with ``(x, v(x))`` on the
    image surface, computed by vectorized root finding along vertical lines.
    """
    p = S.position(u)
    if iso is None:
        iso = hyp.normalize_to_standard(p, S.inward_normal(u))
    inv = iso.inverse()
    if bracket is None:
        bracket = 0.25 * (1.0 - np.exp(-2.0 * S.min_radius()))
    n = S.dim

    def v(x):
        x = np.atleast_2d(x)

        def fun(t):
            pts = np.concatenate([x, t[:, None]], axis=1)
            return S.level(inv(pts))

        lo = np.full(len(x), 1.0 - bracket)
        hi = np.full(len(x), 1.0 + bracket)
        return _bisect_vec(fun, lo, hi)

    return v, iso


def mean_curvature(S: StarSurface, p, method="graph", step=1e-2) -> float:
    """Hyperbolic mean curvature of ``S`` at the surface point ``p``.

    ``graph``: normalize p to e_n with horizontal tangent plane, fit the
    chart by finite differences and apply the graph formula.  ``ambient``:
    Euclidean mean curvature of a defining function in half-space
    coordinates, combined as H = nu_n + p_n H_E.  ``analytic``: closed form
    through the ball chart.  ``step`` is relative to rho_1 of the local
    curvature radius.
    """
    p = hyp.check_points(p)
    if abs(S.depth(p)) > 1e-8 * max(1.0, S.r0):
        raise ValueError("point is not on the surface")
    u = S.parameter_of(p)
    if method == "analytic":
        return float(S.mean_curvature_at(u))
    kap = S.principal_curvatures(u)
    kmax = float(np.max(np.abs(kap)))
    rho = np.arctanh(1.0 / kmax) if kmax > 1.0 else 1.0
    h = step * rho1(min(rho, 1.0))
    n = S.dim
    if method == "graph":
        v, _ = local_graph(S, u)
        f0, g, Hm = _fd_stencil(v, n - 1, h)
        patch = GraphPatch(lambda x: f0, lambda x: g, lambda x: Hm, np.inf)
        return mean_curvature_graph(patch, np.zeros(n - 1))
    if method == "ambient":
        x0 = S.position(u)
        hh = h * x0[-1]
        F = lambda d: S.level(x0 + d)

        def grad_hess(h):
            E = np.eye(n) * h
            f0 = F(np.zeros(n))
            g = np.empty(n)
            Hm = np.empty((n, n))
            for i in range(n):
                fp, fm = F(E[i]), F(-E[i])
                g[i] = (fp - fm) / (2 * h)
                Hm[i, i] = (fp - 2 * f0 + fm) / h**2
                for j in range(i + 1, n):
                    Hm[i, j] = Hm[j, i] = (F(E[i] + E[j]) - F(E[i] - E[j]) - F(E[j] - E[i])
                                           + F(-E[i] - E[j])) / (4 * h * h)
            return g, Hm

        g1, H1 = grad_hess(hh)
        g2, H2 = grad_hess(2 * hh)
        g = (4 * g1 - g2) / 3
        Hm = (4 * H1 - H2) / 3
        ng = np.linalg.norm(g)
        nu = -g / ng
        HE = (np.trace(Hm) - nu @ Hm @ nu) / ((n - 1) * ng)
        return float(nu[-1] + x0[-1] * HE)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# global quantities
# ---------------------------------------------------------------------------

def _sphere_local_coords(u0):
    """Tangent basis at u0 of the unit sphere."""
    nrm = u0 / np.linalg.norm(u0)
    return _householder_basis(nrm)


def refine_extremum(fun, u0, sign=1.0, scale=0.05):
    """Local minimum of ``sign*fun`` on the unit sphere near ``u0``.

    Returns the minimizer and the value of ``fun`` (not ``sign*fun``) there.
    """
    B = _sphere_local_coords(u0)

    def g(t):
        u = u0 + B @ t
        return sign * float(fun(u / np.linalg.norm(u)))

    res = minimize(g, np.zeros(B.shape[-1]), method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 2000})
    u = u0 + B @ res.x
    u = u / np.linalg.norm(u)
    return u, sign * res.fun


def osc_H(S: StarSurface, refine=True) -> float:
    """max H - min H over the surface."""
    sm = S.samples
    H = sm.H
    if len(H) == 0:
        raise ValueError("empty sample set")
    hmax, hmin = float(H.max()), float(H.min())
    if refine and not S.is_round:
        _, hi = refine_extremum(S.mean_curvature_at, sm.params[np.argmax(H)], -1.0)
        hmax = max(hi, hmax)
        _, lo = refine_extremum(S.mean_curvature_at, sm.params[np.argmin(H)], 1.0)
        hmin = min(lo, hmin)
    return hmax - hmin


def area(S: StarSurface) -> float:
    sm = S.samples
    if len(sm) == 0:
        raise ValueError("empty sample set")
    return float(np.sum(sm.weights))


def pairwise_max_dist(P, Q=None, chunk=2048):
    Q = P if Q is None else Q
    best = 0.0
    for i in range(0, len(P), chunk):
        d = hyp.dist(P[i:i + chunk, None, :], Q[None, :, :])
        best = max(best, float(d.max()))
    return best


def diameter(S: StarSurface) -> float:
    """Largest distance between sample points (a lower bound on the diameter)."""
    pts = S.samples.points
    if len(pts) == 0:
        raise ValueError("empty sample set")
    return pairwise_max_dist(pts)


def disc_area_constant(S: StarSurface, delta, centers=32, seed=0):
    """Fitted c with |B_r(z) cap S| >= c r^(n-1) for sampled z and r <= delta."""
    sm = S.samples
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(sm), size=min(centers, len(sm)), replace=False)
    k = S.dim - 1
    best = np.inf
    for i in idx:
        d = hyp.dist(sm.points[i], sm.points)
        for r in (0.25 * delta, 0.5 * delta, delta):
            best = min(best, float(np.sum(sm.weights[d < r])) / r**k)
    return best


def diameter_bound(S: StarSurface, delta):
    """delta * N_delta with N_delta = max(4, 2^k |S| / (c delta^k))."""
    k = S.dim - 1
    c = disc_area_constant(S, delta)
    N = max(4.0, 2.0**k * area(S) / (c * delta**k))
    return delta * N, c


@dataclass
class TouchingRadius:
    rho: float
    curvature_bound: float
    reach_estimate: float
    rho0: float
    rho1: float
    checked: int = 0


def touching_radius(S: StarSurface, checks=100, seed=0, rel_tol=1e-7) -> TouchingRadius:
    """Estimate of the uniform touching-ball radius.

    The curvature part is certified: a ball of radius rho has principal
    curvatures coth(rho), so rho <= arccoth(max kappa) and likewise for the
    exterior ball.  The global part is sampled: at ``checks`` random samples
    the interior and exterior tangent balls are shrunk until no sample lies
    inside them.
    """
    sm = S.samples
    if len(sm) == 0 or not np.all(np.isfinite(sm.kappas)):
        raise ValueError("degenerate curvature data")
    kmax = float(sm.kappas.max())
    kmin = float(sm.kappas.min())
    r_int = np.arctanh(1.0 / kmax) if kmax > 1.0 else np.inf
    r_ext = np.arctanh(-1.0 / kmin) if kmin < -1.0 else np.inf
    bound = min(r_int, r_ext, 4.0 * S.max_radius())
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(sm), size=min(checks, len(sm)), replace=False)
    reach = bound
    for i in idx:
        p, N = sm.points[i], sm.normals[i]
        for sgn in (1.0, -1.0):
            def ok(rho):
                c = hyp.exp_map(p, sgn * rho * N)
                return np.min(hyp.dist(c, sm.points)) >= rho * (1.0 - rel_tol) - 1e-12
            if ok(reach):
                continue
            lo, hi = 0.0, reach
            for _ in range(50):
                mid = 0.5 * (lo + hi)
                lo, hi = (mid, hi) if ok(mid) else (lo, mid)
            reach = lo
    rho = min(bound, reach)
    return TouchingRadius(rho, bound, reach, float(rho0(rho)), float(rho1(rho)), len(idx))


def two_ball_tangency(S: StarSurface, rho, idx, rel_tol=1e-7):
    """Fraction of the given samples at which both tangent balls of radius
    ``rho`` avoid all other samples."""
    sm = S.samples
    good = 0
    for i in idx:
        p, N = sm.points[i], sm.normals[i]
        fine = True
        for sgn in (1.0, -1.0):
            c = hyp.exp_map(p, sgn * rho * N)
            if np.min(hyp.dist(c, sm.points)) < rho * (1.0 - rel_tol) - 1e-12:
                fine = False
        good += fine
    return good / len(idx)
