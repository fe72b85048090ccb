"""Curvature of plane sections of surfaces in H^3 and of their projections.

A transversal hyperplane ``pi`` cuts a surface ``U`` in a closed curve
``U'``.  Its curvature inside ``pi``, its geodesic curvature inside ``U`` and
the Euclidean curvature of its vertical projection ``U''`` onto the ideal
plane are bounded in terms of the principal curvatures of ``U``; the checks
here evaluate both sides of those bounds on sampled curves.

Curves are traced by root finding along the geodesic rays of ``pi`` issued
from the foot point of the surface center, so they are periodic functions
of the ray angle and are differentiated spectrally.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import hyperbolic as hyp
from .surfaces import StarSurface, make_profile, PerturbedSphereSpec, perturbed_sphere

BOUND_IDS = ("I", "I'", "III", "II")
DEFAULT_MARGIN = 0.05


class TransversalityError(ValueError):
    pass


class SectionError(ValueError):
    pass


@dataclass(frozen=True)
class SectionCurve:
    """Closed section curve sampled at equally spaced ray angles.

    ``tangent``, ``normal`` (N' inside the plane), ``surface_normal`` (N),
    ``plane_normal`` (omega) are unit vectors at ``points``; ``kappa`` is the
    curvature in the plane w.r.t. ``normal``; ``kvec`` is the covariant
    curvature vector; ``kappas`` the principal curvatures of the surface.
    """

    surface: StarSurface
    plane: hyp.Hyperplane
    theta: np.ndarray
    points: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    surface_normal: np.ndarray
    plane_normal: np.ndarray
    kvec: np.ndarray
    kappa: np.ndarray
    kappas: np.ndarray

    @property
    def margin(self):
        a = hyp.inner(self.points, self.plane_normal, self.surface_normal)
        return float(np.min(1.0 - a * a))

    def __len__(self):
        return len(self.theta)


@dataclass(frozen=True)
class BoundReport:
    bound_id: str
    worst_slack: float
    n_samples: int
    violated: bool
    max_residual: float = 0.0


def _spectral_derivs(x):
    M = x.shape[0]
    k = np.fft.fftfreq(M, 1.0 / M)
    X = np.fft.fft(x, axis=0)
    k1 = 1j * k
    if M % 2 == 0:
        k1[M // 2] = 0.0
    d1 = np.real(np.fft.ifft(k1[:, None] * X, axis=0))
    d2 = np.real(np.fft.ifft((-(k * k))[:, None] * X, axis=0))
    return d1, d2


def _covariant_accel(x, v, a):
    """D_t of the velocity for a curve in the half-space model."""
    xn = x[..., -1:]
    vv = np.sum(v * v, axis=-1, keepdims=True)
    out = a - 2.0 * v[..., -1:] * v / xn
    out[..., -1:] += vv / xn
    return out


def section(U: StarSurface, plane: hyp.Hyperplane, samples=256, margin=DEFAULT_MARGIN) -> SectionCurve:
    """Trace ``U ∩ plane`` (n = 3)."""
    if U.dim != 3:
        raise ValueError("sections are implemented for n = 3")
    z = plane.foot_point(U.center)
    if U.depth(z) <= 0:
        raise TransversalityError("plane does not cut the surface through its interior")
    omega = plane.unit_normal(z)
    iso = hyp.normalize_to_standard(z, omega)
    inv = iso.inverse()
    theta = 2 * np.pi * np.arange(samples) / samples
    dirs = np.stack([np.cos(theta), np.sin(theta), np.zeros(samples)], -1)
    en = hyp.basis(3, -1)

    def ray(t):
        return inv(hyp.exp_map(en, dirs * t[..., None]))

    horizon = float(hyp.dist(z, U.center)) + 2.0 * U.max_radius() + 1.0
    ts = np.linspace(0.0, horizon, 129)[1:]
    depth = np.stack([U.depth(ray(np.full(samples, t))) for t in ts], 0)
    neg = depth <= 0
    if not np.all(neg[-1]):
        raise SectionError("ray horizon too short")
    first = np.argmax(neg, axis=0)
    crossings = np.sum(neg[1:] != neg[:-1], axis=0)
    if np.any(crossings > 1):
        raise SectionError("section is not star-shaped about the foot point")
    lo = np.where(first > 0, ts[np.maximum(first - 1, 0)], 0.0)
    hi = ts[first]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        inside = U.depth(ray(mid)) > 0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
        if np.all(hi - lo < 1e-15 * hi):
            break
    pts = ray(0.5 * (lo + hi))
    return _build_curve(U, plane, theta, pts, margin)


def _build_curve(U, plane, theta, pts, margin):
    d1, d2 = _spectral_derivs(pts)
    speed = hyp.norm(pts, d1)
    T = d1 / speed[:, None]
    A = _covariant_accel(pts, d1, d2)
    A = A - hyp.inner(pts, A, T)[:, None] * T
    K = A / (speed**2)[:, None]
    u = U.parameter_of(pts)
    N = U.inward_normal(u)
    om = plane.unit_normal(pts)
    Np = np.cross(om, T)
    Np = Np * (pts[:, -1] / np.linalg.norm(Np, axis=-1))[:, None]
    Np = np.where((hyp.inner(pts, Np, N) < 0)[:, None], -Np, Np)
    kap = hyp.inner(pts, K, Np)
    curve = SectionCurve(U, plane, theta, pts, d1, d2, T, Np, N, om, K, kap, U.principal_curvatures(u))
    if curve.margin < margin:
        raise TransversalityError(f"transversality margin {curve.margin:.3g} below {margin}")
    return curve


def section_normal_residual(curve: SectionCurve) -> float:
    """Deviation of N' from the normalized projection of N onto the plane,
    plus its failure to be unit, tangent to the plane and normal to the curve."""
    q, N, om, Np = curve.points, curve.surface_normal, curve.plane_normal, curve.normal
    a = hyp.inner(q, N, om)
    proj = (N - a[:, None] * om) / np.sqrt(1.0 - a * a)[:, None]
    r = [
        np.max(hyp.norm(q, Np - proj)),
        np.max(np.abs(hyp.norm(q, Np) - 1.0)),
        np.max(np.abs(hyp.inner(q, Np, om))),
        np.max(np.abs(hyp.inner(q, Np, curve.tangent))),
    ]
    return float(max(r))


def _report(bound_id, slack, kappa, tol):
    scale = tol * (1.0 + np.abs(kappa))
    return BoundReport(bound_id, float(np.min(slack)), int(len(slack)), bool(np.any(slack < -scale)))


def check_section_bound(curve: SectionCurve, tol=1e-6):
    """Two-sided bounds kappa_1/b <= kappa' <= kappa_2/b with b = g(N, N')
    (bound I) and with b = sqrt(1 - g(omega, N)^2) (bound I')."""
    q = curve.points
    k1, k2 = curve.kappas[:, 0], curve.kappas[:, -1]
    kp = curve.kappa
    b = hyp.inner(q, curve.surface_normal, curve.normal)
    a = hyp.inner(q, curve.surface_normal, curve.plane_normal)
    bp = np.sqrt(1.0 - a * a)
    out = []
    for bid, den in (("I", b), ("I'", bp)):
        slack = np.minimum(kp - k1 / den, k2 / den - kp)
        out.append(_report(bid, slack, kp, tol))
    return out


def geodesic_curvature_in_surface(curve: SectionCurve, normal=None):
    """|part of the curvature vector tangent to U|."""
    q = curve.points
    N = curve.surface_normal if normal is None else normal
    K = curve.kvec
    tang = K - hyp.inner(q, K, N)[:, None] * N
    return hyp.norm(q, tang)


def _rotate_towards(q, N, T, angle):
    return np.cos(angle) * N + np.sin(angle) * T


def check_in_surface_bound(curve: SectionCurve, tol=1e-6, inject=0.0):
    """|kappa_check'| <= |a| / sqrt(1 - a^2) max|kappa_i| with a = g(omega, N).

    ``inject`` rotates the surface normal toward the curve tangent by that
    angle before evaluating, as a negative control.
    """
    q = curve.points
    N = curve.surface_normal
    if inject:
        N = _rotate_towards(q, N, curve.tangent, inject)
    kc = geodesic_curvature_in_surface(curve, N)
    a = hyp.inner(q, curve.plane_normal, N)
    bound = np.abs(a) / np.sqrt(1.0 - a * a) * np.max(np.abs(curve.kappas), axis=-1)
    return _report("III", bound - kc, kc, tol)


@dataclass(frozen=True)
class ProjectedCurve:
    points: np.ndarray
    d1: np.ndarray
    normal: np.ndarray
    kappa: np.ndarray
    R: float


def project(curve: SectionCurve) -> ProjectedCurve | None:
    """Vertical projection of the section onto the ideal plane, after a
    horizontal translation putting the plane's center at the origin.
    Returns None for a vertical plane (the projection is a segment)."""
    plane = curve.plane
    if plane.kind == "vertical":
        return None
    shift = plane.center
    X = curve.points - shift
    Xb, d1, d2 = X[:, :-1], curve.d1[:, :-1], curve.d2[:, :-1]
    sp = np.linalg.norm(d1, axis=-1)
    if np.min(sp / np.linalg.norm(curve.d1, axis=-1)) < 1e-6:
        raise SectionError("projection is not regular")
    # nu'' = vers(Xbar' x e_n), in the ideal plane
    nu = np.stack([d1[:, 1], -d1[:, 0]], -1) / sp[:, None]
    k = np.sum(nu * d2, axis=-1) / sp**2
    return ProjectedCurve(Xb, d1, nu, k, plane.radius)


def project_and_check(curve: SectionCurve, tol=1e-6):
    """|kappa''| <= (1/R)((nu'.e_n)^2 + q_n^2/R^2)^(-3/2) (|kappa'| + 3)."""
    pc = project(curve)
    if pc is None:
        return BoundReport("II", np.inf, len(curve), False)
    q = curve.points
    nu1 = curve.normal / q[:, -1:]
    R = pc.R
    base = (nu1[:, -1] ** 2 + (q[:, -1] / R) ** 2) ** -1.5 / R
    bound = base * (np.abs(curve.kappa) + 3.0)
    return _report("II", bound - np.abs(pc.kappa), pc.kappa, tol)


def remark_bound(curve: SectionCurve, c):
    """Simplified bound (1/(c^3 R)) max(|kappa'|, |kappa'| + 2) where
    nu'.e_n >= c; returns the worst slack over those samples (inf if none)."""
    pc = project(curve)
    if pc is None:
        return np.inf
    nu1 = curve.normal / curve.points[:, -1:]
    mask = nu1[:, -1] >= c
    if not np.any(mask):
        return np.inf
    bound = (np.abs(curve.kappa) + 2.0) / (c**3 * pc.R)
    return float(np.min((bound - np.abs(pc.kappa))[mask]))


def projection_normal_residual(curve: SectionCurve) -> float:
    pc = project(curve)
    if pc is None:
        return 0.0
    unit = np.abs(np.linalg.norm(pc.normal, axis=-1) - 1.0)
    orth = np.abs(np.sum(pc.normal * pc.d1, axis=-1)) / np.linalg.norm(pc.d1, axis=-1)
    return float(max(unit.max(), orth.max()))


def check_all(curve: SectionCurve, tol=1e-6, inject=0.0):
    return check_section_bound(curve, tol) + [check_in_surface_bound(curve, tol, inject),
                                              project_and_check(curve, tol)]


# ---------------------------------------------------------------------------
# random batches
# ---------------------------------------------------------------------------

PROFILES = ("zonal", "saddle", "mixed")


def random_configuration(rng):
    """A random perturbed sphere in H^3 and a random plane cutting it."""
    n = 3
    c = hyp.random_points(rng, 1, n, spread=0.7)[0]
    r0 = float(rng.uniform(0.4, 1.6))
    prof = make_profile(PROFILES[rng.integers(len(PROFILES))], n)
    eps = float(rng.uniform(0.0, 0.15)) * r0
    F, _ = np.linalg.qr(rng.normal(size=(n, n)))
    U = perturbed_sphere(PerturbedSphereSpec(c, r0, prof, eps, F), n_samples=500)
    off = rng.normal(size=n)
    off *= c[-1] * rng.uniform(0.0, 0.7) * r0 / np.linalg.norm(off)
    z = hyp.exp_map(c, off)
    if rng.uniform() < 0.1:
        w = np.append(rng.normal(size=n - 1), 0.0)
        plane = hyp.Hyperplane.vertical(w, float(w @ z))
    else:
        plane = hyp.Hyperplane.through(z, rng.normal(size=n))
    return U, plane


@dataclass
class BatchResult:
    rows: list
    skipped: int
    transport_max: float = float("nan")

    @property
    def violations(self):
        return sum(r["violated"] for r in self.rows)


def run_batch(count=200, seed=0, tol=1e-6, margin=DEFAULT_MARGIN, inject=0.0, samples=256):
    """Evaluate all bounds on ``count`` transversal configurations.

    Configurations failing the transversality margin (or whose section is
    not traceable by rays) are replaced and counted in ``skipped``.
    """
    rows = []
    skipped = 0
    cid = 0
    attempt = 0
    while cid < count:
        rng = np.random.default_rng([seed, attempt])
        attempt += 1
        U, plane = random_configuration(rng)
        try:
            curve = section(U, plane, samples, margin)
        except (TransversalityError, SectionError):
            skipped += 1
            continue
        for rep in check_all(curve, tol, inject):
            rows.append(dict(config_id=cid, bound_id=rep.bound_id, worst_slack=rep.worst_slack,
                             n_samples=rep.n_samples, violated=rep.violated))
        cid += 1
    return BatchResult(rows, skipped)
