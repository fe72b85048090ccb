"""Upper half-space model of hyperbolic n-space.

Points are numpy arrays of shape ``(..., n)`` whose last coordinate is the
height above the ideal boundary plane ``{x_n = 0}``.  Tangent vectors are
arrays of the same shape holding ambient Euclidean components; the
hyperbolic length of ``v`` at ``p`` is ``|v| / p_n``.

Every function broadcasts over leading axes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MIN_HEIGHT = 1e-300
DEGENERATE_DIST = 1e-14


class InvalidPointError(ValueError):
    pass


class DegenerateGeodesicError(ValueError):
    pass


def check_points(x, name="point"):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] < 2:
        raise InvalidPointError(f"{name}: dimension must be >= 2, got {x.shape[-1]}")
    if not np.all(np.isfinite(x)):
        raise InvalidPointError(f"{name}: non-finite coordinates")
    if np.any(x[..., -1] <= MIN_HEIGHT):
        raise InvalidPointError(f"{name}: height must be positive")
    return x


def check_ball_points(y, name="point"):
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise InvalidPointError(f"{name}: non-finite coordinates")
    if np.any(np.sum(y * y, axis=-1) >= 1.0):
        raise InvalidPointError(f"{name}: outside the open unit ball")
    return y


def basis(n, k):
    e = np.zeros(n)
    e[k] = 1.0
    return e


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _norm(a):
    return np.sqrt(np.sum(a * a, axis=-1))


def norm(p, v):
    """Hyperbolic length of the tangent vector ``v`` at ``p``."""
    p = np.asarray(p, dtype=float)
    return _norm(np.asarray(v, dtype=float)) / p[..., -1]


def inner(p, v, w):
    """Riemannian inner product g_p(v, w)."""
    p = np.asarray(p, dtype=float)
    return _dot(np.asarray(v, float), np.asarray(w, float)) / p[..., -1] ** 2


# ---------------------------------------------------------------------------
# distance, exp, log
# ---------------------------------------------------------------------------

def dist(p, q):
    """Hyperbolic distance, arccosh(1 + |p-q|^2 / (2 p_n q_n)).

    Evaluated as ``2 asinh(|p-q| / (2 sqrt(p_n q_n)))`` which is the same
    quantity without the cancellation near the diagonal.
    """
    p = check_points(p, "p")
    q = check_points(q, "q")
    return 2.0 * np.arcsinh(_norm(p - q) / (2.0 * np.sqrt(p[..., -1] * q[..., -1])))


def _unit_exp(w, t):
    """exp at e_n of t*w for Euclidean-unit w; returns (point, velocity)."""
    ch, sh = np.cosh(t), np.sinh(t)
    wn = w[..., -1]
    den = ch - wn * sh
    x = np.empty(np.broadcast(w, t[..., None]).shape)
    x[..., :-1] = w[..., :-1] * (sh / den)[..., None]
    x[..., -1] = 1.0 / den
    vel = np.empty_like(x)
    vel[..., :-1] = w[..., :-1] / (den**2)[..., None]
    vel[..., -1] = -(sh - wn * ch) / den**2
    return x, vel


def exp_map(p, v):
    """Riemannian exponential map at ``p``; a zero vector returns ``p``."""
    p = check_points(p, "p")
    v = np.asarray(v, dtype=float)
    p, v = np.broadcast_arrays(p, v)
    vn = _norm(v)
    zero = vn == 0.0
    safe = np.where(zero, 1.0, vn)
    w = v / safe[..., None]
    w = np.where(zero[..., None], basis(p.shape[-1], -1), w)
    t = np.where(zero, 0.0, vn / p[..., -1])
    x, _ = _unit_exp(w, t)
    out = p * 1.0
    out[..., :-1] = p[..., :-1] + p[..., -1:] * x[..., :-1]
    out[..., -1] = p[..., -1] * x[..., -1]
    return out


def geodesic_flow(p, w, t):
    """Point and velocity of the unit-speed geodesic from ``p`` with
    unit (hyperbolic) initial velocity ``w``, at arclength ``t``."""
    p = np.asarray(p, dtype=float)
    w = np.asarray(w, dtype=float)
    t = np.asarray(t, dtype=float)
    p, w = np.broadcast_arrays(p, w)
    wu = w / _norm(w)[..., None]
    x, vel = _unit_exp(wu, np.broadcast_to(t, p.shape[:-1]) if t.ndim == 0 else t)
    pt = np.empty(x.shape)
    pt[..., :-1] = p[..., :-1] + p[..., -1:] * x[..., :-1]
    pt[..., -1] = p[..., -1] * x[..., -1]
    return pt, p[..., -1:] * vel


def log_map(p, q):
    """Inverse of :func:`exp_map`; ``log_map(p, p)`` is the zero vector."""
    p = check_points(p, "p")
    q = check_points(q, "q")
    p, q = np.broadcast_arrays(p, q)
    pn = p[..., -1]
    qs = (q - p) / pn[..., None]
    qs[..., -1] = q[..., -1] / pn
    y = qs[..., -1]
    hor2 = np.sum(qs[..., :-1] ** 2, axis=-1)
    k = (hor2 + (y - 1.0) ** 2) / (2.0 * y)
    t = 2.0 * np.arcsinh(np.sqrt(k / 2.0))
    sh = np.sqrt(k * (k + 2.0))
    zero = sh == 0.0
    sh = np.where(zero, 1.0, sh)
    w = np.empty(p.shape)
    w[..., :-1] = qs[..., :-1] / (y * sh)[..., None]
    w[..., -1] = (hor2 + (y - 1.0) * (y + 1.0)) / (2.0 * y * sh)
    out = w * (t * pn)[..., None]
    return np.where(zero[..., None], 0.0, out)


@dataclass(frozen=True)
class GeodesicSegment:
    """Unit-speed geodesic arc from ``p`` to ``q``.

    ``kind`` is ``"vertical"`` when both points lie on one vertical line,
    otherwise ``"circle"`` with ``center`` on the ideal plane and Euclidean
    ``radius``.
    """

    p: np.ndarray
    q: np.ndarray
    length: float
    direction: np.ndarray
    kind: str
    center: np.ndarray | None = None
    radius: float | None = None

    def _flow(self, s):
        s = np.asarray(s, dtype=float)
        p = np.broadcast_to(self.p, s.shape + self.p.shape)
        w = np.broadcast_to(self.direction, s.shape + self.p.shape)
        return geodesic_flow(p, w, s)

    def point(self, s):
        return self._flow(s)[0]

    def velocity(self, s):
        return self._flow(s)[1]

    def midpoint(self):
        return self.point(0.5 * self.length)


def geodesic(p, q):
    p = check_points(p, "p")
    q = check_points(q, "q")
    L = float(dist(p, q))
    if L < DEGENERATE_DIST:
        raise DegenerateGeodesicError("endpoints coincide")
    v = log_map(p, q)
    direction = v / L
    hor = q[:-1] - p[:-1]
    h = float(np.linalg.norm(hor))
    if h <= 1e-15 * (p[-1] + q[-1]):
        return GeodesicSegment(p, q, L, direction, "vertical")
    u = hor / h
    # c = p_bar + a u with |p - c| = |q - c|
    a = (h * h + q[-1] ** 2 - p[-1] ** 2) / (2 * h)
    center = np.append(p[:-1] + a * u, 0.0)
    radius = float(np.hypot(a, p[-1]))
    return GeodesicSegment(p, q, L, direction, "circle", center, radius)


# ---------------------------------------------------------------------------
# parallel transport
# ---------------------------------------------------------------------------

def transport_matrix_2d(x, y):
    """Closed-form 2x2 block of parallel transport from (x, y) to (0, 1).

    ``x > 0`` is the horizontal offset and ``y`` the height of the source in
    the normalized plane <e_{n-1}, e_n>; the full map is this block divided
    by ``y``.  The lower-left entry is ``a*y - a + x``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = (x * x + y * y - 1.0) / (2.0 * x)
    s = 1.0 + a * a
    d = (a * (a - x) + y) / s
    b = (a - x - a * y) / s
    c = (a * y - a + x) / s
    return np.stack([np.stack([d, b], -1), np.stack([c, d], -1)], -2)


def parallel_transport(q, p, v):
    """Parallel transport of ``v`` (based at ``q``) along the geodesic to ``p``.

    Conjugates to the configuration p = e_n, q in <e_{n-1}, e_n> and applies
    the closed-form rotation block; vertical pairs reduce to scaling by
    p_n / q_n.
    """
    q = check_points(q, "q")
    p = check_points(p, "p")
    v = np.asarray(v, dtype=float)
    q, p, v = np.broadcast_arrays(q, p, v)
    pn, qn = p[..., -1], q[..., -1]
    hor = q[..., :-1] - p[..., :-1]
    h = _norm(hor)
    vertical = h <= 1e-100 * pn
    hs = np.where(vertical, 1.0, h)
    u = np.zeros(q.shape)
    u[..., :-1] = hor / hs[..., None]
    alpha = _dot(v, u)
    beta = v[..., -1]
    perp = v - alpha[..., None] * u
    perp[..., -1] = 0.0
    x = np.where(vertical, 1.0, h / pn)
    M = transport_matrix_2d(x, qn / pn)
    m1 = M[..., 0, 0] * alpha + M[..., 0, 1] * beta
    m2 = M[..., 1, 0] * alpha + M[..., 1, 1] * beta
    out = perp + m1[..., None] * u
    out[..., -1] += m2
    out = np.where(vertical[..., None], v, out)
    return out * (pn / qn)[..., None]


def _transport_rhs(x, xdot, X):
    xn = x[..., -1:]
    out = np.empty_like(X)
    out[..., :-1] = (xdot[..., :-1] * X[..., -1:] + xdot[..., -1:] * X[..., :-1]) / xn
    out[..., -1] = (xdot[..., -1] * X[..., -1] - _dot(xdot[..., :-1], X[..., :-1])) / xn[..., 0]
    return out


def parallel_transport_ode(q, p, v, steps=256):
    """Parallel transport by classical RK4 on the Christoffel-symbol ODE.

    Independent of :func:`parallel_transport`; used as its oracle.
    """
    if steps < 16:
        raise ValueError("steps must be >= 16")
    q = check_points(q, "q")
    p = check_points(p, "p")
    v = np.asarray(v, dtype=float)
    q, p, v = np.broadcast_arrays(q, p, v)
    L = dist(q, p)
    w = log_map(q, p)
    Ls = np.where(L == 0.0, 1.0, L)
    w = w / Ls[..., None]
    w = np.where((L == 0.0)[..., None], basis(q.shape[-1], -1) * q[..., -1:], w)
    h = L / steps
    X = v.astype(float).copy()

    def curve(t):
        return geodesic_flow(q, w, t)

    for i in range(steps):
        t0 = i * h
        x0, d0 = curve(t0)
        xm, dm = curve(t0 + 0.5 * h)
        x1, d1 = curve(t0 + h)
        k1 = _transport_rhs(x0, d0, X)
        k2 = _transport_rhs(xm, dm, X + 0.5 * h[..., None] * k1)
        k3 = _transport_rhs(xm, dm, X + 0.5 * h[..., None] * k2)
        k4 = _transport_rhs(x1, d1, X + h[..., None] * k3)
        X = X + (h / 6.0)[..., None] * (k1 + 2 * k2 + 2 * k3 + k4)
    return X


# ---------------------------------------------------------------------------
# isometries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HorizontalTranslation:
    shift: np.ndarray  # length n, last entry 0

    parity = 1

    def apply(self, x):
        return np.asarray(x, float) + self.shift

    def push(self, x, v):
        return np.asarray(v, float) * 1.0

    def inverse(self):
        return HorizontalTranslation(-self.shift)

    def sphere_coeffs(self, A, B, C):
        t = self.shift
        return A, B + A * t, A * _dot(t, t) + 2 * _dot(B, t) + C


@dataclass(frozen=True)
class Dilation:
    factor: float

    parity = 1

    def apply(self, x):
        return np.asarray(x, float) * self.factor

    def push(self, x, v):
        return np.asarray(v, float) * self.factor

    def inverse(self):
        return Dilation(1.0 / self.factor)

    def sphere_coeffs(self, A, B, C):
        return A, self.factor * B, self.factor**2 * C


@dataclass(frozen=True)
class HorizontalRotation:
    """Orthogonal map fixing e_n (reflections allowed; see ``parity``)."""

    matrix: np.ndarray

    @property
    def parity(self):
        return 1 if np.linalg.det(self.matrix) > 0 else -1

    def apply(self, x):
        return np.asarray(x, float) @ self.matrix.T

    def push(self, x, v):
        return np.asarray(v, float) @ self.matrix.T

    def inverse(self):
        return HorizontalRotation(self.matrix.T.copy())

    def sphere_coeffs(self, A, B, C):
        return A, B @ self.matrix.T, C


@dataclass(frozen=True)
class Inversion:
    """Inversion in the sphere of given radius centered on the ideal plane."""

    center: np.ndarray  # length n, last entry 0
    radius: float

    parity = -1

    def apply(self, x):
        d = np.asarray(x, float) - self.center
        return self.center + self.radius**2 * d / _dot(d, d)[..., None]

    def push(self, x, v):
        d = np.asarray(x, float) - self.center
        r2 = _dot(d, d)[..., None]
        v = np.asarray(v, float)
        return self.radius**2 / r2 * (v - 2.0 * d * _dot(d, v)[..., None] / r2)

    def inverse(self):
        return self

    def sphere_coeffs(self, A, B, C):
        c0, k2 = self.center, self.radius**2
        # translate center to origin, invert, translate back
        A1, B1, C1 = A, B - A * c0, A * _dot(c0, c0) - 2 * _dot(B, c0) + C
        A2, B2, C2 = C1, k2 * B1, A1 * k2 * k2
        return A2, B2 + A2 * c0, A2 * _dot(c0, c0) + 2 * _dot(B2, c0) + C2


@dataclass(frozen=True)
class Isometry:
    """Composition of generators, applied left to right."""

    generators: tuple = field(default_factory=tuple)

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        for g in self.generators:
            x = g.apply(x)
        return x

    __call__ = apply

    def push(self, x, v):
        """Push forward ``v`` at ``x``; returns the vector at ``apply(x)``."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        for g in self.generators:
            v = g.push(x, v)
            x = g.apply(x)
        return v

    def inverse(self):
        return Isometry(tuple(g.inverse() for g in reversed(self.generators)))

    def then(self, other: "Isometry"):
        return Isometry(self.generators + other.generators)

    @property
    def parity(self):
        out = 1
        for g in self.generators:
            out *= g.parity
        return out


IDENTITY = Isometry(())


def standard_frame(p):
    """Isometry x -> (x - p_bar) / p_n sending p to e_n."""
    p = check_points(p, "p")
    shift = p * 1.0
    shift[-1] = 0.0
    return Isometry((HorizontalTranslation(-shift), Dilation(1.0 / p[-1])))


def normalize_to_standard(p, N):
    """Orientation-preserving isometry with p -> e_n and N -> e_n.

    ``N`` must have unit hyperbolic length at ``p``.  The result is unique up
    to a rotation about the e_n-axis.
    """
    p = check_points(p, "p")
    N = np.asarray(N, dtype=float)
    n = p.shape[-1]
    L = float(norm(p, N))
    if not L > 1e-14:
        raise ValueError("zero normal")
    w = N / (p[-1] * L)
    en = basis(n, -1)
    iso = standard_frame(p)
    if np.linalg.norm(w - en) < 1e-15:
        return iso
    if w[-1] >= 0.0:
        # reflect w to -e_n through e_n, then invert in the unit sphere
        m = (w + en) / np.linalg.norm(w + en)
        x0 = en - m / m[-1]
        x0[-1] = 0.0
        gens = (Inversion(x0, 1.0 / abs(m[-1])), Inversion(np.zeros(n), 1.0))
    else:
        m = (w - en) / np.linalg.norm(w - en)
        x0 = en - m / m[-1]
        x0[-1] = 0.0
        flip = np.eye(n)
        flip[0, 0] = -1.0
        gens = (Inversion(x0, 1.0 / abs(m[-1])), HorizontalRotation(flip))
    return iso.then(Isometry(gens))


# ---------------------------------------------------------------------------
# hyperplanes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Hyperplane:
    """Totally geodesic hypersurface.

    ``kind == "vertical"``: the set ``x . normal = offset`` with ``normal`` a
    horizontal unit vector.  ``kind == "sphere"``: the half-sphere of
    Euclidean ``radius`` centered at ``center`` on the ideal plane.
    """

    kind: str
    normal: np.ndarray | None = None
    offset: float = 0.0
    center: np.ndarray | None = None
    radius: float = 0.0

    @classmethod
    def vertical(cls, normal, offset=0.0):
        u = np.asarray(normal, dtype=float) * 1.0
        if abs(u[-1]) > 1e-12:
            raise ValueError("vertical hyperplane normal must be horizontal")
        u[-1] = 0.0
        s = np.linalg.norm(u)
        if not s > 0:
            raise ValueError("zero normal")
        return cls("vertical", normal=u / s, offset=float(offset) / s)

    @classmethod
    def half_sphere(cls, center, radius):
        c = np.asarray(center, dtype=float) * 1.0
        if c.shape[-1] >= 1 and abs(c[-1]) > 1e-12 * max(1.0, radius):
            raise ValueError("half-sphere center must lie on the ideal plane")
        c[-1] = 0.0
        if not radius > 0:
            raise ValueError("radius must be positive")
        return cls("sphere", center=c, radius=float(radius))

    @classmethod
    def through(cls, p, w):
        """Hyperplane through ``p`` orthogonal to the tangent vector ``w``."""
        p = check_points(p, "p")
        n = p.shape[-1]
        iso = normalize_to_standard(p, w / norm(p, w))
        return cls.half_sphere(np.zeros(n), 1.0).transformed(iso.inverse())

    @property
    def dim(self):
        return (self.normal if self.kind == "vertical" else self.center).shape[-1]

    def unit_normal(self, x):
        """Unit normal at ``x`` pointing to the positive side."""
        x = check_points(x)
        if self.kind == "vertical":
            return x[..., -1:] * self.normal
        return x[..., -1:] * (x - self.center) / self.radius

    def signed_distance(self, x):
        """Signed hyperbolic distance; positive outside the half-sphere or
        on the side the vertical normal points to."""
        x = check_points(x)
        if self.kind == "vertical":
            return np.arcsinh((_dot(x, self.normal) - self.offset) / x[..., -1])
        d = x - self.center
        return np.arcsinh((_dot(d, d) - self.radius**2) / (2.0 * self.radius * x[..., -1]))

    def distance(self, x):
        return np.abs(self.signed_distance(x))

    def reflect(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "vertical":
            return x - 2.0 * (_dot(x, self.normal) - self.offset)[..., None] * self.normal
        return Inversion(self.center, self.radius).apply(x)

    def push(self, x, v):
        """Differential of the reflection at ``x`` applied to ``v``."""
        v = np.asarray(v, dtype=float)
        if self.kind == "vertical":
            return v - 2.0 * _dot(v, self.normal)[..., None] * self.normal
        return Inversion(self.center, self.radius).push(x, v)

    def reflection(self):
        if self.kind == "vertical":
            n = self.normal.shape[-1]
            Q = np.eye(n) - 2.0 * np.outer(self.normal, self.normal)
            t = 2.0 * self.offset * self.normal
            return Isometry((HorizontalRotation(Q), HorizontalTranslation(t)))
        return Isometry((Inversion(self.center, self.radius),))

    def foot_point(self, x):
        """Nearest point of the hyperplane to ``x`` (geodesic midpoint of x
        and its mirror image)."""
        x = check_points(x)
        xr = self.reflect(x)
        d = dist(x, xr)
        if np.all(d < DEGENERATE_DIST):
            return x * 1.0
        return exp_map(x, 0.5 * log_map(x, xr))

    def coefficients(self):
        """(A, B, C) with the hyperplane = {A|x|^2 - 2 B.x + C = 0}."""
        if self.kind == "vertical":
            return 0.0, self.normal * 1.0, 2.0 * self.offset
        c = self.center
        return 1.0, c * 1.0, float(np.dot(c, c) - self.radius**2)

    @classmethod
    def from_coefficients(cls, A, B, C):
        B = np.asarray(B, dtype=float) * 1.0
        B[-1] = 0.0
        scale = max(abs(A), float(np.linalg.norm(B)), abs(C) ** 0.5 if C else 0.0, 1e-300)
        if abs(A) <= 1e-12 * scale:
            nb = np.linalg.norm(B)
            return cls("vertical", normal=B / nb, offset=float(C / (2.0 * nb)))
        center = B / A
        r2 = float(np.dot(center, center) - C / A)
        return cls("sphere", center=center, radius=float(np.sqrt(r2)))

    def transformed(self, iso: Isometry):
        """Image of the hyperplane under ``iso``."""
        A, B, C = self.coefficients()
        for g in iso.generators:
            A, B, C = g.sphere_coeffs(A, B, C)
        return Hyperplane.from_coefficients(A, B, C)

    def contains(self, x, tol=1e-10):
        return np.abs(self.signed_distance(x)) <= tol


def reflect(plane: Hyperplane, x):
    return plane.reflect(x)


# ---------------------------------------------------------------------------
# ball model
# ---------------------------------------------------------------------------

def _flip_last(y):
    y = np.array(y, dtype=float)
    y[..., -1] = -y[..., -1]
    return y


def to_halfspace(y):
    """Ball -> half-space: reflection in {y_n = 0} followed by inversion in
    the sphere about -e_n of radius sqrt(2).  Sends the ball origin to e_n."""
    y = check_ball_points(y)
    z = _flip_last(y)
    z[..., -1] += 1.0
    out = 2.0 * z / _dot(z, z)[..., None]
    out[..., -1] -= 1.0
    return out


def to_ball(x):
    x = check_points(x)
    z = x * 1.0
    z[..., -1] += 1.0
    z = 2.0 * z / _dot(z, z)[..., None]
    z[..., -1] -= 1.0
    return _flip_last(z)


def to_halfspace_push(y, v):
    y = np.asarray(y, dtype=float)
    z = _flip_last(y)
    z[..., -1] += 1.0
    w = _flip_last(v)
    r2 = _dot(z, z)[..., None]
    return 2.0 / r2 * (w - 2.0 * z * _dot(z, w)[..., None] / r2)


def to_ball_push(x, v):
    z = np.asarray(x, dtype=float) * 1.0
    z[..., -1] += 1.0
    r2 = _dot(z, z)[..., None]
    v = np.asarray(v, dtype=float)
    return _flip_last(2.0 / r2 * (v - 2.0 * z * _dot(z, v)[..., None] / r2))


def dist_ball(a, b):
    a = check_ball_points(a)
    b = check_ball_points(b)
    num = 2.0 * _dot(a - b, a - b)
    den = (1.0 - _dot(a, a)) * (1.0 - _dot(b, b))
    return 2.0 * np.arcsinh(np.sqrt(num / den / 2.0))


def log_map_ball(a, b):
    """Logarithm in the ball model, via the half-space and back."""
    xa, xb = to_halfspace(a), to_halfspace(b)
    return to_ball_push(xa, log_map(xa, xb))


def exp_map_ball(a, v):
    xa = to_halfspace(a)
    return to_ball(exp_map(xa, to_halfspace_push(a, v)))


def random_points(rng, size, n, spread=1.0):
    """Points whose horizontal offset and log-height are ~ N(0, spread^2)."""
    x = rng.normal(scale=spread, size=(size, n))
    x[:, -1] = np.exp(x[:, -1])
    return x


def random_isometry(rng, n, k=4):
    """Random composition of ``k`` generators (all four kinds represented)."""
    gens = []
    for i in range(k):
        kind = i % 4
        if kind == 0:
            t = np.append(rng.normal(size=n - 1), 0.0)
            gens.append(HorizontalTranslation(t))
        elif kind == 1:
            gens.append(Dilation(float(np.exp(rng.normal(scale=0.5)))))
        elif kind == 2:
            Q = np.eye(n)
            A, _ = np.linalg.qr(rng.normal(size=(n - 1, n - 1)))
            Q[:-1, :-1] = A
            gens.append(HorizontalRotation(Q))
        else:
            c = np.append(rng.normal(size=n - 1), 0.0)
            gens.append(Inversion(c, float(np.exp(rng.normal(scale=0.3)))))
    return Isometry(tuple(gens))


def quasi_uniform_directions(k, n):
    """``k`` quasi-uniform unit vectors in R^n (Fibonacci lattice for n=3)."""
    if n == 2:
        th = 2 * np.pi * (np.arange(k) + 0.5) / k
        return np.stack([np.cos(th), np.sin(th)], -1)
    if n == 3:
        i = np.arange(k) + 0.5
        z = 1.0 - 2.0 * i / k
        phi = np.pi * (3.0 - np.sqrt(5.0)) * np.arange(k)
        r = np.sqrt(1.0 - z * z)
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], -1)
    from scipy.stats import norm as _gauss
    from scipy.stats import qmc

    u = qmc.Halton(d=n, scramble=False).random(k + 1)[1:]
    g = _gauss.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=-1, keepdims=True)

