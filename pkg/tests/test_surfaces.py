import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from alexlab import hyperbolic as hyp
from alexlab import surfaces as sf

E3 = np.array([0.0, 0.0, 1.0])
C0 = np.array([0.2, -0.1, 1.3])


def perturbed(eps, n_samples=2000, profile="mixed", center=C0, frame=None):
    n = len(center)
    spec = sf.PerturbedSphereSpec(np.asarray(center, float), 1.0, sf.make_profile(profile, n), eps, frame)
    return sf.perturbed_sphere(spec, n_samples)


@pytest.fixture(scope="module")
def unit_sphere():
    return sf.sphere(E3, 1.0, 2000)


@pytest.fixture(scope="module")
def bumpy():
    return perturbed(0.05)


# -- round spheres ----------------------------------------------------------

def test_sphere_mean_curvature(unit_sphere):
    assert np.allclose(unit_sphere.samples.H, 1 / np.tanh(1.0), atol=1e-10)
    assert 1 / np.tanh(1.0) == pytest.approx(1.3130353, abs=1e-7)


def test_sphere_euclidean_picture(unit_sphere):
    c, r = sf.euclidean_sphere_of(E3, 1.0)
    assert np.allclose(c, np.cosh(1.0) * E3)
    assert r == pytest.approx(np.sinh(1.0))
    pts = unit_sphere.samples.points
    assert np.allclose(np.linalg.norm(pts - c, axis=-1), r, atol=1e-12)
    assert np.allclose(hyp.dist(E3, pts), 1.0, atol=1e-12)


def test_inside(unit_sphere):
    assert unit_sphere.inside(E3)
    assert not unit_sphere.inside(np.exp(2.0) * E3)


def test_area_matches_closed_form(unit_sphere):
    assert sf.area(unit_sphere) == pytest.approx(4 * np.pi * np.sinh(1.0) ** 2, rel=1e-3)


def test_sphere_osc(unit_sphere):
    assert sf.osc_H(unit_sphere) < 1e-9


def test_inward_normals(unit_sphere):
    sm = unit_sphere.samples
    assert np.allclose(hyp.norm(sm.points, sm.normals), 1, atol=1e-12)
    # the inward normal points along the geodesic to the center
    toward = hyp.log_map(sm.points, np.broadcast_to(E3, sm.points.shape))
    assert np.allclose(sm.normals, toward, atol=1e-9)


# -- graph charts -----------------------------------------------------------

def test_horosphere_chart():
    assert sf.mean_curvature_graph(sf.horosphere_patch(3), np.array([0.2, 0.1])) == 1.0


@pytest.mark.parametrize("R", [0.5, 1.0, 3.0])
def test_hyperplane_chart(R):
    rng = np.random.default_rng(1)
    for x in rng.uniform(-0.6 * R, 0.6 * R, size=(20, 2)):
        assert abs(sf.mean_curvature_graph(sf.hyperplane_patch(3, R), x)) < 1e-8


@pytest.mark.parametrize("r", [0.3, 1.0, 2.5])
def test_sphere_cap_chart(r):
    patch = sf.sphere_cap_patch(3, r)
    assert patch.value(np.zeros(2)) == pytest.approx(np.exp(-r))
    assert abs(sf.mean_curvature_graph(patch, np.zeros(2)) - 1 / np.tanh(r)) < 1e-9
    x = np.array([0.3, -0.2]) * np.sinh(r)
    assert abs(sf.mean_curvature_graph(patch, x) - 1 / np.tanh(r)) < 1e-6


def test_chart_outside_patch():
    with pytest.raises(ValueError):
        sf.mean_curvature_graph(sf.hyperplane_patch(3, 1.0), np.array([1.0, 0.5]))


def test_top_point_all_methods(unit_sphere):
    top = np.exp(1.0) * E3
    for method in ("graph", "ambient", "analytic"):
        assert sf.mean_curvature(unit_sphere, top, method) == pytest.approx(1 / np.tanh(1.0), abs=1e-7)


def test_dual_path_agreement(bumpy):
    sm = bumpy.sample(150)
    for p, h in zip(sm.points, sm.H):
        a = sf.mean_curvature(bumpy, p, "graph")
        b = sf.mean_curvature(bumpy, p, "ambient")
        assert abs(a - b) < 1e-6
        assert abs(a - h) < 1e-6


def test_mean_curvature_errors(bumpy):
    with pytest.raises(ValueError):
        sf.mean_curvature(bumpy, C0, "graph")
    with pytest.raises(ValueError):
        sf.mean_curvature(bumpy, bumpy.samples.points[0], "mystery")


def test_chart_independence_under_rotation(bumpy):
    # rotating the normalizing frame about e_n must not change H
    u = bumpy.samples.params[7]
    p = bumpy.position(u)
    iso = hyp.normalize_to_standard(p, bumpy.inward_normal(u))
    th = 0.7
    rot = np.eye(3)
    rot[:2, :2] = [[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]]
    iso2 = hyp.Isometry(iso.generators + (hyp.HorizontalRotation(rot),))
    h = sf.rho1(0.5) * 1e-2
    vals = []
    for g in (iso, iso2):
        v, _ = sf.local_graph(bumpy, u, g)
        f0, grad, hess = sf._fd_stencil(v, 2, h)
        assert f0 == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(grad) < 1e-7
        patch = sf.GraphPatch(lambda x: f0, lambda x: grad, lambda x: hess, np.inf)
        vals.append(sf.mean_curvature_graph(patch, np.zeros(2)))
    assert vals[0] == pytest.approx(vals[1], abs=1e-7)


def test_fd_step_consistency(bumpy):
    p = bumpy.samples.points[11]
    a = sf.mean_curvature(bumpy, p, "graph", step=1e-2)
    b = sf.mean_curvature(bumpy, p, "graph", step=2e-2)
    assert abs(a - b) < 1e-7


# -- oscillation ------------------------------------------------------------

def test_osc_linear_in_eps():
    ratios = [sf.osc_H(perturbed(e)) / e for e in (0.02, 0.01, 0.005)]
    assert min(ratios) > 0
    assert abs(ratios[1] / ratios[0] - 1) < 0.05
    assert abs(ratios[2] / ratios[1] - 1) < 0.05


def test_osc_stable_under_sample_doubling():
    a = sf.osc_H(perturbed(0.01, 2000))
    b = sf.osc_H(perturbed(0.01, 4000))
    assert a > 0
    assert abs(a / b - 1) < 0.01


def test_osc_isometry_invariant():
    S = perturbed(0.01)
    g = hyp.random_isometry(np.random.default_rng(11), 3)
    T = S.transformed(g)
    assert abs(sf.osc_H(T) - sf.osc_H(S)) < 1e-8


def test_transformed_surface_inside():
    S = perturbed(0.05)
    g = hyp.random_isometry(np.random.default_rng(12), 3)
    T = S.transformed(g)
    assert T.inside(T.center)
    assert np.max(np.abs(T.depth(g(S.samples.points[:100])))) < 1e-9


@pytest.mark.parametrize("name", sf.PROFILE_NAMES)
def test_profiles_star_shaped(name):
    for eps in (0.0, 0.01, 0.1):
        S = perturbed(eps, 500, profile=name)
        assert S.inside(S.center)
        assert np.max(np.abs(S.depth(S.samples.points))) < 1e-10


def test_profile_gradients():
    prof = sf.make_profile("mixed", 4)
    rng = np.random.default_rng(2)
    z = rng.normal(size=4)
    h = 1e-6
    E = np.eye(4) * h
    g = np.array([(prof.value(z + e) - prof.value(z - e)) / (2 * h) for e in E])
    assert np.allclose(prof.grad(z), g, atol=1e-7)
    Hm = np.array([(prof.grad(z + e) - prof.grad(z - e)) / (2 * h) for e in E])
    assert np.allclose(prof.hess(z), Hm, atol=1e-6)


@settings(max_examples=15, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-1.5, 1.5), st.floats(0.2, 2.0), st.floats(0, 0.08))
def test_depth_vanishes_on_surface(x, y, t, r0, eps):
    c = np.array([x, y, np.exp(t)])
    spec = sf.PerturbedSphereSpec(c, r0, sf.make_profile("mixed", 3), eps * r0, None)
    S = sf.perturbed_sphere(spec, 300)
    sm = S.samples
    assert np.max(np.abs(S.depth(sm.points))) < 1e-9 * max(1, r0)
    assert np.allclose(S.parameter_of(sm.points), sm.params, atol=1e-9)
    assert np.allclose(hyp.norm(sm.points, sm.normals), 1, atol=1e-10)
    assert np.all(S.depth(hyp.exp_map(sm.points, 1e-3 * sm.normals)) > 0)


def test_invalid_surfaces():
    with pytest.raises(ValueError):
        sf.sphere(E3, 0.0)
    with pytest.raises(ValueError):
        sf.sphere(np.array([0, 0, -1.0]), 1.0)
    with pytest.raises(ValueError):
        perturbed(5.0)
    with pytest.raises(ValueError):
        sf.make_profile("spiky", 3)
    with pytest.raises(ValueError):
        sf.perturbed_sphere(sf.PerturbedSphereSpec(E3, 1.0, sf.make_profile("mixed", 4), 0.1, None))


# -- touching radius and global quantities ----------------------------------

def test_rho_formulas():
    for rho in (0.1, 0.5, 2.0):
        r0 = np.exp(-rho) * np.sinh(rho)
        assert sf.rho0(rho) == pytest.approx(r0)
        assert sf.rho1(rho) == pytest.approx((1 - r0) * r0)
    # Euclidean radius of the hyperbolic ball of radius rho touching e_n from below
    rho = 0.8
    c, R = sf.euclidean_sphere_of(np.exp(-rho) * E3, rho)
    assert R == pytest.approx(sf.rho0(rho))
    assert c[-1] + R == pytest.approx(1.0)


def test_touching_radius_sphere():
    S = sf.sphere(E3, 1.0, 1000)
    tr = sf.touching_radius(S, checks=20)
    assert tr.rho == pytest.approx(1.0, rel=1e-6)
    assert sf.two_ball_tangency(S, 0.99, range(0, 1000, 50)) == 1.0


def test_touching_radius_perturbed():
    S = perturbed(0.01, 1000)
    tr = sf.touching_radius(S, checks=20)
    assert abs(tr.rho - 1.0) < 0.1
    assert tr.rho0 == pytest.approx(sf.rho0(tr.rho))
    assert tr.rho1 == pytest.approx(sf.rho1(tr.rho))


def test_circle_length():
    for r in (0.5, 1.0, 2.0):
        S = sf.sphere(np.array([0.3, 1.0]), r, 2000)
        assert sf.area(S) == pytest.approx(2 * np.pi * np.sinh(r), rel=5e-3)


def test_sphere_diameter():
    S = sf.sphere(C0, 0.8, 2000)
    assert sf.diameter(S) == pytest.approx(1.6, rel=1e-2)


def test_diameter_bound():
    S = perturbed(0.02, 1500)
    tr = sf.touching_radius(S, checks=10)
    bound, c = sf.diameter_bound(S, tr.rho / 2)
    assert c > 0
    assert sf.diameter(S) <= bound


def test_extremum_refinement():
    S = perturbed(0.05)
    u, val = sf.refine_extremum(S.mean_curvature_at, S.samples.params[np.argmax(S.samples.H)], -1.0)
    assert val >= S.samples.H.max() - 1e-12
    assert np.linalg.norm(u) == pytest.approx(1.0)
