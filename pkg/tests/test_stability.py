from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import quad

from alexlab import hyperbolic as hyp
from alexlab import stability as st
from alexlab import surfaces as sf

E3 = np.array([0.0, 0.0, 1.0])
C = np.array([0.2, -0.1, 1.3])
TEMPLATE = sf.PerturbedSphereSpec(C, 1.0, sf.make_profile("mixed", 3), 0.0, None)


def bumpy(eps, n_samples=3000):
    return sf.perturbed_sphere(replace(TEMPLATE, eps=eps), n_samples)


# -- approximate center -----------------------------------------------------

def test_center_of_concurrent_planes():
    rng = np.random.default_rng(0)
    planes = [hyp.Hyperplane.through(C, rng.normal(size=3)) for _ in range(3)]
    res = st.approximate_center(planes, E3)
    assert hyp.dist(res.O, C) < 1e-9
    assert np.max(res.residuals) < 1e-12


def test_plane_distance():
    unit = hyp.Hyperplane.half_sphere(np.zeros(3), 1.0)
    assert st.plane_distance(E3, unit) == 0.0
    for t in (-1.2, 0.3, 2.0):
        assert st.plane_distance(np.exp(t) * E3, unit) == pytest.approx(abs(t), abs=1e-12)


def test_parallel_planes_rejected():
    a = hyp.Hyperplane.half_sphere(np.zeros(3), 1.0)
    b = hyp.Hyperplane.half_sphere(np.zeros(3), 2.0)
    c = hyp.Hyperplane.through(E3, np.array([1.0, 0, 0]))
    assert not st.planes_intersect(a, b)
    assert st.planes_intersect(a, c)
    with pytest.raises(st.NonIntersectionError) as info:
        st.approximate_center([a, c, b], E3, osc=0.3)
    assert info.value.pair == (0, 2)
    assert info.value.osc == 0.3


def test_vertical_plane_pairs():
    v1 = hyp.Hyperplane.vertical(np.array([1.0, 0, 0]), 0.0)
    v2 = hyp.Hyperplane.vertical(np.array([1.0, 0, 0]), 1.0)
    v3 = hyp.Hyperplane.vertical(np.array([0.0, 1, 0]), 1.0)
    assert not st.planes_intersect(v1, v2)
    assert st.planes_intersect(v1, v3)
    assert not st.planes_intersect(v2, hyp.Hyperplane.half_sphere(np.zeros(3), 0.5))


# -- radii ------------------------------------------------------------------

def test_sphere_radii():
    r, R = st.radii(sf.sphere(C, 0.7, 1000), C)
    assert r == pytest.approx(0.7, abs=1e-12)
    assert R == pytest.approx(0.7, abs=1e-12)


def test_perturbed_radii():
    eps = 0.02
    S = bumpy(eps)
    r, R = st.radii(S, C)
    f = TEMPLATE.profile.value
    u = sf.parameter_samples(20000, 3)
    _, fmax = sf.refine_extremum(f, u[np.argmax(f(u))], -1.0)
    _, fmin = sf.refine_extremum(f, u[np.argmin(f(u))], 1.0)
    assert r <= 1.0 <= R
    # about the surface center the radii are the extremes of the radial function
    assert R == pytest.approx(1.0 + eps * fmax, abs=1e-8)
    assert r == pytest.approx(1.0 + eps * fmin, abs=1e-8)


# -- center of mass ---------------------------------------------------------

def test_body_sampler_distribution():
    S = sf.sphere(C, 1.0, 500)
    pts = st.sample_body(S, 20000, np.random.default_rng(1))
    assert np.all(S.inside(pts))
    t = hyp.dist(C, pts)
    p = quad(lambda x: np.sinh(x) ** 2, 0, 0.5)[0] / quad(lambda x: np.sinh(x) ** 2, 0, 1.0)[0]
    frac = np.mean(t < 0.5)
    assert abs(frac - p) < 4 * np.sqrt(p * (1 - p) / len(t))


def test_ball_center_of_mass():
    S = sf.sphere(C, 0.8, 500)
    pts = st.sample_body(S, 50000, np.random.default_rng(2))
    res = st.center_of_mass(pts, hyp.exp_map(C, np.array([0.1, 0, 0.1])))
    assert hyp.dist(res.O_cm, C) < 3 * res.stderr
    assert res.grad_norm < 0.1 * res.stderr


def test_center_of_mass_reflection():
    S = sf.sphere(C, 0.8, 500)
    pts = st.sample_body(S, 50000, np.random.default_rng(3))
    cm = st.center_of_mass(pts, C)
    plane = hyp.Hyperplane.through(cm.O_cm, np.array([0.3, 0.9, -0.2]))
    cm2 = st.center_of_mass(plane.reflect(pts), cm.O_cm)
    assert hyp.dist(cm.O_cm, cm2.O_cm) < 3 * cm.stderr


def test_center_of_mass_too_few():
    with pytest.raises(st.SamplerError):
        st.center_of_mass(np.tile(E3, (3, 1)), E3)


# -- radial graph -----------------------------------------------------------

def test_sphere_graph_vanishes():
    g = st.sphere_graph(sf.sphere(C, 0.9, 500), C, 0.9, count=400)
    assert g.sup < 1e-9
    assert g.lipschitz < 1e-8


def test_perturbed_sphere_graph():
    S = bumpy(0.02)
    r, R = st.radii(S, C)
    g = st.sphere_graph(S, C, r, count=800)
    assert g.values.min() >= -1e-9
    assert g.values.max() == pytest.approx(R - r, abs=1e-4)
    assert 0 < g.lipschitz < 1


def test_sphere_graph_center_outside():
    with pytest.raises(st.NotAGraphError):
        st.sphere_graph(sf.sphere(C, 0.5, 500), 3 * C, 0.5, count=200)


# -- analysis and sweep -----------------------------------------------------

def test_analyze_sphere():
    S = sf.sphere(C, 1.0, 3000)
    rep = st.analyze(S, k=6, base=hyp.exp_map(C, np.array([0.1, -0.2, 0.15])))
    assert hyp.dist(rep.O, C) < 1e-6
    assert rep.gap < 1e-7
    assert rep.max_plane_dist < 1e-6
    assert rep.sup_defect < 1e-7
    assert np.isnan(rep.C_emp)
    assert len(rep.directions) == 6


def test_analyze_perturbed_and_threads():
    S = bumpy(0.02)
    a = st.analyze(S, k=4, eps=0.02)
    b = st.analyze(S, k=4, eps=0.02, threads=3)
    assert a.osc_H > 0
    assert 0 < a.gap < 0.2
    assert a.max_plane_dist < a.osc_H
    assert np.array_equal(a.O, b.O)
    assert [d.m for d in a.directions] == [d.m for d in b.directions]
    assert np.max(a.center_residuals) <= a.osc_H


def test_loglog_slope():
    osc = np.array([0.4, 0.2, 0.1])
    assert st.loglog_slope(osc, 3 * osc**1.5) == pytest.approx(1.5)
    assert np.isnan(st.loglog_slope([0.1], [0.2]))


@pytest.mark.parametrize("grid", [[], [0.1, 0.0], [0.05, 0.1], [-0.1]])
def test_sweep_grid_validation(grid):
    with pytest.raises(ValueError):
        st.run_sweep(TEMPLATE, grid)


def test_sweep_direction_count():
    with pytest.raises(ValueError):
        st.run_sweep(TEMPLATE, [0.1], k=2)


def test_zero_amplitude_sweep():
    reports, slopes = st.run_sweep(TEMPLATE, [0.0], k=3, n_samples=1500, defects=False)
    assert reports[0].gap < 1e-7
    assert np.isnan(reports[0].C_emp)
    assert np.isnan(slopes[0])


def test_small_sweep_monotone_gap():
    seen = []
    reports, slopes = st.run_sweep(TEMPLATE, [0.04, 0.02], k=3, n_samples=2000, defects=False,
                                   progress=seen.append)
    assert len(seen) == 2
    assert reports[1].gap <= reports[0].gap
    assert abs(slopes[-1] - 1) < 0.15
