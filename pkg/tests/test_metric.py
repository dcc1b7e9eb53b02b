import numpy as np
import pytest
from conftest import ZERO

from franks.errors import EstimateViolated, FocalPoint, WidthExceedsChart
from franks.metric import (
    BumpFunction,
    QuadraticFermiMetric,
    StripCurvature,
    axis_curvature_change,
    c2_bound,
    c2_distance,
    delta_estimates,
    hessian_on_axis,
    highdim_metric_from_delta_r,
    interpolate_highdim,
    interpolate_metric,
    phi_norms,
    surface_metric_from_curvature,
    transverse_bump,
)
from franks.numkit import MatrixCurve, SmoothFn, hump, sin_fn
from franks.surface import SurfaceFranks

ETAS = (0.2, 0.1, 0.05, 0.025)


@pytest.fixture(scope="module")
def flat_pair():
    g = surface_metric_from_curvature(ZERO, t_points=129, x_points=513)
    gh = surface_metric_from_curvature(0.01 * hump(), t_points=129, x_points=513)
    return g, gh


# -- bump ------------------------------------------------------------------

def test_transverse_bump_shape():
    phi = transverse_bump()
    assert np.all(phi(np.linspace(-0.25, 0.25, 101)) == 1.0)
    outside = np.concatenate([np.linspace(-1.5, -1.0, 50), np.linspace(1.0, 1.5, 50)])
    assert np.all(phi(outside) == 0.0)


@pytest.mark.parametrize("eta", ETAS)
def test_scaled_bump_norms(eta):
    unit = phi_norms()
    n = BumpFunction(eta).norms()
    assert n.c0 == pytest.approx(1.0)
    d = BumpFunction(eta).jet(np.linspace(-eta, eta, 8193), 2)
    assert np.max(np.abs(d[1])) <= unit.c1 / eta * (1 + 1e-9)
    assert np.max(np.abs(d[2])) <= unit.c2 / eta ** 2 * (1 + 1e-9)


# -- surface_metric_from_curvature ----------------------------------------

def test_flat_strip():
    g = surface_metric_from_curvature(ZERO, t_points=17)
    assert np.all(g.components()["g00"] == 1.0)


def test_unit_curvature_closed_form():
    g = surface_metric_from_curvature(1.0, t_points=17, x_points=1281)
    i = int(np.argmin(np.abs(g.x - 0.1)))
    assert g.x[i] == pytest.approx(0.1, abs=1e-15)
    assert np.max(np.abs(g.components()["g00"][:, i] - 0.990033)) <= 1e-6
    assert np.max(np.abs(g.components()["g00"][:, i] - np.cos(0.1) ** 2)) <= 1e-8


def test_chart_invariants():
    g = surface_metric_from_curvature(3.0 * sin_fn(2 * np.pi), t_points=65)
    c = g.components()
    assert np.all(c["g00"] > 0.0)
    v, dx = g.fermi_defect()
    assert v <= 1e-9 and dx <= 1e-9
    assert np.max(np.abs(g.gauss_curvature() - 3.0 * np.sin(2 * np.pi * g.t)[:, None])) <= 1e-6


def test_x_dependent_curvature():
    K = StripCurvature.from_callables(lambda t, x: 1.0 + x ** 2 * np.cos(t))
    g = surface_metric_from_curvature(K, t_points=33)
    T, X = np.meshgrid(g.t, g.x, indexing="ij")
    assert np.max(np.abs(g.gauss_curvature() - (1.0 + X ** 2 * np.cos(T)))) <= 1e-6


def test_axis_curvature_is_ktilde():
    sf = SurfaceFranks(sin_fn(2 * np.pi), 0.01)
    # k~_3 is large enough to focus transverse geodesics before |x| = 0.5
    for kt in sf.ktildes:
        g = surface_metric_from_curvature(kt, t_points=257, x_points=65, x_max=0.1)
        assert np.max(np.abs(g.axis_curvature() - kt(g.t))) <= 1e-7


def test_focal_point():
    with pytest.raises(FocalPoint):
        surface_metric_from_curvature(40.0, t_points=9)


def test_export_csv(tmp_path):
    g = surface_metric_from_curvature(1.0, t_points=5, x_points=9)
    path = tmp_path / "chart.csv"
    g.export_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,x,g00,dg00_dx,d2g00_dx2"
    assert len(lines) == 1 + 5 * 9
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 2], g.components()["g00"].ravel())


# -- interpolate_metric ---------------------------------------------------

def test_interpolate_same_metric():
    g = surface_metric_from_curvature(sin_fn(2 * np.pi), t_points=33)
    gt = interpolate_metric(g, g, 0.1)
    for k in g.G:
        assert np.array_equal(gt.G[k], g.G[k])


@pytest.mark.parametrize("eta", ETAS)
def test_support_exactness(eta):
    g = surface_metric_from_curvature(ZERO, t_points=33)
    gh = surface_metric_from_curvature(0.01, t_points=33)
    gt = interpolate_metric(g, gh, eta)
    out = np.abs(g.x) >= eta
    for k in g.G:
        assert np.all(gt.G[k][:, out] == g.G[k][:, out])
    inner = np.abs(g.x) <= eta / 4
    assert np.all(gt.G["G"][:, inner] == gh.G["G"][:, inner])
    assert np.all(gt.components()["g00"] > 0.0)


def test_interpolated_axis_curvature():
    sf = SurfaceFranks(ZERO, 0.01)
    kt = sf.ktildes[1]
    g = surface_metric_from_curvature(ZERO, t_points=257)
    gh = surface_metric_from_curvature(kt, t_points=257)
    for eta in ETAS:
        gt = interpolate_metric(g, gh, eta)
        assert np.max(np.abs(gt.axis_curvature() - kt(g.t))) <= 1e-6


def test_width_exceeds_chart():
    g = surface_metric_from_curvature(ZERO, t_points=9)
    with pytest.raises(WidthExceedsChart):
        interpolate_metric(g, g, 0.6)


# -- delta estimates ------------------------------------------------------

def test_delta_estimates_zero():
    g = surface_metric_from_curvature(sin_fn(2 * np.pi), t_points=33)
    assert delta_estimates(g, g, 0.1) == (0.0, 0.0, 0.0)


def test_delta_estimates_bump(flat_pair):
    g, gh = flat_pair
    c0, c1, c2 = delta_estimates(g, gh, 0.1)
    assert c0 <= 2e-4 and c1 <= 2e-3 and c2 <= 2e-2


def test_delta_halving_eta(flat_pair):
    g, gh = flat_pair
    a = delta_estimates(g, gh, 0.1)[0]
    b = delta_estimates(g, gh, 0.05)[0]
    assert b / a == pytest.approx(0.25, rel=0.3)


def test_delta_slopes(flat_pair):
    g, gh = flat_pair
    c = np.array([delta_estimates(g, gh, eta) for eta in ETAS])
    s0 = np.polyfit(np.log(ETAS), np.log(c[:, 0]), 1)[0]
    s1 = np.polyfit(np.log(ETAS), np.log(c[:, 1]), 1)[0]
    assert abs(s0 - 2.0) <= 0.3
    assert abs(s1 - 1.0) <= 0.3


def test_estimate_violated():
    K = StripCurvature.from_callables(lambda t, x: 0.01 + 10.0 * x ** 2)
    g = surface_metric_from_curvature(ZERO, t_points=9)
    gh = surface_metric_from_curvature(K, t_points=9)
    with pytest.raises(EstimateViolated) as err:
        delta_estimates(g, gh, 0.5)
    assert set(err.value.margins) == {"c0", "c1", "c2"}
    assert min(err.value.margins.values()) < 0


# -- c2_distance ----------------------------------------------------------

def test_c2_distance_zero():
    g = surface_metric_from_curvature(ZERO, t_points=9)
    assert c2_distance(interpolate_metric(g, g, 0.1), g) == 0.0


def test_c2_eta_independence(flat_pair):
    g, gh = flat_pair
    d = [c2_distance(interpolate_metric(g, gh, eta), g) for eta in ETAS]
    assert max(d) / min(d) <= 2.0
    assert max(d) <= c2_bound(g, gh)


def test_c2_bound_s1():
    k = sin_fn(2 * np.pi)
    sf = SurfaceFranks(k, 0.01)
    g = surface_metric_from_curvature(k, t_points=513, x_points=513)
    gh = surface_metric_from_curvature(sf.ktildes[0], t_points=513, x_points=513)
    bound = 8 * phi_norms().c2 * axis_curvature_change(g, gh)
    assert c2_bound(g, gh) == pytest.approx(bound)
    for eta in ETAS:
        assert c2_distance(interpolate_metric(g, gh, eta), g) <= bound


# -- higher dimension -----------------------------------------------------

def test_highdim_second_difference_identity():
    R = MatrixCurve.diagonal([SmoothFn.constant(1.0), sin_fn(3.0)])
    dR = MatrixCurve.constant([[0.02, -0.01], [-0.01, 0.03]]) * hump()
    g = QuadraticFermiMetric(R)
    g1 = highdim_metric_from_delta_r(g, dR)
    for t in (0.2, 0.5, 0.7):
        H = hessian_on_axis(g1, t)
        assert np.max(np.abs(H + 2 * (R(t) + dR(t)))) <= 1e-6


def test_highdim_interpolation_on_axis():
    R = MatrixCurve.constant(np.diag([1.0, -1.0]))
    g = QuadraticFermiMetric(R)
    dR = MatrixCurve.constant([[0.0, 0.05], [0.05, 0.0]])
    gt = interpolate_highdim(g, highdim_metric_from_delta_r(g, dR), 0.1)
    H = hessian_on_axis(gt, 0.3, h=1e-3)
    assert np.max(np.abs(H + 2 * (R(0.3) + dR(0.3)))) <= 1e-6
    far = np.array([0.2, 0.0])
    assert gt.g00(0.3, far) == g.g00(0.3, far)
