import numpy as np
import pytest
from conftest import MINUS_ONE, ONE, ZERO, positive_a_corpus
from scipy.integrate import quad

from franks.cli import seeded_targets
from franks.errors import ConstraintViolation, OutOfBall, PositivityViolation
from franks.jacobi import dp_from_curvature, fundamental_solution
from franks.numkit import SmoothFn, cos_fn, grid_norms, hump, sin_fn, sup_norm
from franks.numkit.symplectic import SymplecticMap
from franks.surface import (
    FAMILIES,
    PsiSpec,
    SurfaceFranks,
    build_psi,
    dphi_matrix,
    gram_condition,
    localized_replacement,
    perturbed_curvature,
    phi_map,
    psi_constant,
    published_constant,
    realize_target_sp1,
    sp1_coords,
    sp1_from_coords,
)

T = np.linspace(0.0, 1.0, 4097)
SIN = sin_fn(2 * np.pi)


# -- build_psi ------------------------------------------------------------

@pytest.mark.parametrize("family", FAMILIES)
def test_psi_homogeneous_in_eps(family):
    p1 = build_psi(PsiSpec(family, 0.01))
    p2 = build_psi(PsiSpec(family, 0.02))
    for m in range(3):
        assert np.max(np.abs(p2.jet(T, 2)[m] - 2 * p1.jet(T, 2)[m])) <= 1e-12 * max(1.0, np.max(np.abs(p2.jet(T, 2)[m])))


def test_psi_s1_constraints():
    psi = build_psi(PsiSpec("S1", 0.01))
    assert abs(psi.jet(1.0, 1)[1] - 0.01) <= 1e-12
    assert psi(0.75) == 0.0


def test_psi_s2_constraints():
    psi = build_psi(PsiSpec("S2", 0.01))
    assert abs(psi(1.0) - 0.01) <= 1e-12
    assert abs(psi.jet(1.0, 1)[1]) <= 1e-12


def test_psi_s3_constraints():
    psi = build_psi(PsiSpec("S3", 0.01))
    assert abs(quad(lambda t: float(psi(t)), 0.0, 1.0, points=[0.25, 0.5], epsrel=1e-13, limit=200)[0]
               - 0.01) <= 1e-10
    outside = np.concatenate([np.linspace(0.0, 0.25, 100), np.linspace(0.5, 1.0, 100)])
    assert np.all(psi(outside) == 0.0)
    assert np.all(psi(np.linspace(0.25, 0.5, 101)[1:-1]) > 0.0)


@pytest.mark.parametrize("family", FAMILIES)
def test_psi_c2_bound(family):
    eps = 0.013
    psi = build_psi(PsiSpec(family, eps))
    assert grid_norms(psi, 4097, (0.0, 1.0)).c2 <= psi_constant(family) * eps * (1 + 1e-9)
    assert psi_constant(family) <= published_constant()


def test_psi_constraint_violation():
    with pytest.raises(ConstraintViolation) as err:
        build_psi(PsiSpec("S3", 0.01, constraints=(("endpoint-value", 0.5),)))
    assert err.value.constraint == "endpoint-value"


# -- perturbed_curvature --------------------------------------------------

def test_zero_psi_keeps_curvature():
    a = fundamental_solution(SIN).a
    kt = perturbed_curvature(a, SmoothFn.constant(0.0))
    t = np.linspace(0.01, 0.99, 99)
    assert np.max(np.abs(kt(t) - SIN(t))) <= 1e-7


def test_flat_s2_round_trip():
    a = fundamental_solution(ZERO).a
    psi = build_psi(PsiSpec("S2", 0.01))
    kt = perturbed_curvature(a, psi)
    assert np.max(np.abs(kt(T) - psi.jet(T, 2)[2] / (1.0 - psi(T)))) <= 1e-12
    at = fundamental_solution(kt).a
    assert np.max(np.abs(at(T) - (1.0 - psi(T)))) <= 1e-7


def test_flat_s3_moves_b():
    sf = SurfaceFranks(ZERO, 0.01)
    shift = sf.coords([0, 0, 1])[2] - sf.coords([0, 0, 0])[2]
    assert shift >= 0.01 * 0.95


def test_positivity_violation():
    a = fundamental_solution(ZERO).a
    with pytest.raises(PositivityViolation):
        perturbed_curvature(a, build_psi(PsiSpec("S2", 1.5)))


def test_round_trip_corpus():
    corpus = positive_a_corpus(7, 10, 4.0, 0.2)
    worst = 0.0
    for k in corpus:
        for eps in (0.01, 0.02):
            sf = SurfaceFranks(k, eps)
            for psi, kt in zip(sf.psis, sf.ktildes):
                at = fundamental_solution(kt).a
                worst = max(worst, np.max(np.abs(at(T) - (sf.a(T) - psi(T)))))
    assert worst <= 1e-7


# -- phi_map and entry isolation ------------------------------------------

def test_phi_at_zero_is_dp():
    assert np.max(np.abs(phi_map(SIN, [0, 0, 0]).matrix - dp_from_curvature(SIN).matrix)) <= 1e-12


def test_s1_and_s2_entry_shifts():
    # the shifted field is a - psi, so the targeted entries move by -eps
    for eps in (0.005, 0.01, 0.02):
        sf = SurfaceFranks(SIN, eps)
        base = sf.coords([0, 0, 0])
        d1 = sf.coords([1, 0, 0]) - base
        d2 = sf.coords([0, 1, 0]) - base
        assert abs(d1[0] + eps) <= 1e-6
        assert abs(d2[1] + eps) <= 1e-6
        assert abs(d2[0]) <= 1e-6


def test_s1_moves_a_by_endpoint_value():
    # psi_1 > 0 on (3/4, 1] with psi_1'(1) = eps forces psi_1(1) > 0; the a(1)
    # shift is exactly -psi_1(1)
    for eps in (0.005, 0.01, 0.02):
        sf = SurfaceFranks(SIN, eps)
        d = sf.coords([1, 0, 0]) - sf.coords([0, 0, 0])
        assert abs(d[1] + sf.psis[0](1.0)) <= 1e-9
        assert sf.psis[0](1.0) == pytest.approx(eps / 4, rel=1e-12)


def test_s3_isolation():
    sf = SurfaceFranks(cos_fn(2 * np.pi), 0.01)
    d = sf.coords([0, 0, 1]) - sf.coords([0, 0, 0])
    a_lb, a_ub = sf.a_bounds()
    assert abs(d[0]) <= 1e-6 and abs(d[1]) <= 1e-6
    assert d[2] >= 0.95 * 0.01 * a_lb / a_ub ** 3


def test_gram_independence():
    for k in (ZERO, SIN):
        assert gram_condition(SurfaceFranks(k, 0.01)) < 1e6


# -- dphi ------------------------------------------------------------------

def test_dphi_flat():
    D = dphi_matrix(ZERO, 0.01)
    assert np.abs(np.diag(D)) == pytest.approx([0.01, 0.01, np.abs(D[2, 2])])
    assert abs(D[0, 0]) >= 0.9 * 0.01 and abs(D[1, 1]) >= 0.9 * 0.01
    assert D[2, 2] >= 0.01 * 0.9
    assert max(abs(D[0, 1]), abs(D[0, 2]), abs(D[1, 2])) <= 1e-3
    assert max(abs(D[0, 1]), abs(D[0, 2]), abs(D[1, 2])) <= 0.1 * 0.01


def test_dphi_scaling():
    eps = 0.005
    D1 = dphi_matrix(ZERO, eps)
    D2 = dphi_matrix(ZERO, 2 * eps)
    big = np.abs(D1) > 1e-6 * eps
    ratio = D2[big] / (2 * D1[big])
    assert np.all(np.abs(ratio - 1.0) <= 0.1)
    assert np.all(np.abs(D2[~big]) <= 1e-6 * eps)


def test_dphi_determinant():
    for eps in (0.005, 0.01, 0.02):
        assert np.linalg.det(dphi_matrix(SIN, eps)) > 0.0


# -- realization ----------------------------------------------------------

def test_realize_dp_itself():
    sf = SurfaceFranks(SIN, 0.01)
    res = sf.realize(sf.dp())
    assert np.all(res.coefficients == 0.0) and res.residual == 0.0


def test_realize_flat_shear_target():
    dp_ = 1e-4
    target = SymplecticMap([[1.0, 1.0], [dp_, 1.0 + dp_]])
    res = realize_target_sp1(ZERO, target, 0.01)
    assert np.max(np.abs(res.achieved.matrix - target.matrix)) <= 1e-9
    # S2's tangent a'(1) entry is O(eps^2 ||psi_2'||^2), a few percent of eps here
    assert abs(res.coefficients[0]) == pytest.approx(dp_ / 0.01, rel=0.15)


def test_realize_random_targets():
    k = cos_fn(2 * np.pi)
    sf = SurfaceFranks(k, 0.01)
    for target in seeded_targets(3, 20, 5e-4, 1, sf.dp()):
        res = sf.realize(target)
        assert res.residual <= 1e-9
        assert res.curvature_change_c0 <= sf.curvature_bound(np.max(np.abs(res.coefficients)))


def test_realize_left_inverse():
    # C_3 eps must be well below 1 for s -> Phi(s) to be one-to-one on |s| <= 0.5
    sf = SurfaceFranks(SIN, 1e-3)
    rng = np.random.default_rng(2)
    for _ in range(5):
        s = rng.uniform(-1.0, 1.0, 3)
        s *= 0.5 / np.max(np.abs(s))
        res = sf.realize(sf.phi(s), enforce_ball=False)
        assert np.max(np.abs(res.coefficients - s)) <= 1e-7


def test_realize_out_of_ball():
    sf = SurfaceFranks(SIN, 0.01)
    far = sp1_from_coords(sp1_coords(sf.dp()) + [0.1, 0.0, 0.0])
    with pytest.raises(OutOfBall):
        sf.realize(far)


def test_realize_rejects_non_symplectic():
    with pytest.raises(ValueError):
        realize_target_sp1(ZERO, np.array([[2.0, 0.0], [0.0, 1.0]]))


def test_delta_est_uniform():
    corpus = positive_a_corpus(7, 10, 4.0, 0.2)
    d = [SurfaceFranks(k, 0.01).delta_est() for k in corpus]
    assert max(d) / min(d) < 3.0


# -- localized replacement ------------------------------------------------

def local_bump(height, measure, center=0.5):
    return height * hump().reparam(1.0 / measure, 0.5 - center / measure)


def test_replacement_identity():
    rep = localized_replacement(SIN, SIN, 0.01)
    assert rep.distance == 0.0


def test_replacement_small_support():
    r1 = localized_replacement(ZERO, ZERO + local_bump(1.0, 0.01), 0.01)
    r2 = localized_replacement(ZERO, ZERO + local_bump(1.0, 0.005), 0.005)
    assert r1.distance <= 0.05
    assert r1.distance <= r1.bound
    assert r2.distance / r1.distance == pytest.approx(0.5, rel=0.3)


def test_replacement_prediction():
    for k in (ZERO, SIN, ONE, MINUS_ONE):
        rep = localized_replacement(k, k + local_bump(0.1, 0.05, 0.4), 0.05)
        assert np.max(np.abs(rep.predicted_column - rep.measured_column)) <= 1e-5


def test_bump_support_measure():
    b = local_bump(1.0, 0.01)
    t = np.linspace(0.0, 1.0, 100001)
    nz = t[b(t) != 0.0]
    assert nz.max() - nz.min() <= 0.01
    assert sup_norm(b, 100001, (0.0, 1.0)) == pytest.approx(1.0)
