import numpy as np
import pytest

from jacobi_kit.catalog import catalog_structures, contact_canonical, so3_dual, standard_jacobi
from jacobi_kit.config import RunConfig
from jacobi_kit.expr import (
    ONE,
    ZERO,
    Factored,
    Var,
    add,
    check_zero,
    differentiate,
    evaluate,
    exp,
    expr_is_zero,
    mul,
    neg,
    parse_expr,
)
from jacobi_kit.homogenize import (
    base_bracket_at_t0,
    extended_chart,
    hat_lift,
    lift_homogeneity_residual,
    poissonize,
    verify_homogeneous,
)
from jacobi_kit.sampling import random_polynomial, rng_for
from jacobi_kit.structure import MembershipError, jacobi_bracket, random_members

ET = exp(neg(Var(3)))


def same(a, b):
    return expr_is_zero(add(a, neg(b)), Factored())


def test_standard_hat_coefficients():
    hps = poissonize(standard_jacobi(1))
    H = hps.structure
    assert H.chart.names == ("x0", "x1", "x2", "t")
    assert H.flat == (0, 1, 2, 3)
    assert same(H.lam(0, 2), mul(Var(2), ET))
    assert same(H.lam(0, 3), neg(ET))
    assert same(H.lam(1, 2), neg(ET))
    assert same(H.lam(3, 0), ET)
    for i, j in [(0, 1), (1, 3), (2, 3)]:
        assert same(H.lam(i, j), ZERO)
    assert all(e == ZERO for e in H.reeb)


def test_poisson_input_only_rescales():
    s = so3_dual()
    H = poissonize(s).structure
    t = Var(3)
    for i in range(3):
        assert same(H.lam(i, 3), ZERO)
        for j in range(3):
            assert same(H.lam(i, j), mul(exp(neg(t)), s.lam(i, j)))


def test_zero_structure_stays_zero():
    from jacobi_kit.catalog import StructureConstants, lie_poisson

    H = poissonize(lie_poisson(StructureConstants.abelian(2))).structure
    assert all(same(e, ZERO) for row in H.lambda_sharp for e in row)


def test_extended_chart_avoids_name_clash():
    assert extended_chart(contact_canonical(1).chart).names[-1] == "tau"
    from jacobi_kit.expr import Chart

    assert extended_chart(Chart(("t", "tau"))).names[-1] == "tau1"


@pytest.mark.parametrize("s", catalog_structures(), ids=lambda s: s.name)
def test_catalog_poissonizations_verify(s):
    rep = verify_homogeneous(poissonize(s), RunConfig(trials=10))
    assert rep.passed, rep.to_text()
    assert rep["[L^,L^] = 0"].backend.startswith("exact")


def test_unscaled_control_fails():
    rep = verify_homogeneous(poissonize(standard_jacobi(1), scaled=False), RunConfig(trials=10))
    assert not rep["[L^,L^] = 0"].passed
    assert rep["[L^,L^] = 0"].witness


def test_hat_lift_of_one():
    s = standard_jacobi(1)
    assert hat_lift(ONE, s) == exp(Var(3))


def test_hat_lift_rejects_non_members():
    from jacobi_kit.catalog import StructureConstants, lie_poisson
    from jacobi_kit.structure import PartialJacobiStructure

    base = lie_poisson(StructureConstants.abelian(2))
    s = PartialJacobiStructure(base.chart, (0,), ((ZERO,), (ZERO,)), (ZERO, ZERO))
    with pytest.raises(MembershipError):
        hat_lift(Var(1), s)


def test_lift_is_homogeneous():
    s = standard_jacobi(1)
    rng = rng_for(3)
    for _ in range(10):
        f = random_polynomial(rng, [0, 1, 2], 3)
        assert check_zero(lift_homogeneity_residual(f, s))


def test_differential_of_lift_at_sample_points():
    # d f^ = e^t (df + f dt): compare partial derivatives numerically
    s = standard_jacobi(1)
    f = parse_expr("x0*x2 - x1^2 + 3", s.chart)
    fh = hat_lift(f, s)
    X = np.random.default_rng(0).uniform(-1, 1, (20, 4))
    for i in range(3):
        lhs = evaluate(differentiate(fh, i), X)
        rhs = np.exp(X[:, 3]) * evaluate(differentiate(f, i), X[:, :3])
        assert np.allclose(lhs, rhs, rtol=1e-12)
    lhs = evaluate(differentiate(fh, 3), X)
    assert np.allclose(lhs, np.exp(X[:, 3]) * evaluate(f, X[:, :3]), rtol=1e-12)


def test_base_bracket_recovered_at_t0():
    s = standard_jacobi(1)
    hps = poissonize(s)
    rng = rng_for(8)
    for _ in range(10):
        f, g = random_members(s, rng, 2, 2)
        got = base_bracket_at_t0(hps, f, g)
        assert check_zero(add(got, neg(jacobi_bracket(s, f, g))))


def test_hat_morphism_exact_on_coordinates():
    s = standard_jacobi(1)
    H = poissonize(s).structure
    for i in range(3):
        for j in range(3):
            lhs = jacobi_bracket(H, hat_lift(Var(i), s), hat_lift(Var(j), s))
            rhs = hat_lift(jacobi_bracket(s, Var(i), Var(j)), s)
            assert same(lhs, rhs)
