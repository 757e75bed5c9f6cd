from fractions import Fraction

import pytest

from jacobi_kit.catalog import (
    CATALOG,
    StructureConstants,
    build,
    catalog_structures,
    contact_canonical,
    contact_to_jet_map,
    cosymplectic_checks,
    cosymplectic_extended_cotangent,
    distinguished_field,
    lie_poisson,
    one_jet,
    so3_dual,
    standard_jacobi,
)
from jacobi_kit.expr import ONE, ZERO, Exact, Var, add, check_zero, differentiate, expr_is_zero, mul, neg, parse_expr
from jacobi_kit.sampling import random_polynomial, rng_for
from jacobi_kit.structure import StructureError, jacobi_bracket, jacobi_map_check, verify_structure


def nonzero_upper(s):
    return {(i, j): s.lam(i, j) for i in range(s.dim) for j in range(i + 1, s.dim) if s.lam(i, j) != ZERO}


def test_standard_m1_coefficients():
    s = standard_jacobi(1)
    assert s.dim == 3 and s.full_flat
    assert nonzero_upper(s) == {(0, 2): Var(2), (1, 2): neg(ONE)}
    assert s.reeb == (ONE, ZERO, ZERO)


def test_standard_m2_coefficients():
    assert nonzero_upper(standard_jacobi(2)) == {
        (0, 3): Var(3),
        (0, 4): Var(4),
        (1, 3): neg(ONE),
        (2, 4): neg(ONE),
    }


@pytest.mark.parametrize("ctor", [standard_jacobi, contact_canonical, one_jet, cosymplectic_extended_cotangent])
def test_level_zero_rejected(ctor):
    with pytest.raises(ValueError):
        ctor(0)


def test_contact_brackets():
    s = contact_canonical(1)
    t, q, p = Var(0), Var(1), Var(2)
    assert jacobi_bracket(s, q, p) == ONE
    # Λ(dt, dp) = p and t·E(p) − p·E(t) = −p
    assert s.lam(0, 2) == p
    assert expr_is_zero(jacobi_bracket(s, t, p))
    f = parse_expr("t*q1^2 + p1", s.chart)
    assert expr_is_zero(jacobi_bracket(s, f, f))


# -- 1-jets -----------------------------------------------------------------


def constant_tensor_bracket(n, f, g):
    """Bracket of Λ = Σ ∂x^i ∧ ∂u_i, E = ∂u on J^1(R^n, R): Σ (f_x g_ui − g_x f_ui) + f g_u − g f_u."""
    u = n
    terms = []
    for i in range(n):
        ui = n + 1 + i
        terms.append(mul(differentiate(f, i), differentiate(g, ui)))
        terms.append(neg(mul(differentiate(g, i), differentiate(f, ui))))
    terms.append(mul(f, differentiate(g, u)))
    terms.append(neg(mul(g, differentiate(f, u))))
    return add(*terms)


def test_one_jet_examples():
    s = one_jet(1)
    x, u, u1 = Var(0), Var(1), Var(2)
    assert jacobi_bracket(s, x, u1) == ONE
    assert expr_is_zero(jacobi_bracket(s, u, u))
    rng = rng_for(21)
    for _ in range(10):
        g = random_polynomial(rng, [0, 1, 2], 3)
        assert expr_is_zero(add(jacobi_bracket(s, ONE, g), neg(differentiate(g, 1))))


def test_one_jet_agrees_with_constant_tensor_when_paired_with_one():
    s = one_jet(2)
    for k in range(s.dim):
        f = Var(k)
        assert expr_is_zero(add(jacobi_bracket(s, ONE, f), neg(constant_tensor_bracket(2, ONE, f))))


def test_constant_tensor_bracket_is_not_jacobi():
    # cyclic sum on (x, u1, u) for the constant tensor alone
    x, u, u1 = Var(0), Var(1), Var(2)

    def b(f, g):
        return constant_tensor_bracket(1, f, g)

    cyc = add(b(x, b(u1, u)), b(u1, b(u, x)), b(u, b(x, u1)))
    assert check_zero(add(cyc, neg(ONE)), Exact())


def test_contact_and_jet_are_identified():
    for m in (1, 2):
        rep = jacobi_map_check(contact_canonical(m), one_jet(m), contact_to_jet_map(m), 20)
        assert rep.passed, rep.to_text()


# -- Lie-Poisson ------------------------------------------------------------


def test_so3_brackets():
    s = so3_dual()
    x, y, z = Var(0), Var(1), Var(2)
    assert jacobi_bracket(s, x, y) == z
    assert jacobi_bracket(s, y, z) == x
    assert jacobi_bracket(s, z, x) == y
    assert s.reeb == (ZERO,) * 3


def test_abelian_bracket_is_zero():
    s = lie_poisson(StructureConstants.abelian(3))
    rng = rng_for(4)
    for _ in range(5):
        f, g = (random_polynomial(rng, [0, 1, 2], 3) for _ in range(2))
        assert expr_is_zero(jacobi_bracket(s, f, g))


def test_structure_constants_violating_jacobi_rejected():
    # [e0, e1] = e1, [e1, e2] = e0, [e0, e2] = 0 breaks the Jacobi identity
    c = [[[0] * 3 for _ in range(3)] for _ in range(3)]
    c[0][1][1], c[1][0][1] = 1, -1
    c[1][2][0], c[2][1][0] = 1, -1
    with pytest.raises(StructureError) as info:
        StructureConstants(c)
    assert len(info.value.witness["indices"]) == 4


def test_structure_constants_must_be_antisymmetric():
    c = [[[0] * 2 for _ in range(2)] for _ in range(2)]
    c[0][1][0] = 1
    with pytest.raises(StructureError):
        StructureConstants(c)


def test_structure_constants_stored_exactly():
    sc = StructureConstants.so3()
    assert sc.c[0][1][2] == Fraction(1) and sc.dim == 3


# -- cosymplectic -----------------------------------------------------------


def test_cosymplectic_m1():
    s = cosymplectic_extended_cotangent(1)
    assert s.chart.names == ("q1", "p1", "t")
    assert nonzero_upper(s) == {(0, 1): ONE}
    E = distinguished_field(s)
    assert E.components() == [ZERO, ZERO, ONE]
    assert s.reeb == (ZERO,) * 3


@pytest.mark.parametrize("m", [1, 2])
def test_cosymplectic_characterization(m):
    assert all(cosymplectic_checks(m).values())


def test_no_distinguished_field_elsewhere():
    assert distinguished_field(standard_jacobi(1)) is None


# -- registry ---------------------------------------------------------------


def test_build_by_name():
    assert build("standard", 2).dim == 5
    assert build("so3").name == "so3-dual"
    assert set(CATALOG) == {"standard", "contact", "one-jet", "so3", "cosymplectic"}
    with pytest.raises(KeyError):
        build("nope")


def test_catalog_structures_verify():
    structures = catalog_structures()
    assert len(structures) == 13
    for s in structures:
        rep = verify_structure(s)
        assert rep.passed, rep.to_text()
        assert all(c.backend == "exact" for c in rep.checks[:2])
