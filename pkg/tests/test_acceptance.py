"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (lines appear in the ``-v`` log) or directly with
``python3 tests/test_acceptance.py``.  Two criteria are known to be
unattainable as literally stated and are marked ``xfail(strict=True)``:
they must keep failing, and the reason is given alongside.
"""

import time

import numpy as np
import pytest

from jacobi_kit.catalog import StructureConstants, catalog_structures, so3_dual, standard_jacobi
from jacobi_kit.chardist import DistributionProbe, char_rank, conserved_drift, flow, grid, involutivity_check
from jacobi_kit.config import RunConfig
from jacobi_kit.expr import Sampled, Var, add, check_zero, div, expr_is_zero, mul, neg, parse_expr
from jacobi_kit.homogenize import poissonize, verify_homogeneous
from jacobi_kit.laws import schouten_suite
from jacobi_kit.limits import CylindricalFunction, cyl_bracket, cyl_promote, inclusion_check, projection_check
from jacobi_kit.sampling import random_polynomial, rng_for
from jacobi_kit.structure import (
    PartialJacobiStructure,
    StructureError,
    conformal_bracket_residual,
    random_members,
    verify_structure,
)

SCHOUTEN_REASON = (
    "the derivation-defined bracket obeys right Leibniz and a sign-twisted decomposable formula; "
    "the standard forms fail when degrees are even"
)
INCLUSION_REASON = (
    "no injection R^(2m+1) -> R^(2m+3) is a Jacobi map between the standard structures; "
    "the projection realising cylindrical promotion is"
)


def emit(name, passed, details=()):
    lines = [f"{'PASS' if passed else 'FAIL'}: {name}"]
    lines += [f"    {'pass' if ok else 'FAIL'}: {text}" for text, ok in details]
    print("\n".join(lines))
    return passed


@pytest.fixture
def show(capsys):
    def _show(*args):
        with capsys.disabled():
            print()
            return emit(*args)

    return _show


# -- criteria ---------------------------------------------------------------


def compatibility():
    t0 = time.perf_counter()
    details = []
    for s in catalog_structures():
        rep = verify_structure(s)
        exact = all(c.backend == "exact" for c in rep.checks)
        details.append((f"{s.name}: four checks, exact backend", rep.passed and exact))
    elapsed = time.perf_counter() - t0
    details.append((f"runtime {elapsed:.1f} s < 60 s", elapsed < 60))
    return "compatibility suite", all(ok for _, ok in details), details


def schouten_laws():
    rep = schouten_suite(instances=200, seed=0, max_dim=5, max_degree=3, coeff_degree=2)
    details = [(f"{c.name} ({c.detail or c.backend})", c.passed) for c in rep.checks]
    return "Schouten law suite (200 instances per law, exact)", rep.passed, details


def poissonization():
    cfg = RunConfig(samples=200, tol=1e-9, trials=50)
    details = []
    for s in catalog_structures():
        rep = verify_homogeneous(poissonize(s), cfg)
        exact = all(c.backend.startswith("exact") for c in rep.checks[:2])
        details.append((f"{s.name}: [L^,L^]=0, L_Z L^=-L^, hat morphism", rep.passed and exact))
    return "Poissonization suite", all(ok for _, ok in details), details


def morphism_and_conformal():
    details = []
    cfg = RunConfig(trials=50)
    for s in catalog_structures():
        c = verify_structure(s, cfg)["Hamiltonian morphism [X_f,X_g] = X_{f,g}"]
        details.append((f"{s.name}: [X_f,X_g] = X_(f,g), 50 pairs", c.passed and c.backend == "exact"))
    backend = Sampled(200, 0, 1e-9)
    for s in catalog_structures():
        phis = [parse_expr("2", s.chart), add(1, div(mul(Var(1), Var(1)), 2))]
        rng = rng_for(0, 40)
        ok = True
        for phi in phis:
            for _ in range(10):
                f, g = random_members(s, rng, 2, 3)
                ok &= bool(expr_is_zero(conformal_bracket_residual(s, phi, f, g), backend, s.dim))
        details.append((f"{s.name}: conformal identity, phi in (2, 1 + x_1^2/2)", ok))
    return "morphism and conformal suite", all(ok for _, ok in details), details


def negative_controls():
    details = []
    c = [[[0] * 3 for _ in range(3)] for _ in range(3)]
    c[0][1][1], c[1][0][1] = 1, -1
    c[1][2][0], c[2][1][0] = 1, -1
    try:
        StructureConstants(c)
        details.append(("non-Jacobi structure constants rejected", False))
    except StructureError as exc:
        details.append((f"non-Jacobi structure constants rejected, witness {exc.witness['indices']}", True))

    s = standard_jacobi(1)
    bad = PartialJacobiStructure(s.chart, s.flat, s.lambda_sharp, (s.reeb[0], Var(1), s.reeb[2]), "perturbed")
    vjp2 = verify_structure(bad)["VJp2 L_E L = 0"]
    details.append((f"perturbed Reeb field fails VJp2, witness {vjp2.witness}", not vjp2.passed and bool(vjp2.witness)))

    hat = verify_homogeneous(poissonize(s, scaled=False), RunConfig(trials=5))["[L^,L^] = 0"]
    details.append((f"unscaled Poissonization fails [L^,L^]=0, witness {hat.witness}", not hat.passed))
    return "negative controls", all(ok for _, ok in details), details


def _random_cyl(rng, level):
    return CylindricalFunction(level, random_polynomial(rng, list(range(2 * level + 1)), 3))


def direct_limit():
    rng = rng_for(0, 60)
    ok = True
    for _ in range(100):
        m1, m2 = (int(v) for v in rng.integers(0, 4, 2))
        f, g = _random_cyl(rng, m1), _random_cyl(rng, m2)
        h = cyl_bracket(f, g)
        # compare at the top level 3, which every level embeds into
        up = cyl_bracket(cyl_promote(f, 3), cyl_promote(g, 3))
        ok &= bool(check_zero(add(up.expr, neg(cyl_promote(h, 3).expr))))
    details = [("promote-then-bracket = bracket-then-promote, 100 pairs, levels <= 3", ok)]
    for m in (1, 2):
        rep = inclusion_check(m)
        details.append((f"jacobi_map_check on the inclusion R^{2 * m + 1} -> R^{2 * m + 3}", rep.passed))
    for m in (1, 2):
        # reported for context, not part of the criterion
        details.append((f"(context) projection R^{2 * m + 3} -> R^{2 * m + 1} is a Jacobi map",
                        projection_check(m).passed))
    passed = all(ok for text, ok in details if not text.startswith("(context)"))
    return "direct-limit consistency", passed, details


def dynamics_distribution():
    so3 = so3_dual()
    C = parse_expr("x0^2 + x1^2 + x2^2", so3.chart)
    traj = flow(so3, Var(0), [0.6, 0.8, 0.0], 10.0, 1e-3)
    drift = conserved_drift(traj, C)
    details = [(f"so(3)* Casimir drift {drift:.2e} <= 1e-8 (T=10, h=1e-3)", drift <= 1e-8)]
    std = standard_jacobi(1)
    ranks = {char_rank(DistributionProbe(std, p)) for p in grid(3)}
    details.append((f"standard R^3 ranks on the 5^3 grid: {sorted(ranks)}", ranks == {3}))
    off = [char_rank(DistributionProbe(so3, p)) for p in ([1, 0, 0], [0.3, -0.4, 0.2], [0, 0, 2])]
    at0 = char_rank(DistributionProbe(so3, [0, 0, 0]))
    details.append((f"so(3)* rank {off} off the origin, {at0} at the origin", off == [2, 2, 2] and at0 == 0))
    rng = np.random.default_rng(70)
    for s in catalog_structures():
        ok = all(involutivity_check(DistributionProbe(s, rng.uniform(-1, 1, s.dim))).passed for _ in range(3))
        details.append((f"{s.name}: involutivity on all coordinate pairs at 3 points", ok))
    return "dynamics and distribution", all(ok for _, ok in details), details


CRITERIA = [
    compatibility,
    schouten_laws,
    poissonization,
    morphism_and_conformal,
    negative_controls,
    direct_limit,
    dynamics_distribution,
]


# -- pytest entry points ----------------------------------------------------


def test_compatibility(show):
    assert show(*compatibility())


@pytest.mark.xfail(strict=True, reason=SCHOUTEN_REASON)
def test_schouten_laws(show):
    assert show(*schouten_laws())


def test_schouten_laws_that_hold():
    rep = schouten_suite(instances=200, seed=0)
    held = {c.name: c.passed for c in rep.checks}
    assert held["graded antisymmetry"] and held["generalized Jacobi identity"]
    assert held["[fT,fT] = f^2[T,T] + 2f[T,f]^T"]
    assert not held["graded Leibniz"] and not held["decomposable expansion"]


def test_poissonization(show):
    assert show(*poissonization())


def test_morphism_and_conformal(show):
    assert show(*morphism_and_conformal())


def test_negative_controls(show):
    assert show(*negative_controls())


@pytest.mark.xfail(strict=True, reason=INCLUSION_REASON)
def test_direct_limit(show):
    assert show(*direct_limit())


def test_direct_limit_level_independence():
    _, _, details = direct_limit()
    assert details[0][1]
    assert all(ok for text, ok in details if text.startswith("(context)"))


def test_dynamics_distribution(show):
    assert show(*dynamics_distribution())


if __name__ == "__main__":
    results = [emit(*criterion()) for criterion in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
