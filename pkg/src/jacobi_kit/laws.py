"""Residuals of the Schouten bracket identities, and a seeded randomized suite over them."""

from __future__ import annotations

from .expr import Chart, check_zero, format_expr
from .multivector import MultivectorField, contract_df, lie_bracket, schouten, wedge, wedge_all
from .report import Check, VerificationReport
from .sampling import random_multivector, random_polynomial, rng_for


def _sgn(e: int) -> int:
    return -1 if e % 2 else 1


def _sum(*fields: MultivectorField) -> MultivectorField:
    """Sum that drops empty terms whose degree is off (``[f, g] = 0`` has no true degree)."""
    live = [F for F in fields if F.coeffs]
    if not live:
        return min(fields, key=lambda F: F.degree)
    out = live[0]
    for F in live[1:]:
        out = out + F
    return out


def antisymmetry_residual(P: MultivectorField, Q: MultivectorField) -> MultivectorField:
    """``[P, Q] + (−1)^{(k−1)(h−1)} [Q, P]``."""
    k, h = P.degree, Q.degree
    return _sum(schouten(P, Q), schouten(Q, P).scale(_sgn((k - 1) * (h - 1))))


def jacobi_residual(A: MultivectorField, B: MultivectorField, C: MultivectorField) -> MultivectorField:
    """Graded cyclic sum with degrees ``k, h, l`` of ``A, B, C``:

    ``(−1)^{(k−1)(l−1)}[A,[B,C]] + (−1)^{(h−1)(k−1)}[B,[C,A]] + (−1)^{(l−1)(h−1)}[C,[A,B]]``.
    """
    k, h, l = A.degree, B.degree, C.degree
    return _sum(
        schouten(A, schouten(B, C)).scale(_sgn((k - 1) * (l - 1))),
        schouten(B, schouten(C, A)).scale(_sgn((h - 1) * (k - 1))),
        schouten(C, schouten(A, B)).scale(_sgn((l - 1) * (h - 1))),
    )


def leibniz_residual(P: MultivectorField, Q: MultivectorField, R: MultivectorField) -> MultivectorField:
    """``[P, Q∧R] − [P,Q]∧R − (−1)^{(k−1)q} Q∧[P,R]``."""
    k, q = P.degree, Q.degree
    return _sum(
        schouten(P, wedge(Q, R)), -wedge(schouten(P, Q), R), wedge(Q, schouten(P, R)).scale(-_sgn((k - 1) * q))
    )


def leibniz_literal_residual(P: MultivectorField, Q: MultivectorField, R: MultivectorField) -> MultivectorField:
    """The variant with ``P`` as the leading factor of the second summand."""
    k, q = P.degree, Q.degree
    return _sum(
        schouten(P, wedge(Q, R)), -wedge(schouten(P, Q), R), wedge(P, schouten(Q, R)).scale(-_sgn((k - 1) * q))
    )


def leibniz_right_residual(P: MultivectorField, Q: MultivectorField, R: MultivectorField) -> MultivectorField:
    """``[P, Q∧R] − (−1)^{(k−1)r}[P,Q]∧R − Q∧[P,R]``, the rule the derivation bracket obeys."""
    k, r = P.degree, R.degree
    return _sum(schouten(P, wedge(Q, R)), wedge(schouten(P, Q), R).scale(-_sgn((k - 1) * r)), -wedge(Q, schouten(P, R)))


def decomposable_residual(
    Xs: list[MultivectorField], Ys: list[MultivectorField], signed: bool = False
) -> MultivectorField:
    """``[X_1∧…∧X_k, Y_1∧…∧Y_h] − Σ (−1)^{i+j} [X_i,Y_j]∧X_1…X̂_i…X_k∧Y_1…Ŷ_j…Y_h``.

    With ``signed`` the sum is multiplied by ``(−1)^{(k−1)(h−1)}``.
    """
    chart = Xs[0].chart
    lhs = schouten(wedge_all(Xs, chart), wedge_all(Ys, chart))
    rhs = MultivectorField(chart, lhs.degree)
    for i, X in enumerate(Xs):
        for j, Y in enumerate(Ys):
            rest = Xs[:i] + Xs[i + 1:] + Ys[:j] + Ys[j + 1:]
            term = wedge(lie_bracket(X, Y), wedge_all(rest, chart))
            rhs = rhs + term.scale(_sgn(i + j))
    if signed:
        rhs = rhs.scale(_sgn((len(Xs) - 1) * (len(Ys) - 1)))
    return lhs - rhs


def ffT_residual(f, T: MultivectorField) -> MultivectorField:
    """``[fT, fT] − f²[T,T] − 2f [T,f]∧T``."""
    fT = T.scale(f)
    return schouten(fT, fT) - schouten(T, T).scale(f * f) - wedge(contract_df(T, f), T).scale(2 * f)


def degree_bound_holds(P: MultivectorField, Q: MultivectorField) -> bool:
    R = schouten(P, Q)
    return R.degree <= P.chart.dim or not R.coeffs


def _first_failure(field: MultivectorField):
    for idx, c in sorted(field.coeffs.items()):
        res = check_zero(c, dim=field.chart.dim)
        if not res:
            return idx, c, res
    return None


def schouten_suite(instances: int = 200, seed: int = 0, max_dim: int = 5, max_degree: int = 3,
                   coeff_degree: int = 2) -> VerificationReport:
    """Randomized instances of each law over charts with ``n <= max_dim``."""
    laws = {
        "graded antisymmetry": (2, antisymmetry_residual),
        "generalized Jacobi identity": (3, jacobi_residual),
        "graded Leibniz": (3, leibniz_residual),
        "decomposable expansion": (None, decomposable_residual),
        "[fT,fT] = f^2[T,T] + 2f[T,f]^T": (None, ffT_residual),
    }
    report = VerificationReport("Schouten laws")
    for stream, (name, (arity, law)) in enumerate(laws.items()):
        rng = rng_for(seed, 100 + stream)
        backends = set()
        failure = None
        for trial in range(instances):
            n = int(rng.integers(1, max_dim + 1))
            chart = Chart.standard(n)
            if name == "decomposable expansion":
                k, h = int(rng.integers(1, max_degree + 1)), int(rng.integers(1, max_degree + 1))
                Xs = [random_multivector(rng, chart, 1, coeff_degree) for _ in range(k)]
                Ys = [random_multivector(rng, chart, 1, coeff_degree) for _ in range(h)]
                R = law(Xs, Ys)
            elif arity is None:
                f = random_polynomial(rng, list(range(n)), coeff_degree, 2)
                R = law(f, random_multivector(rng, chart, 2, coeff_degree))
            else:
                args = [random_multivector(rng, chart, int(rng.integers(0, max_degree + 1)), coeff_degree)
                        for _ in range(arity)]
                R = law(*args)
            for c in R.coeffs.values():
                backends.add(check_zero(c, dim=n).backend)
            bad = _first_failure(R)
            if bad is not None:
                idx, c, res = bad
                failure = {"instance": trial, "dimension": n, "index": list(idx),
                           "residual": format_expr(c, chart)}
                break
        backend = "+".join(sorted(backends)) or "exact"
        report.add(Check(name, failure is None, backend, failure, f"{instances} instances"))
    return report


__all__ = [
    "antisymmetry_residual",
    "decomposable_residual",
    "degree_bound_holds",
    "ffT_residual",
    "jacobi_residual",
    "leibniz_literal_residual",
    "leibniz_residual",
    "leibniz_right_residual",
    "schouten_suite",
]
