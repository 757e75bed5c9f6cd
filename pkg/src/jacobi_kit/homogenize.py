"""Poissonization of a partial Jacobi structure.

On ``M̂ = M × R`` with the new coordinate ``t`` last, ``Λ̂ = e^{−t}(Λ + ∂t ∧ E)``
is a homogeneous partial Poisson structure for the homothety field ``Z = ∂t``,
and ``f ↦ f̂ = e^t f`` intertwines the brackets.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import RunConfig
from .expr import ONE, ZERO, Chart, Expr, Var, add, as_expr, exp, expr_is_zero, mul, neg, substitute
from .multivector import MultivectorField, lie_derivative, schouten
from .report import Check, VerificationReport
from .sampling import rng_for
from .structure import (
    PartialJacobiStructure,
    _field_check,
    _pair_witness,
    _require_member,
    jacobi_bracket,
    random_members,
)


def extended_chart(chart: Chart) -> Chart:
    """``chart`` plus a last coordinate named ``t`` (``tau``, ``tau1``, … if taken)."""
    taken = set(chart.names)
    for name in ("t", "tau", *(f"tau{k}" for k in range(1, len(taken) + 2))):
        if name not in taken:
            return Chart(chart.names + (name,))
    raise AssertionError("unreachable")


@dataclass(frozen=True, eq=False)
class HomogeneousPoissonStructure:
    base: PartialJacobiStructure
    structure: PartialJacobiStructure
    scaled: bool = True

    @property
    def chart(self) -> Chart:
        return self.structure.chart

    @property
    def t_index(self) -> int:
        return self.base.dim

    @property
    def bivector(self) -> MultivectorField:
        return self.structure.bivector()

    @property
    def homothety(self) -> MultivectorField:
        """``Z = ∂t``."""
        return MultivectorField.basis(self.chart, self.t_index)


def poissonize(s: PartialJacobiStructure, scaled: bool = True) -> HomogeneousPoissonStructure:
    """Build ``Λ̂`` on the extended chart with flat set ``S ∪ {t}``.

    ``scaled=False`` drops the ``e^{−t}`` factor (``h ≡ 1``); the result is a
    negative control, not a Poisson structure in general.
    """
    n = s.dim
    chart = extended_chart(s.chart)
    t = Var(n)
    factor = exp(neg(t)) if scaled else ONE
    flat = s.flat + (n,)
    rows = []
    for i in range(n):
        row = [mul(factor, e) for e in s.lambda_sharp[i]]
        # Λ̂(dx^i, dt) = −e^{−t} E^i
        row.append(neg(mul(factor, s.reeb[i])))
        rows.append(tuple(row))
    # Λ̂(dt, dx^j) = e^{−t} E^j
    rows.append(tuple(mul(factor, s.reeb[j]) for j in s.flat) + (ZERO,))
    name = f"{s.name}^" if s.name else ""
    hat = PartialJacobiStructure(chart, flat, tuple(rows), (ZERO,) * (n + 1), name)
    return HomogeneousPoissonStructure(s, hat, scaled)


def hat_lift(f, base: PartialJacobiStructure) -> Expr:
    """``f̂ = e^t (f ∘ π)``; indices are unchanged because ``t`` comes last."""
    f = as_expr(f)
    _require_member(f, base, "f")
    return mul(exp(Var(base.dim)), f)


def _hat_morphism_check(hps: HomogeneousPoissonStructure, cfg: RunConfig) -> Check:
    name = "hat morphism {f^,g^} = ({f,g})^"
    base, hat = hps.base, hps.structure
    rng = rng_for(cfg.seed, 6)
    for _ in range(cfg.trials):
        f, g = random_members(base, rng, 2, cfg.deg)
        lhs = jacobi_bracket(hat, hat_lift(f, base), hat_lift(g, base))
        rhs = hat_lift(jacobi_bracket(base, f, g), base)
        res = expr_is_zero(add(lhs, neg(rhs)), cfg.sampled, hat.dim)
        if not res:
            return Check(name, False, res.backend, _pair_witness(base, (f, g), res))
    return Check(name, True, "sampled", detail=f"{cfg.trials} random pairs at {cfg.samples} points")


def verify_homogeneous(hps: HomogeneousPoissonStructure, cfg: RunConfig | None = None) -> VerificationReport:
    """``[Λ̂, Λ̂] = 0``, ``L_Z Λ̂ + Λ̂ = 0`` and the hat morphism on random pairs."""
    cfg = cfg or RunConfig()
    report = VerificationReport(f"homogeneous {hps.structure.name or 'structure'}")
    L = hps.bivector
    hint = "exact-factored" if hps.scaled else "exact"
    report.add(_field_check("[L^,L^] = 0", schouten(L, L), cfg, hint))
    report.add(_field_check("L_Z L^ + L^ = 0", lie_derivative(hps.homothety, L) + L, cfg, hint))
    report.add(_hat_morphism_check(hps, cfg))
    return report


def base_bracket_at_t0(hps: HomogeneousPoissonStructure, f, g) -> Expr:
    """``e^{−t}{f̂, ĝ}_Λ̂`` with ``t = 0``; equals the base bracket."""
    base = hps.base
    b = jacobi_bracket(hps.structure, hat_lift(f, base), hat_lift(g, base))
    values = [Var(i) for i in range(base.dim)] + [ZERO]
    return substitute(b, values)


def lift_homogeneity_residual(f, base: PartialJacobiStructure) -> Expr:
    """``Z(f̂) − f̂``."""
    fh = hat_lift(f, base)
    Z = MultivectorField.basis(extended_chart(base.chart), base.dim)
    return add(lie_derivative(Z, MultivectorField.scalar(Z.chart, fh)).scalar_value(), neg(fh))


__all__ = [
    "HomogeneousPoissonStructure",
    "base_bracket_at_t0",
    "extended_chart",
    "hat_lift",
    "lift_homogeneity_residual",
    "poissonize",
    "verify_homogeneous",
]
