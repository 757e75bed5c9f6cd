"""Built-in example structures, each returned as a :class:`PartialJacobiStructure`."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

from .expr import ZERO, ONE, Chart, Expr, Var, add, as_expr, mul
from .multivector import MultivectorField, lie_derivative
from .structure import PartialJacobiStructure, StructureError


def _from_bivector(chart: Chart, coeffs: dict, reeb: Sequence, name: str, metadata=None) -> PartialJacobiStructure:
    """Full-flat structure from upper-triangular bivector coefficients ``{(i, j): expr}``."""
    n = chart.dim
    rows = [[ZERO] * n for _ in range(n)]
    for (i, j), c in coeffs.items():
        c = as_expr(c)
        if i > j:
            i, j, c = j, i, mul(-1, c)
        rows[i][j] = add(rows[i][j], c)
        rows[j][i] = mul(-1, rows[i][j])
    s = PartialJacobiStructure(
        chart, tuple(range(n)), tuple(map(tuple, rows)), tuple(as_expr(e) for e in reeb), name, metadata or {}
    )
    s.validate()
    return s


def _standard(m: int) -> PartialJacobiStructure:
    # m = 0 is the one-point-fibre case (Λ = 0, E = ∂0) used by the direct-limit levels
    chart = Chart.standard(2 * m + 1)
    coeffs = {}
    for i in range(1, m + 1):
        coeffs[(0, m + i)] = Var(m + i)
        coeffs[(i, m + i)] = -1
    return _from_bivector(chart, coeffs, [ONE] + [ZERO] * (2 * m), f"standard-{m}")


def standard_jacobi(m: int) -> PartialJacobiStructure:
    """``E = ∂0``, ``Λ = Σ (x^{m+i} ∂0 − ∂i) ∧ ∂_{m+i}`` on ``R^{2m+1}``."""
    if m < 1:
        raise ValueError("standard Jacobi structure needs m >= 1")
    return _standard(m)


def contact_chart(m: int) -> Chart:
    return Chart(("t",) + tuple(f"q{i}" for i in range(1, m + 1)) + tuple(f"p{i}" for i in range(1, m + 1)))


def contact_canonical(m: int) -> PartialJacobiStructure:
    """Canonical contact chart ``(t, q, p)``: ``Λ = Σ (∂q_i + p_i ∂t) ∧ ∂p_i``, ``E = ∂t``."""
    if m < 1:
        raise ValueError("contact structure needs m >= 1")
    chart = contact_chart(m)
    coeffs = {}
    for i in range(1, m + 1):
        coeffs[(i, m + i)] = 1
        coeffs[(0, m + i)] = Var(m + i)
    return _from_bivector(chart, coeffs, [ONE] + [ZERO] * (2 * m), f"contact-{m}")


def one_jet_chart(n: int) -> Chart:
    return Chart(tuple(f"x{i}" for i in range(1, n + 1)) + ("u",) + tuple(f"u{i}" for i in range(1, n + 1)))


def one_jet(n: int) -> PartialJacobiStructure:
    """Contact Jacobi structure of ``θ = du − Σ u_i dx^i`` on ``J^1(R^n, R)``.

    ``Λ = Σ (∂x^i + u_i ∂u) ∧ ∂u_i`` and ``E = ∂u``.  The constant tensor
    ``Σ ∂x^i ∧ ∂u_i`` alone does not satisfy ``[Λ, Λ] = 2E ∧ Λ``.
    """
    if n < 1:
        raise ValueError("1-jet structure needs n >= 1")
    chart = one_jet_chart(n)
    ucol = n
    coeffs = {}
    for i in range(n):
        coeffs[(i, n + 1 + i)] = 1
        coeffs[(ucol, n + 1 + i)] = Var(n + 1 + i)
    reeb = [ZERO] * n + [ONE] + [ZERO] * n
    return _from_bivector(chart, coeffs, reeb, f"one-jet-{n}")


@dataclass(frozen=True)
class StructureConstants:
    """Lie algebra structure constants ``c[i][j][k] = c_{ij}^k``, checked at construction."""

    c: tuple

    def __post_init__(self):
        c = tuple(tuple(tuple(Fraction(v) for v in row) for row in plane) for plane in self.c)
        n = len(c)
        if any(len(plane) != n or any(len(row) != n for row in plane) for plane in c):
            raise StructureError("structure constants must be an n x n x n array")
        object.__setattr__(self, "c", c)
        for i, j, k in product(range(n), repeat=3):
            if c[j][i][k] != -c[i][j][k]:
                raise StructureError(
                    f"structure constants not antisymmetric at ({i}, {j}, {k})", {"indices": [i, j, k]}
                )
        for i, j, k, l in product(range(n), repeat=4):
            total = sum(
                c[i][j][m] * c[m][k][l] + c[j][k][m] * c[m][i][l] + c[k][i][m] * c[m][j][l] for m in range(n)
            )
            if total != 0:
                raise StructureError(
                    f"structure constants violate the Jacobi identity at ({i}, {j}, {k}, {l})",
                    {"indices": [i, j, k, l]},
                )

    @property
    def dim(self) -> int:
        return len(self.c)

    @classmethod
    def so3(cls) -> "StructureConstants":
        eps = [[[0] * 3 for _ in range(3)] for _ in range(3)]
        for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            eps[i][j][k] = 1
            eps[j][i][k] = -1
        return cls(eps)

    @classmethod
    def abelian(cls, n: int) -> "StructureConstants":
        return cls([[[0] * n for _ in range(n)] for _ in range(n)])


def lie_poisson(sc: StructureConstants, name: str = "lie-poisson") -> PartialJacobiStructure:
    """Linear Poisson structure ``Λ^{ij} = Σ_k c_{ij}^k x_k`` on the dual of a Lie algebra."""
    n = sc.dim
    chart = Chart.standard(n)
    coeffs = {}
    for i in range(n):
        for j in range(i + 1, n):
            coeffs[(i, j)] = add(*(mul(sc.c[i][j][k], Var(k)) for k in range(n)))
    return _from_bivector(chart, coeffs, [ZERO] * n, name)


def so3_dual() -> PartialJacobiStructure:
    return lie_poisson(StructureConstants.so3(), "so3-dual")


def _invert(matrix: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(matrix)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise StructureError("flat map is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def cosymplectic_chart(m: int) -> Chart:
    return Chart(tuple(f"q{i}" for i in range(1, m + 1)) + tuple(f"p{i}" for i in range(1, m + 1)) + ("t",))


def cosymplectic_forms(m: int) -> tuple[list[list[Fraction]], list[Fraction]]:
    """``Ω = Σ dq^i ∧ dp_i`` as an antisymmetric matrix and ``η = dt`` on ``T*R^m × R``."""
    n = 2 * m + 1
    omega = [[Fraction(0)] * n for _ in range(n)]
    for i in range(m):
        omega[i][m + i] = Fraction(1)
        omega[m + i][i] = Fraction(-1)
    eta = [Fraction(0)] * (n - 1) + [Fraction(1)]
    return omega, eta


def cosymplectic_extended_cotangent(m: int) -> PartialJacobiStructure:
    """Poisson tensor ``P(α, β) = Ω(♭⁻¹α, ♭⁻¹β)`` with Reeb field ``E = ♭⁻¹(η)`` kept as metadata.

    ``♭(V) = i_V Ω + (i_V η) η``; the data are constant so ``♭`` is inverted once, exactly.
    """
    if m < 1:
        raise ValueError("cosymplectic example needs m >= 1")
    omega, eta = cosymplectic_forms(m)
    n = 2 * m + 1
    # flat[a][b] = (♭(∂_b))_a = Ω_{ba} + η_b η_a
    flat = [[omega[b][a] + eta[b] * eta[a] for b in range(n)] for a in range(n)]
    inv = _invert(flat)
    # ♭⁻¹(dx^a) is column a of inv
    E = [sum(inv[r][a] * eta[a] for a in range(n)) for r in range(n)]
    coeffs = {}
    for a in range(n):
        for b in range(a + 1, n):
            va = [inv[r][a] for r in range(n)]
            vb = [inv[r][b] for r in range(n)]
            val = sum(va[r] * omega[r][s] * vb[s] for r in range(n) for s in range(n))
            if val:
                coeffs[(a, b)] = val
    chart = cosymplectic_chart(m)
    reeb = tuple(as_expr(v) for v in E)
    s = _from_bivector(chart, coeffs, [ZERO] * n, f"cosymplectic-{m}", {"distinguished_field": reeb})
    return s


def distinguished_field(s: PartialJacobiStructure) -> MultivectorField | None:
    comps = s.metadata.get("distinguished_field")
    if comps is None:
        return None
    return MultivectorField.vector(s.chart, list(comps))


def cosymplectic_checks(m: int) -> dict[str, bool]:
    """``i_E Ω = 0``, ``i_E η = 1`` and ``L_E P = 0`` for the extended cotangent example."""
    s = cosymplectic_extended_cotangent(m)
    omega, eta = cosymplectic_forms(m)
    E = [c.value for c in s.metadata["distinguished_field"]]
    n = s.dim
    i_omega = [sum(E[r] * omega[r][b] for r in range(n)) for b in range(n)]
    i_eta = sum(E[r] * eta[r] for r in range(n))
    lie = lie_derivative(MultivectorField.vector(s.chart, s.metadata["distinguished_field"]), s.bivector())
    return {
        "i_E Omega = 0": all(v == 0 for v in i_omega),
        "i_E eta = 1": i_eta == 1,
        "L_E P = 0": lie.is_zero() is None,
    }


def contact_to_jet_map(m: int) -> list[Expr]:
    """Components of the identification ``u ↦ t``, ``x^i ↦ q^i``, ``u_i ↦ p_i``.

    Source is the contact chart ``(t, q, p)``; the target is the 1-jet chart
    ``(x, u, u_i)``, so the list gives each jet coordinate in contact
    coordinates.
    """
    return [Var(i) for i in range(1, m + 1)] + [Var(0)] + [Var(m + i) for i in range(1, m + 1)]


CATALOG = {
    "standard": standard_jacobi,
    "contact": contact_canonical,
    "one-jet": one_jet,
    "so3": lambda: so3_dual(),
    "cosymplectic": cosymplectic_extended_cotangent,
}


def build(name: str, *params: int) -> PartialJacobiStructure:
    if name not in CATALOG:
        raise KeyError(f"unknown catalog structure {name!r}; choose from {sorted(CATALOG)}")
    return CATALOG[name](*params)


def catalog_structures() -> list[PartialJacobiStructure]:
    """The structures of the compatibility suite."""
    out = [standard_jacobi(m) for m in range(1, 5)]
    out += [contact_canonical(m) for m in range(1, 4)]
    out += [one_jet(n) for n in range(1, 4)]
    out.append(so3_dual())
    out += [cosymplectic_extended_cotangent(m) for m in range(1, 3)]
    return out
