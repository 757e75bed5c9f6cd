"""Antisymmetric contravariant tensor fields and the Schouten bracket.

A k-vector field is stored as coefficients on strictly increasing index
tuples, ``P = Σ_I P^I ∂_{I_1}∧…∧∂_{I_k}``, with ``P(dx^{I_1},…,dx^{I_k}) = P^I``.
The Schouten bracket is obtained from the alternating-derivation commutator
``[D_P, D_Q] = D_P∘D_Q − (−1)^{(k−1)(l−1)} D_Q∘D_P`` evaluated on coordinate
functions, which fixes every sign without a separate coordinate formula.
"""

from __future__ import annotations

from itertools import combinations, permutations
from typing import Iterable, Mapping, Sequence

from .expr import (
    ZERO,
    Chart,
    Expr,
    Sampled,
    add,
    as_expr,
    check_zero,
    differentiate,
    is_literal_zero,
    mul,
    neg,
)


def _perm_sign(seq: Sequence[int]) -> int:
    sign = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def sort_with_sign(idx: Sequence[int]) -> tuple[int, tuple]:
    """Sign of the sorting permutation and the sorted tuple (sign 0 on repeats)."""
    if len(set(idx)) != len(idx):
        return 0, ()
    return _perm_sign(idx), tuple(sorted(idx))


class MultivectorField:
    __slots__ = ("chart", "degree", "coeffs")

    def __init__(self, chart: Chart, degree: int, coeffs: Mapping[tuple, Expr] | None = None):
        if degree < 0:
            raise ValueError("degree must be non-negative")
        self.chart = chart
        self.degree = degree
        clean = {}
        for idx, c in (coeffs or {}).items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise ValueError(f"index {idx} does not have length {degree}")
            if any(b <= a for a, b in zip(idx, idx[1:])) or any(i < 0 or i >= chart.dim for i in idx):
                raise ValueError(f"index {idx} is not strictly increasing within the chart")
            c = as_expr(c)
            if not is_literal_zero(c):
                clean[idx] = c
        self.coeffs = clean

    @classmethod
    def scalar(cls, chart: Chart, f) -> "MultivectorField":
        return cls(chart, 0, {(): as_expr(f)})

    @classmethod
    def vector(cls, chart: Chart, components: Sequence) -> "MultivectorField":
        if len(components) != chart.dim:
            raise ValueError("vector field needs one component per coordinate")
        return cls(chart, 1, {(i,): c for i, c in enumerate(components)})

    @classmethod
    def basis(cls, chart: Chart, *idx: int) -> "MultivectorField":
        sign, key = sort_with_sign(idx)
        if sign == 0:
            return cls(chart, len(idx))
        return cls(chart, len(idx), {key: sign})

    @classmethod
    def zero(cls, chart: Chart, degree: int) -> "MultivectorField":
        return cls(chart, degree)

    def __repr__(self):
        from .expr import format_expr

        body = ", ".join(f"{k}: {format_expr(v, self.chart)}" for k, v in sorted(self.coeffs.items()))
        return f"MultivectorField(deg={self.degree}, {{{body}}})"

    def __getitem__(self, idx) -> Expr:
        """Component at an arbitrary index tuple, antisymmetrically extended."""
        if isinstance(idx, int):
            idx = (idx,)
        sign, key = sort_with_sign(idx)
        if sign == 0:
            return ZERO
        c = self.coeffs.get(key, ZERO)
        return c if sign > 0 else neg(c)

    def components(self) -> list[Expr]:
        if self.degree != 1:
            raise ValueError("components() is only defined for vector fields")
        return [self.coeffs.get((i,), ZERO) for i in range(self.chart.dim)]

    def scalar_value(self) -> Expr:
        if self.degree != 0:
            raise ValueError("not a degree-0 field")
        return self.coeffs.get((), ZERO)

    def _check(self, other: "MultivectorField"):
        if self.chart != other.chart:
            raise ValueError("multivector fields live on different charts")

    def __add__(self, other: "MultivectorField") -> "MultivectorField":
        self._check(other)
        if self.degree != other.degree:
            raise ValueError("cannot add fields of different degree")
        keys = set(self.coeffs) | set(other.coeffs)
        return MultivectorField(
            self.chart, self.degree, {k: add(self.coeffs.get(k, ZERO), other.coeffs.get(k, ZERO)) for k in keys}
        )

    def __neg__(self) -> "MultivectorField":
        return self.scale(-1)

    def __sub__(self, other: "MultivectorField") -> "MultivectorField":
        return self + (-other)

    def scale(self, f) -> "MultivectorField":
        f = as_expr(f)
        return MultivectorField(self.chart, self.degree, {k: mul(f, v) for k, v in self.coeffs.items()})

    def map_coeffs(self, fn) -> "MultivectorField":
        return MultivectorField(self.chart, self.degree, {k: fn(v) for k, v in self.coeffs.items()})

    def is_zero(self, sampled: Sampled | None = None):
        """First failing coefficient as ``(index, ZeroResult)``, or ``None`` if all vanish."""
        for idx in sorted(self.coeffs):
            res = check_zero(self.coeffs[idx], sampled, self.chart.dim)
            if not res:
                return idx, res
        return None


def _same_chart(fields: Iterable[MultivectorField]) -> Chart:
    fields = list(fields)
    chart = fields[0].chart
    for f in fields[1:]:
        if f.chart != chart:
            raise ValueError("multivector fields live on different charts")
    return chart


def mv_apply(P: MultivectorField, fs: Sequence) -> Expr:
    """``P(df_1, …, df_k)`` as an expression."""
    if len(fs) != P.degree:
        raise ValueError(f"degree-{P.degree} field needs {P.degree} arguments")
    fs = [as_expr(f) for f in fs]
    if P.degree == 0:
        return P.scalar_value()
    grads = [[differentiate(f, i) for i in range(P.chart.dim)] for f in fs]
    terms = []
    for idx, c in P.coeffs.items():
        # determinant of the k×k block of partials, by permutation expansion
        for perm in permutations(range(P.degree)):
            factors = [grads[b][idx[perm[b]]] for b in range(P.degree)]
            if any(is_literal_zero(x) for x in factors):
                continue
            t = mul(c, *factors)
            terms.append(t if _perm_sign(perm) > 0 else neg(t))
    return add(*terms)


def wedge(P: MultivectorField, Q: MultivectorField) -> MultivectorField:
    chart = _same_chart((P, Q))
    k, l = P.degree, Q.degree
    out: dict = {}
    if k + l > chart.dim:
        return MultivectorField(chart, k + l)
    for I, a in P.coeffs.items():
        for J, b in Q.coeffs.items():
            sign, key = sort_with_sign(I + J)
            if sign == 0:
                continue
            t = mul(a, b)
            out.setdefault(key, []).append(t if sign > 0 else neg(t))
    return MultivectorField(chart, k + l, {key: add(*ts) for key, ts in out.items()})


def contract_df(P: MultivectorField, f) -> MultivectorField:
    """First-slot contraction ``(ι_{df} P)(α_2,…) = P(df, α_2, …)``; this is ``[P, f]``."""
    f = as_expr(f)
    chart = P.chart
    if P.degree == 0:
        return MultivectorField.scalar(chart, ZERO)
    grad = {i: differentiate(f, i) for i in f.free if i < chart.dim}
    grad = {i: g for i, g in grad.items() if not is_literal_zero(g)}
    out: dict = {}
    for idx, c in P.coeffs.items():
        for pos, i in enumerate(idx):
            if i not in grad:
                continue
            rest = idx[:pos] + idx[pos + 1:]
            t = mul(grad[i], c)
            out.setdefault(rest, []).append(t if pos % 2 == 0 else neg(t))
    return MultivectorField(chart, P.degree - 1, {key: add(*ts) for key, ts in out.items()})


def _shuffles(n: int, k: int):
    """(k, n−k)-shuffles of ``range(n)`` as ``(sign, first block, second block)``."""
    for first in combinations(range(n), k):
        second = tuple(i for i in range(n) if i not in first)
        yield _perm_sign(first + second), first, second


def _compose_on_coords(P: MultivectorField, Q: MultivectorField, I: tuple) -> Expr:
    """``(D_P ∘ D_Q)(x^{I_1}, …)`` on the coordinate functions ``x^i``, ``i ∈ I``."""
    k, l = P.degree, Q.degree
    terms = []
    for sign, first, second in _shuffles(len(I), l):
        inner = Q.coeffs.get(tuple(I[a] for a in first))
        if inner is None:
            continue
        rest = tuple(I[b] for b in second)
        # D_P(g, x^rest) = Σ_j ∂_j g · P(dx^j, dx^rest)
        for j in inner.free:
            if j >= P.chart.dim:
                continue
            outer = P[(j,) + rest]
            if is_literal_zero(outer):
                continue
            t = mul(differentiate(inner, j), outer)
            terms.append(t if sign > 0 else neg(t))
    return add(*terms)


def schouten(P: MultivectorField, Q: MultivectorField) -> MultivectorField:
    """Schouten bracket ``[P, Q]`` of degree ``k + l − 1``.

    Degree-0 arguments follow ``[P, f] = ι_{df}P``, ``[f, P] = (−1)^p [P, f]``
    and ``[f, g] = 0`` (returned as the zero scalar).
    """
    chart = _same_chart((P, Q))
    k, l = P.degree, Q.degree
    if k == 0 and l == 0:
        return MultivectorField.scalar(chart, ZERO)
    if l == 0:
        return contract_df(P, Q.scalar_value())
    if k == 0:
        R = contract_df(Q, P.scalar_value())
        return R if l % 2 == 0 else -R
    deg = k + l - 1
    if deg > chart.dim:
        return MultivectorField(chart, deg)
    sign = (-1) ** ((k - 1) * (l - 1))
    coeffs = {}
    for I in combinations(range(chart.dim), deg):
        a = _compose_on_coords(P, Q, I)
        b = _compose_on_coords(Q, P, I)
        coeffs[I] = add(a, neg(b)) if sign > 0 else add(a, b)
    return MultivectorField(chart, deg, coeffs)


def lie_derivative(X: MultivectorField, P: MultivectorField) -> MultivectorField:
    """``L_X P = [X, P]``; on functions this is ``X(f)``."""
    if X.degree != 1:
        raise ValueError("Lie derivative needs a vector field")
    return schouten(X, P)


def lie_bracket(X: MultivectorField, Y: MultivectorField) -> MultivectorField:
    """Classical bracket of vector fields from explicit components, ``XY − YX``."""
    chart = _same_chart((X, Y))
    xs, ys = X.components(), Y.components()
    comps = []
    for i in range(chart.dim):
        terms = []
        for j in range(chart.dim):
            terms.append(mul(xs[j], differentiate(ys[i], j)))
            terms.append(neg(mul(ys[j], differentiate(xs[i], j))))
        comps.append(add(*terms))
    return MultivectorField.vector(chart, comps)


def wedge_all(fields: Sequence[MultivectorField], chart: Chart) -> MultivectorField:
    out = MultivectorField.scalar(chart, 1)
    for f in fields:
        out = wedge(out, f)
    return out
