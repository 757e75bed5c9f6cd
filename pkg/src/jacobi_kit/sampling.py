"""Seeded random test data: polynomials in a chosen set of coordinates."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from .expr import Expr, PolyForm, from_poly


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, *stream])


def random_rational(rng: np.random.Generator) -> Fraction:
    num = int(rng.integers(1, 4)) * (1 if rng.random() < 0.5 else -1)
    return Fraction(num, int(rng.integers(1, 4)))


def random_polynomial(
    rng: np.random.Generator, variables: Sequence[int], max_degree: int, terms: int = 3
) -> Expr:
    """Sum of ``terms`` random monomials of total degree ``<= max_degree`` in ``variables``."""
    out = PolyForm()
    if not variables:
        return from_poly(PolyForm.constant(random_rational(rng)))
    for _ in range(terms):
        d = int(rng.integers(0, max_degree + 1))
        mono = [0] * (max(variables) + 1)
        for _ in range(d):
            mono[int(rng.choice(variables))] += 1
        while mono and mono[-1] == 0:
            mono.pop()
        out = out + PolyForm({tuple(mono): random_rational(rng)})
    return from_poly(out)


def random_multivector(rng: np.random.Generator, chart, degree: int, coeff_degree: int = 2, terms: int = 3):
    """Random ``degree``-vector on ``chart`` with polynomial coefficients on a few index tuples."""
    from itertools import combinations

    from .multivector import MultivectorField

    n = chart.dim
    if degree > n:
        return MultivectorField(chart, degree)
    tuples = list(combinations(range(n), degree))
    picks = rng.choice(len(tuples), size=min(terms, len(tuples)), replace=False)
    coeffs = {tuples[int(k)]: random_polynomial(rng, list(range(n)), coeff_degree, 2) for k in picks}
    return MultivectorField(chart, degree, coeffs)
