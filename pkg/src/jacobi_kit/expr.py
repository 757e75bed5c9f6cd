"""Closed-form scalar expressions over a coordinate chart.

Expressions are immutable trees.  Polynomial sub-results produced by the
arithmetic helpers are folded eagerly into a canonical :class:`PolyForm`
leaf, so computations on polynomial data stay polynomial and exact; anything
involving ``exp``, ``log``, ``sin``, ``cos`` or non-constant quotients stays
a tree and is compared by sampling.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import zip_longest
from typing import Iterable, Mapping, Sequence

import numpy as np

FUNCTIONS = ("exp", "log", "sin", "cos")


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class EvaluationError(ArithmeticError):
    """Raised when an expression is evaluated outside its domain."""

    def __init__(self, message: str, subexpr: "Expr"):
        super().__init__(f"{message}: {format_expr(subexpr)}")
        self.subexpr = subexpr


@dataclass(frozen=True)
class Chart:
    """Coordinate names of an open set, in index order."""

    names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if not self.names:
            raise ValueError("a chart needs at least one coordinate")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"coordinate names must be distinct: {self.names}")
        for name in self.names:
            if not _IDENT.fullmatch(name) or name in FUNCTIONS:
                raise ValueError(f"invalid coordinate name {name!r}")

    @classmethod
    def standard(cls, n: int, prefix: str = "x") -> "Chart":
        return cls(tuple(f"{prefix}{i}" for i in range(n)))

    @property
    def dim(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)


# ---------------------------------------------------------------------------
# canonical polynomials


def _mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    return tuple(x + y for x, y in zip_longest(a, b, fillvalue=0))


def _strip(mono: Iterable[int]) -> tuple:
    mono = list(mono)
    while mono and mono[-1] == 0:
        mono.pop()
    return tuple(mono)


class PolyForm:
    """Sparse polynomial with rational coefficients.

    Keys are exponent tuples with trailing zeros stripped, so two PolyForms
    are equal exactly when their term maps are equal.
    """

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[tuple, Fraction] | None = None):
        self.terms = {m: Fraction(c) for m, c in (terms or {}).items() if c != 0}
        self._hash = None

    @classmethod
    def constant(cls, c) -> "PolyForm":
        return cls({(): Fraction(c)})

    @classmethod
    def variable(cls, i: int) -> "PolyForm":
        return cls({(0,) * i + (1,): Fraction(1)})

    def __eq__(self, other):
        return isinstance(other, PolyForm) and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self):
        return f"PolyForm({format_expr(Poly(self))})"

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not m for m in self.terms)

    @property
    def constant_term(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    @property
    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def variables(self) -> frozenset:
        return frozenset(i for m in self.terms for i, e in enumerate(m) if e)

    def __add__(self, other: "PolyForm") -> "PolyForm":
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return _raw_poly(out)

    def __neg__(self) -> "PolyForm":
        return _raw_poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "PolyForm") -> "PolyForm":
        return self + (-other)

    def __mul__(self, other: "PolyForm") -> "PolyForm":
        if len(other.terms) == 1 and () in other.terms:
            return self.scale(other.terms[()])
        if len(self.terms) == 1 and () in self.terms:
            return other.scale(self.terms[()])
        out: dict = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                m = _mono_mul(ma, mb)
                out[m] = out.get(m, 0) + ca * cb
        return PolyForm(out)

    def scale(self, c) -> "PolyForm":
        if c == 0:
            return _raw_poly({})
        return _raw_poly({m: v * c for m, v in self.terms.items()})

    def __pow__(self, n: int) -> "PolyForm":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = PolyForm.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def diff(self, i: int) -> "PolyForm":
        out = {}
        for m, c in self.terms.items():
            if i < len(m) and m[i]:
                e = list(m)
                e[i] -= 1
                out[_strip(e)] = c * m[i]
        return _raw_poly(out)

    def reindex(self, mapping: Mapping[int, int]) -> "PolyForm":
        out: dict = {}
        for m, c in self.terms.items():
            e: list = []
            for i, k in enumerate(m):
                if k:
                    j = mapping[i]
                    if len(e) <= j:
                        e.extend([0] * (j + 1 - len(e)))
                    e[j] += k
            key = _strip(e)
            out[key] = out.get(key, 0) + c
        return PolyForm(out)

    def evaluate(self, X: np.ndarray, track: list | None = None) -> np.ndarray:
        total = np.zeros(X.shape[0])
        for m, c in self.terms.items():
            term = np.full(X.shape[0], float(c))
            for i, e in enumerate(m):
                if e:
                    term = term * X[:, i] ** e
            if track is not None:
                track[0] = np.maximum(track[0], np.abs(term))
            total = total + term
        return total

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda mc: (-sum(mc[0]), tuple(-e for e in mc[0])))


def _raw_poly(terms: dict) -> PolyForm:
    p = PolyForm.__new__(PolyForm)
    p.terms = terms
    p._hash = None
    return p


class _NotPolynomial:
    """Marker returned by :func:`poly_normalize` for non-polynomial input."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __bool__(self):
        return False

    def __repr__(self):
        return "NotPolynomial"


NotPolynomial = _NotPolynomial()


# ---------------------------------------------------------------------------
# expression nodes


class Expr:
    __slots__ = ("_free", "_hash")

    def __init__(self):
        self._free = None
        self._hash = None

    # arithmetic goes through the folding helpers below
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        return power(self, n)

    def __repr__(self):
        return f"Expr({format_expr(self)})"

    def __hash__(self):
        if self._hash is None:
            # polynomial leaves hash by value so that Var(0) == Poly(x0)
            p = _as_poly(self)
            self._hash = hash(("poly", p)) if p is not None else hash((type(self).__name__, self._key()))
        return self._hash

    def __eq__(self, other):
        if type(self) is type(other):
            return self._key() == other._key()
        if isinstance(other, Expr):
            p = _as_poly(self)
            return p is not None and p == _as_poly(other)
        return NotImplemented

    def _key(self):
        raise NotImplementedError

    @property
    def free(self) -> frozenset:
        """Indices of coordinates the expression syntactically depends on."""
        if self._free is None:
            self._free = self._compute_free()
        return self._free

    def _compute_free(self) -> frozenset:
        out = frozenset()
        for child in self.children():
            out |= child.free
        return out

    def children(self) -> tuple:
        return ()


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        super().__init__()
        self.value = Fraction(value)

    def _key(self):
        return self.value


class Var(Expr):
    __slots__ = ("index",)

    def __init__(self, index: int):
        super().__init__()
        if index < 0:
            raise ValueError("coordinate index must be non-negative")
        self.index = int(index)

    def _key(self):
        return self.index

    def _compute_free(self):
        return frozenset((self.index,))


class Poly(Expr):
    """Canonical polynomial leaf; produced by folding, never by the parser."""

    __slots__ = ("poly",)

    def __init__(self, poly: PolyForm):
        super().__init__()
        self.poly = poly

    def _key(self):
        return self.poly

    def _compute_free(self):
        return self.poly.variables()


class Add(Expr):
    __slots__ = ("args",)

    def __init__(self, args: Sequence[Expr]):
        super().__init__()
        flat = []
        for a in args:
            flat.extend(a.args if isinstance(a, Add) else (a,))
        self.args = tuple(flat)

    def _key(self):
        return self.args

    def children(self):
        return self.args


class Mul(Expr):
    __slots__ = ("args",)

    def __init__(self, args: Sequence[Expr]):
        super().__init__()
        flat = []
        for a in args:
            flat.extend(a.args if isinstance(a, Mul) else (a,))
        self.args = tuple(flat)

    def _key(self):
        return self.args

    def children(self):
        return self.args


class Pow(Expr):
    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent: int):
        super().__init__()
        self.base = base
        self.exponent = int(exponent)

    def _key(self):
        return (self.base, self.exponent)

    def children(self):
        return (self.base,)


class Div(Expr):
    __slots__ = ("num", "den")

    def __init__(self, num: Expr, den: Expr):
        super().__init__()
        self.num = num
        self.den = den

    def _key(self):
        return (self.num, self.den)

    def children(self):
        return (self.num, self.den)


class Func(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name: str, arg: Expr):
        super().__init__()
        if name not in FUNCTIONS:
            raise ValueError(f"unknown function {name!r}")
        self.name = name
        self.arg = arg

    def _key(self):
        return (self.name, self.arg)

    def children(self):
        return (self.arg,)


ZERO = Const(0)
ONE = Const(1)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, PolyForm):
        return from_poly(value)
    if isinstance(value, (int, Fraction)):
        return Const(value)
    if isinstance(value, float):
        return Const(Fraction(value))
    raise TypeError(f"cannot convert {type(value).__name__} to Expr")


def var(i: int) -> Expr:
    return Var(i)


def from_poly(p: PolyForm) -> Expr:
    if p.is_constant():
        return Const(p.constant_term)
    return Poly(p)


def _as_poly(e: Expr) -> PolyForm | None:
    if isinstance(e, Poly):
        return e.poly
    if isinstance(e, Const):
        return PolyForm.constant(e.value)
    if isinstance(e, Var):
        return PolyForm.variable(e.index)
    return None


def is_literal_zero(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 0


# ---------------------------------------------------------------------------
# folding arithmetic


def _split_term(t: Expr) -> tuple[PolyForm, tuple]:
    if isinstance(t, Mul):
        p = _as_poly(t.args[0])
        if p is not None:
            return p, t.args[1:]
        return PolyForm.constant(1), t.args
    return PolyForm.constant(1), (t,)


def add(*args: Expr) -> Expr:
    poly = PolyForm()
    groups: dict = {}
    for a in map(as_expr, args):
        for t in a.args if isinstance(a, Add) else (a,):
            p = _as_poly(t)
            if p is not None:
                poly = poly + p
                continue
            c, rest = _split_term(t)
            groups[rest] = groups.get(rest, PolyForm()) + c
    terms = [mul(from_poly(c), *rest) for rest, c in groups.items() if c]
    if not terms:
        return from_poly(poly)
    if poly:
        terms.append(from_poly(poly))
    return terms[0] if len(terms) == 1 else Add(terms)


def sub(a: Expr, b: Expr) -> Expr:
    return add(a, neg(b))


def neg(a: Expr) -> Expr:
    return mul(Const(-1), a)


def mul(*args: Expr) -> Expr:
    poly = PolyForm.constant(1)
    exp_arg = None
    rest = []
    for a in map(as_expr, args):
        for t in a.args if isinstance(a, Mul) else (a,):
            p = _as_poly(t)
            if p is not None:
                if p.is_zero():
                    return ZERO
                poly = poly * p
            elif isinstance(t, Func) and t.name == "exp":
                exp_arg = t.arg if exp_arg is None else add(exp_arg, t.arg)
            else:
                rest.append(t)
    if exp_arg is not None:
        e = func("exp", exp_arg)
        if e != ONE:
            rest.insert(0, e)
    if not rest:
        return from_poly(poly)
    if poly == PolyForm.constant(1):
        return rest[0] if len(rest) == 1 else Mul(rest)
    if len(rest) == 1 and isinstance(rest[0], Add):
        # distribute constants over sums so identical terms cancel in add()
        if poly.is_constant():
            return add(*(mul(from_poly(poly), t) for t in rest[0].args))
    return Mul([from_poly(poly)] + rest)


def div(a: Expr, b: Expr) -> Expr:
    a, b = as_expr(a), as_expr(b)
    pb = _as_poly(b)
    if pb is not None and pb.is_constant():
        if pb.is_zero():
            raise ZeroDivisionError("division by the zero constant")
        return mul(Const(1 / pb.constant_term), a)
    if is_literal_zero(a):
        return ZERO
    if isinstance(b, Func) and b.name == "exp":
        return mul(a, func("exp", neg(b.arg)))
    if a == b:
        return ONE
    return Div(a, b)


def power(a: Expr, n: int) -> Expr:
    if int(n) != n:
        raise ValueError("only integer exponents are supported")
    n = int(n)
    a = as_expr(a)
    if n == 0:
        return ONE
    if n == 1:
        return a
    p = _as_poly(a)
    if p is not None and n > 0:
        return from_poly(p ** n)
    if isinstance(a, Func) and a.name == "exp":
        return func("exp", mul(Const(n), a.arg))
    return Pow(a, n)


def func(name: str, a: Expr) -> Expr:
    if isinstance(a, Const):
        if name == "exp" and a.value == 0:
            return ONE
        if name == "log" and a.value == 1:
            return ZERO
        if name == "sin" and a.value == 0:
            return ZERO
        if name == "cos" and a.value == 0:
            return ONE
    return Func(name, a)


def exp(a) -> Expr:
    return func("exp", as_expr(a))


def log(a) -> Expr:
    return func("log", as_expr(a))


def sin(a) -> Expr:
    return func("sin", as_expr(a))


def cos(a) -> Expr:
    return func("cos", as_expr(a))


# ---------------------------------------------------------------------------
# calculus and substitution


def differentiate(f: Expr, i: int) -> Expr:
    """Exact partial derivative of ``f`` with respect to coordinate ``i``."""
    if i not in f.free:
        return ZERO
    if isinstance(f, Var):
        return ONE
    if isinstance(f, Poly):
        return from_poly(f.poly.diff(i))
    if isinstance(f, Add):
        return add(*(differentiate(a, i) for a in f.args))
    if isinstance(f, Mul):
        terms = []
        for k, a in enumerate(f.args):
            da = differentiate(a, i)
            if not is_literal_zero(da):
                terms.append(mul(*f.args[:k], da, *f.args[k + 1:]))
        return add(*terms)
    if isinstance(f, Pow):
        return mul(Const(f.exponent), power(f.base, f.exponent - 1), differentiate(f.base, i))
    if isinstance(f, Div):
        num = sub(mul(differentiate(f.num, i), f.den), mul(f.num, differentiate(f.den, i)))
        return div(num, power(f.den, 2))
    if isinstance(f, Func):
        du = differentiate(f.arg, i)
        if f.name == "exp":
            return mul(f, du)
        if f.name == "log":
            return div(du, f.arg)
        if f.name == "sin":
            return mul(func("cos", f.arg), du)
        return neg(mul(func("sin", f.arg), du))
    raise TypeError(f"unexpected node {type(f).__name__}")


def substitute(f: Expr, values: Sequence[Expr] | Mapping[int, Expr]) -> Expr:
    """Replace coordinate ``i`` by ``values[i]`` throughout ``f``."""
    if isinstance(f, Const):
        return f
    if isinstance(f, Var):
        return values[f.index]
    if isinstance(f, Poly):
        terms = []
        for m, c in f.poly.terms.items():
            factors = [Const(c)] + [power(values[i], e) for i, e in enumerate(m) if e]
            terms.append(mul(*factors))
        return add(*terms)
    if isinstance(f, Add):
        return add(*(substitute(a, values) for a in f.args))
    if isinstance(f, Mul):
        return mul(*(substitute(a, values) for a in f.args))
    if isinstance(f, Pow):
        return power(substitute(f.base, values), f.exponent)
    if isinstance(f, Div):
        return div(substitute(f.num, values), substitute(f.den, values))
    if isinstance(f, Func):
        return func(f.name, substitute(f.arg, values))
    raise TypeError(f"unexpected node {type(f).__name__}")


def fold(f: Expr) -> Expr:
    """Rebuild ``f`` through the folding constructors (parsed trees become canonical)."""
    p = _normalize(f)
    if p is not None:
        return from_poly(p)
    return substitute(f, {i: Var(i) for i in f.free})


def reindex(f: Expr, mapping: Mapping[int, int]) -> Expr:
    """Rename coordinate indices; polynomial leaves stay canonical."""
    if isinstance(f, Poly):
        return from_poly(f.poly.reindex(mapping))
    return substitute(f, {i: Var(mapping[i]) for i in f.free})


def max_index(f: Expr) -> int:
    return max(f.free, default=-1)


# ---------------------------------------------------------------------------
# normal forms


def poly_normalize(f: Expr):
    """Return the canonical :class:`PolyForm` of ``f`` or ``NotPolynomial``."""
    p = _normalize(f)
    return NotPolynomial if p is None else p


def _normalize(f: Expr) -> PolyForm | None:
    p = _as_poly(f)
    if p is not None:
        return p
    if isinstance(f, Add):
        total = PolyForm()
        for a in f.args:
            q = _normalize(a)
            if q is None:
                return None
            total = total + q
        return total
    if isinstance(f, Mul):
        prod = PolyForm.constant(1)
        for a in f.args:
            q = _normalize(a)
            if q is None:
                return None
            prod = prod * q
        return prod
    if isinstance(f, Pow) and f.exponent >= 0:
        q = _normalize(f.base)
        return None if q is None else q ** f.exponent
    if isinstance(f, Div):
        q = _normalize(f.den)
        if q is None or not q.is_constant() or q.is_zero():
            return None
        num = _normalize(f.num)
        return None if num is None else num.scale(1 / q.constant_term)
    return None


def exp_poly_normalize(f: Expr):
    """Canonical form of a sum ``Σ exp(q_k)·p_k`` with polynomial ``q_k, p_k``.

    Returns a dict mapping each exponent polynomial (zero constant term) to
    its polynomial cofactor, or ``NotPolynomial`` when ``f`` is outside this
    class.  Distinct exponents give linearly independent functions, so the
    dict is empty exactly when ``f`` vanishes identically.
    """
    out = _exp_normalize(f)
    return NotPolynomial if out is None else out


def _ep_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, p in b.items():
        s = out.get(k, PolyForm()) + p
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def _ep_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ka, pa in a.items():
        for kb, pb in b.items():
            out = _ep_add(out, {ka + kb: pa * pb})
    return out


def _exp_normalize(f: Expr) -> dict | None:
    p = _normalize(f)
    if p is not None:
        return {PolyForm(): p} if p else {}
    if isinstance(f, Func) and f.name == "exp":
        q = _normalize(f.arg)
        if q is None or q.constant_term != 0:
            return None
        return {q: PolyForm.constant(1)}
    if isinstance(f, Add):
        total: dict = {}
        for a in f.args:
            q = _exp_normalize(a)
            if q is None:
                return None
            total = _ep_add(total, q)
        return total
    if isinstance(f, Mul):
        prod = {PolyForm(): PolyForm.constant(1)}
        for a in f.args:
            q = _exp_normalize(a)
            if q is None:
                return None
            prod = _ep_mul(prod, q)
        return prod
    if isinstance(f, Pow):
        base = _exp_normalize(f.base)
        if base is None:
            return None
        if f.exponent < 0:
            if len(base) != 1:
                return None
            ((k, c),) = base.items()
            if not c.is_constant():
                return None
            base = {-k: PolyForm.constant(1 / c.constant_term)}
        out = {PolyForm(): PolyForm.constant(1)}
        for _ in range(abs(f.exponent)):
            out = _ep_mul(out, base)
        return out
    if isinstance(f, Div):
        num = _exp_normalize(f.num)
        den = _exp_normalize(f.den)
        if num is None or den is None or len(den) != 1:
            return None
        ((k, c),) = den.items()
        if not c.is_constant():
            return None
        return _ep_mul(num, {-k: PolyForm.constant(1 / c.constant_term)})
    return None


# ---------------------------------------------------------------------------
# evaluation


def evaluate(f: Expr, p) -> float | np.ndarray:
    """Evaluate at a point (1-D input) or at each row of a 2-D array."""
    X = np.asarray(p, dtype=float)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.shape[1] <= max_index(f):
        raise ValueError(f"point has {X.shape[1]} components, expression needs {max_index(f) + 1}")
    out = _eval(f, X, None)
    return float(out[0]) if single else out


def evaluate_tracked(f: Expr, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values at rows of ``X`` plus the largest intermediate magnitude per row."""
    track = [np.zeros(X.shape[0])]
    val = _eval(f, X, track)
    return val, np.maximum(track[0], np.abs(val))


def _eval(f: Expr, X: np.ndarray, track) -> np.ndarray:
    if isinstance(f, Const):
        out = np.full(X.shape[0], float(f.value))
    elif isinstance(f, Var):
        out = X[:, f.index].astype(float)
    elif isinstance(f, Poly):
        out = f.poly.evaluate(X, track)
    elif isinstance(f, Add):
        out = sum((_eval(a, X, track) for a in f.args), np.zeros(X.shape[0]))
    elif isinstance(f, Mul):
        out = np.ones(X.shape[0])
        for a in f.args:
            out = out * _eval(a, X, track)
    elif isinstance(f, Pow):
        b = _eval(f.base, X, track)
        if f.exponent < 0 and np.any(b == 0):
            raise EvaluationError("negative power of zero", f)
        out = b ** float(f.exponent)
    elif isinstance(f, Div):
        num = _eval(f.num, X, track)
        den = _eval(f.den, X, track)
        if np.any(den == 0):
            raise EvaluationError("division by zero", f)
        out = num / den
    elif isinstance(f, Func):
        a = _eval(f.arg, X, track)
        if f.name == "log":
            if np.any(a <= 0):
                raise EvaluationError("log of a non-positive value", f)
            out = np.log(a)
        else:
            out = getattr(np, f.name)(a)
    else:
        raise TypeError(f"unexpected node {type(f).__name__}")
    if track is not None:
        track[0] = np.maximum(track[0], np.abs(out))
    return out


def to_python(f: Expr) -> str:
    """Python source for ``f`` in terms of an indexable ``x`` (numpy names as ``np``)."""
    if isinstance(f, Const):
        return repr(float(f.value))
    if isinstance(f, Var):
        return f"x[{f.index}]"
    if isinstance(f, Poly):
        parts = []
        for m, c in f.poly.terms.items():
            factors = [repr(float(c))] + [
                f"x[{i}]" if e == 1 else f"x[{i}]**{e}" for i, e in enumerate(m) if e
            ]
            parts.append("*".join(factors))
        return "(" + " + ".join(parts) + ")"
    if isinstance(f, Add):
        return "(" + " + ".join(to_python(a) for a in f.args) + ")"
    if isinstance(f, Mul):
        return "(" + "*".join(to_python(a) for a in f.args) + ")"
    if isinstance(f, Pow):
        return f"({to_python(f.base)})**{f.exponent}"
    if isinstance(f, Div):
        return f"({to_python(f.num)})/({to_python(f.den)})"
    if isinstance(f, Func):
        return f"np.{f.name}({to_python(f.arg)})"
    raise TypeError(f"unexpected node {type(f).__name__}")


def compile_exprs(exprs: Sequence[Expr]):
    """Compile expressions into ``fn(x) -> np.ndarray`` for fast repeated evaluation."""
    body = ", ".join(to_python(e) for e in exprs)
    code = f"lambda x: np.array([{body}], dtype=float)"
    return eval(code, {"np": np})  # noqa: S307 - source generated from our own tree


# ---------------------------------------------------------------------------
# zero testing


@dataclass(frozen=True)
class Exact:
    """Canonical polynomial comparison."""

    name = "exact"


@dataclass(frozen=True)
class Factored:
    """Exact comparison after factoring exponential prefactors (exp-polynomials)."""

    name = "exact-factored"


@dataclass(frozen=True)
class Sampled:
    count: int = 200
    seed: int = 0
    tol: float = 1e-9
    name = "sampled"

    def points(self, dim: int) -> np.ndarray:
        return sample_points(dim, self.count, self.seed)


def sample_points(dim: int, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(-1.0, 1.0, size=(count, dim))


@dataclass
class ZeroResult:
    is_zero: bool
    backend: str
    point: tuple | None = None
    residual: float | None = None

    def __bool__(self):
        return self.is_zero


def expr_is_zero(f: Expr, strategy=Exact(), dim: int | None = None) -> ZeroResult:
    """Decide whether ``f`` vanishes identically.

    ``Exact`` and ``Factored`` raise ``ValueError`` on input outside their
    class.  ``Sampled`` draws points from ``[-1, 1]^dim`` and accepts when
    ``|f(p)| <= tol * (1 + max |subterm(p)|)`` everywhere.
    """
    if isinstance(strategy, Exact):
        p = poly_normalize(f)
        if p is NotPolynomial:
            raise ValueError("Exact zero test requested on a non-polynomial expression")
        return ZeroResult(p.is_zero(), strategy.name)
    if isinstance(strategy, Factored):
        ep = exp_poly_normalize(f)
        if ep is NotPolynomial:
            raise ValueError("expression is not an exp-polynomial")
        return ZeroResult(not ep, strategy.name)
    if isinstance(strategy, Sampled):
        if is_literal_zero(f):
            return ZeroResult(True, strategy.name)
        dim = dim if dim is not None else max_index(f) + 1
        X = strategy.points(max(dim, 1))
        val, scale = evaluate_tracked(f, X)
        bad = np.abs(val) > strategy.tol * (1.0 + scale)
        if np.any(bad):
            k = int(np.argmax(bad))
            return ZeroResult(False, strategy.name, tuple(float(v) for v in X[k]), float(abs(val[k])))
        return ZeroResult(True, strategy.name)
    raise TypeError(f"unknown strategy {strategy!r}")


def check_zero(f: Expr, sampled: Sampled | None = None, dim: int | None = None) -> ZeroResult:
    """Strongest applicable zero test: polynomial, then exp-polynomial, then sampling."""
    p = _normalize(f)
    if p is not None:
        return ZeroResult(p.is_zero(), Exact.name)
    ep = _exp_normalize(f)
    if ep is not None:
        return ZeroResult(not ep, Factored.name)
    return expr_is_zero(f, sampled or Sampled(), dim)


# ---------------------------------------------------------------------------
# printing


def _name(i: int, names) -> str:
    if names is None:
        return f"x{i}"
    return names[i]


def _format_rational(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _monomial(m: tuple, names) -> list[str]:
    return [_name(i, names) if e == 1 else f"{_name(i, names)}^{e}" for i, e in enumerate(m) if e]


def _format_poly(p: PolyForm, names) -> tuple[str, int]:
    if p.is_zero():
        return "0", 5
    pieces = []
    for k, (m, c) in enumerate(p.sorted_terms()):
        factors = _monomial(m, names)
        mag = abs(c)
        if not factors:
            body = _format_rational(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([_format_rational(mag)] + factors)
        if k == 0:
            pieces.append(("-" if c < 0 else "") + body)
        else:
            pieces.append((" - " if c < 0 else " + ") + body)
    text = "".join(pieces)
    if len(p.terms) > 1:
        return text, 1
    ((m, c),) = p.terms.items()
    if c < 0:
        return text, 3
    if c.denominator != 1 or (len([e for e in m if e]) + (c != 1)) > 1:
        return text, 2
    return text, (4 if any(e > 1 for e in m) else 5)


def _is_negative(e: Expr) -> bool:
    if isinstance(e, Const):
        return e.value < 0
    if isinstance(e, Mul) and isinstance(e.args[0], Const):
        return e.args[0].value < 0
    return False


def _negate_syntax(e: Expr) -> Expr:
    if isinstance(e, Const):
        return Const(-e.value)
    c = -e.args[0].value
    rest = list(e.args[1:])
    if c != 1:
        rest.insert(0, Const(c))
    return rest[0] if len(rest) == 1 else Mul(rest)


def _fmt(e: Expr, names) -> tuple[str, int]:
    # precedence: 1 sum, 2 product/quotient, 3 unary minus, 4 power, 5 atom
    if isinstance(e, Const):
        c = e.value
        text = _format_rational(c)
        if c < 0:
            return text, 3
        return text, (2 if c.denominator != 1 else 5)
    if isinstance(e, Var):
        return _name(e.index, names), 5
    if isinstance(e, Poly):
        return _format_poly(e.poly, names)
    if isinstance(e, Add):
        out = _wrap(e.args[0], names, 1)
        for a in e.args[1:]:
            if _is_negative(a):
                out += " - " + _wrap(_negate_syntax(a), names, 2)
            else:
                out += " + " + _wrap(a, names, 2)
        return out, 1
    if isinstance(e, Mul):
        args = list(e.args)
        prefix = ""
        if isinstance(args[0], Const) and args[0].value == -1 and len(args) > 1:
            prefix = "-"
            args = args[1:]
        parts = [_wrap(args[0], names, 2)] + [_wrap(a, names, 3) for a in args[1:]]
        text = "*".join(parts)
        if prefix:
            return prefix + text, 3
        return text, 2
    if isinstance(e, Div):
        return f"{_wrap(e.num, names, 2)}/{_wrap(e.den, names, 3)}", 2
    if isinstance(e, Pow):
        exp_text = str(e.exponent) if e.exponent >= 0 else f"({e.exponent})"
        return f"{_wrap(e.base, names, 5)}^{exp_text}", 4
    if isinstance(e, Func):
        return f"{e.name}({_fmt(e.arg, names)[0]})", 5
    raise TypeError(f"unexpected node {type(e).__name__}")


def _wrap_text(text: str, prec: int, need: int) -> str:
    return f"({text})" if prec < need else text


def _wrap(e: Expr, names, need: int) -> str:
    text, prec = _fmt(e, names)
    return _wrap_text(text, prec, need)


def format_expr(f: Expr, names: Sequence[str] | Chart | None = None) -> str:
    """Render ``f`` in the input grammar; ``parse_expr`` reads it back."""
    if isinstance(names, Chart):
        names = names.names
    return _fmt(f, names)[0]


# ---------------------------------------------------------------------------
# parsing

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER = re.compile(r"(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?")


class _Parser:
    def __init__(self, text: str, chart: Chart):
        self.text = text
        self.chart = chart
        self.pos = 0

    def error(self, message: str, pos: int | None = None):
        raise ParseError(message, self.pos if pos is None else pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def parse(self) -> Expr:
        e = self.sum()
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return e

    def sum(self) -> Expr:
        args = [self.product()]
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.product()
            args.append(rhs if op == "+" else _negate_raw(rhs))
        return args[0] if len(args) == 1 else Add(args)

    def product(self) -> Expr:
        e = self.unary()
        while self.peek() in ("*", "/"):
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.unary()
            if op == "*":
                e = Mul([e, rhs])
            elif isinstance(e, Const) and isinstance(rhs, Const):
                if rhs.value == 0:
                    self.error("zero denominator in rational literal", self.pos - 1)
                e = Const(e.value / rhs.value)
            else:
                e = Div(e, rhs)
        return e

    def unary(self) -> Expr:
        if self.take("-"):
            return _negate_raw(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.take("^"):
            base = Pow(base, self.exponent())
        return base

    def exponent(self) -> int:
        self.skip()
        start = self.pos
        paren = self.take("(")
        sign = -1 if self.take("-") else 1
        self.skip()
        m = re.compile(r"\d+").match(self.text, self.pos)
        if not m:
            self.error("expected an integer exponent" if self.pos < len(self.text) else "unexpected end of input")
        self.pos = m.end()
        if self.peek() == "." or (self.peek() or " ") in "eE":
            self.error("only integer exponents are supported", start)
        if paren and not self.take(")"):
            self.error("expected ')'")
        return sign * int(m.group())

    def atom(self) -> Expr:
        self.skip()
        if self.pos >= len(self.text):
            self.error("unexpected end of input")
        if self.take("("):
            e = self.sum()
            if not self.take(")"):
                self.error("expected ')'")
            return e
        m = _NUMBER.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return Const(Fraction(m.group()))
        m = _IDENT.match(self.text, self.pos)
        if m:
            name = m.group()
            start = self.pos
            self.pos = m.end()
            if name in FUNCTIONS and self.peek() == "(":
                self.pos += 1
                arg = self.sum()
                if not self.take(")"):
                    self.error("expected ')'")
                return Func(name, arg)
            if name not in self.chart.names:
                self.error(f"unknown coordinate {name!r}", start)
            return Var(self.chart.index(name))
        self.error(f"unexpected {self.text[self.pos]!r}")


def _negate_raw(e: Expr) -> Expr:
    if isinstance(e, Const) or (isinstance(e, Mul) and isinstance(e.args[0], Const)):
        return _negate_syntax(e)
    return Mul([Const(-1), e])


def parse_expr(text: str, chart: Chart) -> Expr:
    """Parse infix text (``^`` binds tighter than unary ``-``, then ``* /``, then ``+ -``)."""
    return _Parser(text, chart).parse()
