"""Partial Jacobi structures ``(M, T♭M, Λ, E)`` on a single chart.

``T♭M`` is the constant coordinate subbundle spanned by ``dx^i`` for ``i`` in
the flat index set ``S``.  ``lambda_sharp`` is stored as an ``n × |S|`` array
with entry ``[i][j] = Λ(dx^i, dx^{S_j})``; rows outside ``S`` carry the part
of ``Λ♯`` that lands in directions not seen by ``T♭M``.

Hamiltonian fields use the first-slot contraction, ``X_f = Λ(df, ·) + fE``,
which is the convention under which ``f ↦ X_f`` is a Lie algebra morphism.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import RunConfig
from .expr import (
    ZERO,
    Chart,
    EvaluationError,
    Expr,
    ParseError,
    add,
    as_expr,
    check_zero,
    div,
    evaluate,
    format_expr,
    fold,
    is_literal_zero,
    max_index,
    mul,
    neg,
    parse_expr,
    sample_points,
    differentiate,
    substitute,
)
from .multivector import MultivectorField, lie_bracket, lie_derivative, schouten, wedge
from .report import Check, VerificationReport
from .sampling import random_polynomial, rng_for


class StructureError(ValueError):
    """Invalid structure data; ``witness`` pinpoints the offending entry."""

    def __init__(self, message: str, witness: dict | None = None):
        super().__init__(message)
        self.witness = witness or {}


class SchemaError(StructureError):
    pass


class MembershipError(StructureError):
    """A function argument is not in the algebra 𝔄 of the structure."""


@dataclass(frozen=True, eq=False)
class PartialJacobiStructure:
    chart: Chart
    flat: tuple[int, ...]
    lambda_sharp: tuple[tuple[Expr, ...], ...]
    reeb: tuple[Expr, ...]
    name: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.chart.dim
        flat = tuple(self.flat)
        if list(flat) != sorted(set(flat)) or any(i < 0 or i >= n for i in flat):
            raise StructureError(f"flat set must be strictly increasing indices below {n}: {flat}")
        object.__setattr__(self, "flat", flat)
        rows = tuple(tuple(as_expr(e) for e in row) for row in self.lambda_sharp)
        if len(rows) != n or any(len(r) != len(flat) for r in rows):
            raise StructureError(f"lambda_sharp must be {n} x {len(flat)}")
        reeb = tuple(as_expr(e) for e in self.reeb)
        if len(reeb) != n:
            raise StructureError(f"reeb field needs {n} components")
        for e in (*reeb, *(e for r in rows for e in r)):
            if max_index(e) >= n:
                raise StructureError(f"expression uses coordinate index {max_index(e)} outside the chart")
        object.__setattr__(self, "lambda_sharp", rows)
        object.__setattr__(self, "reeb", reeb)
        object.__setattr__(self, "_col", {j: c for c, j in enumerate(flat)})

    @property
    def dim(self) -> int:
        return self.chart.dim

    @property
    def full_flat(self) -> bool:
        return len(self.flat) == self.dim

    def lam(self, i: int, j: int) -> Expr:
        """``Λ(dx^i, dx^j)`` for ``j`` in the flat set (``i`` arbitrary)."""
        return self.lambda_sharp[i][self._col[j]]

    def bivector(self) -> MultivectorField:
        """``Λ`` as a 2-vector on the flat block (zero outside ``S × S``)."""
        coeffs = {}
        for a, i in enumerate(self.flat):
            for j in self.flat[a + 1:]:
                coeffs[(i, j)] = self.lam(i, j)
        return MultivectorField(self.chart, 2, coeffs)

    def reeb_field(self, restrict: bool = False) -> MultivectorField:
        """``E`` as a vector field; ``restrict=True`` keeps only flat components (``ι*E``)."""
        comps = [c if (not restrict or i in self._col) else ZERO for i, c in enumerate(self.reeb)]
        return MultivectorField.vector(self.chart, comps)

    def nonzero_pairs(self) -> list[tuple[int, int, Expr]]:
        return [(i, j, self.lam(i, j)) for i in self.flat for j in self.flat if not is_literal_zero(self.lam(i, j))]

    def validate(self, cfg: RunConfig | None = None) -> None:
        """Check antisymmetry on ``S × S`` and closure of the flat entries in 𝔄."""
        cfg = cfg or RunConfig()
        for a, i in enumerate(self.flat):
            for j in self.flat[a:]:
                res = check_zero(add(self.lam(i, j), self.lam(j, i)), cfg.sampled, self.dim)
                if not res:
                    raise StructureError(
                        f"lambda_sharp is not antisymmetric at ({i}, {j})", {"indices": [i, j]}
                    )
        for i in self.flat:
            entries = [(f"lambda_sharp[{i}][{j}]", self.lam(i, j)) for j in self.flat]
            entries.append((f"reeb[{i}]", self.reeb[i]))
            for label, e in entries:
                k = _forbidden_dependence(e, self, cfg)
                if k is not None:
                    raise StructureError(
                        f"{label} depends on non-flat coordinate {self.chart.names[k]}",
                        {"entry": label, "coordinate": self.chart.names[k]},
                    )


def _forbidden_dependence(f: Expr, s: PartialJacobiStructure, cfg: RunConfig) -> int | None:
    for i in sorted(f.free):
        if i in s._col:
            continue
        if not check_zero(differentiate(f, i), cfg.sampled, s.dim):
            return i
    return None


def algebra_member(f, s: PartialJacobiStructure, cfg: RunConfig | None = None) -> bool:
    """Whether ``f`` lies in 𝔄: every partial in a non-flat direction vanishes."""
    f = as_expr(f)
    if max_index(f) >= s.dim:
        raise ValueError("expression refers to coordinates outside the chart")
    return _forbidden_dependence(f, s, cfg or RunConfig()) is None


def _require_member(f: Expr, s: PartialJacobiStructure, label: str, cfg: RunConfig | None = None):
    if s.full_flat:
        if max_index(f) >= s.dim:
            raise ValueError("expression refers to coordinates outside the chart")
        return
    k = _forbidden_dependence(f, s, cfg or RunConfig())
    if k is not None:
        raise MembershipError(
            f"argument {label} is not in the algebra: it depends on {s.chart.names[k]}",
            {"argument": label, "coordinate": s.chart.names[k]},
        )


def _grad(f: Expr, s: PartialJacobiStructure) -> dict[int, Expr]:
    out = {}
    for i in f.free:
        if i < s.dim:
            d = differentiate(f, i)
            if not is_literal_zero(d):
                out[i] = d
    return out


def _reeb_apply(s: PartialJacobiStructure, grad: dict[int, Expr]) -> Expr:
    return add(*(mul(s.reeb[i], d) for i, d in grad.items() if not is_literal_zero(s.reeb[i])))


def jacobi_bracket(s: PartialJacobiStructure, f, g) -> Expr:
    """``{f, g} = Λ(df, dg) + f E(g) − g E(f)``."""
    f, g = as_expr(f), as_expr(g)
    _require_member(f, s, "f")
    _require_member(g, s, "g")
    gf, gg = _grad(f, s), _grad(g, s)
    terms = []
    for i, j, c in s.nonzero_pairs():
        if i in gf and j in gg:
            terms.append(mul(gf[i], c, gg[j]))
    terms.append(mul(f, _reeb_apply(s, gg)))
    terms.append(neg(mul(g, _reeb_apply(s, gf))))
    return add(*terms)


def hamiltonian_field(s: PartialJacobiStructure, f) -> MultivectorField:
    """``X_f = Λ(df, ·) + f E`` with components ``f E^i − Σ_j λ♯[i][j] ∂_j f``."""
    f = as_expr(f)
    _require_member(f, s, "f")
    grad = _grad(f, s)
    comps = []
    for i in range(s.dim):
        terms = [mul(f, s.reeb[i])]
        for j, d in grad.items():
            if j in s._col:
                c = s.lam(i, j)
                if not is_literal_zero(c):
                    terms.append(neg(mul(c, d)))
        comps.append(add(*terms))
    return MultivectorField.vector(s.chart, comps)


def _witness_field(idx, res, chart: Chart) -> dict:
    w = {"index": [chart.names[i] for i in idx]}
    if res.point is not None:
        w["point"] = [float(v) for v in res.point]
        w["residual"] = res.residual
    return w


def _field_check(name: str, field_: MultivectorField, cfg: RunConfig, backend_hint: str = "") -> Check:
    bad = field_.is_zero(cfg.sampled)
    backends = sorted({check_zero(c, cfg.sampled, field_.chart.dim).backend for c in field_.coeffs.values()})
    backend = "+".join(backends) if backends else (backend_hint or "exact")
    if bad is None:
        return Check(name, True, backend)
    idx, res = bad
    w = _witness_field(idx, res, field_.chart)
    w["coefficient"] = format_expr(field_.coeffs[idx], field_.chart)
    return Check(name, False, res.backend, w)


def random_members(s: PartialJacobiStructure, rng, count: int, deg: int, terms: int = 3) -> list[Expr]:
    return [random_polynomial(rng, s.flat, deg, terms) for _ in range(count)]


def verify_structure(s: PartialJacobiStructure, cfg: RunConfig | None = None) -> VerificationReport:
    """Four checks: VJp1, VJp2, Jacobi identity on random triples, Hamiltonian morphism."""
    cfg = cfg or RunConfig()
    report = VerificationReport(f"verify {s.name or 'structure'}")
    L = s.bivector()
    E = s.reeb_field(restrict=True)
    report.add(_field_check("VJp1 [L,L] = 2 E^L", schouten(L, L) - wedge(E, L).scale(2), cfg))
    report.add(_field_check("VJp2 L_E L = 0", lie_derivative(E, L), cfg))
    report.add(_jacobi_identity_check(s, cfg))
    report.add(_morphism_check(s, cfg))
    return report


def _pair_witness(s, fs, res) -> dict:
    w = {f"f{k + 1}": format_expr(f, s.chart) for k, f in enumerate(fs)}
    if res.point is not None:
        w["point"] = [float(v) for v in res.point]
        w["residual"] = res.residual
    return w


def _jacobi_identity_check(s: PartialJacobiStructure, cfg: RunConfig) -> Check:
    rng = rng_for(cfg.seed, 3)
    backends = set()
    for _ in range(cfg.trials):
        f, g, h = random_members(s, rng, 3, cfg.deg)
        cyc = add(
            jacobi_bracket(s, f, jacobi_bracket(s, g, h)),
            jacobi_bracket(s, g, jacobi_bracket(s, h, f)),
            jacobi_bracket(s, h, jacobi_bracket(s, f, g)),
        )
        res = check_zero(cyc, cfg.sampled, s.dim)
        backends.add(res.backend)
        if not res:
            return Check("Jacobi identity", False, res.backend, _pair_witness(s, (f, g, h), res))
    return Check("Jacobi identity", True, "+".join(sorted(backends)), detail=f"{cfg.trials} random triples")


def morphism_residual(s: PartialJacobiStructure, f, g) -> MultivectorField:
    """``[X_f, X_g] − X_{{f,g}}``."""
    return lie_bracket(hamiltonian_field(s, f), hamiltonian_field(s, g)) - hamiltonian_field(
        s, jacobi_bracket(s, f, g)
    )


def _morphism_check(s: PartialJacobiStructure, cfg: RunConfig) -> Check:
    rng = rng_for(cfg.seed, 4)
    backends = set()
    for _ in range(cfg.trials):
        f, g = random_members(s, rng, 2, cfg.deg)
        R = morphism_residual(s, f, g)
        bad = R.is_zero(cfg.sampled)
        for c in R.coeffs.values():
            backends.add(check_zero(c, cfg.sampled, s.dim).backend)
        if bad is not None:
            idx, res = bad
            w = _pair_witness(s, (f, g), res)
            w["component"] = s.chart.names[idx[0]]
            return Check("Hamiltonian morphism [X_f,X_g] = X_{f,g}", False, res.backend, w)
    return Check(
        "Hamiltonian morphism [X_f,X_g] = X_{f,g}",
        True,
        "+".join(sorted(backends)) or "exact",
        detail=f"{cfg.trials} random pairs",
    )


def conformal_transform(s: PartialJacobiStructure, phi, cfg: RunConfig | None = None) -> PartialJacobiStructure:
    """``(φΛ, φE + Λ(dφ, ·))`` for a nowhere-vanishing ``φ`` in 𝔄."""
    cfg = cfg or RunConfig()
    phi = as_expr(phi)
    _require_member(phi, s, "phi", cfg)
    values = np.atleast_1d(evaluate(phi, sample_points(s.dim, cfg.samples, cfg.seed)))
    if np.any(values == 0) or (values.min() < 0 < values.max()):
        k = int(np.argmin(np.abs(values)))
        raise StructureError("conformal factor vanishes on the sampling domain", {"sample": k})
    rows = tuple(tuple(mul(phi, e) for e in row) for row in s.lambda_sharp)
    reeb = tuple(hamiltonian_field(s, phi).components())
    name = f"{s.name}·φ" if s.name else ""
    return PartialJacobiStructure(s.chart, s.flat, rows, reeb, name, dict(s.metadata))


def conformal_bracket_residual(s: PartialJacobiStructure, phi, f, g, cfg: RunConfig | None = None) -> Expr:
    """``{f, g}_φ − (1/φ){φf, φg}``; vanishes identically for a Jacobi structure."""
    phi = as_expr(phi)
    t = conformal_transform(s, phi, cfg)
    return add(jacobi_bracket(t, f, g), neg(div(jacobi_bracket(s, mul(phi, f), mul(phi, g)), phi)))


def pullback(f: Expr, phi: Sequence[Expr]) -> Expr:
    return substitute(as_expr(f), [as_expr(p) for p in phi])


def jacobi_map_check(
    src: PartialJacobiStructure,
    dst: PartialJacobiStructure,
    phi: Sequence,
    tests: int | None = None,
    cfg: RunConfig | None = None,
) -> VerificationReport:
    """Pullback membership and ``{φ*f, φ*g}_src = φ*{f, g}_dst`` on random pairs."""
    cfg = cfg or RunConfig()
    tests = tests or cfg.trials
    phi = [as_expr(p) for p in phi]
    if len(phi) != dst.dim:
        raise ValueError(f"map needs {dst.dim} components, got {len(phi)}")
    report = VerificationReport(f"jacobi map {src.name or 'src'} -> {dst.name or 'dst'}")
    rng = rng_for(cfg.seed, 5)
    membership = Check("pullback preserves the algebra", True, "exact")
    bracket = Check("pullback preserves brackets", True, "exact", detail=f"{tests} random pairs")
    backends = set()
    for k in range(tests):
        f, g = random_members(dst, rng, 2, cfg.deg)
        pf, pg = pullback(f, phi), pullback(g, phi)
        for label, p in (("f", pf), ("g", pg)):
            if membership.passed and not algebra_member(p, src, cfg):
                membership.passed = False
                membership.witness = {"pair": k, "argument": label, "pullback": format_expr(p, src.chart)}
        if not membership.passed:
            continue
        diff = add(jacobi_bracket(src, pf, pg), neg(pullback(jacobi_bracket(dst, f, g), phi)))
        res = check_zero(diff, cfg.sampled, src.dim)
        backends.add(res.backend)
        if not res and bracket.passed:
            bracket.passed = False
            bracket.backend = res.backend
            bracket.witness = {"pair": k, "f": format_expr(f, dst.chart), "g": format_expr(g, dst.chart)}
            if res.point is not None:
                bracket.witness.update(point=list(res.point), residual=res.residual)
            else:
                bracket.witness["residual"] = format_expr(diff, src.chart)
    if bracket.passed and backends:
        bracket.backend = "+".join(sorted(backends))
    report.add(membership)
    report.add(bracket)
    return report


# ---------------------------------------------------------------------------
# structure files


def to_document(s: PartialJacobiStructure) -> dict:
    names = s.chart
    doc = {}
    if s.name:
        doc["name"] = s.name
    doc["dimension"] = s.dim
    doc["coordinates"] = list(s.chart.names)
    doc["flat"] = list(s.flat)
    doc["lambda_sharp"] = [[format_expr(e, names) for e in row] for row in s.lambda_sharp]
    doc["reeb"] = [format_expr(e, names) for e in s.reeb]
    if s.metadata:
        doc["metadata"] = {
            k: [format_expr(as_expr(e), names) for e in v] if isinstance(v, (list, tuple)) else v
            for k, v in s.metadata.items()
        }
    return doc


def dumps(s: PartialJacobiStructure) -> str:
    return json.dumps(to_document(s), indent=2, ensure_ascii=False) + "\n"


def load_structure(document, cfg: RunConfig | None = None) -> PartialJacobiStructure:
    """Parse and validate a structure document (dict or JSON text)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"structure file is not valid JSON: {exc}") from None
    if not isinstance(document, dict):
        raise SchemaError("structure document must be an object")
    for key in ("dimension", "coordinates", "flat", "lambda_sharp", "reeb"):
        if key not in document:
            raise SchemaError(f"missing field {key!r}")
    n = document["dimension"]
    if not isinstance(n, int) or n < 1:
        raise SchemaError("dimension must be a positive integer")
    coords = document["coordinates"]
    if not isinstance(coords, list) or len(coords) != n or not all(isinstance(c, str) for c in coords):
        raise SchemaError(f"coordinates must be a list of {n} strings")
    try:
        chart = Chart(tuple(coords))
    except ValueError as exc:
        raise SchemaError(str(exc)) from None
    flat = document["flat"]
    if not isinstance(flat, list) or not all(isinstance(i, int) for i in flat):
        raise SchemaError("flat must be a list of integers")
    ls = document["lambda_sharp"]
    if not isinstance(ls, list) or len(ls) != n or any(not isinstance(r, list) or len(r) != len(flat) for r in ls):
        raise SchemaError(f"lambda_sharp must be {n} rows of {len(flat)} expressions")
    reeb = document["reeb"]
    if not isinstance(reeb, list) or len(reeb) != n:
        raise SchemaError(f"reeb must list {n} expressions")

    def parse(text, where):
        if not isinstance(text, str):
            raise SchemaError(f"{where} must be an expression string")
        try:
            return fold(parse_expr(text, chart))
        except ParseError as exc:
            raise SchemaError(f"{where}: {exc}", {"entry": where}) from None

    rows = tuple(tuple(parse(e, f"lambda_sharp[{i}][{j}]") for j, e in enumerate(r)) for i, r in enumerate(ls))
    reeb_e = tuple(parse(e, f"reeb[{i}]") for i, e in enumerate(reeb))
    metadata = {}
    for k, v in (document.get("metadata") or {}).items():
        metadata[k] = tuple(parse(e, f"metadata.{k}") for e in v) if isinstance(v, list) else v
    s = PartialJacobiStructure(chart, tuple(flat), rows, reeb_e, document.get("name", ""), metadata)
    s.validate(cfg)
    return s


def read_structure(path, cfg: RunConfig | None = None) -> PartialJacobiStructure:
    return load_structure(Path(path).read_text(encoding="utf-8"), cfg)


def write_structure(s: PartialJacobiStructure, path) -> None:
    Path(path).write_text(dumps(s), encoding="utf-8")


def parse_function(text: str, s: PartialJacobiStructure) -> Expr:
    return fold(parse_expr(text, s.chart))


__all__ = [
    "EvaluationError",
    "MembershipError",
    "PartialJacobiStructure",
    "SchemaError",
    "StructureError",
    "algebra_member",
    "conformal_bracket_residual",
    "conformal_transform",
    "dumps",
    "hamiltonian_field",
    "jacobi_bracket",
    "jacobi_map_check",
    "load_structure",
    "morphism_residual",
    "pullback",
    "read_structure",
    "to_document",
    "verify_structure",
    "write_structure",
]
