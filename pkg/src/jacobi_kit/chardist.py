"""Characteristic distribution: pointwise ranks, involutivity and Hamiltonian flows."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .config import RunConfig
from .expr import ONE, Expr, Var, as_expr, check_zero, compile_exprs, evaluate, format_expr
from .multivector import lie_bracket
from .report import Check, VerificationReport
from .structure import PartialJacobiStructure, _require_member, hamiltonian_field, morphism_residual

RANK_TOL = 1e-8


def default_family(s: PartialJacobiStructure) -> list[Expr]:
    """The constant 1 and the flat coordinates."""
    return [ONE] + [Var(i) for i in s.flat]


def numerical_rank(A: np.ndarray, tol: float = RANK_TOL) -> int:
    """Singular values above ``tol`` times the largest one."""
    if A.size == 0:
        return 0
    sv = np.linalg.svd(A, compute_uv=False)
    if sv.size == 0 or sv[0] == 0 or not np.isfinite(sv[0]):
        return 0
    return int(np.sum(sv > tol * sv[0]))


@dataclass
class DistributionProbe:
    structure: PartialJacobiStructure
    point: Sequence[float]
    family: list | None = None
    tol: float = RANK_TOL

    def __post_init__(self):
        s = self.structure
        self.family = [as_expr(f) for f in (self.family if self.family is not None else default_family(s))]
        for k, f in enumerate(self.family):
            _require_member(f, s, f"family[{k}]")
        self.point = np.asarray(self.point, dtype=float)
        if self.point.shape != (s.dim,):
            raise ValueError(f"probe point needs {s.dim} coordinates")

    def fields(self):
        return [hamiltonian_field(self.structure, f) for f in self.family]

    def matrix(self) -> np.ndarray:
        """Columns ``X_f(x)`` for ``f`` in the family."""
        cols = [compile_exprs(X.components())(self.point) for X in self.fields()]
        if not cols:
            return np.zeros((self.structure.dim, 0))
        return np.column_stack(cols)


def char_rank(probe: DistributionProbe) -> int:
    return numerical_rank(probe.matrix(), probe.tol)


def sharp_rank(s: PartialJacobiStructure, point, tol: float = RANK_TOL) -> int:
    """Rank of ``Λ♯_x`` (the ``n × |S|`` coefficient matrix at ``x``)."""
    point = np.asarray(point, dtype=float)
    if not s.flat:
        return 0
    rows = [compile_exprs(row)(point) for row in s.lambda_sharp]
    return numerical_rank(np.vstack(rows), tol)


def involutivity_check(
    probe: DistributionProbe, pairs: Sequence[tuple] | None = None, cfg: RunConfig | None = None
) -> VerificationReport:
    """Per pair ``(f, g)``: ``[X_f, X_g](x)`` lies in the probed span, and ``[X_f, X_g] = X_{f,g}``.

    ``pairs`` defaults to all pairs of flat coordinates.
    """
    cfg = cfg or RunConfig()
    s = probe.structure
    if pairs is None:
        pairs = [(Var(i), Var(j)) for i, j in combinations(s.flat, 2)]
    A = probe.matrix()
    report = VerificationReport(f"involutivity {s.name or 'structure'}")
    for f, g in pairs:
        f, g = as_expr(f), as_expr(g)
        label = f"({format_expr(f, s.chart)}, {format_expr(g, s.chart)})"
        v = compile_exprs(lie_bracket(hamiltonian_field(s, f), hamiltonian_field(s, g)).components())(probe.point)
        if A.shape[1]:
            coef, *_ = np.linalg.lstsq(A, v, rcond=None)
            resid = float(np.linalg.norm(A @ coef - v))
        else:
            resid = float(np.linalg.norm(v))
        span_ok = resid <= probe.tol * (1.0 + float(np.linalg.norm(v)))
        report.add(
            Check(
                f"span {label}",
                span_ok,
                "least-squares",
                None if span_ok else {"point": probe.point.tolist(), "residual": resid},
            )
        )
        bad = morphism_residual(s, f, g).is_zero(cfg.sampled)
        if bad is None:
            report.add(Check(f"morphism {label}", True, "exact"))
        else:
            idx, res = bad
            w = {"component": s.chart.names[idx[0]]}
            if res.point is not None:
                w.update(point=list(res.point), residual=res.residual)
            report.add(Check(f"morphism {label}", False, res.backend, w))
    return report


def csi_probe(s: PartialJacobiStructure, points, tol: float = RANK_TOL) -> VerificationReport:
    """Rank of ``im Λ♯_x`` at each point and whether it is constant over the set."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    ranks = [sharp_rank(s, p, tol) for p in points]
    report = VerificationReport(f"csi probe {s.name or 'structure'}")
    for p, r in zip(points, ranks):
        report.add(Check(f"rank at {tuple(float(v) for v in p)}", True, "svd", detail=f"rank {r}"))
    constant = len(set(ranks)) <= 1
    witness = None
    if not constant:
        lo, hi = int(np.argmin(ranks)), int(np.argmax(ranks))
        witness = {
            "low_point": points[lo].tolist(),
            "low_rank": ranks[lo],
            "high_point": points[hi].tolist(),
            "high_rank": ranks[hi],
        }
    detail = f"ranks {sorted(set(ranks))}"
    report.add(Check("rank constant on probe set", constant, "svd", witness, detail))
    return report


def grid(dim: int, per_axis: int = 5, lo: float = -1.0, hi: float = 1.0) -> np.ndarray:
    axes = [np.linspace(lo, hi, per_axis)] * dim
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)


# ---------------------------------------------------------------------------
# flows


class FlowError(ArithmeticError):
    """Integration produced a non-finite state; ``trajectory`` holds the good prefix."""

    def __init__(self, message: str, last_good_time: float, trajectory: "Trajectory"):
        super().__init__(message)
        self.last_good_time = last_good_time
        self.trajectory = trajectory


@dataclass
class Trajectory:
    times: np.ndarray
    points: np.ndarray
    step: float
    integrator: str = "rk4"
    error_estimate: float = float("nan")
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.points = np.asarray(self.points, dtype=float)
        if len(self.times) != len(self.points):
            raise ValueError("one point per sample time")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("trajectory points must be finite")

    @property
    def final(self) -> np.ndarray:
        return self.points[-1]

    def to_table(self) -> str:
        """Tab-separated rows ``t x0 … xn`` with 17 significant digits."""
        rows = []
        for t, p in zip(self.times, self.points):
            rows.append("\t".join(f"{v:.17g}" for v in (t, *p)))
        return "\n".join(rows) + "\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_table())


def _rk4(fn, x0: np.ndarray, n_steps: int, h: float):
    xs = np.empty((n_steps + 1, x0.size))
    xs[0] = x0
    x = x0
    # blow-up is reported through the finiteness check, not numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n_steps):
            k1 = fn(x)
            k2 = fn(x + 0.5 * h * k1)
            k3 = fn(x + 0.5 * h * k2)
            k4 = fn(x + h * k3)
            x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(x)):
                return xs[: k + 1], k
            xs[k + 1] = x
    return xs, None


def flow(s: PartialJacobiStructure, f, x0, T: float, h: float, estimate: bool = True) -> Trajectory:
    """Classic RK4 on ``X_f`` from ``x0`` over ``[0, T]``.

    With ``estimate`` the run is repeated at ``h/2`` and the Richardson
    estimate ``|x_h(T) − x_{h/2}(T)| / 15`` is stored on the trajectory.
    """
    if not h > 0 or not T > 0:
        raise ValueError("duration and step must be positive")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (s.dim,):
        raise ValueError(f"start point needs {s.dim} coordinates")
    fn = compile_exprs(hamiltonian_field(s, f).components())
    n_steps = max(1, int(round(T / h)))
    h = T / n_steps
    times = np.linspace(0.0, T, n_steps + 1)
    xs, broke = _rk4(fn, x0, n_steps, h)
    if broke is not None:
        good = Trajectory(times[: broke + 1], xs, h)
        raise FlowError(f"non-finite state after t = {times[broke]:.17g}", float(times[broke]), good)
    err = float("nan")
    if estimate:
        fine, broke = _rk4(fn, x0, 2 * n_steps, h / 2)
        if broke is None:
            err = float(np.max(np.abs(xs[-1] - fine[-1])) / 15.0)
    return Trajectory(times, xs, h, "rk4", err)


def conserved_drift(traj: Trajectory, C) -> float:
    """``max_t |C(x(t)) − C(x(0))|``."""
    vals = np.atleast_1d(evaluate(as_expr(C), traj.points))
    return float(np.max(np.abs(vals - vals[0])))


def casimir_check(s: PartialJacobiStructure, C, f) -> bool:
    """Whether ``{C, f} = 0`` symbolically."""
    from .structure import jacobi_bracket

    return bool(check_zero(jacobi_bracket(s, C, f), dim=s.dim))


__all__ = [
    "DistributionProbe",
    "FlowError",
    "Trajectory",
    "casimir_check",
    "char_rank",
    "conserved_drift",
    "csi_probe",
    "default_family",
    "flow",
    "grid",
    "involutivity_check",
    "numerical_rank",
    "sharp_rank",
]
