"""Cylindrical functions on the direct limit of the standard structures on ``R^{2m+1}``.

Level ``m`` uses coordinates ``(x0, x1..xm, x_{m+1}..x_{2m})``: ``x0`` first,
then the position block, then the momentum block.  Moving to a higher level
keeps ``x0`` and the position block in place and shifts the momentum block.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .config import RunConfig
from .expr import ZERO, Expr, Var, as_expr, format_expr, max_index, reindex
from .report import VerificationReport
from .structure import PartialJacobiStructure, jacobi_bracket, jacobi_map_check


@lru_cache(maxsize=None)
def level_structure(m: int) -> PartialJacobiStructure:
    from .catalog import _standard

    if m < 0:
        raise ValueError("level must be non-negative")
    return _standard(m)


@dataclass(frozen=True)
class CylindricalFunction:
    level: int
    expr: Expr

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be non-negative")
        object.__setattr__(self, "expr", as_expr(self.expr))
        if max_index(self.expr) >= 2 * self.level + 1:
            raise ValueError(f"expression uses coordinates beyond level {self.level}")

    def __str__(self):
        return f"[level {self.level}] {format_expr(self.expr, level_structure(self.level).chart)}"


def promotion_index(m: int, m2: int) -> dict[int, int]:
    """Coordinate index map from level ``m`` to level ``m2 >= m``."""
    if m2 < m:
        raise ValueError(f"cannot promote from level {m} down to {m2}")
    mapping = {0: 0}
    for i in range(1, m + 1):
        mapping[i] = i
        mapping[m + i] = m2 + i
    return mapping


def cyl_promote(f: CylindricalFunction, level: int) -> CylindricalFunction:
    return CylindricalFunction(level, reindex(f.expr, promotion_index(f.level, level)))


def cyl_bracket(f: CylindricalFunction, g: CylindricalFunction) -> CylindricalFunction:
    """Bracket at the common level ``max(f.level, g.level)``."""
    N = max(f.level, g.level)
    a, b = cyl_promote(f, N), cyl_promote(g, N)
    return CylindricalFunction(N, jacobi_bracket(level_structure(N), a.expr, b.expr))


def inclusion_map(m: int) -> list[Expr]:
    """``ι: R^{2m+1} → R^{2m+3}``, the new coordinates set to zero (components over the source)."""
    mapping = promotion_index(m, m + 1)
    inverse = {v: k for k, v in mapping.items()}
    return [Var(inverse[j]) if j in inverse else ZERO for j in range(2 * m + 3)]


def projection_map(m: int) -> list[Expr]:
    """``π: R^{2m+3} → R^{2m+1}`` dropping the new pair (components over the source).

    Pullback along ``π`` is exactly :func:`cyl_promote` by one level.
    """
    mapping = promotion_index(m, m + 1)
    return [Var(mapping[i]) for i in range(2 * m + 1)]


def inclusion_check(m: int, tests: int | None = None, cfg: RunConfig | None = None) -> VerificationReport:
    """``jacobi_map_check`` on ``ι_{2m+1}^{2m+3}``."""
    return jacobi_map_check(level_structure(m), level_structure(m + 1), inclusion_map(m), tests, cfg)


def projection_check(m: int, tests: int | None = None, cfg: RunConfig | None = None) -> VerificationReport:
    """``jacobi_map_check`` on the projection that realises promotion."""
    return jacobi_map_check(level_structure(m + 1), level_structure(m), projection_map(m), tests, cfg)


__all__ = [
    "CylindricalFunction",
    "cyl_bracket",
    "cyl_promote",
    "inclusion_check",
    "inclusion_map",
    "level_structure",
    "projection_check",
    "projection_map",
    "promotion_index",
]
