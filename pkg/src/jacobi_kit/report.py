"""Verification reports: named checks with witnesses, rendered for humans or machines."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Check:
    name: str
    passed: bool
    backend: str
    witness: dict | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        out = {"name": self.name, "status": "pass" if self.passed else "fail", "backend": self.backend}
        if self.detail:
            out["detail"] = self.detail
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class VerificationReport:
    title: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "status": "pass" if self.passed else "fail",
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_text(self) -> str:
        lines = [f"{self.title}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            lines.append(f"  [{'pass' if c.passed else 'FAIL'}] {c.name} ({c.backend})")
            if c.detail:
                lines.append(f"      {c.detail}")
            if c.witness:
                for key, value in c.witness.items():
                    lines.append(f"      {key}: {value}")
        return "\n".join(lines)
