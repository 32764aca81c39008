"""Pass/fail reports shared by the checking operations."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class CheckEntry:
    name: str
    passed: bool
    witness: str | None = None
    # informational lines (e.g. "asserted") do not affect the verdict
    informational: bool = False

    def line(self) -> str:
        if self.informational:
            return f"{self.name}: {self.witness or 'asserted'}"
        status = "pass" if self.passed else "FAIL"
        if self.witness and not self.passed:
            return f"{self.name}: {status} ({self.witness})"
        return f"{self.name}: {status}"

    def to_json(self) -> dict:
        out = {"name": self.name, "passed": self.passed}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.informational:
            out["informational"] = True
        return out


@dataclass
class Report:
    title: str
    entries: list[CheckEntry] = field(default_factory=list)
    caveats: list[str] = field(default_factory=list)

    def add(self, name: str, passed: bool, witness: str | None = None) -> None:
        self.entries.append(CheckEntry(name, bool(passed), witness))

    def note(self, name: str, text: str) -> None:
        self.entries.append(CheckEntry(name, True, text, informational=True))

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries if not e.informational)

    def failures(self) -> list[CheckEntry]:
        return [e for e in self.entries if not e.passed and not e.informational]

    def __bool__(self) -> bool:
        return self.passed

    def text(self) -> str:
        lines = [f"{self.title}: {'PASS' if self.passed else 'FAIL'}"]
        lines += ["  " + e.line() for e in self.entries]
        lines += ["  caveat: " + c for c in self.caveats]
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "title": self.title,
            "passed": self.passed,
            "checks": [e.to_json() for e in self.entries],
            "caveats": list(self.caveats),
        }
