from typing import Optional
from pydantic import BaseModel


class Violation(BaseModel):
    axiom: str
    kernel: str
    argument: str = '()'
    witness: str = ''
    detail: str = ''

    def render(self) -> str:
        line = f'VIOLATION {self.axiom} K_{self.kernel} at {self.argument}'
        if self.witness:
            line += f' witness {self.witness}'
        if self.detail:
            line += f': {self.detail}'
        return line


class AxiomReport(BaseModel):
    violations: list[Violation] = []
    uncheckable: list[str] = []

    @property
    def ok(self) -> bool:
        return not self.violations

    def merge(self, other: 'AxiomReport') -> 'AxiomReport':
        return AxiomReport(violations=self.violations + other.violations,
                           uncheckable=self.uncheckable + other.uncheckable)

    def lines(self) -> list[str]:
        lines = [violation.render() for violation in self.violations]
        lines += [f'UNCHECKABLE {item}' for item in self.uncheckable]
        lines.append('OK' if self.ok else f'FAILED ({len(self.violations)} violations)')
        return lines


class DerivationReport(BaseModel):
    intervened_on: str
    kept: list[str] = []
    dropped: list[str] = []
    partial: list[str] = []


class SymmetryReport(BaseModel):
    symmetric: bool
    failures: list[str] = []
    uncheckable: list[str] = []


class FundamentalReport(BaseModel):
    passed: bool
    kernel_preserved: bool
    version_of_conditional: bool
    witnesses: list[str] = []


class Expectation(BaseModel):
    suite: str
    fixture: str
    script: str
    expected: str
    provenance: str
    contains: Optional[str] = None
