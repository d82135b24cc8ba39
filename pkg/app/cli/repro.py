from dataclasses import dataclass
from fractions import Fraction
from typing import Any
import click
from app.data import fixture_path, load_expectations, suites
from app.dsl.query import render_bool, run
from app.dsl.space_format import load_space
from app.schemas.reports import AxiomReport, Expectation, SymmetryReport
from app.space.counterfactual import EventClass
from app.space.mechanism import ConditionalEffect, EffectVerdict
from logging_config import logger
from utils.rational import format_rational


@dataclass
class Outcome:
    expectation: Expectation
    actual: str
    passed: bool

    def line(self) -> str:
        row = self.expectation
        if self.passed:
            return f'PASS {row.suite}: {row.script} -> {row.expected} [{row.provenance}]'
        return f'FAIL {row.suite}: {row.script} -> {self.actual}, expected {row.expected} [{row.provenance}]'


def primary_value(value: Any) -> str:
    """Short rendering of a transcript value as the reproduction table spells it."""
    if isinstance(value, bool):
        return render_bool(value)
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, EffectVerdict):
        return value.tag.value
    if isinstance(value, ConditionalEffect):
        return 'Active' if value.active else 'NotActive'
    if isinstance(value, AxiomReport):
        return 'OK' if value.ok else 'FAILED'
    if isinstance(value, SymmetryReport):
        return render_bool(value.symmetric)
    if isinstance(value, EventClass):
        return value.render()
    return str(value)


def reproduce(row: Expectation, spaces: dict = None) -> Outcome:
    spaces = {} if spaces is None else spaces
    if row.fixture not in spaces:
        spaces[row.fixture] = load_space(fixture_path(row.fixture))
    transcript = run(spaces[row.fixture], row.script)
    if row.expected.startswith('exit '):
        actual = f'exit {transcript.exit_code}'
        return Outcome(row, actual, actual == row.expected)
    if transcript.error is not None:
        return Outcome(row, f'error: {transcript.error}', False)
    if not transcript.results:
        return Outcome(row, 'no result', False)
    line, value = transcript.results[-1]
    actual = primary_value(value)
    passed = actual == row.expected and (row.contains is None or row.contains in line)
    if actual == row.expected and not passed:
        actual = f'{actual} without {row.contains!r} in {line!r}'
    return Outcome(row, actual, passed)


@click.command('repro')
@click.argument('suite')
def repro_command(suite: str) -> int:
    """Recompute the bundled worked examples of SUITE (or all) and compare with the expectation table."""
    expectations = load_expectations()
    known = suites(expectations)
    if suite != 'all' and suite not in known:
        raise click.BadParameter(f'unknown suite {suite!r}, expected one of {", ".join(known + ["all"])}',
                                 param_hint='SUITE')
    rows = [row for row in expectations if suite in ('all', row.suite)]
    spaces: dict = {}
    failures = 0
    for row in rows:
        outcome = reproduce(row, spaces)
        click.echo(outcome.line())
        failures += not outcome.passed
    if failures:
        logger.warning(f'{failures} of {len(rows)} reproduction rows failed')
        return 1
    click.echo(f'{len(rows)} rows passed')
    return 0
