import itertools
from fractions import Fraction
from typing import Optional, Union
import yaml
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator
from app.core.errors import ModelError
from app.space.schema import LABEL_PATTERN, NAME_PATTERN
from utils.rational import parse_rational


def _label(value) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    return str(value).strip()


def _token(value: str, pattern, what: str) -> str:
    if not pattern.fullmatch(value):
        raise ModelError(f'Invalid {what} {value!r}')
    return value


def _mapping(value, what: str) -> dict:
    if not isinstance(value, dict):
        raise ModelError(f'{what} must be a mapping')
    return value


def _sequence(value, what: str) -> list:
    if not isinstance(value, list):
        raise ModelError(f'{what} must be a list')
    return value


def _rational(value) -> Fraction:
    try:
        return parse_rational(value)
    except ValueError as exc:
        raise ModelError(str(exc)) from None


def _weights(value) -> Optional[dict[str, Fraction]]:
    if value is None:
        return None
    return {_label(key): _rational(weight) for key, weight in _mapping(value, 'A weight table').items()}


def split_key(key: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in key.split(',')) if key.strip() else ()


def table_measure(keys: list[tuple[str, ...]], weights: Optional[dict[str, Fraction]],
                  default: Optional[Fraction], what: str) -> dict[tuple[str, ...], Fraction]:
    """Exact weights over ``keys``: listed entries, then ``default``, uniform when neither is given."""
    if weights is None and default is None:
        return {key: Fraction(1, len(keys)) for key in keys}
    listed = {split_key(k): w for k, w in (weights or {}).items()}
    unknown = set(listed) - set(keys)
    if unknown:
        raise ModelError(f'{what}: unknown entries {sorted(",".join(k) for k in unknown)}')
    if default is None and len(listed) != len(keys):
        raise ModelError(f'{what}: {len(keys) - len(listed)} entries missing and no default given')
    table = {key: listed.get(key, default) for key in keys}
    total = sum(table.values(), Fraction(0))
    if any(w < 0 for w in table.values()) or total != 1:
        raise ModelError(f'{what}: weights sum to {total}, deficit {1 - total}')
    return table


class Variable(BaseModel):
    name: str
    labels: list[str]

    @field_validator('name')
    @classmethod
    def validate_name(cls, value: str) -> str:
        return _token(value, NAME_PATTERN, 'variable name')

    @field_validator('labels', mode='before')
    @classmethod
    def validate_labels(cls, value) -> list[str]:
        labels = [_token(_label(v), LABEL_PATTERN, 'label') for v in _sequence(value, 'Labels')]
        if not labels or len(set(labels)) != len(labels):
            raise ModelError('Labels must be a non-empty list of distinct values')
        return labels


class EndogenousVariable(Variable):
    parents: list[str] = []
    noise: list[str] = []
    equation: dict[str, str]

    @field_validator('equation', mode='before')
    @classmethod
    def validate_equation(cls, value) -> dict[str, str]:
        return {_label(k): _label(v) for k, v in _mapping(value, 'An equation').items()}


class SCMModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str = 'scm'
    exogenous: list[Variable]
    noise_measure: Optional[dict[str, Fraction]] = None
    noise_default: Optional[Fraction] = None
    endogenous: list[EndogenousVariable]
    kernel_sets: Optional[list[list[str]]] = None

    @field_validator('name')
    @classmethod
    def validate_name(cls, value: str) -> str:
        return _token(value, NAME_PATTERN, 'model name')

    @field_validator('noise_measure', mode='before')
    @classmethod
    def validate_noise_measure(cls, value):
        return _weights(value)

    @field_validator('noise_default', mode='before')
    @classmethod
    def validate_noise_default(cls, value):
        return None if value is None else _rational(value)

    @model_validator(mode='after')
    def validate_structure(self) -> 'SCMModel':
        exogenous = {v.name: v for v in self.exogenous}
        endogenous = {v.name: v for v in self.endogenous}
        if len(exogenous) != len(self.exogenous) or len(endogenous) != len(self.endogenous):
            raise ModelError('Variable names must be unique')
        if set(exogenous) & set(endogenous):
            raise ModelError('Exogenous and endogenous variables share a name')
        for variable in self.endogenous:
            for parent in variable.parents:
                if parent not in endogenous or parent == variable.name:
                    raise ModelError(f'{variable.name}: unknown parent {parent}')
            for noise in variable.noise:
                if noise not in exogenous:
                    raise ModelError(f'{variable.name}: unknown noise variable {noise}')
            inputs = [endogenous[p].labels for p in variable.parents] + [exogenous[n].labels for n in variable.noise]
            for combination in itertools.product(*inputs):
                result = variable.equation.get(','.join(combination))
                if result is None:
                    raise ModelError(f'{variable.name}: equation has no value for ({",".join(combination)})')
                if result not in variable.labels:
                    raise ModelError(f'{variable.name}: equation gives unknown label {result}')
        return self

    def noise_outcomes(self) -> list[tuple[str, ...]]:
        return list(itertools.product(*(v.labels for v in self.exogenous)))

    def noise_weights(self) -> dict[tuple[str, ...], Fraction]:
        return table_measure(self.noise_outcomes(), self.noise_measure, self.noise_default, 'noise measure')


class BacktrackingModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    factual: SCMModel
    counterfactual: Optional[SCMModel] = None
    coupling: Union[str, dict[str, Fraction]] = 'diagonal'
    coupling_default: Optional[Fraction] = None

    @field_validator('coupling', mode='before')
    @classmethod
    def validate_coupling(cls, value):
        if isinstance(value, str):
            if value not in ('diagonal', 'independent'):
                raise ModelError(f'Unknown coupling {value!r}, expected diagonal, independent or a table')
            return value
        return _weights(value)

    @field_validator('coupling_default', mode='before')
    @classmethod
    def validate_coupling_default(cls, value):
        return None if value is None else _rational(value)

    @property
    def counterpart(self) -> SCMModel:
        return self.counterfactual or self.factual


class PotentialOutcome(BaseModel):
    variable: str
    do: dict[str, str]
    values: dict[str, str]

    @field_validator('do', 'values', mode='before')
    @classmethod
    def validate_tables(cls, value):
        return {_label(k): _label(v) for k, v in _mapping(value, 'A potential-outcome table').items()}

    def describe(self) -> str:
        return f'{self.variable}[' + ','.join(f'{k}={v}' for k, v in sorted(self.do.items())) + ']'


class POModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str = 'po'
    units: list[str]
    unit_measure: Optional[dict[str, Fraction]] = None
    endogenous: list[Variable]
    observed: dict[str, dict[str, str]]
    potential_outcomes: list[PotentialOutcome] = []

    @field_validator('name')
    @classmethod
    def validate_name(cls, value: str) -> str:
        return _token(value, NAME_PATTERN, 'model name')

    @field_validator('units', mode='before')
    @classmethod
    def validate_units(cls, value):
        units = [_label(u) for u in _sequence(value, 'Units')]
        if not units or len(set(units)) != len(units):
            raise ModelError('Units must be a non-empty list of distinct names')
        return units

    @field_validator('unit_measure', mode='before')
    @classmethod
    def validate_unit_measure(cls, value):
        return _weights(value)

    @field_validator('observed', mode='before')
    @classmethod
    def validate_observed(cls, value):
        return {_label(k): {_label(u): _label(v) for u, v in _mapping(table, f'observed {k}').items()}
                for k, table in _mapping(value, 'observed').items()}

    @model_validator(mode='after')
    def validate_structure(self) -> 'POModel':
        variables = {v.name: v for v in self.endogenous}
        for name, variable in variables.items():
            _check_unit_function(self.units, variable, self.observed.get(name), f'observed {name}')
        for outcome in self.potential_outcomes:
            if outcome.variable not in variables:
                raise ModelError(f'Unknown variable {outcome.variable}')
            for parent, label in outcome.do.items():
                if parent not in variables or label not in variables[parent].labels:
                    raise ModelError(f'{outcome.variable}: invalid assignment {parent}={label}')
            _check_unit_function(self.units, variables[outcome.variable], outcome.values, outcome.describe())
        return self

    def unit_weights(self) -> dict[str, Fraction]:
        table = table_measure([(u,) for u in self.units], self.unit_measure, None, 'unit measure')
        return {key[0]: weight for key, weight in table.items()}


def _check_unit_function(units: list[str], variable: Variable, values: Optional[dict[str, str]], what: str):
    if values is None:
        raise ModelError(f'Missing function for {what}')
    for unit in units:
        if unit not in values:
            raise ModelError(f'{what}: no value for unit {unit}')
        if values[unit] not in variable.labels:
            raise ModelError(f'{what}: unknown label {values[unit]} for unit {unit}')


def load_model(path: str, model_cls):
    """Read a YAML model file into ``model_cls``."""
    try:
        with open(path, encoding='utf-8') as stream:
            data = yaml.safe_load(stream)
    except OSError as exc:
        raise ModelError(f'Cannot read {path}: {exc.strerror}') from None
    except UnicodeDecodeError as exc:
        raise ModelError(f'Cannot read {path}: not UTF-8 text ({exc.reason} at byte {exc.start})') from None
    except yaml.YAMLError as exc:
        raise ModelError(f'{path}: {exc}') from None
    if not isinstance(data, dict):
        raise ModelError(f'{path}: expected a mapping at the top level')
    try:
        return model_cls.model_validate(data)
    except ValidationError as exc:
        problems = '; '.join(f'{".".join(map(str, e["loc"]))}: {e["msg"]}' for e in exc.errors())
        raise ModelError(f'{path}: {problems}') from None
