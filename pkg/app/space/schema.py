"""Finite product spaces: coordinates, outcomes, events and coordinate sub-sigma-algebras.

An outcome is a tuple of label indices in schema order, an event is a frozenset of
outcomes and a coordinate set is a frozenset of schema positions. Partial outcomes
(omega_S) are tuples ordered by ascending position.
"""
import itertools
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from operator import itemgetter
from typing import Callable, Iterable, Mapping, Sequence
from app.core.config import settings
from app.core.errors import SchemaError

Outcome = tuple[int, ...]
PartialOutcome = tuple[int, ...]
Event = frozenset[Outcome]
CoordSet = frozenset[int]

EMPTY: CoordSet = frozenset()

# tokens the .cfs and .cfq grammars accept for names and labels
NAME_PATTERN = re.compile(r'[A-Za-z_][A-Za-z0-9_\-]*')
LABEL_PATTERN = re.compile(r'[A-Za-z0-9_][A-Za-z0-9_\-+]*')


@dataclass(frozen=True)
class Coordinate:
    world: str
    name: str
    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, 'labels', tuple(self.labels))
        if not self.labels:
            raise SchemaError(f'Coordinate {self.key} needs at least one label')
        if len(set(self.labels)) != len(self.labels):
            raise SchemaError(f'Coordinate {self.key} has repeated labels')

    @property
    def key(self) -> str:
        return f'{self.world}.{self.name}'

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise SchemaError(f'Unknown label {label!r} for coordinate {self.key}') from None


@dataclass(frozen=True)
class SpaceSchema:
    coords: tuple[Coordinate, ...]
    _positions: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, 'coords', tuple(self.coords))
        positions = {}
        for position, coord in enumerate(self.coords):
            if coord.key in positions:
                raise SchemaError(f'Coordinate {coord.key} is declared twice')
            positions[coord.key] = position
        size = math.prod(len(coord.labels) for coord in self.coords)
        if size > settings.MAX_OUTCOMES:
            raise SchemaError(f'Space has {size} outcomes, more than the limit of {settings.MAX_OUTCOMES}')
        object.__setattr__(self, '_positions', positions)

    @cached_property
    def worlds(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(coord.world for coord in self.coords))

    @cached_property
    def outcomes(self) -> tuple[Outcome, ...]:
        return tuple(itertools.product(*(range(len(coord.labels)) for coord in self.coords)))

    @cached_property
    def omega(self) -> Event:
        return frozenset(self.outcomes)

    @property
    def size(self) -> int:
        return len(self.outcomes)

    @property
    def all_positions(self) -> CoordSet:
        return frozenset(range(len(self.coords)))

    def position(self, key: str) -> int:
        try:
            return self._positions[key]
        except KeyError:
            raise SchemaError(f'Unknown coordinate {key!r}') from None

    def positions(self, keys: Iterable[str]) -> CoordSet:
        return frozenset(self.position(key) for key in keys)

    def world_positions(self, world: str) -> CoordSet:
        if world not in self.worlds:
            raise SchemaError(f'Unknown world {world!r}')
        return frozenset(i for i, coord in enumerate(self.coords) if coord.world == world)

    def label_index(self, position: int, label: str) -> int:
        return self.coords[position].index(label)

    def restrict(self, positions: CoordSet) -> 'SpaceSchema':
        return SpaceSchema(tuple(self.coords[i] for i in sorted(positions)))

    def partial_outcomes(self, positions: CoordSet) -> list[PartialOutcome]:
        return list(itertools.product(*(range(len(self.coords[i].labels)) for i in sorted(positions))))

    def outcome_of(self, labels: Sequence[str]) -> Outcome:
        if len(labels) != len(self.coords):
            raise SchemaError(f'Expected {len(self.coords)} labels, got {len(labels)}')
        return tuple(coord.index(label) for coord, label in zip(self.coords, labels))

    def assignment(self, mapping: Mapping[str, str]) -> dict[int, int]:
        """Resolve ``{'F.class': 'Y'}`` into ``{position: label index}``."""
        return {self.position(key): self.label_index(self.position(key), label) for key, label in mapping.items()}

    def argument(self, positions: CoordSet, mapping: Mapping[str, str]) -> PartialOutcome:
        resolved = self.assignment(mapping)
        if set(resolved) != set(positions):
            raise SchemaError(f'Assignment {dict(mapping)} does not cover exactly {self.render_coordset(positions)}')
        return tuple(resolved[i] for i in sorted(positions))

    def render_coordset(self, positions: CoordSet) -> str:
        return '{' + ','.join(self.coords[i].key for i in sorted(positions)) + '}'

    def render_partial(self, positions: CoordSet, values: PartialOutcome) -> str:
        pairs = (f'{self.coords[i].key}={self.coords[i].labels[v]}' for i, v in zip(sorted(positions), values))
        return '(' + ', '.join(pairs) + ')'

    def render_outcome(self, outcome: Outcome) -> str:
        return self.render_partial(self.all_positions, outcome)


def projector(positions: CoordSet) -> Callable[[Sequence[int]], PartialOutcome]:
    order = sorted(positions)
    if not order:
        return lambda outcome: ()
    if len(order) == 1:
        only = order[0]
        return lambda outcome: (outcome[only],)
    return itemgetter(*order)


def project(outcome: Outcome, positions: CoordSet) -> PartialOutcome:
    return projector(positions)(outcome)


def relative_projector(source: CoordSet, target: CoordSet) -> Callable[[PartialOutcome], PartialOutcome]:
    """Project a partial outcome on ``source`` down to ``target`` (a subset of source)."""
    order = sorted(source)
    return projector(frozenset(order.index(i) for i in target))


def combine(first: CoordSet, first_values: PartialOutcome,
            second: CoordSet, second_values: PartialOutcome) -> PartialOutcome:
    values = dict(zip(sorted(first), first_values))
    values.update(zip(sorted(second), second_values))
    return tuple(values[i] for i in sorted(values))


def cylinder(schema: SpaceSchema, assignment: Mapping[str, str]) -> Event:
    resolved = schema.assignment(assignment)
    return frozenset(o for o in schema.outcomes if all(o[i] == v for i, v in resolved.items()))


def fibers(schema: SpaceSchema, positions: CoordSet) -> dict[PartialOutcome, Event]:
    """Atoms of H_S keyed by the partial outcome they share, in ascending order."""
    key = projector(positions)
    blocks: dict[PartialOutcome, set] = {}
    for outcome in schema.outcomes:
        blocks.setdefault(key(outcome), set()).add(outcome)
    return {k: frozenset(blocks[k]) for k in sorted(blocks)}


def atoms_of(schema: SpaceSchema, positions: CoordSet) -> list[Event]:
    return list(fibers(schema, positions).values())


def is_measurable_wrt(schema: SpaceSchema, event: Event, positions: CoordSet) -> bool:
    key = projector(positions)
    block_size = schema.size // math.prod(len(schema.coords[i].labels) for i in positions)
    counts: dict[PartialOutcome, int] = {}
    for outcome in event:
        k = key(outcome)
        counts[k] = counts.get(k, 0) + 1
    return all(count == block_size for count in counts.values())
