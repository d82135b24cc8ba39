"""Exact probability measures on a finite product space.

Weights are ``Fraction`` values; a measure stores only its support. Sigma-algebras are
passed either as a coordinate set (the algebra H_S) or as an explicit partition of the
outcome space.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence, Union
from app.core.errors import ConditioningUndefined, MeasureError, SchemaError
from app.space.schema import CoordSet, Event, Outcome, SpaceSchema, projector

Sigma = Union[CoordSet, Sequence[Event]]


@dataclass(frozen=True)
class Measure:
    schema: SpaceSchema
    weights: Mapping[Outcome, Fraction]

    @classmethod
    def from_weights(cls, schema: SpaceSchema, weights: Mapping[Outcome, object]) -> 'Measure':
        support = {}
        for outcome, weight in weights.items():
            outcome = tuple(outcome)
            _check_outcome(schema, outcome)
            weight = Fraction(weight)
            if weight < 0:
                raise MeasureError(f'Negative weight {weight} at {schema.render_outcome(outcome)}')
            if weight:
                support[outcome] = support.get(outcome, Fraction(0)) + weight
        total = sum(support.values(), Fraction(0))
        if total != 1:
            raise MeasureError(f'Weights sum to {total}, deficit {1 - total}')
        return cls(schema, {outcome: support[outcome] for outcome in sorted(support)})

    @classmethod
    def dirac(cls, schema: SpaceSchema, outcome: Outcome) -> 'Measure':
        outcome = tuple(outcome)
        _check_outcome(schema, outcome)
        return cls(schema, {outcome: Fraction(1)})

    @classmethod
    def uniform(cls, schema: SpaceSchema) -> 'Measure':
        share = Fraction(1, schema.size)
        return cls(schema, {outcome: share for outcome in schema.outcomes})

    @classmethod
    def mixture(cls, schema: SpaceSchema, components: Iterable[tuple[Fraction, 'Measure']]) -> 'Measure':
        """The finite integral of a family of measures against mixing weights."""
        weights: dict[Outcome, Fraction] = {}
        for share, component in components:
            if not share:
                continue
            for outcome, weight in component.weights.items():
                weights[outcome] = weights.get(outcome, Fraction(0)) + share * weight
        return cls.from_weights(schema, weights)

    def pushforward(self, positions: CoordSet) -> 'Measure':
        """Image measure on Omega_S under the projection onto ``positions``."""
        key = projector(positions)
        weights: dict[Outcome, Fraction] = {}
        for outcome, weight in self.weights.items():
            image = key(outcome)
            weights[image] = weights.get(image, Fraction(0)) + weight
        return Measure(self.schema.restrict(positions), {k: weights[k] for k in sorted(weights)})

    def weight(self, outcome: Outcome) -> Fraction:
        return self.weights.get(tuple(outcome), Fraction(0))

    @property
    def support(self) -> Event:
        return frozenset(self.weights)

    def items(self):
        return self.weights.items()


def _check_outcome(schema: SpaceSchema, outcome: Outcome):
    if len(outcome) != len(schema.coords) or any(
            not 0 <= value < len(coord.labels) for value, coord in zip(outcome, schema.coords)):
        raise SchemaError(f'{outcome} is not an outcome of the schema')


def _same_schema(P: Measure, event: Event):
    width = len(P.schema.coords)
    for outcome in event:
        if len(outcome) != width:
            raise SchemaError(f'Event member {outcome} does not belong to the measure schema')
        break


def prob(P: Measure, A: Event) -> Fraction:
    _same_schema(P, A)
    if len(A) < len(P.weights):
        return sum((P.weights.get(o, Fraction(0)) for o in A), Fraction(0))
    return sum((w for o, w in P.weights.items() if o in A), Fraction(0))


def condition_event(P: Measure, G: Event) -> Measure:
    mass = prob(P, G)
    if not mass:
        raise ConditioningUndefined('Conditioning on an event of probability zero')
    return Measure(P.schema, {o: w / mass for o, w in P.weights.items() if o in G})


def block_key(schema: SpaceSchema, sigma: Sigma) -> Callable[[Outcome], Hashable]:
    """Map each outcome to the label of its atom in ``sigma``."""
    if isinstance(sigma, frozenset) and all(isinstance(i, int) for i in sigma):
        return projector(sigma)
    owner: dict[Outcome, int] = {}
    for index, block in enumerate(sigma):
        for outcome in block:
            if outcome in owner:
                raise SchemaError(f'Partition blocks overlap at {schema.render_outcome(outcome)}')
            owner[outcome] = index
    if len(owner) != schema.size:
        raise SchemaError('Partition does not cover the outcome space')
    return owner.__getitem__


def atoms(schema: SpaceSchema, sigma: Sigma) -> dict[Hashable, Event]:
    key = block_key(schema, sigma)
    blocks: dict[Hashable, set] = {}
    for outcome in schema.outcomes:
        blocks.setdefault(key(outcome), set()).add(outcome)
    return {k: frozenset(blocks[k]) for k in sorted(blocks)}


@dataclass(frozen=True)
class AtomConditional:
    """A version of P conditioned on a sigma-algebra, one measure per atom."""
    base: Measure
    sigma: Sigma
    table: Mapping[Event, Measure]
    null_atoms: tuple[Event, ...]

    def at(self, outcome: Outcome) -> Measure:
        for atom, measure in self.table.items():
            if outcome in atom:
                return measure
        raise SchemaError(f'{outcome} lies in no atom')

    def value(self, outcome: Outcome, A: Event) -> Fraction:
        return prob(self.at(outcome), A)

    @property
    def positive_atoms(self) -> list[Event]:
        return [atom for atom in self.table if atom not in self.null_atoms]


def condition_sigma(P: Measure, sigma: Sigma) -> AtomConditional:
    table, null_atoms = {}, []
    for atom in atoms(P.schema, sigma).values():
        if prob(P, atom):
            table[atom] = condition_event(P, atom)
        else:
            table[atom] = P
            null_atoms.append(atom)
    return AtomConditional(P, sigma, table, tuple(null_atoms))


def _mass_by_key(P: Measure, *keys: Callable) -> dict:
    masses: dict = {}
    for outcome, weight in P.weights.items():
        k = tuple(key(outcome) for key in keys)
        masses[k] = masses.get(k, Fraction(0)) + weight
    return masses


def independent(P: Measure, A: Event, B: Event, given: Event = None) -> bool:
    if given is not None:
        P = condition_event(P, given)
    return prob(P, A & B) == prob(P, A) * prob(P, B)


def independent_given_sigma(P: Measure, A: Event, B: Event, sigma: Sigma) -> bool:
    conditional = condition_sigma(P, sigma)
    return all(independent(conditional.table[atom], A, B) for atom in conditional.positive_atoms)


def independent_sigmas(P: Measure, first: Sigma, second: Sigma, given: Event = None) -> bool:
    """Product identity on every pair of generating atoms."""
    if given is not None:
        P = condition_event(P, given)
    first_key, second_key = block_key(P.schema, first), block_key(P.schema, second)
    joint = _mass_by_key(P, first_key, second_key)
    left = _mass_by_key(P, first_key)
    right = _mass_by_key(P, second_key)
    return all(joint.get((a, b), Fraction(0)) == left[(a,)] * right[(b,)] for (a,) in left for (b,) in right)


def independent_sigmas_given_sigma(P: Measure, first: Sigma, second: Sigma, sigma: Sigma) -> bool:
    conditional = condition_sigma(P, sigma)
    return all(independent_sigmas(conditional.table[atom], first, second) for atom in conditional.positive_atoms)


def as_equal(P: Measure, A: Event, B: Event) -> bool:
    return prob(P, A ^ B) == 0


def as_equal_given(P: Measure, G: Event, A: Event, B: Event) -> bool:
    return as_equal(condition_event(P, G), A, B)


def synchronized(P: Measure, first: Sigma, second: Sigma) -> bool:
    """Both sigma-algebras induce the same partition of the support of P."""
    first_key, second_key = block_key(P.schema, first), block_key(P.schema, second)
    forward: dict = {}
    backward: dict = {}
    for outcome in P.weights:
        a, b = first_key(outcome), second_key(outcome)
        if forward.setdefault(a, b) != b or backward.setdefault(b, a) != a:
            return False
    return True
