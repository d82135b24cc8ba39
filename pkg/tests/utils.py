"""Brute-force oracles quantifying over every event of small spaces.

Events are bitmasks over ``schema.outcomes``; measures become integer masses over a common denominator.
"""
import itertools
import math
from fractions import Fraction
from app.space.measure import Measure
from app.space.mechanism import CausalSpace
from app.space.schema import CoordSet, Event, Outcome, SpaceSchema, project


def subsets(positions) -> list[CoordSet]:
    positions = sorted(positions)
    return [frozenset(c) for size in range(len(positions) + 1) for c in itertools.combinations(positions, size)]


def mask_of(schema: SpaceSchema, event: Event) -> int:
    return sum(1 << i for i, outcome in enumerate(schema.outcomes) if outcome in event)


def event_of(schema: SpaceSchema, mask: int) -> Event:
    return frozenset(outcome for i, outcome in enumerate(schema.outcomes) if mask >> i & 1)


def atom_masks(schema: SpaceSchema, positions: CoordSet) -> dict[tuple, int]:
    """Fiber of every partial outcome on ``positions``, grouped by direct projection."""
    blocks: dict[tuple, int] = {}
    for i, outcome in enumerate(schema.outcomes):
        key = project(outcome, positions)
        blocks[key] = blocks.get(key, 0) | 1 << i
    return blocks


def sigma_masks(schema: SpaceSchema, positions: CoordSet) -> list[int]:
    """Every event of H_S: all unions of its atoms."""
    blocks = list(atom_masks(schema, positions).values())
    events = []
    for choice in range(2 ** len(blocks)):
        mask = 0
        for k, block in enumerate(blocks):
            if choice >> k & 1:
                mask |= block
        events.append(mask)
    return events


def events_of(schema: SpaceSchema, positions: CoordSet) -> list[Event]:
    return [event_of(schema, mask) for mask in sigma_masks(schema, positions)]


def masses(P: Measure) -> tuple[list[int], int]:
    """Integer mass of every event mask and the denominator they share."""
    weights = [P.weights.get(outcome, Fraction(0)) for outcome in P.schema.outcomes]
    denominator = math.lcm(*(w.denominator for w in weights))
    units = [int(w * denominator) for w in weights]
    table = [0] * (1 << len(units))
    for mask in range(1, len(table)):
        low = (mask & -mask).bit_length() - 1
        table[mask] = table[mask & (mask - 1)] + units[low]
    return table, denominator


class Enumerated:
    """Every event of a measure's space as a bitmask, with the integer mass of each."""

    def __init__(self, P: Measure):
        self.schema = P.schema
        self.mass, self.total = masses(P)
        self._sigmas: dict[CoordSet, list[int]] = {}

    def sigma(self, positions: CoordSet) -> list[int]:
        if positions not in self._sigmas:
            self._sigmas[positions] = sigma_masks(self.schema, positions)
        return self._sigmas[positions]

    def independent(self, first: CoordSet, second: CoordSet) -> bool:
        mass, total = self.mass, self.total
        return all(mass[A & B] * total == mass[A] * mass[B] for A in self.sigma(first) for B in self.sigma(second))

    def synchronized(self, first: CoordSet, second: CoordSet) -> bool:
        mass = self.mass
        left, right = self.sigma(first), self.sigma(second)
        forward = all(any(mass[A ^ B] == 0 for B in right) for A in left)
        backward = all(any(mass[A ^ B] == 0 for A in left) for B in right)
        return forward and backward


def brute_deterministic_at(schema: SpaceSchema, positions: CoordSet, argument: tuple, measure: Measure) -> bool:
    """K_S(w, A & B) == 1_A(w) K_S(w, B) for every A in H_S and every event B."""
    mass, _ = masses(measure)
    fiber = atom_masks(schema, positions)[argument]
    everything = range(1 << len(schema.outcomes))
    for A in sigma_masks(schema, positions):
        inside = bool(A & fiber)
        for B in everything:
            if mass[A & B] != (mass[B] if inside else 0):
                return False
    return True


def brute_violations(space: CausalSpace) -> set[tuple[CoordSet, tuple]]:
    return {(S, argument) for S, kernel in space.mechanism.kernels.items() for argument in kernel.arguments()
            if not brute_deterministic_at(space.schema, S, argument, kernel.table[argument])}


def outcome_weights(schema: SpaceSchema, weight) -> Measure:
    """Normalised measure from integer weights ``weight(index, outcome)``; zero weights are left out."""
    raw = {o: weight(i, o) for i, o in enumerate(schema.outcomes)}
    total = sum(raw.values())
    return Measure.from_weights(schema, {o: Fraction(w, total) for o, w in raw.items() if w})


def measure_family(schema: SpaceSchema) -> dict[str, Measure]:
    """Uniform, generic, sparse, diagonal and product measures on ``schema``."""
    def product(_, outcome: Outcome) -> int:
        return math.prod(v + 1 for v in outcome)

    return {
        'uniform': outcome_weights(schema, lambda i, o: 1),
        'generic': outcome_weights(schema, lambda i, o: i + 1),
        'sparse': outcome_weights(schema, lambda i, o: i % 3),
        'diagonal': outcome_weights(schema, lambda i, o: int(len(set(o)) <= 1)),
        'product': outcome_weights(schema, product),
    }
