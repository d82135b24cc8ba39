"""World structure on causal spaces: cross-world axiom, event scope, symmetry, marginalisation, N-way builders."""
import enum
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union
from app.core.errors import SchemaError
from app.schemas.reports import AxiomReport, SymmetryReport, Violation
from app.space.measure import Measure
from app.space.mechanism import CausalSpace, Kernel, Mechanism, check_axioms
from app.space.schema import (EMPTY, Coordinate, CoordSet, Event, Outcome, PartialOutcome, SpaceSchema,
                              is_measurable_wrt, relative_projector)
from logging_config import logger

FACTUAL, COUNTERFACTUAL, CAUSAL = 'F', 'CF', 'W'

Components = Sequence[tuple[str, Sequence[str]]]
KernelInput = Union[Kernel, Mapping[PartialOutcome, Measure]]


@dataclass(frozen=True)
class WorldPartition:
    assignment: tuple[str, ...]
    worlds: tuple[str, ...]

    @classmethod
    def of(cls, schema: SpaceSchema) -> 'WorldPartition':
        if not schema.worlds:
            raise SchemaError('A space needs at least one world')
        return cls(tuple(coord.world for coord in schema.coords), schema.worlds)

    def positions(self, world: str) -> CoordSet:
        return frozenset(i for i, owner in enumerate(self.assignment) if owner == world)


@dataclass(frozen=True)
class WorldMirror:
    """Identification of two worlds' coordinates by component name."""
    first: str
    second: str
    pairs: tuple[tuple[int, int], ...]

    @classmethod
    def between(cls, schema: SpaceSchema, first: str, second: str) -> 'WorldMirror':
        if first == second:
            raise SchemaError(f'Cannot mirror world {first} onto itself')
        left, right = schema.world_positions(first), schema.world_positions(second)
        by_name = {schema.coords[i].name: i for i in right}
        if len(left) != len(right):
            raise SchemaError(f'Worlds {first} and {second} have different components')
        pairs = []
        for i in sorted(left):
            coord = schema.coords[i]
            j = by_name.get(coord.name)
            if j is None or schema.coords[j].labels != coord.labels:
                raise SchemaError(f'Mirror mismatch: {coord.key} has no counterpart in world {second}')
            pairs.append((i, j))
        return cls(first, second, tuple(pairs))

    @property
    def swap(self) -> dict[int, int]:
        mapping = {}
        for i, j in self.pairs:
            mapping[i], mapping[j] = j, i
        return mapping

    def swap_outcome(self, outcome: Outcome) -> Outcome:
        swapped = list(outcome)
        for i, j in self.pairs:
            swapped[i], swapped[j] = outcome[j], outcome[i]
        return tuple(swapped)

    def swap_coordset(self, positions: CoordSet) -> CoordSet:
        swap = self.swap
        return frozenset(swap.get(i, i) for i in positions)

    def swap_argument(self, positions: CoordSet, argument: PartialOutcome) -> PartialOutcome:
        swap = self.swap
        values = {swap.get(i, i): v for i, v in zip(sorted(positions), argument)}
        return tuple(values[i] for i in sorted(values))


def check_cross_world(space: CausalSpace) -> AxiomReport:
    """World-j marginals of K_S must match those of K_{S & T^j} for every world j."""
    report = AxiomReport()
    if space.mechanism is None:
        return report
    schema = space.schema
    partition = WorldPartition.of(schema)
    for world in partition.worlds:
        inside = partition.positions(world)
        for S, kernel in space.mechanism.kernels.items():
            lower_key = S & inside
            if lower_key == S:
                continue
            pair = f'K_{schema.render_coordset(S)} vs K_{schema.render_coordset(lower_key)} on world {world}'
            lower = space.mechanism.get(lower_key)
            if lower is None:
                report.uncheckable.append(pair)
                continue
            reduce = relative_projector(S, lower_key)
            incomplete = False
            for argument in kernel.arguments():
                reduced = reduce(argument)
                if reduced not in lower.table:
                    incomplete = True
                    continue
                here = kernel.table[argument].pushforward(inside)
                there = lower.table[reduced].pushforward(inside)
                if here == there:
                    continue
                atom = next(a for a in sorted(set(here.weights) | set(there.weights))
                            if here.weight(a) != there.weight(a))
                report.violations.append(Violation(
                    axiom='cross-world', kernel=schema.render_coordset(S),
                    argument=schema.render_partial(S, argument), witness=schema.render_partial(inside, atom),
                    detail=f'world {world} mass {here.weight(atom)} against {there.weight(atom)} '
                           f'under K_{schema.render_coordset(lower_key)}'))
            if incomplete:
                report.uncheckable.append(f'{pair} (partial table)')
    return report


def check_space(space: CausalSpace) -> AxiomReport:
    return check_axioms(space).merge(check_cross_world(space))


class EventScope(enum.Enum):
    TRIVIAL = 'trivial'
    WORLD = 'world'
    CROSS_WORLD = 'cross-world'


@dataclass(frozen=True)
class EventClass:
    scope: EventScope
    worlds: tuple[str, ...]

    def render(self) -> str:
        if self.scope is EventScope.WORLD:
            return f'world {self.worlds[0]}'
        if self.scope is EventScope.TRIVIAL:
            return 'trivial (all worlds)'
        return 'cross-world'


def classify_event(schema: SpaceSchema, A: Event) -> EventClass:
    if not A or len(A) == schema.size:
        return EventClass(EventScope.TRIVIAL, schema.worlds)
    owners = tuple(w for w in schema.worlds if is_measurable_wrt(schema, A, schema.world_positions(w)))
    if owners:
        return EventClass(EventScope.WORLD, owners)
    return EventClass(EventScope.CROSS_WORLD, ())


def resolve_mirror(space: CausalSpace, mirror: Optional[WorldMirror] = None) -> WorldMirror:
    if mirror is not None:
        return mirror
    if space.mirror is None:
        raise SchemaError('No world mirror declared for this space')
    return WorldMirror.between(space.schema, *space.mirror)


def is_symmetric(space: CausalSpace, mirror: Optional[WorldMirror] = None) -> SymmetryReport:
    mirror = resolve_mirror(space, mirror)
    schema = space.schema
    if len(schema.worlds) != 2:
        raise SchemaError(f'Symmetry needs exactly two worlds, got {len(schema.worlds)}')
    failures, uncheckable = [], []
    for outcome in sorted(_swap_closure(space.measure, mirror)):
        mirrored = mirror.swap_outcome(outcome)
        if outcome < mirrored and space.measure.weight(outcome) != space.measure.weight(mirrored):
            failures.append(f'P{schema.render_outcome(outcome)} = {space.measure.weight(outcome)} != '
                            f'{space.measure.weight(mirrored)} = P{schema.render_outcome(mirrored)}')
    if space.mechanism is not None:
        for S, kernel in space.mechanism.kernels.items():
            S_swapped = mirror.swap_coordset(S)
            other = space.mechanism.get(S_swapped)
            if other is None:
                uncheckable.append(f'K_{schema.render_coordset(S_swapped)}')
                continue
            for argument in kernel.arguments():
                swapped_argument = mirror.swap_argument(S, argument)
                if swapped_argument not in other.table:
                    uncheckable.append(f'K_{schema.render_coordset(S_swapped)}'
                                       f'{schema.render_partial(S_swapped, swapped_argument)}')
                    continue
                here, there = kernel.table[argument], other.table[swapped_argument]
                for outcome in sorted(_swap_closure(here, mirror) | _swap_closure(there, mirror)):
                    if here.weight(outcome) != there.weight(mirror.swap_outcome(outcome)):
                        failures.append(f'K_{schema.render_coordset(S)}{schema.render_partial(S, argument)} '
                                        f'at {schema.render_outcome(outcome)} does not mirror '
                                        f'K_{schema.render_coordset(S_swapped)}')
                        break
    return SymmetryReport(symmetric=not failures, failures=failures, uncheckable=uncheckable)


def _swap_closure(measure: Measure, mirror: WorldMirror) -> set:
    return set(measure.weights) | {mirror.swap_outcome(o) for o in measure.weights}


def marginalize(space: CausalSpace, keep: CoordSet, allow_world_drop: bool = False) -> CausalSpace:
    """Push P forward onto ``keep`` and lift kept events to cylinders for every kernel inside it."""
    keep = frozenset(keep)
    schema = space.schema
    if not keep <= schema.all_positions:
        raise SchemaError('Marginalised coordinates are not part of the schema')
    dropped = [w for w in schema.worlds if not keep & schema.world_positions(w)]
    if dropped and not allow_world_drop:
        raise SchemaError(f'Marginalisation would drop world(s) {", ".join(dropped)}')
    order = sorted(keep)
    new_schema = schema.restrict(keep)
    measure = space.measure.pushforward(keep)
    mechanism = None
    if space.mechanism is not None:
        kernels = {}
        for S, kernel in space.mechanism.kernels.items():
            if not S <= keep:
                continue
            S_new = frozenset(order.index(i) for i in S)
            kernels[S_new] = Kernel(S_new, {arg: m.pushforward(keep) for arg, m in kernel.table.items()})
        mechanism = Mechanism(kernels)
    mirror = None
    if space.mirror is not None and all(w in new_schema.worlds for w in space.mirror):
        try:
            WorldMirror.between(new_schema, *space.mirror)
            mirror = space.mirror
        except SchemaError:
            logger.warning(f'World mirror {space.mirror} does not survive marginalisation')
    return CausalSpace(new_schema, measure, mechanism, mirror)


def nway_schema(worlds: Mapping[str, Components]) -> SpaceSchema:
    coords = [Coordinate(world, name, tuple(labels)) for world, components in worlds.items()
              for name, labels in components]
    return SpaceSchema(tuple(coords))


def counterfactual_schema(components: Components) -> SpaceSchema:
    return nway_schema({FACTUAL: components, COUNTERFACTUAL: components})


def causal_schema(components: Components) -> SpaceSchema:
    return nway_schema({CAUSAL: components})


def _as_kernel(S: CoordSet, value: KernelInput) -> Kernel:
    if isinstance(value, Kernel):
        return value
    return Kernel(frozenset(S), dict(value))


def build_nway(schema: SpaceSchema, measure: Optional[Measure] = None,
               kernels: Optional[Mapping[CoordSet, KernelInput]] = None,
               mirror: Optional[tuple[str, str]] = None) -> CausalSpace:
    """Assemble an N-way space; K_{} defaults to P and P defaults to K_{}."""
    WorldPartition.of(schema)
    mechanism = None
    if kernels is not None:
        table = {frozenset(S): _as_kernel(S, value) for S, value in kernels.items()}
        if EMPTY not in table:
            if measure is None:
                raise SchemaError('Space needs a measure or a kernel on {}')
            table[EMPTY] = Kernel(EMPTY, {(): measure})
        if measure is None:
            if () not in table[EMPTY].table:
                raise SchemaError('Kernel on {} has no entry')
            measure = table[EMPTY].table[()]
        for S, kernel in table.items():
            for m in kernel.table.values():
                if m.schema != schema:
                    raise SchemaError(f'Kernel on {schema.render_coordset(S)} uses another schema')
        mechanism = Mechanism(table)
    if measure is None:
        raise SchemaError('Space needs a measure or a kernel on {}')
    if measure.schema != schema:
        raise SchemaError('Measure and schema disagree')
    if mirror is not None:
        WorldMirror.between(schema, *mirror)
    return CausalSpace(schema, measure, mechanism, mirror)


def build_counterfactual(schema: SpaceSchema, measure: Optional[Measure] = None,
                         kernels: Optional[Mapping[CoordSet, KernelInput]] = None) -> CausalSpace:
    if schema.worlds != (FACTUAL, COUNTERFACTUAL):
        raise SchemaError(f'A counterfactual space has worlds {FACTUAL} and {COUNTERFACTUAL}')
    return build_nway(schema, measure, kernels, mirror=(FACTUAL, COUNTERFACTUAL))


def build_causal(schema: SpaceSchema, measure: Optional[Measure] = None,
                 kernels: Optional[Mapping[CoordSet, KernelInput]] = None) -> CausalSpace:
    if len(schema.worlds) != 1:
        raise SchemaError('A causal space has a single world')
    return build_nway(schema, measure, kernels)
