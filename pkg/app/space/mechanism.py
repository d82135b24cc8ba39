"""Causal kernels, causal mechanisms and the operations defined on causal spaces."""
import enum
import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping, Optional
from app.core.config import settings
from app.core.errors import ConditioningUndefined, MissingKernel, SchemaError
from app.schemas.reports import AxiomReport, DerivationReport, FundamentalReport, Violation
from app.space.measure import Measure, Sigma, condition_event, independent_sigmas, prob, synchronized
from app.space.schema import (EMPTY, CoordSet, Event, PartialOutcome, SpaceSchema, combine, fibers, projector,
                              relative_projector)
from logging_config import logger


def key_order(positions: CoordSet) -> tuple:
    return len(positions), tuple(sorted(positions))


@dataclass(frozen=True)
class Kernel:
    on: CoordSet
    table: Mapping[PartialOutcome, Measure]

    def measure_at(self, argument: PartialOutcome) -> Measure:
        try:
            return self.table[tuple(argument)]
        except KeyError:
            raise MissingKernel(f'Kernel on {sorted(self.on)} has no entry at {tuple(argument)}') from None

    def value(self, argument: PartialOutcome, A: Event) -> Fraction:
        return prob(self.measure_at(argument), A)

    def arguments(self) -> list[PartialOutcome]:
        return sorted(self.table)

    def is_total(self, schema: SpaceSchema) -> bool:
        count = 1
        for i in self.on:
            count *= len(schema.coords[i].labels)
        return len(self.table) == count


@dataclass(frozen=True)
class Mechanism:
    kernels: Mapping[CoordSet, Kernel]

    def __post_init__(self):
        if EMPTY not in self.kernels:
            raise SchemaError('A causal mechanism must contain the kernel on the empty set')
        ordered = {key: self.kernels[key] for key in sorted(self.kernels, key=key_order)}
        object.__setattr__(self, 'kernels', ordered)

    def get(self, positions: CoordSet) -> Optional[Kernel]:
        return self.kernels.get(frozenset(positions))

    def require(self, positions: CoordSet, schema: SpaceSchema = None) -> Kernel:
        kernel = self.get(positions)
        if kernel is None:
            shown = schema.render_coordset(positions) if schema else sorted(positions)
            raise MissingKernel(f'No causal kernel on {shown}')
        return kernel

    def keys(self) -> list[CoordSet]:
        return list(self.kernels)

    def is_total(self, schema: SpaceSchema) -> bool:
        if len(self.kernels) != 2 ** len(schema.coords):
            return False
        return all(kernel.is_total(schema) for kernel in self.kernels.values())


@dataclass(frozen=True)
class CausalSpace:
    """A probability space with an optional causal mechanism and world labels from its schema."""
    schema: SpaceSchema
    measure: Measure
    mechanism: Optional[Mechanism] = None
    mirror: Optional[tuple[str, str]] = None

    @property
    def worlds(self) -> tuple[str, ...]:
        return self.schema.worlds

    def kernel(self, positions: CoordSet) -> Kernel:
        if self.mechanism is None:
            raise MissingKernel(f'Space has no causal mechanism, kernel on '
                                f'{self.schema.render_coordset(positions)} unavailable')
        return self.mechanism.require(positions, self.schema)

    def render_key(self, positions: CoordSet) -> str:
        return self.schema.render_coordset(positions)


class EffectTag(enum.Enum):
    NO_EFFECT = 'NoEffect'
    ACTIVE = 'Active'
    DORMANT = 'Dormant'
    UNDETERMINED = 'Undetermined'


@dataclass(frozen=True)
class EffectWitness:
    kernel: CoordSet
    argument: PartialOutcome
    value: Fraction
    reference: Fraction
    reference_kernel: Optional[CoordSet] = None


@dataclass(frozen=True)
class EffectVerdict:
    tag: EffectTag
    witness: Optional[EffectWitness] = None
    missing: tuple[str, ...] = ()
    consistent_on_present_pairs: bool = False

    def render(self, schema: SpaceSchema) -> str:
        if self.witness is None:
            if self.tag is EffectTag.UNDETERMINED:
                note = ', no violation on present pairs' if self.consistent_on_present_pairs else ''
                return f'{self.tag.value} (missing {", ".join(self.missing)}{note})'
            return self.tag.value
        w = self.witness
        where = f'K_{schema.render_coordset(w.kernel)}{schema.render_partial(w.kernel, w.argument)}'
        if w.reference_kernel is None:
            other = 'P'
        else:
            other = f'K_{schema.render_coordset(w.reference_kernel)}'
        return f'{self.tag.value}: {where} = {w.value} != {w.reference} = {other}'


@dataclass(frozen=True)
class ConditionalEffect:
    active: bool
    witness: Optional[PartialOutcome]
    values: Mapping[PartialOutcome, Optional[Fraction]]
    reference: Fraction


def _first_difference(first: Measure, second: Measure):
    for outcome in sorted(set(first.weights) | set(second.weights)):
        if first.weight(outcome) != second.weight(outcome):
            return outcome
    return None


def check_axioms(space: CausalSpace) -> AxiomReport:
    """Trivial-intervention and interventional-determinism checks over every present kernel."""
    report = AxiomReport()
    if space.mechanism is None:
        return report
    schema = space.schema
    empty = space.mechanism.require(EMPTY)
    if () not in empty.table:
        report.violations.append(Violation(axiom='trivial-intervention', kernel='{}',
                                           detail='K_{} has no entry'))
    else:
        differs = _first_difference(empty.table[()], space.measure)
        if differs is not None:
            report.violations.append(Violation(
                axiom='trivial-intervention', kernel='{}', witness=schema.render_outcome(differs),
                detail=f'K_{{}} gives {empty.table[()].weight(differs)}, P gives {space.measure.weight(differs)}'))
    for key, kernel in space.mechanism.kernels.items():
        project = projector(key)
        for argument in kernel.arguments():
            for outcome, weight in kernel.table[argument].items():
                if project(outcome) != argument:
                    report.violations.append(Violation(
                        axiom='interventional-determinism', kernel=schema.render_coordset(key),
                        argument=schema.render_partial(key, argument), witness=schema.render_outcome(outcome),
                        detail=f'mass {weight} off the argument'))
                    break
    return report


def intervention_measure(schema: SpaceSchema, positions: CoordSet, weights: Mapping) -> Measure:
    """A measure Q on Omega_U given as ``{omega_U: weight}``."""
    return Measure.from_weights(schema.restrict(positions), weights)


def point_measure(schema: SpaceSchema, positions: CoordSet, argument: PartialOutcome) -> Measure:
    return Measure.dirac(schema.restrict(positions), argument)


def _candidate_keys(mechanism: Mechanism, U: CoordSet) -> list[CoordSet]:
    candidates = set()
    for key in mechanism.keys():
        if U <= key:
            rest = key - U
            for size in range(len(U) + 1):
                for part in itertools.combinations(sorted(U), size):
                    candidates.add(rest | frozenset(part))
    return sorted(candidates, key=key_order)


def _derive_kernel(space: CausalSpace, S: CoordSet, U: CoordSet, Q: Measure) -> tuple[Kernel, bool]:
    source = space.mechanism.require(S | U)
    if U <= S:
        return source, False
    free = U - S
    margin = Q.pushforward(frozenset(sorted(U).index(i) for i in free))
    table, partial = {}, False
    for argument in space.schema.partial_outcomes(S):
        components = []
        for values, share in margin.items():
            full = combine(S, argument, free, values)
            measure = source.table.get(full)
            if measure is None:
                break
            components.append((share, measure))
        else:
            table[argument] = Measure.mixture(space.schema, components)
            continue
        partial = True
    return Kernel(S, table), partial


def derive_intervention(space: CausalSpace, U: CoordSet, Q: Measure) -> tuple[CausalSpace, DerivationReport]:
    """Intervention do(U, Q): new measure and every kernel derivable from the present ones."""
    U = frozenset(U)
    schema = space.schema
    kernel_U = space.kernel(U)
    if Q.schema != schema.restrict(U):
        raise SchemaError(f'Intervention measure is not defined on {schema.render_coordset(U)}')
    for argument in Q.weights:
        if argument not in kernel_U.table:
            _missing(schema, U, argument)
    report = DerivationReport(intervened_on=schema.render_coordset(U))
    kernels = {}
    for S in _candidate_keys(space.mechanism, U):
        kernel, partial = _derive_kernel(space, S, U, Q)
        if not kernel.table:
            continue
        kernels[S] = kernel
        report.kept.append(schema.render_coordset(S))
        if partial:
            report.partial.append(schema.render_coordset(S))
    for S in space.mechanism.keys():
        if S not in kernels:
            report.dropped.append(schema.render_coordset(S))
    new_measure = kernels[EMPTY].table[()]
    if report.dropped:
        logger.warning(f'Intervention on {report.intervened_on} dropped kernels {", ".join(report.dropped)}')
    return replace(space, measure=new_measure, mechanism=Mechanism(kernels)), report


def _missing(schema: SpaceSchema, U: CoordSet, argument: PartialOutcome):
    raise MissingKernel(f'K_{schema.render_coordset(U)} has no entry at {schema.render_partial(U, argument)}')


def intervene(space: CausalSpace, U: CoordSet, Q: Measure) -> CausalSpace:
    new_space, report = derive_intervention(space, U, Q)
    logger.info(f'Intervened on {report.intervened_on}, {len(report.kept)} kernels derived')
    return new_space


def classify_effect(space: CausalSpace, U: CoordSet, A: Event) -> EffectVerdict:
    U = frozenset(U)
    if not U:
        return EffectVerdict(EffectTag.NO_EFFECT)
    schema = space.schema
    mechanism = space.mechanism
    kernel_U = mechanism.get(U) if mechanism else None
    if kernel_U is None:
        return EffectVerdict(EffectTag.UNDETERMINED, missing=(f'K_{schema.render_coordset(U)}',))
    reference = prob(space.measure, A)
    for argument in kernel_U.arguments():
        value = kernel_U.value(argument, A)
        if value != reference:
            return EffectVerdict(EffectTag.ACTIVE, EffectWitness(U, argument, value, reference))
    if not kernel_U.is_total(schema):
        return EffectVerdict(EffectTag.UNDETERMINED, missing=(f'K_{schema.render_coordset(U)} (partial table)',))
    for S in mechanism.keys():
        if not S & U:
            continue
        lower = mechanism.get(S - U)
        if lower is None:
            continue
        drop = relative_projector(S, S - U)
        kernel = mechanism.get(S)
        for argument in kernel.arguments():
            reduced = drop(argument)
            if reduced not in lower.table:
                continue
            value, other = kernel.value(argument, A), lower.value(reduced, A)
            if value != other:
                return EffectVerdict(EffectTag.DORMANT, EffectWitness(S, argument, value, other, S - U))
    if mechanism.is_total(schema):
        return EffectVerdict(EffectTag.NO_EFFECT)
    return EffectVerdict(EffectTag.UNDETERMINED, missing=_missing_pairs(space, U), consistent_on_present_pairs=True)


def _missing_pairs(space: CausalSpace, U: CoordSet) -> tuple[str, ...]:
    schema, mechanism = space.schema, space.mechanism
    if 2 ** len(schema.coords) > settings.KERNEL_BUDGET:
        return ('kernels outside the present keys',)
    missing = []
    for size in range(len(schema.coords) + 1):
        for S in itertools.combinations(range(len(schema.coords)), size):
            S = frozenset(S)
            if not S & U:
                continue
            for key in (S, S - U):
                kernel = mechanism.get(key)
                name = f'K_{schema.render_coordset(key)}'
                if (kernel is None or not kernel.is_total(schema)) and name not in missing:
                    missing.append(name)
    return tuple(missing)


def conditional_active_effect(space: CausalSpace, U: CoordSet, A: Event, G: Event) -> ConditionalEffect:
    """Whether some intervention on U moves the probability of A given the observation G."""
    kernel_U = space.kernel(frozenset(U))
    reference = prob(condition_event(space.measure, G), A)
    values, witness = {}, None
    for argument in kernel_U.arguments():
        measure = kernel_U.table[argument]
        try:
            values[argument] = prob(condition_event(measure, G), A)
        except ConditioningUndefined:
            values[argument] = None
            continue
        if witness is None and values[argument] != reference:
            witness = argument
    return ConditionalEffect(witness is not None, witness, values, reference)


def _tabulated(space: CausalSpace, U: CoordSet) -> list[Measure]:
    kernel = space.kernel(frozenset(U))
    if not kernel.is_total(space.schema):
        logger.warning(f'K_{space.render_key(U)} is partial, quantifying over its tabulated arguments only')
    return [kernel.table[argument] for argument in kernel.arguments()]


def causal_independent(space: CausalSpace, U: CoordSet, A: Event, B: Event) -> bool:
    both = A & B
    return all(prob(m, both) == prob(m, A) * prob(m, B) for m in _tabulated(space, U))


def causally_equal(space: CausalSpace, U: CoordSet, A: Event, B: Event) -> bool:
    difference = A ^ B
    return all(prob(m, difference) == 0 for m in _tabulated(space, U))


def causally_independent_sigmas(space: CausalSpace, U: CoordSet, first: Sigma, second: Sigma) -> bool:
    return all(independent_sigmas(m, first, second) for m in _tabulated(space, U))


def causally_synchronized(space: CausalSpace, U: CoordSet, first: Sigma, second: Sigma) -> bool:
    return all(synchronized(m, first, second) for m in _tabulated(space, U))


def _positive_atoms(space: CausalSpace, U: CoordSet):
    """Yield (omega_U, K_U(omega_U), P conditioned on the atom) over P-positive atoms of H_U."""
    kernel = space.kernel(U)
    for argument, atom in fibers(space.schema, U).items():
        if not prob(space.measure, atom):
            continue
        if argument not in kernel.table:
            _missing(space.schema, U, argument)
        yield argument, kernel.table[argument], condition_event(space.measure, atom)


def is_source(space: CausalSpace, U: CoordSet, A: Event) -> bool:
    return all(prob(k, A) == prob(c, A) for _, k, c in _positive_atoms(space, frozenset(U)))


def source_of_sigma(space: CausalSpace, U: CoordSet, S: CoordSet) -> bool:
    return all(k.pushforward(S) == c.pushforward(S) for _, k, c in _positive_atoms(space, frozenset(U)))


def global_source(space: CausalSpace, U: CoordSet) -> bool:
    return all(k == c for _, k, c in _positive_atoms(space, frozenset(U)))


def verify_fundamental(space: CausalSpace, U: CoordSet, Q: Measure) -> FundamentalReport:
    """After do(U, Q) the kernel on U is unchanged and is a version of the new P given H_U."""
    U = frozenset(U)
    schema = space.schema
    new_space = intervene(space, U, Q)
    before, after = space.kernel(U), new_space.kernel(U)
    witnesses = []
    preserved = True
    for argument in sorted(set(before.table) | set(after.table)):
        if before.table.get(argument) != after.table.get(argument):
            preserved = False
            witnesses.append(f'K_{schema.render_coordset(U)} changed at {schema.render_partial(U, argument)}')
    version = True
    for argument, kernel_measure, conditional in _positive_atoms(new_space, U):
        if kernel_measure != conditional:
            version = False
            witnesses.append(f'K_{schema.render_coordset(U)} differs from the conditional at '
                             f'{schema.render_partial(U, argument)}')
    return FundamentalReport(passed=preserved and version, kernel_preserved=preserved,
                             version_of_conditional=version, witnesses=witnesses)
