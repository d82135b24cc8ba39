"""Engine shortcuts against enumeration of every event of small spaces."""
import pytest
from app.space import measure as m
from app.space.counterfactual import WorldMirror, build_counterfactual, counterfactual_schema, is_symmetric, nway_schema
from app.space.measure import Measure
from app.space.mechanism import CausalSpace, Kernel, Mechanism, check_axioms
from app.space.schema import EMPTY, atoms_of, is_measurable_wrt, project
from tests.utils import (Enumerated, atom_masks, brute_violations, event_of, events_of, mask_of, measure_family,
                         outcome_weights, sigma_masks, subsets)

SMALL = [(2,), (3,), (2, 2), (2, 3), (3, 2), (2, 2, 2)]
MEDIUM = [(2, 3), (3, 3), (2, 2, 2), (2, 2, 3), (2, 2, 2, 2)]
# largest number of atoms two sigma-algebras may have together
ATOM_BUDGET = 12


def schema_of(counts):
    return nway_schema({'W': [(f'c{i + 1}', tuple('abc'[:n])) for i, n in enumerate(counts)]})


def sigma_pairs(schema):
    sizes = {S: len(atom_masks(schema, S)) for S in subsets(schema.all_positions)}
    return [(first, second) for first in sizes for second in sizes if sizes[first] + sizes[second] <= ATOM_BUDGET]


def test_measurability_on_cube():
    """
    Для пространства 2x2x2 проверяются все 256 событий на измеримость относительно каждого H_S.
    """
    schema = schema_of((2, 2, 2))
    for S in subsets(schema.all_positions):
        measurable = set(sigma_masks(schema, S))
        for mask in range(1 << schema.size):
            assert is_measurable_wrt(schema, event_of(schema, mask), S) == (mask in measurable)


@pytest.mark.parametrize('counts', SMALL, ids=str)
def test_measurability(counts):
    schema = schema_of(counts)
    for S in subsets(schema.all_positions):
        assert sorted(mask_of(schema, a) for a in atoms_of(schema, S)) == sorted(atom_masks(schema, S).values())
        measurable = set(sigma_masks(schema, S))
        for mask in range(1 << schema.size):
            assert is_measurable_wrt(schema, event_of(schema, mask), S) == (mask in measurable)


@pytest.mark.parametrize('counts', MEDIUM, ids=str)
def test_sigma_independence(counts):
    """
    Независимость σ-алгебр по атомам совпадает с перебором всех пар событий.
    """
    schema = schema_of(counts)
    pairs = sigma_pairs(schema)
    for P in measure_family(schema).values():
        enumerated = Enumerated(P)
        for first, second in pairs:
            assert m.independent_sigmas(P, first, second) == enumerated.independent(first, second)


@pytest.mark.parametrize('counts', MEDIUM, ids=str)
def test_synchronisation(counts):
    """
    Синхронизация по атомам совпадает с перебором пар событий, в том числе для мер с неполным носителем.
    """
    schema = schema_of(counts)
    pairs = sigma_pairs(schema)
    for P in measure_family(schema).values():
        enumerated = Enumerated(P)
        for first, second in pairs:
            assert m.synchronized(P, first, second) == enumerated.synchronized(first, second)


def kernel_measure(schema, S, argument, k):
    def on_fiber(i, o):
        return int(project(o, S) == argument)

    if k % 3 == 0:
        return outcome_weights(schema, on_fiber)
    if k % 3 == 1:
        return outcome_weights(schema, lambda i, o: i + 1)
    return outcome_weights(schema, lambda i, o: on_fiber(i, o) or int(i == 0))


def mixed_space(schema):
    P = measure_family(schema)['generic']
    kernels = {EMPTY: Kernel(EMPTY, {(): P})}
    k = 0
    for S in subsets(schema.all_positions):
        if not S:
            continue
        table = {}
        for argument in schema.partial_outcomes(S):
            table[argument] = kernel_measure(schema, S, argument, k + len(S))
            k += 1
        kernels[S] = Kernel(S, table)
    return CausalSpace(schema, P, Mechanism(kernels))


@pytest.mark.parametrize('counts', SMALL, ids=str)
def test_determinism_check(counts):
    """
    Проверка детерминизма по аргументам находит те же пары (ядро, аргумент), что и определение через все события.
    """
    space = mixed_space(schema_of(counts))
    schema = space.schema
    flagged = {(v.kernel, v.argument) for v in check_axioms(space).violations
               if v.axiom == 'interventional-determinism'}
    expected = {(schema.render_coordset(S), schema.render_partial(S, argument))
                for S, argument in brute_violations(space)}
    assert expected
    assert flagged == expected


def symmetrised(P: Measure, mirror: WorldMirror) -> Measure:
    return Measure.from_weights(P.schema, {o: (P.weight(o) + P.weight(mirror.swap_outcome(o))) / 2
                                           for o in P.schema.outcomes})


@pytest.mark.parametrize('components', [1, 2])
def test_symmetry_on_rectangles(components):
    schema = counterfactual_schema([(f'c{i + 1}', ('a', 'b')) for i in range(components)])
    mirror = WorldMirror.between(schema, 'F', 'CF')
    factual = events_of(schema, schema.world_positions('F'))
    counterfactual = events_of(schema, schema.world_positions('CF'))

    def swapped(event):
        return frozenset(mirror.swap_outcome(o) for o in event)

    verdicts = []
    for P in measure_family(schema).values():
        for Q in (P, symmetrised(P, mirror)):
            rectangles = all(m.prob(Q, A & B) == m.prob(Q, swapped(A) & swapped(B))
                             for A in factual for B in counterfactual)
            verdict = is_symmetric(build_counterfactual(schema, Q)).symmetric
            assert verdict == rectangles
            verdicts.append(verdict)
    assert True in verdicts and False in verdicts
