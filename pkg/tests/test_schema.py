import pytest
from app.core.config import settings
from app.core.errors import SchemaError
from app.space.counterfactual import causal_schema, counterfactual_schema
from app.space.schema import (EMPTY, Coordinate, SpaceSchema, atoms_of, combine, cylinder, fibers,
                              is_measurable_wrt, project, projector, relative_projector)

EXAM = counterfactual_schema([('class', ('Y', 'N')), ('exam', ('P', 'F'))])
TRIPLE = causal_schema([('c1', ('0', '1')), ('c2', ('0', '1')), ('c3', ('0', '1'))])


def test_project_onto_coordinates():
    """
    Проекция исхода на подмножество координат, на всё T и на пустое множество.
    """
    outcome = (0, 0, 0)
    assert project(outcome, frozenset({0, 1})) == (0, 0)
    assert project((1, 0, 1), TRIPLE.all_positions) == (1, 0, 1)
    assert project((1, 0, 1), EMPTY) == ()
    assert project((1, 0, 1), frozenset({2})) == (1,)


def test_projection_composes():
    """
    Последовательные проекции S -> S' совпадают с прямой проекцией на S'.
    """
    S, smaller = frozenset({0, 2}), frozenset({2})
    down = relative_projector(S, smaller)
    for outcome in TRIPLE.outcomes:
        assert down(project(outcome, S)) == project(outcome, smaller)


def test_cylinder_of_factual_row():
    """
    Цилиндр {F.class=N, F.exam=F} состоит из четырех исходов последней строки таблицы.
    """
    event = cylinder(EXAM, {'F.class': 'N', 'F.exam': 'F'})
    assert len(event) == 4
    assert all(o[0] == 1 and o[1] == 1 for o in event)
    assert cylinder(EXAM, {}) == EXAM.omega
    assert len(cylinder(EXAM, {'F.class': 'Y', 'F.exam': 'P', 'CF.class': 'N', 'CF.exam': 'F'})) == 1


def test_cylinder_intersection():
    a = cylinder(EXAM, {'F.class': 'Y'})
    b = cylinder(EXAM, {'CF.exam': 'P'})
    assert a & b == cylinder(EXAM, {'F.class': 'Y', 'CF.exam': 'P'})
    assert a & cylinder(EXAM, {'F.class': 'N'}) == frozenset()


def test_cylinder_unknown_label():
    """
    Неизвестная метка или координата приводит к SchemaError.
    """
    with pytest.raises(SchemaError) as exc:
        cylinder(EXAM, {'F.class': 'maybe'})
    assert "Unknown label 'maybe'" in exc.value.detail
    with pytest.raises(SchemaError):
        cylinder(EXAM, {'F.mood': 'Y'})


def test_measurability():
    """
    Цилиндр измерим относительно своей базы, одноточечное событие не измеримо относительно пустого множества.
    """
    event = cylinder(EXAM, {'F.class': 'Y'})
    assert is_measurable_wrt(EXAM, event, EXAM.positions(['F.class']))
    assert is_measurable_wrt(EXAM, event, EXAM.world_positions('F'))
    assert not is_measurable_wrt(EXAM, event, EXAM.world_positions('CF'))
    single = frozenset({EXAM.outcomes[0]})
    assert not is_measurable_wrt(EXAM, single, EMPTY)
    assert is_measurable_wrt(EXAM, EXAM.omega, EMPTY)
    assert is_measurable_wrt(EXAM, frozenset(), EMPTY)


def test_atoms():
    """
    Атомы H_S: 4 блока по 4 исхода для фактического мира, один блок для пустого множества.
    """
    blocks = atoms_of(EXAM, EXAM.world_positions('F'))
    assert len(blocks) == 4
    assert all(len(b) == 4 for b in blocks)
    assert atoms_of(EXAM, EMPTY) == [EXAM.omega]
    assert len(atoms_of(EXAM, EXAM.all_positions)) == 16
    assert frozenset().union(*blocks) == EXAM.omega


def test_fibers_are_keyed_by_partial_outcome():
    keyed = fibers(TRIPLE, frozenset({0, 1}))
    assert list(keyed) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert keyed[(0, 0)] == frozenset({(0, 0, 0), (0, 0, 1)})


def test_combine_partial_outcomes():
    assert combine(frozenset({2}), (1,), frozenset({0}), (0,)) == (0, 1)
    assert combine(frozenset({0, 2}), (1, 1), EMPTY, ()) == (1, 1)


def test_projector_single_coordinate_returns_tuple():
    assert projector(frozenset({1}))((0, 1, 0)) == (1,)


def test_schema_rejects_duplicates_and_size():
    """
    Повторяющиеся координаты, повторяющиеся метки и слишком большое пространство отклоняются.
    """
    with pytest.raises(SchemaError):
        SpaceSchema((Coordinate('F', 'x', ('a', 'b')), Coordinate('F', 'x', ('a', 'b'))))
    with pytest.raises(SchemaError):
        Coordinate('F', 'x', ('a', 'a'))
    with pytest.raises(SchemaError):
        Coordinate('F', 'x', ())
    width = settings.MAX_OUTCOMES.bit_length()
    with pytest.raises(SchemaError) as exc:
        SpaceSchema(tuple(Coordinate('W', f'c{i}', ('0', '1')) for i in range(width)))
    assert 'more than the limit' in exc.value.detail


def test_schema_lookup_and_rendering():
    assert EXAM.worlds == ('F', 'CF')
    assert EXAM.position('CF.exam') == 3
    assert EXAM.world_positions('CF') == frozenset({2, 3})
    assert EXAM.argument(frozenset({2}), {'CF.class': 'N'}) == (1,)
    assert EXAM.render_coordset(frozenset({3, 0})) == '{F.class,CF.exam}'
    assert EXAM.render_partial(frozenset({0, 1}), (0, 0)) == '(F.class=Y, F.exam=P)'
    assert EXAM.outcome_of(['N', 'F', 'Y', 'P']) == (1, 1, 0, 0)
    with pytest.raises(SchemaError):
        EXAM.argument(frozenset({2}), {'CF.exam': 'P'})
    with pytest.raises(SchemaError):
        EXAM.world_positions('W')


def test_restrict_keeps_canonical_order():
    restricted = EXAM.restrict(frozenset({3, 1}))
    assert [c.key for c in restricted.coords] == ['F.exam', 'CF.exam']
    assert restricted.size == 4
