"""Properties every valid causal space keeps under intervention, checked on generated spaces."""
from hypothesis import given
from hypothesis import strategies as st
from app.compilers.scm import compile_scm
from app.space import measure as m
from app.space import mechanism as mech
from app.space.counterfactual import WorldMirror, check_space, is_symmetric
from app.space.measure import Measure
from tests.strategies import (causal_spaces, counterfactual_spaces, events, interventions, product_spaces, scm_models,
                              symmetric_interventions)


def _factorised(schema, U, Q: Measure) -> Measure:
    """Product of the world marginals of Q; factual coordinates come first in Omega_U."""
    order = sorted(U)
    width = len(schema.coords) // 2
    factual = frozenset(k for k, i in enumerate(order) if i < width)
    counterfactual = frozenset(k for k, i in enumerate(order) if i >= width)
    left, right = Q.pushforward(factual), Q.pushforward(counterfactual)
    return Measure.from_weights(Q.schema, {a + b: wa * wb for a, wa in left.items() for b, wb in right.items()})


@given(st.data())
def test_product_space_stays_valid(data):
    """
    Интервенция в произведении двух миров сохраняет все аксиомы, включая межмировую.
    """
    space = data.draw(product_spaces())
    assert check_space(space).ok
    U, Q = data.draw(interventions(space))
    after, report = mech.derive_intervention(space, U, Q)
    assert report.dropped == [] and report.partial == []
    assert check_space(after).ok
    assert after.mechanism.is_total(after.schema)


@given(st.data())
def test_causal_space_stays_valid(data):
    space = data.draw(causal_spaces())
    U, Q = data.draw(interventions(space, nonempty=False))
    after = mech.intervene(space, U, Q)
    assert check_space(after).ok
    assert after.mechanism.is_total(after.schema)


@given(scm_models(), st.data())
def test_compiled_scm_stays_valid(model, data):
    """
    Скомпилированная SCM удовлетворяет аксиомам до и после интервенции.
    """
    space = compile_scm(model)
    assert check_space(space).ok
    U, Q = data.draw(interventions(space))
    assert check_space(mech.intervene(space, U, Q)).ok


@given(st.data())
def test_intervention_keeps_kernel_as_conditional(data):
    """
    После интервенции ядро на U не меняется и является версией условной вероятности.
    """
    space = data.draw(st.one_of(causal_spaces(), product_spaces()))
    U, Q = data.draw(interventions(space, nonempty=False))
    report = mech.verify_fundamental(space, U, Q)
    assert report.passed, report.witnesses


@given(st.data())
def test_positive_intervention_gives_global_source(data):
    space = data.draw(causal_spaces())
    U, Q = data.draw(interventions(space, positive=True))
    after = mech.intervene(space, U, Q)
    assert mech.global_source(after, U)
    assert mech.source_of_sigma(after, U, after.schema.all_positions)


@given(st.data())
def test_causal_independence_survives_intervention(data):
    """
    Каузальная независимость на U дает условную независимость относительно H_U после интервенции на U.
    """
    space = data.draw(causal_spaces())
    U, Q = data.draw(interventions(space))
    A, B = data.draw(events(space.schema)), data.draw(events(space.schema))
    after = mech.intervene(space, U, Q)
    if mech.causal_independent(space, U, A, B):
        assert m.independent_given_sigma(after.measure, A, B, U)
    if mech.causally_equal(space, U, A, B):
        assert m.prob(after.measure, A ^ B) == 0


@given(st.data())
def test_world_independence_survives_factorised_intervention(data):
    space = data.draw(counterfactual_spaces())
    schema = space.schema
    factual, counterfactual = schema.world_positions('F'), schema.world_positions('CF')
    U, Q = data.draw(interventions(space))
    after = mech.intervene(space, U, _factorised(schema, U, Q))
    if mech.causally_independent_sigmas(space, U, factual, counterfactual):
        assert m.independent_sigmas(after.measure, factual, counterfactual)


@given(st.data())
def test_no_cross_world_conditional_effect(data):
    """
    Интервенция в фактическом мире не меняет условных вероятностей событий контрфактического мира.
    """
    space = data.draw(counterfactual_spaces())
    schema = space.schema
    factual, counterfactual = schema.world_positions('F'), schema.world_positions('CF')
    U = data.draw(st.sampled_from([S for S in space.mechanism.keys() if S and S <= factual]))
    A = data.draw(events(schema, counterfactual))
    G = data.draw(events(schema, counterfactual))
    if not m.prob(space.measure, G):
        return
    effect = mech.conditional_active_effect(space, U, A, G)
    assert not effect.active
    assert set(effect.values.values()) == {effect.reference}
    for S in space.mechanism.keys():
        if S & U:
            lower = space.mechanism.get(S - U)
            for argument in space.mechanism.get(S).arguments():
                reduced = tuple(v for i, v in zip(sorted(S), argument) if i not in U)
                assert lower.table[reduced].pushforward(counterfactual) == \
                    space.mechanism.get(S).table[argument].pushforward(counterfactual)


@given(st.data())
def test_effect_classification_on_total_mechanism(data):
    """
    Для полного механизма вердикт всегда определен, а отсутствие эффекта исключает различия ядер.
    """
    space = data.draw(causal_spaces())
    U = data.draw(st.sampled_from(space.mechanism.keys()))
    A = data.draw(events(space.schema))
    verdict = mech.classify_effect(space, U, A)
    assert verdict.tag is not mech.EffectTag.UNDETERMINED
    reference = m.prob(space.measure, A)
    kernel_U = space.mechanism.get(U)
    values = [kernel_U.value(argument, A) for argument in kernel_U.arguments()]
    if verdict.tag is mech.EffectTag.ACTIVE:
        assert any(value != reference for value in values)
    else:
        assert all(value == reference for value in values)
    if verdict.tag is mech.EffectTag.NO_EFFECT:
        for S in space.mechanism.keys():
            if S & U:
                kernel, lower = space.mechanism.get(S), space.mechanism.get(S - U)
                for argument in kernel.arguments():
                    reduced = tuple(v for i, v in zip(sorted(S), argument) if i not in U)
                    assert kernel.value(argument, A) == lower.value(reduced, A)


@given(st.data())
def test_symmetric_intervention_keeps_symmetry(data):
    """
    Симметричная интервенция на симметричном множестве координат сохраняет симметрию пространства.
    """
    space = data.draw(product_spaces(symmetric=True))
    mirror = WorldMirror.between(space.schema, 'F', 'CF')
    assert is_symmetric(space).symmetric
    U, Q = data.draw(symmetric_interventions(space, mirror))
    after = mech.intervene(space, U, Q)
    report = is_symmetric(after)
    assert report.symmetric, report.failures
    assert report.uncheckable == []
