"""Compilation of potential-outcome models into (N+1)-way counterfactual probability spaces."""
from fractions import Fraction
from app.core.errors import ModelError
from app.schemas.models import POModel, PotentialOutcome
from app.space.counterfactual import build_nway, nway_schema
from app.space.measure import Measure
from app.space.mechanism import CausalSpace
from logging_config import logger


def _assignment_key(outcome: PotentialOutcome) -> tuple:
    return tuple(sorted(outcome.do.items()))


def po_worlds(model: POModel) -> dict[str, dict[str, str]]:
    """World name -> do-assignment it carries; the last world is the observed one and carries none."""
    assignments = []
    for outcome in model.potential_outcomes:
        key = _assignment_key(outcome)
        if key not in assignments:
            assignments.append(key)
    worlds = {f'W{j}': dict(key) for j, key in enumerate(assignments, start=1)}
    worlds[f'W{len(assignments) + 1}'] = {}
    return worlds


def compile_po(model: POModel) -> CausalSpace:
    worlds = po_worlds(model)
    variables = {v.name: v for v in model.endogenous}
    layout, functions = {}, []
    for world, assignment in worlds.items():
        if not assignment:
            layout[world] = [(v.name, v.labels) for v in model.endogenous]
            functions.extend(model.observed[v.name] for v in model.endogenous)
            continue
        key = tuple(sorted(assignment.items()))
        carried = {o.variable: o for o in model.potential_outcomes if _assignment_key(o) == key}
        duplicates = [o.describe() for o in model.potential_outcomes if _assignment_key(o) == key]
        if len(duplicates) != len(carried):
            raise ModelError(f'Potential outcome declared twice among {", ".join(duplicates)}')
        names = [v.name for v in model.endogenous if v.name in carried]
        layout[world] = [(name, variables[name].labels) for name in names]
        functions.extend(carried[name].values for name in names)
    schema = nway_schema(layout)
    weights: dict = {}
    for unit, weight in model.unit_weights().items():
        if not weight:
            continue
        outcome = tuple(coord.index(values[unit]) for coord, values in zip(schema.coords, functions))
        weights[outcome] = weights.get(outcome, Fraction(0)) + weight
    space = build_nway(schema, Measure.from_weights(schema, weights))
    logger.info(f'Compiled potential-outcome model {model.name} into {len(worlds)} worlds')
    return space
