"""Compilation of structural causal models into two-world spaces.

The factual world ``F`` and the counterfactual world ``CF`` each carry one coordinate per
endogenous variable. Standard compilation shares the noise between the worlds; backtracking
compilation draws the two noise copies from a coupling.
"""
import itertools
from fractions import Fraction
from typing import Mapping, Optional, Sequence
import networkx as nx
from app.core.config import settings
from app.core.errors import CyclicModelError, ModelError
from app.schemas.models import BacktrackingModel, SCMModel, split_key, table_measure
from app.space.counterfactual import build_counterfactual, counterfactual_schema
from app.space.measure import Measure
from app.space.mechanism import CausalSpace, Kernel
from app.space.schema import EMPTY, CoordSet, SpaceSchema
from logging_config import logger

Noise = tuple[str, ...]
Coupling = Mapping[tuple[Noise, Noise], Fraction]


class StructuralSolver:
    """Evaluates potential responses V_{X=x}(u) of an acyclic SCM."""

    def __init__(self, model: SCMModel):
        self.model = model
        self.names = [v.name for v in model.endogenous]
        self.index = {name: i for i, name in enumerate(self.names)}
        self.noise_index = {v.name: i for i, v in enumerate(model.exogenous)}
        self.order = [self.index[name] for name in evaluation_order(model)]
        self._cache: dict = {}

    def solve(self, noise: Noise, do: Mapping[int, int] = None) -> tuple[int, ...]:
        """Label indices of every endogenous variable under noise ``noise`` and assignment ``do``."""
        do = do or {}
        key = (noise, tuple(sorted(do.items())))
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        values: dict[int, int] = {}
        for i in self.order:
            variable = self.model.endogenous[i]
            if i in do:
                values[i] = do[i]
                continue
            inputs = [self.model.endogenous[self.index[p]].labels[values[self.index[p]]] for p in variable.parents]
            inputs += [noise[self.noise_index[n]] for n in variable.noise]
            values[i] = variable.labels.index(variable.equation[','.join(inputs)])
        result = tuple(values[i] for i in range(len(self.names)))
        self._cache[key] = result
        return result


def parent_graph(model: SCMModel) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(v.name for v in model.endogenous)
    graph.add_edges_from((parent, v.name) for v in model.endogenous for parent in v.parents)
    return graph


def evaluation_order(model: SCMModel) -> list[str]:
    graph = parent_graph(model)
    if not nx.is_directed_acyclic_graph(graph):
        cycle = ' -> '.join(edge[0] for edge in nx.find_cycle(graph))
        raise CyclicModelError(f'Cyclic SCM is not compilable: {cycle}')
    declared = {v.name: i for i, v in enumerate(model.endogenous)}
    return list(nx.lexicographical_topological_sort(graph, key=declared.get))


def model_schema(model: SCMModel) -> SpaceSchema:
    return counterfactual_schema([(v.name, v.labels) for v in model.endogenous])


def _kernel_keys(schema: SpaceSchema, kernel_sets: Optional[Sequence[Sequence[str]]]) -> list[CoordSet]:
    if kernel_sets is None:
        if 2 ** len(schema.coords) > settings.KERNEL_BUDGET:
            raise ModelError(f'{2 ** len(schema.coords)} kernels exceed the budget of {settings.KERNEL_BUDGET}, '
                             f'list the wanted kernel sets explicitly')
        positions = range(len(schema.coords))
        return [frozenset(c) for size in range(len(schema.coords) + 1)
                for c in itertools.combinations(positions, size)]
    keys = {EMPTY}
    keys.update(schema.positions(names) for names in kernel_sets)
    return sorted(keys, key=lambda k: (len(k), sorted(k)))


def _split(schema: SpaceSchema, S: CoordSet, argument) -> tuple[dict[int, int], dict[int, int]]:
    """Per-world do-assignments keyed by endogenous index."""
    width = len(schema.coords) // 2
    factual, counterfactual = {}, {}
    for position, value in zip(sorted(S), argument):
        if position < width:
            factual[position] = value
        else:
            counterfactual[position - width] = value
    return factual, counterfactual


def compile_scm(model: SCMModel, kernel_sets: Optional[Sequence[Sequence[str]]] = None) -> CausalSpace:
    """Counterfactual causal space of an acyclic SCM with noise shared between the worlds."""
    solver = StructuralSolver(model)
    schema = model_schema(model)
    noise = [(u, w) for u, w in model.noise_weights().items() if w]
    kernel_sets = kernel_sets if kernel_sets is not None else model.kernel_sets
    kernels = {}
    for S in _kernel_keys(schema, kernel_sets):
        table = {}
        for argument in schema.partial_outcomes(S):
            do_factual, do_counterfactual = _split(schema, S, argument)
            weights: dict = {}
            for u, weight in noise:
                outcome = solver.solve(u, do_factual) + solver.solve(u, do_counterfactual)
                weights[outcome] = weights.get(outcome, Fraction(0)) + weight
            table[argument] = Measure.from_weights(schema, weights)
        kernels[S] = Kernel(S, table)
    space = build_counterfactual(schema, kernels=kernels)
    logger.info(f'Compiled SCM {model.name}: {len(schema.coords)} coordinates, {len(kernels)} kernels')
    return space


def diagonal_coupling(model: SCMModel) -> dict[tuple[Noise, Noise], Fraction]:
    return {(u, u): w for u, w in model.noise_weights().items() if w}


def independent_coupling(model: SCMModel, model_star: SCMModel) -> dict[tuple[Noise, Noise], Fraction]:
    first, second = model.noise_weights(), model_star.noise_weights()
    return {(u, v): a * b for u, a in first.items() for v, b in second.items() if a * b}


def _check_structure(model: SCMModel, model_star: SCMModel):
    if [(v.name, v.labels, v.parents) for v in model.endogenous] != \
            [(v.name, v.labels, v.parents) for v in model_star.endogenous]:
        raise ModelError('Backtracking needs two structurally identical SCMs')


def compile_backtracking(model: SCMModel, model_star: SCMModel, coupling: Coupling) -> CausalSpace:
    """Two-world probability space of a backtracking SCM; no intervention, so no mechanism."""
    _check_structure(model, model_star)
    solver, solver_star = StructuralSolver(model), StructuralSolver(model_star)
    schema = model_schema(model)
    noises, noises_star = set(model.noise_outcomes()), set(model_star.noise_outcomes())
    weights: dict = {}
    for (u, u_star), weight in coupling.items():
        if u not in noises or u_star not in noises_star:
            raise ModelError(f'Coupling entry ({",".join(u)}|{",".join(u_star)}) is not a pair of noise values')
        outcome = solver.solve(u) + solver_star.solve(u_star)
        weights[outcome] = weights.get(outcome, Fraction(0)) + weight
    space = build_counterfactual(schema, Measure.from_weights(schema, weights))
    logger.info(f'Compiled backtracking SCM {model.name} with {len(coupling)} coupled noise pairs')
    return space


def coupling_of(document: BacktrackingModel) -> dict[tuple[Noise, Noise], Fraction]:
    model, model_star = document.factual, document.counterpart
    if document.coupling == 'diagonal':
        if model.noise_outcomes() != model_star.noise_outcomes():
            raise ModelError('Diagonal coupling needs the same noise variables in both SCMs')
        return diagonal_coupling(model)
    if document.coupling == 'independent':
        return independent_coupling(model, model_star)
    pairs = [(u, v) for u in model.noise_outcomes() for v in model_star.noise_outcomes()]
    keys = [u + ('|',) + v for u, v in pairs]
    listed = {}
    for key, weight in document.coupling.items():
        if '|' not in key:
            raise ModelError(f'Coupling key {key!r} must look like "u|u*"')
        left, right = key.split('|', 1)
        listed[','.join(split_key(left) + ('|',) + split_key(right))] = weight
    table = table_measure(keys, listed, document.coupling_default, 'coupling')
    return {(u, v): table[u + ('|',) + v] for u, v in pairs if table[u + ('|',) + v]}


def compile_bscm(document: BacktrackingModel) -> CausalSpace:
    return compile_backtracking(document.factual, document.counterpart, coupling_of(document))

