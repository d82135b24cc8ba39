"""Query scripts (``.cfq``): parsing and sequential execution against a space."""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Union
from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedInput, VisitError
from app.core.errors import ConditioningUndefined, EngineError, ParseError, SchemaError
from app.dsl.space_format import describe_unexpected
from app.space import measure as m
from app.space import mechanism as mech
from app.space.counterfactual import check_space, classify_event, is_symmetric, marginalize
from app.space.mechanism import CausalSpace
from app.space.schema import CoordSet, Event, is_measurable_wrt, projector
from logging_config import logger
from utils.rational import format_decimal, format_rational, parse_rational


@dataclass(frozen=True)
class CoordRef:
    keys: tuple[str, ...]


@dataclass(frozen=True)
class Statement:
    kind: str
    args: tuple
    text: str
    line: int = field(default=0, compare=False)


@dataclass
class QueryScript:
    statements: list[Statement]


@dataclass
class Transcript:
    lines: list[str] = field(default_factory=list)
    results: list[tuple[str, Any]] = field(default_factory=list)
    exit_code: int = 0
    error: Optional[str] = None

    def emit(self, text: str, value: Any):
        self.lines.append(text)
        self.results.append((text, value))

    def render(self) -> str:
        return ''.join(f'{line}\n' for line in self.lines)


class QueryTransformer(Transformer):
    def __init__(self, text: str):
        super().__init__()
        self.text = text

    def start(self, children):
        return QueryScript([c for c in children if isinstance(c, Statement)])

    @v_args(meta=True)
    def statement(self, meta, children):
        kind, args = children[0]
        source = ' '.join(self.text[meta.start_pos:meta.end_pos].split())
        return Statement(kind, args, source, meta.line)

    def let(self, children):
        return 'LET', (str(children[0]), children[1])

    def condition(self, children):
        return 'CONDITION', (children[0],)

    def intervene(self, children):
        return 'INTERVENE', tuple(children)

    def prob(self, children):
        return 'PROB', (children[0],)

    def effect(self, children):
        return 'EFFECT', (children[0], children[1], children[2] if len(children) > 2 else None)

    def indep(self, children):
        return 'INDEP', (children[0], children[1], children[2] if len(children) > 2 else None)

    def sync(self, children):
        return 'SYNC', tuple(children)

    def source(self, children):
        return 'SOURCE', (children[0], children[1] if len(children) > 1 else None)

    def cindep(self, children):
        return 'CINDEP', tuple(children)

    def csync(self, children):
        return 'CSYNC', tuple(children)

    def classify(self, children):
        return 'CLASSIFY', (children[0],)

    def symmetric(self, children):
        return 'SYMMETRIC', ()

    def marginalize(self, children):
        return 'MARGINALIZE', (children[0], len(children) > 1)

    def check(self, children):
        return 'CHECK', ()

    def point(self, children):
        return 'point', children[0]

    def uniform(self, children):
        return 'uniform', None

    def table(self, children):
        return 'table', tuple(children)

    def weighted(self, children):
        pairs, weight = children
        try:
            return pairs, parse_rational(str(weight))
        except ValueError as exc:
            raise ParseError(f'line {weight.line}, column {weight.column}: {exc}') from None

    def union(self, children):
        return 'union', children[0], children[1]

    def inter(self, children):
        return 'inter', children[0], children[1]

    def complement(self, children):
        return 'not', children[0]

    def omega(self, children):
        return ('omega',)

    def empty(self, children):
        return ('empty',)

    def equals(self, children):
        return 'eq', children[0], str(children[1])

    def differs(self, children):
        return 'ne', children[0], str(children[1])

    def ref(self, children):
        return 'ref', str(children[0])

    def coordset(self, children):
        return CoordRef(tuple(children))

    def assignment(self, children):
        return tuple(children)

    def pair(self, children):
        return children[0], str(children[1])

    def coord(self, children):
        return f'{children[0]}.{children[1]}'


parser = Lark.open('query.lark', rel_to=__file__, parser='lalr', lexer='contextual', propagate_positions=True)


def parse_query(text: str) -> QueryScript:
    try:
        tree = parser.parse(text)
    except UnexpectedInput as exc:
        raise ParseError(f'line {exc.line}, column {exc.column}: {describe_unexpected(exc)}') from None
    try:
        return QueryTransformer(text).transform(tree)
    except VisitError as exc:
        if isinstance(exc.orig_exc, EngineError):
            raise exc.orig_exc from None
        raise


def render_value(value: Fraction) -> str:
    return f'{format_rational(value)} ({format_decimal(value)})'


def render_bool(value: bool) -> str:
    return 'true' if value else 'false'


class Session:
    """Ambient state of a running script: the intervened space, the observation and bound names."""

    def __init__(self, space: CausalSpace):
        self.space = space
        self.observation: Optional[Event] = None
        self.names: dict[str, Event] = {}

    @property
    def schema(self):
        return self.space.schema

    @property
    def measure(self) -> m.Measure:
        if self.observation is None:
            return self.space.measure
        return m.condition_event(self.space.measure, self.observation)

    def event(self, node) -> Event:
        kind = node[0]
        if kind == 'omega':
            return self.schema.omega
        if kind == 'empty':
            return frozenset()
        if kind == 'ref':
            if node[1] not in self.names:
                raise SchemaError(f'Name {node[1]} is not bound')
            return self.names[node[1]]
        if kind in ('eq', 'ne'):
            position = self.schema.position(node[1])
            index = self.schema.label_index(position, node[2])
            if kind == 'eq':
                return frozenset(o for o in self.schema.outcomes if o[position] == index)
            return frozenset(o for o in self.schema.outcomes if o[position] != index)
        if kind == 'not':
            return self.schema.omega - self.event(node[1])
        if kind == 'union':
            return self.event(node[1]) | self.event(node[2])
        if kind == 'inter':
            return self.event(node[1]) & self.event(node[2])
        raise SchemaError(f'Unknown event form {kind}')

    def coordset(self, ref: CoordRef) -> CoordSet:
        return self.schema.positions(ref.keys)

    def operands(self, first, second) -> tuple[Union[Event, CoordSet], Union[Event, CoordSet], bool]:
        """Resolve two operands that must both be events or both coordinate sets."""
        if isinstance(first, CoordRef) and isinstance(second, CoordRef):
            return self.coordset(first), self.coordset(second), True
        if isinstance(first, CoordRef) or isinstance(second, CoordRef):
            raise SchemaError('Operands must be two events or two coordinate sets')
        return self.event(first), self.event(second), False

    def distribution(self, U: CoordSet, dist) -> m.Measure:
        kind, payload = dist
        if kind == 'point':
            return mech.point_measure(self.schema, U, self.schema.argument(U, dict(payload)))
        if kind == 'uniform':
            return m.Measure.uniform(self.schema.restrict(U))
        weights = {}
        for pairs, weight in payload:
            argument = self.schema.argument(U, dict(pairs))
            weights[argument] = weights.get(argument, Fraction(0)) + weight
        return mech.intervention_measure(self.schema, U, weights)

    def observe(self, event: Event):
        combined = event if self.observation is None else self.observation & event
        if not m.prob(self.space.measure, combined):
            raise ConditioningUndefined('Observed event has probability zero')
        self.observation = combined

    def restrict_to(self, keep: CoordSet):
        project = projector(keep)
        if self.observation is not None:
            if not is_measurable_wrt(self.schema, self.observation, keep):
                raise SchemaError('The current observation depends on marginalised coordinates')
            self.observation = frozenset(project(o) for o in self.observation)
        self.names = {name: frozenset(project(o) for o in event) for name, event in self.names.items()
                      if is_measurable_wrt(self.schema, event, keep)}


def execute(session: Session, statement: Statement, transcript: Transcript):
    kind, args, text = statement.kind, statement.args, statement.text
    if kind == 'LET':
        session.names[args[0]] = session.event(args[1])
    elif kind == 'CONDITION':
        session.observe(session.event(args[0]))
    elif kind == 'INTERVENE':
        U = session.coordset(args[0])
        session.space = mech.intervene(session.space, U, session.distribution(U, args[1]))
    elif kind == 'PROB':
        value = m.prob(session.measure, session.event(args[0]))
        transcript.emit(f'{text} = {render_value(value)}', value)
    elif kind == 'EFFECT':
        _effect(session, statement, transcript)
    elif kind == 'INDEP':
        first, second, sigmas = session.operands(args[0], args[1])
        given = session.event(args[2]) if args[2] is not None else None
        if sigmas:
            value = m.independent_sigmas(session.measure, first, second, given=given)
        else:
            value = m.independent(session.measure, first, second, given=given)
        transcript.emit(f'{text} = {render_bool(value)}', value)
    elif kind == 'SYNC':
        first, second, sigmas = session.operands(args[0], args[1])
        P = session.measure
        if sigmas:
            value = m.synchronized(P, first, second)
            transcript.emit(f'{text} = {render_bool(value)}', value)
        else:
            value = m.as_equal(P, first, second)
            transcript.emit(f'{text} = {render_bool(value)}; P(difference) = {render_value(m.prob(P, first ^ second))}',
                            value)
    elif kind == 'SOURCE':
        U = session.coordset(args[0])
        if args[1] is None:
            value = mech.global_source(session.space, U)
        elif isinstance(args[1], CoordRef):
            value = mech.source_of_sigma(session.space, U, session.coordset(args[1]))
        else:
            value = mech.is_source(session.space, U, session.event(args[1]))
        transcript.emit(f'{text} = {render_bool(value)}', value)
    elif kind == 'CINDEP':
        U = session.coordset(args[0])
        first, second, sigmas = session.operands(args[1], args[2])
        if sigmas:
            value = mech.causally_independent_sigmas(session.space, U, first, second)
        else:
            value = mech.causal_independent(session.space, U, first, second)
        transcript.emit(f'{text} = {render_bool(value)}', value)
    elif kind == 'CSYNC':
        U = session.coordset(args[0])
        first, second, sigmas = session.operands(args[1], args[2])
        if sigmas:
            value = mech.causally_synchronized(session.space, U, first, second)
        else:
            value = mech.causally_equal(session.space, U, first, second)
        transcript.emit(f'{text} = {render_bool(value)}', value)
    elif kind == 'CLASSIFY':
        scope = classify_event(session.schema, session.event(args[0]))
        transcript.emit(f'{text} = {scope.render()}', scope)
    elif kind == 'SYMMETRIC':
        report = is_symmetric(session.space)
        line = f'{text} = {render_bool(report.symmetric)}'
        if report.failures:
            line += f'; {report.failures[0]}'
        transcript.emit(line, report)
    elif kind == 'MARGINALIZE':
        keep = session.coordset(args[0])
        space = marginalize(session.space, keep, allow_world_drop=args[1])
        session.restrict_to(keep)
        session.space = space
    elif kind == 'CHECK':
        report = check_space(session.space)
        for line in report.lines()[:-1]:
            transcript.lines.append(line)
        transcript.emit(f'{text} = {report.lines()[-1]}', report)
        if not report.ok:
            transcript.exit_code = 1


def _effect(session: Session, statement: Statement, transcript: Transcript):
    coords, event, given = statement.args
    U, A = session.coordset(coords), session.event(event)
    G = session.observation
    if given is not None:
        G = session.event(given) if G is None else G & session.event(given)
    if G is None:
        verdict = mech.classify_effect(session.space, U, A)
        transcript.emit(f'{statement.text} = {verdict.render(session.schema)}', verdict)
        return
    effect = mech.conditional_active_effect(session.space, U, A, G)
    parts = []
    for argument, value in effect.values.items():
        shown = render_value(value) if value is not None else 'undefined'
        parts.append(f'{session.schema.render_partial(U, argument)} -> {shown}')
    tag = 'Active' if effect.active else 'NotActive'
    transcript.emit(f'{statement.text} = {tag}; {", ".join(parts)}; observed {render_value(effect.reference)}',
                    effect)


def run(space: CausalSpace, script: Union[str, QueryScript]) -> Transcript:
    """Execute a script statement by statement; the first engine error stops it."""
    transcript = Transcript()
    try:
        if isinstance(script, str):
            script = parse_query(script)
        session = Session(space)
        for statement in script.statements:
            execute(session, statement, transcript)
    except EngineError as exc:
        transcript.error = exc.detail
        transcript.exit_code = exc.exit_code
        logger.info(f'Script stopped with exit code {exc.exit_code}: {exc.detail}')
    return transcript
