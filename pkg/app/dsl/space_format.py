"""Reading and writing ``.cfs`` space documents."""
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional
from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedInput, VisitError
from app.core.errors import EngineError, MeasureError, ParseError, SchemaError
from app.space.counterfactual import build_nway
from app.space.measure import Measure
from app.space.mechanism import CausalSpace, Kernel
from app.space.schema import EMPTY, LABEL_PATTERN, NAME_PATTERN, Coordinate, SpaceSchema
from utils.rational import format_rational, parse_rational

Pairs = tuple[tuple[str, str], ...]


@dataclass
class ComponentDecl:
    name: str
    labels: list[str]


@dataclass
class WorldDecl:
    name: str
    components: list[ComponentDecl] = field(default_factory=list)
    mirror_of: Optional[str] = None


@dataclass
class Entry:
    assignment: Pairs
    weight: Fraction
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass
class MeasureBody:
    entries: list[Entry] = field(default_factory=list)
    default: Optional[Fraction] = None


@dataclass
class GivenBlock:
    argument: Pairs
    body: MeasureBody
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass
class KernelDecl:
    on: tuple[str, ...]
    given: list[GivenBlock]
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass
class SpaceDocument:
    name: str
    worlds: list[WorldDecl]
    measure: Optional[MeasureBody] = None
    kernels: list[KernelDecl] = field(default_factory=list)
    mirror: Optional[tuple[str, str]] = None


def _where(token) -> tuple[int, int]:
    return getattr(token, 'line', 0) or 0, getattr(token, 'column', 0) or 0


class SpaceTransformer(Transformer):
    def start(self, children):
        name, items = children[0], children[1:]
        worlds = [i for i in items if isinstance(i, WorldDecl)]
        measure = next((i for i in items if isinstance(i, MeasureBody)), None)
        kernels = [i for i in items if isinstance(i, KernelDecl)]
        mirror = next((i for i in items if isinstance(i, tuple)), None)
        return SpaceDocument(name, worlds, measure, kernels, mirror)

    def header(self, children):
        return str(children[0])

    def world_block(self, children):
        return WorldDecl(str(children[0]), list(children[1:]))

    def world_copy(self, children):
        return WorldDecl(str(children[0]), [], str(children[1]))

    def component(self, children):
        return ComponentDecl(str(children[0]), [str(label) for label in children[1:]])

    def measure(self, children):
        return children[0]

    def body(self, children):
        entries = [i for i in children if isinstance(i, Entry)]
        default = next((i for i in children if isinstance(i, Fraction)), None)
        return MeasureBody(entries, default)

    def entry(self, children):
        (pairs, position), weight = children
        return Entry(pairs, _rational(weight), position.line, position.column)

    def default(self, children):
        return _rational(children[0])

    def kernel(self, children):
        (keys, position), given = children[0], children[1:]
        return KernelDecl(keys, list(given), position.line, position.column)

    def given(self, children):
        (pairs, position), body = children
        return GivenBlock(pairs, body, position.line, position.column)

    def mirror(self, children):
        return str(children[0]), str(children[1])

    @v_args(meta=True)
    def coordset(self, meta, children):
        return tuple(key for key, _ in children), _Position(meta)

    @v_args(meta=True)
    def assignment(self, meta, children):
        return tuple(children), _Position(meta)

    def pair(self, children):
        coord, label = children
        return coord[0], str(label)

    def coord(self, children):
        world, name = children
        return f'{world}.{name}', str(world)


class _Position:
    def __init__(self, meta):
        self.line = getattr(meta, 'line', 0)
        self.column = getattr(meta, 'column', 0)


def _rational(token) -> Fraction:
    try:
        return parse_rational(str(token))
    except ValueError as exc:
        line, column = _where(token)
        raise ParseError(f'line {line}, column {column}: {exc}') from None


parser = Lark.open('space.lark', rel_to=__file__, parser='lalr', lexer='contextual', propagate_positions=True)


def parse_space(text: str) -> SpaceDocument:
    try:
        tree = parser.parse(text)
    except UnexpectedInput as exc:
        raise ParseError(f'line {exc.line}, column {exc.column}: {describe_unexpected(exc)}') from None
    try:
        return SpaceTransformer().transform(tree)
    except VisitError as exc:
        if isinstance(exc.orig_exc, EngineError):
            raise exc.orig_exc from None
        raise


def describe_unexpected(exc: UnexpectedInput) -> str:
    token = getattr(exc, 'token', None)
    if token is not None:
        return f'unexpected {token.type} {str(token)!r}'
    char = getattr(exc, 'char', None)
    return f'unexpected character {char!r}' if char else 'unexpected end of input'


def _format_pairs(pairs: Pairs) -> str:
    return '(' + ', '.join(f'{key}={label}' for key, label in pairs) + ')'


def _format_body(body: MeasureBody, indent: str) -> list[str]:
    lines = [f'{indent}{_format_pairs(e.assignment)} = {format_rational(e.weight)}' for e in body.entries]
    if body.default is not None:
        lines.append(f'{indent}default = {format_rational(body.default)}')
    return lines


def _check_tokens(document: SpaceDocument):
    names = [document.name] + [w.name for w in document.worlds]
    names += [c.name for w in document.worlds for c in w.components]
    for name in names:
        if not NAME_PATTERN.fullmatch(name):
            raise SchemaError(f'{name!r} cannot be written as a name')
    for world in document.worlds:
        for component in world.components:
            for label in component.labels:
                if not LABEL_PATTERN.fullmatch(label):
                    raise SchemaError(f'{label!r} cannot be written as a label of {world.name}.{component.name}')


def serialize_space(document: SpaceDocument) -> str:
    _check_tokens(document)
    lines = [f'space {document.name}', '']
    for world in document.worlds:
        if world.mirror_of is not None:
            lines += [f'world {world.name} mirror {world.mirror_of}', '']
            continue
        lines.append(f'world {world.name} {{')
        lines += [f'  component {c.name} {{ {" ".join(c.labels)} }}' for c in world.components]
        lines += ['}', '']
    if document.measure is not None:
        lines += ['measure {', *_format_body(document.measure, '  '), '}', '']
    for kernel in document.kernels:
        lines.append(f'kernel on {{{", ".join(kernel.on)}}} {{')
        for block in kernel.given:
            lines.append(f'  given {_format_pairs(block.argument)} {{')
            lines += _format_body(block.body, '    ')
            lines.append('  }')
        lines += ['}', '']
    if document.mirror is not None:
        lines += [f'mirror {document.mirror[0]} {document.mirror[1]}', '']
    return '\n'.join(lines).rstrip('\n') + '\n'


def _located(exc: EngineError, line: int, column: int) -> EngineError:
    return type(exc)(f'line {line}, column {column}: {exc.detail}')


def document_schema(document: SpaceDocument) -> SpaceSchema:
    declared: dict[str, list[ComponentDecl]] = {}
    coords = []
    for world in document.worlds:
        if world.name in declared:
            raise SchemaError(f'World {world.name} is declared twice')
        components = world.components
        if world.mirror_of is not None:
            if world.mirror_of not in declared:
                raise SchemaError(f'World {world.name} mirrors undeclared world {world.mirror_of}')
            components = declared[world.mirror_of]
        declared[world.name] = components
        coords += [Coordinate(world.name, c.name, tuple(c.labels)) for c in components]
    return SpaceSchema(tuple(coords))


def _body_measure(schema: SpaceSchema, body: MeasureBody) -> Measure:
    weights = {}
    for entry in body.entries:
        try:
            mapping = dict(entry.assignment)
            if len(mapping) != len(entry.assignment):
                raise SchemaError('coordinate repeated in entry')
            if len(mapping) != len(schema.coords):
                raise SchemaError('measure entries must assign every coordinate')
            outcome = tuple(schema.coords[p].index(label) for p, label in
                            sorted((schema.position(k), v) for k, v in mapping.items()))
        except SchemaError as exc:
            raise _located(exc, entry.line, entry.column) from None
        if outcome in weights:
            raise SchemaError(f'line {entry.line}, column {entry.column}: outcome listed twice')
        weights[outcome] = entry.weight
    if body.default is not None:
        if body.default:
            for outcome in schema.outcomes:
                weights.setdefault(outcome, body.default)
    elif len(weights) != schema.size:
        raise MeasureError(f'{schema.size - len(weights)} outcomes have no weight and no default is given')
    return Measure.from_weights(schema, weights)


def _kernel(schema: SpaceSchema, decl: KernelDecl) -> Kernel:
    try:
        S = schema.positions(decl.on)
    except SchemaError as exc:
        raise _located(exc, decl.line, decl.column) from None
    table = {}
    for block in decl.given:
        try:
            argument = schema.argument(S, dict(block.argument))
            if argument in table:
                raise SchemaError(f'argument {schema.render_partial(S, argument)} given twice')
            table[argument] = _body_measure(schema, block.body)
        except (SchemaError, MeasureError) as exc:
            raise _located(exc, block.line, block.column) from None
    return Kernel(S, table)


def build_space(document: SpaceDocument) -> CausalSpace:
    schema = document_schema(document)
    measure = _body_measure(schema, document.measure) if document.measure is not None else None
    kernels = None
    if document.kernels:
        kernels = {}
        for decl in document.kernels:
            kernel = _kernel(schema, decl)
            if kernel.on in kernels:
                raise SchemaError(f'line {decl.line}, column {decl.column}: kernel declared twice')
            kernels[kernel.on] = kernel
    mirror = document.mirror
    copies = [w for w in document.worlds if w.mirror_of is not None]
    if mirror is None and len(document.worlds) == 2 and len(copies) == 1:
        mirror = (copies[0].mirror_of, copies[0].name)
    return build_nway(schema, measure, kernels, mirror)


def _body_of(measure: Measure) -> MeasureBody:
    schema = measure.schema
    entries = [Entry(tuple((c.key, c.labels[v]) for c, v in zip(schema.coords, outcome)), weight)
               for outcome, weight in sorted(measure.weights.items())]
    default = None if len(measure.weights) == schema.size else Fraction(0)
    return MeasureBody(entries, default)


def document_from_space(space: CausalSpace, name: str = 'space') -> SpaceDocument:
    schema = space.schema
    worlds = [WorldDecl(world, [ComponentDecl(schema.coords[i].name, list(schema.coords[i].labels))
                                for i in sorted(schema.world_positions(world))]) for world in schema.worlds]
    kernels = []
    if space.mechanism is not None:
        for S, kernel in space.mechanism.kernels.items():
            if S == EMPTY and kernel.table.get(()) == space.measure:
                continue
            order = sorted(S)
            blocks = [GivenBlock(tuple((schema.coords[i].key, schema.coords[i].labels[v])
                                       for i, v in zip(order, argument)), _body_of(kernel.table[argument]))
                      for argument in kernel.arguments()]
            kernels.append(KernelDecl(tuple(schema.coords[i].key for i in order), blocks))
    return SpaceDocument(name, worlds, _body_of(space.measure), kernels, space.mirror)


def load_space(path: str) -> CausalSpace:
    try:
        with open(path, encoding='utf-8') as stream:
            text = stream.read()
    except OSError as exc:
        raise ParseError(f'Cannot read {path}: {exc.strerror}') from None
    except UnicodeDecodeError as exc:
        raise ParseError(f'Cannot read {path}: not UTF-8 text ({exc.reason} at byte {exc.start})') from None
    try:
        return build_space(parse_space(text))
    except EngineError as exc:
        raise type(exc)(f'{os.path.basename(path)}: {exc.detail}') from None


def space_name(path: str) -> str:
    """A header name for the document stored at ``path``."""
    stem = re.sub(r'[^A-Za-z0-9_\-]', '_', os.path.splitext(os.path.basename(path))[0])
    return stem if NAME_PATTERN.fullmatch(stem) else f'space_{stem}'


def write_space(space: CausalSpace, path: str, name: str = None):
    text = serialize_space(document_from_space(space, name or space_name(path)))
    try:
        with open(path, 'w', encoding='utf-8') as stream:
            stream.write(text)
    except OSError as exc:
        raise ParseError(f'Cannot write {path}: {exc.strerror}') from None
