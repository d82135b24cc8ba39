import click
from app.compilers.po import compile_po
from app.compilers.scm import compile_bscm, compile_scm
from app.dsl.space_format import document_from_space, serialize_space, write_space
from app.schemas.models import BacktrackingModel, POModel, SCMModel, load_model

COMPILERS = {
    'scm': (SCMModel, compile_scm),
    'bscm': (BacktrackingModel, compile_bscm),
    'po': (POModel, compile_po),
}


@click.command('compile')
@click.argument('kind', type=click.Choice(sorted(COMPILERS)))
@click.argument('model_file', type=click.Path(dir_okay=False))
@click.option('-o', '--output', type=click.Path(dir_okay=False), default=None,
              help='Write the space here instead of standard output.')
def compile_command(kind: str, model_file: str, output: str) -> int:
    """Compile an SCM, backtracking SCM or potential-outcome MODEL_FILE into a .cfs space."""
    model_cls, compiler = COMPILERS[kind]
    model = load_model(model_file, model_cls)
    space = compiler(model)
    if output is None:
        name = getattr(model, 'name', None) or model.factual.name
        click.echo(serialize_space(document_from_space(space, name)), nl=False)
    else:
        write_space(space, output)
        click.echo(f'Wrote {output}: {space.schema.size} outcomes in worlds {", ".join(space.worlds)}')
    return 0
