import click
from app.dsl.space_format import load_space
from app.space.counterfactual import check_space
from logging_config import logger


@click.command('check')
@click.argument('space_file', type=click.Path(dir_okay=False))
def check_command(space_file: str) -> int:
    """Check the causal-space axioms and the cross-world axiom of SPACE_FILE."""
    space = load_space(space_file)
    report = check_space(space)
    for line in report.lines():
        click.echo(line)
    if not report.ok:
        logger.warning(f'{space_file}: {len(report.violations)} axiom violations')
        return 1
    return 0
