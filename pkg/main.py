import click
from app.cli.check import check_command
from app.cli.compile import compile_command
from app.cli.group import ExitCodeGroup
from app.cli.repro import repro_command
from app.cli.run import run_command


@click.group(cls=ExitCodeGroup)
def cli():
    """Exact counterfactual probability and causal spaces."""


cli.add_command(check_command)
cli.add_command(run_command)
cli.add_command(compile_command)
cli.add_command(repro_command)


def cli_main(argv: list[str] = None) -> int:
    return cli.main(args=argv, prog_name='cfspace', standalone_mode=False)


if __name__ == '__main__':
    cli()
