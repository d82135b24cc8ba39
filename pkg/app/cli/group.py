import sys
import click
from app.core.errors import EngineError

USAGE_EXIT = 5


class ExitCodeGroup(click.Group):
    """Command group that maps engine errors and usage errors onto process exit codes."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            code = super().main(args=args, prog_name=prog_name, complete_var=complete_var,
                                standalone_mode=False, **extra)
        except click.UsageError as exc:
            exc.show()
            code = USAGE_EXIT
        except click.Abort:
            click.echo('Aborted!', err=True)
            code = 1
        except click.ClickException as exc:
            exc.show()
            code = exc.exit_code
        except EngineError as exc:
            click.echo(f'error: {exc.detail}', err=True)
            code = exc.exit_code
        code = code if isinstance(code, int) else 0
        if standalone_mode:
            sys.exit(code)
        return code
