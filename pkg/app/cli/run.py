import click
from app.core.errors import ParseError
from app.dsl.query import run
from app.dsl.space_format import load_space


def read_script(path: str) -> str:
    try:
        with open(path, encoding='utf-8') as stream:
            return stream.read()
    except OSError as exc:
        raise ParseError(f'Cannot read {path}: {exc.strerror}') from None
    except UnicodeDecodeError as exc:
        raise ParseError(f'Cannot read {path}: not UTF-8 text ({exc.reason} at byte {exc.start})') from None


@click.command('run')
@click.argument('space_file', type=click.Path(dir_okay=False))
@click.argument('script_file', type=click.Path(dir_okay=False))
def run_command(space_file: str, script_file: str) -> int:
    """Run the query script SCRIPT_FILE against SPACE_FILE and print the transcript."""
    space = load_space(space_file)
    transcript = run(space, read_script(script_file))
    click.echo(transcript.render(), nl=False)
    if transcript.error is not None:
        click.echo(f'error: {transcript.error}', err=True)
    return transcript.exit_code
