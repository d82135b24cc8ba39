import os
import yaml
from pydantic import ValidationError
from app.core.config import settings
from app.core.errors import ModelError
from app.schemas.reports import Expectation

EXPECTATIONS_FILE = os.path.join(os.path.dirname(__file__), 'expectations.yaml')


def fixture_path(name: str) -> str:
    return os.path.join(settings.FIXTURES_DIR, name)


def load_expectations(path: str = EXPECTATIONS_FILE) -> list[Expectation]:
    """Rows of the reproduction table in file order."""
    with open(path, encoding='utf-8') as stream:
        rows = yaml.safe_load(stream) or []
    try:
        return [Expectation.model_validate(row) for row in rows]
    except ValidationError as exc:
        raise ModelError(f'{os.path.basename(path)}: {exc.errors()[0]["msg"]}') from None


def suites(expectations: list[Expectation]) -> list[str]:
    names = []
    for row in expectations:
        if row.suite not in names:
            names.append(row.suite)
    return names
