import pytest
from hypothesis import HealthCheck
from hypothesis import settings as hypothesis_settings
from app.core.config import settings
from app.data import fixture_path
from app.dsl.space_format import load_space

hypothesis_settings.register_profile('engine', derandomize=True, deadline=None, max_examples=100,
                                    suppress_health_check=[HealthCheck.too_slow])
hypothesis_settings.register_profile('full', parent=hypothesis_settings.get_profile('engine'), max_examples=500)
hypothesis_settings.load_profile(settings.TEST_PROFILE)


@pytest.fixture(scope='session')
def exam_space():
    """
    Пространство экзамена: совместная таблица двух миров и ядра на CF.class и F.class.
    """
    return load_space(fixture_path('exam.cfs'))


@pytest.fixture(scope='session')
def exam_cycle_space():
    """
    Пространство экзамена с дополнительным ядром на CF.exam.
    """
    return load_space(fixture_path('exam-cycle.cfs'))


@pytest.fixture(scope='session')
def star_space():
    return load_space(fixture_path('star.cfs'))


@pytest.fixture(scope='session')
def disease_space():
    return load_space(fixture_path('disease.cfs'))


@pytest.fixture(scope='session')
def disease_asym_space():
    return load_space(fixture_path('disease-asym.cfs'))


@pytest.fixture(scope='session')
def dormant_space():
    """
    Каузальное пространство одного мира с частичным механизмом.
    """
    return load_space(fixture_path('dormant.cfs'))


@pytest.fixture(scope='session')
def coin_space():
    return load_space(fixture_path('coin.cfs'))


@pytest.fixture(scope='session')
def coin_sync_space():
    return load_space(fixture_path('coin-sync.cfs'))
