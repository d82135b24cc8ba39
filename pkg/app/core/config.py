import os
from typing import Optional
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    LOG_LEVEL: str = 'INFO'
    LOG_FILE: Optional[str] = None
    MAX_OUTCOMES: int = 2 ** 20
    KERNEL_BUDGET: int = 4096
    DECIMAL_PLACES: int = 6
    TEST_PROFILE: str = 'engine'

    @property
    def FIXTURES_DIR(self):
        return os.path.abspath(os.path.join(os.path.dirname(__file__), '..', 'data', 'fixtures'))

    model_config = SettingsConfigDict(
        env_prefix='CFS_',
        extra='ignore',
        env_file=os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..', '.env')))


settings = Settings()
