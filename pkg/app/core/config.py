from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.core.errors import InputError

SCHEMA_VERSION = 1


class Settings(BaseSettings):
    """Флаги CLI и поля запросов; переменные окружения CORE_* дублируют их"""

    model_config = SettingsConfigDict(env_prefix="CORE_", env_ignore_empty=True, extra="ignore")

    policy: str = "canonical"
    seed: int = 0
    depth: int = 6
    period: int = 4
    ball_cap: int = 6
    window: int = 4
    # Ширина полосы вокруг оболочки, которую оракул проверяет перебором
    oracle_band: int = Field(default=1, ge=0)
    out: str = "./out"
    log_level: str = "INFO"
    max_partitions: int = Field(default=4096, ge=1)


def get_settings(**overrides) -> Settings:
    """Собирает настройки: флаг > переменная окружения > значение по умолчанию"""
    settings = Settings(**{name: value for name, value in overrides.items() if value is not None})
    if settings.policy not in ("canonical", "seeded"):
        raise InputError(f"Unknown policy: {settings.policy}", {"policy": settings.policy})
    return settings
