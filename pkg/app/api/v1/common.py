from fastapi import HTTPException

from app.core.config import Settings, get_settings
from app.core.errors import CoreError


def http_error(exc: CoreError) -> HTTPException:
    """Переводит ошибку вычислений в HTTP-ответ с тем же JSON"""
    return HTTPException(status_code=exc.status_code, detail=exc.to_dict())


def request_settings(**overrides) -> Settings:
    """Настройки запроса: поля тела поверх переменных окружения"""
    return get_settings(**overrides)
