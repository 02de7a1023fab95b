"""Хранилище архива запусков"""
import logging
import os
from typing import Iterator

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import DeclarativeBase, Session, sessionmaker
from sqlalchemy.pool import StaticPool

logger = logging.getLogger(__name__)

DEFAULT_ARCHIVE_URL = "sqlite:///./coresurgery.db"


class Base(DeclarativeBase):
    pass


def archive_engine(url: str) -> Engine:
    """SQLite держит одно соединение на процесс; остальные СУБД - обычный пул"""
    if url.startswith("sqlite"):
        return create_engine(url, connect_args={"check_same_thread": False}, poolclass=StaticPool)
    # Для postgresql:// нужен драйвер psycopg2 (необязательная зависимость)
    return create_engine(url, pool_pre_ping=True)


SQLALCHEMY_DATABASE_URL = os.getenv("DATABASE_URL") or DEFAULT_ARCHIVE_URL
engine = archive_engine(SQLALCHEMY_DATABASE_URL)
SessionLocal = sessionmaker(bind=engine, autoflush=False)


def init_archive() -> None:
    """Создаёт таблицы архива, если их нет"""
    Base.metadata.create_all(bind=engine)
    logger.info("Run archive ready at %s", engine.url.render_as_string(hide_password=True))


def get_db() -> Iterator[Session]:
    """Сессия на запрос; незавершённая запись откатывается при ошибке"""
    with SessionLocal() as db:
        try:
            yield db
        except Exception:
            db.rollback()
            raise
