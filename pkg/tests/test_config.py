from pathlib import Path

import pytest
from sqlalchemy.orm import Session
from sqlalchemy.pool import StaticPool

from app.core.config import get_settings
from app.core.errors import InputError
from app.database.database import archive_engine, get_db
from app.models.run import Run
from app.schemas.graph import EdgeSchema
from app.schemas.run import RunResponse


def test_defaults():
    settings = get_settings()
    assert settings.window == 4
    assert settings.oracle_band == 1
    assert settings.policy == "canonical"


def test_environment_overrides_defaults(monkeypatch):
    monkeypatch.setenv("CORE_DEPTH", "9")
    monkeypatch.setenv("CORE_ORACLE_BAND", "0")
    settings = get_settings()
    assert settings.depth == 9
    assert settings.oracle_band == 0


def test_explicit_value_wins_over_environment(monkeypatch):
    monkeypatch.setenv("CORE_DEPTH", "9")
    assert get_settings(depth=2).depth == 2
    assert get_settings(depth=None).depth == 9


def test_empty_environment_value_is_ignored(monkeypatch):
    monkeypatch.setenv("CORE_SEED", "")
    assert get_settings().seed == 0


def test_unknown_policy_is_rejected(monkeypatch):
    with pytest.raises(InputError):
        get_settings(policy="greedy")
    monkeypatch.setenv("CORE_POLICY", "greedy")
    with pytest.raises(InputError):
        get_settings()


def test_sqlite_archive_uses_single_connection():
    engine = archive_engine("sqlite://")
    assert isinstance(engine.pool, StaticPool)


def test_schemas_accept_attributes_and_field_names():
    run = Run(id=3, command="build-core", summary="{}", status="ok", area=1)
    response = RunResponse.model_validate(run)
    assert response.id == 3
    assert response.area == 1
    assert EdgeSchema(id="ea", from_="o", to="o").from_ == "o"
    assert EdgeSchema.model_validate({"id": "ea", "from": "o", "to": "o"}).from_ == "o"


def test_archive_session_rolls_back_on_error():
    sessions = get_db()
    db = next(sessions)
    assert isinstance(db, Session)
    with pytest.raises(RuntimeError):
        sessions.throw(RuntimeError("boom"))


def test_postgres_driver_is_optional():
    root = Path(__file__).resolve().parent.parent
    base = (root / "requirements.txt").read_text(encoding="utf-8")
    postgres = (root / "requirements-postgres.txt").read_text(encoding="utf-8")
    assert "psycopg2" not in base
    assert "pydantic-settings" in base
    assert "-r requirements.txt" in postgres
    assert "psycopg2-binary" in postgres
