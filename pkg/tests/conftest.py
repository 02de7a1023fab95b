import json
import os
from pathlib import Path

import pytest

# Архив запусков в памяти, до импорта приложения
os.environ.setdefault("DATABASE_URL", "sqlite://")

from app.services.marked_graph import MarkedGraph

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def load_fixture(name: str) -> dict:
    return json.loads((FIXTURES / name).read_text(encoding="utf-8"))


def load_graph(name: str, graph_name: str = None) -> MarkedGraph:
    return MarkedGraph.from_dict(load_fixture(name), graph_name)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def rose2() -> MarkedGraph:
    return load_graph("rose2.json")


@pytest.fixture
def rose_ab() -> MarkedGraph:
    return load_graph("rose_ab.json")


@pytest.fixture
def single_square() -> MarkedGraph:
    return load_graph("rose_single_square.json")


@pytest.fixture
def theta2() -> MarkedGraph:
    return load_graph("theta2.json")


@pytest.fixture
def seven_square_data() -> dict:
    return load_fixture("seven_square_slice.json")


@pytest.fixture
def rose3() -> MarkedGraph:
    return load_graph("rose3.json")


@pytest.fixture
def rose3_twisted() -> MarkedGraph:
    return load_graph("rose3_twisted.json")
