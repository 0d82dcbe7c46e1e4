import pathlib

import pytest

from oneway import parse_graph_with_sets

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> pathlib.Path:
    return FIXTURES


def load_fixture(name: str):
    """Parse fixtures/<name>.graph into (OpenGraph, sets-or-None)."""
    return parse_graph_with_sets((FIXTURES / f"{name}.graph").read_text())


@pytest.fixture(scope="session")
def example1():
    return load_fixture("example1")


@pytest.fixture(scope="session")
def example2():
    return load_fixture("example2")


@pytest.fixture(scope="session")
def path3():
    graph, _ = load_fixture("path3")
    return graph


@pytest.fixture(scope="session")
def strip2x3():
    graph, _ = load_fixture("strip2x3")
    return graph
