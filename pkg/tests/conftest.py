from importlib import resources

import pytest

from cbd.documents import load_system

ACCEPTANCE_LINES: list[str] = []


def corpus_path(name: str):
    return resources.files("cbd") / "corpus" / f"{name}.json"


@pytest.fixture
def corpus():
    def load(name):
        return load_system(corpus_path(name))
    return load


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
