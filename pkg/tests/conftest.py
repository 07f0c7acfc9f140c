import pytest

from cfaudit import corpus

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def corpus_models():
    return {name: corpus.document(name).model for name in corpus.NAMES}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
