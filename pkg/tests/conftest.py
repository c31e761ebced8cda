import pytest

from stopwait.events import QuestionRecord


@pytest.fixture
def example_question():
    """Posted at 0, answers at 1.0 and 2.5, closed by the asker at 5.2."""
    return QuestionRecord("q1", 0.0, (1.0, 2.5), 5.2, True)


_CRITERIA = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record and print one PASS/FAIL line for an acceptance criterion; returns the verdict."""
    table = request.config.stash.setdefault(_CRITERIA, {})

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        table[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    table = config.stash.get(_CRITERIA, {})
    if table:
        terminalreporter.section("acceptance criteria")
        for number in sorted(table):
            terminalreporter.write_line(table[number])
