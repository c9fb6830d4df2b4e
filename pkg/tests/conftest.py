import pytest

_ACCEPTANCE: dict[str, str] = {}


@pytest.fixture
def criterion():
    """Record one acceptance line; printed live and again in the terminal summary."""

    def record(label: str, ok: bool, detail: str) -> bool:
        line = f"criterion {label:>4} {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[label] = line
        print(line)
        return ok

    return record


def _order(label: str):
    num = "".join(ch for ch in label if ch.isdigit())
    return int(num), label


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for label in sorted(_ACCEPTANCE, key=_order):
            terminalreporter.write_line(_ACCEPTANCE[label])
