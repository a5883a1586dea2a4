import pytest

from ecpidunn.config import ExperimentConfig

_ACCEPTANCE: dict[int, str] = {}


def make_cfg(**paths):
    """Default config with dotted-path overrides."""
    return ExperimentConfig().with_overrides(**paths) if paths else ExperimentConfig()


@pytest.fixture
def cfg_factory():
    return make_cfg


@pytest.fixture
def acceptance():
    """Record the outcome line of one acceptance criterion.

    Usage: ``with acceptance(3, "physics conservation") as note: ...``; the
    block's assertions decide PASS/FAIL and ``note`` collects measured values.
    """
    from contextlib import contextmanager
    import time

    @contextmanager
    def criterion(number: int, title: str):
        notes: list[str] = []
        start = time.perf_counter()
        status = "FAIL"
        try:
            yield notes
            status = "PASS"
        finally:
            elapsed = time.perf_counter() - start
            detail = "; ".join(notes)
            line = f"criterion {number} [{status}] {title} ({elapsed:.2f}s)"
            _ACCEPTANCE[number] = line + (f": {detail}" if detail else "")
            print(_ACCEPTANCE[number])

    return criterion


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[k])
