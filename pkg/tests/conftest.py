import contextlib

import pytest

_RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_RESULTS] = {}


class _Outcome:
    detail = ""


@pytest.fixture
def criterion(request):
    """Context manager recording one PASS/FAIL line per acceptance criterion."""
    results = request.config.stash[_RESULTS]

    @contextlib.contextmanager
    def record(number, title):
        out = _Outcome()
        try:
            yield out
        except BaseException as exc:
            reason = str(exc).strip().splitlines()[0] if str(exc).strip() else type(exc).__name__
            results[number] = f"criterion {number:2d}: FAIL  {title}  ({reason})"
            print(results[number])
            raise
        results[number] = f"criterion {number:2d}: PASS  {title}" + (f"  ({out.detail})" if out.detail else "")
        print(results[number])

    return record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_RESULTS, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
