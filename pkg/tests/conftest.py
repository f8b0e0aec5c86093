import contextlib
import time

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Context manager timing one acceptance criterion and recording its verdict.

    The block fails if it raises or overruns ``budget`` seconds.
    """
    results = request.config.stash.setdefault(_ACCEPTANCE, {})

    @contextlib.contextmanager
    def run(number: int, title: str, budget: float):
        start = time.perf_counter()
        try:
            yield
        except BaseException as exc:
            elapsed = time.perf_counter() - start
            first = (str(exc).strip().splitlines() or [type(exc).__name__])[0]
            results[number] = f"FAIL {number}. {title} ({elapsed:.2f}s): {first[:120]}"
            raise
        elapsed = time.perf_counter() - start
        ok = elapsed < budget
        verdict = "PASS" if ok else "FAIL"
        results[number] = f"{verdict} {number}. {title} ({elapsed:.2f}s, budget {budget:g}s)"
        assert ok, f"criterion {number} took {elapsed:.2f}s, budget {budget:g}s"

    return run


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_ACCEPTANCE, None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
