import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


_CRITERIA: dict[int, list[tuple[str, bool]]] = {}
N_CRITERIA = 12


@pytest.fixture
def record():
    """Log one acceptance part: ``record(n, part, ok, **detail)`` prints a PASS/FAIL line."""

    def rec(n: int, part: str, ok: bool, **detail) -> bool:
        ok = bool(ok)
        _CRITERIA.setdefault(n, []).append((part, ok))
        extra = " ".join(f"{k}={v}" for k, v in detail.items())
        print(f"criterion {n:2d} {'PASS' if ok else 'FAIL'} [{part}] {extra}")
        return ok

    return rec


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        parts = _CRITERIA.get(n)
        if not parts:
            terminalreporter.line(f"criterion {n:2d}: FAIL (not run)")
            continue
        bad = [p for p, ok in parts if not ok]
        verdict = "PASS" if not bad else "FAIL"
        tail = f" (failing: {', '.join(bad)})" if bad else ""
        terminalreporter.line(f"criterion {n:2d}: {verdict}{tail}")
