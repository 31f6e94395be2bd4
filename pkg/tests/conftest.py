from collections import defaultdict

import pytest

_CHECKS: dict[int, list[tuple[str, bool, str]]] = defaultdict(list)
_TITLES: dict[int, str] = {}


@pytest.fixture(scope="session")
def criterion():
    """Record ``(number, title, check, ok, detail)`` for the closing summary."""
    def record(number: int, title: str, check: str, ok: bool, detail: str) -> bool:
        _TITLES[number] = title
        _CHECKS[number].append((check, bool(ok), detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CHECKS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CHECKS):
        checks = _CHECKS[n]
        verdict = "PASS" if all(ok for _, ok, _ in checks) else "FAIL"
        parts = "; ".join(f"{name}: {detail} [{'PASS' if ok else 'FAIL'}]"
                          for name, ok, detail in checks)
        tr.write_line(f"criterion {n} {verdict}  {_TITLES[n]} | {parts}")
