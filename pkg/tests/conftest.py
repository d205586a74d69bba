from __future__ import annotations

import time

import pytest

ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def report(name: str, ok: bool, detail: str) -> None:
    ACCEPTANCE[name] = (bool(ok), detail)
    print(f"{name}: {'PASS' if ok else 'FAIL'} {detail}")


@pytest.fixture(scope="session")
def kinetic_design():
    """All nine cases on the default grid, with the wall time it took."""
    from threelevel import doe

    start = time.perf_counter()
    results = doe.run_design(engine="kinetic", keep_grid=True)
    return results, time.perf_counter() - start


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda s: int(s[1:])):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{name} {'PASS' if ok else 'FAIL'}  {detail}")
