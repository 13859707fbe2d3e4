import random

import pytest

from qfdlog.ntkernel import Discriminant

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


def random_fundamental(rng: random.Random, lo: int, hi: int) -> int:
    while True:
        d = rng.randint(lo, hi)
        if d % 4 not in (0, 1) or d in (0, 1):
            continue
        try:
            if Discriminant(d).fundamental:
                return d
        except ValueError:
            continue


@pytest.fixture
def record_criterion():
    def record(number: int, passed: bool, detail: str = ""):
        ACCEPTANCE[number] = (bool(passed), detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
