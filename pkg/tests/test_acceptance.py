"""Acceptance criteria 1-10, one test each, with a summary line per criterion."""

import pytest

import acceptance
from conftest import ACCEPTANCE_LINES

_RUNS: dict[int, acceptance.Outcome] = {}


def outcome(k: int) -> acceptance.Outcome:
    if k not in _RUNS:
        _RUNS[k] = acceptance.CRITERIA[k]()
    return _RUNS[k]


def _report(out: acceptance.Outcome) -> None:
    ACCEPTANCE_LINES[out.number] = out.line()
    print(out.line())
    assert out.passed, out.line()


@pytest.mark.parametrize("k", sorted(acceptance.CRITERIA))
def test_criterion(k):
    _report(outcome(k))


def test_criterion_10_determinism():
    first = {k: outcome(k) for k in acceptance.CRITERIA}
    _report(acceptance.criterion_10(first))
