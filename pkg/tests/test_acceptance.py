"""One test per acceptance criterion.

Each test prints the criterion's result line (also collected into a summary
section at the end of the pytest run) and asserts that it passes.  The
tolerances live in jumpdecay.acceptance and are pinned below so that a change
to them shows up as a failure here.  Run standalone for just the lines:

    python3 tests/test_acceptance.py
"""

import pytest

from jumpdecay import acceptance as A

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # standalone run
    ACCEPTANCE_LINES = []

PINNED = {
    "C1_RESIDUAL": 1e-8, "C1_SPREAD": 10.0, "C1_POWER": (1.85, 2.15),
    "C2_RATE_REL": 0.15, "C2_BETA_ABS": 0.1, "C2_CAP": 25.0,
    "C3_SATURATION_REL": 0.15, "C3_SHALLOW_MAX": 0.8,
    "C4_GROWTH": 5.0, "C5_K1_RTOL": 0.01, "C6_TOL": 1e-8,
    "C8_DENSITY_REL": 0.05, "C8_FK_CIS": 3.0, "C8_OVERLAY_FACTOR": 2.0,
    "C9_BAND": 10.0, "C9_POWER": (3.7, 4.3), "C10_SELF_ADJ": 1e-10,
}


def test_tolerances_are_pinned():
    for name, value in PINNED.items():
        assert getattr(A, name) == value, name


@pytest.mark.parametrize("number", sorted(A.CRITERIA))
def test_criterion(number):
    r = A.run_criterion(number)
    line = r.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert r.verdict == "pass", line


if __name__ == "__main__":
    results = A.run_suite()
    print(f"{sum(r.verdict == 'pass' for r in results)}/{len(results)} criteria pass")
