"""Acceptance suite: one test per verification criterion.

Each test runs the corresponding check at its pinned tolerance and
prints a PASS/FAIL line with the measured error, so `pytest -v -s
tests/test_acceptance.py` doubles as a readable verification report
(the `starkwalk ... verify-all` experiment emits the same table).
"""
import pytest

from starkwalk.verify import (
    check_boundedness,
    check_channel_oracle,
    check_clt,
    check_einstein,
    check_energy_bookkeeping,
    check_energy_fcs,
    check_fluctuation,
    check_ldp,
    check_position_fcs,
    check_propagator,
    check_theta_identities,
    check_transport,
)

CRITERIA = [
    ("01 channel-oracle equivalence", check_channel_oracle),
    ("02 propagator cross-check", check_propagator),
    ("03 theta identities", check_theta_identities),
    ("04 transport coefficients", check_transport),
    ("05 central limit theorem", check_clt),
    ("06 large deviations", check_ldp),
    ("07 fluctuation identities", check_fluctuation),
    ("08 energy counting statistics", check_energy_fcs),
    ("09 position counting statistics", check_position_fcs),
    ("10 einstein relation", check_einstein),
    ("11 energy bookkeeping", check_energy_bookkeeping),
    ("12 single-atom boundedness", check_boundedness),
]


@pytest.mark.parametrize("label,check", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_acceptance(label, check):
    result = check()
    print(f"\n{label}: {result.line()}")
    assert result.passed, result.line()
