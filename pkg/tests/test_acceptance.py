"""Acceptance gate: each test runs one validation criterion end to end
and prints a single PASS/FAIL line with the measured detail."""

import pytest

from r13lab import validation


def _check(i):
    passed, detail = validation.CRITERIA[i]()
    print(f"criterion {i}: {'PASS' if passed else 'FAIL'} - {detail}")
    assert passed, detail


def test_criterion_1_layer_rates_match_reference_table():
    _check(1)


def test_criterion_2_maxwell_transport_coefficients_are_exact():
    _check(2)


def test_criterion_3_maxwell_wall_coefficients_are_exact():
    _check(3)


def test_criterion_4_steady_profiles_solve_ode_and_walls():
    _check(4)


def test_criterion_5_transient_run_converges_to_steady_profile():
    _check(5)


def test_criterion_6_entropy_never_increases():
    _check(6)


def test_criterion_7_structural_invariants_hold_for_all_models():
    _check(7)


def test_criterion_8_second_order_closure_is_consistent():
    _check(8)


def test_criterion_9_steady_limit_converges_at_second_order():
    _check(9)
