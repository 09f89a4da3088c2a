"""Acceptance suite: the ten headline properties at full sizes and tolerances.

Each test emits one PASS/FAIL line (via pytest -v) for one criterion and
asserts the documented tolerance and, where stated, the runtime budget.
The heavy shared artifact (the 200-extremal field per regime) is built
once per session by the field_summaries fixture.
"""

import time

import pytest

from sisctrl.verification import (
    check_brute_force,
    check_curve_geometry,
    check_degenerate,
    check_dp,
    check_flow_agreement,
    check_hamiltonian_constancy,
    check_hjb,
    check_invariance,
    check_switch_structure,
    check_trichotomy,
)


def _run(check_call, budget=None):
    t0 = time.monotonic()
    result = check_call()
    elapsed = time.monotonic() - t0
    print(f"[{'PASS' if result.passed else 'FAIL'}] {result.name}: "
          f"{result.detail} ({elapsed:.1f}s)")
    assert result.passed, result.detail
    if budget is not None:
        assert elapsed < budget, f"{result.name} took {elapsed:.1f}s (budget {budget}s)"


def test_criterion_01_flow_closed_form_vs_rk4(m_one, m_two):
    _run(lambda: check_flow_agreement([m_one, m_two], n=10000, tol=1e-8), budget=10)


def test_criterion_02_hamiltonian_constancy(field_summaries):
    _run(lambda: check_hamiltonian_constancy(field_summaries, tol=1e-8), budget=60)


def test_criterion_03_switch_structure(field_summaries):
    _run(lambda: check_switch_structure(field_summaries, n_plans=10000,
                                        refl_tol=1e-8))


def test_criterion_04_curve_geometry(m_one, m_two):
    _run(lambda: check_curve_geometry([m_one, m_two], n=1500,
                                      second_diff_tol=1e-8,
                                      tangency_tol=1e-6, roundtrip_tol=1e-10))


def test_criterion_05_hjb_residual_and_gradients(m_one, m_two):
    _run(lambda: check_hjb([m_one, m_two], n=1000, n_fd=100,
                           tol=1e-8, fd_tol=1e-6))


def test_criterion_06_optimality_vs_brute_force(m_one, m_two):
    _run(lambda: check_brute_force([m_one, m_two], nx=30, nt=30, n_grid=2000,
                                   neg_tol=1e-10, pos_tol=5e-4), budget=300)


def test_criterion_07_optimality_vs_dp(m_one, m_two):
    _run(lambda: check_dp([m_one, m_two], sizes=(500, 1000, 2000),
                          tol=2e-2, factor=1.5), budget=600)


def test_criterion_08_degenerate_regimes(m_no, m_out):
    _run(lambda: check_degenerate(m_no, m_out, n=20))


def test_criterion_09_interval_invariance(m_one, m_two):
    _run(lambda: check_invariance([m_one, m_two], n=10000, tol=1e-12))


def test_criterion_10_marginal_cost_trichotomy(m_one, m_two):
    _run(lambda: check_trichotomy([m_one, m_two], n=1000, zero_tol=1e-9))
