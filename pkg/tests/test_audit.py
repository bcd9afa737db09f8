import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochfix import (
    audit_coefficients, audit_lattice, audit_support, build, c4_c6_estimates, chi_bootstrap,
    degenerate_variant, solve,
)
from stochfix.audit import (
    FAIL, INCONCLUSIVE, PASS, audit_draws, chi, lower_tail_fit, spectral_sample, trimmed_mean,
    wilson_interval,
)
from stochfix.core import SpectralSummary
from stochfix.errors import DomainError
from stochfix.streams import stream

from conftest import identity_system
import oracles

N_DRAWS = 100_000


@pytest.fixture(scope="module")
def quicksort_report():
    return audit_coefficients(build({"model": "quicksort"}), 0, N_DRAWS, seed=0)


def test_quicksort_constants(quicksort_report):
    rep = quicksort_report
    assert 0.5 <= rep.a_hat <= 0.5 + 10 / N_DRAWS
    assert rep.lambda_hat == pytest.approx(2.0, rel=0.1)
    assert rep.nu_hat == pytest.approx(1.0, rel=0.1)
    for cond in ("A1", "A2", "A3", "A5", "C1", "C2", "C4", "C5", "C6", "C7"):
        assert rep.verdict(cond) == PASS, cond
    assert rep.verdict("A4") == rep.verdict("C3") == INCONCLUSIVE
    assert rep.ok and rep.eta_feasible is not None


def test_report_entries_carry_sample_sizes(quicksort_report):
    for entry in quicksort_report.entries.values():
        assert entry.n == N_DRAWS
    assert quicksort_report.entries["A2"].se["nu_hat"] > 0
    d = quicksort_report.to_dict()
    assert d["n_draws"] == N_DRAWS and "A1" in d["entries"]


def test_perpetuity_fails():
    rep = audit_coefficients(identity_system(), 0, 2000)
    assert rep.verdict("A2") == FAIL
    assert rep.verdict("C6") == FAIL
    assert rep.verdict("A5") == FAIL and rep.verdict("C2") == FAIL


def test_split_tree_gain_bound():
    rep = audit_coefficients(build({"model": "split", "b": 2, "law": "bst"}), 0, 5000)
    assert rep.verdict("A1") == PASS and rep.a_hat >= 0.5


def test_small_draw_count_rejected():
    with pytest.raises(DomainError):
        audit_coefficients(build({"model": "quicksort"}), 0, 999)


def test_audit_is_permutation_invariant():
    sample = spectral_sample(build({"model": "quicksort"}), 0, 3000, seed=1)
    perm = np.random.default_rng(0).permutation(3000)
    a = audit_draws(sample).to_dict()
    b = audit_draws(sample.permuted(perm)).to_dict()
    assert a == b


def test_a2_pass_implies_no_c6_mass(quicksort_report):
    assert quicksort_report.verdict("A2") == PASS
    assert quicksort_report.entries["C6"].estimates["c6_hat"] == 0.0


def test_c4_quicksort_half():
    sample = spectral_sample(build({"model": "quicksort"}), 0, 200_000, seed=3)
    est = c4_c6_estimates(sample, 0.5)
    assert est.c6_hat == 0.0
    # winsorizing the top 0.1% biases the heavy-tailed mean down by about 2%
    assert est.c4_hat == pytest.approx(oracles.C4_QUICKSORT_HALF, rel=0.05)
    assert est.c4_raw == pytest.approx(oracles.C4_QUICKSORT_HALF, rel=0.03)
    assert not est.c4_divergent and est.c5_exponent == np.inf


def test_c6_single_term():
    draws = [SpectralSummary(1.0, 0.0, 0)] * 50
    for eta in (0.25, 1.0, 3.0):
        est = c4_c6_estimates(draws, eta)
        assert est.c6_hat == 1.0 and not est.c6_ok
    with pytest.raises(DomainError):
        c4_c6_estimates(draws, 0.0)


def test_divergence_flag():
    # E[U^-2] is infinite; the largest values dominate the sum
    u = stream(1).random(100_000)
    assert trimmed_mean(u ** -2.0).divergent
    assert not trimmed_mean(u ** -0.25).divergent


def test_lower_tail_fit_exact_law():
    x = stream(2).random(100_000) ** 2  # P(X <= x) = x^(1/2)
    fit = lower_tail_fit(x)
    assert fit.nu == pytest.approx(0.5, rel=0.05) and fit.lam == pytest.approx(1.0, rel=0.1)


def test_wilson_interval():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0 and 0 < hi < 0.1
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi


def test_chi_trace():
    trace = chi_bootstrap(0.5, 1, 3)
    assert trace.values == pytest.approx(oracles.CHI_TRACE, abs=0)
    assert trace.steps == 6 and trace.steps_to(3) == 6
    assert chi_bootstrap(1, 1, 1).steps == 0
    assert chi(1, 2) == 1.5
    for bad in ((0, 1, 3), (1, -1, 3), (1, 1, 0)):
        with pytest.raises(DomainError):
            chi_bootstrap(*bad)


@settings(deadline=None)
@given(st.floats(1e-3, 10), st.floats(1e-3, 10), st.floats(1e-3, 50))
def test_chi_trace_increments(eta0, nu, target):
    vals = chi_bootstrap(eta0, nu, target).values
    for a, b in zip(vals, vals[1:]):
        assert b > a
        assert b - a == pytest.approx(min(a, nu) / 2, rel=1e-12)
    assert vals[-1] >= target


# --------------------------------------------------------------------------
# pool audits


def test_support_line_and_cloud():
    t = stream(0).normal(size=5000)
    assert audit_support(np.column_stack([t, t])).verdict == FAIL
    assert audit_support(stream(1).normal(size=(5000, 2))).verdict == PASS
    assert audit_support(np.zeros((2, 2))).verdict == INCONCLUSIVE
    assert audit_support(np.zeros((100, 1))).verdict == FAIL


def _affine(theta1, theta2, kappa):
    def rot(t):
        return np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])

    return rot(theta1) @ np.diag([1.0, 1.0 / kappa]) @ rot(theta2)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi), st.floats(1, 1e3), st.floats(0.01, 100),
       st.tuples(st.floats(-100, 100), st.floats(-100, 100)))
def test_support_verdict_is_affine_invariant(t1, t2, kappa, scale, shift):
    M = scale * _affine(t1, t2, kappa)
    cloud = stream(3).normal(size=(4000, 2))
    t = stream(4).normal(size=4000)
    line = np.column_stack([t, 0.5 * t + 1.0])
    for pts in (cloud, line):
        before = audit_support(pts).verdict
        after = audit_support(pts @ M.T + np.array(shift)).verdict
        assert before == after


def test_support_of_split_tree_solutions():
    generic, _ = solve(build({"model": "split2d", "b": 2, "law": "bst"}), 20_000, seed=0)
    good = audit_support(generic[0])
    assert good.verdict == PASS and good.normalized_min_eig > 1e-3
    cfg = {"model": "split2d", "b": 2, "law": {"kind": "deterministic", "v": [0.5, 0.5]}}
    degen, _ = solve(degenerate_variant(cfg), 20_000, seed=0)
    bad = audit_support(degen[0])
    assert bad.verdict == FAIL and bad.normalized_min_eig < 1e-10


def test_lattice_examples():
    bits = (stream(0).random(5000) < 0.5).astype(float)
    assert audit_lattice(bits).verdict == FAIL
    assert audit_lattice(stream(1).random(5000)).verdict == PASS
    assert audit_lattice(np.full(2000, 3.7)).verdict == FAIL
    shifted_grid = 0.25 * stream(2).integers(0, 40, (5000, 2)) + 0.1
    assert audit_lattice(shifted_grid).verdict == FAIL
    with pytest.raises(DomainError):
        audit_lattice(np.zeros(10))


def test_quicksort_pool_non_lattice(quicksort_pool):
    v = audit_lattice(quicksort_pool)
    assert v.verdict == PASS and "evidence" in v.note
