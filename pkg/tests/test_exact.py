import math

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from conftest import ba_bounds, random_square_channel
from exactcap.errors import SingularChannel, SubsetSearchInconclusive
from exactcap.exact import (
    CapacityOptions,
    Status,
    algorithm1,
    build_dual_basis,
    capacity,
    equal_divergence_residual,
    exact_solution,
    solve_mixture_exponential_intersection,
    solve_theta,
)
from exactcap.family import candidate_capacities, epsilon_family_channel
from exactcap.oracle import blahut_arimoto
from exactcap.prob import LOG2, binary_entropy, bsc, mutual_information, row_divergences


def seeds():
    return st.integers(0, 2**32 - 1)


class TestDualBasis:
    def test_bsc_inverse(self):
        p = 0.1
        f = build_dual_basis(bsc(p)).functions
        expected = np.array([[1 - p, -p], [-p, 1 - p]]) / (1 - 2 * p)
        np.testing.assert_allclose(f, expected, atol=1e-15)

    def test_identity(self):
        np.testing.assert_allclose(build_dual_basis(np.eye(3)).functions, np.eye(3))

    @settings(max_examples=50)
    @given(seeds(), st.integers(2, 6))
    def test_duals_sum_to_one(self, seed, n):
        m = random_square_channel(n, np.random.default_rng(seed))
        f = build_dual_basis(m).functions
        np.testing.assert_allclose(f.sum(axis=1), np.ones(n), atol=1e-9)
        np.testing.assert_allclose(m @ f, np.eye(n), atol=1e-9)

    def test_duplicate_rows(self):
        with pytest.raises(SingularChannel):
            build_dual_basis([[0.3, 0.7], [0.3, 0.7]])

    def test_more_inputs_than_outputs(self):
        with pytest.raises(SingularChannel):
            build_dual_basis(epsilon_family_channel(0.2))

    def test_wide_channel_duals(self):
        m = np.array([[0.7, 0.2, 0.1], [0.1, 0.6, 0.3]])
        basis = build_dual_basis(m)
        gram = m @ basis.functions
        # input 0 dual, one free direction, reference dual
        np.testing.assert_allclose(gram[:, 0], [1, 0], atol=1e-12)
        np.testing.assert_allclose(gram[:, 1], [0, 0], atol=1e-12)
        np.testing.assert_allclose(gram[:, 2], [0, 1], atol=1e-12)
        assert basis.n_free == 1


class TestTheta:
    def test_family_subchannel(self):
        eps = 0.3
        sub = epsilon_family_channel(eps).restrict_inputs([0, 1, 2])
        params = solve_theta(sub, build_dual_basis(sub))
        h4 = LOG2 - binary_entropy(eps)
        np.testing.assert_allclose(params.theta, [h4, h4], atol=1e-14)

    def test_density_normalized(self):
        m = random_square_channel(5, np.random.default_rng(1))
        params = solve_theta(m, build_dual_basis(m))
        assert params.density().sum() == pytest.approx(1.0, abs=1e-12)


class TestAlgorithm1:
    @pytest.mark.parametrize("p", [0.05, 0.1, 0.25, 0.4])
    def test_bsc(self, p):
        sol = algorithm1(bsc(p))
        assert sol.valid
        assert sol.capacity == pytest.approx(LOG2 - binary_entropy(p), abs=1e-12)
        np.testing.assert_allclose(sol.input_candidate, [0.5, 0.5], atol=1e-12)

    def test_gate_fails_on_input_three(self):
        sub = epsilon_family_channel(0.2).restrict_inputs([0, 1, 2])
        sol = algorithm1(sub)
        assert sol.status is Status.GATE_FAILED
        assert sol.negative == (2,)

    def test_gate_passes_above_crossing(self):
        sub = epsilon_family_channel(0.38).restrict_inputs([0, 1, 2])
        sol = algorithm1(sub)
        assert sol.valid
        assert sol.capacity == pytest.approx(candidate_capacities(0.38).c4, abs=1e-12)

    def test_requires_square(self):
        with pytest.raises(ValueError):
            algorithm1([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5]])

    def test_small_eps_stays_finite(self):
        sub = epsilon_family_channel(1e-3).restrict_inputs([1, 2, 3])
        sol = algorithm1(sub)
        assert np.all(np.isfinite(sol.input_candidate))

    @settings(max_examples=60, suppress_health_check=[HealthCheck.filter_too_much])
    @given(seeds(), st.integers(2, 7))
    def test_saddle_point_identities(self, seed, n):
        m = random_square_channel(n, np.random.default_rng(seed))
        sol = algorithm1(m)
        assume(sol.valid)
        q = sol.input_candidate
        assert q.sum() == pytest.approx(1.0, abs=1e-9)
        np.testing.assert_allclose(q @ m, sol.output_law, atol=1e-9)
        assert mutual_information(np.clip(q, 0, None), m) == pytest.approx(sol.capacity, abs=1e-10)
        d = row_divergences(m, sol.output_law)
        assert d.max() == pytest.approx(sol.capacity, abs=1e-10)
        assert equal_divergence_residual(sol, m) <= 1e-9

    @settings(max_examples=40)
    @given(seeds(), st.integers(2, 6), st.integers(0, 2**32 - 1))
    def test_minimax(self, seed, n, seed2):
        m = random_square_channel(n, np.random.default_rng(seed))
        sol = algorithm1(m)
        assume(sol.valid)
        # any other output law has a larger worst-case divergence
        other = np.random.default_rng(seed2).dirichlet(np.ones(n))
        assert row_divergences(m, other).max() >= sol.capacity - 1e-10


class TestWideChannels:
    @pytest.mark.parametrize("rows", [
        [[0.5, 0.3, 0.2], [0.2, 0.48, 0.32]],
        [[0.2, 0.2, 0.4, 0.2], [0.05, 0.425, 0.1, 0.425]],
    ])
    def test_closed_form_matches_newton(self, rows):
        law_cf, params_cf = solve_mixture_exponential_intersection(rows, closed_form=True)
        law_nt, params_nt = solve_mixture_exponential_intersection(rows, closed_form=False)
        np.testing.assert_allclose(law_cf, law_nt, atol=1e-9)
        assert params_cf.phi == pytest.approx(params_nt.phi, abs=1e-12)
        ba, _, _ = blahut_arimoto(rows, tol=1e-12)
        assert exact_solution(rows).capacity == pytest.approx(ba, abs=1e-9)

    def test_closed_form_requires_pairs(self):
        with pytest.raises(ValueError):
            solve_mixture_exponential_intersection([[0.7, 0.2, 0.1], [0.1, 0.5, 0.4]],
                                                   closed_form=True)

    @pytest.mark.parametrize("rows", [
        [[0.7, 0.2, 0.1], [0.1, 0.6, 0.3]],
        [[0.5, 0.2, 0.2, 0.1], [0.1, 0.35, 0.35, 0.2]],
        [[0.6, 0.1, 0.1, 0.2], [0.1, 0.7, 0.1, 0.1], [0.2, 0.2, 0.5, 0.1]],
    ])
    def test_matches_oracle(self, rows):
        sol = exact_solution(rows)
        assert sol.valid
        ba, _, _ = blahut_arimoto(rows, tol=1e-12)
        assert sol.capacity == pytest.approx(ba, abs=1e-9)
        assert equal_divergence_residual(sol, rows) <= 1e-9
        assert sol.input_candidate.sum() == pytest.approx(1.0, abs=1e-9)

    def test_single_input(self):
        sol = exact_solution([[0.2, 0.8]])
        assert sol.valid and sol.capacity == 0.0


class TestDriver:
    @settings(max_examples=40, deadline=None)
    @given(seeds(), st.integers(2, 6))
    def test_support_reduction_matches_oracle(self, seed, n):
        rng = np.random.default_rng(seed)
        m = random_square_channel(n, rng, diag_weight=rng.uniform(0.0, 0.2))
        report = capacity(m)
        lower, upper = ba_bounds(m)
        assert lower - 1e-8 <= report.capacity <= upper + 1e-8
        assert report.verified

    def test_reduction_counterexample(self):
        # negative reconstructed weight on input 0, yet input 0 is in the optimal support
        m = np.array([
            [0.6862487, 0.01085633, 0.00124385, 0.30165113],
            [0.2420682, 0.22742852, 0.11217247, 0.41833082],
            [0.45512185, 0.24691091, 0.12748909, 0.17047815],
            [0.01230602, 0.18152386, 0.14410095, 0.66206917],
        ])
        m = m / m.sum(axis=1, keepdims=True)
        assert algorithm1(m).input_candidate[0] < 0
        report = capacity(m)
        assert report.path.rejected_support == (2, 3)
        assert report.support == (0, 3)
        ba, _, _ = blahut_arimoto(m, tol=1e-10)
        assert report.capacity == pytest.approx(ba, abs=1e-8)

    @pytest.mark.parametrize("eps,value,support", [
        (0.2, lambda c: c.c_star, (0, 1)),
        (0.38, lambda c: c.c4, (0, 1, 2)),
        (0.45, lambda c: c.c_dstar, (2, 3)),
    ])
    def test_family(self, eps, value, support):
        report = capacity(epsilon_family_channel(eps))
        assert report.capacity == pytest.approx(value(candidate_capacities(eps)), abs=1e-10)
        assert report.support == support
        assert report.path.route == "subset-search"

    def test_hybrid_route(self):
        report = capacity(epsilon_family_channel(0.2), subset="hybrid")
        assert report.path.route == "hybrid"
        assert report.support == (0, 1)

    def test_reduction_is_recorded(self):
        report = capacity(epsilon_family_channel(0.2).restrict_inputs([0, 1, 2]))
        assert report.path.route == "mixture-exponential"
        assert report.path.reductions == [(2,)]
        assert report.capacity == pytest.approx(0.8 * LOG2, abs=1e-12)

    def test_unused_output_dropped(self):
        report = capacity([[0.9, 0.0, 0.1], [0.1, 0.0, 0.9]])
        assert report.path.dropped_outputs == (1,)
        assert report.capacity == pytest.approx(LOG2 - binary_entropy(0.1), abs=1e-12)
        assert report.output_law[1] == 0.0

    def test_oracle_check(self):
        report = capacity(bsc(0.1), oracle=True)
        assert report.oracle_check == pytest.approx(report.capacity, abs=1e-10)

    def test_singular_raises_or_falls_back(self):
        rows = [[0.3, 0.7, 0.0], [0.3, 0.7, 0.0]]
        with pytest.raises(SingularChannel):
            capacity(rows)
        report = capacity(rows, fallback=True)
        assert report.path.route == "oracle-fallback"
        assert report.capacity == pytest.approx(0.0, abs=1e-12)

    def test_inconclusive_carries_partial_report(self):
        with pytest.raises(SubsetSearchInconclusive) as info:
            capacity(epsilon_family_channel(0.2), options=CapacityOptions(tol_eq=-1.0))
        partial = info.value.report
        assert partial is not None
        assert partial.oracle_check == pytest.approx(0.8 * LOG2, abs=1e-9)

    def test_options_and_kwargs_exclusive(self):
        with pytest.raises(TypeError):
            capacity(bsc(0.1), options=CapacityOptions(), oracle=True)

    def test_unknown_strategy(self):
        with pytest.raises(ValueError):
            capacity(epsilon_family_channel(0.2), subset="greedy")

    def test_describe_uses_labels(self):
        ch = epsilon_family_channel(0.45)
        report = capacity(ch)
        text = report.path.describe(ch.input_labels)
        assert "dropped inputs [1]" in text
        assert math.isfinite(report.verification_gap)
