import math
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polematch import benchmarks
from polematch.errors import LengthMismatch, ShapeMismatch, SizeMismatch, TooLarge, ZeroNorm
from polematch.matching import (
    apply_mapping,
    branch_and_bound,
    brute_force,
    distance,
    match,
    match_blocks,
    objective,
    objective_d,
    objective_s,
)
from polematch.rom import PoleResidueROM, Weights, transfer_function

from conftest import random_prom

EMPTY_S = np.zeros((0, 2))


def noisy_permutation(rng, n, width=4, noise=1e-4):
    M1 = rng.uniform(-10, 10, (n, width))
    perm = rng.permutation(n)
    M2 = M1[perm] + noise * rng.standard_normal((n, width))
    return M1, M2, perm


def scenario_one(rng, n):
    """Well separated rows: identity beats every single swap."""
    M1 = np.column_stack([-np.arange(1, n + 1), 10.0 * np.arange(1, n + 1), np.ones(n), np.zeros(n)])
    return M1, M1 + 1e-6 * rng.standard_normal(M1.shape)


class TestApplyMapping:
    def test_swap(self):
        np.testing.assert_array_equal(apply_mapping([1, 0], [[1, 2], [3, 4]]), [[3, 4], [1, 2]])

    def test_identity(self, rng):
        M = rng.standard_normal((5, 4))
        np.testing.assert_array_equal(apply_mapping(np.arange(5), M), M)

    def test_inverse(self, rng):
        M = rng.standard_normal((6, 2))
        v = rng.permutation(6)
        np.testing.assert_array_equal(apply_mapping(v, apply_mapping(np.argsort(v), M)), M)

    def test_length(self):
        with pytest.raises(LengthMismatch):
            apply_mapping([0], np.zeros((2, 4)))


class TestObjective:
    def test_zero(self, rng):
        D = rng.standard_normal((3, 4))
        assert objective_d(D, D, np.arange(3), Weights(0.3, 7.0)) == 0.0

    def test_hand_value(self):
        f = objective_d([[-1, 10, 1, 0]], [[-1.1, 10.2, 1.05, 0]], [0])
        assert f == pytest.approx(0.0525, rel=1e-12)

    def test_position_weight_zero(self, rng):
        D1 = rng.standard_normal((3, 4))
        D2 = rng.standard_normal((3, 4))
        D3 = D2.copy()
        D3[:, :2] += 5.0
        w = Weights(0.0, 1.0)
        assert objective_d(D1, D2, np.arange(3), w) == objective_d(D1, D3, np.arange(3), w)

    def test_shape(self):
        with pytest.raises(ShapeMismatch):
            objective_d(np.zeros((2, 4)), np.zeros((3, 4)), [0, 1])

    def test_decoupled(self, rng):
        a = random_prom(rng, 3, 4)
        b = random_prom(rng, 3, 4)
        v_d, v_s = rng.permutation(3), rng.permutation(4)
        total = objective(a, b, v_d, v_s)
        assert total == objective_d(a.D, b.D, v_d) + objective_s(a.S, b.S, v_s)


class TestBranchAndBound:
    def test_identical(self, rng):
        D = rng.standard_normal((5, 4))
        res = branch_and_bound(D, D)
        np.testing.assert_array_equal(res.v, np.arange(5))
        assert res.objective == 0.0
        assert res.evaluations == 20

    def test_two_rows_swapped(self, rng):
        D1 = np.array([[-1.0, 10.0, 1.0, 0.0], [-2.0, 20.0, 1.0, 0.0]])
        D2 = D1[::-1] + 1e-3 * rng.standard_normal((2, 4))
        np.testing.assert_array_equal(branch_and_bound(D1, D2).v, [1, 0])

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_recovers_inverse_permutation(self, rng, n):
        for _ in range(20):
            M1, M2, perm = noisy_permutation(rng, n)
            res = branch_and_bound(M1, M2)
            np.testing.assert_array_equal(res.v, np.argsort(perm))
            np.testing.assert_array_equal(res.v, brute_force(M1, M2))

    @pytest.mark.parametrize("n", [3, 5, 8, 12])
    def test_scenario_one_count(self, rng, n):
        M1, M2 = scenario_one(rng, n)
        res = branch_and_bound(M1, M2)
        np.testing.assert_array_equal(res.v, np.arange(n))
        assert res.evaluations == n * (n - 1)

    def test_history_strictly_decreasing(self, rng):
        M1, M2, _ = noisy_permutation(rng, 7, noise=0.5)
        res = branch_and_bound(M1, M2)
        assert all(b < a for a, b in zip(res.history, res.history[1:]))
        assert res.history[-1] == res.objective

    def test_single_row(self):
        res = branch_and_bound([[-1.0, 2.0]], [[-1.5, 2.0]])
        assert res.evaluations == 0
        assert res.objective == pytest.approx(0.25)

    def test_budget_flags_low_confidence(self, rng):
        M1, M2, _ = noisy_permutation(rng, 6)
        res = branch_and_bound(M1, M2, budget=3)
        assert res.low_confidence
        assert res.evaluations <= 3
        full = branch_and_bound(M1, M2)
        assert not full.low_confidence

    def test_kept_table_variant(self, rng):
        # the variant keeping the table across accepted swaps is cheaper but
        # not guaranteed optimal; it must still return a permutation
        M1, M2, _ = noisy_permutation(rng, 6, noise=0.3)
        res = branch_and_bound(M1, M2, reset_on_accept=False)
        assert sorted(res.v) == list(range(6))
        assert res.objective >= objective_d(M1, M2, brute_force(M1, M2))

    def test_ties_rejected(self):
        # duplicate rows: every swap ties with the identity and is branched out
        D = np.array([[-1.0, 5.0, 1.0, 0.0]] * 3)
        res = branch_and_bound(D, D)
        np.testing.assert_array_equal(res.v, [0, 1, 2])
        assert res.evaluations == 6

    def test_shape(self):
        with pytest.raises(ShapeMismatch):
            branch_and_bound(np.zeros((2, 4)), np.zeros((2, 2)))


class TestBruteForce:
    def test_identity(self, rng):
        D = rng.standard_normal((4, 4))
        np.testing.assert_array_equal(brute_force(D, D), np.arange(4))

    def test_two_rows(self):
        D = np.array([[-1.0, 1.0, 0, 0], [-3.0, 3.0, 0, 0]])
        np.testing.assert_array_equal(brute_force(D, D[::-1]), [1, 0])

    def test_lexicographic_tie(self):
        D = np.array([[-1.0, 5.0, 1.0, 0.0]] * 3)
        np.testing.assert_array_equal(brute_force(D, D), [0, 1, 2])

    def test_matches_loop_enumeration(self, rng):
        M1 = rng.standard_normal((5, 2))
        M2 = rng.standard_normal((5, 2))
        best = min(permutations(range(5)), key=lambda v: objective_s(M1, M2, list(v)))
        np.testing.assert_array_equal(brute_force(M1, M2, Weights().s), best)

    def test_too_large(self):
        with pytest.raises(TooLarge):
            brute_force(np.zeros((10, 2)), np.zeros((10, 2)))


class TestMatch:
    def test_self(self, rng):
        x = random_prom(rng, 4, 3)
        assert match(x, x) == x

    def test_undoes_permutation(self, rng):
        x = random_prom(rng, 5, 4)
        y = x.replace(D=x.D[rng.permutation(5)], S=x.S[rng.permutation(4)])
        assert match(x, y) == x

    def test_preserves_transfer_function(self, rng):
        x = random_prom(rng, 4, 4)
        y = random_prom(rng, 4, 4)
        s = 1j * rng.uniform(0.5, 50, 6)
        np.testing.assert_allclose(transfer_function(match(x, y), s), transfer_function(y, s), rtol=1e-12)

    def test_size_mismatch(self, rng):
        with pytest.raises(SizeMismatch):
            match(random_prom(rng, 2, 3), random_prom(rng, 3, 3))

    def test_result_objective_recomputed(self, rng):
        x = random_prom(rng, 4, 5)
        y = random_prom(rng, 4, 5)
        res = match_blocks(x, y)
        assert res.objective == pytest.approx(objective(x, y, res.v_d, res.v_s), rel=1e-14)
        assert set(res.to_dict()) == {"v_d", "v_s", "objective", "evaluations", "low_confidence"}

    def test_fom_crossing_pair_against_brute_force(self):
        a = benchmarks.mor_oracle(4.9, benchmarks.TruncationConfig(4, 0))
        b = benchmarks.mor_oracle(5.1, benchmarks.TruncationConfig(4, 0))
        res = branch_and_bound(a.D, b.D)
        bf = brute_force(a.D, b.D)
        assert res.objective == objective_d(a.D, b.D, bf)


class TestDistance:
    def test_identical(self, rng):
        x = random_prom(rng, 3, 3)
        d = distance(x, x)
        assert d.distance == 0.0 and d.relative_error == 0.0

    def test_permuted_copy(self, rng):
        x = random_prom(rng, 4, 5)
        y = x.replace(D=x.D[::-1], S=x.S[::-1])
        assert distance(x, y).distance == 0.0

    def test_hand_value(self):
        a = PoleResidueROM([[-1.0, 10.0, 1.0, 0.0]], EMPTY_S)
        b = PoleResidueROM([[-1.0, 10.3, 1.0, 0.0]], EMPTY_S)
        d = distance(a, b)
        assert d.distance == pytest.approx(0.3, rel=1e-12)
        assert d.relative_error == pytest.approx(0.3 / math.sqrt(102), rel=1e-12)

    def test_zero_norm(self):
        a = PoleResidueROM([[-1.0, 1.0, 0.0, 0.0]], [[0.0, 0.0]])
        with pytest.raises(ZeroNorm):
            distance(a, a)

    def test_size_mismatch(self, rng):
        with pytest.raises(SizeMismatch):
            distance(random_prom(rng, 1, 2), random_prom(rng, 1, 3))


# -- properties ---------------------------------------------------------------


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 6), noise=st.sampled_from([1e-4, 1e-2, 0.1, 1.0]))
def test_optimal_like_brute_force(seed, n, noise):
    # single swaps are a local search; optimality needs the perturbation
    # regime, i.e. noise well below the row spread (rows span [-10, 10])
    rng = np.random.default_rng(seed)
    width = int(rng.choice([2, 4]))
    M1, M2, _ = noisy_permutation(rng, n, width=width, noise=noise)
    res = branch_and_bound(M1, M2)
    bf = brute_force(M1, M2)
    expected = objective_d(M1, M2, bf) if width == 4 else objective_s(M1, M2, bf)
    assert res.objective == expected


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 10))
def test_monotone_and_terminates(seed, n):
    rng = np.random.default_rng(seed)
    M1 = rng.standard_normal((n, 4))
    M2 = rng.standard_normal((n, 4))
    res = branch_and_bound(M1, M2)
    assert sorted(res.v) == list(range(n))
    assert all(b < a for a, b in zip(res.history, res.history[1:]))
    assert res.evaluations >= n * (n - 1)
