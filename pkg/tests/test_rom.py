import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polematch.errors import (
    DefectiveMatrix,
    NonSimpleEigenvalue,
    PoleEvaluation,
    SingularSystem,
)
from polematch.rom import (
    PoleResidueROM,
    StateSpaceROM,
    Weights,
    canonicalize,
    state_space_transfer,
    to_pole_residue,
    transfer_function,
)

from conftest import random_prom, random_stable_system


def dense_transfer(rom, s):
    k = rom.k
    x = np.linalg.solve(s * np.eye(k) - rom.A, rom.B[:, 0])
    return complex(rom.C[0] @ x)


class TestStateSpaceROM:
    def test_shapes(self):
        rom = StateSpaceROM([[-1.0, 0], [0, -2]], [1, 1], [1, 1])
        assert rom.k == 2
        assert rom.B.shape == (2, 1)
        assert rom.C.shape == (1, 2)

    def test_immutable(self):
        rom = StateSpaceROM([[-3.0]], [1], [2])
        with pytest.raises(ValueError):
            rom.A[0, 0] = 1.0

    def test_bad_shapes(self):
        with pytest.raises(ValueError):
            StateSpaceROM([[1.0, 2.0]], [1], [1])
        with pytest.raises(ValueError):
            StateSpaceROM([[-1.0]], [1, 2], [1])

    def test_json_round_trip(self):
        rom = StateSpaceROM([[-1.0, 2.0], [-2.0, -1.0]], [1, 0], [0, 1])
        back = StateSpaceROM.from_dict(rom.to_dict())
        np.testing.assert_array_equal(back.A, rom.A)
        np.testing.assert_array_equal(back.B, rom.B)
        np.testing.assert_array_equal(back.C, rom.C)


class TestPoleResidueROM:
    def test_rejects_nonpositive_imaginary_part(self):
        with pytest.raises(ValueError):
            PoleResidueROM([[-1.0, 0.0, 1.0, 0.0]], np.zeros((0, 2)))
        with pytest.raises(ValueError):
            PoleResidueROM([[-1.0, -2.0, 1.0, 0.0]], np.zeros((0, 2)))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            PoleResidueROM(np.zeros((0, 4)), np.zeros((0, 2)))

    def test_json_round_trip(self, rng):
        prom = random_prom(rng, 3, 2, param=1.5)
        data = prom.to_dict()
        assert set(data) == {"param", "D", "S"}
        assert PoleResidueROM.from_dict(data) == prom

    def test_poles(self):
        prom = PoleResidueROM([[-1.0, 2.0, 1.0, 0.0]], [[-3.0, 1.0]])
        assert sorted(prom.poles(), key=lambda z: z.imag) == [-1 - 2j, -3, -1 + 2j]


class TestToPoleResidue:
    def test_first_fom_block_at_zero(self):
        A = [[-42.0, 200.0], [-200.0, -42.0]]
        rom = StateSpaceROM(A, [100, 100], [100, 100])
        prom = to_pole_residue(rom)
        assert prom.n_d == 1 and prom.n_s == 0
        np.testing.assert_allclose(prom.D[0, :2], [-42.0, 200.0], rtol=1e-13)
        s_values = np.random.default_rng(3).standard_normal(10) * 100 + 1j * np.random.default_rng(4).standard_normal(10) * 300
        for s in s_values:
            assert transfer_function(prom, s) == pytest.approx(dense_transfer(rom, s), rel=1e-10)

    def test_scalar(self):
        prom = to_pole_residue(StateSpaceROM([[-3.0]], [1], [2]))
        np.testing.assert_array_equal(prom.S, [[-3.0, 2.0]])
        assert prom.n_d == 0

    def test_diagonal(self):
        prom = to_pole_residue(StateSpaceROM(np.diag([-1.0, -2.0]), [1, 1], [1, 1]))
        np.testing.assert_allclose(prom.S, [[-2.0, 1.0], [-1.0, 1.0]], atol=1e-14)

    def test_canonical_order(self, rng):
        prom = to_pole_residue(random_stable_system(rng, 12))
        assert np.all(np.diff(prom.S[:, 0]) >= 0)
        assert np.all(np.diff(prom.D[:, 1]) >= 0)
        assert np.all(prom.D[:, 1] > 0)

    def test_param_is_stored(self):
        assert to_pole_residue(StateSpaceROM([[-3.0]], [1], [2]), p=0.25).param == 0.25

    def test_repeated_eigenvalue(self):
        with pytest.raises(NonSimpleEigenvalue):
            to_pole_residue(StateSpaceROM(np.diag([-1.0, -1.0]), [1, 1], [1, 1]))

    def test_close_eigenvalues(self):
        with pytest.raises(NonSimpleEigenvalue):
            to_pole_residue(StateSpaceROM(np.diag([-1.0, -1.0 - 1e-9]), [1, 1], [1, 1]))

    def test_defective(self):
        # a Jordan block also has a repeated eigenvalue; both errors are acceptable
        with pytest.raises((DefectiveMatrix, NonSimpleEigenvalue)):
            to_pole_residue(StateSpaceROM([[-1.0, 1.0], [0.0, -1.0]], [1, 1], [1, 1]))


class TestTransferFunction:
    def test_real_pole(self):
        prom = PoleResidueROM(np.zeros((0, 4)), [[-3.0, 2.0]])
        assert transfer_function(prom, 0.0) == pytest.approx(2 / 3)

    def test_pair(self):
        prom = PoleResidueROM([[-1.0, 1.0, 1.0, 0.0]], np.zeros((0, 2)))
        assert transfer_function(prom, 0.0) == pytest.approx(0.5)

    def test_vectorized(self, rng):
        prom = random_prom(rng, 3, 4)
        s = 1j * np.array([0.5, 3.0, 40.0])
        np.testing.assert_allclose(transfer_function(prom, s), [transfer_function(prom, x) for x in s])

    def test_real_axis_is_real(self, rng):
        prom = random_prom(rng, 4, 3)
        for x in rng.uniform(1, 20, 5):
            assert abs(transfer_function(prom, x).imag) < 1e-14 * abs(transfer_function(prom, x))

    def test_at_pole(self):
        prom = PoleResidueROM([[-1.0, 2.0, 1.0, 0.0]], [[-3.0, 2.0]])
        with pytest.raises(PoleEvaluation):
            transfer_function(prom, -3.0)
        with pytest.raises(PoleEvaluation):
            transfer_function(prom, -1 + 2j)
        with pytest.raises(ZeroDivisionError):
            transfer_function(prom, -1 - 2j)

    def test_state_space(self):
        assert state_space_transfer(StateSpaceROM([[-3.0]], [1], [2]), 0) == pytest.approx(2 / 3)
        diag = StateSpaceROM(np.diag([-1.0, -2.0]), [1, 1], [1, 1])
        assert state_space_transfer(diag, 1.0) == pytest.approx(5 / 6)

    def test_state_space_singular(self):
        with pytest.raises(SingularSystem):
            state_space_transfer(StateSpaceROM([[-3.0]], [1], [2]), -3.0)

    def test_agreement_at_random_points(self, rng):
        rom = random_stable_system(rng, 10)
        prom = to_pole_residue(rom)
        s = rng.standard_normal(10) + 1j * rng.uniform(-30, 30, 10)
        for x in s:
            ref = state_space_transfer(rom, x)
            assert abs(transfer_function(prom, x) - ref) <= 1e-10 * abs(ref)


class TestCanonicalize:
    def test_sorts_by_b(self):
        prom = PoleResidueROM([[-2.0, 20.0, 1.0, 0.0], [-1.0, 10.0, 2.0, 0.0]], np.zeros((0, 2)))
        np.testing.assert_array_equal(canonicalize(prom).D[:, :2], [[-1.0, 10.0], [-2.0, 20.0]])

    def test_ties_by_a(self):
        prom = PoleResidueROM([[-1.0, 10.0, 1.0, 0.0], [-2.0, 10.0, 2.0, 0.0]], [[2.0, 1.0], [-4.0, 3.0]])
        out = canonicalize(prom)
        np.testing.assert_array_equal(out.D[:, 0], [-2.0, -1.0])
        np.testing.assert_array_equal(out.S[:, 0], [-4.0, 2.0])


class TestWeights:
    def test_expansions(self):
        w = Weights(2.0, 3.0)
        np.testing.assert_array_equal(w.d, [2, 2, 3, 3])
        np.testing.assert_array_equal(w.s, [2, 3])

    def test_invalid(self):
        with pytest.raises(ValueError):
            Weights(0.0, 0.0)
        with pytest.raises(ValueError):
            Weights(-1.0, 1.0)


# -- properties ---------------------------------------------------------------

seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, k=st.integers(1, 20))
def test_round_trip_property(seed, k):
    rng = np.random.default_rng(seed)
    rom = random_stable_system(rng, k)
    prom = to_pole_residue(rom)
    assert prom.order == k
    s = rng.uniform(-2, 2, 20) + 1j * rng.uniform(-50, 50, 20)
    ref = np.array([state_space_transfer(rom, x) for x in s])
    got = transfer_function(prom, s)
    assert np.all(np.abs(got - ref) < 1e-8 * np.abs(ref))


@settings(max_examples=50, deadline=None)
@given(seed=seeds, n_d=st.integers(0, 5), n_s=st.integers(1, 5))
def test_canonicalize_idempotent_and_invariant(seed, n_d, n_s):
    rng = np.random.default_rng(seed)
    prom = random_prom(rng, n_d, n_s)
    once = canonicalize(prom)
    assert canonicalize(once) == once
    s = 1j * rng.uniform(0.1, 100, 5)
    np.testing.assert_allclose(transfer_function(once, s), transfer_function(prom, s), rtol=1e-12)


@settings(max_examples=50, deadline=None)
@given(seed=seeds, n_d=st.integers(0, 5), n_s=st.integers(1, 5))
def test_conjugate_symmetry(seed, n_d, n_s):
    rng = np.random.default_rng(seed)
    prom = random_prom(rng, n_d, n_s)
    s = rng.uniform(-1, 1, 5) + 1j * rng.uniform(0.1, 100, 5)
    np.testing.assert_allclose(transfer_function(prom, s.conj()), transfer_function(prom, s).conj(), rtol=1e-12)
