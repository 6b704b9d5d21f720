import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density, random_pure
from quditchain.basis import (BlochState, DensityMatrix, OperatorBasis,
                              SpinQuantum, bloch_from_rho, hermitian_basis,
                              kron, partial_trace, partial_transpose,
                              rho_from_bloch, spin_matrices,
                              structure_constants)
from quditchain.dynamics import maximally_entangled_state

SPINS = [SpinQuantum.from_s(1), SpinQuantum.from_s(1.5), SpinQuantum.from_s(2)]


class TestSpinQuantum:
    def test_dim(self):
        assert SpinQuantum.from_s(1).dim == 3
        assert SpinQuantum.from_s(1.5).dim == 4
        assert SpinQuantum.from_dim(5).s == 2.0

    def test_rejects_bad_spin(self):
        with pytest.raises(ValueError):
            SpinQuantum.from_s(0.7)
        with pytest.raises(ValueError):
            SpinQuantum(0)


class TestSpinMatrices:
    def test_s3_diagonal_spin1(self):
        _, _, s3 = spin_matrices(SpinQuantum.from_s(1))
        assert np.allclose(np.diag(s3), [1, 0, -1])

    @pytest.mark.parametrize("s", SPINS)
    def test_su2_algebra(self, s):
        s1, s2, s3 = spin_matrices(s)
        assert np.abs(s1 @ s2 - s2 @ s1 - 1j * s3).max() < 1e-14
        assert np.abs(s2 @ s3 - s3 @ s2 - 1j * s1).max() < 1e-14

    def test_trace_s1_squared_spin32(self):
        s1, _, _ = spin_matrices(SpinQuantum.from_s(1.5))
        assert np.trace(s1 @ s1).real == pytest.approx(5.0, abs=1e-13)

    @pytest.mark.parametrize("s", SPINS)
    def test_ladder_elements(self, s):
        s1, s2, _ = spin_matrices(s)
        sp = s1 + 1j * s2
        m = s.s - np.arange(s.dim)
        for j in range(s.dim - 1):
            expect = np.sqrt(s.s * (s.s + 1) - m[j + 1] * (m[j + 1] + 1))
            assert sp[j, j + 1] == pytest.approx(expect, abs=1e-14)


class TestHermitianBasis:
    @pytest.mark.parametrize("s", SPINS)
    def test_invariants(self, s):
        b = hermitian_basis(s)
        assert len(b.elements) == s.dim ** 2
        b.validate(tol=1e-12)

    def test_identity_element_qutrit(self):
        b = hermitian_basis(SpinQuantum.from_s(1))
        assert np.abs(b.elements[0] - np.sqrt(b.norm_const / 3) * np.eye(3)).max() < 1e-15

    @pytest.mark.parametrize("s", SPINS)
    def test_first_three_are_spin_matrices(self, s):
        b = hermitian_basis(s)
        for got, want in zip(b.elements[1:4], spin_matrices(s)):
            assert np.array_equal(got, want)

    def test_pentit_count(self):
        b = hermitian_basis(SpinQuantum.from_s(2))
        assert len(b.elements) == 25
        gram = np.einsum("xab,yba->xy", b.stack, b.stack)
        off = gram - np.diag(np.diag(gram))
        assert np.abs(off).max() < 1e-12

    def test_validate_catches_tampering(self):
        b = hermitian_basis(SpinQuantum.from_s(1))
        broken = OperatorBasis(dim=3, elements=b.elements[:-1] + (b.elements[1],),
                               norm_const=b.norm_const)
        with pytest.raises(ValueError):
            broken.validate()


class TestStructureConstants:
    def test_antisymmetry_exact(self):
        e = structure_constants(hermitian_basis(SpinQuantum.from_s(1)))
        assert np.array_equal(e.tensor, -e.tensor.transpose(1, 0, 2))
        assert e.tensor[0, 0, 1] == 0.0  # e_112

    def test_reconstructs_all_qutrit_commutators(self):
        b = hermitian_basis(SpinQuantum.from_s(1))
        e = structure_constants(b)
        C = b.stack[1:]
        count = 0
        for i in range(8):
            for j in range(i + 1, 8):
                direct = C[i] @ C[j] - C[j] @ C[i]
                rebuilt = 1j * np.einsum("l,lab->ab", e.tensor[i, j], C)
                assert np.abs(direct - rebuilt).max() < 1e-10
                count += 1
        assert count == 28

    def test_e123_reproduces_commutator(self):
        b = hermitian_basis(SpinQuantum.from_s(1))
        e = structure_constants(b)
        C = b.stack[1:]
        rebuilt = 1j * np.einsum("l,lab->ab", e.tensor[0, 1], C)
        assert np.abs((C[0] @ C[1] - C[1] @ C[0]) - rebuilt).max() < 1e-10
        assert e.tensor[0, 1, 2] == pytest.approx(1.0, abs=1e-12)

    def test_non_hermitian_basis_rejected(self):
        b = hermitian_basis(SpinQuantum.from_s(1))
        bad = np.array(b.elements[4])
        bad[0, 1] += 0.05  # Hermiticity broken -> complex structure constants
        tampered = OperatorBasis(dim=3,
                                 elements=b.elements[:4] + (bad,) + b.elements[5:],
                                 norm_const=b.norm_const)
        with pytest.raises(ValueError, match="not closed"):
            structure_constants(tampered)

    @pytest.mark.parametrize("s", SPINS)
    def test_reconstruction_all_spins(self, s, rng):
        b = hermitian_basis(s)
        e = structure_constants(b)
        C = b.stack[1:]
        n = s.dim ** 2 - 1
        for _ in range(10):
            i, j = rng.integers(0, n, size=2)
            direct = C[i] @ C[j] - C[j] @ C[i]
            rebuilt = 1j * np.einsum("l,lab->ab", e.tensor[i, j], C)
            assert np.abs(direct - rebuilt).max() < 1e-10


class TestKron:
    def test_identities(self):
        assert np.array_equal(kron(np.eye(3), np.eye(3)), np.eye(9))

    def test_mixed_product(self):
        _, _, s3 = spin_matrices(SpinQuantum.from_s(1))
        left = kron(s3, np.eye(3)) @ kron(np.eye(3), s3)
        assert np.abs(left - kron(s3, s3)).max() < 1e-15

    def test_associativity(self, rng):
        a, b, c = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
                   for _ in range(3))
        assert np.abs(kron(kron(a, b), c) - kron(a, kron(b, c))).max() < 1e-13


class TestPartialTrace:
    def test_product_state_recovery(self, rng):
        for _ in range(100):
            ra = random_density(rng, (3,))
            rb = random_density(rng, (3,))
            joint = DensityMatrix(kron(ra.data, rb.data), (3, 3))
            assert np.abs(partial_trace(joint, 0).data - ra.data).max() < 1e-13
            assert np.abs(partial_trace(joint, 1).data - rb.data).max() < 1e-13

    def test_maximally_entangled_reduction(self):
        rho = maximally_entangled_state(3, 2)
        red = partial_trace(rho, 0)
        assert np.abs(red.data - np.eye(3) / 3).max() < 1e-14

    def test_three_site_reduction(self, rng):
        rho = random_pure(rng, (3, 3, 3))
        for keep in range(3):
            red = partial_trace(rho, keep)
            assert abs(np.trace(red.data) - 1) < 1e-12
            assert np.abs(red.data - red.data.conj().T).max() < 1e-12

    def test_invalid_site(self, rng):
        rho = random_density(rng, (3, 3))
        with pytest.raises(ValueError):
            partial_trace(rho, 2)


class TestPartialTranspose:
    def test_product_state_stays_positive(self, rng):
        ra = random_density(rng, (3,))
        rb = random_density(rng, (3,))
        joint = DensityMatrix(kron(ra.data, rb.data), (3, 3))
        pt = partial_transpose(joint, 0)
        w = np.linalg.eigvalsh(pt)
        assert w.min() > -1e-12
        ref = np.sort(np.linalg.eigvalsh(joint.data))
        assert np.abs(np.sort(w) - ref).max() < 1e-12

    def test_maxent_minimum_eigenvalue(self):
        rho = maximally_entangled_state(3, 2)
        w = np.linalg.eigvalsh(partial_transpose(rho, 0))
        assert w.min() == pytest.approx(-1 / 3, abs=1e-12)

    def test_involution(self, rng):
        rho = random_density(rng, (3, 3))
        twice = partial_transpose(
            DensityMatrix(partial_transpose(rho, 1), (3, 3)), 1)
        assert np.abs(twice - rho.data).max() < 1e-15

    def test_preserves_trace_and_hermiticity(self, rng):
        for dims in [(3, 3), (4, 4), (3, 4)]:
            rho = random_density(rng, dims)
            pt = partial_transpose(rho, 0)
            assert abs(np.trace(pt) - 1) < 1e-12
            assert np.abs(pt - pt.conj().T).max() < 1e-12

    def test_rejects_wrong_site_count(self, rng):
        with pytest.raises(ValueError):
            partial_transpose(random_density(rng, (3, 3, 3)), 0)
        with pytest.raises(ValueError):
            partial_transpose(random_density(rng, (3, 3)), 2)


class TestBloch:
    def test_maximally_mixed(self):
        b = hermitian_basis(SpinQuantum.from_s(1))
        r = bloch_from_rho(DensityMatrix(np.eye(3) / 3, (3,)), b)
        expect = np.zeros(9)
        expect[0] = 1.0
        assert np.abs(r.r - expect).max() < 1e-14

    @pytest.mark.parametrize("s", SPINS)
    def test_single_site_round_trip(self, s, rng):
        b = hermitian_basis(s)
        for _ in range(20):
            rho = random_density(rng, (s.dim,))
            r = bloch_from_rho(rho, b)
            assert r.r[0] == pytest.approx(1.0, abs=1e-12)
            back = rho_from_bloch(r, b)
            assert np.abs(back.data - rho.data).max() < 1e-12

    @pytest.mark.parametrize("s", SPINS)
    def test_composite_round_trip(self, s, rng):
        b = hermitian_basis(s)
        rho = random_density(rng, (s.dim, s.dim))
        r = bloch_from_rho(rho, b)
        assert r.r[0] == pytest.approx(1.0, abs=1e-12)
        back = rho_from_bloch(r, b)
        assert np.abs(back.data - rho.data).max() < 1e-12

    def test_composite_symmetry_of_maxent(self):
        b = hermitian_basis(SpinQuantum.from_s(1))
        R = bloch_from_rho(maximally_entangled_state(3, 2), b).r.reshape(9, 9)
        assert np.abs(R - R.T).max() < 1e-12

    def test_dimension_mismatch(self, rng):
        b = hermitian_basis(SpinQuantum.from_s(1))
        with pytest.raises(ValueError):
            bloch_from_rho(random_density(rng, (4,)), b)
        with pytest.raises(ValueError):
            rho_from_bloch(BlochState(dim=4, r=np.zeros(16)), b)

    @given(seed=st.integers(0, 2**32 - 1), d=st.sampled_from([3, 4, 5]))
    @settings(max_examples=30, deadline=None)
    def test_round_trip_property(self, seed, d):
        rng = np.random.default_rng(seed)
        b = hermitian_basis(SpinQuantum.from_dim(d))
        rho = random_density(rng, (d,))
        back = rho_from_bloch(bloch_from_rho(rho, b), b)
        assert np.abs(back.data - rho.data).max() < 1e-12


class TestDensityMatrix:
    def test_check_physical_passes(self, rng):
        random_density(rng, (3, 3)).check_physical()

    def test_check_physical_flags_bad_trace(self):
        with pytest.raises(ValueError, match="trace"):
            DensityMatrix(np.eye(3), (3,)).check_physical()

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.eye(4), (3,))
