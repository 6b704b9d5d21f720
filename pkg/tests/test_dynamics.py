import numpy as np
import pytest

from conftest import random_density, random_pure
from quditchain.basis import (SpinQuantum, bloch_from_rho, hermitian_basis,
                              structure_constants)
from quditchain.dynamics import (TimeGrid, bloch_component_fn, default_n_steps,
                                 exact_trajectory, integrate_bloch,
                                 integrate_lvn, maximally_entangled_state,
                                 resonance_propagate, resonance_trajectory)
from quditchain.linalg import frobenius_distance, unitary_exp
from quditchain.measures import measure_series, negativity
from quditchain.model import (AnisotropySpec, ChainSpec, FieldSpec,
                              PiecewiseConstantField, SiteSpec,
                              chain_hamiltonian_fn, gauge_matrix,
                              spin_matrices)

SPIN1 = SpinQuantum.from_s(1)


class TestTimeGrid:
    def test_plain_nodes(self):
        g = TimeGrid(0.0, 1.0, 4)
        assert np.allclose(g.nodes(), [0, 0.25, 0.5, 0.75, 1.0])

    def test_breakpoints_become_nodes(self):
        g = TimeGrid(0.0, 1.0, 4, breakpoints=(0.3,))
        nodes = g.nodes()
        assert 0.3 in nodes
        assert nodes[0] == 0.0 and nodes[-1] == 1.0

    def test_validation(self):
        with pytest.raises(ValueError):
            TimeGrid(1.0, 0.0, 10)
        with pytest.raises(ValueError):
            TimeGrid(0.0, 1.0, 10, breakpoints=(2.0,))


class TestIntegrateLvn:
    def test_zero_hamiltonian_is_static(self, rng):
        rho0 = random_density(rng, (3,))
        traj = integrate_lvn(lambda t: np.zeros((3, 3)), rho0,
                             TimeGrid(0.0, 5.0, 500), store_stride=50)
        for state in traj.states:
            assert np.abs(state.data - rho0.data).max() < 1e-14

    def test_purity_conserved(self, rng):
        fld = FieldSpec(omega0=1.0, omega1=0.6, omega=1.0, k=0.4)
        chain = ChainSpec.uniform(2, SPIN1, fld, None, J=0.1)
        rho0 = maximally_entangled_state(3, 2)
        traj = integrate_lvn(chain_hamiltonian_fn(chain)[0], rho0,
                             TimeGrid(0.0, 20.0, 8000), store_stride=400)
        for state in traj.states:
            assert abs(state.purity() - 1.0) < 1e-8
        assert traj.diagnostics.trace_drift_per_unit_time < 1e-9

    def test_single_qutrit_matches_gauge_solution(self, rng):
        # circular drive at resonance against the exact gauge-frame answer
        fld = FieldSpec(omega0=1.0, omega1=1.0, omega=1.0, k=0.0)
        chain = ChainSpec.uniform(1, SPIN1, fld, None, J=0.0)
        rho0 = random_density(rng, (3,))
        traj = integrate_lvn(chain_hamiltonian_fn(chain)[0], rho0,
                             TimeGrid(0.0, 50.0, 10000), store_stride=10000)
        exact = resonance_propagate(rho0, chain, 50.0)
        assert frobenius_distance(traj.states[-1].data, exact.data) < 1e-8

    def test_biqutrit_zero_field_matches_closed_form(self):
        from quditchain.closedform import eval_formula

        chain = ChainSpec.uniform(2, SPIN1, None, None, J=0.1)
        rho0 = maximally_entangled_state(3, 2)
        traj = integrate_lvn(chain_hamiltonian_fn(chain)[0], rho0,
                             TimeGrid(0.0, 20.0, 4000), store_stride=40)
        series = measure_series(traj, ["m_SM"])
        ref = eval_formula("biqutrit_mSM", 0.1, traj.times)
        assert np.abs(series.columns["m_SM"] - ref).max() < 1e-6

    def test_large_step_is_reported(self, rng):
        fld = FieldSpec(omega0=40.0, omega1=40.0, omega=40.0, k=0.0)
        chain = ChainSpec.uniform(1, SPIN1, fld, None, J=0.0)
        rho0 = random_pure(rng, (3,))
        with pytest.warns(UserWarning, match="step size"):
            traj = integrate_lvn(chain_hamiltonian_fn(chain)[0], rho0,
                                 TimeGrid(0.0, 10.0, 12), store_stride=1)
        assert not traj.diagnostics.step_ok

    def test_breakpoint_stepping_keeps_accuracy(self):
        # pulsed field: RK4 must not straddle the jumps
        pulse = PiecewiseConstantField((1.0,), ((0, 0, 2.0), (0, 0, 0.0)))
        chain = ChainSpec(
            (SiteSpec(SPIN1, pulse), SiteSpec(SPIN1, pulse.negated())), J=0.1)
        rho0 = maximally_entangled_state(3, 2)
        grid = TimeGrid(0.0, 2.0, 800, breakpoints=(1.0,))
        traj = integrate_lvn(chain_hamiltonian_fn(chain)[0], rho0, grid,
                             store_stride=800)
        s1, _, s3 = spin_matrices(SPIN1)
        eye = np.eye(3)
        h_on = 2.0 * (np.kron(s3, eye) - np.kron(eye, s3)) \
            + 0.1 * _exchange33()
        h_off = 0.1 * _exchange33()
        u = unitary_exp(h_off, 1.0) @ unitary_exp(h_on, 1.0)
        expect = u @ rho0.data @ u.conj().T
        assert frobenius_distance(traj.states[-1].data, expect) < 1e-9


def _exchange33():
    from quditchain.model import exchange_operator
    return exchange_operator((3, 3))


class TestIntegrateBloch:
    def test_zero_field_is_static(self, rng):
        b = hermitian_basis(SPIN1)
        e = structure_constants(b)
        r0 = bloch_from_rho(random_density(rng, (3,)), b)
        traj = integrate_bloch(lambda t: np.zeros(8), r0, e,
                               TimeGrid(0.0, 5.0, 500), store_stride=100)
        for state in traj.states:
            assert np.abs(state.r - r0.r).max() < 1e-14

    def test_matches_lvn_constant_field(self, rng):
        b = hermitian_basis(SPIN1)
        e = structure_constants(b)
        fld = PiecewiseConstantField((), ((0.0, 0.0, 0.9),))
        aniso = AnisotropySpec(q=0.2, d=0.1)
        chain = ChainSpec.uniform(1, SPIN1, fld, aniso, J=0.0)
        rho0 = random_density(rng, (3,))
        grid = TimeGrid(0.0, 10.0, 2000)
        traj_m = integrate_lvn(chain_hamiltonian_fn(chain)[0], rho0, grid,
                               store_stride=100)
        traj_b = integrate_bloch(bloch_component_fn(fld, aniso, b),
                                 bloch_from_rho(rho0, b), e, grid,
                                 store_stride=100)
        for sm, sb in zip(traj_m.states, traj_b.states):
            assert np.abs(bloch_from_rho(sm, b).r - sb.r).max() < 1e-9

    def test_matches_lvn_consistent_field(self, rng):
        b = hermitian_basis(SPIN1)
        e = structure_constants(b)
        fld = FieldSpec(omega0=1.0, omega1=0.8, omega=1.0, k=0.5)
        chain = ChainSpec.uniform(1, SPIN1, fld, None, J=0.0)
        rho0 = random_density(rng, (3,))
        grid = TimeGrid(0.0, 20.0, 8000)
        traj_m = integrate_lvn(chain_hamiltonian_fn(chain)[0], rho0, grid,
                               store_stride=200)
        traj_b = integrate_bloch(bloch_component_fn(fld, AnisotropySpec(), b),
                                 bloch_from_rho(rho0, b), e, grid,
                                 store_stride=200)
        for sm, sb in zip(traj_m.states, traj_b.states):
            assert np.abs(bloch_from_rho(sm, b).r - sb.r).max() < 1e-8


class TestResonancePropagate:
    def test_initial_time(self, rng):
        fld = FieldSpec(omega0=1.0, omega1=0.5, omega=1.0, k=0.6)
        chain = ChainSpec.uniform(2, SPIN1, fld, None, J=0.1)
        rho0 = random_density(rng, (3, 3))
        out = resonance_propagate(rho0, chain, 0.0)
        assert np.abs(out.data - rho0.data).max() < 1e-12

    def test_spectrum_preserved(self, rng):
        fld = FieldSpec(omega0=1.0, omega1=0.5, omega=1.0, k=0.6)
        chain = ChainSpec.uniform(2, SPIN1, fld, None, J=0.1)
        rho0 = random_density(rng, (3, 3))
        out = resonance_propagate(rho0, chain, 7.3)
        w0 = np.sort(np.linalg.eigvalsh(rho0.data))
        w1 = np.sort(np.linalg.eigvalsh(out.data))
        assert np.abs(w0 - w1).max() < 1e-10

    def test_negativity_eigenvalues_match_closed_form(self):
        from quditchain.basis import partial_transpose

        J = 0.1
        fld = FieldSpec(omega0=1.0, omega1=1.0, omega=1.0, k=0.9)
        chain = ChainSpec.uniform(2, SPIN1, fld, None, J=J)
        rho0 = maximally_entangled_state(3, 2)
        for t in (0.0, 4.0, 11.5):
            state = resonance_propagate(rho0, chain, t)
            w = np.linalg.eigvalsh(partial_transpose(state, 0))
            neg = np.sort(w[w < -1e-12])
            th = 3 * J * t
            e12 = -np.sqrt(69 + 28 * np.cos(th) - 16 * np.cos(2 * th)) / 27
            e3 = -(5 + 4 * np.cos(th)) / 27
            assert np.abs(neg - np.sort([e12, e12, e3])).max() < 1e-10

    def test_off_resonance_with_modulation_rejected(self):
        fld = FieldSpec(omega0=1.3, omega1=0.5, omega=1.0, k=0.5)
        chain = ChainSpec.uniform(2, SPIN1, fld, None, J=0.1)
        with pytest.raises(ValueError, match="off resonance"):
            resonance_propagate(maximally_entangled_state(3, 2), chain, 1.0)

    def test_off_resonance_circular_accepted(self, rng):
        fld = FieldSpec(omega0=1.3, omega1=0.5, omega=1.0, k=0.0)
        chain = ChainSpec.uniform(2, SPIN1, fld, None, J=0.1)
        rho0 = maximally_entangled_state(3, 2)
        out = resonance_propagate(rho0, chain, 3.0)
        # cross-validate against direct integration
        traj = integrate_lvn(chain_hamiltonian_fn(chain)[0], rho0,
                             TimeGrid(0.0, 3.0, 3000), store_stride=3000)
        assert frobenius_distance(traj.states[-1].data, out.data) < 1e-8

    def test_mixed_state_path(self, rng):
        fld = FieldSpec(omega0=1.0, omega1=0.5, omega=1.0, k=0.6)
        chain = ChainSpec.uniform(2, SPIN1, fld, None, J=0.1)
        rho0 = random_density(rng, (3, 3))  # full rank
        traj = integrate_lvn(chain_hamiltonian_fn(chain)[0], rho0,
                             TimeGrid(0.0, 5.0, 5000), store_stride=5000)
        out = resonance_propagate(rho0, chain, 5.0)
        assert frobenius_distance(traj.states[-1].data, out.data) < 1e-8


class TestMaximallyEntangled:
    def test_qutrit_pair(self):
        rho = maximally_entangled_state(3, 2)
        assert rho.purity() == pytest.approx(1.0, abs=1e-14)
        from quditchain.basis import partial_trace
        red = partial_trace(rho, 0)
        assert np.abs(red.data - np.eye(3) / 3).max() < 1e-14

    def test_quartit_negativity(self):
        assert negativity(maximally_entangled_state(4, 2)) == pytest.approx(
            1.5, abs=1e-12)

    def test_swap_invariance_four_sites(self):
        rho = maximally_entangled_state(3, 4)
        d = 3
        perm = np.arange(81).reshape(d, d, d, d)
        for axes in ((1, 0, 2, 3), (0, 2, 1, 3), (3, 1, 2, 0)):
            p = perm.transpose(axes).reshape(-1)
            assert np.abs(rho.data[np.ix_(p, p)] - rho.data).max() < 1e-14

    def test_unsupported_dimension(self):
        with pytest.raises(ValueError):
            maximally_entangled_state(2, 2)
        with pytest.raises(ValueError):
            maximally_entangled_state(3, 1)


class TestTrajectoryProperties:
    def test_correlation_symmetry_preserved(self):
        # symmetric initial state + symmetric Hamiltonian keeps R_ab = R_ba
        b = hermitian_basis(SPIN1)
        fld = FieldSpec(omega0=1.0, omega1=0.7, omega=1.0, k=0.5)
        chain = ChainSpec.uniform(2, SPIN1, fld, None, J=0.1)
        rho0 = maximally_entangled_state(3, 2)
        traj = resonance_trajectory(rho0, chain, np.linspace(0, 30, 31))
        for state in traj.states:
            R = bloch_from_rho(state, b).r.reshape(9, 9)
            assert np.abs(R - R.T).max() < 1e-9

    def test_measures_even_in_exchange_sign(self):
        times = np.linspace(0, 40, 81)
        rho0 = maximally_entangled_state(3, 2)
        cols = {}
        for J in (0.1, -0.1):
            chain = ChainSpec.uniform(2, SPIN1, None, None, J=J)
            traj = exact_trajectory(rho0, chain, times)
            cols[J] = measure_series(traj, ["m_VW", "m_SM", "eta_2", "m_I"])
        for name in ("m_VW", "m_SM", "eta_2", "m_I"):
            assert np.abs(cols[0.1].columns[name]
                          - cols[-0.1].columns[name]).max() < 1e-8


def test_default_n_steps_scales_with_frequencies():
    chain_slow = ChainSpec.uniform(2, SPIN1, None, None, J=0.1)
    fld = FieldSpec(omega0=2.0, omega1=2.0, omega=2.0, k=0.0)
    chain_fast = ChainSpec.uniform(2, SPIN1, fld, None, J=0.1)
    assert default_n_steps(chain_fast, 0, 100) > default_n_steps(chain_slow, 0, 100)
