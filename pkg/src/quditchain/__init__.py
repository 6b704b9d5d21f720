"""Qudit chain dynamics and entanglement in elliptically modulated fields."""

from .basis import (BlochState, DensityMatrix, OperatorBasis, SpinQuantum,
                    StructureConstants, bloch_from_rho, hermitian_basis, kron,
                    partial_trace, partial_transpose, rho_from_bloch,
                    spin_matrices, structure_constants)
from .closedform import eval_formula, reduced_eigenvalues
from .dynamics import (TimeGrid, Trajectory, default_n_steps, exact_trajectory,
                       integrate_bloch, integrate_lvn,
                       maximally_entangled_state, resonance_propagate,
                       resonance_trajectory)
from .elliptic import complete_k, jacobi_am, jacobi_sn_cn_dn
from .linalg import (EigenDecomposition, frobenius_distance, hermitian_eig,
                     spectra_match, unitary_exp)
from .measures import (MeasureSeries, i_concurrence, mean_entropy,
                       measure_series, negativity, schlienz_mahler,
                       state_distance)
from .model import (AnisotropySpec, ChainSpec, FieldSpec,
                    PiecewiseConstantField, SiteSpec, chain_hamiltonian,
                    chain_hamiltonian_fn, consistent_field, constant_hamiltonian,
                    gauge_matrix, pair_hamiltonian, site_hamiltonian,
                    transformed_chain_hamiltonian, transformed_pair_hamiltonian)

__version__ = "0.1.0"
