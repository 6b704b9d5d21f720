"""Entanglement measures and the trace-distance diagnostic.

negativity       m_VW   sum of |negative eigenvalues| of the partial transpose
schlienz_mahler  m_SM   norm of the correlation tensor R_ij - R_i0 R_0j
mean_entropy     eta_N  site-averaged reduced von Neumann entropy, log base d
i_concurrence    m_I    sqrt(d/(d-1)) sqrt(1 - Tr rho_1^2)

m_SM carries a per-dimension calibration constant that pins the maximally
entangled score to exactly 1; with the Bloch scaling used here it comes out
as 1 to machine precision, but it is computed, not assumed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .basis import (DensityMatrix, OperatorBasis, SpinQuantum, bloch_from_rho,
                    hermitian_basis, partial_trace, partial_transpose)
from .dynamics import Trajectory, maximally_entangled_state
from .linalg import frobenius_distance

__all__ = [
    "MeasureSeries",
    "negativity",
    "schlienz_mahler",
    "mean_entropy",
    "i_concurrence",
    "state_distance",
    "measure_series",
    "measure_series_from_states",
    "canonical_measure_name",
]

NEGATIVE_EIG_CUTOFF = -1e-12


def negativity(rho: DensityMatrix) -> float:
    """Sum of |negative eigenvalues| of the partially transposed state.

    Zero for separable states; the maximally entangled d x d pair scores
    (d-1)/2, i.e. 1 for qutrits, 1.5 for quartits, 2 for pentits.
    """
    pt = partial_transpose(rho, 0)
    w = np.linalg.eigvalsh((pt + pt.conj().T) / 2)
    neg = w[w < NEGATIVE_EIG_CUTOFF]
    return float(-neg.sum())


@lru_cache(maxsize=None)
def _sm_calibration(d: int) -> float:
    """kappa fixing schlienz_mahler(maximally entangled) = 1 exactly."""
    rho = maximally_entangled_state(d, 2)
    raw = _sm_raw(rho, hermitian_basis(SpinQuantum.from_dim(d)))
    return 1.0 / (raw * raw)


def _sm_raw(rho: DensityMatrix, b: OperatorBasis) -> float:
    d = b.dim
    R = bloch_from_rho(rho, b).r.reshape(d * d, d * d)
    corr = R[1:, 1:] - np.outer(R[1:, 0], R[0, 1:])
    return float(np.sqrt((corr ** 2).sum() / (d * d - 1)))


def schlienz_mahler(rho: DensityMatrix, b: OperatorBasis | None = None) -> float:
    """Correlation-tensor measure: 0 for product states, 1 at maximal entanglement."""
    if rho.n_sites != 2 or rho.site_dims[0] != rho.site_dims[1]:
        raise ValueError("Schlienz-Mahler measure needs two equal-dimension sites")
    d = rho.site_dims[0]
    if b is None:
        b = hermitian_basis(SpinQuantum.from_dim(d))
    elif b.dim != d:
        raise ValueError(f"basis dim {b.dim} does not match site dim {d}")
    return float(np.sqrt(_sm_calibration(d)) * _sm_raw(rho, b))


def _entropy(eigs: np.ndarray, base: float) -> float:
    eigs = eigs[eigs > 1e-15]
    return float(-(eigs * np.log(eigs)).sum() / np.log(base))


def mean_entropy(rho: DensityMatrix, base: float | None = None) -> float:
    """Mean reduced von Neumann entropy over sites; 0 log 0 counts as 0.

    ``base`` defaults to the single-site dimension so a maximally entangled
    pair scores exactly 1.
    """
    if base is None:
        base = rho.site_dims[0]
    total = 0.0
    for i in range(rho.n_sites):
        red = partial_trace(rho, i)
        total += _entropy(np.linalg.eigvalsh(red.data), base)
    return total / rho.n_sites


def i_concurrence(rho: DensityMatrix) -> float:
    """sqrt(d/(d-1)) sqrt(1 - Tr rho_1^2) from the reduced-state purity."""
    if rho.n_sites != 2:
        raise ValueError("I-concurrence needs a two-site state")
    d = rho.site_dims[0]
    red = partial_trace(rho, 0)
    return float(np.sqrt(d / (d - 1)) * np.sqrt(max(0.0, 1.0 - red.purity())))


def state_distance(traj: Trajectory) -> np.ndarray:
    """Frobenius distance of every trajectory sample to the initial state."""
    if not traj.states:
        raise ValueError("empty trajectory")
    first = traj.states[0].data
    return np.array([frobenius_distance(s.data, first) for s in traj.states])


@dataclass
class MeasureSeries:
    """One column of values per measure along a common time grid."""

    times: np.ndarray
    columns: dict[str, np.ndarray]

    def check_ranges(self, slack: float = 1e-9, negativity_max: float | None = None):
        """Raise if any normalized measure leaves [0, 1] beyond ``slack``."""
        for name, col in self.columns.items():
            if col.min() < -slack:
                raise ValueError(f"{name} dips below 0: {col.min():.3e}")
            if name.startswith(("m_SM", "eta", "m_I")) and col.max() > 1 + slack:
                raise ValueError(f"{name} exceeds 1: {col.max():.6f}")
            if name.startswith("m_VW") and negativity_max is not None \
                    and col.max() > negativity_max + slack:
                raise ValueError(f"{name} exceeds {negativity_max}: {col.max():.6f}")


def canonical_measure_name(name: str, n_sites: int) -> str:
    """Normalize user-facing measure names; 'eta' gains the site count."""
    name = name.strip()
    if name == "eta":
        return f"eta_{n_sites}"
    if name in ("m_VW", "m_SM", "m_I", "dist") or name.startswith("eta_"):
        return name
    raise ValueError(f"unknown measure {name!r}")


def measure_series_from_states(times, states, names,
                               b: OperatorBasis | None = None) -> MeasureSeries:
    """Evaluate measures over an iterable of states, one state in memory at a time."""
    times = np.asarray(times, dtype=float)
    state_iter = iter(states)
    try:
        first = next(state_iter)
    except StopIteration:
        raise ValueError("empty trajectory") from None
    if not isinstance(first, DensityMatrix):
        raise ValueError("measure evaluation needs density-matrix states")
    n_sites = first.n_sites
    names = [canonical_measure_name(n, n_sites) for n in names]
    for name in names:
        if name.startswith("eta_") and name != f"eta_{n_sites}":
            raise ValueError(f"{name} requested for a {n_sites}-site state")
        if name in ("m_VW", "m_SM", "m_I") and n_sites != 2:
            raise ValueError(f"{name} is defined for two-site states")
    if b is None and "m_SM" in names:
        b = hermitian_basis(SpinQuantum.from_dim(first.site_dims[0]))

    columns = {name: np.empty(len(times)) for name in names}
    rho0_data = first.data if "dist" in names else None

    def fill(i, state):
        for name in names:
            if name == "m_VW":
                columns[name][i] = negativity(state)
            elif name == "m_SM":
                columns[name][i] = schlienz_mahler(state, b)
            elif name == "m_I":
                columns[name][i] = i_concurrence(state)
            elif name.startswith("eta_"):
                columns[name][i] = mean_entropy(state)
            elif name == "dist":
                columns[name][i] = frobenius_distance(state.data, rho0_data)

    fill(0, first)
    count = 1
    for state in state_iter:
        fill(count, state)
        count += 1
    if count != len(times):
        raise ValueError(f"got {count} states for {len(times)} times")
    return MeasureSeries(times=times, columns=columns)


def measure_series(traj: Trajectory, names, b: OperatorBasis | None = None) -> MeasureSeries:
    """Evaluate the requested measures along a density-matrix trajectory."""
    return measure_series_from_states(traj.times, traj.states, names, b)
