"""State evolution engines.

Three independent routes to rho(t):

* :func:`integrate_lvn` -- fixed-step RK4 on i d_t rho = [H(t), rho] for any
  time-dependent Hamiltonian, with breakpoint-aware stepping for pulsed
  fields.
* :func:`integrate_bloch` -- the same dynamics as a real first-order system
  on the Bloch components, d_t R_l = e_ijl h_i R_j.
* :func:`resonance_trajectory` -- exact propagation through the gauge frame
  where the consistent-field Hamiltonian has constant coefficients, one
  eigendecomposition per chain.

The engines are deliberately redundant: agreement between them is the main
correctness check of the package.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .basis import BlochState, DensityMatrix, OperatorBasis, StructureConstants
from .model import (ChainSpec, FieldSpec, chain_gauge, constant_hamiltonian,
                    site_hamiltonian, transformed_chain_hamiltonian,
                    _field_vector, _require_gauge_compatible)

__all__ = [
    "TimeGrid",
    "Trajectory",
    "IntegrationDiagnostics",
    "integrate_lvn",
    "integrate_bloch",
    "bloch_component_fn",
    "resonance_propagate",
    "resonance_trajectory",
    "resonance_state_iter",
    "exact_trajectory",
    "exact_state_iter",
    "maximally_entangled_state",
    "default_n_steps",
]

PURITY_JUMP_LIMIT = 1e-4


@dataclass(frozen=True)
class TimeGrid:
    """Uniform step grid on [t0, t1], refined so breakpoints are nodes."""

    t0: float
    t1: float
    n_steps: int
    breakpoints: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.t1 > self.t0:
            raise ValueError("need t1 > t0")
        if self.n_steps < 1:
            raise ValueError("need at least one step")
        if any(not self.t0 <= b <= self.t1 for b in self.breakpoints):
            raise ValueError("breakpoints must lie inside [t0, t1]")

    def nodes(self) -> np.ndarray:
        base = np.linspace(self.t0, self.t1, self.n_steps + 1)
        if not self.breakpoints:
            return base
        merged = np.union1d(base, np.asarray(self.breakpoints, dtype=float))
        # drop near-duplicates that differ only by rounding
        keep = np.concatenate(([True], np.diff(merged) > 1e-12 * (self.t1 - self.t0)))
        return merged[keep]


@dataclass
class IntegrationDiagnostics:
    """Numerical-quality record of one RK4 integration."""

    max_trace_drift: float = 0.0
    trace_drift_per_unit_time: float = 0.0
    max_purity_jump: float = 0.0
    step_ok: bool = True


@dataclass
class Trajectory:
    """Sampled states along an evolution; states are DensityMatrix or BlochState."""

    times: np.ndarray
    states: list
    diagnostics: IntegrationDiagnostics | None = None


def default_n_steps(chain: ChainSpec, t0: float, t1: float,
                    steps_per_period: int = 200) -> int:
    """Step count giving ~steps_per_period steps per shortest drive/exchange period.

    Piecewise-constant fields contribute through their largest magnitude,
    which sets the fastest Bohr frequency they can drive.
    """
    freqs = [abs(chain.J)]
    for site in chain.sites:
        if isinstance(site.field, FieldSpec):
            freqs += [abs(site.field.omega), abs(site.field.omega1),
                      abs(site.field.omega0)]
        elif site.field is not None:
            freqs += [float(np.linalg.norm(v)) for v in site.field.values]
    fmax = max([f for f in freqs if f > 0], default=1.0)
    return max(100, math.ceil((t1 - t0) * fmax * steps_per_period / (2 * math.pi)))


def _sample_targets(grid: TimeGrid, store_stride: int) -> np.ndarray:
    """Sample times: every ``store_stride``-th uniform step, endpoints included."""
    base = np.linspace(grid.t0, grid.t1, grid.n_steps + 1)
    targets = base[::store_stride]
    if targets[-1] != base[-1]:
        targets = np.append(targets, base[-1])
    return targets


def integrate_lvn(h_of_t, rho0: DensityMatrix, grid: TimeGrid,
                  store_stride: int = 10) -> Trajectory:
    """RK4 integration of i d_t rho = [H(t), rho].

    After every step the state is hermitized and trace-renormalized; the
    drift removed by that projection is recorded in the diagnostics, and a
    purity jump above 1e-4 in one step flags the step size as too large
    (reported via a warning and ``diagnostics.step_ok``).  Stage evaluations
    landing exactly on a field breakpoint use its left limit, so no step
    mixes field values across a discontinuity.
    """
    nodes = grid.nodes()
    span = grid.t1 - grid.t0
    bp = np.asarray(grid.breakpoints, dtype=float)
    targets = _sample_targets(grid, store_stride)

    def h_eval(t, at_node_end):
        if at_node_end and bp.size and np.any(np.abs(bp - t) <= 1e-12 * span):
            t = t - 1e-12 * span
        return np.asarray(h_of_t(t), dtype=complex)

    def rhs(ht, y):
        return -1j * (ht @ y - y @ ht)

    y = rho0.data.astype(complex)
    diags = IntegrationDiagnostics()
    times = [nodes[0]]
    samples = [y]
    ptr = 1
    purity = float(np.trace(y @ y).real)
    for i in range(len(nodes) - 1):
        ta, tb = nodes[i], nodes[i + 1]
        h = tb - ta
        hm = h_eval(ta + h / 2, False)
        k1 = rhs(h_eval(ta, False), y)
        k2 = rhs(hm, y + (h / 2) * k1)
        k3 = rhs(hm, y + (h / 2) * k2)
        k4 = rhs(h_eval(tb, True), y + h * k3)
        y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)

        tr = float(np.trace(y).real)
        diags.max_trace_drift = max(diags.max_trace_drift, abs(tr - 1.0))
        y = (y + y.conj().T) / 2
        y = y / tr
        new_purity = float(np.trace(y @ y).real)
        diags.max_purity_jump = max(diags.max_purity_jump, abs(new_purity - purity))
        purity = new_purity

        if ptr < len(targets) and tb >= targets[ptr] - 1e-9 * span:
            times.append(tb)
            samples.append(y)
            ptr += 1

    # worst per-step drift scaled to one unit of time at the nominal step
    diags.trace_drift_per_unit_time = diags.max_trace_drift * (len(nodes) - 1) / span
    if diags.max_purity_jump > PURITY_JUMP_LIMIT:
        diags.step_ok = False
        warnings.warn(
            f"purity jumped by {diags.max_purity_jump:.2e} in one step; "
            "step size is too large for this Hamiltonian", stacklevel=2)

    states = [DensityMatrix(s, rho0.site_dims) for s in samples]
    return Trajectory(times=np.array(times), states=states, diagnostics=diags)


def bloch_component_fn(fld, aniso, b: OperatorBasis):
    """Map a site field + anisotropy to the Bloch drive components h_i(t).

    The components are extracted from the calibrated basis by projection,
    eta_i = Tr(H C_i)/c, not hardcoded: the linear-in-field part is built
    from the projections of S_1..S_3 and the anisotropy part from the
    projection of its (constant) Hamiltonian.
    """
    from .basis import SpinQuantum, spin_matrices

    s = SpinQuantum.from_dim(b.dim)
    C = b.stack[1:]
    c = b.norm_const
    spin_ops = spin_matrices(s)
    lin = np.array([np.einsum("ab,xba->x", op, C).real / c for op in spin_ops])
    static = site_hamiltonian(np.zeros(3), aniso, s)
    base = np.einsum("ab,xba->x", static, C).real / c

    def components(t: float) -> np.ndarray:
        h3 = _field_vector(fld, t)
        return base + h3 @ lin

    return components


def integrate_bloch(h_components, r0: BlochState, e: StructureConstants,
                    grid: TimeGrid, store_stride: int = 10) -> Trajectory:
    """RK4 on the real Bloch system d_t R_l = e_ijl h_i(t) R_j; R_0 stays 1."""
    if r0.r.shape != (e.dim * e.dim,):
        raise ValueError("Bloch state length does not match structure constants")
    nodes = grid.nodes()
    span = grid.t1 - grid.t0
    bp = np.asarray(grid.breakpoints, dtype=float)
    tensor = e.tensor

    def h_eval(t, at_node_end):
        if at_node_end and bp.size and np.any(np.abs(bp - t) <= 1e-12 * span):
            t = t - 1e-12 * span
        return np.asarray(h_components(t), dtype=float)

    def rhs(h, y):
        return np.einsum("ijl,i,j->l", tensor, h, y)

    y = r0.r[1:].astype(float)
    times = [nodes[0]]
    samples = [r0.r.copy()]
    targets = _sample_targets(grid, store_stride)
    ptr = 1
    for i in range(len(nodes) - 1):
        ta, tb = nodes[i], nodes[i + 1]
        h = tb - ta
        hm = h_eval(ta + h / 2, False)
        k1 = rhs(h_eval(ta, False), y)
        k2 = rhs(hm, y + (h / 2) * k1)
        k3 = rhs(hm, y + (h / 2) * k2)
        k4 = rhs(h_eval(tb, True), y + h * k3)
        y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if ptr < len(targets) and tb >= targets[ptr] - 1e-9 * span:
            times.append(tb)
            samples.append(np.concatenate(([1.0], y)))
            ptr += 1

    states = [BlochState(dim=e.dim, r=s) for s in samples]
    return Trajectory(times=np.array(times), states=states)


def maximally_entangled_state(d: int, n_sites: int) -> DensityMatrix:
    """GHZ-type state (1/sqrt(d)) sum_i |i>^(x N) as a rank-1 density matrix."""
    if d not in (3, 4, 5):
        raise ValueError(f"unsupported level count {d}; expected 3, 4 or 5")
    if n_sites < 2:
        raise ValueError("need at least two sites")
    total = d ** n_sites
    ket = np.zeros(total)
    ket[:: (total - 1) // (d - 1)] = 1.0 / np.sqrt(d)
    return DensityMatrix.from_ket(ket, (d,) * n_sites)


@lru_cache(maxsize=16)
def _resonance_system(chain: ChainSpec):
    """Constant gauge-frame Hamiltonian of a resonance-compatible chain."""
    omega, k = _require_gauge_compatible(chain)
    for site in chain.sites:
        if isinstance(site.field, FieldSpec):
            if site.field.detuning != 0.0 and k != 0.0:
                raise ValueError(
                    "off resonance with k != 0: no constant-coefficient reduction")
    ham = transformed_chain_hamiltonian(chain, 0.0)
    values, vectors = np.linalg.eigh(ham)
    return values, vectors


def _gauge_diag(chain: ChainSpec, t: float) -> np.ndarray:
    return np.diag(chain_gauge(chain, t))


def _spectral_state_iter(rho0: DensityMatrix, values, vectors, gauge_fn, times):
    """Yield exactly propagated states one at a time (memory-bounded).

    Rank-1 initial states take a pure-state fast path; the gauge, being
    diagonal, is applied as an elementwise row/column scaling.
    """
    if rho0.purity() >= 1.0 - 1e-10:
        _, v = np.linalg.eigh(rho0.data)
        w0 = vectors.conj().T @ v[:, -1]
        for t in times:
            psi = vectors @ (np.exp(-1j * values * t) * w0)
            if gauge_fn is not None:
                psi = gauge_fn(t).conj() * psi
            yield DensityMatrix(np.outer(psi, psi.conj()), rho0.site_dims)
    else:
        b = vectors.conj().T @ rho0.data @ vectors
        for t in times:
            phase = np.exp(-1j * values * t)
            m = vectors @ (np.outer(phase, phase.conj()) * b) @ vectors.conj().T
            if gauge_fn is not None:
                g = gauge_fn(t)
                m = (g.conj()[:, None] * m) * g[None, :]
            yield DensityMatrix(m, rho0.site_dims)


def resonance_state_iter(rho0: DensityMatrix, chain: ChainSpec, times):
    """Streaming form of :func:`resonance_trajectory`."""
    if rho0.site_dims != chain.dims:
        raise ValueError("state dimensions do not match the chain")
    values, vectors = _resonance_system(chain)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    return _spectral_state_iter(rho0, values, vectors,
                                lambda t: _gauge_diag(chain, t), times)


def resonance_trajectory(rho0: DensityMatrix, chain: ChainSpec,
                         times) -> Trajectory:
    """Exact evolution rho(t) = a(t)^-1 e^{-i H~ t} rho0 e^{i H~ t} a(t).

    One eigendecomposition of the constant gauge-frame Hamiltonian serves
    every requested time.  All states are materialized; for large chains
    with many samples prefer :func:`resonance_state_iter`.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    return Trajectory(times=times,
                      states=list(resonance_state_iter(rho0, chain, times)))


def resonance_propagate(rho0: DensityMatrix, chain: ChainSpec,
                        t: float) -> DensityMatrix:
    """Exact state at one time; see :func:`resonance_trajectory`."""
    return next(iter(resonance_state_iter(rho0, chain, [t])))


def exact_state_iter(rho0: DensityMatrix, chain: ChainSpec, times):
    """Streaming spectral propagation wherever an exact route exists.

    Uses plain e^{-iHt} when the chain Hamiltonian is time-independent
    (covers constant and anisotropic fields), otherwise the gauge-frame
    resonance propagator; raises if neither applies.
    """
    ham = constant_hamiltonian(chain)
    if ham is None:
        return resonance_state_iter(rho0, chain, times)
    if rho0.site_dims != chain.dims:
        raise ValueError("state dimensions do not match the chain")
    values, vectors = np.linalg.eigh(ham)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    return _spectral_state_iter(rho0, values, vectors, None, times)


def exact_trajectory(rho0: DensityMatrix, chain: ChainSpec, times) -> Trajectory:
    """Materialized form of :func:`exact_state_iter`."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    return Trajectory(times=times,
                      states=list(exact_state_iter(rho0, chain, times)))
