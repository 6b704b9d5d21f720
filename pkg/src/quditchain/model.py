"""Hamiltonian assembly: driven anisotropic sites, exchange-coupled chains,
and the gauge transformation that removes the drive's time dependence.

Conventions follow hbar = 1, Bohr magneton = 1: every field amplitude and
the exchange constant J are angular frequencies, time is 1/frequency.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from .basis import SpinQuantum, spin_matrices
from .elliptic import jacobi_am, jacobi_sn_cn_dn

__all__ = [
    "FieldSpec",
    "AnisotropySpec",
    "PiecewiseConstantField",
    "SiteSpec",
    "ChainSpec",
    "consistent_field",
    "site_hamiltonian",
    "pair_hamiltonian",
    "chain_hamiltonian",
    "chain_hamiltonian_fn",
    "constant_hamiltonian",
    "gauge_matrix",
    "chain_gauge",
    "transformed_pair_hamiltonian",
    "transformed_chain_hamiltonian",
    "exchange_operator",
    "MAX_CHAIN_DIM",
]

MAX_CHAIN_DIM = 1024


@dataclass(frozen=True)
class FieldSpec:
    """Elliptically modulated drive h(t) = (w1 cn, w1 sn, w0 dn)(w t | k).

    At k = 0 this is the circularly polarized field, at k = 1 an exponential
    pulse; the longitudinal amplitude modulates at twice the transverse
    frequency for every k in between.
    """

    omega0: float = 0.0
    omega1: float = 0.0
    omega: float = 0.0
    k: float = 0.0

    def __post_init__(self):
        for name in ("omega0", "omega1", "omega"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not 0.0 <= self.k <= 1.0:
            raise ValueError(f"modulus k must lie in [0, 1], got {self.k}")

    @property
    def detuning(self) -> float:
        """delta = omega0 - omega; zero at exact resonance."""
        return self.omega0 - self.omega


@dataclass(frozen=True)
class AnisotropySpec:
    """Axial (q) and rhombic (d) single-site anisotropy, frequency units."""

    q: float = 0.0
    d: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.q) and np.isfinite(self.d)):
            raise ValueError("anisotropy constants must be finite")

    @property
    def is_zero(self) -> bool:
        return self.q == 0.0 and self.d == 0.0


@dataclass(frozen=True)
class PiecewiseConstantField:
    """Step field: values[i] holds on [breakpoints[i-1], breakpoints[i]).

    Right-continuous at each breakpoint.  Used for the theta-pulse scenarios;
    the breakpoints are handed to the integrator so no step straddles one.
    """

    breakpoints: tuple[float, ...]
    values: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        if len(self.values) != len(self.breakpoints) + 1:
            raise ValueError("need exactly one more value than breakpoints")
        if any(b2 <= b1 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    def value_at(self, t: float) -> tuple[float, float, float]:
        return self.values[bisect.bisect_right(self.breakpoints, t)]

    def negated(self) -> "PiecewiseConstantField":
        return PiecewiseConstantField(
            self.breakpoints, tuple((-a, -b, -c) for a, b, c in self.values))


Field = FieldSpec | PiecewiseConstantField | None


@dataclass(frozen=True)
class SiteSpec:
    spin: SpinQuantum
    field: Field = None
    aniso: AnisotropySpec = dc_field(default_factory=AnisotropySpec)


@dataclass(frozen=True)
class ChainSpec:
    """N qudits with all-pairs isotropic exchange J and per-site fields."""

    sites: tuple[SiteSpec, ...]
    J: float = 0.0

    def __post_init__(self):
        if len(self.sites) < 1:
            raise ValueError("chain needs at least one site")
        if not np.isfinite(self.J):
            raise ValueError("exchange constant must be finite")

    @classmethod
    def uniform(cls, n_sites: int, spin: SpinQuantum, field: Field = None,
                aniso: AnisotropySpec | None = None, J: float = 0.0) -> "ChainSpec":
        aniso = aniso if aniso is not None else AnisotropySpec()
        return cls(tuple(SiteSpec(spin, field, aniso) for _ in range(n_sites)), J=J)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.spin.dim for s in self.sites)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def breakpoints(self) -> tuple[float, ...]:
        """Union of field discontinuity times over all sites."""
        pts: set[float] = set()
        for s in self.sites:
            if isinstance(s.field, PiecewiseConstantField):
                pts.update(s.field.breakpoints)
        return tuple(sorted(pts))


def consistent_field(t: float, f: FieldSpec) -> np.ndarray:
    """Field triple (w1 cn(wt|k), w1 sn(wt|k), w0 dn(wt|k))."""
    sn, cn, dn = jacobi_sn_cn_dn(f.omega * t, f.k)
    return np.array([f.omega1 * cn, f.omega1 * sn, f.omega0 * dn])


def _field_vector(fld: Field, t: float) -> np.ndarray:
    if fld is None:
        return np.zeros(3)
    if isinstance(fld, FieldSpec):
        return consistent_field(t, fld)
    return np.asarray(fld.value_at(t), dtype=float)


def site_hamiltonian(h, a: AnisotropySpec, s: SpinQuantum) -> np.ndarray:
    """h.S + q (S3^2 - s(s+1)/3 E) + d (S1^2 - S2^2); traceless by construction."""
    s1, s2, s3 = spin_matrices(s)
    d = s.dim
    ham = h[0] * s1 + h[1] * s2 + h[2] * s3
    if a.q != 0.0:
        ham = ham + a.q * (s3 @ s3 - (s.s * (s.s + 1) / 3.0) * np.eye(d))
    if a.d != 0.0:
        ham = ham + a.d * (s1 @ s1 - s2 @ s2)
    return ham


@lru_cache(maxsize=None)
def _total_spin_and_exchange(dims: tuple[int, ...]):
    """Total spin components G_a and the all-pairs exchange sum.

    sum_{i<j} S_i.S_j = (G.G - sum_i S_i.S_i)/2 with S_i.S_i = s_i(s_i+1) E.
    """
    n = len(dims)
    total = int(np.prod(dims))
    G = [np.zeros((total, total), dtype=complex) for _ in range(3)]
    casimir = 0.0
    for i, d in enumerate(dims):
        ops = spin_matrices(SpinQuantum.from_dim(d))
        left = int(np.prod(dims[:i])) if i else 1
        right = int(np.prod(dims[i + 1:])) if i < n - 1 else 1
        for a in range(3):
            G[a] += np.kron(np.kron(np.eye(left), ops[a]), np.eye(right))
        s = (d - 1) / 2.0
        casimir += s * (s + 1)
    exchange = (sum(g @ g for g in G) - casimir * np.eye(total)) / 2.0
    return tuple(G), exchange


def exchange_operator(dims: tuple[int, ...]) -> np.ndarray:
    """sum_{i<j} S_i . S_j for the given site dimensions (J factored out)."""
    return _total_spin_and_exchange(tuple(dims))[1]


def _embedded_site_ops(dims: tuple[int, ...], i: int):
    n = len(dims)
    ops = spin_matrices(SpinQuantum.from_dim(dims[i]))
    left = int(np.prod(dims[:i])) if i else 1
    right = int(np.prod(dims[i + 1:])) if i < n - 1 else 1
    return tuple(np.kron(np.kron(np.eye(left), a), np.eye(right)) for a in ops)


def pair_hamiltonian(h, hbar, a: AnisotropySpec, abar: AnisotropySpec,
                     J: float, s: SpinQuantum) -> np.ndarray:
    """H(h) x E + E x H(hbar) + J S.S for two equal-spin sites."""
    d = s.dim
    eye = np.eye(d)
    ham = (np.kron(site_hamiltonian(h, a, s), eye)
           + np.kron(eye, site_hamiltonian(hbar, abar, s)))
    return ham + J * exchange_operator((d, d))


@lru_cache(maxsize=32)
def _chain_constants(chain: ChainSpec):
    """Per-field-group total spin components plus constant (aniso + exchange) part."""
    dims = chain.dims
    total = chain.total_dim
    if total > MAX_CHAIN_DIM:
        raise ValueError(f"chain dimension {total} exceeds the {MAX_CHAIN_DIM} guard")
    groups: dict = {}
    const = chain.J * exchange_operator(dims)
    for i, site in enumerate(chain.sites):
        ops = _embedded_site_ops(dims, i)
        if not site.aniso.is_zero:
            s = site.spin
            s1, s2, s3 = ops
            if site.aniso.q != 0.0:
                const = const + site.aniso.q * (
                    s3 @ s3 - (s.s * (s.s + 1) / 3.0) * np.eye(total))
            if site.aniso.d != 0.0:
                const = const + site.aniso.d * (s1 @ s1 - s2 @ s2)
        if site.field is not None:
            if site.field not in groups:
                groups[site.field] = [np.zeros((total, total), dtype=complex)
                                      for _ in range(3)]
            for a in range(3):
                groups[site.field][a] += ops[a]
    return [(fld, tuple(gs)) for fld, gs in groups.items()], const


def chain_hamiltonian(c: ChainSpec, t: float) -> np.ndarray:
    """Full chain Hamiltonian at time t (identical structure to Eq.-style
    sum of single-site field terms plus all-pairs exchange)."""
    return chain_hamiltonian_fn(c)[0](t)


def chain_hamiltonian_fn(c: ChainSpec):
    """Return ``(H, breakpoints)`` with ``H(t)`` reusing precomputed operators."""
    groups, const = _chain_constants(c)

    def ham(t: float) -> np.ndarray:
        out = const
        for fld, (g1, g2, g3) in groups:
            h = _field_vector(fld, t)
            out = out + h[0] * g1 + h[1] * g2 + h[2] * g3
        return out

    return ham, c.breakpoints()


def constant_hamiltonian(c: ChainSpec) -> np.ndarray | None:
    """The chain Hamiltonian if it is time-independent, else None."""
    for site in c.sites:
        fld = site.field
        if fld is None:
            continue
        if isinstance(fld, PiecewiseConstantField):
            if len(fld.breakpoints) > 0:
                return None
        elif isinstance(fld, FieldSpec):
            if fld.omega1 != 0.0:
                if fld.omega != 0.0:
                    return None
            if fld.omega0 != 0.0 and fld.k != 0.0 and fld.omega != 0.0:
                return None  # dn(w t | k) varies
        else:
            return None
    return chain_hamiltonian(c, 0.0)


def gauge_matrix(s: SpinQuantum, t: float, omega: float, k: float) -> np.ndarray:
    """diag(f^s, ..., f^{-s}) with f = cn + i sn = exp(i am(w t | k)).

    Unitary for all real t since |f| = 1; computed through the continuous
    amplitude so fractional powers are single-valued.
    """
    phi = jacobi_am(omega * t, k)
    m = (s.twice_s - 2 * np.arange(s.dim)) / 2.0
    return np.diag(np.exp(1j * phi * m))


def chain_gauge(c: ChainSpec, t: float) -> np.ndarray:
    """Tensor product of the per-site gauge matrices (identity at t = 0)."""
    out = np.eye(1, dtype=complex)
    for site in c.sites:
        fld = site.field
        if isinstance(fld, FieldSpec):
            out = np.kron(out, gauge_matrix(site.spin, t, fld.omega, fld.k))
        else:
            out = np.kron(out, np.eye(site.spin.dim, dtype=complex))
    return out


def _require_gauge_compatible(c: ChainSpec) -> tuple[float, float]:
    """Common (omega, k) of the drives; rejects chains the gauge cannot fix."""
    omegas, ks, omega1s = set(), set(), set()
    for site in c.sites:
        if not site.aniso.is_zero:
            raise ValueError("gauge reduction requires zero anisotropy")
        fld = site.field
        if fld is None:
            omegas.add(0.0), ks.add(0.0), omega1s.add(0.0)
        elif isinstance(fld, FieldSpec):
            omegas.add(fld.omega), ks.add(fld.k), omega1s.add(fld.omega1)
        else:
            raise ValueError("gauge reduction requires consistent-field drives")
    if len(omegas) > 1 or len(ks) > 1:
        raise ValueError("all sites must share one drive frequency and modulus")
    if len(omega1s) > 1:
        raise ValueError("all sites must share one transverse amplitude")
    return omegas.pop(), ks.pop()


def transformed_chain_hamiltonian(c: ChainSpec, t: float) -> np.ndarray:
    """Gauge-frame Hamiltonian: per site w1 S1 + delta dn(wt|k) S3, plus J S.S.

    The isotropic exchange commutes with the gauge and passes through
    unchanged.  Time-independent whenever every site is at exact resonance
    (delta = 0) or k = 0 (dn == 1).
    """
    omega, k = _require_gauge_compatible(c)
    dims = c.dims
    total = c.total_dim
    if total > MAX_CHAIN_DIM:
        raise ValueError(f"chain dimension {total} exceeds the {MAX_CHAIN_DIM} guard")
    dn = jacobi_sn_cn_dn(omega * t, k)[2]
    out = c.J * exchange_operator(dims)
    for i, site in enumerate(c.sites):
        if site.field is None:
            continue
        s1, _, s3 = _embedded_site_ops(dims, i)
        out = out + site.field.omega1 * s1 + site.field.detuning * dn * s3
    return out


def transformed_pair_hamiltonian(c: ChainSpec, t: float) -> np.ndarray:
    """Two-site case of :func:`transformed_chain_hamiltonian`."""
    if c.n_sites != 2:
        raise ValueError("expected a two-site chain")
    return transformed_chain_hamiltonian(c, t)
