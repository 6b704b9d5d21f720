"""Spin operators, orthogonal Hermitian operator bases, and tensor algebra.

The operator basis C_0 .. C_{d^2-1} for a spin-s qudit (d = 2s+1) is built so
that C_0 is proportional to the identity and C_1, C_2, C_3 *equal* the spin
matrices S_1, S_2, S_3; the remaining elements complete the set by
Gram-Schmidt over the real vector space of Hermitian d x d matrices.  All
elements share the norm Tr(C_a C_b) = c * delta_ab with c = Tr(S_1^2).

Bloch coordinates are scaled so the identity component is exactly 1:

    single site   r_a  = sqrt(d/c) Tr(rho C_a),   rho = (cd)^{-1/2} sum r_a C_a
    two sites     R_ab = (d/c) Tr(rho C_a x C_b), rho = (cd)^{-1}  sum R_ab C_a x C_b

For the qutrit (c = 2, d = 3) the reconstruction prefactors are 1/sqrt(6) and
1/6 respectively.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

__all__ = [
    "SpinQuantum",
    "OperatorBasis",
    "StructureConstants",
    "BlochState",
    "DensityMatrix",
    "spin_matrices",
    "hermitian_basis",
    "structure_constants",
    "kron",
    "partial_trace",
    "partial_transpose",
    "bloch_from_rho",
    "rho_from_bloch",
]


@dataclass(frozen=True)
class SpinQuantum:
    """Spin quantum number, stored as 2s so half-integer spins stay exact."""

    twice_s: int

    def __post_init__(self):
        if self.twice_s < 1:
            raise ValueError("need spin >= 1/2 (dimension >= 2)")

    @property
    def s(self) -> float:
        return self.twice_s / 2.0

    @property
    def dim(self) -> int:
        return self.twice_s + 1

    @classmethod
    def from_s(cls, s: float) -> "SpinQuantum":
        twice = round(2 * s)
        if abs(2 * s - twice) > 1e-12:
            raise ValueError(f"spin must be integer or half-integer, got {s}")
        return cls(twice)

    @classmethod
    def from_dim(cls, dim: int) -> "SpinQuantum":
        return cls(dim - 1)


@dataclass(frozen=True)
class OperatorBasis:
    """Complete trace-orthogonal Hermitian basis for one qudit.

    ``elements[a]`` is C_a; Tr(C_a C_b) = norm_const * delta_ab, C_0 is a
    positive multiple of the identity and C_1..C_3 are the spin matrices.
    """

    dim: int
    elements: tuple[np.ndarray, ...]
    norm_const: float

    @cached_property
    def stack(self) -> np.ndarray:
        """All elements as one (d^2, d, d) array."""
        return np.array(self.elements)

    def validate(self, tol: float = 1e-12) -> None:
        """Raise if any basis invariant is violated beyond ``tol``."""
        d, c = self.dim, self.norm_const
        if len(self.elements) != d * d:
            raise ValueError("basis is not complete")
        C = self.stack
        herm = max(np.abs(M - M.conj().T).max() for M in C)
        if herm > tol:
            raise ValueError(f"basis element not Hermitian: defect {herm:.3e}")
        gram = np.einsum("xab,yba->xy", C, C)
        if np.abs(gram - c * np.eye(d * d)).max() > tol:
            raise ValueError("basis not trace-orthogonal at common norm")
        if np.abs(C[0] - np.sqrt(c / d) * np.eye(d)).max() > tol:
            raise ValueError("C_0 is not the expected multiple of the identity")


@dataclass(frozen=True)
class StructureConstants:
    """Commutator structure constants of an operator basis.

    ``tensor[i-1, j-1, l-1]`` holds e_ijl for 1-based physics indices, from
    [C_i, C_j] = i * sum_l e_ijl C_l.  Exactly antisymmetric in (i, j).
    """

    dim: int
    tensor: np.ndarray

    @property
    def n(self) -> int:
        return self.dim * self.dim - 1


@dataclass(frozen=True)
class BlochState:
    """Real Bloch coordinates of a state; r[0] == 1 encodes unit trace."""

    dim: int
    r: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if r.shape != (self.dim * self.dim,):
            raise ValueError(f"expected r of length {self.dim**2}, got {r.shape}")
        object.__setattr__(self, "r", r)


@dataclass(frozen=True)
class DensityMatrix:
    """Density matrix over a tensor product of qudit sites."""

    data: np.ndarray
    site_dims: tuple[int, ...]

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        dims = tuple(int(d) for d in self.site_dims)
        total = int(np.prod(dims))
        if data.shape != (total, total):
            raise ValueError(f"data shape {data.shape} does not match sites {dims}")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "site_dims", dims)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def n_sites(self) -> int:
        return len(self.site_dims)

    @classmethod
    def from_ket(cls, ket: np.ndarray, site_dims) -> "DensityMatrix":
        ket = np.asarray(ket, dtype=complex).ravel()
        return cls(np.outer(ket, ket.conj()), tuple(site_dims))

    def purity(self) -> float:
        return float(np.trace(self.data @ self.data).real)

    def check_physical(self, herm_tol: float = 1e-12, trace_tol: float = 1e-12,
                       eig_floor: float = -1e-9) -> None:
        """Raise unless Hermitian, unit trace and positive within tolerances."""
        defect = np.abs(self.data - self.data.conj().T).max()
        if defect > herm_tol:
            raise ValueError(f"not Hermitian: defect {defect:.3e}")
        tr = np.trace(self.data)
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"trace {tr} is not 1")
        w = np.linalg.eigvalsh((self.data + self.data.conj().T) / 2)
        if w.min() < eig_floor:
            raise ValueError(f"negative eigenvalue {w.min():.3e}")


def spin_matrices(s: SpinQuantum) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Standard angular-momentum matrices S_1, S_2, S_3 in the |s> .. |-s> basis.

    S_3 = diag(s, s-1, ..., -s); S_1 +- i S_2 are the ladder operators with
    elements sqrt(s(s+1) - m(m+-1)).
    """
    return _spin_matrices_cached(s.twice_s)


@lru_cache(maxsize=None)
def _spin_matrices_cached(twice_s: int):
    s = twice_s / 2.0
    d = twice_s + 1
    m = s - np.arange(d)
    # <m+1| S_+ |m> along the superdiagonal, m = m[1:]
    raise_elems = np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1))
    sp = np.diag(raise_elems, 1).astype(complex)
    s1 = (sp + sp.conj().T) / 2
    s2 = (sp - sp.conj().T) / 2j
    s3 = np.diag(m).astype(complex)
    return s1, s2, s3


def _gell_mann_like(d: int) -> list[np.ndarray]:
    """Deterministic spanning set of Hermitian d x d matrices (completion pool)."""
    out = []
    for j in range(d):
        for l in range(j + 1, d):
            sym = np.zeros((d, d), dtype=complex)
            sym[j, l] = sym[l, j] = 1.0
            out.append(sym)
            asym = np.zeros((d, d), dtype=complex)
            asym[j, l] = -1j
            asym[l, j] = 1j
            out.append(asym)
    for l in range(1, d):
        v = np.zeros(d)
        v[:l] = 1.0
        v[l] = -l
        out.append(np.diag(v).astype(complex) * np.sqrt(2.0 / (l * (l + 1))))
    return out


def hermitian_basis(s: SpinQuantum) -> OperatorBasis:
    """Orthogonal Hermitian basis with C_1..C_3 equal to the spin matrices.

    Seeds the completion with the quadratic spin combinations (so C_4 is
    proportional to S_3^2 - s(s+1)/3 E and C_5 to S_1^2 - S_2^2 for d <= 5)
    and finishes with a Gell-Mann-style pool; everything is rescaled to the
    common norm c = Tr(S_1^2).
    """
    return _hermitian_basis_cached(s.twice_s)


@lru_cache(maxsize=None)
def _hermitian_basis_cached(twice_s: int) -> OperatorBasis:
    s1, s2, s3 = _spin_matrices_cached(twice_s)
    d = twice_s + 1
    c = float(np.trace(s1 @ s1).real)  # = s(s+1)d/3
    eye = np.eye(d, dtype=complex)

    # head is orthonormal analytically; kept exact so C_1..3 == S_1..3
    ortho = [eye / np.sqrt(d), s1 / np.sqrt(c), s2 / np.sqrt(c), s3 / np.sqrt(c)]
    pool = [s3 @ s3, s1 @ s1 - s2 @ s2,
            s1 @ s2 + s2 @ s1, s2 @ s3 + s3 @ s2, s3 @ s1 + s1 @ s3]
    pool += _gell_mann_like(d)

    for cand in pool:
        if len(ortho) == d * d:
            break
        v = cand.astype(complex)
        for _ in range(2):  # re-orthogonalize once for stability
            for q in ortho:
                v = v - q * np.vdot(q, v)
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            v = (v + v.conj().T) / 2
            ortho.append(v / np.linalg.norm(v))
    if len(ortho) != d * d:
        raise RuntimeError(f"basis completion failed for d={d}")

    elements = (np.sqrt(c / d) * eye, s1, s2, s3)
    elements = elements + tuple(q * np.sqrt(c) for q in ortho[4:])
    return OperatorBasis(dim=d, elements=elements, norm_const=c)


def structure_constants(b: OperatorBasis) -> StructureConstants:
    """e_ijl = Tr([C_i, C_j] C_l) / (i c), made exactly antisymmetric in (i, j).

    Raises if the tensor has imaginary parts above 1e-10, which signals a
    basis that is not closed under commutation (i.e. a construction bug).
    """
    C = b.stack[1:]
    prod = np.einsum("iab,jbc->ijac", C, C)
    comm = prod - prod.transpose(1, 0, 2, 3)
    raw = np.einsum("ijab,lba->ijl", comm, C) / (1j * b.norm_const)
    imag_max = np.abs(raw.imag).max()
    if imag_max > 1e-10:
        raise ValueError(
            f"basis not closed under commutation: max |Im e_ijl| = {imag_max:.3e}")
    e = raw.real
    e = 0.5 * (e - e.transpose(1, 0, 2))
    return StructureConstants(dim=b.dim, tensor=e)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker (direct) product; dimensions multiply."""
    return np.kron(a, b)


def partial_trace(rho: DensityMatrix, keep: int) -> DensityMatrix:
    """Trace out every site except ``keep``."""
    n = rho.n_sites
    if not 0 <= keep < n:
        raise ValueError(f"site index {keep} out of range for {n} sites")
    dims = rho.site_dims
    tens = rho.data.reshape(dims + dims)
    bra = list(range(n))
    ket = [i if i != keep else n for i in range(n)]
    reduced = np.einsum(tens, bra + ket, [keep, n])
    return DensityMatrix(reduced, (dims[keep],))


def partial_transpose(rho: DensityMatrix, site: int) -> np.ndarray:
    """Transpose the indices of one site of a two-site state.

    The result is Hermitian with unit trace but in general not positive;
    its negative eigenvalues witness entanglement.
    """
    if rho.n_sites != 2:
        raise ValueError("partial transpose is defined here for two-site states only")
    if site not in (0, 1):
        raise ValueError(f"site index {site} out of range for 2 sites")
    d1, d2 = rho.site_dims
    tens = rho.data.reshape(d1, d2, d1, d2)
    if site == 0:
        tens = tens.transpose(2, 1, 0, 3)
    else:
        tens = tens.transpose(0, 3, 2, 1)
    return tens.reshape(d1 * d2, d1 * d2)


def _scale(b: OperatorBasis) -> float:
    return np.sqrt(b.dim / b.norm_const)


def bloch_from_rho(rho: DensityMatrix, b: OperatorBasis) -> BlochState:
    """Expand a one- or two-site state over the (product) operator basis."""
    d, c = b.dim, b.norm_const
    C = b.stack
    if rho.n_sites == 1:
        if rho.dim != d:
            raise ValueError(f"state dim {rho.dim} does not match basis dim {d}")
        r = _scale(b) * np.einsum("ab,xba->x", rho.data, C).real
        return BlochState(dim=d, r=r)
    if rho.n_sites == 2:
        if rho.site_dims != (d, d):
            raise ValueError(f"site dims {rho.site_dims} do not match basis dim {d}")
        tens = rho.data.reshape(d, d, d, d)
        R = (d / c) * np.einsum("abcd,xca,ydb->xy", tens, C, C).real
        return BlochState(dim=d * d, r=R.reshape(-1))
    raise ValueError("Bloch encoding supports one or two sites")


def rho_from_bloch(r: BlochState, b: OperatorBasis) -> DensityMatrix:
    """Inverse of :func:`bloch_from_rho`."""
    d, c = b.dim, b.norm_const
    C = b.stack
    if r.dim == d:
        data = np.einsum("x,xab->ab", r.r, C) / np.sqrt(c * d)
        return DensityMatrix(data, (d,))
    if r.dim == d * d:
        R = r.r.reshape(d * d, d * d)
        tens = np.einsum("xy,xac,ybd->abcd", R, C, C) / (c * d)
        return DensityMatrix(tens.reshape(d * d, d * d), (d, d))
    raise ValueError(f"Bloch dim {r.dim} does not match basis dim {d} or {d*d}")
