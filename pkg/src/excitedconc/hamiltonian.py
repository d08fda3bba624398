"""Matrix-free Heisenberg Hamiltonians in the sigma^z product basis.

Conventions: Pauli matrices (not S = sigma/2), so a single bond has
sigma_a . sigma_b = 2 SWAP_ab - 1 with eigenvalues -3 (singlet) and +1
(triplet).  Bit ``i`` of a basis index is 1 when site ``i`` points up.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numba
import numpy as np

from .errors import ContractViolation
from .lattice import Bond, Coupling, ModelSpec, build_bonds

__all__ = [
    "HamiltonianOperator",
    "hamiltonian",
    "apply",
    "total_sz",
    "assemble_dense",
    "dense_matrix",
    "MAX_DENSE_SITES",
    "MagnetizationSector",
    "sector_apply",
    "all_pairs",
    "spin_squared",
    "lower_spin",
    "raise_spin",
    "single_bond",
]

MAX_DENSE_SITES = 14


@numba.njit(cache=True)
def _matvec(v, out, diag, site_a, site_b, offdiag):
    dim, ncol = v.shape
    for x in range(dim):
        d = diag[x]
        for c in range(ncol):
            out[x, c] = d * v[x, c]
    for k in range(site_a.shape[0]):
        a = site_a[k]
        b = site_b[k]
        mask = (1 << a) | (1 << b)
        w = offdiag[k]
        for x in range(dim):
            if ((x >> a) ^ (x >> b)) & 1:
                y = x ^ mask
                for c in range(ncol):
                    out[x, c] += w * v[y, c]
    return out


@dataclass(frozen=True)
class HamiltonianOperator:
    """H = j1 * sum_{J1 bonds} s_a.s_b + j2 * sum_{J2 bonds} s_a.s_b on ``n_sites`` qubits."""

    bonds: tuple
    j1: float
    j2: float
    n_sites: int

    def __post_init__(self):
        if self.n_sites < 2:
            raise ContractViolation("need at least two sites")
        for bond in self.bonds:
            if not (0 <= bond.a < self.n_sites and 0 <= bond.b < self.n_sites):
                raise ContractViolation(f"bond {bond} outside 0..{self.n_sites - 1}")

    @property
    def dim(self) -> int:
        return 1 << self.n_sites

    @property
    def shape(self) -> tuple[int, int]:
        return (self.dim, self.dim)

    @cached_property
    def _kernel_args(self):
        n = self.n_sites
        couplings = np.array(
            [self.j1 if bd.coupling is Coupling.J1 else self.j2 for bd in self.bonds],
            dtype=np.float64,
        )
        site_a = np.array([bd.a for bd in self.bonds], dtype=np.int64)
        site_b = np.array([bd.b for bd in self.bonds], dtype=np.int64)
        x = np.arange(1 << n, dtype=np.int64)
        diag = np.zeros(1 << n)
        for a, b, j in zip(site_a, site_b, couplings):
            aligned = ((x >> a) ^ (x >> b)) & 1
            diag += j * (1 - 2 * aligned)
        return diag, site_a, site_b, 2.0 * couplings

    @property
    def diagonal(self) -> np.ndarray:
        return self._kernel_args[0]

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return apply(self, v)

    __matmul__ = matvec


def hamiltonian(spec: ModelSpec) -> HamiltonianOperator:
    """Operator for a model instance."""
    return HamiltonianOperator(build_bonds(spec), spec.j1, spec.j2, spec.n_sites)


def apply(h: HamiltonianOperator, v: np.ndarray) -> np.ndarray:
    """Return ``H @ v`` for a state vector or a (dim, m) block of column vectors.

    The dtype of ``v`` is preserved (real or complex).
    """
    v = np.asarray(v)
    if v.shape[0] != h.dim or v.ndim not in (1, 2):
        raise ContractViolation(
            f"state of shape {v.shape} does not match a {h.n_sites}-site operator (dim {h.dim})"
        )
    if not np.issubdtype(v.dtype, np.inexact):
        v = v.astype(np.float64)
    block = np.ascontiguousarray(v.reshape(h.dim, -1))
    out = np.empty_like(block)
    diag, site_a, site_b, offdiag = h._kernel_args
    _matvec(block, out, diag, site_a, site_b, offdiag)
    return out.reshape(v.shape)


def total_sz(v: np.ndarray, n_sites: int | None = None) -> float | str:
    """Magnetization sum(sigma^z)/2 of ``v``, or ``"mixed"`` if it spans several sectors."""
    v = np.asarray(v)
    dim = v.shape[0]
    if n_sites is None:
        n_sites = dim.bit_length() - 1
    if dim != 1 << n_sites:
        raise ContractViolation(f"length {dim} is not 2**{n_sites}")
    mag = np.abs(v)
    peak = mag.max(initial=0.0)
    if peak == 0:
        raise ContractViolation("zero vector has no magnetization")
    support = np.flatnonzero(mag > 1e-12 * peak)
    ups = np.unique(np.bitwise_count(support.astype(np.uint64)))
    if ups.size > 1:
        return "mixed"
    return float(ups[0]) - n_sites / 2


def assemble_dense(h: HamiltonianOperator, chunk: int = 512) -> np.ndarray:
    """Dense matrix built column by column from :func:`apply`."""
    if h.n_sites > MAX_DENSE_SITES:
        raise ContractViolation(f"dense assembly refused for N={h.n_sites} > {MAX_DENSE_SITES}")
    dim = h.dim
    out = np.empty((dim, dim))
    for start in range(0, dim, chunk):
        stop = min(dim, start + chunk)
        cols = np.zeros((dim, stop - start))
        cols[np.arange(start, stop), np.arange(stop - start)] = 1.0
        out[:, start:stop] = apply(h, cols)
    return out


# local basis (down, up) = (bit 0, bit 1)
_PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "y": np.array([[0.0, 1.0j], [-1.0j, 0.0]]),
    "z": np.array([[-1.0, 0.0], [0.0, 1.0]]),
}


def _site_operator(op, site: int, n: int):
    from scipy import sparse

    # kron order puts site n-1 leftmost (most significant bit)
    left = sparse.identity(1 << (n - 1 - site), format="csr")
    right = sparse.identity(1 << site, format="csr")
    return sparse.kron(sparse.kron(left, sparse.csr_matrix(op)), right, format="csr")


def dense_matrix(h: HamiltonianOperator) -> np.ndarray:
    """Dense Hamiltonian from Kronecker products of Pauli matrices.

    Independent of the bit-manipulation kernel used by :func:`apply`.
    """
    if h.n_sites > MAX_DENSE_SITES:
        raise ContractViolation(f"dense construction refused for N={h.n_sites} > {MAX_DENSE_SITES}")
    n = h.n_sites
    total = None
    for bond in h.bonds:
        j = h.j1 if bond.coupling is Coupling.J1 else h.j2
        if j == 0:
            continue
        term = sum(
            _site_operator(p, bond.a, n) @ _site_operator(p, bond.b, n) for p in _PAULI.values()
        )
        total = j * term if total is None else total + j * term
    if total is None:
        return np.zeros((h.dim, h.dim))
    mat = total.toarray()
    return np.ascontiguousarray(mat.real)


def single_bond(j: float = 1.0) -> HamiltonianOperator:
    """Two sites joined by one J1 bond."""
    return HamiltonianOperator((Bond(0, 1, Coupling.J1),), j, 0.0, 2)


@numba.njit(cache=True)
def _sector_matvec(v, out, states, index, diag, site_a, site_b, offdiag):
    dim, ncol = v.shape
    for i in range(dim):
        x = states[i]
        d = diag[x]
        for c in range(ncol):
            out[i, c] = d * v[i, c]
        for k in range(site_a.shape[0]):
            a = site_a[k]
            b = site_b[k]
            if ((x >> a) ^ (x >> b)) & 1:
                j = index[x ^ ((1 << a) | (1 << b))]
                w = offdiag[k]
                for c in range(ncol):
                    out[i, c] += w * v[j, c]
    return out


@dataclass(frozen=True)
class MagnetizationSector:
    """Basis states of ``n_sites`` qubits with exactly ``n_up`` up-spins."""

    n_sites: int
    n_up: int

    @cached_property
    def states(self) -> np.ndarray:
        full = np.arange(1 << self.n_sites, dtype=np.uint64)
        return np.flatnonzero(np.bitwise_count(full) == self.n_up).astype(np.int64)

    @cached_property
    def index(self) -> np.ndarray:
        idx = np.full(1 << self.n_sites, -1, dtype=np.int64)
        idx[self.states] = np.arange(self.states.size)
        return idx

    @property
    def dim(self) -> int:
        return self.states.size

    @property
    def sz(self) -> float:
        return self.n_up - self.n_sites / 2

    def embed(self, block: np.ndarray) -> np.ndarray:
        """Full-space vectors (columns) from sector coefficients (columns)."""
        out = np.zeros((1 << self.n_sites,) + block.shape[1:], dtype=block.dtype)
        out[self.states] = block
        return out


def sector_apply(h: HamiltonianOperator, sector: MagnetizationSector, v: np.ndarray) -> np.ndarray:
    """``H @ v`` for coefficients ``v`` (dim, m) living in one magnetization sector."""
    if sector.n_sites != h.n_sites or v.shape[0] != sector.dim:
        raise ContractViolation("sector does not match operator or vector")
    block = np.ascontiguousarray(v.reshape(sector.dim, -1))
    out = np.empty_like(block)
    diag, site_a, site_b, offdiag = h._kernel_args
    _sector_matvec(block, out, sector.states, sector.index, diag, site_a, site_b, offdiag)
    return out.reshape(v.shape)


@lru_cache(maxsize=32)
def all_pairs(n_sites: int, coupling: float = 1.0) -> HamiltonianOperator:
    """sum_{i<j} coupling * s_i.s_j over every pair of sites."""
    bonds = tuple(Bond(i, j, Coupling.J1) for i in range(n_sites) for j in range(i + 1, n_sites))
    return HamiltonianOperator(bonds, coupling, 0.0, n_sites)


def spin_squared(v: np.ndarray, n_sites: int) -> np.ndarray:
    """(sum_i sigma_i / 2)^2 applied to ``v``; equals 3N/4 + 1/2 sum_{i<j} s_i.s_j."""
    return apply(all_pairs(n_sites, 0.5), v) + 0.75 * n_sites * v


def lower_spin(v: np.ndarray, n_sites: int) -> np.ndarray:
    """S^- = sum_i sigma_i^- applied to full-space vector(s) ``v``."""
    x = np.arange(1 << n_sites)
    out = np.zeros_like(v)
    for i in range(n_sites):
        up = ((x >> i) & 1).astype(bool)
        out[x[up] ^ (1 << i)] += v[up]
    return out


def raise_spin(v: np.ndarray, n_sites: int) -> np.ndarray:
    """S^+ = sum_i sigma_i^+ applied to full-space vector(s) ``v``."""
    x = np.arange(1 << n_sites)
    out = np.zeros_like(v)
    for i in range(n_sites):
        down = ~((x >> i) & 1).astype(bool)
        out[x[down] | (1 << i)] += v[down]
    return out
