"""Lowest eigenpairs of a HamiltonianOperator with complete degenerate levels.

The iterative path is a block Lanczos method with full reorthogonalization.
Converged Ritz pairs are locked and every new cycle starts from a fresh random
block in their orthogonal complement.  A single Krylov cycle grown from a
random block of width ``b`` holds at most ``b`` copies of a degenerate
eigenvalue, so a level whose copies fill the block is never trusted to be
complete: another cycle runs in the complement until a level shows up with
fewer than ``b`` copies below a clearly separated higher Ritz value.

By default the Krylov work happens in the lowest non-negative magnetization
sector (Sz = 0 or 1/2).  Every spin multiplet has exactly one member there, so
each sector eigenvector is expanded into its full 2S+1 multiplet with the
ladder operators.  ``method="full"`` runs the same solver on the whole
2**N-dimensional space instead.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, MultipletOverflowError, SolverError
from .hamiltonian import (
    MAX_DENSE_SITES,
    HamiltonianOperator,
    MagnetizationSector,
    apply,
    dense_matrix,
    lower_spin,
    raise_spin,
    sector_apply,
    spin_squared,
)

__all__ = [
    "EigenSolution",
    "lowest_k",
    "dense_all",
    "group_levels",
    "degeneracy_tolerance",
    "DEFAULT_SEED",
    "DEGENERACY_RTOL",
]

log = logging.getLogger(__name__)

DEFAULT_SEED = 42
DEGENERACY_RTOL = 1e-8
RESIDUAL_RTOL = 1e-10
SENTINEL_RTOL = 1e-6
MATVECS_PER_PAIR = 5000
MAX_EXTRA_STATES = 8

_CONTINUE, _RESTART, _DONE = "continue", "restart", "done"


def degeneracy_tolerance(eigenvalues, rtol: float = DEGENERACY_RTOL) -> float:
    """Absolute energy window within which two eigenvalues belong to one level."""
    eigenvalues = np.asarray(eigenvalues)
    scale = abs(eigenvalues[0]) if eigenvalues.size else 0.0
    return rtol * max(1.0, scale)


def group_levels(eigenvalues, tol: float) -> tuple[tuple[int, ...], ...]:
    """Split ascending eigenvalues into runs lying within ``tol`` of the run's first member."""
    levels = []
    current: list[int] = []
    for i, e in enumerate(eigenvalues):
        if current and e - eigenvalues[current[0]] > tol:
            levels.append(tuple(current))
            current = []
        current.append(i)
    if current:
        levels.append(tuple(current))
    return tuple(levels)


@dataclass(frozen=True)
class EigenSolution:
    """Ascending eigenvalues, orthonormal eigenvectors (columns) and level grouping."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    levels: tuple
    degeneracy_tol: float
    residuals: np.ndarray = field(default=None, repr=False)
    matvecs: int = 0

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @property
    def degeneracies(self) -> tuple[int, ...]:
        return tuple(len(lv) for lv in self.levels)

    @property
    def level_energies(self) -> np.ndarray:
        return np.array([self.eigenvalues[list(lv)].mean() for lv in self.levels])

    def level_vectors(self, level: int) -> np.ndarray:
        """(dim, d) array holding the members of one degenerate level."""
        return self.eigenvectors[:, list(self.levels[level])]

    def level_gap(self, level: int) -> float:
        """Distance between ``level`` and the next one (inf if it is the last level)."""
        if level + 1 >= self.n_levels:
            return np.inf
        lo = self.eigenvalues[self.levels[level][-1]]
        hi = self.eigenvalues[self.levels[level + 1][0]]
        return float(hi - lo)


def _make_solution(evals, evecs, residuals, matvecs, rtol=DEGENERACY_RTOL) -> EigenSolution:
    tol = degeneracy_tolerance(evals, rtol)
    return EigenSolution(
        eigenvalues=evals,
        eigenvectors=evecs,
        levels=group_levels(evals, tol),
        degeneracy_tol=tol,
        residuals=residuals,
        matvecs=matvecs,
    )


def dense_all(h: HamiltonianOperator) -> EigenSolution:
    """Full spectrum by dense diagonalization (N <= 14)."""
    if h.n_sites > MAX_DENSE_SITES:
        raise ContractViolation(
            f"dense diagonalization refused for N={h.n_sites}: dimension {h.dim} exceeds "
            f"2**{MAX_DENSE_SITES}"
        )
    evals, evecs = np.linalg.eigh(dense_matrix(h))
    return _make_solution(evals, evecs, np.zeros_like(evals), 0)


def _orthonormalize(block, basis, drop_tol):
    """Orthonormalize the rows of ``block`` against the orthonormal rows of ``basis``.

    Two classical Gram-Schmidt passes, then an SVD of what is left.  Returns
    ``(Q, B)`` with ``projected = B.T @ Q`` restricted to the kept rows;
    directions with singular value below ``drop_tol`` are dropped from Q but
    stay in B, so residual norms computed from B remain exact.
    """
    has_basis = basis is not None and basis.shape[0]
    if has_basis:
        before = np.linalg.norm(block, axis=1).max(initial=0.0)
        for _ in range(2):
            block -= (block @ basis.T) @ basis
    u, s, vt = np.linalg.svd(block.T, full_matrices=False)
    keep = s > drop_tol
    q = u[:, keep]
    if has_basis and q.shape[1] and s[keep].min() < 1e-4 * before:
        # rounding left by the projection is magnified by normalizing a small remainder
        q -= basis.T @ (basis @ q)
        q, _ = np.linalg.qr(q)
    return np.ascontiguousarray(q.T), s[:, None] * vt


class _Locked:
    """Growing set of converged eigenpairs, vectors stored as rows."""

    def __init__(self, dim):
        self.vecs = np.empty((0, dim))
        self.vals = np.empty(0)

    def add(self, vals, vecs):
        self.vals = np.concatenate([self.vals, vals])
        self.vecs = np.vstack([self.vecs, vecs])

    @property
    def count(self):
        return self.vals.size


def _block_lanczos(matvec, dim, k, rng, locked, *, block_size, max_basis, budget,
                   residual_rtol, degeneracy_rtol, max_extra):
    """Lock eigenpairs of ``matvec`` until the level holding state ``k - 1`` is complete.

    ``locked`` is extended in place; returns the number of products used.
    """
    carry = np.empty((0, dim))
    matvecs = 0
    res = None
    while locked.count < dim:
        avail = dim - locked.count
        m_max = min(avail, max(max_basis, 4 * block_size))
        b = min(block_size, avail)
        start = np.vstack([rng.standard_normal((b, dim)), carry])
        blk, _ = _orthonormalize(start, locked.vecs, 1e-10)
        Q = np.empty((m_max, dim))
        T = np.zeros((m_max, m_max))
        n = 0
        n_lock, action = 0, _CONTINUE
        while blk.shape[0] and n < m_max:
            p = min(blk.shape[0], m_max - n)
            Q[n : n + p] = blk[:p]
            w = matvec(np.ascontiguousarray(blk[:p].T)).T.copy()
            matvecs += p
            coeff = Q[: n + p] @ w.T
            T[: n + p, n : n + p] = coeff
            T[n : n + p, : n + p] = coeff.T
            n += p
            theta, y = np.linalg.eigh(T[:n, :n])
            w -= coeff.T @ Q[:n]
            if locked.count:
                w -= (w @ locked.vecs.T) @ locked.vecs
            scale = max(1.0, float(np.abs(theta).max()))
            blk, bfac = _orthonormalize(w, Q[:n], 1e-12 * scale)
            res = np.linalg.norm(bfac @ y[n - p : n, :], axis=0)
            exhausted = locked.count + n >= dim
            n_lock, action = _assess(
                theta, res, locked.vals, k, b, residual_rtol, degeneracy_rtol, exhausted
            )
            if action != _CONTINUE:
                break
            if matvecs > budget:
                raise SolverError(
                    f"no convergence after {matvecs} matrix-vector products", residuals=res
                )
        if n == 0:
            break
        done = action == _DONE
        if action == _CONTINUE:
            # basis full or Krylov space invariant: keep what converged, carry the rest
            n_lock = _count_converged(theta, res, residual_rtol)
        if n_lock:
            locked.add(theta[:n_lock], y[:, :n_lock].T @ Q[:n])
        if done:
            break
        if action == _CONTINUE and n >= m_max:
            n_carry = min(2 * block_size, n - n_lock)
            carry = y[:, n_lock : n_lock + n_carry].T @ Q[:n]
        else:
            carry = np.empty((0, dim))
        _check_overflow(locked.vals, k, max_extra, degeneracy_rtol)
        if matvecs > budget:
            raise SolverError(
                f"no convergence after {matvecs} matrix-vector products", residuals=res
            )
    return matvecs


def lowest_k(
    h: HamiltonianOperator,
    k: int,
    seed: int = DEFAULT_SEED,
    *,
    method: str = "sector",
    block_size: int = 4,
    max_basis: int = 320,
    residual_rtol: float = RESIDUAL_RTOL,
    degeneracy_rtol: float = DEGENERACY_RTOL,
    max_extra: int = MAX_EXTRA_STATES,
) -> EigenSolution:
    """The ``k`` lowest eigenpairs, extended so the last level is complete.

    Parameters
    ----------
    h : HamiltonianOperator
    k : int
        Number of eigenpairs wanted. If index ``k - 1`` sits inside a degenerate
        level the result is extended to the end of that level, by at most
        ``max_extra`` states.
    seed : int
        Seed for the random start blocks; equal seeds give identical results.
    method : {"sector", "full"}
        Solve in the lowest magnetization sector and expand multiplets
        (requires an SU(2)-invariant operator, which every Heisenberg
        ``HamiltonianOperator`` is), or iterate on the full space.
    block_size : int
        Width of the random part of each start block.

    Raises
    ------
    SolverError
        If more than 5000 matrix-vector products per requested pair are used.
    MultipletOverflowError
        If completing the last level needs more than ``k + max_extra`` states.
    """
    dim = h.dim
    if not 1 <= k <= dim:
        raise ContractViolation(f"k={k} outside 1..{dim}")
    if block_size < 1:
        raise ContractViolation("block_size must be positive")
    if method not in ("sector", "full"):
        raise ContractViolation(f"unknown method {method!r}")
    rng = np.random.default_rng(seed)
    opts = dict(
        block_size=block_size,
        max_basis=max_basis,
        budget=MATVECS_PER_PAIR * k,
        residual_rtol=residual_rtol,
        degeneracy_rtol=degeneracy_rtol,
    )
    if method == "full":
        locked = _Locked(dim)
        matvecs = _block_lanczos(
            lambda v: apply(h, v), dim, k, rng, locked, max_extra=max_extra, **opts
        )
        X = np.ascontiguousarray(locked.vecs.T) if locked.count else np.empty((dim, 0))
        return _finalize(h, X, k, max_extra, degeneracy_rtol, matvecs)
    return _sector_solve(h, k, rng, max_extra, opts)


def _sector_solve(h, k, rng, max_extra, opts):
    n = h.n_sites
    sector = MagnetizationSector(n, (n + 1) // 2)
    locked = _Locked(sector.dim)
    matvecs = 0
    k_sector = max(1, -(-k // 2))
    while True:
        k_sector = min(k_sector, sector.dim)
        matvecs += _block_lanczos(
            lambda v: sector_apply(h, sector, v), sector.dim, k_sector, rng, locked,
            max_extra=sector.dim, **opts,
        )
        X, _ = _expand_multiplets(h, sector, locked.vecs)
        if X.shape[1] >= k or k_sector >= sector.dim:
            break
        k_sector = locked.count + max(1, -(-(k - X.shape[1]) // 2))
    return _finalize(h, X, k, max_extra, opts["degeneracy_rtol"], matvecs)


def _spin_of(s2_val):
    return 0.5 * round(np.sqrt(max(1.0 + 4.0 * s2_val, 0.0)) - 1.0)


def _expand_multiplets(h, sector, vecs):
    """Full-space multiplets generated from converged sector vectors (rows of ``vecs``).

    S^2 is diagonalized over the span of all sector vectors at once, so that
    two nearly degenerate levels of different spin are separated exactly
    rather than to within residual/gap, and H is then diagonalized inside
    each spin block.
    """
    n = sector.n_sites
    m0 = sector.sz
    if not vecs.shape[0]:
        return np.empty((1 << n, 0)), np.empty(0)
    members = sector.embed(np.ascontiguousarray(vecs.T))
    s2 = members.T @ spin_squared(members, n)
    s2_vals, rot = np.linalg.eigh(0.5 * (s2 + s2.T))
    spins = np.array([_spin_of(v) for v in s2_vals])
    columns, energies = [], []
    for spin in np.unique(spins):
        block = rot[:, spins == spin]
        coeff = vecs.T @ block
        small = coeff.T @ sector_apply(h, sector, coeff)
        evals, sub = np.linalg.eigh(0.5 * (small + small.T))
        for col, energy in zip((members @ (block @ sub)).T, evals):
            mult = [col]
            for step, count in ((lower_spin, spin + m0), (raise_spin, spin - m0)):
                v = col
                for _ in range(int(round(count))):
                    v = step(v, n)
                    v /= np.linalg.norm(v)
                    mult.append(v)
            columns.extend(mult)
            energies.extend([energy] * len(mult))
    order = np.argsort(energies, kind="stable")
    return np.column_stack(columns)[:, order], np.array(energies)[order]


def _check_overflow(vals, k, max_extra, drtol):
    if vals.size <= k + max_extra:
        return
    vals = np.sort(vals)
    tol = degeneracy_tolerance(vals, drtol)
    if vals[k + max_extra] - vals[k - 1] <= tol:
        raise MultipletOverflowError(
            f"level containing state {k - 1} extends beyond k+{max_extra}={k + max_extra}"
        )


def _count_converged(theta, res, rtol):
    ok = res <= rtol * np.maximum(1.0, np.abs(theta))
    return int(np.argmin(ok)) if not ok.all() else int(ok.size)


def _assess(theta, res, locked_vals, k, b, rtol, drtol, exhausted):
    """Decide whether the current cycle goes on and how many Ritz pairs to lock.

    Returns ``(n_lock, action)`` with action one of continue, restart or done.
    The cycle may end once the Ritz pair just above the cut is nearly
    converged and separated from the cut by more than its residual norm.
    """
    c = _count_converged(theta, res, rtol)
    merged = np.sort(np.concatenate([locked_vals, theta[:c]]))
    if merged.size < k:
        if exhausted and c == theta.size:
            return c, _DONE
        return 0, _CONTINUE
    tol = degeneracy_tolerance(merged, drtol)
    cut = merged[k - 1] + tol
    below = int(np.searchsorted(theta, cut, side="right"))
    if below > c:
        return 0, _CONTINUE
    if below == theta.size:
        return (below, _DONE) if exhausted else (0, _CONTINUE)
    if exhausted:
        return below, _DONE
    nxt, r = theta[below], res[below]
    if nxt - r <= cut or r > SENTINEL_RTOL * max(1.0, abs(nxt)):
        return 0, _CONTINUE
    # the random rows alone give the start block full rank on any level with
    # at least b copies, so a level showing fewer than b copies is complete;
    # one whose copies fill the block may have more copies outside it
    counts = [int(np.sum(np.abs(theta[:below] - t) <= tol)) for t in theta[:below]]
    if not counts or max(counts) < b:
        return below, _DONE
    return below, _RESTART


def _finalize(h, X, k, max_extra, drtol, matvecs):
    if X.shape[1] == 0:
        raise SolverError("no eigenpairs converged")
    HX = apply(h, X)
    matvecs += X.shape[1]
    # Rayleigh-Ritz over the collected vectors mixes copies found in different cycles
    small = X.T @ HX
    evals, rot = np.linalg.eigh(0.5 * (small + small.T))
    tol = degeneracy_tolerance(evals, drtol)
    keep = 0
    for lv in group_levels(evals, tol):
        keep = lv[-1] + 1
        if keep >= k:
            break
    if keep > k + max_extra:
        raise MultipletOverflowError(
            f"level containing state {k - 1} needs {keep} states, more than k+{max_extra}"
        )
    evals, rot = evals[:keep], rot[:, :keep]
    X, HX = X @ rot, HX @ rot
    residuals = np.linalg.norm(HX - X * evals, axis=0)
    bad = residuals > 10 * RESIDUAL_RTOL * np.maximum(1.0, np.abs(evals))
    if bad.any():
        raise SolverError("converged eigenpairs lost accuracy", residuals=residuals)
    log.debug("lowest_k: %d pairs, %d matvecs", keep, matvecs)
    return _make_solution(evals, X, residuals, matvecs, drtol)
