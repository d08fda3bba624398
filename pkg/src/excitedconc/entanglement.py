"""Two-site reduced states, Wootters concurrence and total-spin labels.

A degenerate level is represented by the uniform mixture of its members,
rho = (1/d) sum_i |E_i><E_i|, which does not depend on the basis chosen
inside the level.  Reduced density matrices are accumulated from the state
vectors reshaped as ``(2, 2, 2**(N-2))`` tensors, so the full 2**N x 2**N
mixture is never formed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigensolver import EigenSolution
from .errors import ClassificationError, ContractViolation, DataError, InsufficientLevelsError
from .hamiltonian import spin_squared

__all__ = [
    "LevelMixture",
    "reduced_two_qubit",
    "concurrence",
    "total_spin_of",
    "level_spins",
    "spin_label",
    "energy_gaps",
    "EnergyGaps",
    "level_concurrence",
]

DENSITY_TOL = 1e-12
SPIN_RESIDUE_TOL = 1e-6

_SY_SY = np.array(
    [[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=np.complex128
)


def _n_sites(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim != 1 << n or n < 1:
        raise ContractViolation(f"state length {dim} is not a power of two")
    return n


@dataclass(frozen=True)
class LevelMixture:
    """Equal-weight mixture of the ``d`` orthonormal members of one level.

    Parameters
    ----------
    members : ndarray, shape (2**N, d)
        Orthonormal columns.
    energies : ndarray, shape (d,), optional
        Checked to lie within ``tol`` of each other when given.
    """

    members: np.ndarray
    energies: np.ndarray | None = None
    tol: float = np.inf

    def __post_init__(self):
        m = np.asarray(self.members)
        if m.ndim == 1:
            m = m[:, None]
        if m.ndim != 2 or m.shape[1] == 0:
            raise ContractViolation("a mixture needs at least one member column")
        _n_sites(m.shape[0])
        gram = m.conj().T @ m
        if np.abs(gram - np.eye(m.shape[1])).max() > 1e-10:
            raise ContractViolation("mixture members are not orthonormal")
        if self.energies is not None:
            e = np.asarray(self.energies, dtype=float)
            if e.shape != (m.shape[1],):
                raise ContractViolation("one energy per member expected")
            if e.max() - e.min() > self.tol:
                raise ContractViolation("mixture members do not share one energy")
        object.__setattr__(self, "members", m)

    @classmethod
    def from_level(cls, sol: EigenSolution, level: int) -> "LevelMixture":
        idx = list(sol.levels[level])
        return cls(sol.eigenvectors[:, idx], sol.eigenvalues[idx], sol.degeneracy_tol)

    @property
    def d(self) -> int:
        return self.members.shape[1]

    @property
    def n_sites(self) -> int:
        return _n_sites(self.members.shape[0])


def reduced_two_qubit(mix: LevelMixture | np.ndarray, a: int, b: int) -> np.ndarray:
    """Reduced density matrix of sites ``a`` and ``b``.

    Parameters
    ----------
    mix : LevelMixture or ndarray
        A mixture, or a single normalized state vector.
    a, b : int
        Distinct sites.

    Returns
    -------
    ndarray, shape (4, 4), complex
        Basis order |00>, |01>, |10>, |11> of (site a, site b), where 1 means
        the bit of that site is set.
    """
    if not isinstance(mix, LevelMixture):
        mix = LevelMixture(np.asarray(mix))
    n = mix.n_sites
    if a == b:
        raise ContractViolation("sites of a pair must differ")
    if not (0 <= a < n and 0 <= b < n):
        raise ContractViolation(f"sites ({a}, {b}) outside 0..{n - 1}")
    rho = np.zeros((4, 4), dtype=np.complex128)
    for col in mix.members.T:
        # C-order axis j holds bit n-1-j
        t = np.moveaxis(col.reshape((2,) * n), (n - 1 - a, n - 1 - b), (0, 1))
        psi = t.reshape(4, -1)
        rho += psi @ psi.conj().T
    return rho / mix.d


def _check_density(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (4, 4):
        raise ContractViolation(f"two-qubit density matrix must be 4x4, got {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > DENSITY_TOL:
        raise DataError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > DENSITY_TOL:
        raise DataError(f"density matrix trace {np.trace(rho).real:.3e} differs from 1")
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    if w.min() < -DENSITY_TOL:
        raise DataError("density matrix is not positive semidefinite")
    return w, v


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence of a two-qubit density matrix.

    ``C = max(0, l1 - l2 - l3 - l4)`` with ``l_i`` the decreasing square
    roots of the eigenvalues of ``rho (sy x sy) rho* (sy x sy)``.

    With ``rho = B B^dagger`` those square roots are the singular values of
    ``B^T (sy x sy) B``, which is how they are computed here: the SVD keeps
    them accurate to machine precision even for rank-deficient ``rho``,
    where square roots of rounded eigenvalues would lose half the digits.

    Raises
    ------
    DataError
        If ``rho`` is not Hermitian, unit-trace and positive semidefinite
        to 1e-12.
    """
    w, v = _check_density(rho)
    b = v * np.sqrt(np.clip(w, 0.0, None))
    lam = np.linalg.svd(b.T @ _SY_SY @ b, compute_uv=False)
    c = lam[0] - lam[1:].sum()
    return float(min(1.0, max(0.0, c)))


def level_concurrence(sol: EigenSolution, level: int, a: int = 0, b: int = 1) -> float:
    """Concurrence of pair (a, b) in the uniform mixture over one level."""
    return concurrence(reduced_two_qubit(LevelMixture.from_level(sol, level), a, b))


def _spin_from_s2(s2: float) -> tuple[float, float]:
    s = 0.5 * round(np.sqrt(max(1.0 + 4.0 * s2, 0.0)) - 1.0)
    return s, abs(s2 - s * (s + 1))


def total_spin_of(v: np.ndarray) -> float:
    """Total spin ``S`` of a normalized state, from <v|S^2|v> = S(S+1).

    Raises
    ------
    ClassificationError
        If the expectation is further than 1e-6 from every S(S+1).
    """
    v = np.asarray(v)
    n = _n_sites(v.shape[0])
    s2 = float(np.vdot(v, spin_squared(v, n)).real)
    s, residue = _spin_from_s2(s2)
    if residue > SPIN_RESIDUE_TOL:
        raise ClassificationError(f"<S^2> = {s2:.9f} is not of the form S(S+1)")
    return s


def level_spins(sol: EigenSolution, level: int) -> tuple[float, ...]:
    """Total spin of each member, after diagonalizing S^2 inside the level.

    Ascending; an accidental degeneracy of two multiplets shows up as a
    tuple holding both spins.
    """
    x = sol.level_vectors(level)
    n = _n_sites(x.shape[0])
    s2 = x.conj().T @ spin_squared(x, n)
    out = []
    for val in np.linalg.eigvalsh(0.5 * (s2 + s2.conj().T)):
        s, residue = _spin_from_s2(val)
        if residue > SPIN_RESIDUE_TOL:
            raise ClassificationError(f"level {level} is not closed under S^2")
        out.append(s)
    return tuple(out)


def spin_label(spins) -> str:
    """Compact text form of a level's spins, e.g. ``"1"`` or ``"0+1"``."""
    distinct = sorted(set(spins))
    return "+".join(f"{s:g}" for s in distinct)


@dataclass(frozen=True)
class EnergyGaps:
    G_st: float
    G_ss: float

    @property
    def difference(self) -> float:
        """G_ss - G_st, which changes sign where the two excitations cross."""
        return self.G_ss - self.G_st


def energy_gaps(sol: EigenSolution) -> EnergyGaps:
    """Singlet-triplet and singlet-singlet gaps.

    For an even number of sites the singlet is S=0 and the triplet S=1; for
    an odd number the roles pass to the lowest spin 1/2 and to 3/2.  ``G_ss``
    is measured to the second lowest level holding a singlet.

    Raises
    ------
    InsufficientLevelsError
        If ``sol`` lacks the lowest triplet, or a second singlet level that a
        larger ``k`` could supply.  A complete spectrum without a second
        singlet level gives ``G_ss = nan``.
    """
    n = _n_sites(sol.eigenvectors.shape[0])
    s_low = 0.0 if n % 2 == 0 else 0.5
    singlets, triplets = [], []
    for i, energy in enumerate(sol.level_energies):
        spins = level_spins(sol, i)
        if s_low in spins:
            singlets.append(energy)
        if s_low + 1 in spins:
            triplets.append(energy)
    complete = sol.k == sol.eigenvectors.shape[0]
    if not singlets or not triplets or (len(singlets) < 2 and not complete):
        raise InsufficientLevelsError(
            f"{len(singlets)} S={s_low:g} and {len(triplets)} S={s_low + 1:g} levels among "
            f"{sol.k} states; a larger k is needed"
        )
    # a full spectrum with a single singlet level (two sites) has no G_ss
    g_ss = singlets[1] - singlets[0] if len(singlets) > 1 else np.nan
    return EnergyGaps(G_st=float(triplets[0] - singlets[0]), G_ss=float(g_ss))
