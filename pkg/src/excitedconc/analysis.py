"""Parameter sweeps, discontinuity and level-crossing location, scaling fits.

Every alpha point is solved independently from the same seed, so a sweep is
deterministic and any sub-range can be recomputed on its own.  Level-1
identity across alpha is judged from its degeneracy, total spin and slope
dE/dalpha, the latter from the Hellmann-Feynman expectation of the J2 term.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import least_squares

from .eigensolver import DEFAULT_SEED, EigenSolution, lowest_k
from .entanglement import (
    EnergyGaps,
    LevelMixture,
    concurrence,
    energy_gaps,
    level_spins,
    reduced_two_qubit,
    spin_label,
)
from .errors import (
    ClassificationError,
    ConfigurationError,
    ContractViolation,
    DataError,
    DomainError,
    FitError,
    InsufficientLevelsError,
    MultipletOverflowError,
    SolverError,
)
from .hamiltonian import HamiltonianOperator, apply, hamiltonian
from .lattice import Coupling, ModelKind, ModelSpec

__all__ = [
    "DEFAULT_GRIDS",
    "JUMP_THRESHOLD",
    "RESOLUTION",
    "Flag",
    "Side",
    "PointResult",
    "solve_point",
    "SweepResult",
    "sweep",
    "Discontinuity",
    "DiscontinuityReport",
    "locate_discontinuities",
    "assign_sides",
    "Crossing",
    "LevelDiagram",
    "energy_levels",
    "refine_crossing",
    "gaps_across",
    "locate_zero_onset",
    "RationalFit",
    "LogLogFit",
    "fit_rational_22",
    "fit_loglog",
    "alpha_grid",
]

log = logging.getLogger(__name__)

JUMP_THRESHOLD = 0.02
RESOLUTION = 1e-5
MIN_STATES = 3
MAX_STATES = 96
NEAR_CROSSING_FACTOR = 10.0
PAIR = (0, 1)

DEFAULT_GRIDS = {
    ModelKind.CHAIN1D: (0.0, 0.35, 0.0025),
    ModelKind.SQUARE2D: (0.0, 0.8, 0.005),
    ModelKind.SHASTRY_SUTHERLAND: (0.8, 1.8, 0.005),
}


class Flag:
    OK = "ok"
    NEAR_CROSSING = "near_crossing"
    SOLVER_ERROR = "solver_error"


class Side:
    SINGLE = "single"
    RIGHT = "right_shifting"
    LEFT = "left_shifting"


def alpha_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive grid ``start, start+step, ...`` up to ``stop`` (tolerant to rounding)."""
    if not step > 0:
        raise ConfigurationError(f"step must be positive, got {step}")
    if not stop >= start:
        raise ConfigurationError(f"empty range {start}:{stop}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(n), 12)


# ----------------------------------------------------------------------------- points


@dataclass(frozen=True)
class PointResult:
    """Everything recorded for one alpha.

    ``level_energies``, ``degeneracies`` and ``spins`` cover every complete
    level returned by the solver; ``slopes`` (dE/dalpha) the first three.
    Concurrences are NaN where the flag makes them undefined.
    """

    alpha: float
    eigenvalues: np.ndarray
    level_energies: tuple = ()
    degeneracies: tuple = ()
    spins: tuple = ()
    slopes: tuple = ()
    C0: float = math.nan
    C1: float = math.nan
    flag: str = Flag.OK
    degeneracy_tol: float = 0.0
    gaps: EnergyGaps | None = field(default=None, compare=False)
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.flag == Flag.OK

    @property
    def d1(self) -> int:
        return self.degeneracies[1] if len(self.degeneracies) > 1 else 0

    def character(self, level: int = 1) -> tuple:
        """(d, spin label) of a level, the discrete part of its identity."""
        return (self.degeneracies[level], self.spins[level])


def _alpha_derivative(h: HamiltonianOperator) -> HamiltonianOperator:
    # dH/dalpha = j1 * (J2 bond sum)
    bonds = tuple(b for b in h.bonds if b.coupling is Coupling.J2)
    return HamiltonianOperator(bonds, 0.0, h.j1, h.n_sites)


def _level_slope(dh: HamiltonianOperator, x: np.ndarray) -> float:
    if not dh.bonds:
        return 0.0
    return float(np.einsum("ij,ij->", x, apply(dh, x)) / x.shape[1])


def _solve_levels(h, k, seed, n_levels):
    """Solve with k grown until ``n_levels`` complete levels are present."""
    kk = max(k, MIN_STATES)
    while True:
        try:
            sol = lowest_k(h, min(kk, h.dim), seed)
        except MultipletOverflowError:
            if kk >= MAX_STATES:
                raise
            kk += 8
            continue
        if sol.n_levels >= n_levels or sol.k >= min(h.dim, MAX_STATES):
            return sol
        kk = sol.k + 1


def solve_point(
    spec: ModelSpec,
    alpha: float,
    k: int = MIN_STATES,
    seed: int = DEFAULT_SEED,
    *,
    pair: tuple[int, int] = PAIR,
    n_levels: int = 3,
    gaps: bool = False,
) -> PointResult:
    """Solve one alpha and evaluate C0, C1 on ``pair``.

    Solver failures are captured in the flag rather than raised.

    Parameters
    ----------
    k : int
        Minimum number of eigenpairs; more are computed when fewer than
        ``n_levels`` complete levels would result.
    gaps : bool
        Also evaluate the singlet-triplet and singlet-singlet gaps, growing
        the solve until they are defined.
    """
    spec = spec.with_alpha(alpha)
    h = hamiltonian(spec)
    try:
        sol = _solve_levels(h, k, seed, n_levels)
        gap = None
        if gaps:
            sol, gap = _solve_gaps(h, sol, seed)
    except SolverError as exc:
        log.warning("alpha=%g: %s", alpha, exc)
        return PointResult(alpha=float(alpha), eigenvalues=np.empty(0), flag=Flag.SOLVER_ERROR,
                           message=str(exc))
    return _point_from_solution(float(alpha), sol, h, pair, gap)


def _solve_gaps(h, sol, seed):
    while True:
        try:
            return sol, energy_gaps(sol)
        except InsufficientLevelsError:
            if sol.k >= min(h.dim, MAX_STATES):
                return sol, None
            sol = _solve_levels(h, min(2 * sol.k, MAX_STATES), seed, sol.n_levels + 1)


def _point_from_solution(alpha, sol: EigenSolution, h, pair, gap) -> PointResult:
    tol = sol.degeneracy_tol
    dh = _alpha_derivative(h)
    spins = []
    for i in range(sol.n_levels):
        try:
            spins.append(spin_label(level_spins(sol, i)))
        except ClassificationError:
            spins.append("?")
    slopes = tuple(_level_slope(dh, sol.level_vectors(i)) for i in range(min(3, sol.n_levels)))
    gaps_ = [sol.level_gap(i) for i in range(min(2, sol.n_levels))]
    near = [g <= NEAR_CROSSING_FACTOR * tol for g in gaps_]
    flag = Flag.NEAR_CROSSING if any(near) else Flag.OK
    c0 = c1 = math.nan
    try:
        if sol.n_levels >= 1 and not near[0]:
            c0 = concurrence(reduced_two_qubit(LevelMixture.from_level(sol, 0), *pair))
        if sol.n_levels >= 3 and not any(near):
            c1 = concurrence(reduced_two_qubit(LevelMixture.from_level(sol, 1), *pair))
    except DataError as exc:
        return PointResult(alpha=alpha, eigenvalues=sol.eigenvalues, flag=Flag.SOLVER_ERROR,
                           message=str(exc))
    return PointResult(
        alpha=alpha,
        eigenvalues=sol.eigenvalues,
        level_energies=tuple(float(e) for e in sol.level_energies),
        degeneracies=sol.degeneracies,
        spins=tuple(spins),
        slopes=slopes,
        C0=c0,
        C1=c1,
        flag=flag,
        degeneracy_tol=tol,
        gaps=gap,
    )


# ----------------------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class SweepResult:
    """Per-alpha records of one model instance.

    ``model`` carries the lattice and J1; its own alpha is irrelevant.
    """

    model: ModelSpec
    alphas: np.ndarray
    records: tuple
    k: int = MIN_STATES
    seed: int = DEFAULT_SEED
    pair: tuple = PAIR

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=float)
        if a.size != len(self.records):
            raise ContractViolation("one record per alpha expected")
        if a.size > 1 and not np.all(np.diff(a) > 0):
            raise ContractViolation("alphas must be strictly ascending")
        object.__setattr__(self, "alphas", a)

    @property
    def C0(self) -> np.ndarray:
        return np.array([r.C0 for r in self.records])

    @property
    def C1(self) -> np.ndarray:
        return np.array([r.C1 for r in self.records])

    def solve(self, alpha: float) -> PointResult:
        """Solve an extra alpha with this sweep's settings."""
        return solve_point(self.model, alpha, self.k, self.seed, pair=self.pair)


def sweep(
    model: ModelSpec,
    alphas: Iterable[float],
    k: int = MIN_STATES,
    seed: int = DEFAULT_SEED,
    *,
    pair: tuple[int, int] = PAIR,
) -> SweepResult:
    """Solve every alpha of an ascending grid.

    Parameters
    ----------
    model : ModelSpec
        Lattice, size and J1; alpha is taken from the grid.
    k : int
        Minimum number of eigenpairs per point, at least 3.
    """
    if k < MIN_STATES:
        raise ContractViolation(f"k must be at least {MIN_STATES}, got {k}")
    alphas = np.asarray(list(alphas), dtype=float)
    if alphas.size == 0:
        raise ContractViolation("empty alpha grid")
    if alphas.size > 1 and not np.all(np.diff(alphas) > 0):
        raise ContractViolation("alpha grid must be strictly ascending")
    records = []
    for a in alphas:
        records.append(solve_point(model, float(a), k, seed, pair=pair))
        log.info("alpha=%.6f C1=%.6f %s", a, records[-1].C1, records[-1].flag)
    return SweepResult(model, alphas, tuple(records), k, seed, tuple(pair))


# ----------------------------------------------------------------------------- discontinuities


@dataclass(frozen=True)
class Discontinuity:
    """One located jump of C1.

    ``limited`` is set when bisection stopped before ``resolution`` because
    every probe fell inside the near-crossing window of the two levels;
    the bracket is then as narrow as the degeneracy tolerance permits.
    ``flagged`` describes jumps that could not be refined at all.
    ``widths`` lists the bracket width before each bisection step.
    """

    alpha_star: float
    jump: float
    bracket: tuple[float, float]
    side: str = Side.SINGLE
    flagged: str = ""
    limited: bool = False
    widths: tuple = field(default=(), compare=False, repr=False)


@dataclass(frozen=True)
class DiscontinuityReport:
    locations: tuple = ()
    jump_threshold: float = JUMP_THRESHOLD
    resolution: float = RESOLUTION

    def __len__(self):
        return len(self.locations)

    @property
    def alphas(self) -> list[float]:
        return [loc.alpha_star for loc in self.locations]


def _usable(rec: PointResult) -> bool:
    return rec.ok and not math.isnan(rec.C1)


def _merged(rec: PointResult) -> bool:
    # two crossing levels fall inside the degeneracy tolerance and are
    # grouped as one level of mixed spin; C1 there interpolates the sides
    return any("+" in s for s in rec.spins[:2])


def _probe(solve, lo, hi, frac=0.5):
    """Solve inside (lo, hi), stepping off points where levels merge."""
    for shift in (0.0, 0.125, -0.125, 0.25, -0.25):
        mid = lo + (frac + shift) * (hi - lo)
        rec = solve(mid)
        if _usable(rec) or rec.flag == Flag.SOLVER_ERROR:
            return rec
    return rec


def locate_discontinuities(
    result: SweepResult,
    jump_threshold: float = JUMP_THRESHOLD,
    resolution: float = RESOLUTION,
    sides: Sequence[str] | None = None,
) -> DiscontinuityReport:
    """Find jumps of C1 between adjacent grid points and bisect each one.

    A pair of neighboring usable records whose C1 differ by at least
    ``jump_threshold`` is bisected, re-solving at midpoints and following
    the half holding the larger change, until the bracket is no wider than
    ``resolution``, or until a midpoint groups the two crossing levels
    into one (``limited``).  Jumps that shrink below the threshold on
    refinement were steep but continuous and are dropped.  Pairs separated by a
    flagged record at the grid boundary are reported with ``flagged`` set
    and left unrefined.

    Parameters
    ----------
    sides : sequence of str, optional
        Side labels for the located points, in ascending alpha; defaults to
        ``"single"`` for all of them.
    """
    recs = result.records
    idx = [i for i, r in enumerate(recs) if _usable(r)]
    if len(idx) < 2:
        raise ContractViolation("at least two valid sweep records are needed")
    found = []
    for i in (0, len(recs) - 1):
        # a jump hidden behind an unusable end point cannot be bracketed
        if not _usable(recs[i]):
            found.append(Discontinuity(float(result.alphas[i]), math.nan,
                                       (float(result.alphas[i]), float(result.alphas[i])),
                                       flagged=f"boundary record {recs[i].flag}"))
    for i, j in zip(idx, idx[1:]):
        a, b = recs[i], recs[j]
        if abs(b.C1 - a.C1) < jump_threshold:
            continue
        loc = _bisect_jump(result.solve, a, b, resolution)
        if loc is not None and (loc.flagged or loc.jump >= jump_threshold):
            found.append(loc)
    found.sort(key=lambda d: d.alpha_star)
    if sides is not None:
        if len(sides) != len(found):
            raise ContractViolation(f"{len(sides)} side labels for {len(found)} locations")
        found = [replace(d, side=s) for d, s in zip(found, sides)]
    return DiscontinuityReport(tuple(found), jump_threshold, resolution)


def _bisect_jump(solve, lo: PointResult, hi: PointResult, resolution: float):
    flagged, limited = "", False
    widths = []
    while hi.alpha - lo.alpha > resolution:
        widths.append(hi.alpha - lo.alpha)
        mid = _probe(solve, lo.alpha, hi.alpha)
        if mid.flag == Flag.NEAR_CROSSING or _merged(mid):
            limited = True
            break
        if not _usable(mid):
            flagged = f"unresolved at alpha={mid.alpha:.8g} ({mid.flag})"
            break
        if abs(mid.C1 - lo.C1) >= abs(hi.C1 - mid.C1):
            hi = mid
        else:
            lo = mid
    return Discontinuity(
        alpha_star=0.5 * (lo.alpha + hi.alpha),
        jump=abs(hi.C1 - lo.C1),
        bracket=(lo.alpha, hi.alpha),
        flagged=flagged,
        limited=limited,
        widths=tuple(widths),
    )


def assign_sides(report: DiscontinuityReport, n_sites: int) -> DiscontinuityReport:
    """Label odd-chain discontinuities: the lower one shifts right with N, the upper left.

    Even sizes, and reports without exactly two located points, are labeled
    ``"single"``.
    """
    locs = list(report.locations)
    if n_sites % 2 and len(locs) == 2:
        locs = [replace(locs[0], side=Side.RIGHT), replace(locs[1], side=Side.LEFT)]
    else:
        locs = [replace(loc, side=Side.SINGLE) for loc in locs]
    return replace(report, locations=tuple(locs))


# ----------------------------------------------------------------------------- levels


@dataclass(frozen=True)
class Crossing:
    """A change of identity of the first excited level between two alphas.

    ``levels`` is (1, 2) when the first and second excited levels swap and
    (0, 1) when the ground level is involved.
    """

    alpha: float
    bracket: tuple[float, float]
    levels: tuple[int, int]
    before: tuple
    after: tuple
    flagged: str = ""
    limited: bool = False


@dataclass(frozen=True)
class LevelDiagram:
    model: ModelSpec
    alphas: np.ndarray
    records: tuple
    crossings: tuple

    def energies(self, n_levels: int | None = None) -> np.ndarray:
        """(len(alphas), n_levels) distinct level energies, NaN where missing."""
        n = n_levels or max((len(r.level_energies) for r in self.records), default=0)
        out = np.full((len(self.records), n), np.nan)
        for i, r in enumerate(self.records):
            e = r.level_energies[:n]
            out[i, : len(e)] = e
        return out


def _tangents_cross(p: PointResult, q: PointResult, lower: int) -> bool:
    """Whether levels ``lower`` and ``lower + 1`` exchange order between p and q.

    Each level is continued along its tangent from both ends; a crossing
    shows up as the continued levels reversing their order.
    """
    if len(p.slopes) < lower + 2 or len(q.slopes) < lower + 2:
        return False
    dx = q.alpha - p.alpha
    fwd = (p.level_energies[lower + 1] + p.slopes[lower + 1] * dx) - (
        p.level_energies[lower] + p.slopes[lower] * dx
    )
    bwd = (q.level_energies[lower + 1] - q.slopes[lower + 1] * dx) - (
        q.level_energies[lower] - q.slopes[lower] * dx
    )
    return fwd < 0 or bwd < 0


def _crossing_between(p: PointResult, q: PointResult) -> tuple[int, int] | None:
    if not (p.ok and q.ok):
        return None
    if _tangents_cross(p, q, 0):
        return (0, 1)
    if _tangents_cross(p, q, 1):
        return (1, 2)
    if len(p.spins) > 1 and len(q.spins) > 1 and p.character(1) != q.character(1):
        return (1, 2)
    return None


def refine_crossing(
    spec: ModelSpec,
    lo: PointResult,
    hi: PointResult,
    levels: tuple[int, int],
    resolution: float = RESOLUTION,
    k: int = MIN_STATES,
    seed: int = DEFAULT_SEED,
) -> Crossing:
    """Bisect a bracket in which the first excited level changes identity.

    At each midpoint the first excited level is attributed to the side whose
    slope (and degeneracy and spin) it matches; a slope jump that persists
    while the bracket shrinks is what separates a crossing from smooth
    curvature.
    """

    def solve(a):
        return solve_point(spec, a, max(k, len(lo.eigenvalues)), seed)

    lvl = levels[0] if levels == (0, 1) else 1
    flagged, limited = "", False
    while hi.alpha - lo.alpha > resolution:
        mid = _probe(solve, lo.alpha, hi.alpha)
        if mid.flag == Flag.NEAR_CROSSING:
            limited = True
            break
        if not mid.ok or len(mid.slopes) <= lvl:
            flagged = f"ambiguous at alpha={mid.alpha:.8g} ({mid.flag})"
            break
        if _tangents_cross(lo, mid, levels[0]):
            hi = mid
        elif _tangents_cross(mid, hi, levels[0]):
            lo = mid
        elif mid.character(lvl) != lo.character(lvl):
            hi = mid
        elif mid.character(lvl) != hi.character(lvl):
            lo = mid
        elif abs(mid.slopes[lvl] - lo.slopes[lvl]) > abs(mid.slopes[lvl] - hi.slopes[lvl]):
            hi = mid
        else:
            lo = mid
    return Crossing(
        alpha=0.5 * (lo.alpha + hi.alpha),
        bracket=(lo.alpha, hi.alpha),
        levels=levels,
        before=lo.character(1) + (lo.slopes[1],),
        after=hi.character(1) + (hi.slopes[1],),
        flagged=flagged,
        limited=limited,
    )


def energy_levels(
    model: ModelSpec,
    alphas: Iterable[float],
    k: int = MIN_STATES,
    seed: int = DEFAULT_SEED,
    resolution: float = RESOLUTION,
    *,
    result: SweepResult | None = None,
    include_ground: bool = False,
) -> LevelDiagram:
    """Level curves over a grid and the crossings of the first two excited levels.

    Parameters
    ----------
    result : SweepResult, optional
        Reuse the records of an existing sweep over the same grid.
    include_ground : bool
        Also report crossings that involve the ground level.
    """
    if k < MIN_STATES:
        raise ContractViolation(f"k must be at least {MIN_STATES}, got {k}")
    if result is None:
        result = sweep(model, alphas, k, seed)
    recs = result.records
    crossings = []
    for p, q in zip(recs, recs[1:]):
        levels = _crossing_between(p, q)
        if levels is None or (levels == (0, 1) and not include_ground):
            continue
        crossings.append(refine_crossing(model, p, q, levels, resolution, k, seed))
    return LevelDiagram(model, result.alphas, recs, tuple(crossings))


def gaps_across(
    spec: ModelSpec, bracket: tuple[float, float], k: int = MIN_STATES, seed: int = DEFAULT_SEED
) -> tuple[EnergyGaps | None, EnergyGaps | None]:
    """Singlet-triplet and singlet-singlet gaps at both ends of a bracket.

    An end is None when its solve failed or no triplet turned up within
    the state cap.
    """
    ends = (solve_point(spec, a, k, seed, gaps=True) for a in bracket)
    return tuple(p.gaps if p.flag != Flag.SOLVER_ERROR else None for p in ends)


def locate_zero_onset(
    result: SweepResult,
    which: str = "C0",
    resolution: float = 1e-4,
    zero: float = 1e-12,
) -> float | None:
    """First alpha at which a concurrence curve drops to zero and stays there.

    The last positive and first vanishing grid points are bisected down to
    ``resolution``; returns None if the curve never vanishes or is zero at the
    start of the grid.
    """
    if which not in ("C0", "C1"):
        raise ContractViolation("which must be 'C0' or 'C1'")
    vals = getattr(result, which)
    good = ~np.isnan(vals)
    zero_mask = good & (vals <= zero)
    pos = np.flatnonzero(good & ~zero_mask)
    if not pos.size or pos[-1] == len(vals) - 1:
        return None
    after = np.flatnonzero(zero_mask[pos[-1] + 1 :])
    if not after.size:
        return None
    lo, hi = result.alphas[pos[-1]], result.alphas[pos[-1] + 1 + after[0]]
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        v = getattr(result.solve(mid), which)
        if math.isnan(v):
            break
        if v <= zero:
            hi = mid
        else:
            lo = mid
    return float(0.5 * (lo + hi))


# ----------------------------------------------------------------------------- fits


@dataclass(frozen=True)
class RationalFit:
    """F(N) = (p1 N^2 + p2 N + p3) / (N^2 + q1 N + q2); F -> p1 as N -> inf."""

    p1: float
    p2: float
    p3: float
    q1: float
    q2: float
    sse: float
    residuals: np.ndarray

    @property
    def limit(self) -> float:
        return self.p1

    @property
    def params(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.p3, self.q1, self.q2])

    def __call__(self, n):
        return _rational(self.params, np.asarray(n, dtype=float))


@dataclass(frozen=True)
class LogLogFit:
    """log2|alpha* - alpha_c| = beta log2 N + c."""

    beta: float
    c: float
    sse: float
    residuals: np.ndarray
    alpha_c: float
    side: str

    @property
    def prefactor(self) -> float:
        return 2.0**self.c

    def __call__(self, n):
        sign = 1.0 if self.side == "above" else -1.0
        return self.alpha_c + sign * self.prefactor * np.asarray(n, dtype=float) ** self.beta


def _rational(p, n):
    return (p[0] * n * n + p[1] * n + p[2]) / (n * n + p[3] * n + p[4])


def _as_points(points) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(points, dict):
        points = sorted(points.items())
    arr = np.asarray(list(points), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ContractViolation("points must be (N, alpha_star) pairs")
    order = np.argsort(arr[:, 0], kind="stable")
    return arr[order, 0], arr[order, 1]


def fit_rational_22(points, restarts: int = 20, seed: int = DEFAULT_SEED) -> RationalFit:
    """Least-squares (2,2) rational fit of alpha*(N); the limit is p1.

    The first start uses p1 = alpha* at the largest N and 0.5 for the other
    parameters, followed by ``restarts`` seeded random starts; the lowest SSE
    wins.

    Raises
    ------
    FitError
        With fewer than five points, or when no start gives a finite fit
        whose denominator stays away from zero at the data.
    """
    n, y = _as_points(points)
    if n.size < 5:
        raise FitError(f"rational (2,2) fit needs at least 5 points, got {n.size}")
    rng = np.random.default_rng(seed)
    starts = [np.array([y[-1], 0.5, 0.5, 0.5, 0.5])]
    for _ in range(restarts):
        starts.append(np.concatenate([[y[-1] + 0.01 * rng.standard_normal()],
                                      rng.uniform(-2.0, 2.0, 4)]))
    best, trace = None, []
    for x0 in starts:
        try:
            res = least_squares(lambda p: _rational(p, n) - y, x0, method="lm",
                                xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=20000)
        except (ValueError, np.linalg.LinAlgError) as exc:
            trace.append(str(exc))
            continue
        denom = n * n + res.x[3] * n + res.x[4]
        sse = float(np.sum(res.fun**2))
        trace.append(f"sse={sse:.3e} status={res.status}")
        if not (np.all(np.isfinite(res.x)) and np.isfinite(sse)):
            continue
        if np.min(np.abs(denom)) < 1e-8 * np.max(n * n):
            continue
        if best is None or sse < best[1]:
            best = (res, sse)
    if best is None:
        raise FitError("rational fit failed from every start: " + "; ".join(trace[-5:]))
    res, sse = best
    return RationalFit(*map(float, res.x), sse=sse, residuals=res.fun.copy())


def fit_loglog(points, alpha_c: float, side: str = "above") -> LogLogFit:
    """Straight-line fit of log2|alpha* - alpha_c| against log2 N.

    Parameters
    ----------
    side : {"above", "below"}
        Whether every alpha* must exceed ``alpha_c`` or lie below it.

    Raises
    ------
    DomainError
        Naming the first point on the wrong side of ``alpha_c``.
    FitError
        With fewer than three points.
    """
    if side not in ("above", "below"):
        raise ContractViolation("side must be 'above' or 'below'")
    n, y = _as_points(points)
    if n.size < 3:
        raise FitError(f"log-log fit needs at least 3 points, got {n.size}")
    dist = y - alpha_c if side == "above" else alpha_c - y
    for ni, yi, di in zip(n, y, dist):
        if not di > 0:
            rel = ">" if side == "above" else "<"
            raise DomainError(
                f"point N={ni:g}, alpha*={yi!r} violates alpha* {rel} alpha_c={alpha_c!r}"
            )
    x, ly = np.log2(n), np.log2(dist)
    design = np.column_stack([x, np.ones_like(x)])
    (beta, c), *_ = np.linalg.lstsq(design, ly, rcond=None)
    resid = ly - (beta * x + c)
    return LogLogFit(float(beta), float(c), float(resid @ resid), resid, float(alpha_c), side)
