"""Coupling graphs for the three periodic spin-1/2 models.

Sites of the 4x4 lattices are numbered row-major, ``site = 4 * row + col``,
with both axes wrapped.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import ConfigurationError

__all__ = [
    "ModelKind",
    "Coupling",
    "Bond",
    "ModelSpec",
    "BondList",
    "build_bonds",
    "LATTICE_SIDE",
]

LATTICE_SIDE = 4
CHAIN_SIZES = range(3, 17)


class ModelKind(str, enum.Enum):
    CHAIN1D = "chain1d"
    SQUARE2D = "square2d"
    SHASTRY_SUTHERLAND = "ss"

    @classmethod
    def parse(cls, value: "str | ModelKind") -> "ModelKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise ConfigurationError(f"unknown model {value!r}; expected one of {names}") from None


class Coupling(str, enum.Enum):
    J1 = "J1"
    J2 = "J2"


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    coupling: Coupling

    def __post_init__(self):
        if self.a == self.b:
            raise ConfigurationError(f"bond endpoints coincide: {self.a}")


BondList = tuple  # tuple[Bond, ...]


@dataclass(frozen=True)
class ModelSpec:
    """One model instance: lattice kind, size and couplings.

    ``alpha`` is the ratio J2/J1; ``j1`` sets the energy unit.
    """

    kind: ModelKind
    n_sites: int
    j1: float = 1.0
    alpha: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind.parse(self.kind))
        if int(self.n_sites) != self.n_sites:
            raise ConfigurationError(f"n_sites must be an integer, got {self.n_sites!r}")
        object.__setattr__(self, "n_sites", int(self.n_sites))
        if self.kind is ModelKind.CHAIN1D:
            if self.n_sites not in CHAIN_SIZES:
                raise ConfigurationError(
                    f"chain1d supports 3 <= N <= 16, got N={self.n_sites}"
                )
        elif self.n_sites != LATTICE_SIDE**2:
            raise ConfigurationError(
                f"{self.kind.value} is defined on the 4x4 torus only (N=16), got N={self.n_sites}"
            )
        if not self.j1 > 0:
            raise ConfigurationError(f"j1 must be positive, got {self.j1}")
        if not self.alpha >= 0:
            raise ConfigurationError(f"alpha must be >= 0, got {self.alpha}")

    @property
    def j2(self) -> float:
        return self.alpha * self.j1

    def with_alpha(self, alpha: float) -> "ModelSpec":
        return ModelSpec(self.kind, self.n_sites, self.j1, float(alpha))


def _site(row: int, col: int) -> int:
    L = LATTICE_SIDE
    return L * (row % L) + (col % L)


def _chain_bonds(n: int) -> list[Bond]:
    # one summand per i, so short rings may repeat a pair
    nn = [Bond(i, (i + 1) % n, Coupling.J1) for i in range(n)]
    nnn = [Bond(i, (i + 2) % n, Coupling.J2) for i in range(n)]
    return nn + nnn


def _grid_bonds() -> list[Bond]:
    L = LATTICE_SIDE
    bonds = []
    for r in range(L):
        for c in range(L):
            bonds.append(Bond(_site(r, c), _site(r, c + 1), Coupling.J1))
            bonds.append(Bond(_site(r, c), _site(r + 1, c), Coupling.J1))
    return bonds


def _square_bonds() -> list[Bond]:
    L = LATTICE_SIDE
    diag = []
    for r in range(L):
        for c in range(L):
            # both diagonals of plaquette with top-left corner (r, c)
            diag.append(Bond(_site(r, c), _site(r + 1, c + 1), Coupling.J2))
            diag.append(Bond(_site(r, c + 1), _site(r + 1, c), Coupling.J2))
    return _grid_bonds() + diag


def _shastry_sutherland_bonds() -> list[Bond]:
    L = LATTICE_SIDE
    dimers = []
    for r in range(L):
        for c in range(L):
            if (r + c) % 2:
                continue
            if r % 2 == 0:
                dimers.append(Bond(_site(r, c), _site(r + 1, c + 1), Coupling.J2))
            else:
                dimers.append(Bond(_site(r, c + 1), _site(r + 1, c), Coupling.J2))
    return _grid_bonds() + dimers


def build_bonds(spec: ModelSpec) -> BondList:
    """Return the ordered bond list of ``spec`` (J1 bonds first, then J2)."""
    if spec.kind is ModelKind.CHAIN1D:
        bonds = _chain_bonds(spec.n_sites)
    elif spec.kind is ModelKind.SQUARE2D:
        bonds = _square_bonds()
    else:
        bonds = _shastry_sutherland_bonds()
    return tuple(bonds)
