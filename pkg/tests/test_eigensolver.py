import numpy as np
import pytest
from scipy.sparse.linalg import LinearOperator, eigsh

from excitedconc import eigensolver
from excitedconc.eigensolver import dense_all, group_levels, lowest_k
from excitedconc.entanglement import level_spins
from excitedconc.errors import ContractViolation, MultipletOverflowError, SolverError
from excitedconc.hamiltonian import MagnetizationSector, hamiltonian, sector_apply, single_bond
from excitedconc.lattice import ModelSpec

import oracles


def spec_id(spec):
    return f"{spec.kind.value}-{spec.n_sites}-{spec.alpha:g}"


def chain(n, alpha):
    return hamiltonian(ModelSpec("chain1d", n, alpha=alpha))


@pytest.mark.parametrize("method", ["sector", "full"])
def test_two_site_spectrum(method):
    sol = lowest_k(single_bond(), 4, method=method)
    np.testing.assert_allclose(sol.eigenvalues, [-3, 1, 1, 1], atol=1e-12)
    assert sol.degeneracies == (1, 3)


@pytest.mark.parametrize("method", ["sector", "full"])
def test_truncated_multiplet_is_completed(method):
    sol = lowest_k(single_bond(), 2, method=method)
    assert sol.k == 4 and sol.degeneracies == (1, 3)


def test_heisenberg_ring_first_excited_triplet():
    sol = lowest_k(chain(8, 0.0), 2)
    assert sol.degeneracies[1] == 3
    assert level_spins(sol, 1) == (1.0, 1.0, 1.0)


def test_twelve_site_chain_matches_dense_oracle():
    h = chain(12, 0.3)
    ref, _ = oracles.sector_eigh(h.bonds, h.j1, h.j2, 12)
    sol = lowest_k(h, 6)
    np.testing.assert_allclose(sol.eigenvalues, ref[: sol.k], rtol=1e-10)


def test_dense_all_examples():
    sol = dense_all(single_bond())
    np.testing.assert_allclose(sol.eigenvalues, [-3, 1, 1, 1], atol=1e-12)
    mg = dense_all(chain(8, 0.5))
    assert mg.degeneracies[0] == 2
    assert mg.eigenvalues[0] == pytest.approx(-12.0, abs=1e-10)
    assert abs(dense_all(chain(10, 0.37)).eigenvalues.sum()) < 1e-9


def test_dense_all_refuses_large_systems():
    with pytest.raises(ContractViolation):
        dense_all(chain(15, 0.1))


@pytest.mark.parametrize("method", ["sector", "full"])
def test_repeated_solves_are_bitwise_identical(method):
    h = chain(10, 0.27)
    a = lowest_k(h, 5, seed=7, method=method)
    b = lowest_k(h, 5, seed=7, method=method)
    assert a.eigenvalues.tobytes() == b.eigenvalues.tobytes()
    assert a.eigenvectors.tobytes() == b.eigenvectors.tobytes()


def test_seed_changes_vectors_not_energies():
    h = chain(10, 0.27)
    a = lowest_k(h, 5, seed=1)
    b = lowest_k(h, 5, seed=2)
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, rtol=1e-12)


@pytest.mark.parametrize(
    "spec",
    [
        ModelSpec("chain1d", 9, alpha=0.2),
        ModelSpec("chain1d", 14, alpha=0.45),
        ModelSpec("chain1d", 16, alpha=0.2425),
        ModelSpec("square2d", 16, alpha=0.3),
        ModelSpec("ss", 16, alpha=1.3),
    ],
    ids=spec_id,
)
def test_solution_invariants(spec):
    h = hamiltonian(spec)
    sol = lowest_k(h, 6)
    X = sol.eigenvectors
    assert np.all(np.diff(sol.eigenvalues) >= 0)
    assert np.abs(X.T @ X - np.eye(sol.k)).max() <= 1e-10
    res = np.linalg.norm(h @ X - X * sol.eigenvalues, axis=0)
    assert np.all(res <= 1e-9 * np.maximum(1, np.abs(sol.eigenvalues)))
    for i, lv in enumerate(sol.levels):
        e = sol.eigenvalues[list(lv)]
        assert e.max() - e.min() <= sol.degeneracy_tol
        if i + 1 < sol.n_levels:
            assert sol.level_gap(i) > sol.degeneracy_tol


def test_odd_chain_levels_are_even_dimensional():
    sol = lowest_k(chain(9, 0.2), 6)
    assert all(d % 2 == 0 for d in sol.degeneracies)


@pytest.mark.parametrize("spec", [ModelSpec("chain1d", 16, alpha=0.3),
                                  ModelSpec("square2d", 16, alpha=0.55)], ids=spec_id)
def test_sixteen_sites_against_arpack(spec):
    # ARPACK on the Sz=0 block; its lowest distinct energies must reappear
    h = hamiltonian(spec)
    sector = MagnetizationSector(16, 8)
    op = LinearOperator((sector.dim, sector.dim), matvec=lambda v: sector_apply(h, sector, v),
                        dtype=float)
    ref = np.sort(eigsh(op, k=6, which="SA", tol=1e-13, v0=np.ones(sector.dim))[0])
    sol = lowest_k(h, 6)
    ref_levels = [ref[lv[0]] for lv in group_levels(ref, 1e-7)]
    n = min(3, sol.n_levels)
    np.testing.assert_allclose(sol.level_energies[:n], ref_levels[:n], rtol=1e-10)


def test_iteration_cap_raises_with_residuals(monkeypatch):
    monkeypatch.setattr(eigensolver, "MATVECS_PER_PAIR", 1)
    with pytest.raises(SolverError) as info:
        lowest_k(chain(12, 0.3), 4)
    assert info.value.residuals is not None


def test_multiplet_overflow():
    with pytest.raises(MultipletOverflowError):
        lowest_k(single_bond(), 2, max_extra=0)


@pytest.mark.parametrize("kwargs", [dict(k=0), dict(k=5), dict(k=2, method="lobpcg"),
                                    dict(k=2, block_size=0)])
def test_bad_requests(kwargs):
    with pytest.raises(ContractViolation):
        lowest_k(single_bond(), **kwargs)


def test_group_levels():
    assert group_levels(np.array([0.0, 1e-9, 1.0, 1.0, 2.0]), 1e-8) == ((0, 1), (2, 3), (4,))
