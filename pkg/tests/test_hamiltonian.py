import itertools

import numpy as np
import pytest

from excitedconc.errors import ContractViolation
from excitedconc.hamiltonian import (
    MagnetizationSector,
    all_pairs,
    apply,
    assemble_dense,
    dense_matrix,
    hamiltonian,
    lower_spin,
    raise_spin,
    sector_apply,
    single_bond,
    spin_squared,
    total_sz,
)
from excitedconc.lattice import ModelSpec, build_bonds

import oracles


def basis(n, x):
    v = np.zeros(2**n)
    v[x] = 1.0
    return v


def test_flip_term_on_two_sites():
    # |01> means site 1 down, site 0 up: index 0b01 = 1
    out = apply(single_bond(), basis(2, 0b01))
    np.testing.assert_allclose(out, 2 * basis(2, 0b10) - basis(2, 0b01))


def test_singlet_and_triplet_eigenvalues():
    h = single_bond()
    singlet = (basis(2, 0b01) - basis(2, 0b10)) / np.sqrt(2)
    np.testing.assert_allclose(apply(h, singlet), -3 * singlet)
    for t in (basis(2, 0), basis(2, 3), (basis(2, 1) + basis(2, 2)) / np.sqrt(2)):
        np.testing.assert_allclose(apply(h, t), t)


def test_coupling_scales_energy():
    h = single_bond(2.5)
    singlet = (basis(2, 1) - basis(2, 2)) / np.sqrt(2)
    np.testing.assert_allclose(apply(h, singlet), -7.5 * singlet)


def test_majumdar_ghosh_ground_energy():
    h = hamiltonian(ModelSpec("chain1d", 8, alpha=0.5))
    w = np.linalg.eigvalsh(dense_matrix(h))
    assert w[0] == pytest.approx(-12.0, abs=1e-10)


def test_dimer_product_is_exact_on_shastry_sutherland():
    spec = ModelSpec("ss", 16, alpha=1.7)
    dimers = [b for b in build_bonds(spec) if b.coupling.value == "J2"]
    psi = np.zeros(2**16)
    for bits in itertools.product((0, 1), repeat=len(dimers)):
        x, sign = 0, 1
        for d, bit in zip(dimers, bits):
            x |= 1 << (d.a if bit else d.b)
            sign = -sign if bit else sign
        psi[x] = sign
    psi /= np.linalg.norm(psi)
    np.testing.assert_allclose(apply(hamiltonian(spec), psi), -3 * 8 * 1.7 * psi, atol=1e-12)


@pytest.mark.parametrize(
    "spec",
    [ModelSpec("chain1d", n, alpha=a) for n, a in [(8, 0.0), (9, 0.3), (12, 0.7)]],
    ids=lambda s: f"{s.kind.value}-{s.n_sites}-{s.alpha:g}",
)
def test_column_assembly_matches_kronecker_construction(spec):
    h = hamiltonian(spec)
    np.testing.assert_array_equal(assemble_dense(h), dense_matrix(h))
    ref = oracles.kron_hamiltonian(h.bonds, h.j1, h.j2, h.n_sites).toarray()
    np.testing.assert_allclose(assemble_dense(h), ref, atol=1e-12)


@pytest.mark.parametrize("kind,shape", [("square", (3, 4)), ("ss", (2, 4))])
def test_small_torus_matches_kronecker_construction(kind, shape):
    from excitedconc.hamiltonian import HamiltonianOperator

    bonds = oracles.torus_bonds(*shape, kind)
    n = shape[0] * shape[1]
    h = HamiltonianOperator(bonds, 1.0, 0.8, n)
    ref = oracles.kron_hamiltonian(bonds, 1.0, 0.8, n).toarray()
    np.testing.assert_allclose(assemble_dense(h), ref, atol=1e-12)


def test_complex_vectors_keep_dtype():
    h = hamiltonian(ModelSpec("chain1d", 8, alpha=0.2))
    rng = np.random.default_rng(0)
    v = rng.normal(size=256) + 1j * rng.normal(size=256)
    out = apply(h, v)
    assert out.dtype == np.complex128
    np.testing.assert_allclose(out, apply(h, v.real) + 1j * apply(h, v.imag), atol=1e-12)


def test_block_application_matches_columns():
    h = hamiltonian(ModelSpec("chain1d", 10, alpha=0.4))
    block = np.random.default_rng(1).normal(size=(1024, 3))
    out = apply(h, block)
    for i in range(3):
        np.testing.assert_allclose(out[:, i], apply(h, block[:, i]), atol=1e-12)


def test_dimension_mismatch_is_contract_violation():
    h = hamiltonian(ModelSpec("chain1d", 8))
    with pytest.raises(ContractViolation):
        apply(h, np.ones(128))


def test_dense_refused_beyond_fourteen_sites():
    h = hamiltonian(ModelSpec("chain1d", 15))
    with pytest.raises(ContractViolation):
        dense_matrix(h)
    with pytest.raises(ContractViolation):
        assemble_dense(h)


def test_total_sz_examples():
    assert total_sz(basis(4, 0b0101)) == 0.0
    assert total_sz(basis(4, 0b1111)) == 2.0
    assert total_sz(basis(4, 0)) == -2.0
    assert total_sz((basis(2, 0b01) + basis(2, 0b00)) / np.sqrt(2)) == "mixed"
    with pytest.raises(ContractViolation):
        total_sz(np.zeros(4))


def test_sector_application_matches_full_space():
    h = hamiltonian(ModelSpec("chain1d", 10, alpha=0.3))
    sector = MagnetizationSector(10, 5)
    c = np.random.default_rng(2).normal(size=(sector.dim, 2))
    full = apply(h, sector.embed(c))
    np.testing.assert_allclose(full[sector.states], sector_apply(h, sector, c), atol=1e-12)
    assert np.abs(np.delete(full, sector.states, axis=0)).max() == 0


def test_spin_squared_on_two_sites():
    singlet = (basis(2, 1) - basis(2, 2)) / np.sqrt(2)
    np.testing.assert_allclose(spin_squared(singlet, 2), 0 * singlet, atol=1e-14)
    np.testing.assert_allclose(spin_squared(basis(2, 3), 2), 2 * basis(2, 3))


def test_ladder_operators():
    # S- |11> = |01> + |10>, and S+ undoes it up to the Casimir factor
    down = lower_spin(basis(2, 3), 2)
    np.testing.assert_allclose(down, basis(2, 1) + basis(2, 2))
    np.testing.assert_allclose(raise_spin(down, 2), 2 * basis(2, 3))
    # S+S- = S^2 - Sz^2 + Sz on a random 6-site vector
    v = np.random.default_rng(3).normal(size=64)
    sz = np.array([bin(x).count("1") - 3 for x in range(64)], dtype=float)
    lhs = raise_spin(lower_spin(v, 6), 6)
    rhs = spin_squared(v, 6) - sz**2 * v + sz * v
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_all_pairs_counts_every_pair_once():
    assert len(all_pairs(6).bonds) == 15
