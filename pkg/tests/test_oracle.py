import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from erconvert.adiabatic import Ensemble, effective_coupling
from erconvert.errors import IdentificationError, SingularBlock, SizeError
from erconvert.oracle import (
    MAX_ATOMS,
    avoided_crossing_splitting,
    build_single_excitation,
    compare,
    compensated_model,
    coupling_mask,
    oracle_effective_coupling,
    oracle_pulls,
    photon_doublet,
    random_adiabatic_ensemble,
)

from conftest import atom, random_ensemble


def test_no_atoms():
    m = build_single_excitation([], 0.3, -0.2)
    np.testing.assert_array_equal(m.H, np.diag([0.3, -0.2]))
    assert avoided_crossing_splitting(build_single_excitation([])) == 0.0


def test_one_atom_structure():
    H = build_single_excitation([atom()], 0.0, 0.0).H
    assert H.shape == (4, 4)
    expected = np.array([
        [0, 0, 0, 3],
        [0, 0, 2, 0],
        [0, 2, 50, 1],
        [3, 0, 1, 100],
    ], dtype=complex)
    np.testing.assert_array_equal(H, expected)
    off = H - np.diag(np.diag(H))
    # three coupled pairs among the off-diagonal slots
    assert np.count_nonzero(off) == 6


def test_mask_shape():
    m = coupling_mask(3)
    assert m.shape == (8, 8) and np.array_equal(m, m.T)
    assert m.sum() == 8 + 2 * 9


def test_hermitian_random_complex(rng):
    ens = random_ensemble(rng, 25, ratio=0.3)
    m = build_single_excitation(ens, 1.0, -2.0)
    assert m.dim == 52
    assert np.max(np.abs(m.H - m.H.conj().T)) <= 1e-14 * np.max(np.abs(m.H))
    evals, evecs = np.linalg.eigh(m.H)
    np.testing.assert_allclose(np.sum(np.abs(evecs) ** 2, axis=0), 1.0, rtol=1e-12)


def test_size_limit():
    n = MAX_ATOMS + 1
    one = np.ones(n)
    with pytest.raises(SizeError):
        build_single_excitation(Ensemble(np.zeros((n, 3)), one, one, one, one, one))


def test_single_atom_oracle():
    m = build_single_excitation([atom()])
    s = oracle_effective_coupling(m)
    # hand elimination of the 2x2 atomic block gives 6/4999 exactly
    assert s == pytest.approx(6 / 4999, rel=1e-13)
    assert abs(s - 1.20024e-3) <= 0.004 * 1.20024e-3
    pa, pb = oracle_pulls(m)
    eff = effective_coupling([atom()])
    assert pa == pytest.approx(eff.pull_a, rel=1e-13)
    assert pb == pytest.approx(eff.pull_b, rel=1e-13)


def test_no_drive_no_coupling(rng):
    ens = random_ensemble(rng, 10)
    ens = Ensemble(ens.positions, ens.g_o, ens.g_mu, np.zeros(10), ens.delta_o, ens.delta_mu)
    assert oracle_effective_coupling(build_single_excitation(ens)) == 0


def test_resonant_block():
    with pytest.raises(SingularBlock):
        oracle_effective_coupling(build_single_excitation([atom(Omega=10.0, delta_o=10.0, delta_mu=10.0)]))


def test_single_atom_splitting():
    split = avoided_crossing_splitting(compensated_model([atom()]))
    assert split == pytest.approx(2 * 6 / 4999, rel=0.01)


def test_unidentifiable_photons():
    strong = atom(g_o=80.0, g_mu=40.0, Omega=1.0)
    with pytest.raises(IdentificationError):
        photon_doublet(build_single_excitation([strong]))


def test_twenty_atoms():
    rng = np.random.Generator(np.random.Philox(1))
    ens = random_adiabatic_ensemble(20, rng)
    res = compare(ens)
    assert res.rel_error_S <= res.bound_S
    split = avoided_crossing_splitting(compensated_model(ens))
    assert abs(split - 2 * abs(effective_coupling(ens).S_full)) <= res.max_ratio**2 * 2 * abs(res.S_full)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 20))
def test_oracle_vs_analytic(seed, n):
    res = compare(random_adiabatic_ensemble(n, np.random.Generator(np.random.Philox(seed))))
    assert res.max_ratio <= 0.05
    assert res.passed, res.to_dict()
