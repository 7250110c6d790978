"""FCIDUMP parsing, spin-orbital expansion, core freezing, rotations."""

import numpy as np
import pytest

from vqepdft.fermion import ActiveSpaceSpec
from vqepdft.integrals import (
    FcidumpError,
    MoCoefficients,
    MolecularIntegrals,
    freeze_core,
    orbital_exp,
    parse_fcidump,
    read_mo_coefficients,
    rotate,
    spinorbital_tensors,
    write_fcidump,
    write_mo_coefficients,
)

from oracles import (
    fci_ground_energy_chemist,
    fci_ground_energy_spinorb,
    fci_matrix_spinorb,
    sector_determinants,
)

MINIMAL = """&FCI NORB=1,NELEC=2,MS2=0,&END
0.75 1 1 1 1
-1.25 1 1 0 0
0.5 0 0 0 0
"""


def random_integrals(n_orb, n_elec, seed=0):
    rng = np.random.default_rng(seed)
    h1 = rng.standard_normal((n_orb, n_orb)) * 0.5
    h1 = 0.5 * (h1 + h1.T)
    eri = rng.standard_normal((n_orb,) * 4) * 0.2
    for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
        eri = 0.5 * (eri + eri.transpose(perm))
    return MolecularIntegrals(n_orb, n_elec, 0, h1, eri, e_const=0.31)


def test_parse_minimal():
    ints = parse_fcidump(MINIMAL)
    assert ints.n_orb == 1 and ints.n_elec == 2 and ints.ms2 == 0
    assert np.isclose(ints.eri[0, 0, 0, 0], 0.75)
    assert np.isclose(ints.h1[0, 0], -1.25)
    assert np.isclose(ints.e_const, 0.5)


def test_symmetry_completion():
    text = """&FCI NORB=2,NELEC=2,MS2=0,&END
0.3 1 2 1 1
0.0 0 0 0 0
"""
    ints = parse_fcidump(text)
    for idx in [(0, 1, 0, 0), (1, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 0)]:
        assert np.isclose(ints.eri[idx], 0.3)


def test_parse_errors_carry_line_numbers():
    with pytest.raises(FcidumpError, match="line 2"):
        parse_fcidump("&FCI NORB=1,NELEC=1,&END\n0.5 1 3 0 0\n")
    with pytest.raises(FcidumpError, match="&END"):
        parse_fcidump("&FCI NORB=1,NELEC=1,\n")
    dup = (
        "&FCI NORB=2,NELEC=2,MS2=0,&END\n"
        "0.5 1 2 0 0\n"
        "0.7 2 1 0 0\n"
    )
    with pytest.raises(FcidumpError, match="duplicate"):
        parse_fcidump(dup)


def test_round_trip_lossless():
    ints = random_integrals(3, 4, seed=1)
    back = parse_fcidump(write_fcidump(ints))
    assert np.abs(back.h1 - ints.h1).max() < 1e-14
    assert np.abs(back.eri - ints.eri).max() < 1e-14
    assert abs(back.e_const - ints.e_const) < 1e-14


def test_spinorbital_expansion_single_orbital():
    ints = parse_fcidump(MINIMAL)
    spec = ActiveSpaceSpec(n_act=1, n_elec=2)
    h1_so, h2_so = spinorbital_tensors(ints, spec)
    # <alpha beta || alpha beta> = (11|11): exchange across spins vanishes
    assert np.isclose(h2_so[0, 1, 0, 1], 0.75)
    # full antisymmetry kills same-pair entries
    assert np.isclose(h2_so[0, 0, 0, 1], 0.0)
    assert np.isclose(h2_so[0, 1, 1, 1], 0.0)


def test_spinorbital_tensor_symmetries():
    ints = random_integrals(3, 2, seed=3)
    spec = ActiveSpaceSpec(n_act=3, n_elec=2)
    _, h2 = spinorbital_tensors(ints, spec)
    assert np.abs(h2 + h2.transpose(1, 0, 2, 3)).max() < 1e-14
    assert np.abs(h2 + h2.transpose(0, 1, 3, 2)).max() < 1e-14
    assert np.abs(h2 - h2.transpose(2, 3, 0, 1)).max() < 1e-14


def test_spinorbital_fci_matches_chemist_oracle():
    """Two independent formula routes to the same ground energy."""
    ints = random_integrals(2, 2, seed=7)
    spec = ActiveSpaceSpec(n_act=2, n_elec=2)
    h1_so, h2_so = spinorbital_tensors(ints, spec)
    e_phys = fci_ground_energy_spinorb(h1_so, h2_so, ints.e_const, 2)
    e_chem = fci_ground_energy_chemist(ints.h1, ints.eri, ints.e_const, 2, 2)
    assert np.isclose(e_phys, e_chem, atol=1e-10)


def test_freeze_core_identity():
    ints = random_integrals(2, 2, seed=2)
    out = freeze_core(ints, 0)
    assert np.abs(out.h1 - ints.h1).max() == 0.0


def test_freeze_core_energy_formula():
    ints = random_integrals(3, 4, seed=4)
    out = freeze_core(ints, 1)
    expected = 2 * ints.h1[0, 0] + 2 * ints.eri[0, 0, 0, 0] - ints.eri[0, 0, 0, 0]
    assert np.isclose(out.e_const - ints.e_const, expected)
    assert out.n_orb == 2 and out.n_elec == 2


def test_freeze_core_matches_restricted_diagonalization():
    """Energy of the frozen problem equals the full problem restricted to
    determinants with the core doubly occupied."""
    ints = random_integrals(2, 2, seed=8)
    spec_full = ActiveSpaceSpec(n_act=2, n_elec=2)
    h1f, h2f = spinorbital_tensors(ints, spec_full)

    # Restrict: orbital 0 (alpha=so 0, beta=so 2 in blocked order) occupied.
    dets = [
        d
        for d in sector_determinants(4, 2)
        if (d & 0b0101) == 0b0101
    ]
    h_restr = fci_matrix_spinorb(h1f, h2f, dets)
    e_restricted = np.linalg.eigvalsh(h_restr)[0].real + ints.e_const

    frozen = freeze_core(ints, 1)
    spec_red = ActiveSpaceSpec(n_act=1, n_elec=0)
    h1r, h2r = spinorbital_tensors(frozen, spec_red)
    e_frozen = fci_ground_energy_spinorb(h1r, h2r, frozen.e_const, 0)
    assert np.isclose(e_frozen, e_restricted, atol=1e-10)


def test_freeze_too_many_raises():
    ints = random_integrals(2, 2, seed=2)
    with pytest.raises(ValueError):
        freeze_core(ints, 2)


def test_orbital_exp_orthogonal():
    rng = np.random.default_rng(12)
    for _ in range(5):
        k = rng.standard_normal((4, 4))
        k = k - k.T
        k *= 1.0 / max(1.0, np.linalg.norm(k))
        u = orbital_exp(k)
        assert np.abs(u.T @ u - np.eye(4)).max() <= 1e-12


def test_rotate_identity_and_inverse():
    ints = random_integrals(3, 2, seed=5)
    zero = np.zeros((3, 3))
    same = rotate(ints, zero)
    assert np.abs(same.h1 - ints.h1).max() < 1e-14
    rng = np.random.default_rng(6)
    k = rng.standard_normal((3, 3)) * 0.2
    k = k - k.T
    fwd = rotate(ints, k)
    back = rotate(fwd, -k)
    assert np.abs(back.h1 - ints.h1).max() < 1e-10
    assert np.abs(back.eri - ints.eri).max() < 1e-10


def test_rotate_rejects_non_antisymmetric():
    ints = random_integrals(2, 2, seed=5)
    with pytest.raises(ValueError):
        rotate(ints, np.eye(2))


def test_fci_invariant_under_rotation():
    """Full-space ground energy must not move under orbital rotations."""
    ints = random_integrals(3, 2, seed=9)
    spec = ActiveSpaceSpec(n_act=3, n_elec=2)
    h1a, h2a = spinorbital_tensors(ints, spec)
    e0 = fci_ground_energy_spinorb(h1a, h2a, ints.e_const, 2)
    rng = np.random.default_rng(10)
    k = rng.standard_normal((3, 3)) * 0.3
    k = k - k.T
    rot = rotate(ints, k)
    h1b, h2b = spinorbital_tensors(rot, spec)
    e1 = fci_ground_energy_spinorb(h1b, h2b, rot.e_const, 2)
    assert abs(e0 - e1) < 1e-9


def test_mo_coefficients_round_trip():
    rng = np.random.default_rng(2)
    mo = MoCoefficients(C=rng.standard_normal((4, 3)))
    back = read_mo_coefficients(write_mo_coefficients(mo))
    assert np.abs(back.C - mo.C).max() < 1e-14


def test_mo_orthonormality_check():
    c = np.eye(3)
    MoCoefficients(C=c).check_orthonormal(np.eye(3))
    with pytest.raises(ValueError):
        MoCoefficients(C=2 * c).check_orthonormal(np.eye(3))
