#!/usr/bin/env python3
"""Generate the shipped molecular test fixtures (FCIDUMP + basis + MOs).

Computes STO-3G integrals for H2 (three bond lengths) and LiH with a
McMurchie-Davidson implementation (s/p shells), runs a plain RHF, and
dumps everything in the package's text formats.  Only needed when the
fixtures change; the generated files under data/ are committed.

Run from the repository root:  python3 scripts/make_reference_data.py
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import numpy as np
from scipy.special import hyp1f1

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from vqepdft.grid import (  # noqa: E402
    BOHR_PER_ANGSTROM,
    MoleculeBasis,
    Shell,
    parse_molecule_basis,
    write_molecule_basis,
)
from vqepdft.integrals import (  # noqa: E402
    MoCoefficients,
    MolecularIntegrals,
    write_fcidump,
    write_mo_coefficients,
)

# Standard STO-3G parameters (exponent, coefficient), raw table values.
STO3G = {
    "H": [("s", [(3.425250914, 0.1543289673), (0.6239137298, 0.5353281423),
                 (0.1688554040, 0.4446345422)])],
    "Li": [
        ("s", [(16.11957475, 0.1543289673), (2.936200663, 0.5353281423),
               (0.7946504870, 0.4446345422)]),
        ("s", [(0.6362897469, -0.09996722919), (0.1478600533, 0.3995128261),
               (0.0480886784, 0.7001154689)]),
        ("p", [(0.6362897469, 0.1559162750), (0.1478600533, 0.6076837186),
               (0.0480886784, 0.3919573931)]),
    ],
}

L_OF = {"s": 0, "p": 1}


def build_molecule(atoms_angstrom) -> MoleculeBasis:
    atoms = []
    shells = []
    for ai, (sym, xyz) in enumerate(atoms_angstrom):
        pos = np.array(xyz, dtype=float) * BOHR_PER_ANGSTROM
        from vqepdft.grid import _ELEMENT_CHARGES

        atoms.append((sym, float(_ELEMENT_CHARGES[sym]), pos))
        for l_name, prims in STO3G[sym]:
            exps = np.array([p[0] for p in prims])
            coefs = np.array([p[1] for p in prims])
            shells.append(Shell(ai, L_OF[l_name], exps, coefs))
    return MoleculeBasis(atoms, shells)


# ---------------------------------------------------------------------------
# McMurchie-Davidson integrals over primitive Cartesian Gaussians.

def hermite_e(i, j, t, q_dist, a, b):
    p = a + b
    mu = a * b / p
    if t < 0 or t > i + j:
        return 0.0
    if i == j == t == 0:
        return math.exp(-mu * q_dist * q_dist)
    if j == 0:
        return (
            (1.0 / (2.0 * p)) * hermite_e(i - 1, j, t - 1, q_dist, a, b)
            - (mu * q_dist / a) * hermite_e(i - 1, j, t, q_dist, a, b)
            + (t + 1) * hermite_e(i - 1, j, t + 1, q_dist, a, b)
        )
    return (
        (1.0 / (2.0 * p)) * hermite_e(i, j - 1, t - 1, q_dist, a, b)
        + (mu * q_dist / b) * hermite_e(i, j - 1, t, q_dist, a, b)
        + (t + 1) * hermite_e(i, j - 1, t + 1, q_dist, a, b)
    )


def overlap_prim(a, la, ra, b, lb, rb):
    s = 1.0
    for d in range(3):
        s *= hermite_e(la[d], lb[d], 0, ra[d] - rb[d], a, b)
    return s * (math.pi / (a + b)) ** 1.5


def kinetic_prim(a, la, ra, b, lb, rb):
    lx, ly, lz = lb

    def s_shift(d, shift):
        lb2 = list(lb)
        lb2[d] += shift
        if lb2[d] < 0:
            return 0.0
        return overlap_prim(a, la, ra, b, tuple(lb2), rb)

    term = 0.0
    for d in range(3):
        l = lb[d]
        term += -2.0 * b * b * s_shift(d, 2)
        term += b * (2 * l + 1) * s_shift(d, 0)
        term += -0.5 * l * (l - 1) * s_shift(d, -2)
    return term


def boys(n, t):
    return hyp1f1(n + 0.5, n + 1.5, -t) / (2.0 * n + 1.0)


def hermite_coulomb(t, u, v, n, p, pc):
    if t == u == v == 0:
        return (-2.0 * p) ** n * boys(n, p * float(np.dot(pc, pc)))
    if t > 0:
        out = 0.0
        if t > 1:
            out += (t - 1) * hermite_coulomb(t - 2, u, v, n + 1, p, pc)
        out += pc[0] * hermite_coulomb(t - 1, u, v, n + 1, p, pc)
        return out
    if u > 0:
        out = 0.0
        if u > 1:
            out += (u - 1) * hermite_coulomb(t, u - 2, v, n + 1, p, pc)
        out += pc[1] * hermite_coulomb(t, u - 1, v, n + 1, p, pc)
        return out
    out = 0.0
    if v > 1:
        out += (v - 1) * hermite_coulomb(t, u, v - 2, n + 1, p, pc)
    out += pc[2] * hermite_coulomb(t, u, v - 1, n + 1, p, pc)
    return out


def nuclear_prim(a, la, ra, b, lb, rb, rc):
    p = a + b
    rp = (a * np.asarray(ra) + b * np.asarray(rb)) / p
    pc = rp - np.asarray(rc)
    val = 0.0
    for t in range(la[0] + lb[0] + 1):
        et = hermite_e(la[0], lb[0], t, ra[0] - rb[0], a, b)
        for u in range(la[1] + lb[1] + 1):
            eu = hermite_e(la[1], lb[1], u, ra[1] - rb[1], a, b)
            for v in range(la[2] + lb[2] + 1):
                ev = hermite_e(la[2], lb[2], v, ra[2] - rb[2], a, b)
                val += et * eu * ev * hermite_coulomb(t, u, v, 0, p, pc)
    return 2.0 * math.pi / p * val


def eri_prim(a, la, ra, b, lb, rb, c, lc, rc, d, ld, rd):
    p = a + b
    q = c + d
    alpha = p * q / (p + q)
    rp = (a * np.asarray(ra) + b * np.asarray(rb)) / p
    rq = (c * np.asarray(rc) + d * np.asarray(rd)) / q
    pq = rp - rq
    val = 0.0
    for t in range(la[0] + lb[0] + 1):
        et = hermite_e(la[0], lb[0], t, ra[0] - rb[0], a, b)
        for u in range(la[1] + lb[1] + 1):
            eu = hermite_e(la[1], lb[1], u, ra[1] - rb[1], a, b)
            for v in range(la[2] + lb[2] + 1):
                ev = hermite_e(la[2], lb[2], v, ra[2] - rb[2], a, b)
                inner = 0.0
                for tau in range(lc[0] + ld[0] + 1):
                    ft = hermite_e(lc[0], ld[0], tau, rc[0] - rd[0], c, d)
                    for nu in range(lc[1] + ld[1] + 1):
                        fu = hermite_e(lc[1], ld[1], nu, rc[1] - rd[1], c, d)
                        for phi in range(lc[2] + ld[2] + 1):
                            fv = hermite_e(lc[2], ld[2], phi, rc[2] - rd[2], c, d)
                            sign = (-1.0) ** (tau + nu + phi)
                            inner += (
                                sign * ft * fu * fv
                                * hermite_coulomb(t + tau, u + nu, v + phi, 0, alpha, pq)
                            )
                val += et * eu * ev * inner
    return val * 2.0 * math.pi**2.5 / (p * q * math.sqrt(p + q))


def ao_integrals(basis: MoleculeBasis):
    aos = basis.ao_descriptors()
    n = len(aos)
    S = np.zeros((n, n))
    T = np.zeros((n, n))
    V = np.zeros((n, n))
    for i, (ai, li, ei, ci, ri) in enumerate(aos):
        for j, (aj, lj, ej, cj, rj) in enumerate(aos):
            if j > i:
                continue
            s = t = v = 0.0
            for a, ca in zip(ei, ci):
                for b, cb in zip(ej, cj):
                    w = ca * cb
                    s += w * overlap_prim(a, li, ri, b, lj, rj)
                    t += w * kinetic_prim(a, li, ri, b, lj, rj)
                    for sym, z, rc in basis.atoms:
                        v -= z * w * nuclear_prim(a, li, ri, b, lj, rj, rc)
            S[i, j] = S[j, i] = s
            T[i, j] = T[j, i] = t
            V[i, j] = V[j, i] = v
    eri = np.zeros((n, n, n, n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1)]
    for pi_, (i, j) in enumerate(pairs):
        for k, l in pairs[: pi_ + 1]:
            ai_, li, ei, ci, ri = aos[i]
            aj_, lj, ej, cj, rj = aos[j]
            ak_, lk, ek, ck, rk = aos[k]
            al_, ll, el, cl, rl = aos[l]
            val = 0.0
            for a, ca in zip(ei, ci):
                for b, cb in zip(ej, cj):
                    for c, cc in zip(ek, ck):
                        for d, cd in zip(el, cl):
                            val += ca * cb * cc * cd * eri_prim(
                                a, li, ri, b, lj, rj, c, lk, rk, d, ll, rl
                            )
            for idx in {
                (i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
                (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i),
            }:
                eri[idx] = val
    return S, T, V, eri


def rhf(S, hcore, eri, n_elec, max_iter=200, tol=1e-12):
    n = S.shape[0]
    nocc = n_elec // 2
    s_eval, s_evec = np.linalg.eigh(S)
    x = s_evec @ np.diag(s_eval**-0.5) @ s_evec.T
    f = hcore.copy()
    e_old = 0.0
    dm = np.zeros_like(S)
    for it in range(max_iter):
        fp = x.T @ f @ x
        eps, cp = np.linalg.eigh(fp)
        c = x @ cp
        cocc = c[:, :nocc]
        dm_new = 2.0 * cocc @ cocc.T
        dm = dm_new if it == 0 else 0.7 * dm_new + 0.3 * dm
        j = np.einsum("pqrs,rs->pq", eri, dm)
        k = np.einsum("prqs,rs->pq", eri, dm)
        f = hcore + j - 0.5 * k
        e_elec = 0.5 * np.sum(dm * (hcore + f))
        if abs(e_elec - e_old) < tol and it > 1:
            return e_elec, c, eps
        e_old = e_elec
    raise RuntimeError("SCF failed to converge")


def mo_transform(hcore, eri, c):
    h_mo = c.T @ hcore @ c
    eri_mo = np.einsum("pi,qj,rk,sl,pqrs->ijkl", c, c, c, c, eri, optimize=True)
    return h_mo, eri_mo


def generate(name: str, atoms_angstrom, n_elec: int, out_dir: Path) -> dict:
    basis = build_molecule(atoms_angstrom)
    mol_text = write_molecule_basis(basis)
    basis = parse_molecule_basis(mol_text)  # round-trip: what tests will read

    S, T, V, eri = ao_integrals(basis)
    hcore = T + V
    e_nuc = basis.nuclear_repulsion()
    e_elec, c, eps = rhf(S, hcore, eri, n_elec)
    e_hf = e_elec + e_nuc

    mo = MoCoefficients(C=c)
    mo.check_orthonormal(S)
    h_mo, eri_mo = mo_transform(hcore, eri, c)
    ints = MolecularIntegrals(
        n_orb=S.shape[0], n_elec=n_elec, ms2=0, h1=h_mo, eri=eri_mo, e_const=e_nuc
    )

    (out_dir / f"{name}.fcidump").write_text(write_fcidump(ints, threshold=1e-14))
    (out_dir / f"{name}.mol").write_text(mol_text)
    (out_dir / f"{name}.mo").write_text(write_mo_coefficients(mo))
    meta = {
        "name": name,
        "atoms_angstrom": [[s, list(map(float, xyz))] for s, xyz in atoms_angstrom],
        "n_elec": n_elec,
        "e_nuclear": e_nuc,
        "e_rhf": e_hf,
        "mo_energies": [float(x) for x in eps],
    }
    print(f"{name}: E_RHF = {e_hf:.8f} Ha, E_nuc = {e_nuc:.8f} Ha")
    return meta


def main():
    out_dir = ROOT / "data"
    out_dir.mkdir(exist_ok=True)
    metas = []
    for r in (0.5000, 0.7414, 1.5000):
        metas.append(
            generate(
                f"h2_sto3g_{r:.4f}",
                [("H", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, r))],
                n_elec=2,
                out_dir=out_dir,
            )
        )
    metas.append(
        generate(
            "lih_sto3g_1.5949",
            [("Li", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, 1.5949))],
            n_elec=4,
            out_dir=out_dir,
        )
    )
    (out_dir / "reference.json").write_text(json.dumps(metas, indent=1))

    # Sanity anchors: textbook-scale RHF energies.
    by_name = {m["name"]: m for m in metas}
    assert abs(by_name["h2_sto3g_0.7414"]["e_rhf"] - (-1.1167)) < 2e-3
    assert by_name["lih_sto3g_1.5949"]["e_rhf"] < -7.8
    print("fixtures written to", out_dir)


if __name__ == "__main__":
    main()
