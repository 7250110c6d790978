"""Molecular integral handling: FCIDUMP I/O, spin-orbital expansion,
core freezing, and orbital rotations.

All quantities are in Hartree atomic units.  Spatial two-electron
integrals are kept in chemist notation (ij|kl) with full 8-fold
permutational symmetry; the antisymmetrized physicist-notation
spin-orbital tensor <pq||rs> is produced on demand.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.linalg import expm

from .fermion import ActiveSpaceSpec


class FcidumpError(ValueError):
    """Malformed FCIDUMP content; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass
class MolecularIntegrals:
    """Spatial-orbital integrals plus the scalar energy offset.

    ``eri`` is the full chemist-notation (ij|kl) tensor; 8-fold symmetry
    is enforced at construction time.  ``e_const`` carries nuclear
    repulsion plus any frozen-core energy.
    """

    n_orb: int
    n_elec: int
    ms2: int
    h1: np.ndarray
    eri: np.ndarray
    e_const: float

    def __post_init__(self):
        n = self.n_orb
        if self.h1.shape != (n, n):
            raise ValueError("h1 shape mismatch")
        if self.eri.shape != (n, n, n, n):
            raise ValueError("eri shape mismatch")
        if not np.allclose(self.h1, self.h1.T, atol=1e-10):
            raise ValueError("h1 is not symmetric")
        for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
            if not np.allclose(self.eri, self.eri.transpose(perm), atol=1e-10):
                raise ValueError("eri violates 8-fold permutational symmetry")

    def copy(self) -> "MolecularIntegrals":
        return MolecularIntegrals(
            self.n_orb, self.n_elec, self.ms2, self.h1.copy(), self.eri.copy(), self.e_const
        )


@dataclass
class MoCoefficients:
    """AO x MO coefficient matrix with optional basis-function labels."""

    C: np.ndarray
    ao_labels: Tuple[str, ...] = ()

    def check_orthonormal(self, overlap: np.ndarray, tol: float = 1e-8) -> None:
        g = self.C.T @ overlap @ self.C
        if not np.allclose(g, np.eye(self.C.shape[1]), atol=tol):
            raise ValueError("MO columns are not orthonormal under the AO overlap")


_NAMELIST_INT = re.compile(r"(\w+)\s*=\s*(-?\d+)")


def parse_fcidump(text: str) -> MolecularIntegrals:
    """Parse FCIDUMP text (namelist header + integral lines).

    Lines are ``value i j k l`` with 1-based indices: all four nonzero is
    an (ij|kl) entry, k=l=0 a one-body entry, all zero the scalar
    constant.  Symmetry-equivalent duplicates must agree to 1e-10.
    """
    lines = text.splitlines()
    header_end = None
    header_text = []
    for ln, raw in enumerate(lines):
        header_text.append(raw)
        if "&END" in raw.upper() or raw.strip() == "/":
            header_end = ln
            break
    if header_end is None:
        raise FcidumpError("missing &END terminator in namelist header")

    header = " ".join(header_text).upper()
    fields = {m.group(1): int(m.group(2)) for m in _NAMELIST_INT.finditer(header)}
    for key in ("NORB", "NELEC"):
        if key not in fields:
            raise FcidumpError(f"header is missing {key}")
    n_orb = fields["NORB"]
    n_elec = fields["NELEC"]
    ms2 = fields.get("MS2", 0)
    if n_orb <= 0:
        raise FcidumpError(f"NORB must be positive, got {n_orb}")

    h1 = np.zeros((n_orb, n_orb))
    h1_seen = np.zeros((n_orb, n_orb), dtype=bool)
    eri = np.zeros((n_orb,) * 4)
    eri_seen = np.zeros((n_orb,) * 4, dtype=bool)
    e_const = 0.0

    def eri_images(i, j, k, l):
        return {
            (i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
            (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i),
        }

    for ln, raw in enumerate(lines[header_end + 1:], start=header_end + 2):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise FcidumpError("expected 'value i j k l'", ln)
        try:
            val = float(parts[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(x) for x in parts[1:])
        except ValueError as exc:
            raise FcidumpError(str(exc), ln) from None
        for idx in (i, j, k, l):
            if idx < 0 or idx > n_orb:
                raise FcidumpError(f"orbital index {idx} outside [0, {n_orb}]", ln)

        if i == j == k == l == 0:
            e_const = val
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                raise FcidumpError("one-body entry with zero index", ln)
            a, b = i - 1, j - 1
            for x, y in ((a, b), (b, a)):
                if h1_seen[x, y] and abs(h1[x, y] - val) > 1e-10:
                    raise FcidumpError(
                        f"conflicting duplicate h1[{x+1},{y+1}]", ln
                    )
                h1[x, y] = val
                h1_seen[x, y] = True
        elif 0 in (i, j, k, l):
            raise FcidumpError("two-body entry with zero index", ln)
        else:
            a, b, c, d = i - 1, j - 1, k - 1, l - 1
            for idx in eri_images(a, b, c, d):
                if eri_seen[idx] and abs(eri[idx] - val) > 1e-10:
                    raise FcidumpError(
                        f"conflicting duplicate eri({i},{j},{k},{l})", ln
                    )
                eri[idx] = val
                eri_seen[idx] = True

    return MolecularIntegrals(n_orb, n_elec, ms2, h1, eri, e_const)


def write_fcidump(ints: MolecularIntegrals, threshold: float = 0.0) -> str:
    """Serialize to FCIDUMP text (canonical triangle, 1-based indices)."""
    n = ints.n_orb
    out = [
        f"&FCI NORB={n},NELEC={ints.n_elec},MS2={ints.ms2},",
        " ORBSYM=" + ",".join(["1"] * n) + ",",
        " ISYM=1,",
        "&END",
    ]

    def fmt(val, i, j, k, l):
        return f"{val:23.16e} {i:3d} {j:3d} {k:3d} {l:3d}"

    pairs = [(i, j) for i in range(n) for j in range(i + 1)]
    for a, (i, j) in enumerate(pairs):
        for k, l in pairs[: a + 1]:
            v = ints.eri[i, j, k, l]
            if abs(v) > threshold:
                out.append(fmt(v, i + 1, j + 1, k + 1, l + 1))
    for i in range(n):
        for j in range(i + 1):
            v = ints.h1[i, j]
            if abs(v) > threshold:
                out.append(fmt(v, i + 1, j + 1, 0, 0))
    out.append(fmt(ints.e_const, 0, 0, 0, 0))
    return "\n".join(out) + "\n"


def spinorbital_tensors(
    ints: MolecularIntegrals, spec: ActiveSpaceSpec, offset: int = 0
) -> Tuple[np.ndarray, np.ndarray]:
    """Antisymmetrized spin-orbital tensors over the active window.

    Returns (h1_so, h2_so) where h2_so[p,q,r,s] = <pq||rs> built from
    <pq|rs> = (pr|qs) * delta(spin_p, spin_r) * delta(spin_q, spin_s),
    over spatial orbitals [offset, offset + n_act).
    """
    n = spec.n_act
    if offset + n > ints.n_orb:
        raise ValueError("active window exceeds available orbitals")
    sl = slice(offset, offset + n)
    h1_sp = ints.h1[sl, sl]
    eri_sp = ints.eri[sl, sl, sl, sl]

    n_q = spec.n_qubits
    spatial = np.empty(n_q, dtype=int)
    spin = np.empty(n_q, dtype=int)
    for so in range(n_q):
        spatial[so], spin[so] = spec.spatial_and_spin(so)

    same = spin[:, None] == spin[None, :]
    h1_so = h1_sp[np.ix_(spatial, spatial)] * same

    # chem[p,r,q,s] = (P R | Q S); apply spin deltas on (p,r) and (q,s),
    # then reorder to Coulomb <pq|rs> = (pr|qs).
    chem = eri_sp[np.ix_(spatial, spatial, spatial, spatial)]
    chem = chem * same[:, :, None, None] * same[None, None, :, :]
    coul = chem.transpose(0, 2, 1, 3)
    h2_so = coul - coul.transpose(0, 1, 3, 2)
    return h1_so, h2_so


def freeze_core(ints: MolecularIntegrals, n_frozen: int) -> MolecularIntegrals:
    """Fold the lowest ``n_frozen`` doubly occupied orbitals into an
    effective one-body operator and the scalar constant."""
    if n_frozen == 0:
        return ints.copy()
    if 2 * n_frozen > ints.n_elec:
        raise ValueError(
            f"cannot freeze {n_frozen} doubly occupied orbitals with "
            f"{ints.n_elec} electrons"
        )
    n = ints.n_orb
    core = list(range(n_frozen))
    rest = list(range(n_frozen, n))

    e_core = 2.0 * sum(ints.h1[c, c] for c in core)
    for c in core:
        for cp in core:
            e_core += 2.0 * ints.eri[c, c, cp, cp] - ints.eri[c, cp, cp, c]

    h1_eff = ints.h1[np.ix_(rest, rest)].copy()
    for a, i in enumerate(rest):
        for b, j in enumerate(rest):
            for c in core:
                h1_eff[a, b] += 2.0 * ints.eri[i, j, c, c] - ints.eri[i, c, c, j]

    eri_eff = ints.eri[np.ix_(rest, rest, rest, rest)].copy()
    return MolecularIntegrals(
        n_orb=n - n_frozen,
        n_elec=ints.n_elec - 2 * n_frozen,
        ms2=ints.ms2,
        h1=h1_eff,
        eri=eri_eff,
        e_const=ints.e_const + e_core,
    )


def orbital_exp(kappa: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """exp(kappa) for a real antisymmetric generator; orthogonal output."""
    if kappa.ndim != 2 or kappa.shape[0] != kappa.shape[1]:
        raise ValueError("kappa must be square")
    if not np.allclose(kappa, -kappa.T, atol=tol):
        raise ValueError("kappa is not antisymmetric")
    u = expm(kappa)
    return u


def rotate(ints: MolecularIntegrals, kappa: np.ndarray) -> MolecularIntegrals:
    """Transform the integrals to the basis C' = C exp(kappa).

    h' = U^T h U and (ij|kl)' contracted with U on all four indices,
    U = exp(kappa).
    """
    if kappa.shape != (ints.n_orb, ints.n_orb):
        raise ValueError("kappa dimension does not match orbital count")
    u = orbital_exp(kappa)
    h1p = u.T @ ints.h1 @ u
    erip = np.einsum("pi,qj,rk,sl,pqrs->ijkl", u, u, u, u, ints.eri, optimize=True)
    return MolecularIntegrals(ints.n_orb, ints.n_elec, ints.ms2, h1p, erip, ints.e_const)


def read_mo_coefficients(text: str) -> MoCoefficients:
    """Plain-text MO file: ``n_ao n_mo`` header then row-major floats."""
    tokens = text.split()
    if len(tokens) < 2:
        raise ValueError("MO coefficient file too short")
    n_ao, n_mo = int(tokens[0]), int(tokens[1])
    vals = [float(t) for t in tokens[2:]]
    if len(vals) != n_ao * n_mo:
        raise ValueError(
            f"expected {n_ao * n_mo} coefficients, found {len(vals)}"
        )
    return MoCoefficients(C=np.array(vals).reshape(n_ao, n_mo))


def write_mo_coefficients(mo: MoCoefficients) -> str:
    n_ao, n_mo = mo.C.shape
    rows = [f"{n_ao} {n_mo}"]
    for row in mo.C:
        rows.append(" ".join(f"{x:.16e}" for x in row))
    return "\n".join(rows) + "\n"
