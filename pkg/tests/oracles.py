"""Independent reference implementations used only by the test suite.

These deliberately avoid the package's Pauli/JW machinery: dense Pauli
matrices come from explicit Kronecker products, and the configuration-
interaction references work directly on occupation-number determinants
with ladder-operator arithmetic.
"""

from __future__ import annotations

from itertools import combinations
from typing import Dict, List, Sequence, Tuple

import numpy as np

I2 = np.eye(2, dtype=complex)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
LETTER_MATS = {"I": I2, "X": X2, "Y": Y2, "Z": Z2}


def dense_pauli(label: str) -> np.ndarray:
    """Kronecker-product matrix of a letter string (letter i = qubit i).

    Qubit 0 is the least-significant bit, so the leftmost factor in the
    Kronecker product is the highest qubit.
    """
    m = np.array([[1.0 + 0j]])
    for ch in reversed(label):
        m = np.kron(m, LETTER_MATS[ch])
    return m


def dense_pauli_sum(terms: Sequence[Tuple[str, complex]]) -> np.ndarray:
    dim = 2 ** len(terms[0][0])
    h = np.zeros((dim, dim), dtype=complex)
    for label, coeff in terms:
        h += coeff * dense_pauli(label)
    return h


def apply_ladder(det: int, orb: int, create: bool) -> Tuple[int, int]:
    """Apply a_orb^dag (create) or a_orb to an occupation bitmask.

    Returns (new_det, sign); sign 0 means annihilation of the state.
    """
    occupied = bool(det & (1 << orb))
    if create == occupied:
        return 0, 0
    sign = -1 if bin(det & ((1 << orb) - 1)).count("1") % 2 else 1
    return det ^ (1 << orb), sign


def sector_determinants(n_spin_orb: int, n_elec: int) -> List[int]:
    dets = []
    for occ in combinations(range(n_spin_orb), n_elec):
        d = 0
        for o in occ:
            d |= 1 << o
        dets.append(d)
    return sorted(dets)


def fci_matrix_spinorb(
    h1: np.ndarray, h2_antisym: np.ndarray, dets: Sequence[int]
) -> np.ndarray:
    """CI matrix from spin-orbital tensors by direct ladder application.

    H = sum h1[p,q] a_p^dag a_q + 1/4 sum h2[p,q,r,s] a_p^dag a_q^dag a_s a_r
    """
    n_so = h1.shape[0]
    index = {d: i for i, d in enumerate(dets)}
    dim = len(dets)
    h = np.zeros((dim, dim), dtype=complex)

    for j, det in enumerate(dets):
        for q in range(n_so):
            d1, s1 = apply_ladder(det, q, False)
            if s1 == 0:
                continue
            for p in range(n_so):
                if abs(h1[p, q]) < 1e-16:
                    continue
                d2, s2 = apply_ladder(d1, p, True)
                if s2 == 0 or d2 not in index:
                    continue
                h[index[d2], j] += h1[p, q] * s1 * s2
        for r in range(n_so):
            dr, sr = apply_ladder(det, r, False)
            if sr == 0:
                continue
            for s in range(n_so):
                ds, ss = apply_ladder(dr, s, False)
                if ss == 0:
                    continue
                for q in range(n_so):
                    dq, sq = apply_ladder(ds, q, True)
                    if sq == 0:
                        continue
                    for p in range(n_so):
                        c = h2_antisym[p, q, r, s]
                        if abs(c) < 1e-16:
                            continue
                        dp, sp = apply_ladder(dq, p, True)
                        if sp == 0 or dp not in index:
                            continue
                        h[index[dp], j] += 0.25 * c * sr * ss * sq * sp
    return h


def fci_ground_energy_spinorb(
    h1: np.ndarray, h2_antisym: np.ndarray, e_const: float, n_elec: int
) -> float:
    dets = sector_determinants(h1.shape[0], n_elec)
    h = fci_matrix_spinorb(h1, h2_antisym, dets)
    evals = np.linalg.eigvalsh(h)
    return float(evals[0].real + e_const)


def fci_matrix_chemist(
    h1_spatial: np.ndarray, eri_chemist: np.ndarray, dets: Sequence[int], n_orb: int
) -> np.ndarray:
    """CI matrix straight from spatial chemist integrals.

    H = sumـPQ h[P,Q] E_PQ + 1/2 sum (PQ|RS) (E_PQ E_RS - delta_QR E_PS),
    E_PQ = sum_spin a^dag_{P,spin} a_{Q,spin}; spin-orbital 2P (alpha),
    2P+1 (beta) inside this oracle only.
    """
    index = {d: i for i, d in enumerate(dets)}
    dim = len(dets)

    def e_pq_apply(vec: Dict[int, complex], p: int, q: int) -> Dict[int, complex]:
        out: Dict[int, complex] = {}
        for det, amp in vec.items():
            for spin in (0, 1):
                d1, s1 = apply_ladder(det, 2 * q + spin, False)
                if s1 == 0:
                    continue
                d2, s2 = apply_ladder(d1, 2 * p + spin, True)
                if s2 == 0:
                    continue
                out[d2] = out.get(d2, 0j) + amp * s1 * s2
        return out

    h = np.zeros((dim, dim), dtype=complex)
    for j, det in enumerate(dets):
        base = {det: 1.0 + 0j}
        for p in range(n_orb):
            for q in range(n_orb):
                if abs(h1_spatial[p, q]) > 1e-16:
                    for d, amp in e_pq_apply(base, p, q).items():
                        h[index[d], j] += h1_spatial[p, q] * amp
        for p in range(n_orb):
            for q in range(n_orb):
                for r in range(n_orb):
                    for s in range(n_orb):
                        g = eri_chemist[p, q, r, s]
                        if abs(g) < 1e-16:
                            continue
                        vec = e_pq_apply(e_pq_apply(base, r, s), p, q)
                        for d, amp in vec.items():
                            h[index[d], j] += 0.5 * g * amp
                        if q == r:
                            for d, amp in e_pq_apply(base, p, s).items():
                                h[index[d], j] -= 0.5 * g * amp
    return h


def fci_ground_energy_chemist(
    h1_spatial: np.ndarray,
    eri_chemist: np.ndarray,
    e_const: float,
    n_orb: int,
    n_elec: int,
) -> float:
    dets = sector_determinants(2 * n_orb, n_elec)
    h = fci_matrix_chemist(h1_spatial, eri_chemist, dets, n_orb)
    evals = np.linalg.eigvalsh(h)
    return float(evals[0].real + e_const)


def random_hermitian_tensors(
    n_so: int, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """Random real symmetric h1 and antisymmetrized h2 with the physical
    permutational symmetries (real-orbital case)."""
    h1 = rng.standard_normal((n_so, n_so))
    h1 = 0.5 * (h1 + h1.T)
    coul = rng.standard_normal((n_so,) * 4)
    # Impose <pq|rs> = <qp|sr> and <pq|rs> = <rs|pq>^* (real)
    coul = 0.5 * (coul + coul.transpose(1, 0, 3, 2))
    coul = 0.5 * (coul + coul.transpose(2, 3, 0, 1))
    h2 = coul - coul.transpose(0, 1, 3, 2)
    return h1, h2
