"""Second-quantized operators and their Jordan-Wigner qubit images.

Spin-orbital indexing is blocked by default: spatial orbital P with spin
alpha sits at index P, with spin beta at index P + n_act.  Interleaved
(alpha/beta alternating) ordering is selectable and recorded in
``ActiveSpaceSpec.spin_order``.

The Jordan-Wigner convention used throughout:

    a_p^dag -> (prod_{k<p} Z_k) (X_p - i Y_p)/2
    a_p     -> (prod_{k<p} Z_k) (X_p + i Y_p)/2

with qubit 0 the least-significant bit of a basis-state index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .pauli import PauliString, PauliSum


@dataclass(frozen=True)
class FermionTerm:
    """A scalar times an ordered product of ladder operators.

    ``ladder_ops`` is a tuple of (spin_orbital_index, is_creation) in the
    order the operators are written (leftmost first).  No normal ordering
    is assumed.
    """

    coefficient: complex
    ladder_ops: Tuple[Tuple[int, bool], ...]


@dataclass(frozen=True)
class ActiveSpaceSpec:
    """Active-space bookkeeping: spatial orbitals, electrons, qubits."""

    n_act: int
    n_elec: int
    spin_order: str = "blocked"  # or "interleaved"

    def __post_init__(self):
        if self.n_act < 0:
            raise ValueError("n_act must be nonnegative")
        if not 0 <= self.n_elec <= self.n_qubits:
            raise ValueError(
                f"electron count {self.n_elec} outside [0, {self.n_qubits}]"
            )
        if self.spin_order not in ("blocked", "interleaved"):
            raise ValueError(f"unknown spin order {self.spin_order!r}")

    @property
    def n_qubits(self) -> int:
        # One qubit per spin-orbital.
        return 2 * self.n_act

    def spin_orbital(self, spatial: int, spin: int) -> int:
        """Map (spatial orbital, spin 0=alpha/1=beta) to a qubit index."""
        if not 0 <= spatial < self.n_act:
            raise ValueError(f"spatial orbital {spatial} out of range")
        if self.spin_order == "blocked":
            return spatial + spin * self.n_act
        return 2 * spatial + spin

    def spatial_and_spin(self, so: int) -> Tuple[int, int]:
        if not 0 <= so < self.n_qubits:
            raise ValueError(f"spin orbital {so} out of range")
        if self.spin_order == "blocked":
            return so % self.n_act, so // self.n_act
        return so // 2, so % 2

    def hf_occupied(self) -> List[int]:
        """Aufbau occupation: lowest spatial orbitals, alpha before beta."""
        occ = []
        n_pairs = self.n_elec // 2
        for p in range(n_pairs):
            occ.append(self.spin_orbital(p, 0))
            occ.append(self.spin_orbital(p, 1))
        if self.n_elec % 2:
            occ.append(self.spin_orbital(n_pairs, 0))
        return sorted(occ)


def jw_ladder(p: int, is_creation: bool, n_qubits: int) -> PauliSum:
    """Jordan-Wigner image of a single ladder operator."""
    if not 0 <= p < n_qubits:
        raise ValueError(f"spin orbital {p} out of range for {n_qubits} qubits")
    z_string = (1 << p) - 1  # Z on all qubits below p
    x_part = PauliString(n_qubits, x_mask=(1 << p), z_mask=z_string)
    y_part = PauliString(n_qubits, x_mask=(1 << p), z_mask=z_string | (1 << p))
    s = PauliSum(n_qubits)
    s.add_scaled(0.5, x_part)
    s.add_scaled(-0.5j if is_creation else 0.5j, y_part)
    return s


def jw_term(term: FermionTerm, n_qubits: int) -> PauliSum:
    """Jordan-Wigner image of a ladder-operator product."""
    out = PauliSum(n_qubits)
    out.add_scaled(term.coefficient, PauliString.identity(n_qubits))
    for idx, is_creation in term.ladder_ops:
        out = out @ jw_ladder(idx, is_creation, n_qubits)
    return out


def number_operator(n_qubits: int) -> PauliSum:
    """Total particle number sum_p a_p^dag a_p."""
    s = PauliSum(n_qubits)
    ident = PauliString.identity(n_qubits)
    for p in range(n_qubits):
        s.add_scaled(0.5, ident)
        s.add_scaled(-0.5, PauliString.single(n_qubits, p, "Z"))
    return s


def _validate_hermitian_tensors(h1: np.ndarray, h2: np.ndarray, tol: float = 1e-10) -> None:
    if not np.allclose(h1, h1.conj().T, atol=tol):
        raise ValueError("one-body tensor is not Hermitian")
    # Hermiticity of the two-body operator: h_pqrs = conj(h_rspq)
    if not np.allclose(h2, h2.transpose(2, 3, 0, 1).conj(), atol=tol):
        raise ValueError("two-body tensor violates Hermiticity h_pqrs = h_rspq*")


def build_hamiltonian(
    h1: np.ndarray,
    h2_antisym: np.ndarray,
    e_const: float = 0.0,
    validate: bool = True,
) -> PauliSum:
    """Qubit Hamiltonian from spin-orbital tensors.

        H = sum_pq h1[p,q] a_p^dag a_q
          + 1/4 sum_pqrs h2[p,q,r,s] a_p^dag a_q^dag a_s a_r
          + e_const

    ``h2_antisym`` must be the antisymmetrized two-body tensor
    <pq||rs>; its p<->q and r<->s antisymmetry is exploited to restrict
    the double loop.  The constant lands on the identity string.
    """
    n_q = h1.shape[0]
    if h1.shape != (n_q, n_q) or h2_antisym.shape != (n_q,) * 4:
        raise ValueError("tensor shapes inconsistent")
    if validate:
        _validate_hermitian_tensors(h1, h2_antisym)

    ham = PauliSum(n_q)
    if e_const:
        ham.add_scaled(complex(e_const), PauliString.identity(n_q))

    ladders_c = [jw_ladder(p, True, n_q) for p in range(n_q)]
    ladders_a = [jw_ladder(p, False, n_q) for p in range(n_q)]

    for p in range(n_q):
        for q in range(n_q):
            c = h1[p, q]
            if abs(c) < 1e-14:
                continue
            ham.add_sum(ladders_c[p] @ ladders_a[q], scale=c)

    # 1/4 sum_pqrs with full antisymmetry -> sum over p<q, r<s of
    # h2[p,q,r,s] a_p^dag a_q^dag a_s a_r (four equal contributions).
    for p in range(n_q):
        for q in range(p + 1, n_q):
            cc = ladders_c[p] @ ladders_c[q]
            for r in range(n_q):
                for s in range(r + 1, n_q):
                    c = h2_antisym[p, q, r, s]
                    if abs(c) < 1e-14:
                        continue
                    ham.add_sum(cc @ ladders_a[s] @ ladders_a[r], scale=c)

    return ham.hermitized()


@dataclass
class RdmOperatorSet:
    """Hermitian measurement operators for the canonical RDM elements.

    For every canonical index the pair (real_part, imag_part) satisfies

        <target> = (<real_part> + i <imag_part>) / 2

    except for diagonal/self-adjoint targets where ``imag_part`` is None
    and <target> = <real_part>.
    """

    n_qubits: int
    one_body: Dict[Tuple[int, int], Tuple[PauliSum, PauliSum | None]] = field(
        default_factory=dict
    )
    two_body: Dict[Tuple[int, int, int, int], Tuple[PauliSum, PauliSum | None]] = field(
        default_factory=dict
    )


def canonical_one_body_indices(n_q: int) -> List[Tuple[int, int]]:
    return [(p, q) for p in range(n_q) for q in range(p, n_q)]


def canonical_two_body_indices(n_q: int) -> List[Tuple[int, int, int, int]]:
    """Indices (p<q, r<s) with (p,q) <= (r,s) lexicographically."""
    pairs = [(p, q) for p in range(n_q) for q in range(p + 1, n_q)]
    out = []
    for i, (p, q) in enumerate(pairs):
        for r, s in pairs[i:]:
            out.append((p, q, r, s))
    return out


def rdm_element_operators(spec: ActiveSpaceSpec) -> RdmOperatorSet:
    """Pauli decompositions for the canonical 1- and 2-RDM elements.

    The one-body target is a_p^dag a_q, the two-body target
    a_p^dag a_q^dag a_s a_r; everything else follows by antisymmetry and
    Hermiticity.
    """
    n_q = spec.n_qubits
    ops = RdmOperatorSet(n_qubits=n_q)

    for p, q in canonical_one_body_indices(n_q):
        a = jw_term(FermionTerm(1.0, ((p, True), (q, False))), n_q)
        if p == q:
            ops.one_body[(p, q)] = (a.hermitized(), None)
        else:
            adag = a.dagger()
            re_op = a.copy().add_sum(adag).hermitized()
            im_op = a.copy().add_sum(adag, scale=-1.0).scaled(-1j).hermitized()
            ops.one_body[(p, q)] = (re_op, im_op)

    for p, q, r, s in canonical_two_body_indices(n_q):
        b = jw_term(
            FermionTerm(1.0, ((p, True), (q, True), (s, False), (r, False))), n_q
        )
        if (p, q) == (r, s):
            # a_p^dag a_q^dag a_q a_p is the number-number operator: Hermitian.
            ops.two_body[(p, q, r, s)] = (b.hermitized(), None)
        else:
            bdag = b.dagger()
            re_op = b.copy().add_sum(bdag).hermitized()
            im_op = b.copy().add_sum(bdag, scale=-1.0).scaled(-1j).hermitized()
            ops.two_body[(p, q, r, s)] = (re_op, im_op)

    return ops


def excitation_generator_qubit(
    kappa_act: np.ndarray, spec: ActiveSpaceSpec
) -> PauliSum:
    """Qubit image of the one-body rotation generator Hamiltonian.

    Given the real antisymmetric active-space matrix ``kappa_act``, builds
    the Hermitian one-body operator

        H = sum_pq K[p,q] E_pq,   K = -i kappa,
        E_pq = sum_spin a_{p,spin}^dag a_{q,spin}

    so that exp(-i H) = exp(-kappa_hat).  Returned as a Hermitian
    PauliSum on the active register.
    """
    n = spec.n_act
    if kappa_act.shape != (n, n):
        raise ValueError("kappa dimension does not match active space")
    if not np.allclose(kappa_act, -kappa_act.T, atol=1e-12):
        raise ValueError("kappa must be real antisymmetric")
    n_q = spec.n_qubits
    h = PauliSum(n_q)
    for p in range(n):
        for q in range(n):
            k = -1j * kappa_act[p, q]
            if abs(k) < 1e-16:
                continue
            for spin in (0, 1):
                i = spec.spin_orbital(p, spin)
                j = spec.spin_orbital(q, spin)
                h.add_sum(
                    jw_term(FermionTerm(k, ((i, True), (j, False))), n_q)
                )
    return h.hermitized()
