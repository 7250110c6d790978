"""Extraction of active-space reduced density matrices from the register.

The canonical element set (p <= q for the 1-RDM; p<q, r<s, (p,q) <= (r,s)
for the 2-RDM) is evaluated from the Pauli decompositions of the ladder
products; all remaining elements follow from antisymmetry and
Hermiticity, so the symmetries hold by construction rather than by
averaging inconsistent measurements.

Shot mode groups qubit-wise commuting strings into shared measurement
settings, with one deterministic substream per setting derived from the
root seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .fermion import (
    ActiveSpaceSpec,
    RdmOperatorSet,
    canonical_one_body_indices,
    canonical_two_body_indices,
    rdm_element_operators,
)
from .pauli import PauliString, PauliSum, qubitwise_compatible
from .simulator import (
    Circuit,
    Gate,
    StateVector,
    _parity_of_and,
    pauli_expectation,
    run_circuit,
    sample_bitstrings,
)
from .vqe import Backend


@dataclass
class RdmPair:
    """Spin-orbital 1-RDM gamma and 2-RDM Gamma (dense storage).

    gamma[p, q]      = <a_p^dag a_q>
    Gamma[p, q, r, s] = <a_p^dag a_q^dag a_s a_r>

    ``raw_gamma``/``raw_Gamma`` hold the unprojected shot-mode values
    when a projection was applied (exact mode leaves them None).
    """

    gamma: np.ndarray
    Gamma: np.ndarray
    raw_gamma: np.ndarray | None = None
    raw_Gamma: np.ndarray | None = None

    @property
    def n_spin_orbitals(self) -> int:
        return self.gamma.shape[0]

    def trace_electrons(self) -> float:
        return float(np.trace(self.gamma).real)


def _complete_two_body(
    n_q: int, canonical: Dict[Tuple[int, int, int, int], complex]
) -> np.ndarray:
    g = np.zeros((n_q,) * 4, dtype=complex)
    for (p, q, r, s), v in canonical.items():
        for (a, b, sgn1) in ((p, q, 1.0), (q, p, -1.0)):
            for (c, d, sgn2) in ((r, s, 1.0), (s, r, -1.0)):
                val = sgn1 * sgn2 * v
                g[a, b, c, d] = val
                g[c, d, a, b] = np.conj(val)
    return g


def _pauli_cache_expectation(
    state: StateVector, cache: Dict[PauliString, float], p: PauliString
) -> float:
    if p not in cache:
        cache[p] = pauli_expectation(state, p).real
    return cache[p]


def _eval_exact(state: StateVector, op: PauliSum, cache: Dict[PauliString, float]) -> float:
    total = 0.0
    for p, c in op.terms.items():
        if p.is_identity():
            total += c.real
        else:
            total += c.real * _pauli_cache_expectation(state, cache, p)
    return total


def group_qubitwise(strings: Sequence[PauliString]) -> List[List[PauliString]]:
    """Greedy first-fit grouping into qubit-wise commuting families."""
    groups: List[List[PauliString]] = []
    merged: List[PauliString] = []  # running union letters per group
    for s in sorted(set(strings), key=lambda p: (p.x_mask, p.z_mask)):
        placed = False
        for gi, rep in enumerate(merged):
            if qubitwise_compatible(s, rep):
                groups[gi].append(s)
                merged[gi] = PauliString(
                    s.n_qubits, rep.x_mask | s.x_mask, rep.z_mask | s.z_mask
                )
                placed = True
                break
        if not placed:
            groups.append([s])
            merged.append(s)
    return groups


def grouped_pauli_estimates(
    state: StateVector,
    strings: Sequence[PauliString],
    shots: int,
    seed: int,
) -> Dict[PauliString, float]:
    """Sampled <P> for every string, one measured setting per QWC group."""
    estimates: Dict[PauliString, float] = {}
    groups = group_qubitwise(strings)
    n = state.n_qubits
    for gi, group in enumerate(groups):
        x_union = 0
        z_union = 0
        for s in group:
            x_union |= s.x_mask
            z_union |= s.z_mask
        basis = PauliString(n, x_union, z_union)
        rotated = state.copy()
        from .simulator import measurement_rotation

        run_circuit(rotated, measurement_rotation(basis))
        rng = np.random.default_rng([seed, gi])
        outcomes = sample_bitstrings(rotated, shots, rng)
        for s in group:
            par = _parity_of_and(outcomes, s.support, n)
            estimates[s] = float(np.mean(1.0 - 2.0 * par))
    return estimates


def _eval_operator_set_shots(
    state: StateVector, ops: RdmOperatorSet, shots: int, seed: int
) -> Dict[PauliString, float]:
    strings: List[PauliString] = []
    for table in (ops.one_body, ops.two_body):
        for re_op, im_op in table.values():
            for op in (re_op, im_op):
                if op is None:
                    continue
                strings.extend(p for p in op.terms if not p.is_identity())
    return grouped_pauli_estimates(state, strings, shots, seed)


def _op_value(op: PauliSum, table: Dict[PauliString, float]) -> float:
    total = 0.0
    for p, c in op.terms.items():
        total += c.real * (1.0 if p.is_identity() else table[p])
    return total


def project_physical(rdms: RdmPair, n_elec: int) -> RdmPair:
    """Project shot-noise RDMs back to a physically usable pair.

    gamma is Hermitized, its spectrum clipped to [0, 1], and the trace
    rescaled to the electron count; Gamma is Hermitized under the
    pair-exchange conjugation.  Raw tensors are retained.
    """
    gamma = 0.5 * (rdms.gamma + rdms.gamma.conj().T)
    w, v = np.linalg.eigh(gamma)
    w = np.clip(w, 0.0, 1.0)
    if w.sum() > 0:
        w = w * (n_elec / w.sum())
        w = np.clip(w, 0.0, 1.0)
    gamma_p = (v * w) @ v.conj().T
    big = rdms.Gamma
    big_p = 0.5 * (big + big.transpose(2, 3, 0, 1).conj())
    return RdmPair(
        gamma=gamma_p, Gamma=big_p, raw_gamma=rdms.gamma, raw_Gamma=rdms.Gamma
    )


def measure_rdms(
    state: StateVector,
    spec: ActiveSpaceSpec,
    backend: Backend = Backend(),
    operator_set: RdmOperatorSet | None = None,
) -> RdmPair:
    """Evaluate the active-space RDMs from the prepared state."""
    n_q = spec.n_qubits
    if state.n_qubits != n_q:
        raise ValueError("state size does not match active space")
    ops = operator_set if operator_set is not None else rdm_element_operators(spec)

    if backend.kind == "exact":
        cache: Dict[PauliString, float] = {}
        value = lambda op: _eval_exact(state, op, cache)
    else:
        table = _eval_operator_set_shots(state, ops, backend.shots, backend.seed)
        value = lambda op: _op_value(op, table)

    gamma = np.zeros((n_q, n_q), dtype=complex)
    for p, q in canonical_one_body_indices(n_q):
        re_op, im_op = ops.one_body[(p, q)]
        if im_op is None:
            gamma[p, q] = value(re_op)
        else:
            val = 0.5 * (value(re_op) + 1j * value(im_op))
            gamma[p, q] = val
            gamma[q, p] = np.conj(val)

    canonical: Dict[Tuple[int, int, int, int], complex] = {}
    for key in canonical_two_body_indices(n_q):
        re_op, im_op = ops.two_body[key]
        if im_op is None:
            canonical[key] = complex(value(re_op))
        else:
            canonical[key] = 0.5 * (value(re_op) + 1j * value(im_op))
    big = _complete_two_body(n_q, canonical)

    pair = RdmPair(gamma=gamma, Gamma=big)
    if backend.kind == "shots":
        pair = project_physical(pair, spec.n_elec)
    return pair


def energy_from_rdms(
    rdms: RdmPair,
    h1_so: np.ndarray,
    h2_so: np.ndarray,
    e_const: float,
) -> float:
    """E = e_const + sum h1[p,q] gamma[p,q] + 1/4 sum h2[pqrs] Gamma[pqrs].

    The index pairing matches the Hamiltonian assembly exactly, so on the
    exact backend this reproduces <H> to roundoff.
    """
    n_q = rdms.n_spin_orbitals
    if h1_so.shape != (n_q, n_q) or h2_so.shape != (n_q,) * 4:
        raise ValueError("integral tensor shapes do not match the RDMs")
    e1 = np.einsum("pq,pq->", h1_so, rdms.gamma)
    e2 = 0.25 * np.einsum("pqrs,pqrs->", h2_so, rdms.Gamma)
    return float(e_const + e1.real + e2.real)


def rdm_invariant_violations(rdms: RdmPair, n_elec: int) -> Dict[str, float]:
    """Max-norm violations of the physical-RDM invariants (diagnostics)."""
    g, big = rdms.gamma, rdms.Gamma
    n_q = g.shape[0]
    out = {}
    out["gamma_hermitian"] = float(np.max(np.abs(g - g.conj().T)))
    evals = np.linalg.eigvalsh(0.5 * (g + g.conj().T))
    out["gamma_spectrum"] = float(max(0.0, -evals.min(), evals.max() - 1.0))
    out["gamma_trace"] = abs(float(np.trace(g).real) - n_elec)
    out["Gamma_antisym_pq"] = float(np.max(np.abs(big + big.transpose(1, 0, 2, 3))))
    out["Gamma_antisym_rs"] = float(np.max(np.abs(big + big.transpose(0, 1, 3, 2))))
    out["Gamma_hermitian"] = float(
        np.max(np.abs(big - big.transpose(2, 3, 0, 1).conj()))
    )
    ptrace = np.einsum("pqrq->pr", big)
    out["partial_trace"] = float(np.max(np.abs(ptrace - (n_elec - 1) * g)))
    return out


def rdms_to_text(rdms: RdmPair) -> Tuple[str, str]:
    """Dense text dumps with shape headers (one complex value per line)."""

    def dump(arr: np.ndarray) -> str:
        lines = ["shape " + " ".join(str(d) for d in arr.shape)]
        for v in arr.reshape(-1):
            lines.append(f"{v.real:.16e} {v.imag:.16e}")
        return "\n".join(lines) + "\n"

    return dump(rdms.gamma), dump(rdms.Gamma)


def rdm_array_from_text(text: str) -> np.ndarray:
    lines = [l for l in text.splitlines() if l.strip() and not l.startswith("#")]
    head = lines[0].split()
    if head[0] != "shape":
        raise ValueError("missing shape header in RDM file")
    shape = tuple(int(x) for x in head[1:])
    vals = []
    for ln in lines[1:]:
        re_s, im_s = ln.split()
        vals.append(complex(float(re_s), float(im_s)))
    arr = np.array(vals, dtype=complex)
    if arr.size != int(np.prod(shape)):
        raise ValueError("RDM file value count does not match shape")
    return arr.reshape(shape)
