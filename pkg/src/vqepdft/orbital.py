"""Orbital optimization: generalized Fock matrix and gradient, rotation
steps, Trotterized rotation circuits, and the outer self-consistent loop.

Sign conventions are fixed operationally by two tests rather than by
narrative: (i) applying the compiled rotation circuit for kappa to the
state reproduces measuring the untouched state against integrals rotated
by exp(-kappa); (ii) the gradient g matches central finite differences
of the total energy along that same direction.  A steepest-descent step
kappa = -alpha g then lowers the energy.

The orbital window is the full set of orbitals in the current integrals;
inside it sit (window-inactive doubly occupied, active, virtual)
orbitals.  Gradients are evaluated with full-window RDMs assembled from
the doubly occupied pattern plus the measured active-space RDMs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .ansatz import AnsatzLayout, initial_parameters, prepare_state, AnsatzParameters
from .fermion import ActiveSpaceSpec, excitation_generator_qubit
from .grid import MoleculeBasis, QuadratureGrid
from .integrals import MolecularIntegrals, MoCoefficients, freeze_core, orbital_exp, rotate, spinorbital_tensors
from .ontop import OnTopResult, eot_rdm_derivatives
from .pauli import PauliSum
from .rdm import RdmPair, energy_from_rdms, measure_rdms
from .simulator import Circuit, Gate, StateVector
from .vqe import Backend, OptimizerConfig, VqeResult, minimize


@dataclass
class OrbitalRotation:
    """Antisymmetric generator over the orbital window plus its step size.

    ``K = -i kappa`` (unit time step) is the Hermitian one-body matrix
    whose evolution realizes the rotation on the register.
    """

    kappa: np.ndarray
    step_alpha: float = 1.0

    def __post_init__(self):
        if not np.allclose(self.kappa, -self.kappa.T, atol=1e-12):
            raise ValueError("kappa must be real antisymmetric")

    @property
    def K(self) -> np.ndarray:
        return -1j * self.kappa


# ---------------------------------------------------------------------------
# Full-window RDMs from the doubly occupied pattern + active RDMs.

def full_window_rdms(
    rdms_act: RdmPair, n_inact: int, n_act: int, n_virt: int
) -> RdmPair:
    """Embed active-space RDMs into the full orbital window.

    gamma_t = (doubly occupied pattern) + (active block); the full 2-RDM
    is the Wick product of gamma_t plus the active-space cumulant.
    """
    n_orb = n_inact + n_act + n_virt
    n_so = 2 * n_orb
    n_so_act = 2 * n_act

    def embed(so_act: int) -> int:
        # blocked order in both spaces: alpha block then beta block
        spatial, spin = so_act % n_act, so_act // n_act
        return n_inact + spatial + spin * n_orb

    gamma_t = np.zeros((n_so, n_so), dtype=complex)
    for p in range(n_inact):
        gamma_t[p, p] = 1.0
        gamma_t[p + n_orb, p + n_orb] = 1.0
    act_idx = np.array([embed(i) for i in range(n_so_act)])
    gamma_t[np.ix_(act_idx, act_idx)] = rdms_act.gamma

    lam_act = rdms_act.Gamma - (
        np.einsum("pr,qs->pqrs", rdms_act.gamma, rdms_act.gamma)
        - np.einsum("ps,qr->pqrs", rdms_act.gamma, rdms_act.gamma)
    )
    big = np.einsum("pr,qs->pqrs", gamma_t, gamma_t) - np.einsum(
        "ps,qr->pqrs", gamma_t, gamma_t
    )
    big[np.ix_(act_idx, act_idx, act_idx, act_idx)] += lam_act
    return RdmPair(gamma=gamma_t, Gamma=big)


# ---------------------------------------------------------------------------
# Generalized Fock matrix and orbital gradient.

def generalized_fock(
    gamma: np.ndarray,
    big: np.ndarray,
    h1_so: np.ndarray,
    h2_so: np.ndarray,
    v_ot: np.ndarray | None = None,
    w_ot: np.ndarray | None = None,
) -> np.ndarray:
    """F_pq = sum_r gamma_pr h_qr + 1/2 sum_rst Gamma_prst h2_qrst, plus
    the same contractions of (v_ot, 4 w_ot) when a functional is active.

    (v, w) are true energy duals: dE_ot = sum v dgamma + sum w dGamma;
    the factor 4 aligns w with the 1/4-convention of the two-body
    integral tensor.
    """
    f = np.einsum("pr,qr->pq", gamma, h1_so)
    f = f + 0.5 * np.einsum("prst,qrst->pq", big, h2_so, optimize=True)
    if v_ot is not None:
        f = f + np.einsum("pr,qr->pq", gamma, v_ot)
    if w_ot is not None:
        f = f + 2.0 * np.einsum("prst,qrst->pq", big, w_ot, optimize=True)
    return f


def orbital_gradient_spatial(f_so: np.ndarray, n_orb: int) -> np.ndarray:
    """g_PQ = 2 (F_PQ - F_QP) summed over the two spin copies."""
    g_so = 2.0 * (f_so - f_so.T.conj())
    g = g_so[:n_orb, :n_orb] + g_so[n_orb:, n_orb:]
    return np.real(g)


def mcpdft_fock_and_gradient(
    rdms_full: RdmPair,
    h1_so: np.ndarray,
    h2_so: np.ndarray,
    ontop: OnTopResult | None,
    n_orb: int,
) -> Tuple[np.ndarray, np.ndarray]:
    v = ontop.v_ot if ontop is not None else None
    w = ontop.w_ot if ontop is not None else None
    f = generalized_fock(rdms_full.gamma, rdms_full.Gamma, h1_so, h2_so, v, w)
    return f, orbital_gradient_spatial(f, n_orb)


def coulomb_fock_and_gradient(
    rdms_full: RdmPair,
    ints: MolecularIntegrals,
    h1_so: np.ndarray,
    ontop: OnTopResult | None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Gradient of the one-body + classical-Coulomb + E_ot assembly."""
    n_orb = ints.n_orb
    d_spatial = spin_summed_spatial(rdms_full.gamma, n_orb)
    j_pot = np.einsum("pqrs,rs->pq", ints.eri, d_spatial)
    x_so = h1_so.copy()
    x_so[:n_orb, :n_orb] += j_pot
    x_so[n_orb:, n_orb:] += j_pot
    f = np.einsum("pr,qr->pq", rdms_full.gamma, x_so)
    if ontop is not None:
        f = f + np.einsum("pr,qr->pq", rdms_full.gamma, ontop.v_ot)
        f = f + 2.0 * np.einsum(
            "prst,qrst->pq", rdms_full.Gamma, ontop.w_ot, optimize=True
        )
    return f, orbital_gradient_spatial(f, n_orb)


def spin_summed_spatial(gamma_so: np.ndarray, n_orb: int) -> np.ndarray:
    return np.real(gamma_so[:n_orb, :n_orb] + gamma_so[n_orb:, n_orb:])


def kappa_step(g: np.ndarray, alpha: float) -> OrbitalRotation:
    """Steepest-descent generator kappa = -alpha g from the p>q set."""
    if alpha <= 0:
        raise ValueError("step size must be positive")
    if not np.all(np.isfinite(g)):
        raise ValueError("gradient contains non-finite entries")
    lower = np.tril(-alpha * g, k=-1)
    kappa = lower - lower.T
    return OrbitalRotation(kappa=kappa, step_alpha=alpha)


# ---------------------------------------------------------------------------
# Trotterized rotation circuit.

def pauli_rotation_gadget(p, angle: float) -> List[Gate]:
    """exp(-i angle/2 P) as basis changes + CNOT ladder + RZ."""
    gates: List[Gate] = []
    support = [q for q in range(p.n_qubits) if p.letter(q) != "I"]
    if not support:
        return []  # global phase only; irrelevant for states
    pre: List[Gate] = []
    for q in support:
        letter = p.letter(q)
        if letter == "X":
            pre.append(Gate("H", (q,)))
        elif letter == "Y":
            pre.append(Gate("Sdg", (q,)))
            pre.append(Gate("H", (q,)))
    gates.extend(pre)
    for a, b in zip(support[:-1], support[1:]):
        gates.append(Gate("CNOT", (a, b)))
    gates.append(Gate("RZ", (support[-1],), (angle,)))
    for a, b in reversed(list(zip(support[:-1], support[1:]))):
        gates.append(Gate("CNOT", (a, b)))
    for g in reversed(pre):
        gates.extend(g.inverse_gates())
    return gates


def compile_orbital_circuit(
    kappa: np.ndarray,
    spec: ActiveSpaceSpec,
    trotter_steps: int = 4,
    order: int = 2,
) -> Circuit:
    """Compile exp(-kappa_hat) into Pauli-rotation gadgets.

    ``kappa`` is the active-active generator (n_act x n_act); a larger
    matrix is accepted only if it vanishes outside the active block.
    Terms are ordered lexicographically; ``order`` 1 is the plain ordered
    product, 2 the symmetrized (palindromic) product per step.
    """
    n = spec.n_act
    if kappa.shape[0] != kappa.shape[1]:
        raise ValueError("kappa must be square")
    if kappa.shape[0] != n:
        if kappa.shape[0] < n:
            raise ValueError("kappa smaller than the active space")
        full = kappa
        outside = full.copy()
        outside[:n, :n] = 0.0
        if np.abs(outside).max() > 1e-12:
            raise ValueError("kappa has nonzero entries outside the active block")
        kappa = full[:n, :n]
    if trotter_steps < 1:
        raise ValueError("trotter_steps must be >= 1")
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")

    circ = Circuit(spec.n_qubits)
    h_orb = excitation_generator_qubit(kappa, spec)
    terms = [(p, c.real) for p, c in h_orb if not p.is_identity()]
    if not terms:
        return circ
    dt = 1.0 / trotter_steps
    for _ in range(trotter_steps):
        if order == 1:
            for p, k in terms:
                for g in pauli_rotation_gadget(p, 2.0 * k * dt):
                    circ.add(g)
        else:
            for p, k in terms:
                for g in pauli_rotation_gadget(p, k * dt):
                    circ.add(g)
            for p, k in reversed(terms):
                for g in pauli_rotation_gadget(p, k * dt):
                    circ.add(g)
    return circ


# ---------------------------------------------------------------------------
# Self-consistent loop.

@dataclass
class ScfConfig:
    tol_energy: float = 1e-7
    tol_grad: float = 1e-4
    max_macro_iter: int = 50
    alpha0: float = 0.2
    max_halvings: int = 8
    trotter_steps: int = 4
    trotter_order: int = 2
    assembly: str = "paper"  # "paper" | "standard"
    pdft_variant: str = "t"  # "t" | "ft" | "none"
    aa_in_circuit: bool = True
    monotone_tol: float = 1e-9


@dataclass
class ScfState:
    iteration: int
    theta: np.ndarray
    lambda_angles: List[np.ndarray]
    energy_mcscf: float
    e_ot: float
    energy_total: float
    energy_total_paper: float
    energy_total_standard: float
    grad_norm: float
    vqe_converged: bool

    def record(self) -> Dict:
        return {
            "iteration": self.iteration,
            "energy_mcscf": self.energy_mcscf,
            "e_ot": self.e_ot,
            "energy_total": self.energy_total,
            "energy_total_paper": self.energy_total_paper,
            "energy_total_standard": self.energy_total_standard,
            "grad_norm": self.grad_norm,
            "vqe_converged": self.vqe_converged,
        }


@dataclass
class ScfProblem:
    """Inputs of the outer loop: integrals over the orbital window, the
    active space, and (for functional evaluation) the AO-space data."""

    ints: MolecularIntegrals
    spec: ActiveSpaceSpec
    basis: MoleculeBasis | None = None
    mo: MoCoefficients | None = None
    grid: QuadratureGrid | None = None
    n_frozen: int = 0  # frozen columns in mo.C, kept out of the window

    @property
    def n_inact(self) -> int:
        return (self.ints.n_elec - self.spec.n_elec) // 2

    @property
    def n_virt(self) -> int:
        return self.ints.n_orb - self.n_inact - self.spec.n_act

    def window_columns(self, c_full: np.ndarray) -> np.ndarray:
        return c_full[:, self.n_frozen : self.n_frozen + self.ints.n_orb]


@dataclass
class ScfResult:
    converged: bool
    states: List[ScfState]
    theta: np.ndarray
    ints: MolecularIntegrals
    mo: MoCoefficients | None
    circuits: List[Circuit]
    message: str = ""

    @property
    def final(self) -> ScfState:
        return self.states[-1]


def active_window_hamiltonian(
    ints: MolecularIntegrals, spec: ActiveSpaceSpec, n_inact: int
):
    """Effective active-space tensors and qubit Hamiltonian."""
    from .fermion import build_hamiltonian

    eff = freeze_core(ints, n_inact) if n_inact else ints
    h1_so, h2_so = spinorbital_tensors(eff, spec)
    ham = build_hamiltonian(h1_so, h2_so, eff.e_const)
    return ham, h1_so, h2_so, eff.e_const


def _assembly_energies(
    e_mcscf: float,
    e_ot: float,
    ints: MolecularIntegrals,
    rdms_full: RdmPair,
    h1_so_full: np.ndarray,
) -> Tuple[float, float]:
    """(paper, standard) total energies from the current RDMs."""
    e_paper = e_mcscf + e_ot
    n_orb = ints.n_orb
    d_spatial = spin_summed_spatial(rdms_full.gamma, n_orb)
    e_one = float(np.einsum("pq,pq->", rdms_full.gamma, h1_so_full).real)
    e_coul = 0.5 * float(
        np.einsum("pqrs,pq,rs->", ints.eri, d_spatial, d_spatial, optimize=True)
    )
    e_standard = ints.e_const + e_one + e_coul + e_ot
    return e_paper, e_standard


def _frozen_rdm_total_energy(
    ints: MolecularIntegrals,
    rdms_full: RdmPair,
    problem: ScfProblem,
    cfg: ScfConfig,
    c_window: np.ndarray | None,
    c_frozen: np.ndarray | None,
    full_spec: ActiveSpaceSpec,
) -> float:
    """Total energy of the frozen RDMs against the given integrals/orbitals."""
    h1_so, h2_so = spinorbital_tensors(ints, full_spec)
    e_mcscf = energy_from_rdms(rdms_full, h1_so, h2_so, ints.e_const)
    e_ot = 0.0
    if cfg.pdft_variant != "none":
        res = eot_rdm_derivatives(
            rdms_full, c_window, problem.basis, problem.grid, full_spec,
            variant=cfg.pdft_variant, c_core=c_frozen,
        )
        e_ot = res.e_ot
    e_paper, e_standard = _assembly_energies(e_mcscf, e_ot, ints, rdms_full, h1_so)
    return e_paper if cfg.assembly == "paper" else e_standard


def scf_loop(
    problem: ScfProblem,
    layout: AnsatzLayout,
    cfg: ScfConfig = ScfConfig(),
    backend: Backend = Backend(),
    vqe_opts: OptimizerConfig = OptimizerConfig(),
    theta0: np.ndarray | None = None,
) -> ScfResult:
    """Alternate the inner variational optimization with orbital updates
    until the total energy and the orbital-gradient norm both converge."""
    spec = problem.spec
    n_orb = problem.ints.n_orb
    n_inact = problem.n_inact
    if n_inact < 0 or problem.n_virt < 0:
        raise ValueError("electron/orbital counts are inconsistent")
    full_spec = ActiveSpaceSpec(n_act=n_orb, n_elec=problem.ints.n_elec)
    use_pdft = cfg.pdft_variant != "none"
    if use_pdft and (problem.basis is None or problem.mo is None or problem.grid is None):
        raise ValueError("functional evaluation needs basis, MO and grid data")

    ints = problem.ints.copy()
    c_full = problem.mo.C.copy() if problem.mo is not None else None
    circuits: List[Circuit] = []
    lambda_angles: List[np.ndarray] = []
    theta = (
        theta0.copy()
        if theta0 is not None
        else initial_parameters(layout, perturbation=1e-2, seed=7).theta
    )

    states: List[ScfState] = []
    e_prev = np.inf
    alpha = cfg.alpha0
    halvings_left = cfg.max_halvings
    snapshot = None
    converged = False
    message = "max_macro_iter reached"

    for it in range(cfg.max_macro_iter):
        ham, h1_act, h2_act, e_const_act = active_window_hamiltonian(
            ints, spec, n_inact
        )
        vqe = minimize(ham, spec, layout, theta, backend, vqe_opts, circuits)
        theta = vqe.theta_opt
        state_vec = prepare_state(spec, AnsatzParameters(layout, theta), circuits)
        rdms_act = measure_rdms(state_vec, spec, backend)
        e_mcscf = energy_from_rdms(rdms_act, h1_act, h2_act, e_const_act)

        rdms_full = full_window_rdms(rdms_act, n_inact, spec.n_act, problem.n_virt)
        h1_so_full, h2_so_full = spinorbital_tensors(ints, full_spec)

        c_window = problem.window_columns(c_full) if c_full is not None else None
        c_frozen = c_full[:, : problem.n_frozen] if c_full is not None else None
        ontop = None
        e_ot = 0.0
        if use_pdft:
            ontop = eot_rdm_derivatives(
                rdms_full, c_window, problem.basis, problem.grid, full_spec,
                variant=cfg.pdft_variant, c_core=c_frozen,
            )
            e_ot = ontop.e_ot

        if cfg.assembly == "paper":
            _, grad = mcpdft_fock_and_gradient(
                rdms_full, h1_so_full, h2_so_full, ontop, n_orb
            )
        else:
            _, grad = coulomb_fock_and_gradient(rdms_full, ints, h1_so_full, ontop)
        # Rotations among fully occupied or fully empty orbitals are
        # redundant; keep the generator off those blocks.
        grad = _mask_redundant(grad, n_inact, spec.n_act, problem.n_virt)
        grad_norm = float(np.abs(grad).max())

        e_paper, e_standard = _assembly_energies(
            e_mcscf, e_ot, ints, rdms_full, h1_so_full
        )
        e_total = e_paper if cfg.assembly == "paper" else e_standard

        if e_total > e_prev + cfg.monotone_tol and snapshot is not None:
            # Post-update energy rose: reject the last orbital step.
            if halvings_left <= 0:
                message = "energy increase persisted after maximal step halving"
                states.append(_make_state(it, theta, lambda_angles, e_mcscf, e_ot,
                                          e_total, e_paper, e_standard, grad_norm, vqe.converged))
                return ScfResult(False, states, theta, ints, _mo(c_full, problem), circuits, message)
            ints, c_full, circuits, lambda_angles, theta, alpha = snapshot
            alpha *= 0.5
            halvings_left -= 1
            snapshot = None
            continue

        states.append(_make_state(it, theta, lambda_angles, e_mcscf, e_ot,
                                  e_total, e_paper, e_standard, grad_norm, vqe.converged))

        if grad_norm < cfg.tol_grad and (
            abs(e_prev - e_total) < cfg.tol_energy or it == 0
        ):
            # Covers the already-converged input: one iteration, no step.
            converged = True
            message = "energy and orbital gradient converged"
            break
        e_prev = e_total

        # Backtracking line search on the frozen-RDM total energy.
        accepted = False
        trial_alpha = alpha
        for _ in range(cfg.max_halvings):
            kappa = kappa_step(grad, trial_alpha).kappa
            ints_trial = rotate(ints, -kappa)
            c_trial = None
            if c_full is not None:
                c_trial = c_full.copy()
                c_trial[:, problem.n_frozen:] = problem.window_columns(
                    c_full
                ) @ orbital_exp(-kappa)
            e_trial = _frozen_rdm_total_energy(
                ints_trial, rdms_full, problem, cfg,
                problem.window_columns(c_trial) if c_trial is not None else None,
                c_trial[:, : problem.n_frozen] if c_trial is not None else None,
                full_spec,
            )
            if e_trial < e_total:
                accepted = True
                break
            trial_alpha *= 0.5
        if not accepted:
            message = "line search found no descent after maximal halvings"
            converged = grad_norm < 10 * cfg.tol_grad
            break

        snapshot = (ints.copy(), None if c_full is None else c_full.copy(),
                    list(circuits), list(lambda_angles), theta.copy(), trial_alpha)
        alpha = trial_alpha

        kappa = kappa_step(grad, trial_alpha).kappa
        kappa_aa = np.zeros_like(kappa)
        sl = slice(n_inact, n_inact + spec.n_act)
        if cfg.aa_in_circuit:
            kappa_aa[sl, sl] = kappa[sl, sl]
        kappa_rest = kappa - kappa_aa

        if cfg.aa_in_circuit and np.abs(kappa_aa).max() > 1e-14:
            circ = compile_orbital_circuit(
                kappa_aa[sl, sl], spec, cfg.trotter_steps, cfg.trotter_order
            )
            circuits.append(circ)
            h_orb = excitation_generator_qubit(kappa_aa[sl, sl], spec)
            lambda_angles.append(
                np.array([c.real for _, c in h_orb])
            )
        if np.abs(kappa_rest).max() > 1e-14:
            ints = rotate(ints, -kappa_rest)
            if c_full is not None:
                c_full[:, problem.n_frozen:] = problem.window_columns(
                    c_full
                ) @ orbital_exp(-kappa_rest)

    return ScfResult(converged, states, theta, ints, _mo(c_full, problem), circuits, message)


def _mask_redundant(g: np.ndarray, n_inact: int, n_act: int, n_virt: int) -> np.ndarray:
    out = g.copy()
    sl_i = slice(0, n_inact)
    sl_v = slice(n_inact + n_act, n_inact + n_act + n_virt)
    out[sl_i, sl_i] = 0.0
    out[sl_v, sl_v] = 0.0
    return out


def _make_state(it, theta, lambda_angles, e_mcscf, e_ot, e_total, e_paper,
                e_standard, grad_norm, vqe_conv) -> ScfState:
    return ScfState(
        iteration=it,
        theta=theta.copy(),
        lambda_angles=[a.copy() for a in lambda_angles],
        energy_mcscf=e_mcscf,
        e_ot=e_ot,
        energy_total=e_total,
        energy_total_paper=e_paper,
        energy_total_standard=e_standard,
        grad_norm=grad_norm,
        vqe_converged=vqe_conv,
    )


def _mo(c_full, problem) -> MoCoefficients | None:
    return MoCoefficients(C=c_full) if c_full is not None else None
