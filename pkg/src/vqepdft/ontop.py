"""On-top pair-density functional: translated spin densities, the energy
E_ot, and its derivatives with respect to the RDM elements.

The translation re-feeds a spin-density functional with effective spin
densities built from the total density and the on-top ratio
R = Pi / (rho/2)^2:

    rho_t_up/dn = (rho/2) (1 +/- zeta),   zeta = sqrt(1 - R) (R clamped to [0,1])
    grad_t_up/dn = (grad rho/2) (1 +/- zeta)

("t" scheme: R is not differentiated through the gradient translation).
The "ft" variant replaces the square root by a quintic spline between
R = 0.9 and R = 1.15 that smooths the kink at R = 1; value and first two
derivatives match sqrt(1-R) at R = 0.9 and vanish at R = 1.15.

``v_ot``/``w_ot`` are the total partial derivatives of E_ot with respect
to gamma (at fixed Gamma) and Gamma (at fixed gamma) of the density
pipeline in :mod:`vqepdft.grid`, projected onto the tensors' symmetry
classes, so central finite differences of E_ot along symmetry-respecting
RDM perturbations reproduce them directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .fermion import ActiveSpaceSpec
from .grid import GridDensities, MoleculeBasis, QuadratureGrid, densities_on_grid, eval_aos, spin_blocks
from .pbe import DENSITY_FLOOR, pbe_xc
from .rdm import RdmPair

# "ft" smoothing window in the on-top ratio.
FT_R0 = 0.9
FT_R1 = 1.15

_KINK_CLAMP = 1.0 - 1e-12


def _ft_spline_coeffs() -> np.ndarray:
    """Quintic matching sqrt(1-R) with two derivatives at R0, zero at R1."""
    r0, r1 = FT_R0, FT_R1
    z0 = np.sqrt(1.0 - r0)
    d0 = -0.5 / np.sqrt(1.0 - r0)
    dd0 = -0.25 * (1.0 - r0) ** -1.5

    def rows(r):
        return [
            [r**k for k in range(6)],
            [k * r ** (k - 1) if k >= 1 else 0.0 for k in range(6)],
            [k * (k - 1) * r ** (k - 2) if k >= 2 else 0.0 for k in range(6)],
        ]

    a = np.array(rows(r0) + rows(r1))
    b = np.array([z0, d0, dd0, 0.0, 0.0, 0.0])
    return np.linalg.solve(a, b)


_FT_COEF = _ft_spline_coeffs()


def _zeta_of_ratio(ratio: np.ndarray, variant: str) -> Tuple[np.ndarray, np.ndarray]:
    """(zeta, dzeta/dR) for the chosen translation variant."""
    r = np.asarray(ratio, dtype=float)
    if variant == "t":
        rc = np.clip(r, 0.0, 1.0)
        zeta = np.sqrt(1.0 - rc)
        # derivative path: clamp away from the R=1 kink, zero beyond it
        rd = np.minimum(r, _KINK_CLAMP)
        dz = np.where(r < 1.0, -0.5 / np.sqrt(1.0 - rd), 0.0)
        return zeta, dz
    if variant == "ft":
        zeta = np.empty_like(r)
        dz = np.empty_like(r)
        low = r <= FT_R0
        mid = (r > FT_R0) & (r < FT_R1)
        high = r >= FT_R1
        rl = np.clip(r, 0.0, FT_R0)
        zeta[low] = np.sqrt(1.0 - rl[low])
        dz[low] = -0.5 / np.sqrt(1.0 - rl[low])
        powers = np.vander(r[mid], 6, increasing=True)
        zeta[mid] = powers @ _FT_COEF
        dz[mid] = sum(k * _FT_COEF[k] * r[mid] ** (k - 1) for k in range(1, 6))
        zeta[high] = 0.0
        dz[high] = 0.0
        return zeta, dz
    raise ValueError(f"unknown translation variant {variant!r}")


@dataclass
class TranslatedSpinDensities:
    rho_t_up: np.ndarray
    rho_t_dn: np.ndarray
    grad_t_up: np.ndarray  # (3, npts)
    grad_t_dn: np.ndarray
    ratio: np.ndarray  # R per point
    live: np.ndarray  # mask of points above the density floor


def translate(
    rho: np.ndarray,
    grad_rho: np.ndarray,
    pi: np.ndarray,
    variant: str = "t",
) -> TranslatedSpinDensities:
    """Effective spin densities from (rho, grad rho, Pi)."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < -1e-10):
        raise ValueError("negative density beyond tolerance")
    live = rho > DENSITY_FLOOR
    safe_rho = np.where(live, rho, 1.0)
    ratio = np.where(live, 4.0 * pi / safe_rho**2, 0.0)
    zeta, _ = _zeta_of_ratio(ratio, variant)
    cu = 0.5 * (1.0 + zeta)
    cd = 0.5 * (1.0 - zeta)
    rho_u = np.where(live, rho * cu, 0.0)
    rho_d = np.where(live, rho * cd, 0.0)
    grad_u = np.where(live[None, :], grad_rho * cu[None, :], 0.0)
    grad_d = np.where(live[None, :], grad_rho * cd[None, :], 0.0)
    return TranslatedSpinDensities(rho_u, rho_d, grad_u, grad_d, ratio, live)


def eot_energy(
    tsd: TranslatedSpinDensities, weights: np.ndarray, with_exchange: bool = True,
    with_correlation: bool = True,
) -> Tuple[float, np.ndarray]:
    """E_ot and the per-point energy density."""
    suu = np.einsum("dg,dg->g", tsd.grad_t_up, tsd.grad_t_up)
    sud = np.einsum("dg,dg->g", tsd.grad_t_up, tsd.grad_t_dn)
    sdd = np.einsum("dg,dg->g", tsd.grad_t_dn, tsd.grad_t_dn)
    out = pbe_xc(
        tsd.rho_t_up, tsd.rho_t_dn, suu, sud, sdd,
        with_exchange=with_exchange, with_correlation=with_correlation,
    )
    e_density = np.where(tsd.live, out.f, 0.0)
    return float(np.dot(weights, e_density)), e_density


@dataclass
class OnTopResult:
    e_ot: float
    v_ot: np.ndarray  # d E_ot / d gamma  (n_so x n_so, Hermitian)
    w_ot: np.ndarray  # d E_ot / d Gamma (antisymmetric pairs, Hermitian)
    per_point_energy_density: np.ndarray


def _pointwise_derivatives(
    dens: GridDensities, variant: str
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """de/drho, de/dG (G = |grad rho|^2), de/dPi, energy density, live mask."""
    rho = dens.rho
    live = rho > DENSITY_FLOOR
    safe_rho = np.where(live, rho, 1.0)
    ratio = np.where(live, 4.0 * dens.pi / safe_rho**2, 0.0)
    zeta, dz_dr = _zeta_of_ratio(ratio, variant)
    cu = 0.5 * (1.0 + zeta)
    cd = 0.5 * (1.0 - zeta)
    g_tot = np.einsum("dg,dg->g", dens.grad_rho, dens.grad_rho)

    ru = rho * cu
    rd = rho * cd
    suu = cu * cu * g_tot
    sud = cu * cd * g_tot
    sdd = cd * cd * g_tot
    xc = pbe_xc(ru, rd, suu, sud, sdd)

    # translation chain
    de_dzeta = (
        (xc.d_rho_up - xc.d_rho_dn) * 0.5 * rho
        + xc.d_sigma_uu * cu * g_tot
        - xc.d_sigma_ud * 0.5 * zeta * g_tot
        - xc.d_sigma_dd * cd * g_tot
    )
    dr_drho = -2.0 * ratio / safe_rho
    dr_dpi = 4.0 / safe_rho**2

    de_drho = xc.d_rho_up * cu + xc.d_rho_dn * cd + de_dzeta * dz_dr * dr_drho
    de_dpi = de_dzeta * dz_dr * dr_dpi
    de_dg = xc.d_sigma_uu * cu * cu + xc.d_sigma_ud * cu * cd + xc.d_sigma_dd * cd * cd

    zero = np.zeros_like(rho)
    e_density = np.where(live, xc.f, 0.0)
    return (
        np.where(live, de_drho, zero),
        np.where(live, de_dg, zero),
        np.where(live, de_dpi, zero),
        e_density,
        live,
    )


def eot_rdm_derivatives(
    rdms: RdmPair,
    c_act: np.ndarray,
    basis: MoleculeBasis,
    grid: QuadratureGrid,
    spec: ActiveSpaceSpec,
    variant: str = "t",
    c_core: np.ndarray | None = None,
) -> OnTopResult:
    """E_ot with dE_ot/dgamma and dE_ot/dGamma assembled on the grid.

    With the cumulant-based on-top density the same-spin Pi channel of
    dE/dgamma cancels against the mean-field term; what survives is the
    density/gradient channel, a core-density Pi term when doubly occupied
    orbitals are present, and spin-flip blocks from the exchange part of
    the cumulant.
    """
    if variant == "none":
        n_q = spec.n_qubits
        return OnTopResult(0.0, np.zeros((n_q, n_q)), np.zeros((n_q,) * 4), np.zeros(grid.n_points))

    dens = densities_on_grid(rdms, c_act, basis, grid, spec, c_core=c_core)
    de_drho, de_dg, de_dpi, e_density, live = _pointwise_derivatives(dens, variant)
    e_ot = float(np.dot(grid.weights, e_density))

    ao_vals, ao_grads = eval_aos(basis, grid.points)
    m = ao_vals @ c_act
    dm = np.stack([ao_grads[d] @ c_act for d in range(3)])

    w_rho = grid.weights * de_drho
    # de/d grad rho = 2 de/dG * grad rho; contract with grad(m_P m_Q)
    y = 2.0 * grid.weights * de_dg
    yg = y[None, :] * dens.grad_rho  # (3, npts)

    v_block = np.einsum("g,gP,gQ->PQ", w_rho, m, m)
    grad_term = np.einsum("dg,dgP,gQ->PQ", yg, dm, m)
    v_block = v_block + grad_term + grad_term.T

    # core-density contribution through the Pi channel (zero without core)
    if c_core is not None and c_core.size:
        core_vals = ao_vals @ c_core
        rho_core_half = np.einsum("gi,gi->g", core_vals, core_vals)
        w_pi_core = grid.weights * de_dpi * rho_core_half
        v_block = v_block + np.einsum("g,gP,gQ->PQ", w_pi_core, m, m)

    n = spec.n_act
    n_q = spec.n_qubits
    idx = [
        [spec.spin_orbital(p, 0) for p in range(n)],
        [spec.spin_orbital(p, 1) for p in range(n)],
    ]
    v_ot = np.zeros((n_q, n_q), dtype=complex)
    v_ot[np.ix_(idx[0], idx[0])] = v_block
    v_ot[np.ix_(idx[1], idx[1])] = v_block

    # spin-flip blocks: Pi carries + rho_ab * rho_ba from the cumulant's
    # exchange term; differentiate it explicitly.
    g = spin_blocks(rdms.gamma, spec)
    if np.abs(g["ab"]).max() > 1e-14 or np.abs(g["ba"]).max() > 1e-14:
        rho_ab = np.einsum("PS,gP,gS->g", g["ab"], m, m)
        rho_ba = np.einsum("PS,gP,gS->g", g["ba"], m, m)
        w_pi = grid.weights * de_dpi
        v_ot[np.ix_(idx[0], idx[1])] = np.einsum("g,gP,gQ->PQ", w_pi * rho_ba, m, m)
        v_ot[np.ix_(idx[1], idx[0])] = np.einsum("g,gP,gQ->PQ", w_pi * rho_ab, m, m)

    # dE/dGamma: T[P,Q,R,S] = sum_g w de/dPi m^4 (totally symmetric),
    # mapped with the (1/4) spin antisymmetrization factor.
    t_spatial = np.einsum(
        "g,gP,gQ,gR,gS->PQRS", grid.weights * de_dpi, m, m, m, m, optimize=True
    )
    w_ot = np.zeros((n_q,) * 4)
    for s1 in (0, 1):
        for s2 in (0, 1):
            if s1 == s2:
                continue  # same-spin patterns cancel exactly
            w_ot[np.ix_(idx[s1], idx[s2], idx[s1], idx[s2])] += 0.25 * t_spatial
            w_ot[np.ix_(idx[s1], idx[s2], idx[s2], idx[s1])] -= 0.25 * t_spatial

    return OnTopResult(
        e_ot=e_ot,
        v_ot=v_ot if np.iscomplexobj(rdms.gamma) else v_ot.real,
        w_ot=w_ot,
        per_point_energy_density=e_density,
    )
