"""Spin-resolved PBE exchange-correlation kernel with analytic
derivatives.

Inputs are densities per spin channel and the contracted gradients
sigma_uu = |grad n_up|^2, sigma_ud = grad n_up . grad n_dn,
sigma_dd = |grad n_dn|^2.  Output is the energy density per volume and
its partial derivatives with respect to all five variables.

Constants are the published values of the functional parametrization
(exchange kappa/mu; PW92 fit coefficients; gradient coefficients
beta/gamma of the correlation correction).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# --- exchange constants
KAPPA = 0.804
MU = 0.2195149727645171

# --- correlation gradient-correction constants
BETA = 0.06672455060314922
GAMMA_C = 0.031090690869654895  # (1 - ln 2) / pi^2

# --- PW92 parametrization (A, alpha1, beta1, beta2, beta3, beta4)
_PW92_UNPOL = (0.031091, 0.21370, 7.5957, 3.5876, 1.6382, 0.49294)
_PW92_POL = (0.015545, 0.20548, 14.1189, 6.1977, 3.3662, 0.62517)
_PW92_ALPHA = (0.016887, 0.11125, 10.357, 3.6231, 0.88026, 0.49671)

# f''(0) of the spin-interpolation function, 8/(9 (2^(4/3) - 2)).
_FPP0_VAL = 1.709920934161365714

DENSITY_FLOOR = 1e-12
_ZETA_CLAMP = 1.0 - 1e-10
_EXP_CLAMP = 500.0

_CX = -0.75 * (3.0 / np.pi) ** (1.0 / 3.0)  # LDA exchange prefactor
_CS2 = 1.0 / (4.0 * (3.0 * np.pi**2) ** (2.0 / 3.0))  # s^2 = CS2 * sigma / n^(8/3)


def lda_exchange_density(n: np.ndarray) -> np.ndarray:
    """Closed-form unpolarized LDA exchange energy density (per volume)."""
    return _CX * np.asarray(n) ** (4.0 / 3.0)


def _exchange_unpol(n, sigma):
    """PBE exchange for an unpolarized density; returns (f, df/dn, df/dsigma)."""
    n = np.maximum(n, DENSITY_FLOOR)
    s2 = _CS2 * sigma / n ** (8.0 / 3.0)
    denom = 1.0 + MU * s2 / KAPPA
    fx = 1.0 + KAPPA - KAPPA / denom
    dfx = MU / denom**2  # dFx/ds2
    f = _CX * n ** (4.0 / 3.0) * fx
    dfdn = (4.0 / 3.0) * _CX * n ** (1.0 / 3.0) * (fx - 2.0 * s2 * dfx)
    dfdsigma = _CX * _CS2 * n ** (-4.0 / 3.0) * dfx
    return f, dfdn, dfdsigma


def _pw92_g(rs, params):
    """Spin-interpolation component G(rs) and dG/drs."""
    a, a1, b1, b2, b3, b4 = params
    sq = np.sqrt(rs)
    q0 = -2.0 * a * (1.0 + a1 * rs)
    q1 = 2.0 * a * (b1 * sq + b2 * rs + b3 * rs * sq + b4 * rs * rs)
    q1p = a * (b1 / sq + 2.0 * b2 + 3.0 * b3 * sq + 4.0 * b4 * rs)
    log_arg = np.log1p(1.0 / q1)
    g = q0 * log_arg
    dg = -2.0 * a * a1 * log_arg - q0 * q1p / (q1 * q1 + q1)
    return g, dg


def _pw92(rs, zeta):
    """PW92 correlation energy per particle and (d/drs, d/dzeta)."""
    e0, de0 = _pw92_g(rs, _PW92_UNPOL)
    e1, de1 = _pw92_g(rs, _PW92_POL)
    mac, dmac = _pw92_g(rs, _PW92_ALPHA)  # this is -alpha_c
    alpha_c, dalpha_c = -mac, -dmac

    z = np.clip(zeta, -_ZETA_CLAMP, _ZETA_CLAMP)
    zp = (1.0 + z) ** (4.0 / 3.0)
    zm = (1.0 - z) ** (4.0 / 3.0)
    denom = 2.0 ** (4.0 / 3.0) - 2.0
    fz = (zp + zm - 2.0) / denom
    dfz = (4.0 / 3.0) * ((1.0 + z) ** (1.0 / 3.0) - (1.0 - z) ** (1.0 / 3.0)) / denom
    z4 = z**4

    # e_c = e0 + alpha_c * f(z)/f''(0) * (1 - z^4) + (e1 - e0) f(z) z^4
    ec = e0 + alpha_c * fz * (1.0 - z4) / _FPP0_VAL + (e1 - e0) * fz * z4
    dec_drs = de0 + dalpha_c * fz * (1.0 - z4) / _FPP0_VAL + (de1 - de0) * fz * z4
    dec_dz = (
        alpha_c * (dfz * (1.0 - z4) - 4.0 * z**3 * fz) / _FPP0_VAL
        + (e1 - e0) * (dfz * z4 + 4.0 * z**3 * fz)
    )
    return ec, dec_drs, dec_dz


def _correlation(n, zeta, sigma_tot):
    """PBE correlation energy density f_c = n (e_c + H) and derivatives
    (df/dn at fixed zeta/sigma, df/dzeta, df/dsigma_tot)."""
    n = np.maximum(n, DENSITY_FLOOR)
    rs = (3.0 / (4.0 * np.pi * n)) ** (1.0 / 3.0)
    ec, dec_drs, dec_dz = _pw92(rs, zeta)

    z = np.clip(zeta, -_ZETA_CLAMP, _ZETA_CLAMP)
    phi = 0.5 * ((1.0 + z) ** (2.0 / 3.0) + (1.0 - z) ** (2.0 / 3.0))
    dphi_dz = ((1.0 + z) ** (-1.0 / 3.0) - (1.0 - z) ** (-1.0 / 3.0)) / 3.0
    phi3 = phi**3

    # t^2 = sigma / (2 phi k_s n)^2 with k_s^2 = 4 k_F / pi
    kf = (3.0 * np.pi**2 * n) ** (1.0 / 3.0)
    ks2 = 4.0 * kf / np.pi
    t2 = sigma_tot / (4.0 * phi * phi * ks2 * n * n)

    expo = np.clip(-ec / (GAMMA_C * phi3), -_EXP_CLAMP, _EXP_CLAMP)
    expm = np.expm1(expo)
    expm = np.where(np.abs(expm) < 1e-300, 1e-300, expm)
    a_coef = (BETA / GAMMA_C) / expm

    at2 = a_coef * t2
    num = 1.0 + at2
    den = 1.0 + at2 + at2 * at2
    ratio = num / den
    arg = (BETA / GAMMA_C) * t2 * ratio
    h = GAMMA_C * phi3 * np.log1p(arg)

    # partials of h
    one_over = 1.0 / (1.0 + arg)
    dratio_dat2 = (den - num * (1.0 + 2.0 * at2)) / (den * den)
    darg_dt2 = (BETA / GAMMA_C) * (ratio + t2 * dratio_dat2 * a_coef)
    darg_da = (BETA / GAMMA_C) * t2 * dratio_dat2 * t2
    dh_dt2 = GAMMA_C * phi3 * one_over * darg_dt2
    dh_da = GAMMA_C * phi3 * one_over * darg_da
    dh_dphi_expl = 3.0 * GAMMA_C * phi * phi * np.log1p(arg)

    # da/dec and da/dphi
    dexpm = np.exp(np.clip(expo, -_EXP_CLAMP, _EXP_CLAMP))
    da_dec = (BETA / GAMMA_C) * dexpm / (expm * expm * GAMMA_C * phi3)
    da_dphi = -(BETA / GAMMA_C) * dexpm / (expm * expm) * (3.0 * ec / (GAMMA_C * phi3 * phi))

    dt2_dn = -(7.0 / 3.0) * t2 / n
    dt2_dphi = -2.0 * t2 / phi
    dt2_dsigma = 1.0 / (4.0 * phi * phi * ks2 * n * n)

    drs_dn = -rs / (3.0 * n)

    # f = n (ec + h); chain in (n, zeta, sigma) with zeta independent.
    dec_dn = dec_drs * drs_dn
    dh_dn = dh_dt2 * dt2_dn + dh_da * da_dec * dec_dn
    dh_dz = (
        (dh_dphi_expl + dh_dt2 * dt2_dphi + dh_da * da_dphi) * dphi_dz
        + dh_da * da_dec * dec_dz
    )

    f = n * (ec + h)
    df_dn = ec + h + n * (dec_dn + dh_dn)
    df_dz = n * (dec_dz + dh_dz)
    df_dsigma = n * dh_dt2 * dt2_dsigma
    return f, df_dn, df_dz, df_dsigma


@dataclass
class XcOutput:
    f: np.ndarray  # energy density per volume
    d_rho_up: np.ndarray
    d_rho_dn: np.ndarray
    d_sigma_uu: np.ndarray
    d_sigma_ud: np.ndarray
    d_sigma_dd: np.ndarray


def pbe_xc(
    rho_up: np.ndarray,
    rho_dn: np.ndarray,
    sigma_uu: np.ndarray,
    sigma_ud: np.ndarray,
    sigma_dd: np.ndarray,
    with_exchange: bool = True,
    with_correlation: bool = True,
) -> XcOutput:
    """Energy density and derivatives of the generalized-gradient kernel.

    Exchange uses the exact spin-scaling relation
    E_x[n_up, n_dn] = (E_x[2 n_up] + E_x[2 n_dn]) / 2; correlation is the
    PW92 local part plus the logarithmic gradient correction.
    """
    rho_up = np.asarray(rho_up, dtype=float)
    rho_dn = np.asarray(rho_dn, dtype=float)
    shape = rho_up.shape
    f = np.zeros(shape)
    d_ru = np.zeros(shape)
    d_rd = np.zeros(shape)
    d_suu = np.zeros(shape)
    d_sud = np.zeros(shape)
    d_sdd = np.zeros(shape)

    live_u = rho_up > DENSITY_FLOOR
    live_d = rho_dn > DENSITY_FLOOR

    if with_exchange:
        fu, dnu, dsu = _exchange_unpol(2.0 * rho_up, 4.0 * sigma_uu)
        fd, dnd, dsd = _exchange_unpol(2.0 * rho_dn, 4.0 * sigma_dd)
        f += np.where(live_u, 0.5 * fu, 0.0) + np.where(live_d, 0.5 * fd, 0.0)
        d_ru += np.where(live_u, dnu, 0.0)
        d_rd += np.where(live_d, dnd, 0.0)
        d_suu += np.where(live_u, 2.0 * dsu, 0.0)
        d_sdd += np.where(live_d, 2.0 * dsd, 0.0)

    if with_correlation:
        n = rho_up + rho_dn
        live = n > DENSITY_FLOOR
        zeta = np.where(live, (rho_up - rho_dn) / np.maximum(n, DENSITY_FLOOR), 0.0)
        sigma_tot = sigma_uu + 2.0 * sigma_ud + sigma_dd
        fc, dfc_dn, dfc_dz, dfc_ds = _correlation(n, zeta, sigma_tot)
        # zeta chain: dz/dn_up = (1 - z)/n, dz/dn_dn = -(1 + z)/n
        nn = np.maximum(n, DENSITY_FLOOR)
        f += np.where(live, fc, 0.0)
        d_ru += np.where(live, dfc_dn + dfc_dz * (1.0 - zeta) / nn, 0.0)
        d_rd += np.where(live, dfc_dn - dfc_dz * (1.0 + zeta) / nn, 0.0)
        d_suu += np.where(live, dfc_ds, 0.0)
        d_sud += np.where(live, 2.0 * dfc_ds, 0.0)
        d_sdd += np.where(live, dfc_ds, 0.0)

    return XcOutput(f, d_ru, d_rd, d_suu, d_sud, d_sdd)
