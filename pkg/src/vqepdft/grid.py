"""Real-space machinery: contracted Gaussian AO evaluation, Becke-
partitioned molecular quadrature, and grid densities from the RDMs.

Lengths are in Bohr, densities in Bohr^-3.  Cartesian shells only
(s, p, 6-component d); each Cartesian component is individually
normalized to unit self-overlap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .fermion import ActiveSpaceSpec
from .rdm import RdmPair

BOHR_PER_ANGSTROM = 1.0 / 0.529177210903

# Bragg-Slater radii (Angstrom) used only to scale the radial map.
_BRAGG_ANGSTROM = {
    "H": 0.35, "He": 1.40, "Li": 1.45, "Be": 1.05, "B": 0.85,
    "C": 0.70, "N": 0.65, "O": 0.60, "F": 0.50, "Ne": 0.45,
    "Na": 1.80, "Mg": 1.50, "Al": 1.25, "Si": 1.10, "P": 1.00,
    "S": 1.00, "Cl": 1.00, "Ar": 1.00,
}

_ELEMENT_CHARGES = {
    "H": 1, "He": 2, "Li": 3, "Be": 4, "B": 5, "C": 6, "N": 7,
    "O": 8, "F": 9, "Ne": 10, "Na": 11, "Mg": 12, "Al": 13,
    "Si": 14, "P": 15, "S": 16, "Cl": 17, "Ar": 18,
}

# Cartesian component exponents per angular momentum.
CARTESIAN_COMPONENTS = {
    0: [(0, 0, 0)],
    1: [(1, 0, 0), (0, 1, 0), (0, 0, 1)],
    2: [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)],
}

_L_NAMES = {"s": 0, "p": 1, "d": 2}
_L_LETTERS = {v: k for k, v in _L_NAMES.items()}


def _double_factorial(n: int) -> float:
    out = 1.0
    while n > 1:
        out *= n
        n -= 2
    return out


def primitive_norm(alpha: float, lx: int, ly: int, lz: int) -> float:
    """Normalization of x^lx y^ly z^lz exp(-alpha r^2)."""
    l = lx + ly + lz
    num = (2.0 * alpha / math.pi) ** 1.5 * (4.0 * alpha) ** l
    den = (
        _double_factorial(2 * lx - 1)
        * _double_factorial(2 * ly - 1)
        * _double_factorial(2 * lz - 1)
    )
    return math.sqrt(num / den)


def _primitive_self_overlap(a: float, b: float, lx: int, ly: int, lz: int) -> float:
    """Overlap of two unnormalized primitives with identical (lx,ly,lz)
    on the same center."""
    p = a + b
    l = lx + ly + lz
    den = (
        _double_factorial(2 * lx - 1)
        * _double_factorial(2 * ly - 1)
        * _double_factorial(2 * lz - 1)
    )
    return den / (2.0 * p) ** l * (math.pi / p) ** 1.5


@dataclass
class Shell:
    atom: int  # 0-based atom index
    l: int
    exponents: np.ndarray
    coefficients: np.ndarray  # raw contraction coefficients

    @property
    def n_components(self) -> int:
        return len(CARTESIAN_COMPONENTS[self.l])


@dataclass
class MoleculeBasis:
    """Atoms (element, nuclear charge, position in Bohr) and shells."""

    atoms: List[Tuple[str, float, np.ndarray]]
    shells: List[Shell]

    def __post_init__(self):
        for sh in self.shells:
            if sh.l not in CARTESIAN_COMPONENTS:
                raise ValueError(f"unsupported angular momentum l={sh.l}")
            if not 0 <= sh.atom < len(self.atoms):
                raise ValueError("shell references unknown atom")

    @property
    def n_ao(self) -> int:
        return sum(sh.n_components for sh in self.shells)

    def ao_descriptors(self) -> List[Tuple[int, Tuple[int, int, int], np.ndarray, np.ndarray, np.ndarray]]:
        """Per-AO: (atom, (lx,ly,lz), exponents, normalized coefficients,
        center)."""
        out = []
        for sh in self.shells:
            center = self.atoms[sh.atom][2]
            for comp in CARTESIAN_COMPONENTS[sh.l]:
                lx, ly, lz = comp
                norms = np.array(
                    [primitive_norm(a, lx, ly, lz) for a in sh.exponents]
                )
                c = sh.coefficients * norms
                # Scale the contraction to unit self-overlap.
                s = 0.0
                for ci, ai in zip(c, sh.exponents):
                    for cj, aj in zip(c, sh.exponents):
                        s += ci * cj * _primitive_self_overlap(ai, aj, lx, ly, lz)
                c = c / math.sqrt(s)
                out.append((sh.atom, comp, sh.exponents, c, center))
        return out

    def nuclear_repulsion(self) -> float:
        e = 0.0
        for i, (_, zi, ri) in enumerate(self.atoms):
            for j in range(i):
                _, zj, rj = self.atoms[j]
                e += zi * zj / np.linalg.norm(ri - rj)
        return e


def parse_molecule_basis(text: str) -> MoleculeBasis:
    """Molecule/basis text format:

        atom <symbol> <x> <y> <z>      (coordinates in Bohr)
        shell <atom#> <l> <nprim>      (atom# 1-based, l in {s,p,d})
        <exponent> <coefficient>       (nprim lines)
    """
    atoms: List[Tuple[str, float, np.ndarray]] = []
    shells: List[Shell] = []
    lines = [l.strip() for l in text.splitlines()]
    i = 0
    while i < len(lines):
        line = lines[i]
        i += 1
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "atom":
            if len(parts) != 5:
                raise ValueError(f"bad atom line: {line!r}")
            sym = parts[1]
            pos = np.array([float(x) for x in parts[2:5]])
            z = _ELEMENT_CHARGES.get(sym)
            if z is None:
                raise ValueError(f"unknown element {sym!r}")
            atoms.append((sym, float(z), pos))
        elif parts[0] == "shell":
            if len(parts) != 4:
                raise ValueError(f"bad shell line: {line!r}")
            atom_no = int(parts[1]) - 1
            l_str = parts[2].lower()
            if l_str not in _L_NAMES:
                raise ValueError(f"unsupported shell type {parts[2]!r}")
            nprim = int(parts[3])
            exps, coefs = [], []
            for _ in range(nprim):
                while i < len(lines) and (not lines[i] or lines[i].startswith("#")):
                    i += 1
                es = lines[i].split()
                if len(es) != 2:
                    raise ValueError(f"bad primitive line: {lines[i]!r}")
                exps.append(float(es[0]))
                coefs.append(float(es[1]))
                i += 1
            shells.append(
                Shell(atom_no, _L_NAMES[l_str], np.array(exps), np.array(coefs))
            )
        else:
            raise ValueError(f"unrecognized line: {line!r}")
    return MoleculeBasis(atoms, shells)


def write_molecule_basis(basis: MoleculeBasis) -> str:
    lines = []
    for sym, _, pos in basis.atoms:
        lines.append(f"atom {sym} {pos[0]:.12f} {pos[1]:.12f} {pos[2]:.12f}")
    for sh in basis.shells:
        lines.append(f"shell {sh.atom + 1} {_L_LETTERS[sh.l]} {len(sh.exponents)}")
        for a, c in zip(sh.exponents, sh.coefficients):
            lines.append(f"  {a:.10e} {c:.10e}")
    return "\n".join(lines) + "\n"


def eval_aos(
    basis: MoleculeBasis, points: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """AO values and Cartesian gradients on the given points.

    Returns (vals, grads) with shapes (npts, n_ao) and (3, npts, n_ao).
    """
    pts = np.asarray(points, dtype=float)
    npts = pts.shape[0]
    n_ao = basis.n_ao
    vals = np.zeros((npts, n_ao))
    grads = np.zeros((3, npts, n_ao))
    for mu, (atom, (lx, ly, lz), exps, coefs, center) in enumerate(
        basis.ao_descriptors()
    ):
        d = pts - center[None, :]
        r2 = np.einsum("pi,pi->p", d, d)
        powers = [lx, ly, lz]
        mono = np.ones(npts)
        for dim in range(3):
            if powers[dim]:
                mono = mono * d[:, dim] ** powers[dim]
        for a, c in zip(exps, coefs):
            g = c * np.exp(-a * r2)
            vals[:, mu] += mono * g
            for dim in range(3):
                l = powers[dim]
                poly = -2.0 * a * d[:, dim] * mono
                if l:
                    lower = np.ones(npts)
                    for dim2 in range(3):
                        p2 = powers[dim2] - (1 if dim2 == dim else 0)
                        if p2:
                            lower = lower * d[:, dim2] ** p2
                    poly = poly + l * lower
                grads[dim, :, mu] += poly * g
    return vals, grads


# ---------------------------------------------------------------------------
# Lebedev angular grids (octahedral symmetry classes).

def _class_a1() -> Tuple[np.ndarray, np.ndarray]:
    pts = []
    for axis in range(3):
        for sgn in (1.0, -1.0):
            v = np.zeros(3)
            v[axis] = sgn
            pts.append(v)
    return np.array(pts), np.ones(6)


def _class_a2() -> Tuple[np.ndarray, np.ndarray]:
    pts = []
    c = 1.0 / math.sqrt(2.0)
    for i in range(3):
        for j in range(i + 1, 3):
            for si in (1.0, -1.0):
                for sj in (1.0, -1.0):
                    v = np.zeros(3)
                    v[i], v[j] = si * c, sj * c
                    pts.append(v)
    return np.array(pts), np.ones(12)


def _class_a3() -> Tuple[np.ndarray, np.ndarray]:
    c = 1.0 / math.sqrt(3.0)
    pts = [
        np.array([sx * c, sy * c, sz * c])
        for sx in (1, -1)
        for sy in (1, -1)
        for sz in (1, -1)
    ]
    return np.array(pts), np.ones(8)


def _class_b(l: float) -> Tuple[np.ndarray, np.ndarray]:
    m = math.sqrt(max(0.0, 1.0 - 2.0 * l * l))
    pts = []
    for mpos in range(3):
        for sx in (1, -1):
            for sy in (1, -1):
                for sz in (1, -1):
                    v = np.array([l, l, l])
                    v[mpos] = m
                    v *= np.array([sx, sy, sz], dtype=float)
                    pts.append(v)
    return np.array(pts), np.ones(24)


def _class_c(p: float) -> Tuple[np.ndarray, np.ndarray]:
    q = math.sqrt(max(0.0, 1.0 - p * p))
    pts = []
    for zero in range(3):
        others = [i for i in range(3) if i != zero]
        for first, second in ((p, q), (q, p)):
            for s1 in (1, -1):
                for s2 in (1, -1):
                    v = np.zeros(3)
                    v[others[0]] = s1 * first
                    v[others[1]] = s2 * second
                    pts.append(v)
    return np.array(pts), np.ones(24)


def lebedev_grid(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Unit-sphere points and weights (weights sum to 1).

    Supported point counts: 6, 26, 50, 110 (polynomial exactness degrees
    3, 7, 11 and 17).
    """
    blocks: List[Tuple[Tuple[np.ndarray, np.ndarray], float]] = []
    if order == 6:
        blocks = [(_class_a1(), 1.0 / 6.0)]
    elif order == 26:
        blocks = [
            (_class_a1(), 1.0 / 21.0),
            (_class_a2(), 4.0 / 105.0),
            (_class_a3(), 27.0 / 840.0),
        ]
    elif order == 50:
        blocks = [
            (_class_a1(), 4.0 / 315.0),
            (_class_a2(), 64.0 / 2835.0),
            (_class_a3(), 27.0 / 1280.0),
            (_class_b(1.0 / math.sqrt(11.0)), 14641.0 / 725760.0),
        ]
    elif order == 110:
        blocks = [
            (_class_a1(), 0.003828270494937162),
            (_class_a3(), 0.009793737512487512),
            (_class_b(0.1851156353447362), 0.008211737283191111),
            (_class_b(0.6904210483822922), 0.009942814891178103),
            (_class_b(0.3956894730559419), 0.009595471336070963),
            (_class_c(0.4783690288121502), 0.009694996361663028),
        ]
    else:
        raise ValueError(f"unsupported Lebedev order {order}; use 6, 26, 50, 110")
    pts = np.vstack([blk[0] for blk, _ in blocks])
    wts = np.concatenate([w * blk[1] for blk, w in blocks])
    return pts, wts


def radial_grid(n: int, r_scale: float) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Chebyshev (second kind) radial rule with the r = R(1+x)/(1-x)
    map.  Weights absorb the r^2 volume factor and the map Jacobian."""
    i = np.arange(1, n + 1)
    theta = i * math.pi / (n + 1)
    x = np.cos(theta)
    w_cheb = math.pi / (n + 1) * np.sin(theta)  # includes 1/sqrt(1-x^2)
    r = r_scale * (1.0 + x) / (1.0 - x)
    jac = 2.0 * r_scale / (1.0 - x) ** 2
    w = w_cheb * jac * r**2
    return r, w


def becke_weights(
    points: np.ndarray, atom_coords: np.ndarray, home_atom: np.ndarray
) -> np.ndarray:
    """Fuzzy-cell partition factors for points assigned to their parent
    atom (3 iterations of p(mu) = (3 mu - mu^3)/2, no size adjustment)."""
    n_atoms = atom_coords.shape[0]
    npts = points.shape[0]
    if n_atoms == 1:
        return np.ones(npts)
    dists = np.linalg.norm(points[:, None, :] - atom_coords[None, :, :], axis=2)
    cell = np.ones((npts, n_atoms))
    for a in range(n_atoms):
        for b in range(n_atoms):
            if a == b:
                continue
            rab = np.linalg.norm(atom_coords[a] - atom_coords[b])
            mu = (dists[:, a] - dists[:, b]) / rab
            f = mu
            for _ in range(3):
                f = 0.5 * f * (3.0 - f * f)
            cell[:, a] *= 0.5 * (1.0 - f)
    total = cell.sum(axis=1)
    return cell[np.arange(npts), home_atom] / total


@dataclass
class QuadratureGrid:
    points: np.ndarray  # (npts, 3) Bohr
    weights: np.ndarray  # (npts,) includes Becke factors
    becke_cell_weights: np.ndarray  # (npts,) partition factors alone

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))


def build_grid(
    basis: MoleculeBasis, radial_n: int = 40, lebedev_order: int = 50
) -> QuadratureGrid:
    """Atom-centered product grid with Becke partitioning."""
    ang_pts, ang_wts = lebedev_grid(lebedev_order)
    atom_coords = np.array([a[2] for a in basis.atoms])
    all_pts: List[np.ndarray] = []
    all_wts: List[np.ndarray] = []
    home: List[np.ndarray] = []
    for ai, (sym, _, pos) in enumerate(basis.atoms):
        r_scale = _BRAGG_ANGSTROM.get(sym, 0.85) * BOHR_PER_ANGSTROM
        r, wr = radial_grid(radial_n, r_scale)
        pts = pos[None, None, :] + r[:, None, None] * ang_pts[None, :, :]
        wts = 4.0 * math.pi * wr[:, None] * ang_wts[None, :]
        all_pts.append(pts.reshape(-1, 3))
        all_wts.append(wts.reshape(-1))
        home.append(np.full(r.size * ang_pts.shape[0], ai))
    points = np.vstack(all_pts)
    raw_w = np.concatenate(all_wts)
    home_idx = np.concatenate(home)
    becke = becke_weights(points, atom_coords, home_idx)
    return QuadratureGrid(points=points, weights=raw_w * becke, becke_cell_weights=becke)


# ---------------------------------------------------------------------------
# Densities from the RDMs.

@dataclass
class GridDensities:
    rho: np.ndarray
    grad_rho: np.ndarray  # (3, npts)
    pi: np.ndarray
    pi_mf: np.ndarray
    pi_cumulant: np.ndarray
    rho_alpha: np.ndarray
    rho_beta: np.ndarray


def spin_blocks(
    gamma: np.ndarray, spec: ActiveSpaceSpec
) -> Dict[str, np.ndarray]:
    """Spatial-orbital spin blocks of the spin-orbital 1-RDM."""
    n = spec.n_act
    idx_a = [spec.spin_orbital(p, 0) for p in range(n)]
    idx_b = [spec.spin_orbital(p, 1) for p in range(n)]
    return {
        "aa": gamma[np.ix_(idx_a, idx_a)],
        "bb": gamma[np.ix_(idx_b, idx_b)],
        "ab": gamma[np.ix_(idx_a, idx_b)],
        "ba": gamma[np.ix_(idx_b, idx_a)],
    }


def cumulant_alpha_beta(rdms: RdmPair, spec: ActiveSpaceSpec) -> np.ndarray:
    """lambda[P,Q,R,S] = Gamma - (gamma gamma - gamma gamma) restricted to
    the (alpha, beta, alpha, beta) spin channel, in spatial indices."""
    n = spec.n_act
    idx_a = np.array([spec.spin_orbital(p, 0) for p in range(n)])
    idx_b = np.array([spec.spin_orbital(p, 1) for p in range(n)])
    g = spin_blocks(rdms.gamma, spec)
    big_ab = rdms.Gamma[np.ix_(idx_a, idx_b, idx_a, idx_b)]
    wick = np.einsum("PR,QS->PQRS", g["aa"], g["bb"]) - np.einsum(
        "PS,QR->PQRS", g["ab"], g["ba"]
    )
    return big_ab - wick


def densities_on_grid(
    rdms: RdmPair,
    c_act: np.ndarray,
    basis: MoleculeBasis,
    grid: QuadratureGrid,
    spec: ActiveSpaceSpec,
    c_core: np.ndarray | None = None,
) -> GridDensities:
    """Electron density, its gradient, and the on-top pair density.

    The mean-field on-top term is rho_alpha * rho_beta; the cumulant term
    contracts the alpha-beta-channel two-body cumulant with the active MO
    values.  Doubly occupied core orbitals (``c_core`` columns) add to
    the densities but carry no cumulant.
    """
    if c_act.shape[1] != spec.n_act:
        raise ValueError("active MO count does not match the active space")
    ao_vals, ao_grads = eval_aos(basis, grid.points)
    m = ao_vals @ c_act  # (npts, n_act)
    dm = np.stack([ao_grads[d] @ c_act for d in range(3)])  # (3, npts, n_act)

    g = spin_blocks(rdms.gamma, spec)
    gaa = np.real(g["aa"])
    gbb = np.real(g["bb"])

    rho_a = np.einsum("PQ,gP,gQ->g", gaa, m, m)
    rho_b = np.einsum("PQ,gP,gQ->g", gbb, m, m)
    grad_a = 2.0 * np.einsum("PQ,dgP,gQ->dg", gaa, dm, m)
    grad_b = 2.0 * np.einsum("PQ,dgP,gQ->dg", gbb, dm, m)

    if c_core is not None and c_core.size:
        core_vals = ao_vals @ c_core
        core_grads = np.stack([ao_grads[d] @ c_core for d in range(3)])
        rho_core_half = np.einsum("gi,gi->g", core_vals, core_vals)
        grad_core_half = 2.0 * np.einsum("dgi,gi->dg", core_grads, core_vals)
        rho_a = rho_a + rho_core_half
        rho_b = rho_b + rho_core_half
        grad_a = grad_a + grad_core_half
        grad_b = grad_b + grad_core_half

    rho = rho_a + rho_b
    grad_rho = grad_a + grad_b

    pi_mf = rho_a * rho_b
    lam = np.real(cumulant_alpha_beta(rdms, spec))
    pi_cum = np.einsum("PQRS,gP,gQ,gR,gS->g", lam, m, m, m, m, optimize=True)
    return GridDensities(
        rho=rho,
        grad_rho=grad_rho,
        pi=pi_mf + pi_cum,
        pi_mf=pi_mf,
        pi_cumulant=pi_cum,
        rho_alpha=rho_a,
        rho_beta=rho_b,
    )
