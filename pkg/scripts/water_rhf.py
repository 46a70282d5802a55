"""Minimal restricted Hartree-Fock over STO-3G to build integral fixtures.

Self-contained McMurchie-Davidson Gaussian integrals (s and p shells),
an SCF loop, and emission of the molecular-orbital Hamiltonian in the
trotterbench integral file format.  Spin orbital 2p+sigma carries spatial
orbital p with spin sigma; molecular orbitals are ordered by energy.

This is fixture tooling, not part of the shipped package.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaln

BOHR_PER_ANGSTROM = 1.0 / 0.52917721092

# STO-3G contractions: (exponents, coefficients) per shell
STO3G = {
    "H": {
        "1s": (
            [3.42525091, 0.62391373, 0.16885540],
            [0.15432897, 0.53532814, 0.44463454],
        ),
    },
    "O": {
        "1s": (
            [130.7093200, 23.8088610, 6.4436083],
            [0.15432897, 0.53532814, 0.44463454],
        ),
        "2s": (
            [5.0331513, 1.1695961, 0.3803890],
            [-0.09996723, 0.39951283, 0.70011547],
        ),
        "2p": (
            [5.0331513, 1.1695961, 0.3803890],
            [0.15591627, 0.60768372, 0.39195739],
        ),
    },
}

NUCLEAR_CHARGE = {"H": 1, "O": 8}


def boys(n: int, x: float) -> float:
    if x < 1e-12:
        return 1.0 / (2 * n + 1) - x / (2 * n + 3)
    a = n + 0.5
    # F_n(x) = gamma(a) P(a, x) / (2 x^a), with P the regularized lower gamma
    return 0.5 * math.exp(gammaln(a) - a * math.log(x)) * gammainc(a, x)


def hermite_e(i: int, j: int, t: int, q_dist: float, a: float, b: float) -> float:
    """Hermite expansion coefficient E_t^{ij} for a Gaussian product."""
    p = a + b
    mu = a * b / p
    if t < 0 or t > i + j:
        return 0.0
    if i == j == t == 0:
        return math.exp(-mu * q_dist * q_dist)
    if j == 0:
        return (
            hermite_e(i - 1, j, t - 1, q_dist, a, b) / (2 * p)
            - (mu * q_dist / a) * hermite_e(i - 1, j, t, q_dist, a, b)
            + (t + 1) * hermite_e(i - 1, j, t + 1, q_dist, a, b)
        )
    return (
        hermite_e(i, j - 1, t - 1, q_dist, a, b) / (2 * p)
        + (mu * q_dist / b) * hermite_e(i, j - 1, t, q_dist, a, b)
        + (t + 1) * hermite_e(i, j - 1, t + 1, q_dist, a, b)
    )


def hermite_coulomb(t: int, u: int, v: int, n: int, p: float, pc: np.ndarray) -> float:
    """Auxiliary Hermite Coulomb integral R^n_{tuv}."""
    if t < 0 or u < 0 or v < 0:
        return 0.0
    if t == u == v == 0:
        return (-2.0 * p) ** n * boys(n, p * float(pc @ pc))
    if t > 0:
        return (t - 1) * hermite_coulomb(t - 2, u, v, n + 1, p, pc) + pc[
            0
        ] * hermite_coulomb(t - 1, u, v, n + 1, p, pc)
    if u > 0:
        return (u - 1) * hermite_coulomb(t, u - 2, v, n + 1, p, pc) + pc[
            1
        ] * hermite_coulomb(t, u - 1, v, n + 1, p, pc)
    return (v - 1) * hermite_coulomb(t, u, v - 2, n + 1, p, pc) + pc[
        2
    ] * hermite_coulomb(t, u, v - 1, n + 1, p, pc)


def primitive_overlap(a, la, ra, b, lb, rb) -> float:
    p = a + b
    out = (math.pi / p) ** 1.5
    for axis in range(3):
        out *= hermite_e(la[axis], lb[axis], 0, ra[axis] - rb[axis], a, b)
    return out


def primitive_kinetic(a, la, ra, b, lb, rb) -> float:
    lx, ly, lz = lb

    def shifted(axis: int, delta: int) -> float:
        shifted_l = list(lb)
        shifted_l[axis] += delta
        if shifted_l[axis] < 0:
            return 0.0
        return primitive_overlap(a, la, ra, b, tuple(shifted_l), rb)

    term0 = b * (2 * (lx + ly + lz) + 3) * primitive_overlap(a, la, ra, b, lb, rb)
    term1 = -2.0 * b * b * sum(shifted(axis, 2) for axis in range(3))
    term2 = -0.5 * sum(
        lb[axis] * (lb[axis] - 1) * shifted(axis, -2) for axis in range(3)
    )
    return term0 + term1 + term2


def primitive_nuclear(a, la, ra, b, lb, rb, center) -> float:
    p = a + b
    p_center = (a * np.asarray(ra) + b * np.asarray(rb)) / p
    pc = p_center - np.asarray(center)
    out = 0.0
    for t in range(la[0] + lb[0] + 1):
        et = hermite_e(la[0], lb[0], t, ra[0] - rb[0], a, b)
        for u in range(la[1] + lb[1] + 1):
            eu = hermite_e(la[1], lb[1], u, ra[1] - rb[1], a, b)
            for v in range(la[2] + lb[2] + 1):
                ev = hermite_e(la[2], lb[2], v, ra[2] - rb[2], a, b)
                out += et * eu * ev * hermite_coulomb(t, u, v, 0, p, pc)
    return out * 2.0 * math.pi / p


def primitive_eri(a, la, ra, b, lb, rb, c, lc, rc, d, ld, rd) -> float:
    p = a + b
    q = c + d
    alpha = p * q / (p + q)
    p_center = (a * np.asarray(ra) + b * np.asarray(rb)) / p
    q_center = (c * np.asarray(rc) + d * np.asarray(rd)) / q
    pq = p_center - q_center
    out = 0.0
    for t in range(la[0] + lb[0] + 1):
        e1x = hermite_e(la[0], lb[0], t, ra[0] - rb[0], a, b)
        for u in range(la[1] + lb[1] + 1):
            e1y = hermite_e(la[1], lb[1], u, ra[1] - rb[1], a, b)
            for v in range(la[2] + lb[2] + 1):
                e1z = hermite_e(la[2], lb[2], v, ra[2] - rb[2], a, b)
                e1 = e1x * e1y * e1z
                if e1 == 0.0:
                    continue
                for tau in range(lc[0] + ld[0] + 1):
                    e2x = hermite_e(lc[0], ld[0], tau, rc[0] - rd[0], c, d)
                    for nu in range(lc[1] + ld[1] + 1):
                        e2y = hermite_e(lc[1], ld[1], nu, rc[1] - rd[1], c, d)
                        for phi in range(lc[2] + ld[2] + 1):
                            e2z = hermite_e(lc[2], ld[2], phi, rc[2] - rd[2], c, d)
                            e2 = e2x * e2y * e2z
                            if e2 == 0.0:
                                continue
                            sign = (-1.0) ** (tau + nu + phi)
                            out += (
                                e1
                                * e2
                                * sign
                                * hermite_coulomb(t + tau, u + nu, v + phi, 0, alpha, pq)
                            )
    return out * 2.0 * math.pi**2.5 / (p * q * math.sqrt(p + q))


def _double_factorial(n: int) -> float:
    out = 1.0
    while n > 1:
        out *= n
        n -= 2
    return out


def primitive_norm(exponent: float, l: tuple[int, int, int]) -> float:
    total = sum(l)
    num = (2.0 * exponent / math.pi) ** 0.75 * (4.0 * exponent) ** (total / 2.0)
    den = math.sqrt(
        _double_factorial(2 * l[0] - 1)
        * _double_factorial(2 * l[1] - 1)
        * _double_factorial(2 * l[2] - 1)
    )
    return num / den


@dataclass
class ContractedGaussian:
    center: tuple[float, float, float]
    l: tuple[int, int, int]
    exponents: list[float]
    coefficients: list[float]  # includes primitive norms and contraction norm

    @classmethod
    def build(cls, center, l, exponents, raw_coefficients) -> "ContractedGaussian":
        coeffs = [
            c * primitive_norm(a, l) for a, c in zip(exponents, raw_coefficients)
        ]
        cgf = cls(tuple(center), tuple(l), list(exponents), coeffs)
        self_overlap = contracted(primitive_overlap, cgf, cgf)
        cgf.coefficients = [c / math.sqrt(self_overlap) for c in coeffs]
        return cgf


def contracted(kernel, g1: ContractedGaussian, g2: ContractedGaussian, *extra) -> float:
    out = 0.0
    for a, ca in zip(g1.exponents, g1.coefficients):
        for b, cb in zip(g2.exponents, g2.coefficients):
            out += ca * cb * kernel(a, g1.l, g1.center, b, g2.l, g2.center, *extra)
    return out


def contracted_eri(g1, g2, g3, g4) -> float:
    out = 0.0
    for a, ca in zip(g1.exponents, g1.coefficients):
        for b, cb in zip(g2.exponents, g2.coefficients):
            for c, cc in zip(g3.exponents, g3.coefficients):
                for d, cd in zip(g4.exponents, g4.coefficients):
                    out += ca * cb * cc * cd * primitive_eri(
                        a, g1.l, g1.center,
                        b, g2.l, g2.center,
                        c, g3.l, g3.center,
                        d, g4.l, g4.center,
                    )
    return out


def build_basis(atoms: list[tuple[str, np.ndarray]]) -> list[ContractedGaussian]:
    basis = []
    for symbol, center in atoms:
        for shell, (exps, coeffs) in STO3G[symbol].items():
            if shell.endswith("s"):
                basis.append(ContractedGaussian.build(center, (0, 0, 0), exps, coeffs))
            else:
                for l in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
                    basis.append(ContractedGaussian.build(center, l, exps, coeffs))
    return basis


@dataclass
class ScfResult:
    energy: float  # total RHF energy including nuclear repulsion
    nuclear_repulsion: float
    mo_energies: np.ndarray
    mo_coefficients: np.ndarray  # columns are MOs
    core_hamiltonian: np.ndarray
    eri: np.ndarray  # chemist convention (pq|rs), AO basis
    n_electrons: int


def run_rhf(atoms: list[tuple[str, np.ndarray]], max_iter=100, tol=1e-11) -> ScfResult:
    basis = build_basis(atoms)
    n = len(basis)
    n_electrons = sum(NUCLEAR_CHARGE[sym] for sym, _ in atoms)
    if n_electrons % 2:
        raise ValueError("restricted HF needs an even electron count")
    n_occ = n_electrons // 2

    overlap = np.zeros((n, n))
    kinetic = np.zeros((n, n))
    nuclear = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            overlap[i, j] = overlap[j, i] = contracted(primitive_overlap, basis[i], basis[j])
            kinetic[i, j] = kinetic[j, i] = contracted(primitive_kinetic, basis[i], basis[j])
            v = 0.0
            for symbol, center in atoms:
                v -= NUCLEAR_CHARGE[symbol] * contracted(
                    primitive_nuclear, basis[i], basis[j], center
                )
            nuclear[i, j] = nuclear[j, i] = v

    eri = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(i + 1):
            for k in range(n):
                for l in range(k + 1):
                    if (i * (i + 1) // 2 + j) < (k * (k + 1) // 2 + l):
                        continue
                    value = contracted_eri(basis[i], basis[j], basis[k], basis[l])
                    for a, b in ((i, j), (j, i)):
                        for c, d in ((k, l), (l, k)):
                            eri[a, b, c, d] = value
                            eri[c, d, a, b] = value

    e_nuc = 0.0
    for idx, (sym1, r1) in enumerate(atoms):
        for sym2, r2 in atoms[idx + 1 :]:
            e_nuc += (
                NUCLEAR_CHARGE[sym1]
                * NUCLEAR_CHARGE[sym2]
                / float(np.linalg.norm(np.asarray(r1) - np.asarray(r2)))
            )

    core = kinetic + nuclear
    s_vals, s_vecs = np.linalg.eigh(overlap)
    x = s_vecs @ np.diag(s_vals**-0.5) @ s_vecs.T

    density = np.zeros((n, n))
    energy = 0.0
    for _ in range(max_iter):
        g = np.einsum("ls,mnls->mn", density, eri) - 0.5 * np.einsum(
            "ls,mlns->mn", density, eri
        )
        fock = core + g
        f_prime = x.T @ fock @ x
        eps, c_prime = np.linalg.eigh(f_prime)
        coeffs = x @ c_prime
        density_new = 2.0 * coeffs[:, :n_occ] @ coeffs[:, :n_occ].T
        e_elec = 0.5 * float(np.einsum("mn,mn->", density_new, core + fock))
        if abs(e_elec + e_nuc - energy) < tol and np.abs(density_new - density).max() < 1e-9:
            density = density_new
            energy = e_elec + e_nuc
            break
        density = density_new
        energy = e_elec + e_nuc
    return ScfResult(
        energy=energy,
        nuclear_repulsion=e_nuc,
        mo_energies=eps,
        mo_coefficients=coeffs,
        core_hamiltonian=core,
        eri=eri,
        n_electrons=n_electrons,
    )


def water_geometry(
    bond_length_angstrom: float = 0.957213, bond_angle_degrees: float = 104.5225
) -> list[tuple[str, np.ndarray]]:
    r = bond_length_angstrom * BOHR_PER_ANGSTROM
    half = math.radians(bond_angle_degrees) / 2.0
    return [
        ("O", np.zeros(3)),
        ("H", np.array([r * math.sin(half), 0.0, r * math.cos(half)])),
        ("H", np.array([-r * math.sin(half), 0.0, r * math.cos(half)])),
    ]


def molecular_integrals(scf: ScfResult) -> tuple[np.ndarray, np.ndarray]:
    """One-body matrix and chemist-convention two-body tensor in the MO basis."""
    c = scf.mo_coefficients
    h_mo = c.T @ scf.core_hamiltonian @ c
    eri_mo = np.einsum("mp,nq,mnls,lr,st->pqrt", c, c, scf.eri, c, c, optimize=True)
    return h_mo, eri_mo


def emit_integral_file(scf: ScfResult, zero_threshold: float = 1e-10) -> str:
    """Spin-orbital Hamiltonian in the trotterbench integral format.

    Accumulates every operator of the second-quantized Hamiltonian into
    canonical Hermitian classes; classes with an implied Hermitian partner
    carry half of the accumulated weight.
    """
    from trotterbench.hamiltonian import TermKind, canonicalize

    h_mo, eri_mo = molecular_integrals(scf)
    n_spatial = h_mo.shape[0]
    accum: dict[tuple, float] = {}

    def add(indices: tuple[int, ...], weight: float) -> None:
        kind, canon, sign = canonicalize(indices)
        key = (kind, canon)
        accum[key] = accum.get(key, 0.0) + sign * weight

    for p in range(n_spatial):
        for q in range(n_spatial):
            if abs(h_mo[p, q]) < 1e-14:
                continue
            for spin in (0, 1):
                add((2 * p + spin, 2 * q + spin), h_mo[p, q])
    for p in range(n_spatial):
        for q in range(n_spatial):
            for r in range(n_spatial):
                for s in range(n_spatial):
                    value = eri_mo[p, q, r, s]
                    if abs(value) < 1e-14:
                        continue
                    for sigma in (0, 1):
                        for tau in (0, 1):
                            i = 2 * p + sigma
                            j = 2 * r + tau
                            k = 2 * s + tau
                            l = 2 * q + sigma
                            if i == j or k == l:
                                continue
                            add((i, j, k, l), 0.5 * value)

    lines = [
        f"NORB={2 * n_spatial} NELEC={scf.n_electrons} "
        f"SHIFT={scf.nuclear_repulsion:.16e}"
    ]
    self_adjoint = {TermKind.HPP, TermKind.HPQQP}
    for (kind, canon), weight in sorted(accum.items(), key=lambda kv: (kv[0][0].value, kv[0][1])):
        coefficient = weight if kind in self_adjoint else weight / 2.0
        if abs(coefficient) < zero_threshold:
            continue
        if kind.is_one_body:
            p, q = canon
            idx = (p + 1, q + 1, 0, 0)
        else:
            idx = tuple(i + 1 for i in canon)
        lines.append(
            f"{coefficient:.16e} {idx[0]} {idx[1]} {idx[2]} {idx[3]}"
        )
    return "\n".join(lines) + "\n"


def main() -> int:
    out_path = sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/h2o_sto3g.ints"
    scf = run_rhf(water_geometry())
    print(f"RHF total energy: {scf.energy:.8f} E_h")
    print(f"nuclear repulsion: {scf.nuclear_repulsion:.8f} E_h")
    print(f"MO energies: {np.round(scf.mo_energies, 5)}")
    text = emit_integral_file(scf)
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"wrote {out_path} ({len(text.splitlines()) - 1} term lines)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
