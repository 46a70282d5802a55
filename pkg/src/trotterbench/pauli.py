"""Sparse Pauli-string algebra and the Jordan-Wigner images of fermion terms.

Strings are represented as a mapping ``qubit -> 'X'|'Y'|'Z'`` (identity
factors omitted) together with a complex coefficient.  The Jordan-Wigner
convention is

    c_p^ -> Z_0 ... Z_{p-1} (X_p - i Y_p) / 2
    c_p  -> Z_0 ... Z_{p-1} (X_p + i Y_p) / 2

with qubit p carrying the occupation of spin orbital p (bit p of the basis
index) and Z|0> = +|0>.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .hamiltonian import FermionHamiltonian, FermionTerm, TermKind

PauliMap = tuple[tuple[int, str], ...]

# single-qubit products: (left, right) -> (phase, result); 'I' means identity
_MUL = {
    ("X", "X"): (1, "I"),
    ("Y", "Y"): (1, "I"),
    ("Z", "Z"): (1, "I"),
    ("X", "Y"): (1j, "Z"),
    ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("X", "Z"): (-1j, "Y"),
}

_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _mul_strings(a: PauliMap, b: PauliMap) -> tuple[complex, PauliMap]:
    phase = 1 + 0j
    letters = dict(a)
    for qubit, right in b:
        left = letters.pop(qubit, None)
        if left is None:
            letters[qubit] = right
            continue
        ph, res = _MUL.get((left, right), (1, "I"))
        phase *= ph
        if res != "I":
            letters[qubit] = res
    return phase, tuple(sorted(letters.items()))


class PauliSum:
    """Linear combination of Pauli strings with complex coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[PauliMap, complex] | None = None):
        self.terms: dict[PauliMap, complex] = dict(terms or {})

    @classmethod
    def identity(cls, coeff: complex = 1.0) -> "PauliSum":
        return cls({(): coeff})

    def __add__(self, other: "PauliSum") -> "PauliSum":
        out = dict(self.terms)
        for key, val in other.terms.items():
            out[key] = out.get(key, 0) + val
        return PauliSum(out)

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            out: dict[PauliMap, complex] = {}
            for ka, va in self.terms.items():
                for kb, vb in other.terms.items():
                    phase, key = _mul_strings(ka, kb)
                    out[key] = out.get(key, 0) + va * vb * phase
            return PauliSum(out)
        return PauliSum({k: v * other for k, v in self.terms.items()})

    __rmul__ = __mul__

    def dagger(self) -> "PauliSum":
        return PauliSum({k: np.conj(v) for k, v in self.terms.items()})

    def pruned(self, tol: float = 1e-14) -> "PauliSum":
        return PauliSum({k: v for k, v in self.terms.items() if abs(v) > tol})

    def real_weights(self, tol: float = 1e-12) -> dict[PauliMap, float]:
        """Coefficients of a Hermitian sum, asserting imaginary parts vanish."""
        out = {}
        for key, val in self.pruned().terms.items():
            if abs(val.imag) > tol:
                raise ValueError(f"non-Hermitian Pauli sum: {key} -> {val}")
            out[key] = float(val.real)
        return out

    def to_matrix(self, n_qubits: int) -> np.ndarray:
        dim = 1 << n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for key, val in self.terms.items():
            out += val * pauli_string_matrix(key, n_qubits)
        return out


def pauli_string_matrix(string: PauliMap, n_qubits: int) -> np.ndarray:
    """Dense matrix of a Pauli string; qubit 0 is the least significant bit."""
    letters = dict(string)
    mat = np.array([[1.0 + 0j]])
    for qubit in range(n_qubits):
        mat = np.kron(_MATS[letters.get(qubit, "I")], mat)
    return mat


def lowering_op(p: int) -> PauliSum:
    """Jordan-Wigner image of the annihilation operator c_p."""
    z_string = tuple((j, "Z") for j in range(p))
    return PauliSum(
        {
            z_string + ((p, "X"),): 0.5,
            z_string + ((p, "Y"),): 0.5j,
        }
    )


def raising_op(p: int) -> PauliSum:
    """Jordan-Wigner image of the creation operator c_p^."""
    z_string = tuple((j, "Z") for j in range(p))
    return PauliSum(
        {
            z_string + ((p, "X"),): 0.5,
            z_string + ((p, "Y"),): -0.5j,
        }
    )


def operator_product(ops: Iterable[tuple[int, bool]]) -> PauliSum:
    """Product of c/c^ operators given as (orbital, is_creation), left to right."""
    out = PauliSum.identity()
    for orbital, dagger in ops:
        out = out * (raising_op(orbital) if dagger else lowering_op(orbital))
    return out.pruned()


def term_operator_factors(term: FermionTerm) -> list[tuple[int, bool]]:
    """The left-to-right c/c^ factor list of the canonical (non-h.c.) operator."""
    idx = term.indices
    if term.kind is TermKind.HPP:
        return [(idx[0], True), (idx[0], False)]
    if term.kind is TermKind.HPQ:
        return [(idx[0], True), (idx[1], False)]
    # two-body canonical forms are all c_p^ c_q^ c_r c_s
    p, q, r, s = idx
    return [(p, True), (q, True), (r, False), (s, False)]


def term_to_pauli(term: FermionTerm) -> PauliSum:
    """Full Hermitian Pauli expansion of a term (h.c. included where implied)."""
    base = operator_product(term_operator_factors(term))
    if term.kind.is_diagonal:
        herm = base
    else:
        herm = base + base.dagger()
    return (herm * term.coefficient).pruned()


def term_pauli_weights(term: FermionTerm) -> dict[PauliMap, float]:
    """Real string weights of the Hermitian term, including the identity part."""
    return term_to_pauli(term).real_weights()


def hamiltonian_to_pauli(h: FermionHamiltonian) -> PauliSum:
    out = PauliSum.identity(h.energy_shift).pruned()
    for term in h.terms:
        out = out + term_to_pauli(term)
    return out.pruned()


def strings_commute(a: PauliMap, b: PauliMap) -> bool:
    """Two Pauli strings commute iff they differ on an even number of qubits."""
    da, db = dict(a), dict(b)
    clashes = sum(
        1 for q, la in da.items() if q in db and db[q] != la
    )
    return clashes % 2 == 0
