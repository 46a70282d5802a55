"""Lower fermionic terms to Jordan-Wigner gate sequences and count costs.

Sequential circuits entangle the Z string of each Pauli factor with a CNOT
ladder, rotate, and unwind; they are exact realizations of
exp(-i dt H_term) because the strings of one Hermitian term commute.
Parallel circuits model constant-depth string execution via Bell-state
measurements (BSM) and are count-accurate schematics, not simulable
unitaries.

Gate-cost model per term kind (sorted indices; one-way ladder length in
parentheses):

    kind             sequential total              parallel total
    Hpp              1                             1
    Hpq              10 + 4(q-p)                   18
    Hpqqp            5 (+ one shared global Rz)    5 (+ global)
    Hpqqr, p<q<r     12 + 4(r-p)                   24
    Hpqqr, q outside 16 + 4(r-p)                   24
    Hpqrs            8*9 + 8*2(b-a + d-c + 1)      8*7

For four distinct indices a<b<c<d every pairing's strings live on the two
contiguous blocks [a..b] and [c..d], so the ladder length is pairing
independent.  Rotation counts (the CRz column) are identical in both modes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateFitError, ValidationError
from .hamiltonian import (
    ZERO_COEFFICIENT_THRESHOLD,
    FermionHamiltonian,
    FermionTerm,
    TermKind,
    full_term_census,
)
from .pauli import PauliMap, term_pauli_weights


class GateKind(enum.Enum):
    H = "H"
    Y = "Y"
    YDAG = "Ydag"
    CNOT = "CNOT"
    RZ = "Rz"
    CRZ = "CRz"
    GLOBAL_RZ = "GlobalRz"
    BSM = "BSM"


_BASIS_KINDS = (GateKind.H, GateKind.Y, GateKind.YDAG)
_ROTATION_KINDS = (GateKind.RZ, GateKind.CRZ)


@dataclass(frozen=True)
class Gate:
    """One gate: kind, 0-2 qubit targets, and a rotation angle if any.

    Angle semantics: Rz(q, a) = exp(-i a Z_q); CRz on one qubit is the phase
    rotation diag(1, e^{-ia}); CRz on (control, target) applies Rz(target, a)
    when the control is set; GlobalRz multiplies by e^{-ia}.
    """

    kind: GateKind
    targets: tuple[int, ...] = ()
    angle: float | None = None

    def __post_init__(self):
        if len(self.targets) == 2 and self.targets[0] == self.targets[1]:
            raise ValidationError(f"two-qubit gate with equal targets {self.targets}")
        if self.angle is not None and not math.isfinite(self.angle):
            raise ValidationError("gate angle must be finite")
        needs_angle = self.kind in (GateKind.RZ, GateKind.CRZ, GateKind.GLOBAL_RZ)
        if needs_angle and self.angle is None:
            raise ValidationError(f"{self.kind.value} gate requires an angle")


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self):
        for gate in self.gates:
            if any(t >= self.n_qubits or t < 0 for t in gate.targets):
                raise ValidationError(
                    f"gate target {gate.targets} outside {self.n_qubits} qubits"
                )

    def add(self, kind: GateKind, *targets: int, angle: float | None = None) -> None:
        gate = Gate(kind, tuple(targets), angle)
        if any(t >= self.n_qubits or t < 0 for t in gate.targets):
            raise ValidationError(f"gate target {targets} outside {self.n_qubits} qubits")
        self.gates.append(gate)

    def counts(self) -> dict[str, int]:
        """Gate tallies in the cost-table columns."""
        out = {"GlobalRz": 0, "basis": 0, "CNOT": 0, "CRz": 0, "BSM": 0}
        for gate in self.gates:
            if gate.kind in _BASIS_KINDS:
                out["basis"] += 1
            elif gate.kind in _ROTATION_KINDS:
                out["CRz"] += 1
            elif gate.kind is GateKind.CNOT:
                out["CNOT"] += 1
            elif gate.kind is GateKind.BSM:
                out["BSM"] += 1
            else:
                out["GlobalRz"] += 1
        return out

    def total_gates(self) -> int:
        return len(self.gates)

    def rotation_count(self) -> int:
        return sum(1 for g in self.gates if g.kind in _ROTATION_KINDS)

    def to_matrix(self) -> np.ndarray:
        """Dense unitary of a sequential circuit (BSM gates are not simulable)."""
        dim = 1 << self.n_qubits
        mat = np.eye(dim, dtype=complex)
        for gate in self.gates:
            mat = _gate_matrix(gate, self.n_qubits) @ mat
        return mat

    def export_lines(self) -> list[str]:
        """One gate per line: ``<kind> <targets...> [angle]``."""
        lines = []
        for gate in self.gates:
            parts = [gate.kind.value, *map(str, gate.targets)]
            if gate.angle is not None:
                parts.append(f"{gate.angle:.16e}")
            lines.append(" ".join(parts))
        return lines


_H_MAT = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_Y_MAT = np.array([[1, 1j], [1j, 1]], dtype=complex) / math.sqrt(2)


def _embed_one(mat2: np.ndarray, qubit: int, n: int) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for q in range(n):
        out = np.kron(mat2 if q == qubit else np.eye(2), out)
    return out


def _gate_matrix(gate: Gate, n: int) -> np.ndarray:
    dim = 1 << n
    idx = np.arange(dim)
    if gate.kind is GateKind.H:
        return _embed_one(_H_MAT, gate.targets[0], n)
    if gate.kind is GateKind.Y:
        return _embed_one(_Y_MAT, gate.targets[0], n)
    if gate.kind is GateKind.YDAG:
        return _embed_one(_Y_MAT.conj().T, gate.targets[0], n)
    if gate.kind is GateKind.CNOT:
        control, target = gate.targets
        flipped = idx ^ (((idx >> control) & 1) << target)
        mat = np.zeros((dim, dim), dtype=complex)
        mat[flipped, idx] = 1.0
        return mat
    if gate.kind is GateKind.RZ:
        bit = (idx >> gate.targets[0]) & 1
        return np.diag(np.exp(-1j * gate.angle * (1 - 2 * bit)))
    if gate.kind is GateKind.CRZ:
        if len(gate.targets) == 1:
            bit = (idx >> gate.targets[0]) & 1
            return np.diag(np.exp(-1j * gate.angle * bit))
        control, target = gate.targets
        on = (idx >> control) & 1
        bit = (idx >> target) & 1
        return np.diag(np.exp(-1j * gate.angle * on * (1 - 2 * bit)))
    if gate.kind is GateKind.GLOBAL_RZ:
        return np.exp(-1j * gate.angle) * np.eye(dim)
    raise ValidationError(f"{gate.kind.value} gates have no unitary matrix")


# ---------------------------------------------------------------------------
# sequential compilation
# ---------------------------------------------------------------------------


def _basis_open(circuit: Circuit, letters: dict[int, str]) -> None:
    for q in sorted(letters):
        if letters[q] == "X":
            circuit.add(GateKind.H, q)
        elif letters[q] == "Y":
            circuit.add(GateKind.YDAG, q)


def _basis_close(circuit: Circuit, letters: dict[int, str]) -> None:
    for q in sorted(letters, reverse=True):
        if letters[q] == "X":
            circuit.add(GateKind.H, q)
        elif letters[q] == "Y":
            circuit.add(GateKind.Y, q)


def _ladder(circuit: Circuit, order: Sequence[int]) -> None:
    for a, b in zip(order, order[1:]):
        circuit.add(GateKind.CNOT, a, b)


def _unladder(circuit: Circuit, order: Sequence[int]) -> None:
    for a, b in list(zip(order, order[1:]))[::-1]:
        circuit.add(GateKind.CNOT, a, b)


def _string_rotation(circuit: Circuit, string: PauliMap, angle: float) -> None:
    """basis - ladder - Rz - unwind realization of exp(-i angle P_string)."""
    letters = dict(string)
    support = sorted(letters)
    _basis_open(circuit, letters)
    _ladder(circuit, support)
    circuit.add(GateKind.RZ, support[-1], angle=angle)
    _unladder(circuit, support)
    _basis_close(circuit, letters)


def _weights_by_letters(term: FermionTerm) -> dict[PauliMap, float]:
    return term_pauli_weights(term)


def _compile_hpp(term: FermionTerm, dt: float, circuit: Circuit) -> None:
    circuit.add(GateKind.CRZ, term.indices[0], angle=term.coefficient * dt)


def _compile_hpqqp(term: FermionTerm, dt: float, circuit: Circuit) -> None:
    p, q = term.indices[0], term.indices[1]
    weights = _weights_by_letters(term)
    w_id = weights.get((), 0.0)
    w_p = weights.get(((p, "Z"),), 0.0)
    w_q = weights.get(((q, "Z"),), 0.0)
    w_zz = weights.get(((p, "Z"), (q, "Z")), 0.0)
    circuit.add(GateKind.GLOBAL_RZ, angle=w_id * dt)
    circuit.add(GateKind.RZ, p, angle=w_p * dt)
    circuit.add(GateKind.RZ, q, angle=w_q * dt)
    circuit.add(GateKind.CNOT, p, q)
    circuit.add(GateKind.RZ, q, angle=w_zz * dt)
    circuit.add(GateKind.CNOT, p, q)


def _compile_hpq(term: FermionTerm, dt: float, circuit: Circuit) -> None:
    weights = _weights_by_letters(term)
    for string in sorted(weights):
        _string_rotation(circuit, string, weights[string] * dt)


def _hpqqr_strings(term: FermionTerm) -> list[tuple[str, PauliMap, PauliMap]]:
    """Per basis group: (letter, base string, base string with Z_q toggled)."""
    p, q, r = term.indices[0], term.indices[1], term.indices[3]
    groups = []
    for letter in ("X", "Y"):
        interior = {j: "Z" for j in range(p + 1, r)}
        base = dict(interior)
        base[p] = letter
        base[r] = letter
        toggled = dict(base)
        if q in toggled and toggled[q] == "Z":
            del toggled[q]
        else:
            toggled[q] = "Z"
        groups.append(
            (
                letter,
                tuple(sorted(base.items())),
                tuple(sorted(toggled.items())),
            )
        )
    return groups


def _compile_hpqqr(term: FermionTerm, dt: float, circuit: Circuit) -> None:
    p, q, r = term.indices[0], term.indices[1], term.indices[3]
    weights = _weights_by_letters(term)
    ordered = p < q < r
    for letter, base, toggled in _hpqqr_strings(term):
        a_base = weights.get(base, 0.0) * dt
        a_tog = weights.get(toggled, 0.0) * dt
        endpoint_letters = {p: letter, r: letter}
        _basis_open(circuit, endpoint_letters)
        if ordered:
            # ladder visits q first so its bit survives as a control for the
            # rotation on the string with Z_q removed
            order = [q] + [j for j in range(p, r + 1) if j != q]
            end = order[-1]
            _ladder(circuit, order)
            circuit.add(GateKind.RZ, end, angle=a_base + a_tog)
            circuit.add(GateKind.CRZ, q, end, angle=-2.0 * a_tog)
            _unladder(circuit, order)
        else:
            order = list(range(p, r + 1))
            end = order[-1]
            _ladder(circuit, order)
            circuit.add(GateKind.RZ, end, angle=a_base)
            circuit.add(GateKind.CNOT, q, end)
            circuit.add(GateKind.RZ, end, angle=a_tog)
            circuit.add(GateKind.CNOT, q, end)
            _unladder(circuit, order)
        _basis_close(circuit, endpoint_letters)


def _compile_hpqrs(
    term: FermionTerm, dt: float, circuit: Circuit, zero_threshold: float
) -> None:
    weights = _weights_by_letters(term)
    for string in sorted(weights):
        weight = weights[string]
        if abs(weight) < zero_threshold:
            continue
        _string_rotation(circuit, string, weight * dt)


def compile_term(
    term: FermionTerm,
    dt: float,
    mode: str = "sequential",
    n_qubits: int | None = None,
    zero_threshold: float = ZERO_COEFFICIENT_THRESHOLD,
) -> Circuit:
    """Emit the gate sequence realizing exp(-i dt H_term).

    Sequential circuits are exact unitaries.  Parallel circuits replace each
    string's ladder with a constant-depth BSM schematic and are intended for
    counting only.
    """
    if dt <= 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    if mode not in ("sequential", "parallel"):
        raise ValidationError(f"mode must be 'sequential' or 'parallel', got {mode!r}")
    if n_qubits is None:
        n_qubits = max(term.indices) + 1
    circuit = Circuit(n_qubits)
    if mode == "parallel":
        _compile_parallel(term, dt, circuit, zero_threshold)
        return circuit
    if term.kind is TermKind.HPP:
        _compile_hpp(term, dt, circuit)
    elif term.kind is TermKind.HPQ:
        _compile_hpq(term, dt, circuit)
    elif term.kind is TermKind.HPQQP:
        _compile_hpqqp(term, dt, circuit)
    elif term.kind in (TermKind.HPQQR_ORDERED, TermKind.HPQQR_UNORDERED):
        _compile_hpqqr(term, dt, circuit)
    else:
        _compile_hpqrs(term, dt, circuit, zero_threshold)
    return circuit


def _compile_parallel(
    term: FermionTerm, dt: float, circuit: Circuit, zero_threshold: float
) -> None:
    """Constant-depth schematic: 2 BSM per rotation fuse the string parity."""
    if term.kind is TermKind.HPP:
        _compile_hpp(term, dt, circuit)
        return
    if term.kind is TermKind.HPQQP:
        _compile_hpqqp(term, dt, circuit)
        return
    weights = _weights_by_letters(term)
    if term.kind is TermKind.HPQ:
        p, q = term.indices
        for string in sorted(weights):
            letter = dict(string)[p]
            endpoints = {p: letter, q: letter}
            _basis_open(circuit, endpoints)
            circuit.add(GateKind.BSM, p, q)
            circuit.add(GateKind.CNOT, p, q)
            circuit.add(GateKind.RZ, q, angle=weights[string] * dt)
            circuit.add(GateKind.CNOT, p, q)
            circuit.add(GateKind.BSM, p, q)
            _basis_close(circuit, endpoints)
        return
    if term.kind in (TermKind.HPQQR_ORDERED, TermKind.HPQQR_UNORDERED):
        p, q, r = term.indices[0], term.indices[1], term.indices[3]
        for letter, base, toggled in _hpqqr_strings(term):
            circuit.add(GateKind.H if letter == "X" else GateKind.YDAG, p)
            for _ in range(2):
                circuit.add(GateKind.BSM, p, r)
            circuit.add(GateKind.CNOT, p, r)
            circuit.add(GateKind.RZ, r, angle=(weights[base] + weights[toggled]) * dt)
            circuit.add(GateKind.CNOT, q, r)
            circuit.add(GateKind.CRZ, q, r, angle=-2.0 * weights[toggled] * dt)
            circuit.add(GateKind.CNOT, q, r)
            for _ in range(2):
                circuit.add(GateKind.BSM, p, r)
            circuit.add(GateKind.CNOT, p, r)
            circuit.add(GateKind.H if letter == "X" else GateKind.Y, p)
        return
    # Hpqrs: per active string, 2 basis + 2 CNOT + 1 rotation + 2 BSM
    support = term.support_key
    lo, hi = support[0], support[-1]
    for string in sorted(weights):
        weight = weights[string]
        if abs(weight) < zero_threshold:
            continue
        letter = dict(string)[lo]
        endpoints = {lo: letter}
        _basis_open(circuit, endpoints)
        circuit.add(GateKind.BSM, lo, hi)
        circuit.add(GateKind.CNOT, lo, hi)
        circuit.add(GateKind.RZ, hi, angle=weight * dt)
        circuit.add(GateKind.CNOT, lo, hi)
        circuit.add(GateKind.BSM, lo, hi)
        _basis_close(circuit, endpoints)
    return


# ---------------------------------------------------------------------------
# closed-form counting
# ---------------------------------------------------------------------------


def term_rotation_count(term: FermionTerm) -> int:
    return {
        TermKind.HPP: 1,
        TermKind.HPQ: 2,
        TermKind.HPQQP: 3,
        TermKind.HPQQR_ORDERED: 4,
        TermKind.HPQQR_UNORDERED: 4,
        TermKind.HPQRS: 8,
    }[term.kind]


def term_gate_counts(
    term: FermionTerm, mode: str = "sequential", active_rotations: int | None = None
) -> dict[str, int]:
    """Cost-table row for one term (global rotations tallied separately)."""
    kind = term.kind
    if kind is TermKind.HPP:
        return {"basis": 0, "CNOT": 0, "CRz": 1, "BSM": 0, "GlobalRz": 0}
    if kind is TermKind.HPQQP:
        return {"basis": 0, "CNOT": 2, "CRz": 3, "BSM": 0, "GlobalRz": 1}
    if kind is TermKind.HPQ:
        p, q = term.indices
        if mode == "parallel":
            return {"basis": 8, "CNOT": 4, "CRz": 2, "BSM": 4, "GlobalRz": 0}
        return {"basis": 8, "CNOT": 4 * (q - p), "CRz": 2, "BSM": 0, "GlobalRz": 0}
    if kind in (TermKind.HPQQR_ORDERED, TermKind.HPQQR_UNORDERED):
        p, r = term.indices[0], term.indices[3]
        if mode == "parallel":
            return {"basis": 4, "CNOT": 8, "CRz": 4, "BSM": 8, "GlobalRz": 0}
        extra = 0 if kind is TermKind.HPQQR_ORDERED else 1
        return {
            "basis": 8,
            "CNOT": 4 * (r - p + extra),
            "CRz": 4,
            "BSM": 0,
            "GlobalRz": 0,
        }
    a, b, c, d = term.support_key
    n_act = 8 if active_rotations is None else active_rotations
    if mode == "parallel":
        return {
            "basis": 2 * n_act,
            "CNOT": 2 * n_act,
            "CRz": n_act,
            "BSM": 2 * n_act,
            "GlobalRz": 0,
        }
    span = (b - a) + (d - c) + 1
    return {
        "basis": 8 * n_act,
        "CNOT": 2 * span * n_act,
        "CRz": n_act,
        "BSM": 0,
        "GlobalRz": 0,
    }


def term_total_gates(term: FermionTerm, mode: str = "sequential") -> int:
    """Per-term total excluding the once-per-step global rotation."""
    counts = term_gate_counts(term, mode)
    return counts["basis"] + counts["CNOT"] + counts["CRz"] + counts["BSM"]


@dataclass
class CircuitMetrics:
    """Aggregated per-step gate tallies for one Hamiltonian."""

    rotations: int
    counts_by_kind: dict[str, int]
    sequential_total: int
    parallel_total: int
    mode: str = "sequential"

    def to_dict(self) -> dict:
        return {
            "rotations": self.rotations,
            "counts_by_kind": dict(self.counts_by_kind),
            "sequential_total": self.sequential_total,
            "parallel_total": self.parallel_total,
            "mode": self.mode,
        }


def _hpqrs_pairing_class(term: FermionTerm) -> int:
    """Which of the three same-support pairings a four-index term realizes."""
    support = term.support_key
    cre = {term.indices[0], term.indices[1]}
    if cre == {support[0], support[1]}:
        return 0
    if cre == {support[0], support[2]}:
        return 1
    return 2


_PAIRING_REFERENCE = ((0, 1, 2, 3), (0, 2, 1, 3), (0, 3, 1, 2))
_pairing_signs_cache: dict[int, dict[tuple[str, ...], float]] = {}


def _pairing_sign_pattern(pairing_class: int) -> dict[tuple[str, ...], float]:
    """Sign (+-1/8 scaled to +-1) of each endpoint X/Y pattern for a pairing.

    The signs depend only on the relative order of the four indices, not on
    their gaps, so one reference tuple per pairing class suffices.
    """
    cached = _pairing_signs_cache.get(pairing_class)
    if cached is not None:
        return cached
    term = FermionTerm(TermKind.HPQRS, _PAIRING_REFERENCE[pairing_class], 1.0)
    support = term.support_key
    pattern_signs: dict[tuple[str, ...], float] = {}
    for string, weight in term_pauli_weights(term).items():
        letters = dict(string)
        pattern = tuple(letters[q] for q in support)
        pattern_signs[pattern] = weight * 8.0
    _pairing_signs_cache[pairing_class] = pattern_signs
    return pattern_signs


def _active_rotation_map(
    h: FermionHamiltonian, fuse_double_excitations: bool, zero_threshold: float
) -> dict[int, int]:
    """Active rotation count per Hpqrs term id.

    With fusion, terms sharing the same four-orbital support pool their
    string weights (their eight strings coincide because every pairing's
    strings live on the same two sorted blocks); angles cancelled by
    symmetry are pruned and the surviving rotations are charged to the
    first term of the group, shrinking 8 to 4 or 2 for symmetric integrals.
    """
    out: dict[int, int] = {}
    if not fuse_double_excitations:
        for tid, term in enumerate(h.terms):
            if term.kind is TermKind.HPQRS:
                out[tid] = 8
        return out
    groups: dict[tuple[int, ...], list[int]] = {}
    for tid, term in enumerate(h.terms):
        if term.kind is TermKind.HPQRS:
            groups.setdefault(term.support_key, []).append(tid)
    patterns = sorted(_pairing_sign_pattern(0))
    for ids in groups.values():
        combined = dict.fromkeys(patterns, 0.0)
        for tid in ids:
            term = h.terms[tid]
            signs = _pairing_sign_pattern(_hpqrs_pairing_class(term))
            for pattern, sign in signs.items():
                combined[pattern] += term.coefficient * sign / 8.0
        active = sum(1 for w in combined.values() if abs(w) >= zero_threshold)
        out[ids[0]] = active
        for tid in ids[1:]:
            out[tid] = 0
    return out


def metrics_for_step(
    h: FermionHamiltonian,
    dt: float | None = None,
    order: int = 1,
    mode: str = "sequential",
    fuse_double_excitations: bool = False,
    zero_threshold: float = ZERO_COEFFICIENT_THRESHOLD,
) -> CircuitMetrics:
    """Closed-form gate tallies for one Trotter step.

    Order 2 traverses every term twice at half angle except the pivot (the
    last term), whose two half applications merge.  The global rotation shared
    by the density-density terms is counted once per step.
    """
    if dt is not None and dt <= 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    if order not in (1, 2):
        raise ValidationError(f"order must be 1 or 2, got {order}")
    if mode not in ("sequential", "parallel"):
        raise ValidationError(f"unknown mode {mode!r}")
    active_map = _active_rotation_map(h, fuse_double_excitations, zero_threshold)
    order_ids = sorted(range(h.n_terms), key=lambda i: h.terms[i].sort_key())
    multiplicity = {tid: (2 if order == 2 else 1) for tid in order_ids}
    if order == 2 and order_ids:
        multiplicity[order_ids[-1]] = 1

    totals = {"sequential": 0, "parallel": 0}
    counts: dict[str, int] = {"basis": 0, "CNOT": 0, "CRz": 0, "BSM": 0, "GlobalRz": 0}
    rotations = 0
    any_global = False
    for tid, term in enumerate(h.terms):
        mult = multiplicity[tid]
        active = active_map.get(tid)
        for mode_name in ("sequential", "parallel"):
            row = term_gate_counts(term, mode_name, active_rotations=active)
            totals[mode_name] += mult * (
                row["basis"] + row["CNOT"] + row["CRz"] + row["BSM"]
            )
            if mode_name == mode:
                for key in ("basis", "CNOT", "CRz", "BSM"):
                    counts[key] += mult * row[key]
                if row["GlobalRz"]:
                    any_global = True
        rotations += mult * term_gate_counts(term, "sequential", active_rotations=active)["CRz"]
    if any_global:
        counts["GlobalRz"] = 1
        totals["sequential"] += 1
        totals["parallel"] += 1
    return CircuitMetrics(
        rotations=rotations,
        counts_by_kind=counts,
        sequential_total=totals["sequential"],
        parallel_total=totals["parallel"],
        mode=mode,
    )


@dataclass
class PowerLawFit:
    exponent: float
    prefactor: float
    r_squared: float


def loglog_fit(x: Sequence[float], y: Sequence[float]) -> PowerLawFit:
    """Least-squares fit of y = prefactor * x^exponent on log-log axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y) or len(np.unique(x)) < 2:
        raise DegenerateFitError(
            f"power-law fit needs >= 2 distinct x values, got {sorted(set(x))}"
        )
    if np.any(x <= 0) or np.any(y <= 0):
        raise DegenerateFitError("power-law fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    fit = slope * lx + intercept
    ss_res = float(np.sum((ly - fit) ** 2))
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(float(slope), float(np.exp(intercept)), r2)


@dataclass
class CountScaling:
    n_values: list[int]
    rotations: PowerLawFit
    sequential: PowerLawFit
    parallel: PowerLawFit
    points: dict[str, list[int]]


def count_scaling_study(
    n_list: Sequence[int],
    mode: str = "sequential",
    fuse_double_excitations: bool = True,
) -> CountScaling:
    """Fit gate-count growth over full dense term sets per orbital count.

    Counting pools same-support double-excitation rotations by default, the
    convention the reference per-step tallies follow.  Census coefficients
    are distinct generic values so no pooled angle cancels accidentally.
    """
    n_values = sorted(set(int(n) for n in n_list))
    if len(n_values) < 2:
        raise DegenerateFitError(f"need >= 2 distinct orbital counts, got {n_list}")
    rot, seq, par = [], [], []
    for n in n_values:
        terms = tuple(
            FermionTerm(t.kind, t.indices, 1.0 + 1e-4 * i)
            for i, t in enumerate(full_term_census(n))
        )
        h = FermionHamiltonian(n, n // 2, terms)
        metrics = metrics_for_step(
            h, order=1, mode=mode, fuse_double_excitations=fuse_double_excitations
        )
        rot.append(metrics.rotations)
        seq.append(metrics.sequential_total)
        par.append(metrics.parallel_total)
    return CountScaling(
        n_values=n_values,
        rotations=loglog_fit(n_values, rot),
        sequential=loglog_fit(n_values, seq),
        parallel=loglog_fit(n_values, par),
        points={"rotations": rot, "sequential": seq, "parallel": par},
    )


def circuit_for_step(
    h: FermionHamiltonian,
    dt: float,
    order: int = 1,
    mode: str = "sequential",
) -> Circuit:
    """Materialize the full step circuit (global phases merged into one gate)."""
    from .planner import plan_step  # local import to avoid a cycle

    plan = plan_step(h, dt, order=order)
    circuit = Circuit(h.n_spin_orbitals)
    global_angle = h.energy_shift * dt
    for tid, duration in plan.schedule():
        term_circuit = compile_term(
            h.terms[tid], duration, mode=mode, n_qubits=h.n_spin_orbitals
        )
        for gate in term_circuit.gates:
            if gate.kind is GateKind.GLOBAL_RZ:
                global_angle += gate.angle
            else:
                circuit.gates.append(gate)
    if global_angle:
        circuit.gates.insert(0, Gate(GateKind.GLOBAL_RZ, (), global_angle))
    return circuit
