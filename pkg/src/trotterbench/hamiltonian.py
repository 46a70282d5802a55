"""Second-quantized electronic Hamiltonians as classified Hermitian terms.

A Hamiltonian is stored as a list of :class:`FermionTerm`, each of which
represents a Hermitian combination of creation/annihilation operators with a
real coefficient in Hartree:

========  ======================  =======================================
kind      canonical indices       operator (h = coefficient)
========  ======================  =======================================
Hpp       (p, p)                  h * n_p
Hpq       (p, q), p < q           h * (c_p^ c_q + c_q^ c_p)
Hpqqp     (p, q, q, p), p < q     h * n_p n_q
Hpqqr     (p, q, q, r), p < r     h * (c_p^ n_q c_r + c_r^ n_q c_p)
Hpqrs     (p, q, r, s) distinct   h * (c_p^ c_q^ c_r c_s + h.c.)
========  ======================  =======================================

Real-orbital convention: one canonical representative is stored per
conjugate pair and the Hermitian partner is implied, so every coefficient
is real.  Canonical index order makes deduplication and term ordering
deterministic: Hpqrs tuples are stored with p < q, r < s and the creation
pair lexicographically no greater than the annihilation pair.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO

from .errors import ParseError, ValidationError

#: coefficients below this magnitude (Hartree) are dropped at parse time
ZERO_COEFFICIENT_THRESHOLD = 1e-12


class TermKind(enum.Enum):
    HPP = "Hpp"
    HPQ = "Hpq"
    HPQQP = "Hpqqp"
    HPQQR_ORDERED = "HpqqrOrdered"
    HPQQR_UNORDERED = "HpqqrUnordered"
    HPQRS = "Hpqrs"

    @property
    def is_one_body(self) -> bool:
        return self in (TermKind.HPP, TermKind.HPQ)

    @property
    def is_diagonal(self) -> bool:
        """True for terms diagonal in the occupation basis."""
        return self in (TermKind.HPP, TermKind.HPQQP)


def _canonicalize_one_body(p: int, q: int) -> tuple[TermKind, tuple[int, ...], int]:
    if p == q:
        return TermKind.HPP, (p, p), 1
    a, b = (p, q) if p < q else (q, p)
    return TermKind.HPQ, (a, b), 1


def _canonicalize_two_body(
    p: int, q: int, r: int, s: int
) -> tuple[TermKind, tuple[int, ...], int]:
    """Reduce c_p^ c_q^ c_r c_s to canonical form, tracking the fermionic sign.

    Raises ValidationError for tuples whose operator vanishes identically
    (repeated creation or annihilation index).
    """
    if p == q or r == s:
        raise ValidationError(
            f"two-body tuple ({p},{q},{r},{s}) has a repeated creation or "
            "annihilation index; the operator vanishes identically"
        )
    sign = 1
    cre = (p, q)
    ann = (r, s)
    if cre[0] > cre[1]:
        cre = (cre[1], cre[0])
        sign = -sign
    if ann[0] > ann[1]:
        ann = (ann[1], ann[0])
        sign = -sign
    cre_set, ann_set = set(cre), set(ann)

    if cre_set == ann_set:
        # +- n_a n_b; bring the annihilation pair to (b, a) order.
        # With both pairs ascending, c_a^ c_b^ c_a c_b = -n_a n_b.
        return TermKind.HPQQP, (cre[0], cre[1], cre[1], cre[0]), -sign

    common = cre_set & ann_set
    if len(common) == 1:
        x = common.pop()
        u = (cre_set - {x}).pop()
        v = (ann_set - {x}).pop()
        # target form c_u^ c_x^ c_x c_v
        if cre != (u, x):
            sign = -sign
        if ann != (x, v):
            sign = -sign
        lo, hi = (u, v) if u < v else (v, u)  # Hermitian partner swaps u and v
        kind = (
            TermKind.HPQQR_ORDERED
            if lo < x < hi
            else TermKind.HPQQR_UNORDERED
        )
        return kind, (lo, x, x, hi), sign

    # four distinct indices: pick the lexicographically smaller of the term
    # and its Hermitian conjugate (which reads (r, s, p, q) once both pairs
    # are ascending).
    if cre > ann:
        cre, ann = ann, cre
    return TermKind.HPQRS, (cre[0], cre[1], ann[0], ann[1]), sign


def classify_term(indices: tuple[int, ...], n_body: int | None = None) -> TermKind:
    """Classify an index tuple into its term kind.

    Accepts raw (non-canonical) tuples; classification is total and
    deterministic on every particle-number-conserving tuple.
    """
    if n_body is None:
        n_body = 1 if len(indices) == 2 else 2
    if n_body == 1:
        if len(indices) != 2:
            raise ValidationError(f"one-body tuple must have 2 indices, got {indices}")
        return _canonicalize_one_body(*indices)[0]
    if len(indices) != 4:
        raise ValidationError(f"two-body tuple must have 4 indices, got {indices}")
    return _canonicalize_two_body(*indices)[0]


@dataclass(frozen=True)
class FermionTerm:
    """One classified Hermitian term with a real coefficient in Hartree."""

    kind: TermKind
    indices: tuple[int, ...]
    coefficient: float

    def __post_init__(self):
        if not all(isinstance(i, int) and i >= 0 for i in self.indices):
            raise ValidationError(f"indices must be non-negative integers: {self.indices}")
        coeff = float(self.coefficient)
        if not coeff == coeff or coeff in (float("inf"), float("-inf")):
            raise ValidationError(f"coefficient must be finite, got {self.coefficient}")
        object.__setattr__(self, "coefficient", coeff)
        expected = classify_term(self.indices, 1 if len(self.indices) == 2 else 2)
        if expected is not self.kind:
            raise ValidationError(
                f"indices {self.indices} classify as {expected.value}, not {self.kind.value}"
            )
        canon = canonicalize(self.indices)
        if canon[1] != self.indices:
            raise ValidationError(f"indices {self.indices} are not in canonical form")

    @property
    def index_set(self) -> frozenset[int]:
        return frozenset(self.indices)

    @property
    def support_key(self) -> tuple[int, ...]:
        """Sorted distinct indices (qubit support of the compiled circuit)."""
        return tuple(sorted(set(self.indices)))

    def norm_bound(self) -> float:
        """Operator norm of the Hermitian term.

        Every kind has norm exactly ``|coefficient|``: the diagonal kinds have
        eigenvalues {0, h}, and each off-diagonal kind pairs occupation states
        with amplitude +-h, giving eigenvalues {0, +-h}.
        """
        return abs(self.coefficient)

    def sort_key(self) -> tuple:
        return (_KIND_ORDER[self.kind], self.indices)


_KIND_ORDER = {
    TermKind.HPP: 0,
    TermKind.HPQ: 1,
    TermKind.HPQQP: 2,
    TermKind.HPQQR_ORDERED: 3,
    TermKind.HPQQR_UNORDERED: 3,
    TermKind.HPQRS: 4,
}


def canonicalize(indices: tuple[int, ...]) -> tuple[TermKind, tuple[int, ...], int]:
    """Return (kind, canonical indices, sign) for a raw index tuple."""
    if len(indices) == 2:
        return _canonicalize_one_body(*indices)
    if len(indices) == 4:
        return _canonicalize_two_body(*indices)
    raise ValidationError(f"term tuples have 2 or 4 indices, got {indices}")


def make_term(indices: tuple[int, ...], coefficient: float) -> FermionTerm:
    """Build a term from a raw tuple, canonicalizing indices and sign."""
    kind, canon, sign = canonicalize(indices)
    return FermionTerm(kind, canon, sign * coefficient)


@dataclass(frozen=True)
class FermionHamiltonian:
    """Immutable collection of classified terms plus a constant energy shift.

    Safe for concurrent reads; construction validates index ranges,
    particle-number conservation (implied by the term kinds) and uniqueness
    of canonical index tuples.
    """

    n_spin_orbitals: int
    n_electrons: int
    terms: tuple[FermionTerm, ...] = field(default_factory=tuple)
    energy_shift: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.n_spin_orbitals < 0:
            raise ValidationError("n_spin_orbitals must be non-negative")
        if not 0 <= self.n_electrons <= self.n_spin_orbitals:
            raise ValidationError(
                f"n_electrons={self.n_electrons} outside [0, {self.n_spin_orbitals}]"
            )
        seen: set[tuple] = set()
        for term in self.terms:
            if max(term.indices, default=-1) >= self.n_spin_orbitals:
                raise ValidationError(
                    f"term {term.kind.value}{term.indices} exceeds "
                    f"n_spin_orbitals={self.n_spin_orbitals}"
                )
            key = (term.kind, term.indices)
            if key in seen:
                raise ValidationError(
                    f"duplicate canonical term {term.kind.value}{term.indices}"
                )
            seen.add(key)

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    def max_term_norm(self) -> float:
        """Largest single-term operator norm (the Lambda of the error bounds)."""
        return max((t.norm_bound() for t in self.terms), default=0.0)

    def sorted_terms(self) -> tuple[FermionTerm, ...]:
        return tuple(sorted(self.terms, key=FermionTerm.sort_key))

    def with_energy_shift(self, shift: float) -> "FermionHamiltonian":
        return FermionHamiltonian(
            self.n_spin_orbitals, self.n_electrons, self.terms, shift
        )


def neighbor_counts(h: FermionHamiltonian) -> tuple[list[int], int]:
    """Per-term count of other terms sharing at least one spin-orbital index.

    Index sharing is a superset of genuine non-commutation: two terms that do
    not commute must agree on at least one index, so any pair *not* counted
    here commutes exactly.  Returns (per-term counts, K = max count).
    """
    by_index: dict[int, list[int]] = {}
    for t_id, term in enumerate(h.terms):
        for idx in term.index_set:
            by_index.setdefault(idx, []).append(t_id)
    counts = []
    for t_id, term in enumerate(h.terms):
        neighbors: set[int] = set()
        for idx in term.index_set:
            neighbors.update(by_index[idx])
        neighbors.discard(t_id)
        counts.append(len(neighbors))
    return counts, max(counts, default=0)


def term_norm_bound(term: FermionTerm) -> float:
    """Operator norm of a single Hermitian term (see FermionTerm.norm_bound)."""
    return term.norm_bound()


# ---------------------------------------------------------------------------
# Integral file format
#
# header:  NORB=<int> NELEC=<int> SHIFT=<float>
# terms:   <coefficient> <p> <q> <r> <s>    (1-based indices)
#          r = s = 0          -> one-body term
#          p = q = r = s = 0  -> additional energy-shift line
# '#' starts a comment; blank lines are ignored.
# ---------------------------------------------------------------------------


def parse_integrals(
    source: str | TextIO | Iterable[str],
    zero_threshold: float = ZERO_COEFFICIENT_THRESHOLD,
) -> FermionHamiltonian:
    """Parse the integral text format into a canonicalized Hamiltonian.

    Coefficients are preserved exactly as parsed; terms whose magnitude falls
    below ``zero_threshold`` are dropped.  Raises :class:`ParseError` with the
    offending line number for malformed input and :class:`ValidationError`
    for out-of-range indices or duplicate canonical terms.
    """
    if isinstance(source, str):
        lines: Iterator[str] = iter(io.StringIO(source))
    else:
        lines = iter(source)

    n_orbitals = n_electrons = None
    shift = 0.0
    terms: list[FermionTerm] = []
    seen: set[tuple] = set()

    def strip(line: str) -> str:
        return line.split("#", 1)[0].strip()

    header_done = False
    for line_no, raw in enumerate(lines, start=1):
        text = strip(raw)
        if not text:
            continue
        if not header_done:
            fields = dict()
            for token in text.split():
                if "=" not in token:
                    raise ParseError(f"malformed header token {token!r}", line_no)
                key, _, value = token.partition("=")
                fields[key.upper()] = value
            try:
                n_orbitals = int(fields["NORB"])
                n_electrons = int(fields["NELEC"])
                shift = float(fields.get("SHIFT", "0.0"))
            except KeyError as exc:
                raise ParseError(f"header missing {exc.args[0]}", line_no) from None
            except ValueError as exc:
                raise ParseError(f"malformed header value: {exc}", line_no) from None
            header_done = True
            continue

        parts = text.split()
        if len(parts) != 5:
            raise ParseError(
                f"expected '<coefficient> <p> <q> <r> <s>', got {len(parts)} fields",
                line_no,
            )
        try:
            coeff = float(parts[0])
            p, q, r, s = (int(x) for x in parts[1:])
        except ValueError as exc:
            raise ParseError(str(exc), line_no) from None

        if p == q == r == s == 0:
            shift += coeff
            continue
        if r == 0 and s == 0:
            raw_indices = (p - 1, q - 1)
        elif 0 in (p, q, r, s):
            raise ParseError(
                "indices are 1-based; zero is only allowed as the r=s=0 "
                "one-body marker or an all-zero shift line",
                line_no,
            )
        else:
            raw_indices = (p - 1, q - 1, r - 1, s - 1)
        if min(raw_indices) < 0:
            raise ParseError(f"negative index in {parts[1:]}", line_no)
        if max(raw_indices) >= n_orbitals:
            raise ValidationError(
                f"line {line_no}: index {max(raw_indices) + 1} exceeds NORB={n_orbitals}"
            )
        try:
            term = make_term(raw_indices, coeff)
        except ValidationError as exc:
            raise ParseError(str(exc), line_no) from None
        key = (term.kind, term.indices)
        if key in seen:
            raise ValidationError(
                f"line {line_no}: duplicate canonical term "
                f"{term.kind.value}{term.indices}"
            )
        seen.add(key)
        if abs(term.coefficient) < zero_threshold:
            continue
        terms.append(term)

    if n_orbitals is None:
        raise ParseError("missing header line 'NORB=... NELEC=...'", 1)
    terms.sort(key=FermionTerm.sort_key)
    return FermionHamiltonian(n_orbitals, n_electrons, tuple(terms), shift)


def serialize_integrals(h: FermionHamiltonian) -> str:
    """Emit the canonical text form (sorted terms, 17 significant digits)."""
    out = [f"NORB={h.n_spin_orbitals} NELEC={h.n_electrons} SHIFT={h.energy_shift:.16e}"]
    for term in h.sorted_terms():
        if term.kind.is_one_body:
            p, q = term.indices
            idx = (p + 1, q + 1, 0, 0)
        else:
            idx = tuple(i + 1 for i in term.indices)
        out.append(f"{term.coefficient:.16e} {idx[0]} {idx[1]} {idx[2]} {idx[3]}")
    return "\n".join(out) + "\n"


def load_integrals(path) -> FermionHamiltonian:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_integrals(fh)


def save_integrals(h: FermionHamiltonian, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_integrals(h))


def full_term_census(
    n_spin_orbitals: int, coefficient: float = 1.0
) -> list[FermionTerm]:
    """Every particle-number-conserving term over ``n_spin_orbitals`` orbitals.

    Used for worst-case gate-count studies; all coefficients are set to the
    same placeholder value.  Terms are emitted in canonical order.
    """
    n = n_spin_orbitals
    terms: list[FermionTerm] = []
    for p in range(n):
        terms.append(FermionTerm(TermKind.HPP, (p, p), coefficient))
    for p in range(n):
        for q in range(p + 1, n):
            terms.append(FermionTerm(TermKind.HPQ, (p, q), coefficient))
    for p in range(n):
        for q in range(p + 1, n):
            terms.append(FermionTerm(TermKind.HPQQP, (p, q, q, p), coefficient))
    for p in range(n):
        for r in range(p + 1, n):
            for q in range(n):
                if q == p or q == r:
                    continue
                kind = (
                    TermKind.HPQQR_ORDERED if p < q < r else TermKind.HPQQR_UNORDERED
                )
                terms.append(FermionTerm(kind, (p, q, q, r), coefficient))
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(b + 1, n):
                for d in range(c + 1, n):
                    for tup in ((a, b, c, d), (a, c, b, d), (a, d, b, c)):
                        terms.append(FermionTerm(TermKind.HPQRS, tup, coefficient))
    terms.sort(key=FermionTerm.sort_key)
    return terms
