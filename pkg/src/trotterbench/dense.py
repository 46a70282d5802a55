"""Exact desk-scale simulator: dense operators, Trotter products, energies.

Every fermionic term couples each occupation basis state to at most one
partner state, so the exponential of a single term is a direct sum of 1x1
phases and 2x2 rotations.  Trotter-step unitaries are built by streaming
these closed-form exponentials over a schedule, either as dense matrices
(small dimensions) or matrix-free (large particle-number sectors).

Energies are extracted the way a phase-estimation readout would see them:
from the eigenvalue of the step unitary closest to 1 after shifting the
spectrum positive, via log(lambda)/(-i dt).
"""

from __future__ import annotations

import contextlib
import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse.linalg
from threadpoolctl import threadpool_limits

from .errors import BranchCutError, ResourceCapError, ValidationError
from .hamiltonian import FermionHamiltonian, FermionTerm, TermKind
from .pauli import term_operator_factors

DEFAULT_DENSE_CAP = 16
DENSE_CAP_ENV_VAR = "TROTTERBENCH_DENSE_CAP"

#: largest basis dimension for which full dense matrices are materialized
DENSE_MATRIX_DIM_CAP = 4096

#: sectors up to this dimension use full dense eigensolves
_DENSE_EIG_DIM = 1200


def dense_cap() -> int:
    value = os.environ.get(DENSE_CAP_ENV_VAR)
    return int(value) if value else DEFAULT_DENSE_CAP


def small_matrix_blas(dim: int):
    """Single-threaded BLAS context below the threading break-even size.

    Threaded BLAS pays a large per-call setup cost that dwarfs the work on
    the small matrices streaming through the bound and sweep loops.
    """
    if dim <= 512:
        return threadpool_limits(limits=1)
    return contextlib.nullcontext()


def _check_cap(n_orbitals: int) -> None:
    cap = dense_cap()
    if n_orbitals > cap:
        raise ResourceCapError(
            f"{n_orbitals} spin orbitals exceeds the dense cap of {cap}; "
            "use the counting-only workflows (metrics/scaling) or raise "
            f"{DENSE_CAP_ENV_VAR}"
        )


def _popcount(arr: np.ndarray) -> np.ndarray:
    return np.bitwise_count(arr)


class FockBasis:
    """Occupation-number basis, optionally restricted to fixed electron count.

    Bit i of a basis label is the occupation of spin orbital i.
    """

    def __init__(self, n_orbitals: int, n_electrons: int | None = None):
        _check_cap(n_orbitals)
        self.n_orbitals = n_orbitals
        self.n_electrons = n_electrons
        all_states = np.arange(1 << n_orbitals, dtype=np.uint32)
        if n_electrons is None:
            self.states = all_states
        else:
            self.states = all_states[_popcount(all_states) == n_electrons]
        self.dim = len(self.states)
        self._rank = np.full(1 << n_orbitals, -1, dtype=np.int64)
        self._rank[self.states] = np.arange(self.dim)

    def rank_of(self, states: np.ndarray) -> np.ndarray:
        return self._rank[states]

    def hartree_fock_index(self) -> int:
        """Rank of the determinant filling the lowest-index orbitals."""
        if self.n_electrons is None:
            raise ValidationError("Hartree-Fock state needs a fixed electron count")
        return int(self.rank_of(np.array([(1 << self.n_electrons) - 1], np.uint32))[0])


def apply_operator_string(
    states: np.ndarray, ops: Sequence[tuple[int, bool]]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Act with a product of c/c^ factors (leftmost applied last) on labels.

    Returns (eligible mask, output labels, fermionic signs).  Output entries
    where ``eligible`` is False are meaningless.
    """
    eligible = np.ones(len(states), dtype=bool)
    current = states.astype(np.uint32).copy()
    parity = np.zeros(len(states), dtype=np.uint32)
    for orbital, dagger in reversed(ops):
        bit = np.uint32(1 << orbital)
        below = np.uint32(bit - 1)
        occupied = (current & bit) != 0
        eligible &= (~occupied) if dagger else occupied
        parity ^= _popcount(current & below) & 1
        current ^= bit
    signs = 1.0 - 2.0 * parity.astype(np.float64)
    return eligible, current, signs


@dataclass
class TermAction:
    """Closed-form action of one Hermitian term on a FockBasis.

    Diagonal kinds carry the indices of occupied-pattern states; off-diagonal
    kinds carry (source, destination, sign) pair lists, each state appearing
    in at most one pair.
    """

    coefficient: float
    diagonal_idx: np.ndarray | None = None
    src: np.ndarray | None = None
    dst: np.ndarray | None = None
    signs: np.ndarray | None = None

    @classmethod
    def build(cls, term: FermionTerm, basis: FockBasis) -> "TermAction":
        states = basis.states
        if term.kind.is_diagonal:
            mask = np.ones(len(states), dtype=bool)
            for orbital in set(term.indices):
                mask &= (states >> np.uint32(orbital)) & 1 == 1
            return cls(term.coefficient, diagonal_idx=np.nonzero(mask)[0].astype(np.int32))
        ops = term_operator_factors(term)
        eligible, out, signs = apply_operator_string(states, ops)
        src = np.nonzero(eligible)[0].astype(np.int32)
        dst = basis.rank_of(out[eligible]).astype(np.int32)
        if dst.size and dst.min() < 0:
            raise ValidationError("term maps states outside the basis sector")
        return cls(term.coefficient, src=src, dst=dst, signs=signs[eligible])

    def apply_exponential(self, theta: float, vec: np.ndarray) -> None:
        """In-place vec <- exp(-i theta H_term) vec (vec may be 2-D, rows mixed)."""
        angle = theta * self.coefficient
        if self.diagonal_idx is not None:
            if self.diagonal_idx.size:
                vec[self.diagonal_idx] *= np.exp(-1j * angle)
            return
        if self.src is None or self.src.size == 0:
            return
        cos = math.cos(angle)
        msin = -1j * math.sin(angle)
        a = vec[self.src]
        b = vec[self.dst]
        if vec.ndim == 2:
            coupling = (msin * self.signs)[:, None]
        else:
            coupling = msin * self.signs
        vec[self.src] = cos * a + coupling * b
        vec[self.dst] = coupling * a + cos * b

    def add_to_matrix(self, out: np.ndarray) -> None:
        c = self.coefficient
        if self.diagonal_idx is not None:
            out[self.diagonal_idx, self.diagonal_idx] += c
            return
        out[self.dst, self.src] += c * self.signs
        out[self.src, self.dst] += c * self.signs

    def apply_h(self, vec: np.ndarray, out: np.ndarray) -> None:
        """Accumulate H_term @ vec into out."""
        c = self.coefficient
        if self.diagonal_idx is not None:
            out[self.diagonal_idx] += c * vec[self.diagonal_idx]
            return
        # pair lists are bijective, so indexed accumulation is safe
        out[self.dst] += c * self.signs * vec[self.src]
        out[self.src] += c * self.signs * vec[self.dst]


class HamiltonianAction:
    """Per-term closed-form actions for one Hamiltonian on one basis."""

    def __init__(self, h: FermionHamiltonian, basis: FockBasis):
        self.hamiltonian = h
        self.basis = basis
        self.actions = [TermAction.build(t, basis) for t in h.terms]

    def apply_schedule(self, schedule: Iterable[tuple[int, float]], vec: np.ndarray) -> np.ndarray:
        """Apply the product of term exponentials (first entry acts first)."""
        for term_id, duration in schedule:
            self.actions[term_id].apply_exponential(duration, vec)
        return vec

    def matvec_h(self, vec: np.ndarray) -> np.ndarray:
        out = np.zeros_like(vec, dtype=complex)
        for action in self.actions:
            action.apply_h(vec, out)
        if self.hamiltonian.energy_shift:
            out += self.hamiltonian.energy_shift * vec
        return out


@dataclass
class DenseOperator:
    """A dense operator on a FockBasis with on-demand structure checks."""

    matrix: np.ndarray
    basis: FockBasis

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def hermiticity_defect(self) -> float:
        return spectral_norm(self.matrix - self.matrix.conj().T)

    def unitarity_defect(self) -> float:
        eye = np.eye(self.dim)
        return spectral_norm(self.matrix @ self.matrix.conj().T - eye)

    def check_hermitian(self, tol: float = 1e-10) -> None:
        defect = self.hermiticity_defect()
        if defect > tol:
            raise ValidationError(f"matrix is not Hermitian (defect {defect:.3e})")

    def check_unitary(self, tol: float = 1e-10) -> None:
        defect = self.unitarity_defect()
        if defect > tol:
            raise ValidationError(f"matrix is not unitary (defect {defect:.3e})")


def spectral_norm(mat: np.ndarray) -> float:
    """Largest singular value; uses the Hermitian fast path when applicable."""
    if mat.shape[0] != mat.shape[1]:
        return float(np.linalg.norm(mat, 2))
    herm_defect = np.abs(mat - mat.conj().T).max()
    if herm_defect < 1e-13 * max(1.0, np.abs(mat).max()):
        return float(np.max(np.abs(scipy.linalg.eigvalsh(mat))))
    anti = np.abs(mat + mat.conj().T).max()
    if anti < 1e-13 * max(1.0, np.abs(mat).max()):
        return float(np.max(np.abs(scipy.linalg.eigvalsh(1j * mat))))
    return float(np.linalg.norm(mat, 2))


def operator_matrix(
    ops: Sequence[tuple[int, bool]], n_orbitals: int, n_electrons: int | None = None
) -> np.ndarray:
    """Dense matrix of a raw c/c^ product (for algebra cross-checks)."""
    basis = FockBasis(n_orbitals, n_electrons)
    eligible, out, signs = apply_operator_string(basis.states, ops)
    mat = np.zeros((basis.dim, basis.dim), dtype=complex)
    src = np.nonzero(eligible)[0]
    dst = basis.rank_of(out[eligible])
    mat[dst, src] = signs[eligible]
    return mat


def assemble_dense(
    h: FermionHamiltonian, n_electrons: int | None = None
) -> DenseOperator:
    """Hermitian matrix of the Hamiltonian (including the energy shift)."""
    basis = FockBasis(h.n_spin_orbitals, n_electrons)
    if basis.dim > DENSE_MATRIX_DIM_CAP:
        raise ResourceCapError(
            f"dense assembly of dimension {basis.dim} exceeds the matrix cap "
            f"{DENSE_MATRIX_DIM_CAP}; use the matrix-free estimators"
        )
    mat = np.zeros((basis.dim, basis.dim), dtype=complex)
    for term in h.terms:
        TermAction.build(term, basis).add_to_matrix(mat)
    if h.energy_shift:
        mat += h.energy_shift * np.eye(basis.dim)
    return DenseOperator(mat, basis)


def exact_exponential(h: FermionHamiltonian, t: float, n_electrons: int | None = None) -> DenseOperator:
    """exp(-i t H) via eigendecomposition of the dense Hamiltonian."""
    op = assemble_dense(h, n_electrons)
    with small_matrix_blas(op.dim):
        evals, evecs = scipy.linalg.eigh(op.matrix)
        mat = (evecs * np.exp(-1j * t * evals)) @ evecs.conj().T
    return DenseOperator(mat, op.basis)


def trotter_unitary(plan, h: FermionHamiltonian, n_electrons: int | None = None) -> DenseOperator:
    """Dense product of per-term exponentials in plan order.

    ``plan`` provides ``schedule()`` yielding (term_index, duration) pairs for
    one step plus a ``steps`` attribute; the energy shift enters as a global
    phase so the product approximates exp(-i dt H) shift included.
    """
    basis = FockBasis(h.n_spin_orbitals, n_electrons)
    if basis.dim > DENSE_MATRIX_DIM_CAP:
        raise ResourceCapError(
            f"dense Trotter unitary of dimension {basis.dim} exceeds the cap "
            f"{DENSE_MATRIX_DIM_CAP}; use estimate_energy for matrix-free studies"
        )
    action = HamiltonianAction(h, basis)
    mat = np.eye(basis.dim, dtype=complex)
    with small_matrix_blas(basis.dim):
        action.apply_schedule(plan.schedule(), mat)
        if h.energy_shift:
            mat *= np.exp(-1j * h.energy_shift * plan.dt)
        steps = getattr(plan, "steps", 1)
        if steps > 1:
            mat = np.linalg.matrix_power(mat, steps)
    return DenseOperator(mat, basis)


def ground_state(
    h: FermionHamiltonian, n_electrons: int | None = None
) -> tuple[float, np.ndarray, FockBasis]:
    """Lowest eigenpair in the particle-number sector (FCI oracle)."""
    if n_electrons is None:
        n_electrons = h.n_electrons
    basis = FockBasis(h.n_spin_orbitals, n_electrons)
    if basis.dim == 0:
        raise ValidationError(f"empty particle-number sector (N_e={n_electrons})")
    if basis.dim <= _DENSE_EIG_DIM:
        with small_matrix_blas(basis.dim):
            op = assemble_dense(h, n_electrons)
            evals, evecs = scipy.linalg.eigh(op.matrix)
        return float(evals[0]), np.ascontiguousarray(evecs[:, 0]), basis
    action = HamiltonianAction(h, basis)
    linop = scipy.sparse.linalg.LinearOperator(
        (basis.dim, basis.dim), matvec=action.matvec_h, dtype=complex
    )
    evals, evecs = scipy.sparse.linalg.eigsh(
        linop, k=2, which="SA", maxiter=20000, tol=1e-11,
        ncv=min(basis.dim - 1, 48),
    )
    order = np.argsort(evals)
    return float(evals[order[0]]), np.ascontiguousarray(evecs[:, order[0]]), basis


def exact_ground_energy(h: FermionHamiltonian, n_electrons: int | None = None) -> float:
    """Minimum eigenvalue within the fixed-particle-number sector."""
    return ground_state(h, n_electrons)[0]


def gershgorin_shift(h: FermionHamiltonian) -> float:
    """Guaranteed positive-spectrum shift from the term-norm sum.

    The lower spectral bound estimate is energy_shift minus the sum of term
    norms; the shift is 1.1x its magnitude (0 if the bound is already >= 0).
    """
    lower_bound = h.energy_shift - sum(t.norm_bound() for t in h.terms)
    return 1.1 * abs(lower_bound) if lower_bound < 0 else 0.0


@dataclass
class EnergyEstimate:
    """Energy read off one eigenvalue of a (shifted) step unitary."""

    energy: float
    dt: float
    eigenvalue: complex
    branch_margin: float
    shift: float
    overlap: float | None = None
    method: str = "dense"

    def __post_init__(self):
        if abs(abs(self.eigenvalue) - 1.0) > 1e-8:
            raise ValidationError(
                f"eigenvalue magnitude {abs(self.eigenvalue):.12f} is not 1"
            )


_BRANCH_MARGIN_MIN = 0.1  # radians


def _energy_from_eigenvalue(
    lam: complex, dt: float, shift: float, overlap: float | None, method: str
) -> EnergyEstimate:
    lam_shifted = lam * np.exp(-1j * dt * shift)
    phase = float(np.angle(lam_shifted))
    margin = math.pi - abs(phase)
    if margin <= _BRANCH_MARGIN_MIN:
        raise BranchCutError(
            f"eigenphase {phase:.4f} rad leaves branch margin {margin:.4f} <= "
            f"{_BRANCH_MARGIN_MIN}; use a smaller time step or a larger shift"
        )
    energy = -phase / dt - shift
    return EnergyEstimate(
        energy=energy,
        dt=dt,
        eigenvalue=complex(lam_shifted),
        branch_margin=margin,
        shift=shift,
        overlap=overlap,
        method=method,
    )


def ground_energy_from_unitary(
    unitary: DenseOperator,
    h: FermionHamiltonian,
    dt: float,
    shift: float | None = None,
    reference_vector: np.ndarray | None = None,
) -> EnergyEstimate:
    """Extract a ground-state energy from a step unitary's eigenvalue.

    After multiplying the spectrum by exp(-i dt shift) (shift chosen so the
    shifted ground energy is positive), the relevant eigenvalue is the one
    with the largest real component, i.e. closest to 1.  When a reference
    eigenvector is supplied, overlap with it decides between candidates,
    which keeps the readout on the physical branch even when excited
    eigenphases wrap the circle.
    """
    if shift is None:
        shift = gershgorin_shift(h)
    evals, evecs = np.linalg.eig(unitary.matrix)
    shifted = evals * np.exp(-1j * dt * shift)
    if reference_vector is not None:
        overlaps = np.abs(reference_vector.conj() @ evecs)
        pick = int(np.argmax(overlaps))
        overlap = float(overlaps[pick])
    else:
        pick = int(np.argmax(shifted.real))
        overlap = None
    return _energy_from_eigenvalue(evals[pick], dt, shift, overlap, method="dense")


def _arnoldi_tracked_eigenvalue(
    matvec: Callable[[np.ndarray], np.ndarray],
    v0: np.ndarray,
    tol: float = 1e-10,
    max_dim: int = 90,
    restarts: int = 8,
) -> tuple[complex, np.ndarray, float]:
    """Eigenvalue of a unitary whose eigenvector maximizes overlap with v0.

    Plain Arnoldi started at v0; the tracked Ritz pair is the one with the
    largest first-component weight, i.e. the continuation of v0.
    Returns (eigenvalue, eigenvector, residual).
    """
    start = v0 / np.linalg.norm(v0)
    best = None
    for _ in range(restarts):
        vecs = [start]
        hess = np.zeros((max_dim + 1, max_dim), dtype=complex)
        ritz_val, ritz_vec, residual = None, None, np.inf
        for j in range(max_dim):
            w = matvec(vecs[j])
            for i, v in enumerate(vecs):
                hess[i, j] = np.vdot(v, w)
                w -= hess[i, j] * v
            for i, v in enumerate(vecs):  # one re-orthogonalization pass
                corr = np.vdot(v, w)
                hess[i, j] += corr
                w -= corr * v
            norm_w = np.linalg.norm(w)
            hess[j + 1, j] = norm_w
            dim = j + 1
            sub = hess[:dim, :dim]
            evals, evecs = np.linalg.eig(sub)
            weights = np.abs(evecs[0, :])
            pick = int(np.argmax(weights))
            y = evecs[:, pick]
            residual = float(abs(norm_w * y[-1]))
            ritz_val = evals[pick]
            if residual < tol or norm_w < 1e-13:
                ritz_vec = np.zeros_like(start)
                for coeff, v in zip(y, vecs):
                    ritz_vec += coeff * v
                ritz_vec /= np.linalg.norm(ritz_vec)
                return complex(ritz_val), ritz_vec, residual
            vecs.append(w / norm_w)
        ritz_vec = np.zeros_like(start)
        for coeff, v in zip(evecs[:, pick], vecs[:-1]):
            ritz_vec += coeff * v
        ritz_vec /= np.linalg.norm(ritz_vec)
        start = ritz_vec
        best = (complex(ritz_val), ritz_vec, residual)
    return best


def estimate_energy(
    h: FermionHamiltonian,
    plan,
    n_electrons: int | None = None,
    shift: float | None = None,
    reference: tuple[float, np.ndarray, FockBasis] | None = None,
) -> EnergyEstimate:
    """Energy estimate from the plan's step unitary, dense or matrix-free."""
    if n_electrons is None:
        n_electrons = h.n_electrons
    if reference is None:
        reference = ground_state(h, n_electrons)
    e_exact, psi0, basis = reference
    dt = plan.dt
    if shift is None:
        shift = -e_exact + 1.0
    schedule = list(plan.schedule())
    phase = np.exp(-1j * h.energy_shift * dt) if h.energy_shift else 1.0

    if basis.dim <= _DENSE_EIG_DIM:
        with small_matrix_blas(basis.dim):
            action = HamiltonianAction(h, basis)
            mat = np.eye(basis.dim, dtype=complex)
            action.apply_schedule(schedule, mat)
            if h.energy_shift:
                mat = mat * phase
            estimate = ground_energy_from_unitary(
                DenseOperator(mat, basis), h, dt, shift=shift, reference_vector=psi0
            )
        return estimate

    action = HamiltonianAction(h, basis)

    def matvec(vec: np.ndarray) -> np.ndarray:
        out = vec.copy()
        action.apply_schedule(schedule, out)
        if h.energy_shift:
            out *= phase
        return out

    lam, vec, residual = _arnoldi_tracked_eigenvalue(matvec, psi0.astype(complex))
    overlap = float(abs(np.vdot(psi0, vec)))
    estimate = _energy_from_eigenvalue(lam, dt, shift, overlap, method="arnoldi")
    return estimate


@dataclass
class ErrorCurvePoint:
    dt: float
    error: float
    energy: float | None
    excluded: bool = False
    reason: str = ""
    branch_margin: float | None = None
    overlap: float | None = None


@dataclass
class ErrorCurve:
    """Trotter discretization error |E(dt) - E_exact| versus time step."""

    points: list[ErrorCurvePoint]
    exact_energy: float
    exponent: float | None = None
    prefactor: float | None = None
    r_squared: float | None = None

    def included(self) -> list[ErrorCurvePoint]:
        return [p for p in self.points if not p.excluded]

    def fitted(self) -> bool:
        return self.exponent is not None


_MIN_TRACKING_OVERLAP = 0.5


def error_curve(
    h: FermionHamiltonian,
    plan_family: Callable[[float], object],
    dt_list: Sequence[float],
    n_electrons: int | None = None,
    shift_offset: float = 1.0,
) -> ErrorCurve:
    """Measure ``|E_est(dt) - E_exact|`` per time step and fit the power law.

    ``plan_family(dt)`` must return a single-step plan.  Points that hit the
    branch cut or lose track of the reference eigenvector are flagged and
    excluded from the fit.
    """
    dt_list = sorted(set(float(d) for d in dt_list), reverse=True)
    if len(dt_list) < 2:
        raise ValidationError("error curve needs at least two distinct time steps")
    if n_electrons is None:
        n_electrons = h.n_electrons
    reference = ground_state(h, n_electrons)
    e_exact = reference[0]
    shift = -e_exact + shift_offset
    points: list[ErrorCurvePoint] = []
    for dt in dt_list:
        plan = plan_family(dt)
        try:
            est = estimate_energy(
                h, plan, n_electrons=n_electrons, shift=shift, reference=reference
            )
        except BranchCutError as exc:
            points.append(
                ErrorCurvePoint(dt, math.nan, None, excluded=True, reason=str(exc))
            )
            continue
        reason = ""
        excluded = False
        if est.overlap is not None and est.overlap < _MIN_TRACKING_OVERLAP:
            excluded = True
            reason = f"eigenvector tracking lost (overlap {est.overlap:.3f})"
        points.append(
            ErrorCurvePoint(
                dt,
                abs(est.energy - e_exact),
                est.energy,
                excluded=excluded,
                reason=reason,
                branch_margin=est.branch_margin,
                overlap=est.overlap,
            )
        )
    curve = ErrorCurve(points, e_exact)
    usable = [p for p in curve.included() if p.error > 1e-12]
    if len(usable) >= 2 and len({p.dt for p in usable}) >= 2:
        log_dt = np.log([p.dt for p in usable])
        log_err = np.log([p.error for p in usable])
        slope, intercept = np.polyfit(log_dt, log_err, 1)
        fit = slope * log_dt + intercept
        ss_res = float(np.sum((log_err - fit) ** 2))
        ss_tot = float(np.sum((log_err - np.mean(log_err)) ** 2))
        curve.exponent = float(slope)
        curve.prefactor = float(np.exp(intercept))
        curve.r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return curve


def required_steps(
    curve: ErrorCurve, eps_target: float, dt_ref: float | None = None
) -> int:
    """Trotter steps per unit time needed for accuracy ``eps_target``.

    Evaluates (eps(dt) / (dt^2 eps_target))^(1/2) with the fitted power law;
    for a clean quadratic the result is dt-independent and equals
    sqrt(prefactor / eps_target).
    """
    if not curve.fitted():
        raise ValidationError("error curve has no usable power-law fit")
    if eps_target <= 0:
        raise ValidationError("eps_target must be positive")
    if not 1.5 <= curve.exponent <= 2.5:
        warnings.warn(
            f"fitted exponent {curve.exponent:.3f} is far from quadratic; "
            "step-count formula evaluated anyway",
            RuntimeWarning,
            stacklevel=2,
        )
    if dt_ref is None:
        value = math.sqrt(curve.prefactor / eps_target)
    else:
        eps_at_ref = curve.prefactor * dt_ref ** curve.exponent
        value = math.sqrt(eps_at_ref / (dt_ref**2 * eps_target))
    return int(math.ceil(value))
