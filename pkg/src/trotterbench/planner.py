"""Trotter-step planning, splitting error bounds, and coalesced schedules.

A plan is a sequence of (term id, duration) applications; ``duration`` is the
absolute time argument of exp(-i * duration * H_term).  Order-2 plans are
palindromes of half steps with the pivot term's two half applications merged
into one full application.

Coalescing buckets terms by coefficient magnitude and executes small-term
buckets exponentially less often via the recursion

    V_1 = W_1 W'_1,        V_{a+1} = W_{a+1} V_a^2 W'_{a+1},

where W_a applies every bucket-a term for half of t / 2^(k-a) and W'_a is the
same product reversed.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from . import dense
from .errors import ValidationError
from .hamiltonian import FermionHamiltonian, FermionTerm, neighbor_counts

ORDERING_STRATEGIES = ("canonical", "by-magnitude-descending", "seeded-random")


def _term_order(
    h: FermionHamiltonian, strategy: str, seed: int | None
) -> tuple[int, ...]:
    ids = list(range(h.n_terms))
    if strategy == "canonical":
        ids.sort(key=lambda i: h.terms[i].sort_key())
    elif strategy == "by-magnitude-descending":
        ids.sort(key=lambda i: (-abs(h.terms[i].coefficient), h.terms[i].sort_key()))
    elif strategy == "seeded-random":
        rng = np.random.Generator(np.random.PCG64(0 if seed is None else seed))
        ids.sort(key=lambda i: h.terms[i].sort_key())
        rng.shuffle(ids)
    else:
        raise ValidationError(
            f"unknown ordering strategy {strategy!r}; expected one of {ORDERING_STRATEGIES}"
        )
    return tuple(ids)


@dataclass(frozen=True)
class TrotterPlan:
    """A first- or second-order product-formula step."""

    order: int
    dt: float
    term_order: tuple[int, ...]
    steps: int = 1
    strategy: str = "canonical"

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValidationError(f"order must be 1 or 2, got {self.order}")
        if self.dt <= 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.steps < 1:
            raise ValidationError("steps must be >= 1")
        if sorted(self.term_order) != list(range(len(self.term_order))):
            raise ValidationError("term_order must be a permutation of term ids")

    @property
    def exact_single_term(self) -> bool:
        """A single exponential commutes with itself: no splitting error."""
        return len(self.term_order) <= 1

    @property
    def total_time(self) -> float:
        return self.dt * self.steps

    def schedule(self) -> list[tuple[int, float]]:
        """(term id, duration) applications for one step, first entry first."""
        if not self.term_order:
            return []
        if self.order == 1:
            return [(tid, self.dt) for tid in self.term_order]
        half = [(tid, self.dt / 2) for tid in self.term_order]
        forward = half[:-1]
        pivot = (self.term_order[-1], self.dt)
        return forward + [pivot] + forward[::-1]

    def order_hash(self) -> str:
        payload = ",".join(str(i) for i in self.term_order).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


def plan_step(
    h: FermionHamiltonian,
    dt: float,
    order: int = 2,
    ordering_strategy: str = "canonical",
    seed: int | None = None,
    steps: int = 1,
) -> TrotterPlan:
    """Order the Hamiltonian's terms into a product-formula step."""
    if dt <= 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    return TrotterPlan(
        order=order,
        dt=dt,
        term_order=_term_order(h, ordering_strategy, seed),
        steps=steps,
        strategy=ordering_strategy,
    )


def _double_commutator_norms(a: np.ndarray, b: np.ndarray) -> float:
    """||[[A,B],A]|| + ||[[A,B],B]|| assuming A, B Hermitian.

    Both double commutators are Hermitian, so their spectral norms come
    straight from eigvalsh.
    """
    comm = a @ b
    comm -= b @ a
    m1 = comm @ a - a @ comm
    m2 = comm @ b - b @ comm
    return float(
        np.max(np.abs(scipy.linalg.eigvalsh(m1)))
        + np.max(np.abs(scipy.linalg.eigvalsh(m2)))
    )


def pair_bound(a_matrix: np.ndarray, b_matrix: np.ndarray) -> float:
    """Second-order splitting error bound ||[[A,B],A]|| + ||[[A,B],B]||.

    Bounds || e^{-iA/2} e^{-iB} e^{-iA/2} - e^{-i(A+B)} || for Hermitian A, B.
    """
    a = np.asarray(a_matrix)
    b = np.asarray(b_matrix)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"matrix shape mismatch: {a.shape} vs {b.shape}")
    scale = max(1.0, float(np.abs(a).max()), float(np.abs(b).max()))
    hermitian = (
        np.abs(a - a.conj().T).max() < 1e-12 * scale
        and np.abs(b - b.conj().T).max() < 1e-12 * scale
    )
    if hermitian:
        return _double_commutator_norms(a, b)
    comm = a @ b - b @ a
    return dense.spectral_norm(comm @ a - a @ comm) + dense.spectral_norm(
        comm @ b - b @ comm
    )


def ts_error_bound(h: FermionHamiltonian, dt: float) -> float:
    """Order-of-magnitude bound m K^2 Lambda^3 dt^3 (constant set to 1).

    m is the term count, K the maximum index-sharing neighbor count and
    Lambda the largest term norm.
    """
    _, k_max = neighbor_counts(h)
    lam = h.max_term_norm()
    return h.n_terms * k_max**2 * lam**3 * dt**3


def ts_error_bound_inductive(
    h: FermionHamiltonian,
    dt: float,
    term_order: Sequence[int] | None = None,
    n_electrons: int | None = None,
) -> float:
    """Proven second-order bound: the peeled sum of pairwise splitting bounds.

    Accumulates pair_bound(H_j dt, sum_{k>j} H_k dt) over the plan order.
    Desk-scale only (dense term matrices); pass ``n_electrons`` to evaluate
    in the particle-number sector, where every term and both product
    formulas restrict, so the accumulated bound applies verbatim.
    """
    if h.n_terms <= 1:
        return 0.0
    if term_order is None:
        term_order = plan_step(h, dt, order=2).term_order
    basis = dense.FockBasis(h.n_spin_orbitals, n_electrons)
    if basis.dim > dense.DENSE_MATRIX_DIM_CAP:
        raise dense.ResourceCapError(
            f"inductive bound needs dense term matrices (dim {basis.dim})"
        )
    mats = []
    for tid in term_order:
        mat = np.zeros((basis.dim, basis.dim), dtype=complex)
        dense.TermAction.build(h.terms[tid], basis).add_to_matrix(mat)
        mats.append(mat * dt)
    total = 0.0
    suffix = mats[-1].copy()
    with dense.small_matrix_blas(basis.dim):
        for j in range(len(mats) - 2, -1, -1):
            total += _double_commutator_norms(mats[j], suffix)
            suffix += mats[j]
    return total


@dataclass(frozen=True)
class Bucket:
    """One magnitude class of terms inside a coalesced schedule."""

    bucket_id: int
    term_ids: tuple[int, ...]
    lambda_max: float
    executions: int  # 2^(k-a): how often this bucket runs in the full schedule

    @property
    def size(self) -> int:
        return len(self.term_ids)


@dataclass(frozen=True)
class CoalescePlan:
    """Bucketed second-order schedule realizing the V_k recursion."""

    buckets: tuple[Bucket, ...]
    total_time: float

    def __post_init__(self):
        if self.total_time <= 0:
            raise ValidationError("total_time must be positive")
        lambdas = [b.lambda_max for b in self.buckets if b.size > 0]
        if any(l1 < l2 for l1, l2 in zip(lambdas, lambdas[1:])):
            raise ValidationError("buckets must be in decreasing magnitude order")

    @property
    def n_buckets(self) -> int:
        return len(self.buckets)

    @property
    def dt(self) -> float:
        return self.total_time

    @property
    def steps(self) -> int:
        return 1

    def _w_ops(self, a: int) -> list[tuple[int, float]]:
        """Half-strength forward product for bucket a (1-based)."""
        tau = self.total_time / (1 << (self.n_buckets - a))
        return [(tid, tau / 2) for tid in self.buckets[a - 1].term_ids]

    def schedule(self) -> list[tuple[int, float]]:
        forward = self._w_ops(1)
        ops = forward + forward[::-1]  # V_1 = W_1 W'_1
        for a in range(2, self.n_buckets + 1):
            forward = self._w_ops(a)
            ops = forward + ops + ops + forward[::-1]
        return ops

    def s_values(self) -> list[float]:
        """S_a = N_a Lambda_a t for each bucket."""
        return [b.size * b.lambda_max * self.total_time for b in self.buckets]


def plan_coalesced(
    h: FermionHamiltonian,
    total_time: float,
    n_buckets: int = 4,
    ratio: float = 2.0,
) -> CoalescePlan:
    """Partition terms into geometric magnitude buckets, largest first.

    Bucket a collects terms with norm in (Lmax/ratio^a, Lmax/ratio^(a-1)];
    the last bucket takes everything smaller.
    """
    if h.n_terms == 0:
        raise ValidationError("cannot coalesce an empty Hamiltonian")
    if total_time <= 0:
        raise ValidationError("total_time must be positive")
    if n_buckets < 1:
        raise ValidationError("need at least one bucket")
    if ratio <= 1:
        raise ValidationError("bucket ratio must exceed 1")
    lam_max = h.max_term_norm()
    groups: list[list[int]] = [[] for _ in range(n_buckets)]
    order = sorted(range(h.n_terms), key=lambda i: h.terms[i].sort_key())
    for tid in order:
        norm = h.terms[tid].norm_bound()
        if norm <= 0:
            a = n_buckets
        else:
            a = min(n_buckets, 1 + int(math.floor(math.log(lam_max / norm, ratio) + 1e-12)))
        groups[a - 1].append(tid)
    buckets = []
    for a, ids in enumerate(groups, start=1):
        lam_a = max((h.terms[i].norm_bound() for i in ids), default=0.0)
        buckets.append(
            Bucket(
                bucket_id=a,
                term_ids=tuple(ids),
                lambda_max=lam_a,
                executions=1 << (n_buckets - a),
            )
        )
    return CoalescePlan(tuple(buckets), total_time)


def coalesce_error_bound(plan: CoalescePlan) -> float:
    """Order-of-magnitude error bound of the bucketed schedule (constant 1).

    sum_a (S_a^3 + T_{a-1} S_a^2 + T_{a-1}^2 S_a) / (2^(k-a))^2 with
    S_a = N_a Lambda_a t and T_a the running prefix sum of S.
    """
    k = plan.n_buckets
    total = 0.0
    prefix = 0.0
    for a, s_a in enumerate(plan.s_values(), start=1):
        denom = (1 << (k - a)) ** 2
        total += (s_a**3 + prefix * s_a**2 + prefix**2 * s_a) / denom
        prefix += s_a
    return total


def uniform_steps_for_bound(
    h: FermionHamiltonian, total_time: float, error_bound: float
) -> int:
    """Second-order uniform step count whose worst-case bound matches.

    A uniform M-step order-2 schedule has single-bucket bound
    (N Lambda t)^3 / M^2; solve for the smallest M at the given bound.
    """
    if error_bound <= 0:
        raise ValidationError("error bound must be positive")
    s_total = h.n_terms * h.max_term_norm() * total_time
    return max(1, int(math.ceil(math.sqrt(s_total**3 / error_bound))))


def coalesce_rotation_comparison(h: FermionHamiltonian, plan: CoalescePlan) -> dict:
    """Rotation cost of the bucketed schedule versus a uniform plan of equal
    worst-case error bound."""
    from .compiler import term_rotation_count

    bound = coalesce_error_bound(plan)
    coalesced = sum(term_rotation_count(h.terms[tid]) for tid, _ in plan.schedule())
    rotations = [term_rotation_count(t) for t in h.sorted_terms()]
    per_step = 2 * sum(rotations) - (rotations[-1] if rotations else 0)
    steps = uniform_steps_for_bound(h, plan.total_time, bound)
    uniform = steps * per_step
    return {
        "error_bound": bound,
        "coalesced_rotations": coalesced,
        "uniform_steps": steps,
        "uniform_rotations": uniform,
        "savings_factor": uniform / coalesced if coalesced else math.inf,
    }


def plan_report(
    plan: TrotterPlan | CoalescePlan, h: FermionHamiltonian
) -> dict:
    """JSON-ready summary of a plan and its analytic bounds."""
    if isinstance(plan, CoalescePlan):
        return {
            "kind": "coalesced",
            "total_time": plan.total_time,
            "n_buckets": plan.n_buckets,
            "buckets": [
                {
                    "bucket": b.bucket_id,
                    "terms": b.size,
                    "lambda": b.lambda_max,
                    "executions": b.executions,
                }
                for b in plan.buckets
            ],
            "bounds": {"coalesce": coalesce_error_bound(plan)},
        }
    return {
        "kind": "uniform",
        "order": plan.order,
        "dt": plan.dt,
        "steps": plan.steps,
        "strategy": plan.strategy,
        "term_order_hash": plan.order_hash(),
        "bounds": {"neighbor_cubic": ts_error_bound(h, plan.dt)},
    }
