import math

import numpy as np
import pytest
import scipy.linalg

from trotterbench import dense, planner
from trotterbench.errors import ValidationError
from trotterbench.hamiltonian import FermionHamiltonian, make_term
from trotterbench.planner import (
    CoalescePlan,
    TrotterPlan,
    coalesce_error_bound,
    coalesce_rotation_comparison,
    pair_bound,
    plan_coalesced,
    plan_step,
    ts_error_bound,
    ts_error_bound_inductive,
    uniform_steps_for_bound,
)
from trotterbench.synth import SynthConfig, generate_molecule


def three_term_hamiltonian():
    terms = (
        make_term((0, 0), 1.0),
        make_term((0, 1), 0.5),
        make_term((1, 2), 0.25),
    )
    return FermionHamiltonian(3, 1, terms)


class TestPlanStep:
    def test_validation(self):
        h = three_term_hamiltonian()
        with pytest.raises(ValidationError):
            plan_step(h, -0.1)
        with pytest.raises(ValidationError):
            plan_step(h, 0.1, ordering_strategy="zigzag")
        with pytest.raises(ValidationError):
            plan_step(h, 0.1, order=3)

    def test_single_term_plan_is_exact(self):
        h = FermionHamiltonian(2, 1, (make_term((0, 1), 1.0),))
        plan = plan_step(h, 0.2, order=2)
        assert plan.exact_single_term
        assert plan.schedule() == [(0, 0.2)]

    def test_order_two_palindrome_with_merged_pivot(self):
        h = three_term_hamiltonian()
        plan = plan_step(h, 0.1, order=2)
        schedule = plan.schedule()
        # forward halves, one full pivot application, reversed halves
        assert schedule == [
            (0, 0.05),
            (1, 0.05),
            (2, 0.1),
            (1, 0.05),
            (0, 0.05),
        ]
        assert schedule == schedule[::-1]

    def test_order_one_durations(self):
        h = three_term_hamiltonian()
        plan = plan_step(h, 0.1, order=1)
        assert plan.schedule() == [(0, 0.1), (1, 0.1), (2, 0.1)]

    def test_total_time(self):
        h = three_term_hamiltonian()
        plan = plan_step(h, 0.25, steps=8)
        assert plan.total_time == pytest.approx(2.0)

    def test_magnitude_ordering(self):
        h = three_term_hamiltonian()
        plan = plan_step(h, 0.1, ordering_strategy="by-magnitude-descending")
        coeffs = [abs(h.terms[tid].coefficient) for tid in plan.term_order]
        assert coeffs == sorted(coeffs, reverse=True)

    def test_seeded_random_is_deterministic(self):
        h = three_term_hamiltonian()
        one = plan_step(h, 0.1, ordering_strategy="seeded-random", seed=9)
        two = plan_step(h, 0.1, ordering_strategy="seeded-random", seed=9)
        assert one.term_order == two.term_order

    def test_commuting_terms_any_order_is_exact(self):
        terms = (make_term((0, 0), 0.7), make_term((1, 1), -0.3),
                 make_term((0, 1, 1, 0), 0.4))
        h = FermionHamiltonian(2, 1, terms)
        for order in (1, 2):
            u_plan = dense.trotter_unitary(plan_step(h, 0.9, order=order), h)
            u_exact = dense.exact_exponential(h, 0.9)
            assert dense.spectral_norm(u_plan.matrix - u_exact.matrix) < 1e-10


class TestPairBound:
    def test_commuting_pair_is_zero(self):
        a = np.diag([1.0, 2.0, 3.0, 4.0]).astype(complex)
        b = np.diag([0.5, -1.0, 2.0, 0.0]).astype(complex)
        assert pair_bound(a, b) == pytest.approx(0.0, abs=1e-14)

    def test_disjoint_qubit_supports(self):
        sx = np.array([[0, 1], [1, 0]], dtype=complex)
        sz = np.array([[1, 0], [0, -1]], dtype=complex)
        a = 0.8 * np.kron(np.eye(2), sx)
        b = -1.3 * np.kron(sz, np.eye(2))
        assert pair_bound(a, b) == pytest.approx(0.0, abs=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            pair_bound(np.eye(2), np.eye(4))

    def test_theorem_on_random_pairs(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            a = (a + a.conj().T) / 2
            b = (b + b.conj().T) / 2
            split = (
                scipy.linalg.expm(-0.5j * a)
                @ scipy.linalg.expm(-1j * b)
                @ scipy.linalg.expm(-0.5j * a)
            )
            exact = scipy.linalg.expm(-1j * (a + b))
            measured = np.linalg.norm(split - exact, 2)
            assert measured <= pair_bound(a, b) + 1e-12


class TestNeighborCubicBound:
    def test_single_term_vanishes(self):
        h = FermionHamiltonian(2, 1, (make_term((0, 1), 1.0),))
        assert ts_error_bound(h, 0.1) == 0.0
        assert ts_error_bound_inductive(h, 0.1) == 0.0

    def test_cubic_time_step_scaling(self, small_synthetic):
        dts = np.logspace(-3, -1, 5)
        bounds = [ts_error_bound(small_synthetic, dt) for dt in dts]
        slope = np.polyfit(np.log(dts), np.log(bounds), 1)[0]
        assert slope == pytest.approx(3.0, abs=0.05)

    def test_inductive_bound_holds(self, small_synthetic):
        h = small_synthetic
        dt = 0.02
        plan = plan_step(h, dt, order=2)
        bound = ts_error_bound_inductive(
            h, dt, term_order=plan.term_order, n_electrons=h.n_electrons
        )
        u_ts = dense.trotter_unitary(plan, h, n_electrons=h.n_electrons)
        u_exact = dense.exact_exponential(h, dt, n_electrons=h.n_electrons)
        measured = dense.spectral_norm(u_ts.matrix - u_exact.matrix)
        assert measured <= bound


class TestCoalescing:
    def test_single_bucket_reduces_to_uniform_step(self, small_synthetic):
        h = small_synthetic
        t = 0.02
        plan = plan_coalesced(h, t, n_buckets=1)
        u_coal = dense.trotter_unitary(plan, h, n_electrons=h.n_electrons)
        u_unif = dense.trotter_unitary(
            plan_step(h, t, order=2), h, n_electrons=h.n_electrons
        )
        assert dense.spectral_norm(u_coal.matrix - u_unif.matrix) < 1e-10

    def test_two_bucket_unrolled_structure(self):
        terms = (
            make_term((0, 0), 4.0),
            make_term((0, 1), 3.0),
            make_term((1, 2), 0.5),
            make_term((2, 2), 0.4),
        )
        h = FermionHamiltonian(3, 1, terms)
        plan = plan_coalesced(h, 0.3, n_buckets=2)
        big = plan.buckets[0].term_ids
        small = plan.buckets[1].term_ids
        assert set(big) == {0, 1} and set(small) == {2, 3}
        w2 = [(tid, 0.3 / 2) for tid in small]
        w1 = [(tid, 0.3 / 4) for tid in big]
        v1 = w1 + w1[::-1]
        expected = w2 + v1 + v1 + w2[::-1]
        assert plan.schedule() == expected

    def test_two_bucket_matrix_identity(self):
        # schedule must equal the literal recursion product W2 (W1 W1')^2 W2'
        terms = (
            make_term((0, 0), 4.0),
            make_term((0, 1), 3.0),
            make_term((1, 2), 0.5),
            make_term((2, 2), 0.4),
        )
        h = FermionHamiltonian(3, 1, terms)
        t = 0.3
        plan = plan_coalesced(h, t, n_buckets=2)
        basis = dense.FockBasis(3)
        mats = []
        for term in h.terms:
            m = np.zeros((basis.dim, basis.dim), dtype=complex)
            dense.TermAction.build(term, basis).add_to_matrix(m)
            mats.append(m)

        def product(ops):
            out = np.eye(basis.dim, dtype=complex)
            for tid, duration in ops:
                out = scipy.linalg.expm(-1j * duration * mats[tid]) @ out
            return out

        w1 = product([(tid, t / 4) for tid in plan.buckets[0].term_ids])
        w1p = product([(tid, t / 4) for tid in plan.buckets[0].term_ids][::-1])
        w2 = product([(tid, t / 2) for tid in plan.buckets[1].term_ids])
        w2p = product([(tid, t / 2) for tid in plan.buckets[1].term_ids][::-1])
        v1 = w1 @ w1p
        literal = w2 @ v1 @ v1 @ w2p
        u_sched = dense.trotter_unitary(plan, h)
        assert dense.spectral_norm(u_sched.matrix - literal) < 1e-12

    def test_bucket_magnitudes_decrease(self, small_synthetic):
        plan = plan_coalesced(small_synthetic, 0.1, n_buckets=4)
        lambdas = [b.lambda_max for b in plan.buckets if b.size]
        assert lambdas == sorted(lambdas, reverse=True)
        assert sum(b.size for b in plan.buckets) == small_synthetic.n_terms

    def test_bound_single_bucket_is_cubic(self):
        terms = (make_term((0, 0), 1.0), make_term((0, 1), 1.0))
        h = FermionHamiltonian(2, 1, terms)
        plan = plan_coalesced(h, 0.5, n_buckets=1)
        s1 = 2 * 1.0 * 0.5
        assert coalesce_error_bound(plan) == pytest.approx(s1**3)

    def test_bound_zero_for_zero_hamiltonian(self):
        terms = (make_term((0, 0), 0.0), make_term((0, 1), 0.0))
        h = FermionHamiltonian(2, 1, terms)
        plan = plan_coalesced(h, 0.5, n_buckets=3)
        assert coalesce_error_bound(plan) == 0.0

    def test_empty_hamiltonian_rejected(self):
        with pytest.raises(ValidationError):
            plan_coalesced(FermionHamiltonian(2, 1, ()), 1.0)

    def test_unitarity_of_coalesced_product(self, small_synthetic):
        plan = plan_coalesced(small_synthetic, 0.02, n_buckets=3)
        u = dense.trotter_unitary(plan, small_synthetic, n_electrons=4)
        u.check_unitary(1e-10)

    def test_rotation_savings_on_spread_coefficients(self):
        h = generate_molecule(SynthConfig(8, 2.0, 0.25, 7))
        norms = [t.norm_bound() for t in h.terms]
        assert max(norms) / min(norms) > 1e3  # spans three decades
        plan = plan_coalesced(h, 0.05, n_buckets=4)
        comparison = coalesce_rotation_comparison(h, plan)
        assert comparison["coalesced_rotations"] < comparison["uniform_rotations"]

    def test_uniform_steps_for_bound(self):
        h = three_term_hamiltonian()
        steps = uniform_steps_for_bound(h, 1.0, error_bound=(3 * 1.0 * 1.0) ** 3 / 16)
        assert steps == 4


class TestPlanReport:
    def test_uniform_report_keys(self, small_synthetic):
        report = planner.plan_report(plan_step(small_synthetic, 0.1), small_synthetic)
        assert report["kind"] == "uniform"
        assert "term_order_hash" in report
        assert report["bounds"]["neighbor_cubic"] > 0

    def test_coalesced_report_keys(self, small_synthetic):
        plan = plan_coalesced(small_synthetic, 0.1, n_buckets=3)
        report = planner.plan_report(plan, small_synthetic)
        assert report["kind"] == "coalesced"
        assert len(report["buckets"]) == 3
