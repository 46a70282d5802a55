import numpy as np
import pytest
import scipy.linalg

from trotterbench import compiler, dense
from trotterbench.compiler import (
    Circuit,
    Gate,
    GateKind,
    circuit_for_step,
    compile_term,
    count_scaling_study,
    loglog_fit,
    metrics_for_step,
    term_gate_counts,
    term_total_gates,
)
from trotterbench.errors import DegenerateFitError, ValidationError
from trotterbench.hamiltonian import (
    FermionHamiltonian,
    FermionTerm,
    TermKind,
    full_term_census,
    make_term,
)


def term_matrix(term, n):
    basis = dense.FockBasis(n)
    mat = np.zeros((basis.dim, basis.dim), dtype=complex)
    dense.TermAction.build(term, basis).add_to_matrix(mat)
    return mat


def random_term(rng, n):
    max_style = 5 if n >= 4 else (4 if n >= 3 else 3)
    style = rng.integers(0, max_style)
    if style == 0:
        p = int(rng.integers(n))
        return make_term((p, p), float(rng.normal()))
    if style == 1:
        p, q = (int(x) for x in rng.choice(n, 2, replace=False))
        return make_term((p, q), float(rng.normal()))
    if style == 2:
        p, q = sorted(int(x) for x in rng.choice(n, 2, replace=False))
        return make_term((p, q, q, p), float(rng.normal()))
    if style == 3:
        p, q, r = (int(x) for x in rng.choice(n, 3, replace=False))
        return make_term((p, q, q, r), float(rng.normal()))
    p, q, r, s = (int(x) for x in rng.choice(n, 4, replace=False))
    return make_term((p, q, r, s), float(rng.normal()))


class TestGateModel:
    def test_two_qubit_targets_distinct(self):
        with pytest.raises(ValidationError):
            Gate(GateKind.CNOT, (1, 1))

    def test_rotation_needs_angle(self):
        with pytest.raises(ValidationError):
            Gate(GateKind.RZ, (0,))

    def test_targets_inside_register(self):
        circuit = Circuit(2)
        with pytest.raises(ValidationError):
            circuit.add(GateKind.H, 5)

    def test_bsm_has_no_matrix(self):
        circuit = Circuit(2, [Gate(GateKind.BSM, (0, 1))])
        with pytest.raises(ValidationError):
            circuit.to_matrix()

    def test_export_lines(self):
        circuit = Circuit(3)
        circuit.add(GateKind.CNOT, 0, 2)
        circuit.add(GateKind.RZ, 2, angle=0.5)
        lines = circuit.export_lines()
        assert lines[0] == "CNOT 0 2"
        assert lines[1].startswith("Rz 2 5.")


class TestTableExamples:
    def test_diagonal_term_single_rotation(self):
        circuit = compile_term(make_term((2, 2), 0.7), 0.1)
        assert circuit.total_gates() == 1
        assert circuit.gates[0].kind is GateKind.CRZ
        assert circuit.gates[0].targets == (2,)

    def test_hopping_total(self):
        term = make_term((1, 3), 0.5)
        assert term_total_gates(term) == 10 + 4 * (3 - 1)
        circuit = compile_term(term, 0.1)
        counts = circuit.counts()
        assert counts["basis"] == 8
        assert counts["CNOT"] == 8
        assert counts["CRz"] == 2

    def test_four_index_adjacent_total(self):
        term = make_term((0, 1, 2, 3), 0.2)
        assert term_total_gates(term) == 8 * 9 + 8 * 2 * (1 - 0 + 3 - 2 + 1)
        assert term_total_gates(term) == 120

    def test_parallel_hopping_total(self):
        term = make_term((0, 1), 0.5)
        assert term_total_gates(term, "parallel") == 18

    def test_three_index_totals(self):
        ordered = make_term((1, 4, 4, 6), 0.1)
        unordered = make_term((4, 1, 1, 6), 0.1)
        assert term_total_gates(ordered) == 12 + 4 * (6 - 1)
        assert term_total_gates(unordered) == 16 + 4 * (6 - 4)
        assert term_total_gates(ordered, "parallel") == 24
        assert term_total_gates(unordered, "parallel") == 24


class TestFormulaMaterializationAgreement:
    @pytest.mark.parametrize("mode", ["sequential", "parallel"])
    def test_random_tuples(self, mode):
        rng = np.random.default_rng(202)
        for _ in range(200):
            n = int(rng.integers(4, 11))
            term = random_term(rng, n)
            circuit = compile_term(term, 0.05, mode=mode, n_qubits=n)
            formula = term_gate_counts(term, mode)
            counts = circuit.counts()
            for column in ("basis", "CNOT", "CRz", "BSM", "GlobalRz"):
                assert counts[column] == formula[column], (term, mode, column)


class TestUnitaryCorrectness:
    def test_compiled_circuits_match_exponentials(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            n = int(rng.integers(2, 7))
            term = random_term(rng, n)
            dt = float(rng.uniform(0.02, 0.9))
            circuit = compile_term(term, dt, n_qubits=n)
            exact = scipy.linalg.expm(-1j * dt * term_matrix(term, n))
            assert np.linalg.norm(circuit.to_matrix() - exact, 2) < 1e-8

    def test_adjointness_via_negated_coefficient(self):
        # flipping the coefficient sign compiles the exact inverse circuit
        rng = np.random.default_rng(8)
        for _ in range(15):
            n = int(rng.integers(2, 7))
            term = random_term(rng, n)
            inverse = FermionTerm(term.kind, term.indices, -term.coefficient)
            dt = 0.3
            product = compile_term(inverse, dt, n_qubits=n).to_matrix() @ compile_term(
                term, dt, n_qubits=n
            ).to_matrix()
            assert np.linalg.norm(product - np.eye(2**n), 2) < 1e-8

    def test_step_circuit_matches_plan_unitary(self, small_synthetic):
        terms = tuple(t for t in small_synthetic.terms if max(t.indices) < 5)[:25]
        h = FermionHamiltonian(5, 2, terms, energy_shift=0.2)
        from trotterbench.planner import plan_step

        circuit = circuit_for_step(h, 0.05, order=2)
        u_plan = dense.trotter_unitary(plan_step(h, 0.05, order=2), h)
        assert np.linalg.norm(circuit.to_matrix() - u_plan.matrix, 2) < 1e-8


class TestMetrics:
    def test_empty_hamiltonian(self):
        metrics = metrics_for_step(FermionHamiltonian(4, 2, ()))
        assert metrics.rotations == 0
        assert metrics.sequential_total == 0
        assert metrics.parallel_total == 0

    def test_counts_sum_matches_total(self, small_synthetic):
        metrics = metrics_for_step(small_synthetic, order=1, mode="sequential")
        assert sum(metrics.counts_by_kind.values()) == metrics.sequential_total
        par = metrics_for_step(small_synthetic, order=1, mode="parallel")
        assert sum(par.counts_by_kind.values()) == par.parallel_total

    def test_rotations_mode_invariant(self, small_synthetic):
        seq = metrics_for_step(small_synthetic, order=1, mode="sequential")
        par = metrics_for_step(small_synthetic, order=1, mode="parallel")
        assert seq.rotations == par.rotations

    def test_global_rotation_counted_once(self):
        terms = (make_term((0, 1, 1, 0), 0.3), make_term((1, 2, 2, 1), 0.4))
        h = FermionHamiltonian(3, 1, terms)
        metrics = metrics_for_step(h, order=1)
        assert metrics.counts_by_kind["GlobalRz"] == 1
        assert metrics.sequential_total == 2 * 5 + 1

    def test_order_two_doubles_except_pivot(self):
        terms = (make_term((0, 0), 1.0), make_term((0, 1), 1.0))
        h = FermionHamiltonian(2, 1, terms)
        one = metrics_for_step(h, order=1)
        two = metrics_for_step(h, order=2)
        pivot_total = term_total_gates(h.sorted_terms()[-1])
        assert two.sequential_total == 2 * one.sequential_total - pivot_total

    def test_census_ratio_near_three(self):
        h = FermionHamiltonian(14, 7, tuple(full_term_census(14)))
        metrics = metrics_for_step(h, order=1)
        ratio = metrics.sequential_total / metrics.parallel_total
        assert 1.5 <= ratio <= 4.5
        assert metrics.rotations == metrics_for_step(h, order=1, mode="parallel").rotations

    def test_dt_validation(self, small_synthetic):
        with pytest.raises(ValidationError):
            metrics_for_step(small_synthetic, dt=-0.1)


class TestScalingStudy:
    def test_exponents(self):
        study = count_scaling_study([8, 12, 16, 20, 24])
        assert study.sequential.exponent == pytest.approx(5.0, abs=0.3)
        assert study.rotations.exponent == pytest.approx(4.0, abs=0.3)
        assert study.parallel.exponent == pytest.approx(4.0, abs=0.3)

    def test_degenerate_input(self):
        with pytest.raises(DegenerateFitError):
            count_scaling_study([8, 8])

    def test_planted_power_law(self):
        fit = loglog_fit([1, 2, 4, 8], [3 * x**1.2 for x in (1, 2, 4, 8)])
        assert fit.exponent == pytest.approx(1.2, abs=1e-9)
        assert fit.prefactor == pytest.approx(3.0, rel=1e-9)
