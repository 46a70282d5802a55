import math

import numpy as np
import pytest
import scipy.linalg

from trotterbench import dense
from trotterbench.dense import (
    DenseOperator,
    FockBasis,
    assemble_dense,
    error_curve,
    estimate_energy,
    exact_exponential,
    exact_ground_energy,
    gershgorin_shift,
    ground_energy_from_unitary,
    ground_state,
    required_steps,
    spectral_norm,
    trotter_unitary,
)
from trotterbench.errors import BranchCutError, ResourceCapError, ValidationError
from trotterbench.hamiltonian import FermionHamiltonian, full_term_census, make_term
from trotterbench.planner import plan_coalesced, plan_step
from trotterbench.synth import SynthConfig, generate_molecule


class TestBasis:
    def test_full_dimension(self):
        assert FockBasis(5).dim == 32

    def test_sector_dimension(self):
        assert FockBasis(8, 4).dim == math.comb(8, 4)

    def test_cap_enforced(self, monkeypatch):
        monkeypatch.setenv(dense.DENSE_CAP_ENV_VAR, "10")
        with pytest.raises(ResourceCapError, match="counting-only"):
            FockBasis(12)

    def test_cap_override(self, monkeypatch):
        monkeypatch.setenv(dense.DENSE_CAP_ENV_VAR, "17")
        assert dense.dense_cap() == 17

    def test_hartree_fock_index(self):
        basis = FockBasis(4, 2)
        assert basis.states[basis.hartree_fock_index()] == 0b0011


class TestAssembly:
    def test_single_diagonal_term(self):
        h = FermionHamiltonian(1, 1, (make_term((0, 0), 1.0),))
        op = assemble_dense(h)
        assert np.allclose(op.matrix, np.diag([0.0, 1.0]))

    def test_hopping_element(self):
        h = FermionHamiltonian(2, 1, (make_term((0, 1), 1.0),))
        op = assemble_dense(h)
        # |01> (orbital 0 occupied) couples to |10> with amplitude 1
        assert op.matrix[2, 1] == pytest.approx(1.0)
        assert op.matrix[1, 2] == pytest.approx(1.0)
        assert np.abs(op.matrix).sum() == pytest.approx(2.0)

    def test_energy_shift_enters_diagonal(self):
        h = FermionHamiltonian(1, 1, (), energy_shift=2.5)
        assert np.allclose(assemble_dense(h).matrix, 2.5 * np.eye(2))

    def test_commutes_with_number_operator(self, small_synthetic):
        op = assemble_dense(small_synthetic)
        occupations = np.array(
            [bin(s).count("1") for s in range(op.dim)], dtype=float
        )
        number = np.diag(occupations)
        comm = op.matrix @ number - number @ op.matrix
        assert np.abs(comm).max() < 1e-12
        assert op.hermiticity_defect() < 1e-12


class TestGroundState:
    def test_zero_hamiltonian(self):
        h = FermionHamiltonian(4, 2, ())
        assert exact_ground_energy(h) == pytest.approx(0.0)

    def test_diagonal_filling(self):
        values = [-3.0, -1.0, 0.5, 2.0]
        terms = tuple(make_term((p, p), v) for p, v in enumerate(values))
        h = FermionHamiltonian(4, 2, terms)
        assert exact_ground_energy(h, 2) == pytest.approx(-4.0)
        assert exact_ground_energy(h, 3) == pytest.approx(-3.5)

    def test_empty_sector(self):
        h = FermionHamiltonian(2, 1, ())
        with pytest.raises(ValidationError):
            ground_state(h, 5)

    def test_sector_matches_full_spectrum(self, small_synthetic):
        h = small_synthetic
        e_sector = exact_ground_energy(h, h.n_electrons)
        full = assemble_dense(h)
        evals = scipy.linalg.eigvalsh(full.matrix)
        # the sector ground energy is an eigenvalue of the full operator
        assert np.min(np.abs(evals - e_sector)) < 1e-9


class TestTrotterUnitary:
    def test_unitarity(self, small_synthetic):
        plan = plan_step(small_synthetic, 0.05, order=2)
        u = trotter_unitary(plan, small_synthetic, n_electrons=4)
        u.check_unitary(1e-10)

    def test_order_two_beats_order_one(self):
        h = generate_molecule(SynthConfig(6, 2.0, 0.25, 3))
        exact = exact_exponential(h, 0.05)
        err = {}
        for order in (1, 2):
            u = trotter_unitary(plan_step(h, 0.05, order=order), h)
            err[order] = spectral_norm(u.matrix - exact.matrix)
        assert err[2] < err[1]

    def test_steps_power(self):
        h = FermionHamiltonian(2, 1, (make_term((0, 1), 0.8),))
        single = trotter_unitary(plan_step(h, 0.1), h)
        multi = trotter_unitary(plan_step(h, 0.1, steps=5), h)
        assert np.allclose(np.linalg.matrix_power(single.matrix, 5), multi.matrix)

    def test_coalesced_plan_supported(self, small_synthetic):
        plan = plan_coalesced(small_synthetic, 0.01, n_buckets=2)
        u = trotter_unitary(plan, small_synthetic, n_electrons=4)
        u.check_unitary(1e-10)


class TestEnergyExtraction:
    def test_exact_round_trip(self, small_synthetic):
        h = small_synthetic
        dt = 0.01
        u = exact_exponential(h, dt, n_electrons=h.n_electrons)
        e0 = exact_ground_energy(h, h.n_electrons)
        est = ground_energy_from_unitary(u, h, dt, shift=-e0 + 1.0)
        assert est.energy == pytest.approx(e0, abs=1e-9)

    def test_unit_shifted_eigenvalue_returns_minus_shift(self):
        # a shifted eigenvalue exactly at 1 reads out energy = -shift
        h = FermionHamiltonian(2, 1, ())
        basis = FockBasis(2, 1)
        shift, dt = 3.0, 0.1
        u = DenseOperator(
            np.exp(1j * dt * shift) * np.eye(basis.dim, dtype=complex), basis
        )
        est = ground_energy_from_unitary(u, h, dt=dt, shift=shift)
        assert est.eigenvalue == pytest.approx(1.0)
        assert est.energy == pytest.approx(-shift)
        assert est.branch_margin > 0.1

    def test_branch_cut_rejected(self):
        h = FermionHamiltonian(2, 1, ())
        basis = FockBasis(2, 1)
        u = DenseOperator(-np.eye(basis.dim, dtype=complex), basis)
        with pytest.raises(BranchCutError):
            ground_energy_from_unitary(u, h, dt=0.1, shift=0.0)

    def test_gershgorin_shift_guarantees_positive_spectrum(self, small_synthetic):
        h = small_synthetic
        shift = gershgorin_shift(h)
        assert exact_ground_energy(h, h.n_electrons) + shift > 0

    def test_eigenvalue_magnitude_validated(self):
        h = FermionHamiltonian(2, 1, ())
        basis = FockBasis(2, 1)
        u = DenseOperator(0.5 * np.eye(basis.dim, dtype=complex), basis)
        with pytest.raises(ValidationError):
            ground_energy_from_unitary(u, h, dt=0.1, shift=0.0)

    def test_energy_error_inequality(self, small_synthetic):
        h = small_synthetic
        dt = 0.01
        plan = plan_step(h, dt, order=2)
        est = estimate_energy(h, plan)
        e0 = exact_ground_energy(h, h.n_electrons)
        u_ts = trotter_unitary(plan, h, n_electrons=h.n_electrons)
        u_ex = exact_exponential(h, dt, n_electrons=h.n_electrons)
        gap = spectral_norm(u_ts.matrix - u_ex.matrix)
        assert abs(est.energy - e0) <= gap / dt

    def test_richardson_direction(self, small_synthetic):
        h = small_synthetic
        e0 = exact_ground_energy(h, h.n_electrons)
        est1 = estimate_energy(h, plan_step(h, 0.04, order=2))
        est2 = estimate_energy(h, plan_step(h, 0.02, order=2))
        assert abs(est2.energy - e0) < abs(est1.energy - e0)
        assert (est1.energy - e0) * (est2.energy - e0) > 0  # same side


class TestErrorCurve:
    def test_quadratic_fit(self, small_synthetic):
        h = small_synthetic
        curve = error_curve(
            h,
            lambda dt: plan_step(h, dt, order=2),
            [0.2, 0.1, 0.05, 0.02, 0.01],
            n_electrons=h.n_electrons,
        )
        assert curve.fitted()
        assert curve.exponent == pytest.approx(2.0, abs=0.2)
        assert curve.r_squared > 0.99

    def test_commuting_hamiltonian_skips_fit(self):
        terms = (make_term((0, 0), -1.0), make_term((1, 1), -0.5),
                 make_term((0, 1, 1, 0), 0.3))
        h = FermionHamiltonian(2, 2, terms)
        curve = error_curve(h, lambda dt: plan_step(h, dt, order=2), [0.4, 0.1, 0.03, 0.01])
        assert not curve.fitted()
        assert all(p.error < 1e-10 for p in curve.included())

    def test_needs_two_steps(self, small_synthetic):
        with pytest.raises(ValidationError):
            error_curve(small_synthetic, lambda dt: plan_step(small_synthetic, dt), [0.1])

    def test_points_sorted_descending(self, small_synthetic):
        h = small_synthetic
        curve = error_curve(
            h, lambda dt: plan_step(h, dt, order=2), [0.01, 0.1, 0.05],
            n_electrons=h.n_electrons,
        )
        dts = [p.dt for p in curve.points]
        assert dts == sorted(dts, reverse=True)


class TestRequiredSteps:
    def _curve(self, prefactor, exponent=2.0):
        points = [dense.ErrorCurvePoint(dt, prefactor * dt**exponent, None)
                  for dt in (0.1, 0.05, 0.02, 0.01)]
        curve = dense.ErrorCurve(points, exact_energy=0.0, exponent=exponent,
                                 prefactor=prefactor, r_squared=1.0)
        return curve

    def test_formula_arithmetic(self):
        # error 1e-3 at dt 0.1 with quadratic law and target 1e-3 gives 10
        curve = self._curve(prefactor=0.1)
        assert required_steps(curve, 1e-3, dt_ref=0.1) == 10

    def test_prefactor_identity(self):
        curve = self._curve(prefactor=2.5)
        assert required_steps(curve, 1e-3) == math.ceil(math.sqrt(2.5 / 1e-3))

    def test_warns_outside_quadratic_band(self):
        curve = self._curve(prefactor=1.0, exponent=1.2)
        with pytest.warns(RuntimeWarning, match="far from quadratic"):
            required_steps(curve, 1e-3)

    def test_unfitted_curve_rejected(self):
        curve = dense.ErrorCurve([], exact_energy=0.0)
        with pytest.raises(ValidationError):
            required_steps(curve, 1e-3)


class TestCaps:
    def test_matrix_cap(self, monkeypatch):
        monkeypatch.setenv(dense.DENSE_CAP_ENV_VAR, "16")
        h = FermionHamiltonian(14, 7, ())
        with pytest.raises(ResourceCapError):
            assemble_dense(h)  # full space 2^14 exceeds the matrix-dimension cap
