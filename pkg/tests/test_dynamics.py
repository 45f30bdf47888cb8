import numpy as np
import pytest

from models.chain_models import ModelParams, Schedule, build_couplings
from models.errors import ConvergenceError, ParameterError
from models.matrix_models import build_bdg_hamiltonian
from dynamics.ed_oracle import ed_oracle_evolve, ed_spectrum, kink_operator, spin_hamiltonian
from dynamics.gamma_evolution import gamma_excess_energy
from dynamics.observables import (
    energy_expectation,
    evolve_observables,
    excess_energy,
    final_observables,
    kink_number,
    sample_steps,
)
from dynamics.propagation import DriveSpec, exponential_step, propagate, step_unitary


class TestDriveSpec:
    """Test cases for drive specifications"""

    def test_default_step(self, small_params):
        """Test dt = min(0.01, T/1000) and an integer step count"""
        assert DriveSpec("bare", small_params, Schedule(5.0)).step == pytest.approx(0.005)
        spec = DriveSpec("bare", small_params, Schedule(50.0))
        assert spec.n_steps == 5000
        assert spec.step == pytest.approx(0.01)

    def test_step_divides_total_time(self, small_params):
        """Test a requested dt is shrunk to fit T exactly"""
        spec = DriveSpec("bare", small_params, Schedule(1.0), dt=0.3)
        assert spec.n_steps == 4
        assert spec.step * spec.n_steps == pytest.approx(1.0)

    @pytest.mark.parametrize("kwargs", [
        {'dt': 2.0},
        {'dt': -0.1},
        {'stepper': 'rk4'},
        {'coefficient_grid': -1},
    ])
    def test_invalid_spec(self, small_params, kwargs):
        """Test invalid steps, steppers and grids are rejected"""
        with pytest.raises(ParameterError):
            DriveSpec("bare", small_params, Schedule(1.0), **kwargs)

    def test_unknown_mode(self, small_params):
        """Test unknown cd_mode names are rejected"""
        with pytest.raises(ParameterError):
            DriveSpec("adiabatic", small_params, Schedule(1.0))

    def test_refined_halves_step(self, small_params):
        """Test refinement doubles the step count"""
        spec = DriveSpec("bare", small_params, Schedule(2.0), dt=0.01)
        assert spec.refined().n_steps == 2 * spec.n_steps


class TestPropagation:
    """Test cases for BdG propagation"""

    def test_zero_steps_is_identity(self, small_params):
        """Test stopping at t=0 leaves the identity"""
        v = propagate(DriveSpec("var1", small_params, Schedule(1.0)), t_stop=0.0)
        assert v.steps == 0
        np.testing.assert_array_equal(v.matrix, np.eye(2 * small_params.L))

    @pytest.mark.parametrize("mode", ["bare", "var1", "var2", "qbcd", "exact_agp"])
    def test_unitary_with_particle_hole_structure(self, medium_params, mode):
        """Test every drive keeps V unitary and particle-hole symmetric"""
        v = propagate(DriveSpec(mode, medium_params, Schedule(1.0)))
        assert v.steps == 1000
        assert v.unitarity_error() < 1e-10
        assert v.particle_hole_error() < 1e-10

    def test_observer_sees_every_step(self, small_params):
        """Test the observer is called once per step with increasing times"""
        seen = []
        propagate(
            DriveSpec("bare", small_params, Schedule(1.0), dt=0.1),
            observer=lambda k, t, v: seen.append((k, t)),
        )
        assert [k for k, _ in seen] == list(range(1, 11))
        assert seen[-1][1] == pytest.approx(1.0)

    def test_partial_propagation(self, small_params):
        """Test t_stop halts the drive and rejects times beyond T"""
        spec = DriveSpec("bare", small_params, Schedule(1.0), dt=0.1)
        assert propagate(spec, t_stop=0.5).steps == 5
        with pytest.raises(ParameterError):
            propagate(spec, t_stop=1.5)

    def test_frozen_field_is_stationary(self, medium_params):
        """Test the paramagnetic vacuum is stationary under H[0]"""
        h0 = build_bdg_hamiltonian(medium_params, 0.0).full
        couplings = build_couplings(medium_params)
        v = np.eye(2 * medium_params.L, dtype=complex)
        for k in range(200):
            v = step_unitary(lambda t: h0, k * 0.05, 0.05, "magnus4") @ v
            assert kink_number(v, couplings) == pytest.approx(medium_params.L / 2, abs=1e-8)
            assert energy_expectation(v, medium_params, 0.0) == pytest.approx(-medium_params.L, abs=1e-8)

    def test_exponential_step_unitary(self, medium_params):
        """Test a single exponential step is unitary"""
        u = exponential_step(build_bdg_hamiltonian(medium_params, 0.5).full, 0.3)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=1e-12)

    @pytest.mark.slow
    def test_unitarity_over_long_drive(self, small_params):
        """Test unitarity drift stays below 1e-8 over 1e5 steps"""
        v = propagate(DriveSpec("var2", small_params, Schedule(1000.0)))
        assert v.steps == 100000
        assert v.unitarity_error() < 1e-8


class TestObservables:
    """Test cases for kink number and energy contractions"""

    def test_initial_values(self, params):
        """Test the paramagnet has L/2 kinks and energy -L"""
        identity = np.eye(2 * params.L)
        assert kink_number(identity, build_couplings(params)) == pytest.approx(params.L / 2)
        assert energy_expectation(identity, params, 0.0) == pytest.approx(-params.L)

    def test_sample_steps(self):
        """Test sample indices are sorted, unique and end at the last step"""
        steps = sample_steps(1000, 50)
        assert len(steps) == 50
        assert steps[-1] == 1000
        assert np.all(np.diff(steps) > 0)
        assert list(sample_steps(3, 50)) == [1, 2, 3]

    def test_series_frame(self, small_params):
        """Test the observable series converts to a table"""
        series = evolve_observables(DriveSpec("bare", small_params, Schedule(1.0)), n_samples=10)
        frame = series.to_frame()
        assert list(frame.columns) == ['t', 'lambda', 'kinks', 'energy']
        assert len(frame) == 10
        assert frame['t'].iloc[-1] == pytest.approx(1.0)
        assert frame['lambda'].iloc[-1] == pytest.approx(1.0)

    def test_excess_energy_nonnegative(self, medium_params):
        """Test final energies never fall below the ground state"""
        for mode in ("bare", "var1", "var2"):
            result = final_observables(DriveSpec(mode, medium_params, Schedule(2.0)))
            assert result.excess_energy > -1e-10
            assert result.kinks >= 1.0 - 1e-10

    def test_slow_drive_is_nearly_adiabatic(self, small_params):
        """Test a long ramp on a short chain ends close to the ground state"""
        result = final_observables(DriveSpec("bare", small_params, Schedule(200.0), stepper="magnus4"))
        assert result.excess_energy < 1e-2
        assert result.kinks == pytest.approx(1.0, abs=1e-2)

    def test_convergence_check_passes(self, medium_params):
        """Test halving dt leaves fourth-order results unchanged"""
        spec = DriveSpec("bare", medium_params, Schedule(2.0), stepper="magnus4")
        result = final_observables(spec, check_convergence=True)
        assert result.steps == spec.n_steps

    def test_convergence_check_fails_for_coarse_steps(self, medium_params):
        """Test a handful of steps is flagged"""
        spec = DriveSpec("bare", medium_params, Schedule(10.0), dt=2.0)
        with pytest.raises(ConvergenceError):
            final_observables(spec, check_convergence=True)

    @pytest.mark.parametrize("mode", ["bare", "var1", "var2", "qbcd"])
    def test_gamma_orbitals_agree_with_bdg(self, medium_params, mode):
        """Test the number-conserving Gamma oracle reproduces the BdG excess energy"""
        spec = DriveSpec(mode, medium_params, Schedule(1.5))
        v = propagate(spec)
        assert gamma_excess_energy(spec) == pytest.approx(excess_energy(v, medium_params), abs=1e-8)

    def test_exact_agp_tracks_ground_state(self):
        """Test the exact gauge potential gives perfect tracking at T=1, L=17"""
        params = ModelParams.from_length(17)
        result = final_observables(DriveSpec("exact_agp", params, Schedule(1.0), stepper="magnus4"))
        assert result.excess_energy < 1e-6
        assert abs(result.kinks - 1.0) < 1e-6

    def test_fast_drive_hierarchy(self, params):
        """Test bare >= var1 >= var2 in final kinks for a fast ramp"""
        kinks = {
            mode: final_observables(DriveSpec(mode, params, Schedule(1.0))).kinks
            for mode in ("bare", "var1", "var2")
        }
        assert kinks["bare"] >= kinks["var1"] >= kinks["var2"]

    @pytest.mark.slow
    def test_bare_convergence_reference_drive(self):
        """Test dt-halving self-convergence at L=17, T=10"""
        params = ModelParams.from_length(17)
        final_observables(DriveSpec("bare", params, Schedule(10.0), stepper="magnus4"), check_convergence=True)

    @pytest.mark.slow
    def test_qbcd_lowers_plateau_energy(self):
        """Test the edge-state term at least halves the excess energy on the bare kink plateau"""
        params = ModelParams.from_length(41)
        bare = final_observables(DriveSpec("bare", params, Schedule(400.0)))
        assisted = final_observables(DriveSpec("qbcd", params, Schedule(400.0)))
        assert 1.0 - 1e-9 <= bare.kinks <= 1.05
        assert assisted.kinks < bare.kinks
        assert assisted.excess_energy / bare.excess_energy < 0.5


class TestBarePlateau:
    """Test cases for the single-kink plateau of slow bare drives"""

    @pytest.mark.slow
    @pytest.mark.parametrize("L, T, dt", [(41, 800.0, 0.01), (101, 800.0, 0.02)])
    def test_one_kink_left(self, L, T, dt):
        """Test the bulk anneals while one frustrated bond survives the bottleneck"""
        result = final_observables(DriveSpec("bare", ModelParams.from_length(L), Schedule(T), dt=dt))
        assert 1.0 - 1e-9 <= result.kinks <= 1.05

    @pytest.mark.slow
    @pytest.mark.parametrize("L, T, expected", [(17, 200.0, 0.2133), (41, 800.0, 0.2335)])
    def test_plateau_excess_energy(self, L, T, expected):
        """Test the plateau excess energy sits near half of 2(J - J')"""
        params = ModelParams.from_length(L)
        result = final_observables(DriveSpec("bare", params, Schedule(T)))
        assert result.kinks == pytest.approx(1.0, abs=1e-3)
        assert result.excess_energy == pytest.approx(expected, rel=0.03)
        assert result.excess_energy < 2 * (params.J - params.Jp)


class TestSpinOracle:
    """Test cases for the 2^L state-vector oracle"""

    @pytest.mark.parametrize("L", [5, 7])
    @pytest.mark.parametrize("mode", ["bare", "var1"])
    def test_matches_bdg_series(self, L, mode):
        """Test spin and BdG observable series agree at every sample time"""
        params = ModelParams.from_length(L)
        schedule = Schedule(5.0)
        spin = ed_oracle_evolve(params, schedule, mode, n_samples=50)
        bdg = evolve_observables(DriveSpec(mode, params, schedule), n_samples=50)
        assert len(spin.times) == 50
        np.testing.assert_allclose(spin.times, bdg.times, atol=1e-12)
        np.testing.assert_allclose(spin.kinks, bdg.kinks, atol=1e-6)
        np.testing.assert_allclose(spin.energies, bdg.energies, atol=1e-6)

    def test_matches_bdg_second_order_magnus(self):
        """Test agreement for var2 with the fourth-order stepper"""
        params = ModelParams.from_length(7)
        schedule = Schedule(2.0)
        spin = ed_oracle_evolve(params, schedule, "var2", dt=0.02, n_samples=10, stepper="magnus4")
        bdg = evolve_observables(DriveSpec("var2", params, schedule, dt=0.02, stepper="magnus4"), n_samples=10)
        np.testing.assert_allclose(spin.kinks, bdg.kinks, atol=1e-6)
        np.testing.assert_allclose(spin.energies, bdg.energies, atol=1e-6)

    @pytest.mark.parametrize("lam", [0.0, 0.3, 0.538, 0.8, 1.0])
    def test_spectrum_chiral(self, lam):
        """Test the parity-extended spectrum is symmetric about zero"""
        values = ed_spectrum(ModelParams.from_length(7), lam)
        np.testing.assert_allclose(values, -values[::-1], atol=1e-10)

    def test_kink_operator_on_ferromagnet(self, small_params):
        """Test the all-up state has exactly one frustrated bond"""
        up = np.zeros(2 ** small_params.L)
        up[0] = 1.0
        assert up @ (kink_operator(small_params) @ up) == pytest.approx(1.0)
        energy = up @ (spin_hamiltonian(small_params, 1.0) @ up)
        assert energy.real == pytest.approx(-(small_params.L - 3) - 2 * small_params.J + small_params.Jp)

    def test_rejects_long_chains(self):
        """Test chains beyond nine sites are refused"""
        with pytest.raises(ParameterError):
            ed_oracle_evolve(ModelParams.from_length(11), Schedule(1.0))

    def test_rejects_unsupported_modes(self, small_params):
        """Test only local variational modes run in the spin picture"""
        with pytest.raises(ParameterError):
            ed_oracle_evolve(small_params, Schedule(1.0), "qbcd")
