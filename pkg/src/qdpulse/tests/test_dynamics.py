"""Tests for the Lindblad integrator"""

import dataclasses
import math
import os

import numpy as np
import pytest

from qdpulse.core import dynamics
from qdpulse.core.dynamics import (
    CSV_COLUMNS,
    Liouvillian,
    SimConfig,
    Trajectory,
    build_collapse_operators,
    evolve,
    integration_grid,
    integration_segments,
    lindblad_rhs,
    rk4_step,
)
from qdpulse.core.errors import ConfigInvalid, StepUnstable
from qdpulse.core.metrics import population, stationary_value, trajectory_maxima
from qdpulse.core.model import DIM, build_hamiltonian
from qdpulse.core.oracles import closed_system_oracle
from qdpulse.pulses.base import PulseShape, PulseSpec
from qdpulse.pulses.noise import NoiseSpec
from qdpulse.sweep.studies import config_for_point, named_points
from qdpulse.tests.conftest import make_density


def closed_config(params, **kwargs):
    """Gamma0 = 0 run starting from |0110>"""
    pulse = PulseSpec(PulseShape.SQUARE, gamma0=0.0, width_theta=0.2)
    values = dict(params=params, pulse=pulse, initial_state="0110", theta_max=0.6)
    values.update(kwargs)
    return SimConfig(**values)


class TestSimConfig:
    """Test run configuration validation"""

    @pytest.mark.parametrize("field,value", [
        ("dtheta", 0.0),
        ("theta_max", 1e-6),
        ("record_every", 0),
        ("dephasing_rate_ghz", -0.1),
        ("initial_state", "01"),
        ("channels", (5,)),
        ("channels", (1, 1)),
        ("channels", ()),
    ])
    def test_invalid(self, short_config, field, value):
        """Test each malformed field raises ConfigInvalid naming it"""
        cfg = dataclasses.replace(short_config, **{field: value})
        with pytest.raises(ConfigInvalid) as exc_info:
            cfg.validate()
        assert exc_info.value.field.startswith("dynamics.")

    def test_valid(self, short_config):
        """Test the shared fixture passes validation"""
        short_config.validate()


class TestGenerator:
    """Test the matrix and superoperator forms of the generator"""

    def test_superoperator_matches_matrix_form(self, params, ops, h_pulse, rng):
        """Test L vec(rho) equals vec(d rho / d theta) with injection and dephasing"""
        cfg = SimConfig(params=params, pulse=h_pulse, dephasing_rate_ghz=0.5)
        collapse = build_collapse_operators(ops, cfg)
        hamiltonian = build_hamiltonian(params, ops)
        liouvillian = Liouvillian(hamiltonian, collapse)
        rho = make_density(rng)

        for rate in (0.0, 90.0):
            expected = lindblad_rhs(rho, 0.1, hamiltonian, collapse, lambda theta: rate)
            got = liouvillian.apply(rho.reshape(-1), rate).reshape(DIM, DIM)
            assert np.max(np.abs(got - expected)) < 1e-9

    def test_generator_is_traceless(self, params, ops, h_pulse, rng):
        """Test Tr(d rho / d theta) = 0"""
        cfg = SimConfig(params=params, pulse=h_pulse, dephasing_rate_ghz=1.0)
        collapse = build_collapse_operators(ops, cfg)
        hamiltonian = build_hamiltonian(params, ops)
        out = lindblad_rhs(make_density(rng), 0.0, hamiltonian, collapse, lambda theta: 90.0)
        assert abs(np.trace(out)) < 1e-10

    def test_propagator_matches_rk4_step(self, params, ops, h_pulse, rng):
        """Test the constant-rate propagator reproduces one classical RK4 step"""
        cfg = SimConfig(params=params, pulse=h_pulse, dephasing_rate_ghz=0.5)
        liouvillian = Liouvillian(build_hamiltonian(params, ops), build_collapse_operators(ops, cfg))
        vec = make_density(rng).reshape(-1)
        h = 2e-3

        for rate in (0.0, 90.0):
            expected = rk4_step(liouvillian, vec, 0.3, 0.3 + h, lambda theta: rate)
            got = liouvillian.rk4_propagator(h, rate) @ vec
            assert np.max(np.abs(got - expected)) < 1e-12

    def test_propagator_cached_per_step_and_rate(self, params, ops, h_pulse):
        """Test repeated requests reuse the matrix until the rate changes"""
        cfg = SimConfig(params=params, pulse=h_pulse)
        liouvillian = Liouvillian(build_hamiltonian(params, ops), build_collapse_operators(ops, cfg))
        first = liouvillian.rk4_propagator(1e-3, 90.0)
        assert liouvillian.rk4_propagator(1e-3, 90.0) is first
        assert liouvillian.rk4_propagator(1e-3, 0.0) is not first

    def test_collapse_set(self, params, ops, h_pulse):
        """Test default channels inject on dots 1 and 4 and dephasing is opt-in"""
        quiet = build_collapse_operators(ops, SimConfig(params=params, pulse=h_pulse))
        assert len(quiet.injection) == 2
        assert quiet.dephasing == ()
        assert quiet.omega_abs == pytest.approx(1.0)

        noisy = build_collapse_operators(
            ops, SimConfig(params=params, pulse=h_pulse, dephasing_rate_ghz=1.0))
        assert len(noisy.dephasing) == 2
        assert noisy.dephasing_rate == pytest.approx(0.6582119)


class TestIntegrationGrid:
    """Test the fixed-step grid"""

    def test_lands_on_breakpoints(self):
        """Test every breakpoint is a step boundary and the grid ends at theta_max"""
        grid = integration_grid(1.0, 0.03, [0.2199, 0.5])
        ends = [end for _, end in grid]
        assert 0.2199 in ends
        assert 0.5 in ends
        assert grid[0][0] == 0.0
        assert grid[-1][1] == 1.0
        assert max(end - start for start, end in grid) <= 0.03 + 1e-15

    def test_contiguous(self):
        """Test each step starts where the previous one ended"""
        grid = integration_grid(2.0, 0.1, [0.35])
        for (_, prev_end), (start, _) in zip(grid[:-1], grid[1:]):
            assert start == prev_end

    def test_breakpoints_outside_ignored(self):
        """Test breakpoints at or beyond the ends add no segment"""
        assert integration_grid(1.0, 0.25, [0.0, 1.0, 3.0]) == integration_grid(1.0, 0.25)
        assert len(integration_grid(1.0, 0.25)) == 4

    def test_segments_match_grid(self):
        """Test segments split at breakpoints and expand to the step grid"""
        segments = integration_segments(1.0, 0.03, [0.2199, 0.5])
        assert [(start, end) for start, end, _ in segments] == [(0.0, 0.2199), (0.2199, 0.5), (0.5, 1.0)]
        assert [count for _, _, count in segments] == [8, 10, 17]
        assert sum(count for _, _, count in segments) == len(integration_grid(1.0, 0.03, [0.2199, 0.5]))


class TestEvolve:
    """Test trajectories from the integrator"""

    def test_record_layout(self, short_config):
        """Test samples start at 0, end at theta_max and follow record_every"""
        traj = evolve(short_config)
        assert traj.thetas[0] == 0.0
        assert traj.thetas[-1] == short_config.theta_max
        assert np.all(np.diff(traj.thetas) > 0)
        assert traj.gammas[0] == pytest.approx(90.0)
        assert traj.gammas[-1] == 0.0
        assert traj.pulse_end == pytest.approx(short_config.pulse.width_theta)
        assert traj.rhos is None

    def test_density_invariants_under_injection(self, short_config):
        """Test trace, Hermiticity and positivity hold through the pulse"""
        traj = evolve(short_config)
        assert np.max(traj.trace_error) < 1e-9
        assert np.min(traj.min_eigenvalue) > -1e-7
        assert traj.hermiticity_drift < 1e-11

    def test_propagator_path_matches_stages(self, short_config, monkeypatch):
        """Test long constant-rate segments give the same state as per-step stages"""
        fast = evolve(short_config)
        monkeypatch.setattr(dynamics, "PROPAGATOR_MIN_STEPS", 10 ** 9)
        staged = evolve(short_config)
        assert np.max(np.abs(fast.final_rho - staged.final_rho)) < 1e-10
        assert np.allclose(fast.fidelity, staged.fidelity, atol=1e-10)

    def test_oracle_reports_unscaled_deviation(self, params):
        """Test the closed-system oracle carries the uncorrected deviation"""
        result = closed_system_oracle(params, theta_max=math.pi / 2)
        assert "unscaled" in result.detail
        assert set(result.values) == {"deviation", "raw_deviation", "first_peak", "coupling_ratio"}
        assert result.values["raw_deviation"] >= 0.0
        assert result.values["coupling_ratio"] > 0.0

    def test_vacuum_decay(self, params, h_pulse):
        """Test P(1111) = exp(-2 Gamma0 theta / |Omega|) with two injection channels"""
        cfg = SimConfig(params=params, pulse=h_pulse, theta_max=0.01, dtheta=1e-4,
                        record_every=1, store_rhos=True)
        traj = evolve(cfg)
        for theta, rho in zip(traj.thetas, traj.rhos):
            assert population(rho, "1111") == pytest.approx(math.exp(-180.0 * theta), rel=1e-6)

    def test_electron_number_non_decreasing(self, short_config, ops):
        """Test <N> never decreases under injection"""
        cfg = dataclasses.replace(short_config, store_rhos=True, record_every=1)
        traj = evolve(cfg)
        number = [float(np.real(np.trace(rho @ ops.total_number))) for rho in traj.rhos]
        assert np.all(np.diff(number) >= -1e-12)
        assert number[0] == 0.0
        assert number[-1] > 1.999

    def test_closed_system_conserves_energy(self, params, ops):
        """Test Tr(rho H0) is constant without dissipation"""
        hamiltonian = build_hamiltonian(params, ops)
        traj = evolve(closed_config(params, store_rhos=True))
        energies = [float(np.real(np.trace(rho @ hamiltonian))) for rho in traj.rhos]
        assert np.max(np.abs(np.array(energies) - energies[0])) < 1e-3

    def test_closed_system_stays_pure(self, params):
        """Test S_L stays zero without dissipation and grows with dephasing"""
        pure = evolve(closed_config(params, theta_max=1.0))
        assert np.max(pure.linear_entropy) < 1e-5
        dephased = evolve(closed_config(params, theta_max=1.0, dephasing_rate_ghz=1.0))
        assert dephased.linear_entropy[-1] > 0.02

    def test_convergence_order(self, params):
        """Test halving dtheta shrinks the global error about sixteenfold"""
        h = 2 * math.pi * 4e-4

        def final_state(step):
            return evolve(closed_config(params, theta_max=0.5, dtheta=step)).final_rho

        reference = final_state(h / 8)
        coarse = np.max(np.abs(final_state(h) - reference))
        fine = np.max(np.abs(final_state(h / 2) - reference))
        assert 10.0 <= coarse / fine <= 22.0

    def test_unstable_step_raises(self, params):
        """Test a step far beyond the RK4 stability region raises StepUnstable"""
        cfg = closed_config(params, dtheta=0.05, theta_max=1.0, record_every=1)
        with pytest.raises(StepUnstable) as exc_info:
            evolve(cfg)
        assert 0.0 < exc_info.value.theta <= 1.0

    def test_noise_deterministic_in_seed(self, params, h_pulse):
        """Test identical noise seeds give bit-identical trajectories"""
        noise = NoiseSpec(amplitude=30.0, step_theta=0.011, scope="full_evolution", seed=4)
        cfg = SimConfig(params=params, pulse=h_pulse, noise=noise, theta_max=0.4, record_every=5)
        a, b = evolve(cfg), evolve(cfg)
        assert np.array_equal(a.fidelity, b.fidelity)
        assert np.array_equal(a.final_rho, b.final_rho)

        other = evolve(dataclasses.replace(cfg, noise=dataclasses.replace(noise, seed=5)))
        assert not np.array_equal(a.final_rho, other.final_rho)


class TestTrajectoryCsv:
    """Test the trajectory CSV layout"""

    def test_header_and_reload(self, short_config, temp_dir):
        """Test the column order and that values reload exactly"""
        traj = evolve(short_config)
        path = os.path.join(temp_dir, "data.csv")
        traj.to_csv(path)
        with open(path) as f:
            header = f.readline().strip()
        assert header == ",".join(CSV_COLUMNS)

        loaded = Trajectory.from_csv(path)
        assert np.array_equal(loaded.thetas, traj.thetas)
        assert np.array_equal(loaded.fidelity, traj.fidelity)
        assert np.array_equal(loaded.negativity_2x, traj.negativity_2x)
        assert np.isnan(loaded.min_eigenvalue).all()

    def test_bad_header(self, temp_dir):
        """Test a foreign CSV is rejected"""
        path = os.path.join(temp_dir, "other.csv")
        with open(path, "w") as f:
            f.write("a,b\n1,2\n")
        with pytest.raises(ValueError):
            Trajectory.from_csv(path)


@pytest.mark.slow
class TestPhysics:
    """Long runs at the named operating points"""

    @pytest.fixture(scope="class")
    def named_runs(self):
        """Noise-free default-template trajectories keyed by H, M and P"""
        return {label: evolve(config_for_point(label)) for label, _, _ in named_points()}

    def test_closed_system_oracle(self, params):
        """Test unitary evolution follows the two-level fidelity curve"""
        result = closed_system_oracle(params)
        assert result.passed, result.detail
        assert result.values["raw_deviation"] == pytest.approx(0.12, abs=0.01)
        assert result.values["raw_deviation"] > result.values["deviation"]

    def test_h_point_prepares_target(self, named_runs):
        """Test the H point reaches high population and fidelity in the first period"""
        report = trajectory_maxima(named_runs["H"], window=(0.0, 2 * math.pi))
        assert report.max_pop_0110 >= 0.85
        assert report.max_fidelity >= 0.85

    def test_named_point_ordering(self, named_runs):
        """Test maxima rank H above M above P"""
        reports = {label: trajectory_maxima(traj) for label, traj in named_runs.items()}
        assert reports["H"].max_fidelity > reports["M"].max_fidelity > reports["P"].max_fidelity
        assert reports["H"].max_negativity > reports["M"].max_negativity > reports["P"].max_negativity

    def test_density_invariants_on_long_runs(self, named_runs):
        """Test trace, Hermiticity and positivity over the full default horizon"""
        for traj in named_runs.values():
            assert np.max(traj.trace_error) <= 1e-8
            assert traj.hermiticity_drift <= 1e-10
            assert np.min(traj.min_eigenvalue) >= -1e-7

    def test_entropy_settles_after_pulse(self, named_runs):
        """Test S_L is flat after the pulse, H stays in [0.1, 0.3] and P ends more mixed"""
        h, p = named_runs["H"], named_runs["P"]
        after = h.thetas >= h.pulse_end
        assert np.ptp(h.linear_entropy[after]) < 1e-4

        h_entropy = stationary_value(h, "linear_entropy", h.pulse_end)
        p_entropy = stationary_value(p, "linear_entropy", p.pulse_end)
        assert 0.1 <= h_entropy <= 0.3
        assert p_entropy > h_entropy
