"""Tests for entanglement and state-quality functionals"""

import math

import numpy as np
import pytest

from qdpulse.core.dynamics import Trajectory
from qdpulse.core.errors import EmptyWindow, NotPositive
from qdpulse.core.metrics import (
    TargetState,
    analytic_fidelity,
    closed_system_state,
    fidelity,
    linear_entropy,
    negativity,
    negativity_2x,
    period_maxima,
    population,
    sample_metrics,
    stationary_value,
    trajectory_maxima,
    uhlmann_fidelity,
)
from qdpulse.core.model import DIM, basis_state, projector
from qdpulse.tests.conftest import make_density, make_unitary


def pure(vec):
    return np.outer(vec, np.conj(vec))


def local_unitary(rng):
    return np.kron(make_unitary(rng, 4), make_unitary(rng, 4))


def synthetic_trajectory(thetas, **series):
    n = len(thetas)
    zeros = np.zeros(n)
    columns = {
        "gammas": zeros, "fidelity": zeros, "negativity": zeros, "linear_entropy": zeros,
        "pop_0110": zeros, "trace_error": zeros, "min_eigenvalue": zeros,
    }
    columns.update({k: np.asarray(v, dtype=float) for k, v in series.items()})
    return Trajectory(thetas=np.asarray(thetas, dtype=float), **columns)


class TestFidelity:
    """Test fidelity to the Bell-type target"""

    def test_target_is_one(self):
        """Test F = 1 for the target itself"""
        target = TargetState()
        assert fidelity(target.density(), target) == pytest.approx(1.0, abs=1e-14)

    def test_orthogonal_basis_state(self):
        """Test F = 0 for |1111>"""
        assert fidelity(projector("1111"), TargetState()) == 0.0

    def test_initial_state_half(self):
        """Test F(|0110>) = sqrt(1/2)"""
        assert fidelity(projector("0110"), TargetState()) == pytest.approx(math.sqrt(0.5))

    def test_phase_matters(self):
        """Test the phi = -pi/2 state has zero overlap with phi = pi/2"""
        other = TargetState(phi=-math.pi / 2).density()
        assert fidelity(other, TargetState()) == pytest.approx(0.0, abs=1e-8)

    def test_matches_uhlmann_for_pure_target(self, rng):
        """Test the pure-target shortcut equals the general Uhlmann fidelity"""
        rho = make_density(rng, rank=3)
        target = TargetState()
        assert fidelity(rho, target) == pytest.approx(
            uhlmann_fidelity(rho, target.density()), abs=1e-8)

    def test_uhlmann_identical_states(self, rng):
        """Test F(rho, rho) = 1"""
        rho = make_density(rng)
        assert uhlmann_fidelity(rho, rho) == pytest.approx(1.0, abs=1e-9)

    def test_uhlmann_rejects_negative(self):
        """Test a non-positive input raises NotPositive"""
        bad = np.diag([1.1] + [0.0] * (DIM - 2) + [-0.1])
        with pytest.raises(NotPositive):
            uhlmann_fidelity(bad, projector("0110"))

    def test_uhlmann_rejects_negative_second_argument(self):
        """Test the second argument is checked even when the first is pure"""
        bad = np.diag([1.1] + [0.0] * (DIM - 2) + [-0.1])
        with pytest.raises(NotPositive):
            uhlmann_fidelity(projector("0110"), bad)

    def test_uhlmann_tolerates_roundoff(self):
        """Test eigenvalues just above the floor are accepted"""
        sigma = np.diag([1.0 + 5e-8] + [0.0] * (DIM - 2) + [-5e-8])
        assert uhlmann_fidelity(projector("0000"), sigma) == pytest.approx(1.0, abs=1e-6)

    def test_analytic_curve(self):
        """Test F(theta) = sqrt((1 + sin 2 theta) / 2) hits 1 at pi/4"""
        assert analytic_fidelity(math.pi / 4) == pytest.approx(1.0)
        assert analytic_fidelity(0.0) == pytest.approx(math.sqrt(0.5))
        assert analytic_fidelity(3 * math.pi / 4) == pytest.approx(0.0, abs=1e-12)

    def test_closed_system_state_matches_curve(self):
        """Test fidelity of the ideal state equals the analytic curve"""
        for theta in np.linspace(0.0, math.pi, 9):
            rho = pure(closed_system_state(theta))
            assert fidelity(rho, TargetState()) == pytest.approx(analytic_fidelity(theta), abs=1e-12)


class TestNegativity:
    """Test the partial-transpose entanglement measure"""

    def test_bell_state(self):
        """Test N = 0.5 and N_2x = 1 for the target state"""
        rho = TargetState().density()
        assert negativity(rho) == pytest.approx(0.5, abs=1e-12)
        assert negativity_2x(rho) == pytest.approx(1.0, abs=1e-12)

    def test_product_states_zero(self):
        """Test basis states are unentangled"""
        for label in ("0110", "1111", "1001", "0000"):
            assert negativity(projector(label)) == pytest.approx(0.0, abs=1e-14)

    def test_maximally_mixed_zero(self):
        """Test the maximally mixed state has N = 0"""
        assert negativity(np.eye(DIM) / DIM) == pytest.approx(0.0, abs=1e-14)

    def test_choice_of_subsystem(self, random_density):
        """Test transposing either qubit gives the same negativity"""
        assert negativity(random_density) == pytest.approx(
            negativity(random_density, transpose_second=True), abs=1e-10)

    def test_local_unitary_invariance(self, rng):
        """Test N(U_A x U_B rho (U_A x U_B)^dagger) = N(rho)"""
        rho = make_density(rng, rank=2)
        u = local_unitary(rng)
        rotated = u @ rho @ u.conj().T
        assert negativity(rotated) == pytest.approx(negativity(rho), abs=1e-10)

    def test_bounds(self, rng):
        """Test 0 <= N <= 1.5 for random 4x4 states"""
        for _ in range(10):
            value = negativity(make_density(rng, rank=1))
            assert 0.0 <= value <= 1.5 + 1e-12


class TestScalarMetrics:
    """Test entropy and populations"""

    def test_linear_entropy_pure_and_mixed(self, rng):
        """Test S_L = 0 for pure states and 1 - 1/16 for the mixed state"""
        assert linear_entropy(projector("0110")) == pytest.approx(0.0, abs=1e-15)
        assert linear_entropy(TargetState().density()) == pytest.approx(0.0, abs=1e-12)
        assert linear_entropy(np.eye(DIM) / DIM) == pytest.approx(1.0 - 1.0 / DIM)
        assert 0.0 <= linear_entropy(make_density(rng)) <= 1.0 - 1.0 / DIM + 1e-12

    def test_population(self):
        """Test populations read the diagonal"""
        rho = pure((basis_state("0110") + basis_state("1001")) / math.sqrt(2))
        assert population(rho, "0110") == pytest.approx(0.5)
        assert population(rho, "1111") == 0.0

    def test_sample_metrics(self):
        """Test the bundled metrics for the target state"""
        m = sample_metrics(TargetState().density(), TargetState())
        assert m.fidelity == pytest.approx(1.0)
        assert m.negativity == pytest.approx(0.5)
        assert m.pop_0110 == pytest.approx(0.5)
        assert m.trace_error == pytest.approx(0.0, abs=1e-15)
        assert m.min_eigenvalue == pytest.approx(0.0, abs=1e-12)


class TestTrajectoryMaxima:
    """Test window maxima over recorded trajectories"""

    def test_maxima_and_locations(self):
        """Test each maximum is reported with its theta"""
        traj = synthetic_trajectory(
            [0.0, 0.5, 1.0, 1.5, 2.0],
            pop_0110=[1.0, 0.4, 0.9, 0.2, 0.1],
            fidelity=[0.7, 0.8, 0.95, 0.6, 0.5],
            negativity=[0.0, 0.3, 0.49, 0.2, 0.1],
        )
        report = trajectory_maxima(traj, window=(0.25, 2.0))
        assert report.max_pop_0110 == 0.9
        assert report.theta_max_pop_0110 == 1.0
        assert report.max_fidelity == 0.95
        assert report.max_negativity == 0.49
        assert report.theta_max_negativity == 1.0
        assert report.window == (0.5, 2.0)

    def test_full_trajectory(self):
        """Test no window means all samples"""
        traj = synthetic_trajectory([0.0, 1.0], pop_0110=[1.0, 0.3])
        assert trajectory_maxima(traj).max_pop_0110 == 1.0

    def test_empty_window(self):
        """Test a window with no samples raises EmptyWindow"""
        traj = synthetic_trajectory([0.0, 1.0])
        with pytest.raises(EmptyWindow):
            trajectory_maxima(traj, window=(2.0, 3.0))

    def test_period_maxima(self):
        """Test one maximum per complete window"""
        thetas = np.linspace(0.0, 3.0, 31)
        traj = synthetic_trajectory(thetas, negativity=np.sin(thetas) ** 2)
        maxima = period_maxima(traj, "negativity", 0.0, 1.0)
        assert len(maxima) == 3
        assert maxima[1] == pytest.approx(1.0, abs=1e-2)

    def test_stationary_value(self):
        """Test the mean after the start theta"""
        traj = synthetic_trajectory([0.0, 1.0, 2.0, 3.0], linear_entropy=[0.0, 0.1, 0.2, 0.3])
        assert stationary_value(traj, "linear_entropy", 1.5) == pytest.approx(0.25)
        with pytest.raises(EmptyWindow):
            stationary_value(traj, "linear_entropy", 5.0)
