"""Tests for the fragmentation / coagulation chains."""

import math

import numpy as np
import pytest

from pdcoag.chains import coag_chain, frag_chain, poissonized_path, round_trip
from pdcoag.errors import DomainError
from pdcoag.numerics import RngStream
from pdcoag.partitions import Params, size_biased_value
from pdcoag.samplers import pd_sample
from pdcoag.stattest import beta_cdf, ks_one_sample


class TestFragChain:
    """Tests for frag_chain."""

    def test_trajectory_length(self, half_params, three_atoms, rng):
        """steps + 1 states and one witness per step."""
        traj = frag_chain(half_params, three_atoms, 4, rng, max_atoms=50)
        assert len(traj.states) == 5
        assert len(traj.witnesses) == 4
        assert traj.states[0] is three_atoms

    def test_atoms_grow(self, half_params, three_atoms, rng):
        """Each step replaces one atom by at least one piece."""
        traj = frag_chain(half_params, three_atoms, 3, rng, max_atoms=50)
        for before, after in zip(traj.states, traj.states[1:]):
            assert len(after) >= len(before)
            assert after.stored_mass + after.residual == pytest.approx(1.0)

    def test_keep_final_only(self, half_params, three_atoms):
        """keep_all=False keeps just the last state, which matches the full run."""
        full = frag_chain(half_params, three_atoms, 3, RngStream(2, 0), max_atoms=50)
        last = frag_chain(half_params, three_atoms, 3, RngStream(2, 0), max_atoms=50, keep_all=False)
        assert len(last.states) == 1
        assert last.final.approx_equal(full.final, tol=0.0)

    def test_zero_steps(self, half_params, three_atoms, rng):
        """No steps returns the start."""
        assert frag_chain(half_params, three_atoms, 0, rng).final is three_atoms

    def test_negative_steps(self, half_params, three_atoms, rng):
        """Negative step counts are rejected."""
        with pytest.raises(DomainError):
            frag_chain(half_params, three_atoms, -1, rng)

    def test_csv_has_step_column(self, half_params, three_atoms, rng):
        """Trajectory CSV is indexed by step."""
        text = frag_chain(half_params, three_atoms, 2, rng, max_atoms=5).to_csv()
        lines = text.splitlines()
        assert lines[0].startswith("step,w1,")
        assert lines[0].endswith(",residual")
        assert [line.split(",")[0] for line in lines[1:]] == ["0", "1", "2"]

    def test_to_dict(self, half_params, three_atoms, rng):
        """JSON form carries states and witnesses."""
        data = frag_chain(half_params, three_atoms, 2, rng, max_atoms=5).to_dict()
        assert data["steps"] == 2
        assert len(data["states"]) == 3
        assert len(data["witnesses"]) == 2

    def test_marginal_after_steps(self):
        """Two steps from PD(0.5, 0.5) give PD(0.5, 2.5)."""
        p = Params(0.5, 0.5)

        def pick(r):
            x = frag_chain(p, pd_sample(p, r, max_atoms=200), 2, r, max_atoms=200, keep_all=False).final
            return size_biased_value(x, r)

        picks = np.array([pick(RngStream(31, r)) for r in range(3000)])
        assert ks_one_sample(picks, beta_cdf(0.5, 3.0)).passed


class TestPoissonPath:
    """Tests for poissonized_path."""

    def test_state_at(self, half_params, three_atoms):
        """Y(t) changes exactly at the jump times."""
        path = poissonized_path(half_params, three_atoms, 2.0, 3.0, RngStream(5, 0), max_atoms=20)
        assert len(path.trajectory.states) == len(path.jump_times) + 1
        assert path.state_at(0.0) is three_atoms
        for k, t in enumerate(path.jump_times, start=1):
            assert path.state_at(t) is path.trajectory.states[k]
        assert path.state_at(3.0) is path.trajectory.final

    def test_jump_times_increase(self, half_params, three_atoms, rng):
        """Jump times are increasing and inside [0, t_max]."""
        path = poissonized_path(half_params, three_atoms, 5.0, 2.0, rng, max_atoms=10)
        times = np.array(path.jump_times)
        assert np.all(np.diff(times) > 0)
        assert np.all((times > 0) & (times <= 2.0))

    def test_time_domain(self, half_params, three_atoms, rng):
        """t outside [0, t_max] is rejected."""
        path = poissonized_path(half_params, three_atoms, 1.0, 1.0, rng, max_atoms=10)
        with pytest.raises(DomainError):
            path.state_at(1.5)

    def test_rate_domain(self, half_params, three_atoms, rng):
        """Rate and horizon must be positive."""
        with pytest.raises(DomainError):
            poissonized_path(half_params, three_atoms, 0.0, 1.0, rng)

    def test_jump_count_mean(self, half_params, three_atoms):
        """N(t_max) has mean rate * t_max."""
        counts = [
            len(poissonized_path(half_params, three_atoms, 1.0, 2.0, RngStream(17, r), max_atoms=5).jump_times)
            for r in range(2000)
        ]
        assert np.mean(counts) == pytest.approx(2.0, abs=0.15)

    def test_marginal_is_poisson_mixture(self):
        """From PD(alpha, theta), Y(t) is PD(alpha, theta + N) with N ~ Poisson(rate * t)."""
        p = Params(0.5, 0.5)
        mean = 2.0

        def pick(r):
            path = poissonized_path(p, pd_sample(p, r, max_atoms=200), 1.0, mean, r, max_atoms=200)
            return size_biased_value(path.state_at(mean), r)

        def mixture_cdf(x):
            weights = [math.exp(-mean) * mean**k / math.factorial(k) for k in range(30)]
            return sum(w * beta_cdf(0.5, 1.0 + k)(x) for k, w in enumerate(weights))

        picks = np.array([pick(RngStream(19, r)) for r in range(3000)])
        assert ks_one_sample(picks, mixture_cdf).passed


class TestCoagChain:
    """Tests for coag_chain and round_trip."""

    def test_levels(self, half_params, three_atoms, rng):
        """states[i] is level i; the last state is the input."""
        traj = coag_chain(half_params, three_atoms, 3, rng)
        assert len(traj.states) == 4
        assert len(traj.witnesses) == 3
        assert traj.states[-1] is three_atoms
        for lower, upper in zip(traj.states, traj.states[1:]):
            assert len(lower) <= len(upper)

    def test_steps_domain(self, half_params, three_atoms, rng):
        """At least one level must be walked."""
        with pytest.raises(DomainError):
            coag_chain(half_params, three_atoms, 0, rng)

    def test_alpha_zero_proportions(self, three_atoms, rng):
        """With alpha = 0 the level-i proportion is 1/(theta + i + 1)."""
        traj = coag_chain(Params(0.0, 1.0), three_atoms, 2, rng)
        assert [w.b for w in traj.witnesses] == [0.5, 1.0 / 3.0]

    def test_round_trip_zero(self, half_params, three_atoms, rng):
        """k = 0 returns the input."""
        assert round_trip(half_params, three_atoms, 0, rng) is three_atoms

    def test_round_trip_law(self):
        """Frag^2 then Coag^2 returns PD(0.3, 1) in law."""
        p = Params(0.3, 1.0)

        def pick(r):
            return size_biased_value(round_trip(p, pd_sample(p, r, max_atoms=200), 2, r, max_atoms=200), r)

        picks = np.array([pick(RngStream(37, r)) for r in range(3000)])
        assert ks_one_sample(picks, beta_cdf(0.7, 1.3)).passed

    def test_two_step_law(self):
        """Two coagulation levels from PD(alpha, theta + 2) reach PD(alpha, theta)."""
        p = Params(0.5, 0.5)

        def pick(r):
            y_end = pd_sample(p.shifted(2), r, max_atoms=200)
            return size_biased_value(coag_chain(p, y_end, 2, r, keep_all=False).final, r)

        picks = np.array([pick(RngStream(41, r)) for r in range(3000)])
        assert ks_one_sample(picks, beta_cdf(0.5, 1.0)).passed
