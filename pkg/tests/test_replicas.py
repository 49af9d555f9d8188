"""Tests for replica-parallel execution."""

from functools import partial

import pytest

from pdcoag.errors import DomainError
from pdcoag.numerics import RngStream, sample_beta
from pdcoag.replicas import run_replicas

draw = partial(sample_beta, 1.0, 2.0)


class TestRunReplicas:
    """Tests for run_replicas."""

    def test_replica_r_uses_stream_r(self):
        """Replica r is fn(RngStream(seed, base + r))."""
        results = run_replicas(draw, 5, seed=3, base=10)
        assert results == [draw(RngStream(3, 10 + r)) for r in range(5)]

    def test_independent_of_jobs(self):
        """Worker count does not change the results or their order."""
        serial = run_replicas(draw, 23, seed=7)
        parallel = run_replicas(draw, 23, seed=7, jobs=3)
        assert parallel == serial

    def test_empty(self):
        """Zero replicas give an empty list."""
        assert run_replicas(draw, 0, seed=1) == []

    def test_domain(self):
        """Negative counts and non-positive job numbers are rejected."""
        with pytest.raises(DomainError):
            run_replicas(draw, -1, seed=1)
        with pytest.raises(DomainError):
            run_replicas(draw, 3, seed=1, jobs=0)
