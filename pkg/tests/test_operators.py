"""Tests for Frag / Coag and the Pitman operator pair."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdcoag.errors import DomainError, TruncationError
from pdcoag.numerics import RngStream
from pdcoag.partitions import RESIDUAL, MassPartition, Params, SizeBiasedWeights, Tail, rank_normalize, size_biased_value
from pdcoag.operators import (
    coag,
    coag_det,
    coag_proportion,
    frag,
    frag_det,
    insert_size_biased,
    pitman_coag,
    pitman_coag_det,
    pitman_frag,
    pitman_frag_det,
)
from pdcoag.samplers import pd_sample
from pdcoag.stattest import beta_cdf, ks_one_sample


def _picks(fn, count, seed=21):
    return np.array([fn(RngStream(seed, r)) for r in range(count)])


partitions = st.lists(st.floats(0.01, 1.0), min_size=1, max_size=12).map(lambda w: rank_normalize(np.array(w) / sum(w)))


class TestFragDet:
    """Tests for the deterministic fragmentation step."""

    def test_split_first_atom(self):
        """(0.5, 0.3, 0.2) split at atom 0 by (0.6, 0.4) gives (0.3, 0.3, 0.2, 0.2)."""
        x = MassPartition(np.array([0.5, 0.3, 0.2]))
        y = frag_det(x, 0, SizeBiasedWeights(np.array([0.6, 0.4]), 0.0))
        assert np.allclose(y.atoms, [0.3, 0.3, 0.2, 0.2])

    def test_index_range(self, three_atoms):
        """Out-of-range atom index is rejected."""
        with pytest.raises(DomainError):
            frag_det(three_atoms, 3, SizeBiasedWeights(np.array([1.0]), 0.0))

    def test_splitter_tail_carried(self, three_atoms):
        """A splitter residual with a known law becomes a scaled tail."""
        eta = SizeBiasedWeights(np.array([0.5]), 0.5, alpha=0.5, theta=0.5)
        y = frag_det(three_atoms, 0, eta)
        assert y.residual == pytest.approx(0.25)
        assert y.tails[0].theta == pytest.approx(1.0)
        assert y.tails[0].scale == pytest.approx(0.25)

    def test_opaque_input_stays_opaque(self, opaque_partition):
        """An opaque residual is never given a law."""
        eta = SizeBiasedWeights(np.array([0.5]), 0.5, alpha=0.5, theta=0.5)
        assert frag_det(opaque_partition, 0, eta).opaque

    @settings(max_examples=50, deadline=None)
    @given(partitions, st.lists(st.floats(0.01, 1.0), min_size=1, max_size=6))
    def test_mass_conserved(self, x, split):
        """Fragmentation preserves total mass."""
        s = np.array(split) / sum(split)
        y = frag_det(x, 0, SizeBiasedWeights(s, max(1.0 - s.sum(), 0.0)))
        assert y.stored_mass + y.residual == pytest.approx(1.0, abs=1e-12)
        assert len(y) == len(x) + len(s) - 1


class TestFrag:
    """Tests for Frag_alpha."""

    def test_witness(self, three_atoms, rng):
        """The witness names the split atom and its splitter."""
        y, w = frag(0.5, three_atoms, rng)
        assert w.chosen_index in (0, 1, 2)
        assert w.chosen_mass == three_atoms.atoms[w.chosen_index]
        assert not w.residual_hit
        assert y.stored_mass + y.residual == pytest.approx(1.0)

    def test_reproducible(self, three_atoms):
        """Equal streams give equal outputs."""
        a, _ = frag(0.5, three_atoms, RngStream(3, 3))
        b, _ = frag(0.5, three_atoms, RngStream(3, 3))
        assert a.approx_equal(b, tol=0.0)

    def test_opaque_residual_hit(self):
        """A pick in an opaque residual falls back to a stored atom and is recorded."""
        x = MassPartition(np.array([0.5]), residual=0.5)
        hits = [frag(0.5, x, RngStream(4, r))[1] for r in range(40)]
        assert any(w.residual_hit for w in hits)
        assert all(w.chosen_mass == 0.5 for w in hits)

    def test_tail_hit_materializes(self, tailed_partition):
        """A pick in a tail draws a new atom from the tail law."""
        outcomes = [frag(0.5, tailed_partition, RngStream(6, r))[1] for r in range(200)]
        tail_hits = [w for w in outcomes if w.chosen_index is RESIDUAL]
        assert tail_hits
        assert all(0 < w.chosen_mass <= 0.1 for w in tail_hits)

    def test_atomless_opaque_input(self, rng):
        """All mass in an opaque residual is split as one block and flagged."""
        y, w = frag(0.5, MassPartition(np.empty(0), residual=1.0), rng)
        assert w.residual_hit
        assert w.chosen_mass == 1.0
        assert y.truncated
        assert y.stored_mass + y.residual == pytest.approx(1.0)

    def test_atomless_tailed_input(self):
        """All mass in a described tail opens an atom from the tail law."""
        x = MassPartition(np.empty(0), residual=1.0, tails=(Tail(1.0, 1.0, 0.5, 0.5),))
        for r in range(20):
            y, w = frag(0.5, x, RngStream(7, r))
            assert w.residual_hit
            assert 0 < w.chosen_mass <= 1.0
            assert y.stored_mass + y.residual == pytest.approx(1.0)

    def test_forward_identity(self, grid_params):
        """Frag_alpha maps PD(alpha, theta) to PD(alpha, theta + 1)."""
        p = grid_params

        def pick(r):
            y, _ = frag(p.alpha, pd_sample(p, r, max_atoms=200), r, max_atoms=200)
            return size_biased_value(y, r)

        picks = _picks(pick, 4000)
        assert ks_one_sample(picks, beta_cdf(1 - p.alpha, p.theta + 1 + p.alpha)).passed


class TestCoag:
    """Tests for Coag_{alpha,theta}."""

    def test_det_small_case(self, three_atoms):
        """Indicators (1, 0, 1) merge 0.5 and 0.2."""
        y = coag_det(three_atoms, [1, 0, 1])
        assert np.allclose(y.atoms, [0.7, 0.3])

    def test_det_nothing_selected(self, three_atoms):
        """No selection returns the input."""
        assert coag_det(three_atoms, [0, 0, 0]) is three_atoms

    def test_det_length_mismatch(self, three_atoms):
        """One indicator per atom."""
        with pytest.raises(DomainError):
            coag_det(three_atoms, [1, 0])

    def test_det_tail_fraction(self, tailed_partition):
        """tail_fraction moves that share of the tail into the merged block."""
        y = coag_det(tailed_partition, [1, 0], tail_fraction=0.5)
        assert y.atoms[0] == pytest.approx(0.65)
        assert y.residual == pytest.approx(0.05)
        assert y.tails[0].scale == pytest.approx(0.1)

    @settings(max_examples=50, deadline=None)
    @given(partitions, st.data())
    def test_merge_conserves_mass(self, x, data):
        """Merging keeps total mass and drops len - 1 atoms per merged group."""
        ind = data.draw(st.lists(st.integers(0, 1), min_size=len(x), max_size=len(x)))
        y = coag_det(x, ind)
        assert y.stored_mass == pytest.approx(1.0, abs=1e-12)
        assert len(y) == len(x) - max(sum(ind) - 1, 0)

    @settings(max_examples=50, deadline=None)
    @given(partitions, st.data())
    def test_single_atom_merge_is_identity(self, x, data):
        """Selecting one atom changes nothing."""
        j = data.draw(st.integers(0, len(x) - 1))
        ind = [1 if k == j else 0 for k in range(len(x))]
        assert coag_det(x, ind).approx_equal(x, tol=1e-15)

    def test_proportion(self, rng):
        """B is deterministic 1/(theta + 1) when alpha = 0."""
        assert coag_proportion(Params(0.0, 3.0), rng) == 0.25

    def test_proportion_law(self):
        """B ~ Beta((1 - alpha)/alpha, (theta + alpha)/alpha)."""
        p = Params(0.5, 0.5)
        draws = _picks(lambda r: coag_proportion(p, r), 4000)
        assert ks_one_sample(draws, beta_cdf(1.0, 2.0)).passed

    def test_reverse_identity(self, grid_params):
        """Coag_{alpha,theta} maps PD(alpha, theta + 1) to PD(alpha, theta)."""
        p = grid_params

        def pick(r):
            x, _ = coag(p, pd_sample(p.shifted(1), r, max_atoms=200), r)
            return size_biased_value(x, r)

        picks = _picks(pick, 4000)
        assert ks_one_sample(picks, beta_cdf(1 - p.alpha, p.theta + p.alpha)).passed

    def test_insert_size_biased(self, three_atoms):
        """Scaling by 1 - b and inserting b."""
        y = insert_size_biased(three_atoms, 0.5)
        assert np.allclose(y.atoms, [0.5, 0.25, 0.15, 0.1])
        with pytest.raises(DomainError):
            insert_size_biased(three_atoms, 1.0)


class TestPitman:
    """Tests for the Pitman fragmentation / coagulation pair."""

    def test_frag_det(self):
        """Each atom is split by its own splitter."""
        x = MassPartition(np.array([0.6, 0.4]))
        s = [SizeBiasedWeights(np.array([0.5, 0.5]), 0.0), SizeBiasedWeights(np.array([1.0]), 0.0)]
        assert np.allclose(pitman_frag_det(x, s).atoms, [0.4, 0.3, 0.3])

    def test_frag_domain(self, three_atoms, rng):
        """alpha must be positive and beta below one."""
        with pytest.raises(DomainError):
            pitman_frag(three_atoms, 0.0, 0.5, rng)
        with pytest.raises(DomainError):
            pitman_frag(three_atoms, 0.5, 1.0, rng)

    def test_coag_det_small_case(self, three_atoms):
        """Q = (0.7, 0.3), U = (0.1, 0.8, 0.2) groups atoms 0 and 2."""
        q = SizeBiasedWeights(np.array([0.7, 0.3]), 0.0)
        y = pitman_coag_det(three_atoms, q, [0.1, 0.8, 0.2])
        assert np.allclose(y.atoms, [0.7, 0.3])

    def test_coag_det_uncovered(self, three_atoms):
        """Uniforms beyond the sticks of Q are rejected."""
        q = SizeBiasedWeights(np.array([0.5]), 0.5)
        with pytest.raises(DomainError):
            pitman_coag_det(three_atoms, q, [0.1, 0.8, 0.2])

    def test_coag_overflow(self, three_atoms, rng):
        """Too few sticks raises unless overflow seating is on."""
        with pytest.raises(TruncationError):
            for r in range(50):
                pitman_coag(three_atoms, 0.9, 1.0, RngStream(8, r), max_atoms=1)
        y = pitman_coag(three_atoms, 0.9, 1.0, rng, max_atoms=1, seat_overflow=True)
        assert y.stored_mass == pytest.approx(1.0)

    def test_coag_spreads_residual(self, opaque_partition, rng):
        """Residual dust joins the drawn groups; what is left is a GEM(beta, .) tail."""
        y = pitman_coag(opaque_partition, 0.6, 2.0, rng, max_atoms=2000, seat_overflow=True)
        assert not y.opaque
        assert y.stored_mass > opaque_partition.stored_mass
        assert y.stored_mass + y.residual == pytest.approx(1.0)
        assert all(t.alpha == 0.6 for t in y.tails)

    def test_frag_carries_tails(self, rng):
        """GEM(alpha*beta, .) tails are relabelled to GEM(alpha, .)."""
        x = MassPartition(np.array([0.9]), residual=0.1, tails=(Tail(0.1, 0.1, 0.3, 1.0),))
        y = pitman_frag(x, 0.5, 0.6, rng, eps_trunc=1e-3, max_atoms=50)
        assert not y.opaque
        assert all(t.alpha == 0.5 for t in y.tails)

    def test_frag_identity(self):
        """Splitting PD(0.3, 1) by PD(0.5, -0.3) gives PD(0.5, 1)."""

        def pick(r):
            x = pd_sample(Params(0.3, 1.0), r, eps_trunc=1e-6, max_atoms=500)
            return size_biased_value(pitman_frag(x, 0.5, 0.6, r, eps_trunc=1e-4, max_atoms=64), r)

        assert ks_one_sample(_picks(pick, 3000), beta_cdf(0.5, 1.5)).passed

    def test_coag_identity(self):
        """Grouping PD(0.5, 1) by GEM(0.6, 2) gives PD(0.3, 1)."""

        def pick(r):
            y = pd_sample(Params(0.5, 1.0), r, eps_trunc=1e-6, max_atoms=2000)
            return size_biased_value(pitman_coag(y, 0.6, 2.0, r, max_atoms=2000, seat_overflow=True), r)

        assert ks_one_sample(_picks(pick, 3000), beta_cdf(0.7, 1.3)).passed
