"""Tests for domination, front maintenance, and dominated-region geometry."""

import numpy as np
import pytest

from ewhi.pareto import (
    BoundingBox,
    DimensionMismatchError,
    ParetoState,
    box_complement_volume_2d,
    dominates,
    in_dominated_region,
    update_front,
)


def reference_is_dominated(front, Y):
    """Independent O(n*k) domination test used as an oracle."""
    front = np.atleast_2d(front)
    Y = np.atleast_2d(Y)
    out = np.zeros(Y.shape[0], dtype=bool)
    for i, y in enumerate(Y):
        for f in front:
            if np.all(f <= y) and np.any(f < y):
                out[i] = True
                break
    return out


class TestDominates:
    def test_basic_examples(self):
        assert dominates([1.0, 2.0], [2.0, 3.0])
        assert dominates([1.0, 2.0], [1.0, 3.0])
        assert not dominates([1.0, 2.0], [1.0, 2.0])
        assert not dominates([1.0, 3.0], [2.0, 2.0])
        assert not dominates([2.0, 3.0], [1.0, 2.0])

    def test_irreflexive_and_antisymmetric(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            y = rng.normal(size=3)
            z = rng.normal(size=3)
            assert not dominates(y, y)
            assert not (dominates(y, z) and dominates(z, y))

    def test_transitive(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            y = rng.normal(size=2)
            z = y + rng.uniform(0.0, 1.0, size=2) + 1e-6
            w = z + rng.uniform(0.0, 1.0, size=2) + 1e-6
            assert dominates(y, z) and dominates(z, w)
            assert dominates(y, w)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            dominates([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            dominates([np.nan, 0.0], [1.0, 1.0])


class TestUpdateFront:
    def test_incremental_build(self):
        s = ParetoState.empty(2)
        s = update_front(s, [0.5, 0.5])
        assert s.front.tolist() == [[0.5, 0.5]]
        s = update_front(s, [0.6, 0.6])  # dominated, front unchanged
        assert s.front.tolist() == [[0.5, 0.5]]
        s = update_front(s, [0.2, 0.8])  # incomparable, joins
        assert s.front.tolist() == [[0.2, 0.8], [0.5, 0.5]]
        s = update_front(s, [0.3, 0.4])  # dominates (0.5, 0.5) only, replaces it
        assert s.front.tolist() == [[0.2, 0.8], [0.3, 0.4]]
        assert s.all_observed.shape == (4, 2)

    def test_duplicates_kept_in_history_not_front(self):
        s = ParetoState.empty(2)
        s = update_front(s, [0.5, 0.5])
        s = update_front(s, [0.5, 0.5])
        assert s.front.shape == (1, 2)
        assert s.all_observed.shape == (2, 2)

    def test_order_independence(self):
        rng = np.random.default_rng(11)
        Y = rng.uniform(size=(40, 2))
        base = ParetoState.from_observations(Y)
        for _ in range(20):
            perm = rng.permutation(40)
            other = ParetoState.from_observations(Y[perm])
            np.testing.assert_array_equal(base.front, other.front)

    def test_three_objectives(self):
        s = ParetoState.from_observations(
            [[1.0, 2.0, 3.0], [2.0, 1.0, 3.0], [2.0, 2.0, 4.0], [1.5, 1.5, 2.0]]
        )
        got = {tuple(row) for row in s.front}
        assert got == {(1.0, 2.0, 3.0), (2.0, 1.0, 3.0), (1.5, 1.5, 2.0)}


class TestDominatedRegion:
    def test_examples(self):
        s = ParetoState.from_observations([[0.2, 0.8], [0.5, 0.5], [0.8, 0.2]])
        assert in_dominated_region(s, [0.6, 0.6])
        assert not in_dominated_region(s, [0.1, 0.1])
        assert not in_dominated_region(s, [0.5, 0.5])  # front member itself
        assert in_dominated_region(s, [0.5, 0.7])
        assert not in_dominated_region(s, [0.4, 0.6])

    def test_empty_front_dominates_nothing(self):
        s = ParetoState.empty(2)
        assert not in_dominated_region(s, [0.0, 0.0])
        assert not s.is_dominated(np.zeros((5, 2))).any()

    def test_matches_reference_on_random_queries(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            k = rng.integers(1, 15)
            front_src = rng.uniform(size=(k, 2))
            s = ParetoState.from_observations(front_src)
            Y = rng.uniform(-0.2, 1.2, size=(300, 2))
            np.testing.assert_array_equal(
                s.is_dominated(Y), reference_is_dominated(s.front, Y)
            )

    def test_matches_reference_with_shared_coordinates(self):
        # adversarial ties: queries share coordinates with front members
        rng = np.random.default_rng(22)
        s = ParetoState.from_observations([[0.2, 0.8], [0.5, 0.5], [0.8, 0.2]])
        grid = np.array([0.1, 0.2, 0.5, 0.8, 0.9])
        Y = np.array([[u, v] for u in grid for v in grid])
        np.testing.assert_array_equal(
            s.is_dominated(Y), reference_is_dominated(s.front, Y)
        )
        Y = rng.choice(grid, size=(500, 2))
        np.testing.assert_array_equal(
            s.is_dominated(Y), reference_is_dominated(s.front, Y)
        )

    def test_three_objective_path(self):
        s = ParetoState.from_observations([[1.0, 2.0, 3.0], [2.0, 1.0, 3.0]])
        assert in_dominated_region(s, [1.5, 2.5, 3.5])
        assert not in_dominated_region(s, [0.5, 0.5, 0.5])
        assert not in_dominated_region(s, [1.0, 2.0, 3.0])


class TestBoxComplementVolume:
    def test_known_values(self):
        box = BoundingBox([0.0, 0.0], [1.0, 1.0])
        assert box_complement_volume_2d(ParetoState.empty(2), box) == 1.0
        s = ParetoState.from_observations([[0.5, 0.5]])
        assert box_complement_volume_2d(s, box) == pytest.approx(0.75)
        s = ParetoState.from_observations([[0.2, 0.8], [0.5, 0.5], [0.8, 0.2]])
        assert box_complement_volume_2d(s, box) == pytest.approx(0.63)

    def test_front_outside_box_clipped(self):
        box = BoundingBox([0.0, 0.0], [1.0, 1.0])
        # point dominating the whole box: complement is empty
        s = ParetoState.from_observations([[-1.0, -1.0]])
        assert box_complement_volume_2d(s, box) == 0.0
        # point above the box dominates nothing inside
        s = ParetoState.from_observations([[0.5, 2.0]])
        assert box_complement_volume_2d(s, box) == pytest.approx(1.0)
        # point left of the box trims everything above its ordinate
        s = ParetoState.from_observations([[-3.0, 0.4]])
        assert box_complement_volume_2d(s, box) == pytest.approx(0.4)

    def test_monte_carlo_agreement(self):
        rng = np.random.default_rng(33)
        box = BoundingBox([-0.5, -0.5], [1.5, 1.5])
        for _ in range(5):
            k = rng.integers(1, 10)
            s = ParetoState.from_observations(rng.uniform(size=(k, 2)))
            exact = box_complement_volume_2d(s, box)
            n = 200_000
            pts = rng.uniform(box.lower, box.upper, size=(n, 2))
            hits = ~s.is_dominated(pts)
            frac = hits.mean()
            mc = frac * box.volume
            se = box.volume * np.sqrt(frac * (1 - frac) / n)
            assert abs(exact - mc) < 4 * se + 1e-12

    def test_rejects_other_dimensions(self):
        s = ParetoState.from_observations([[1.0, 2.0, 3.0]])
        with pytest.raises(ValueError):
            box_complement_volume_2d(s, BoundingBox([0, 0, 0], [1, 1, 1]))


class TestBoundingBox:
    def test_validation(self):
        with pytest.raises(ValueError):
            BoundingBox([0.0, 1.0], [1.0, 1.0])
        with pytest.raises(ValueError):
            BoundingBox([0.0], [1.0, 2.0])

    def test_contains_and_volume(self):
        box = BoundingBox([0.0, 0.0], [2.0, 3.0])
        assert box.volume == 6.0
        mask = box.contains([[1.0, 1.0], [2.0, 3.0], [2.1, 1.0], [-0.1, 0.0]])
        assert mask.tolist() == [True, True, False, False]
