import unittest

import numpy as np

from csvr.core import Dataset, Hyperparams, InvalidArgumentError, SelectionError
from csvr.estimators import EstimatorSpec, Method
from csvr.model_selection import (CvGrid, candidate_hyperparams, cross_validate, fold_assignment,
                                  select_candidate, tune_and_fit)


def sample(n=20, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.uniform(1.0, 10.0, size=(n, 1))
    return Dataset(x, 3.0 + np.sqrt(x).ravel() + rng.normal(0.0, 0.5, size=n))

SMALL_GRID = CvGrid(c_multipliers=(0.5, 2.0), epsilon_values=(0.0, 0.1), l_values=(0.5, 2.0), folds=4, rng_seed=3)


class TestGrid(unittest.TestCase):
    def test_defaults(self):
        grid = CvGrid()
        self.assertEqual(grid.c_values, (0.1, 0.5, 1.0, 2.0, 5.0))
        self.assertEqual(grid.epsilon_values, (0.0, 0.001, 0.01, 0.1, 0.2))
        self.assertEqual(grid.l_values, (0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0))
        self.assertEqual(grid.folds, 5)

    def test_c_base(self):
        self.assertEqual(CvGrid(c_multipliers=(0.5, 2.0), c_base=4.0).c_values, (2.0, 8.0))

    def test_wrongdata(self):
        self.assertRaises(InvalidArgumentError, CvGrid, folds=1)
        self.assertRaises(InvalidArgumentError, CvGrid, epsilon_values=(-0.1,))
        self.assertRaises(InvalidArgumentError, CvGrid, l_values=())
        self.assertRaises(InvalidArgumentError, CvGrid, one_se_direction='middle')

    def test_dict(self):
        self.assertEqual(CvGrid.from_dict(SMALL_GRID.to_dict()), SMALL_GRID)

    def test_candidates(self):
        grid = CvGrid()
        self.assertEqual(len(candidate_hyperparams(EstimatorSpec('cr'), grid)), 1)
        lcr = candidate_hyperparams(EstimatorSpec('lcr', hyperparams=Hyperparams(lipschitz_bound=1.0)), grid)
        self.assertEqual([hp.lipschitz_bound for hp in lcr], list(grid.l_values))
        csvr = candidate_hyperparams(EstimatorSpec('csvr'), grid)
        self.assertEqual(len(csvr), 25)
        self.assertEqual((csvr[0].c, csvr[0].epsilon), (0.1, 0.0))
        self.assertEqual((csvr[1].c, csvr[1].epsilon), (0.1, 0.001))


class TestFolds(unittest.TestCase):
    def test_partition(self):
        folds = fold_assignment(23, CvGrid(folds=5))
        counts = np.bincount(folds)
        self.assertEqual(len(counts), 5)
        self.assertEqual(counts.sum(), 23)
        self.assertLessEqual(counts.max() - counts.min(), 1)

    def test_deterministic(self):
        np.testing.assert_array_equal(fold_assignment(30, CvGrid(rng_seed=9)), fold_assignment(30, CvGrid(rng_seed=9)))
        self.assertFalse(np.array_equal(fold_assignment(30, CvGrid(rng_seed=9)), fold_assignment(30, CvGrid(rng_seed=10))))

    def test_too_few_observations(self):
        self.assertRaises(InvalidArgumentError, fold_assignment, 4, CvGrid(folds=5))


class TestSelection(unittest.TestCase):
    def lcr_candidates(self, bounds):
        return [Hyperparams(lipschitz_bound=b) for b in bounds]

    def test_one_se_rule(self):
        candidates = self.lcr_candidates([0.1, 1.0, 2.0, 5.0])
        mean, se = np.array([3.0, 1.0, 1.05, 2.0]), np.full(4, 0.1)
        self.assertEqual(select_candidate(candidates, mean, se, Method.LCR), (1, '1se'))
        self.assertEqual(select_candidate(candidates, mean, se, Method.LCR, 'largest'), (2, '1se'))

    def test_one_se_prefers_smaller_bound(self):
        candidates = self.lcr_candidates([0.1, 1.0])
        index, _ = select_candidate(candidates, np.array([1.05, 1.0]), np.array([0.1, 0.1]), Method.LCR)
        self.assertEqual(index, 0)

    def test_one_se_within_threshold(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            candidates = self.lcr_candidates(np.sort(rng.uniform(0.1, 10.0, size=6)))
            mean, se = rng.uniform(1.0, 2.0, size=6), rng.uniform(0.0, 0.3, size=6)
            index, _ = select_candidate(candidates, mean, se, Method.LCR)
            best = int(np.argmin(mean))
            self.assertLessEqual(mean[index], mean[best] + se[best])

    def test_order_does_not_matter(self):
        candidates = self.lcr_candidates([0.1, 0.5, 1.0, 2.0, 5.0])
        mean, se = np.array([2.0, 1.2, 1.0, 1.1, 1.3]), np.full(5, 0.15)
        index, _ = select_candidate(candidates, mean, se, Method.LCR)
        perm = [3, 0, 4, 2, 1]
        permuted, _ = select_candidate([candidates[i] for i in perm], mean[perm], se[perm], Method.LCR)
        self.assertEqual(candidates[index], candidates[perm[permuted]])

    def test_argmin_ties(self):
        candidates = [Hyperparams(0.1, 2.0), Hyperparams(0.0, 1.0), Hyperparams(0.1, 1.0)]
        index, rule = select_candidate(candidates, np.array([1.0, 1.0, 1.0]), np.zeros(3), Method.CSVR)
        self.assertEqual((index, rule), (1, 'argmin'))

    def test_failed_candidates(self):
        candidates = [Hyperparams(0.0, 1.0), Hyperparams(0.1, 1.0)]
        index, _ = select_candidate(candidates, np.array([np.nan, 2.0]), np.array([np.nan, 0.1]), Method.CSVR)
        self.assertEqual(index, 1)
        self.assertRaises(SelectionError, select_candidate, candidates, np.full(2, np.nan), np.full(2, np.nan), Method.CSVR)


class TestCrossValidate(unittest.TestCase):
    def test_single_candidate(self):
        result = cross_validate(sample(), EstimatorSpec('cr'), SMALL_GRID)
        self.assertEqual(result.selected_index, 0)
        self.assertEqual(result.fold_scores.shape, (1, 4))
        self.assertTrue(np.all(np.isfinite(result.fold_scores)))

    def test_grid_search(self):
        data = sample()
        result = cross_validate(data, EstimatorSpec('csvr'), SMALL_GRID)
        self.assertEqual(len(result.candidates), 4)
        self.assertEqual(result.rule, 'argmin')
        self.assertEqual(result.selected_index, int(np.nanargmin(result.mean_mse)))
        np.testing.assert_allclose(result.mean_mse, result.fold_scores.mean(axis=1))
        self.assertIn('mean MSE', result.format_output())
        self.assertEqual(len(result.to_dict()['candidates']), 4)

    def test_deterministic(self):
        data = sample(seed=2)
        first = cross_validate(data, EstimatorSpec('csvr'), SMALL_GRID)
        second = cross_validate(data, EstimatorSpec('csvr'), SMALL_GRID)
        np.testing.assert_array_equal(first.fold_assignment, second.fold_assignment)
        np.testing.assert_array_equal(first.fold_scores, second.fold_scores)
        self.assertEqual(first.selected, second.selected)

    def test_lcr(self):
        spec = EstimatorSpec('lcr', hyperparams=Hyperparams(lipschitz_bound=1.0))
        result = cross_validate(sample(seed=4), spec, SMALL_GRID)
        self.assertEqual(result.rule, '1se')
        self.assertIn(result.selected.lipschitz_bound, SMALL_GRID.l_values)

    def test_tune_and_fit(self):
        data = sample(seed=5)
        model, result = tune_and_fit(data, EstimatorSpec('csvr'), SMALL_GRID)
        self.assertEqual(model.n, data.n)
        self.assertEqual(model.hyperparams, result.selected)


if __name__ == '__main__':
    unittest.main()
