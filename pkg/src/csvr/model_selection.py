# Description: k-fold cross-validation over (epsilon, C) or L grids, with the one standard error rule for LCR
# Date: 18-03-2024

import sys
from dataclasses import dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed
from sklearn.model_selection import KFold
from tqdm import tqdm

from .core import (Dataset, Hyperparams, InvalidArgumentError, SelectionError,
                   SolverError, mse_observed)
from .estimators import EstimatorSpec, Method, fit
from .utils.console_output import format_row, format_table

FOLD_STREAM = 2

def derive_seed(seed, stream) -> int:
    """32-bit seed of a named substream of the master seed."""
    return int(np.random.SeedSequence([int(seed), int(stream)]).generate_state(1)[0])


@dataclass(frozen=True)
class CvGrid:
    c_multipliers: tuple = (0.1, 0.5, 1.0, 2.0, 5.0)
    epsilon_values: tuple = (0.0, 0.001, 0.01, 0.1, 0.2)
    l_values: tuple = (0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0)
    folds: int = 5
    rng_seed: int = 0
    c_base: float = 1.0
    one_se_direction: str = 'smallest'

    def __post_init__(self):
        for name in ('c_multipliers', 'epsilon_values', 'l_values'):
            values = tuple(float(v) for v in np.atleast_1d(getattr(self, name)))
            if len(values) == 0:
                raise InvalidArgumentError(f"{name} must not be empty")
            object.__setattr__(self, name, values)
        if not (np.isfinite(self.c_base) and self.c_base > 0):
            raise InvalidArgumentError(f"c_base must be > 0, got {self.c_base}")
        if min(self.c_multipliers) <= 0:
            raise InvalidArgumentError("c multipliers must be > 0")
        if min(self.epsilon_values) < 0:
            raise InvalidArgumentError("epsilon values must be >= 0")
        if min(self.l_values) <= 0:
            raise InvalidArgumentError("l values must be > 0")
        if int(self.folds) < 2:
            raise InvalidArgumentError(f"folds must be >= 2, got {self.folds}")
        if self.one_se_direction not in ('smallest', 'largest'):
            raise InvalidArgumentError("one_se_direction must be 'smallest' or 'largest'")
        object.__setattr__(self, 'folds', int(self.folds))
        object.__setattr__(self, 'rng_seed', int(self.rng_seed))

    @property
    def c_values(self) -> tuple:
        return tuple(self.c_base * m for m in self.c_multipliers)

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in
                ((name, getattr(self, name)) for name in self.__dataclass_fields__)}

    @classmethod
    def from_dict(cls, values: dict):
        return cls(**values)


def candidate_hyperparams(spec: EstimatorSpec, grid: CvGrid) -> list:
    """Candidates in grid order: none to tune for CR, L for LCR, (C, epsilon) otherwise."""
    hp = spec.hyperparams
    if spec.method == Method.CR:
        return [hp]
    if spec.method == Method.LCR:
        return [replace(hp, lipschitz_bound=l) for l in grid.l_values]
    return [replace(hp, c=c, epsilon=eps) for c in grid.c_values for eps in grid.epsilon_values]

def fold_assignment(n, grid: CvGrid) -> np.ndarray:
    """Validation fold of every observation (seeded shuffle, contiguous blocks)."""
    if n < grid.folds:
        raise InvalidArgumentError(f"cannot form {grid.folds} folds from {n} observations")
    kfold = KFold(n_splits=grid.folds, shuffle=True, random_state=derive_seed(grid.rng_seed, FOLD_STREAM))
    folds = np.empty(n, dtype=int)
    for k, (_, val_idx) in enumerate(kfold.split(np.zeros((n, 1)))):
        folds[val_idx] = k
    return folds

def _score_candidate(data, spec, folds, num_folds, config, backend):
    scores = np.full(num_folds, np.nan)
    for k in range(num_folds):
        train, val = data.subset(np.nonzero(folds != k)[0]), data.subset(np.nonzero(folds == k)[0])
        try:
            model = fit(train, spec, config, backend)
        except SolverError:
            return scores
        scores[k] = mse_observed(model, val)
    return scores


@dataclass(frozen=True, eq=False)
class CvResult:
    spec: EstimatorSpec
    candidates: tuple
    fold_scores: np.ndarray
    mean_mse: np.ndarray
    se_mse: np.ndarray
    fold_assignment: np.ndarray
    selected_index: int
    rule: str = 'argmin'
    grid: CvGrid = field(default_factory=CvGrid)

    @property
    def selected(self) -> Hyperparams:
        return self.candidates[self.selected_index]

    @property
    def selected_spec(self) -> EstimatorSpec:
        return replace(self.spec, hyperparams=self.selected)

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.mean_mse)

    def to_dict(self) -> dict:
        return {'method': self.spec.method.value,
                'rule': self.rule,
                'folds': int(self.grid.folds),
                'rng_seed': int(self.grid.rng_seed),
                'selected': self.selected.to_dict(),
                'selected_mean_mse': float(self.mean_mse[self.selected_index]),
                'selected_se_mse': float(self.se_mse[self.selected_index]),
                'candidates': [dict(hp.to_dict(),
                                    mean_mse=None if not np.isfinite(m) else float(m),
                                    se_mse=None if not np.isfinite(s) else float(s))
                               for hp, m, s in zip(self.candidates, self.mean_mse, self.se_mse)],
                'fold_assignment': self.fold_assignment.tolist()}

    def format_output(self) -> str:
        rows = []
        for i, hp in enumerate(self.candidates):
            if self.spec.method == Method.LCR:
                label = "L = %g" % hp.lipschitz_bound
            elif self.spec.method == Method.CR:
                label = "no hyperparameters"
            else:
                label = "C = %g, eps = %g" % (hp.c, hp.epsilon)
            if i == self.selected_index:
                label = '* ' + label
            rows.append(format_row(label, self.mean_mse[i], self.se_mse[i]))
        title = "%s cross-validation (%d folds, %s rule)" % (self.spec.method.value, self.grid.folds, self.rule)
        return format_table(title, rows, header="candidate                             mean MSE       se")


def select_candidate(candidates, mean_mse, se_mse, method, direction='smallest'):
    """Index of the selected candidate and the name of the rule used.

    argmin breaks ties by the smallest C then the smallest epsilon. For LCR
    the one standard error rule keeps every L whose mean is within one SE of
    the minimum and picks the smallest (or largest) of those.
    """
    valid = np.nonzero(np.isfinite(mean_mse))[0]
    if len(valid) == 0:
        raise SelectionError("every cross-validation candidate failed to solve")

    if method == Method.LCR:
        best = min(valid, key=lambda i: (mean_mse[i], candidates[i].lipschitz_bound))
        threshold = mean_mse[best] + (se_mse[best] if np.isfinite(se_mse[best]) else 0.0)
        eligible = [i for i in valid if mean_mse[i] <= threshold]
        pick = min if direction == 'smallest' else max
        return pick(eligible, key=lambda i: candidates[i].lipschitz_bound), '1se'

    best = min(valid, key=lambda i: (mean_mse[i], candidates[i].c, candidates[i].epsilon))
    return best, 'argmin'

def cross_validate(data: Dataset, spec: EstimatorSpec, grid: CvGrid = None, config=None,
                   backend=None, n_jobs: int = 1, verbose: bool = False) -> CvResult:
    """Score every candidate on every fold by observed-y validation MSE and select one."""
    grid = grid if grid is not None else CvGrid()
    folds = fold_assignment(data.n, grid)
    candidates = candidate_hyperparams(spec, grid)
    specs = [replace(spec, hyperparams=hp) for hp in candidates]

    if verbose:
        print(f"csvr: cross-validating {spec.method.value} over {len(candidates)} candidates x {grid.folds} folds", file=sys.stderr)
    jobs = (delayed(_score_candidate)(data, s, folds, grid.folds, config, backend)
            for s in tqdm(specs, disable=not verbose, desc='cv candidates', file=sys.stderr))
    fold_scores = np.array(Parallel(n_jobs=n_jobs)(jobs)).reshape(len(candidates), grid.folds)

    invalid = np.any(~np.isfinite(fold_scores), axis=1)
    mean_mse = np.where(invalid, np.nan, np.mean(np.where(invalid[:, None], 0.0, fold_scores), axis=1))
    se_mse = np.where(invalid, np.nan, np.std(np.where(invalid[:, None], 0.0, fold_scores), axis=1, ddof=1) / np.sqrt(grid.folds))
    if verbose and np.any(invalid):
        print(f"csvr: {int(invalid.sum())} candidates failed on at least one fold and were excluded", file=sys.stderr)

    index, rule = select_candidate(candidates, mean_mse, se_mse, spec.method, grid.one_se_direction)
    return CvResult(spec=spec, candidates=tuple(candidates), fold_scores=fold_scores, mean_mse=mean_mse,
                    se_mse=se_mse, fold_assignment=folds, selected_index=int(index), rule=rule, grid=grid)

def tune_and_fit(data: Dataset, spec: EstimatorSpec, grid: CvGrid = None, config=None, backend=None,
                 n_jobs: int = 1, verbose: bool = False) -> tuple:
    """Cross-validate, then refit on the whole sample with the selected hyperparameters."""
    result = cross_validate(data, spec, grid, config, backend, n_jobs, verbose)
    model = fit(data, result.selected_spec, config, backend, verbose)
    return model, result
