# Description: Monte Carlo harness, data generating processes, replicate loops and study reports
# Date: 20-03-2024

import json
import os
import sys
import time
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.stats import ttest_rel
from tqdm import tqdm

from .core import (CsvrError, Dataset, DataFormatError, Hyperparams, InvalidArgumentError, Shape,
                   afriat_violation, mse_true)
from .estimators import EstimatorSpec, Method, fit
from .model_selection import CvGrid, derive_seed, tune_and_fit
from .utils.console_output import format_grid

COVARIATE_RANGE = (1.0, 10.0)
OUTLIER_RANGE = (90.0, 100.0)

DATA_STREAM = 0
NOISE_STREAM = 1
OUTLIER_STREAM = 3
HOLDOUT_STREAM = 4
REPLICATE_STREAM = 100


class DgpId(str, Enum):
    I = 'I'
    II = 'II'
    III = 'III'
    LOG = 'LOG'

DGP_DIMENSION = {DgpId.I: 1, DgpId.II: 2, DgpId.III: 3, DgpId.LOG: 1}

def true_function(dgp_id, x) -> np.ndarray:
    """Noiseless regression surface of a DGP at the rows of x."""
    dgp_id = DgpId(dgp_id)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != DGP_DIMENSION[dgp_id]:
        x = x.reshape(-1, DGP_DIMENSION[dgp_id])
    if dgp_id == DgpId.I:
        return 3.0 + x[:, 0]**0.5
    if dgp_id == DgpId.II:
        return 3.0 + x[:, 0]**0.2 + x[:, 1]**0.3
    if dgp_id == DgpId.III:
        return 3.0 + x[:, 0]**0.05 + x[:, 1]**0.15 + x[:, 2]**0.3
    return 3.0 + np.log(x[:, 0])

def _rng(seed, stream):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(stream)]))


@dataclass(frozen=True)
class DgpSpec:
    dgp_id: DgpId = DgpId.I
    n: int = 50
    sigma: float = 1.0
    outliers: int = 0
    seed: int = 0

    def __post_init__(self):
        try:
            object.__setattr__(self, 'dgp_id', DgpId(self.dgp_id))
        except ValueError:
            raise InvalidArgumentError(f"unknown DGP '{self.dgp_id}', expected one of {[g.value for g in DgpId]}")
        if int(self.n) < 1:
            raise InvalidArgumentError(f"n must be >= 1, got {self.n}")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidArgumentError(f"sigma must be > 0, got {self.sigma}")
        if int(self.outliers) < 0:
            raise InvalidArgumentError(f"outliers must be >= 0, got {self.outliers}")
        object.__setattr__(self, 'n', int(self.n))
        object.__setattr__(self, 'outliers', int(self.outliers))
        object.__setattr__(self, 'seed', int(self.seed))

    @property
    def d(self) -> int:
        return DGP_DIMENSION[self.dgp_id]

    def to_dict(self) -> dict:
        return {'dgp_id': self.dgp_id.value, 'n': self.n, 'sigma': float(self.sigma),
                'outliers': self.outliers, 'seed': self.seed}

def generate(spec: DgpSpec) -> tuple:
    """(Dataset, noiseless values). Outlier rows, if any, come after the n regular rows."""
    d = spec.d
    x = _rng(spec.seed, DATA_STREAM).uniform(*COVARIATE_RANGE, size=(spec.n, d))
    if spec.outliers:
        x_out = _rng(spec.seed, OUTLIER_STREAM).uniform(*OUTLIER_RANGE, size=(spec.outliers, d))
        x = np.vstack([x, x_out])
    f = true_function(spec.dgp_id, x)
    y = f + _rng(spec.seed, NOISE_STREAM).normal(0.0, spec.sigma, size=len(f))
    names = tuple(f"x{j + 1}" for j in range(d))
    return Dataset(x, y, feature_names=names, response_name='y'), f

def holdout(spec: DgpSpec, size: int) -> tuple:
    """Fresh hold-out covariates on the training support and their noiseless values."""
    if int(size) < 1:
        raise InvalidArgumentError(f"hold-out size must be >= 1, got {size}")
    x = _rng(spec.seed, HOLDOUT_STREAM).uniform(*COVARIATE_RANGE, size=(int(size), spec.d))
    return x, true_function(spec.dgp_id, x)


@dataclass(frozen=True)
class ExperimentSpec:
    dgp: DgpSpec
    estimators: tuple
    grid: CvGrid = field(default_factory=CvGrid)
    replicates: int = 50
    test_size: int = 0
    tune: bool = True

    def __post_init__(self):
        if int(self.replicates) < 1:
            raise InvalidArgumentError(f"replicates must be >= 1, got {self.replicates}")
        if int(self.test_size) < 0:
            raise InvalidArgumentError(f"test_size must be >= 0, got {self.test_size}")
        estimators = tuple(self.estimators)
        if len(estimators) == 0:
            raise InvalidArgumentError("an experiment needs at least one estimator")
        object.__setattr__(self, 'estimators', estimators)
        object.__setattr__(self, 'replicates', int(self.replicates))
        object.__setattr__(self, 'test_size', int(self.test_size))

    @property
    def labels(self) -> list:
        """One column label per estimator, numbered when a method repeats."""
        names = [e.method.value for e in self.estimators]
        return [name if names.count(name) == 1 else f"{name}#{names[:i + 1].count(name)}"
                for i, name in enumerate(names)]

    def replicate_seed(self, replicate) -> int:
        return int(np.random.SeedSequence([self.dgp.seed, REPLICATE_STREAM, int(replicate)]).generate_state(1)[0])

def _run_replicate(spec: ExperimentSpec, replicate, config, backend):
    seed = spec.replicate_seed(replicate)
    dgp = replace(spec.dgp, seed=seed)
    data, f = generate(dgp)
    regular = np.arange(dgp.n)
    if spec.test_size:
        x_test, f_test = holdout(dgp, spec.test_size)
    grid = replace(spec.grid, rng_seed=derive_seed(seed, 0))

    records = []
    for label, est in zip(spec.labels, spec.estimators):
        record = {'replicate': int(replicate), 'seed': seed, 'method': label, 'status': 'ok',
                  'in_sample_mse': None, 'out_of_sample_mse': None, 'hyperparams': None,
                  'afriat_violation': None, 'error': None}
        start = time.time()
        try:
            if spec.tune and est.method != Method.CR:
                model, _ = tune_and_fit(data, est, grid, config, backend)
            else:
                model = fit(data, est, config, backend)
            record['in_sample_mse'] = mse_true(model, data.x[regular], f[regular])
            if spec.test_size:
                record['out_of_sample_mse'] = mse_true(model, x_test, f_test)
            record['hyperparams'] = model.hyperparams.to_dict() if model.hyperparams else None
            record['afriat_violation'] = afriat_violation(model, data.x)
        except CsvrError as exc:
            record['status'] = 'failed'
            record['error'] = f"{exc.category}: {exc}"
        record['runtime'] = time.time() - start
        records.append(record)
    return records


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    spec: ExperimentSpec
    records: tuple
    runtime: float = 0.0

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(list(self.records))

    def mse(self, method, kind='in_sample') -> np.ndarray:
        """Per-replicate MSE of one method, NaN for failed replicates."""
        values = np.full(self.spec.replicates, np.nan)
        for rec in self.records:
            if rec['method'] == method and rec['status'] == 'ok' and rec[f'{kind}_mse'] is not None:
                values[rec['replicate']] = rec[f'{kind}_mse']
        return values

    @property
    def failures(self) -> dict:
        return {label: int(sum(1 for r in self.records if r['method'] == label and r['status'] != 'ok'))
                for label in self.spec.labels}

    def summary(self) -> pd.DataFrame:
        """Mean and standard deviation over the successful replicates of every method."""
        rows = []
        for label in self.spec.labels:
            row = {'method': label, 'failed': self.failures[label]}
            for kind in ('in_sample', 'out_of_sample'):
                values = self.mse(label, kind)
                values = values[np.isfinite(values)]
                row[f'{kind}_mean'] = float(np.mean(values)) if len(values) else np.nan
                row[f'{kind}_std'] = float(np.std(values, ddof=1)) if len(values) > 1 else np.nan
            rows.append(row)
        return pd.DataFrame(rows).set_index('method')

    def paired_comparison(self, method_a, method_b, kind='in_sample') -> dict:
        """One-sided paired t-test of H1: mean MSE(method_a) < mean MSE(method_b)."""
        a, b = self.mse(method_a, kind), self.mse(method_b, kind)
        both = np.isfinite(a) & np.isfinite(b)
        if both.sum() < 2:
            raise InvalidArgumentError("a paired comparison needs at least two replicates where both methods succeeded")
        test = ttest_rel(a[both], b[both], alternative='less')
        return {'statistic': float(test.statistic), 'pvalue': float(test.pvalue),
                'mean_difference': float(np.mean(a[both] - b[both])), 'replicates': int(both.sum())}

    def format_output(self) -> str:
        summary = self.summary()
        dgp = self.spec.dgp
        title = "DGP %s, n = %d, sigma = %g, outliers = %d, %d replicates" % (
            dgp.dgp_id.value, dgp.n, dgp.sigma, dgp.outliers, self.spec.replicates)
        kinds = ['in_sample'] + (['out_of_sample'] if self.spec.test_size else [])
        rows = [[summary.loc[label, f'{kind}_{stat}'] for label in self.spec.labels]
                for kind in kinds for stat in ('mean', 'std')]
        labels = [f"{kind.replace('_', '-')} {stat}" for kind in kinds for stat in ('mean', 'std')]
        return format_grid(title, labels, self.spec.labels, rows, row_header='MSE')

    def to_dict(self) -> dict:
        return {'dgp': self.spec.dgp.to_dict(), 'replicates': self.spec.replicates,
                'test_size': self.spec.test_size, 'methods': self.spec.labels,
                'summary': json.loads(self.summary().reset_index().to_json(orient='records')),
                'runtime': self.runtime}

    def to_jsonl(self, fp) -> None:
        """Per-replicate log, one JSON object per line, full precision."""
        for rec in self.records:
            fp.write(json.dumps(dict(rec, dgp=self.spec.dgp.to_dict())) + '\n')

def run_experiment(spec: ExperimentSpec, config=None, backend=None, n_jobs: int = 1,
                   verbose: bool = False) -> ExperimentResult:
    """Replicate loop. Failed fits are kept in the records and left out of the summary."""
    start = time.time()
    jobs = (delayed(_run_replicate)(spec, r, config, backend)
            for r in tqdm(range(spec.replicates), disable=not verbose, desc='replicates', file=sys.stderr))
    batches = Parallel(n_jobs=n_jobs)(jobs)
    records = tuple(rec for batch in batches for rec in batch)
    result = ExperimentResult(spec, records, time.time() - start)
    failed = sum(result.failures.values())
    if failed:
        print(f"csvr: warning, {failed} fits failed and were excluded from the summary", file=sys.stderr)
    return result

### Studies (several experiments from one preset)

def _has_not_slash_backslash_or_dot(input_string):
    return not ('/' in input_string or '\\' in input_string or '.' in input_string)

def load_preset(preset) -> dict:
    """A bundled preset by bare name, or a .json / .toml file path."""
    if isinstance(preset, dict):
        return dict(preset)
    preset = str(preset)
    if _has_not_slash_backslash_or_dot(preset):
        path = os.path.join(os.path.dirname(__file__), 'presets', preset + '.json')
        if not os.path.exists(path):
            raise DataFormatError(f"unrecognised preset keyword '{preset}'")
    else:
        path = preset
    ext = path.split(".")[-1].lower()
    try:
        if ext == 'json':
            with open(path, 'r') as fp:
                return json.load(fp)
        if ext == 'toml':
            try:
                import tomllib
            except ImportError:
                raise DataFormatError("TOML experiment files need Python 3.11 or newer, use JSON instead")
            with open(path, 'rb') as fp:
                return tomllib.load(fp)
    except OSError as exc:
        raise DataFormatError(f"cannot read experiment file {path}: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, DataFormatError):
            raise
        raise DataFormatError(f"malformed experiment file {path}: {exc}") from exc
    raise DataFormatError(f"unrecognised experiment file format '{ext}', expected json or toml")

def _estimator_spec(entry, grid, shape) -> EstimatorSpec:
    if isinstance(entry, str):
        entry = {'method': entry}
    try:
        method = Method(entry['method'])
    except ValueError:
        raise InvalidArgumentError(f"unknown method '{entry['method']}' in experiment config")
    shape = Shape.from_dict(entry['shape']) if 'shape' in entry else shape
    hp = dict(entry.get('hyperparams', {}))
    if method == Method.LCR and hp.get('lipschitz_bound') is None:
        hp['lipschitz_bound'] = grid.l_values[0]
    return EstimatorSpec(method, shape, Hyperparams.from_dict(hp))

def experiments_from_config(config: dict) -> list:
    grid = CvGrid.from_dict(config.get('grid', {}))
    shape = Shape.from_dict(config.get('shape', {}))
    seed = int(config.get('seed', 0))
    estimators = tuple(_estimator_spec(e, grid, shape) for e in config.get('methods', ['csvr', 'cr']))
    experiments = []
    for k, scenario in enumerate(config.get('scenarios', [])):
        dgp = DgpSpec(scenario['dgp'], scenario['n'], scenario.get('sigma', 1.0), scenario.get('outliers', 0),
                      seed=scenario.get('seed', derive_seed(seed, 1000 + k)))
        experiments.append(ExperimentSpec(dgp, estimators, grid,
                                          replicates=scenario.get('replicates', config.get('replicates', 50)),
                                          test_size=scenario.get('test_size', config.get('test_size', 0)),
                                          tune=config.get('tune', True)))
    if not experiments:
        raise DataFormatError("experiment config lists no scenarios")
    return experiments


@dataclass(frozen=True, eq=False)
class StudyResult:
    title: str
    results: tuple

    def format_output(self) -> str:
        """Rows DGP / n / sigma, one column per method, mean MSE (std below when asked)."""
        labels = self.results[0].spec.labels
        kinds = ['in_sample'] + (['out_of_sample'] if any(r.spec.test_size for r in self.results) else [])
        blocks = []
        for kind in kinds:
            row_labels, rows = [], []
            for res in self.results:
                dgp = res.spec.dgp
                summary = res.summary()
                row_labels.append("%-3s n=%-4d s=%-4g o=%d" % (dgp.dgp_id.value, dgp.n, dgp.sigma, dgp.outliers))
                rows.append([summary.loc[label, f'{kind}_mean'] for label in labels])
            blocks.append(format_grid(f"{self.title}: mean {kind.replace('_', '-')} MSE", row_labels, labels, rows,
                                      row_header='DGP'))
        return '\n\n'.join(blocks)

    def to_dict(self) -> dict:
        return {'title': self.title, 'experiments': [res.to_dict() for res in self.results]}

    def to_jsonl(self, fp) -> None:
        for res in self.results:
            res.to_jsonl(fp)

def run_study(preset, config=None, backend=None, n_jobs: int = 1, verbose: bool = False,
              log_path=None, **overrides) -> StudyResult:
    """Run every scenario of a preset, overrides merged over the loaded config."""
    study = {**load_preset(preset), **overrides}
    experiments = experiments_from_config(study)
    results = []
    for exp in experiments:
        if verbose:
            print(f"csvr: DGP {exp.dgp.dgp_id.value}, n = {exp.dgp.n}, sigma = {exp.dgp.sigma}", file=sys.stderr)
        results.append(run_experiment(exp, config, backend, n_jobs, verbose))
    result = StudyResult(study.get('title', 'simulation study'), tuple(results))
    if log_path is not None:
        with open(log_path, 'w') as fp:
            result.to_jsonl(fp)
    return result
