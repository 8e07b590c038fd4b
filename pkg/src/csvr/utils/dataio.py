# Description: CSV ingestion, seeded train/test splits, descriptive statistics and feature standardization
# Date: 22-03-2024

import os
from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..core import Dataset, DataFormatError, FittedModel, InvalidArgumentError

SPLIT_STREAM = 5


@dataclass(frozen=True)
class CsvSchema:
    """Which columns hold the response and the features.

    Columns are given by name, or by 0-based position when the file has no
    header. feature_columns None means every other column that holds numbers.
    """
    response_column: object = -1
    feature_columns: tuple = None
    has_header: bool = True
    delimiter: str = ','
    exclude_columns: tuple = ()

    def __post_init__(self):
        if len(self.delimiter) != 1:
            raise InvalidArgumentError(f"delimiter must be a single character, got '{self.delimiter}'")
        if self.feature_columns is not None:
            features = tuple(self.feature_columns)
            if len(features) == 0:
                raise InvalidArgumentError("feature_columns must name at least one column")
            if self.response_column in features:
                raise InvalidArgumentError(f"response column '{self.response_column}' is also listed as a feature")
            object.__setattr__(self, 'feature_columns', features)
        object.__setattr__(self, 'exclude_columns', tuple(self.exclude_columns))

def read_frame(path, has_header=True, delimiter=',') -> pd.DataFrame:
    """Raw cells as strings, rows in file order."""
    if not os.path.isfile(path):
        raise DataFormatError(f"no such file: {path}")
    try:
        frame = pd.read_csv(path, sep=delimiter, header=0 if has_header else None, dtype=str,
                            keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise DataFormatError(f"{path} is empty")
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise DataFormatError(f"malformed CSV file {path}: {exc}") from exc
    if len(frame) == 0:
        raise DataFormatError(f"{path} holds no data rows")
    return frame

def _resolve(frame, column):
    if column in frame.columns:
        return column
    if isinstance(column, (int, np.integer)) or (isinstance(column, str) and column.lstrip('-').isdigit()):
        pos = int(column)
        if -len(frame.columns) <= pos < len(frame.columns):
            return frame.columns[pos]
    raise DataFormatError(f"column '{column}' not found, available columns: {list(frame.columns)}")

def _numeric_column(frame, column, header_lines):
    raw = frame[column].str.strip()
    values = pd.to_numeric(raw, errors='coerce')
    bad = ~np.isfinite(values.to_numpy(dtype=float))
    if bad.any():
        row = int(np.argmax(bad)) + 1
        cell = raw.iloc[row - 1]
        what = 'blank cell' if cell == '' else f"non-numeric cell '{cell}'"
        raise DataFormatError(f"{what} at row {row} (line {row + header_lines}), column '{column}'")
    return values.to_numpy(dtype=float)

def _is_numeric_column(frame, column):
    return pd.to_numeric(frame[column].str.strip(), errors='coerce').notna().any()

def numeric_frame(frame, columns, header_lines=1) -> pd.DataFrame:
    return pd.DataFrame({column: _numeric_column(frame, column, header_lines) for column in columns})

def load_csv(path, schema: CsvSchema = None) -> Dataset:
    """Dataset from a CSV file. Bad cells raise DataFormatError naming the data row and column."""
    schema = schema if schema is not None else CsvSchema()
    frame = read_frame(path, schema.has_header, schema.delimiter)
    header_lines = 1 if schema.has_header else 0

    response = _resolve(frame, schema.response_column)
    excluded = {_resolve(frame, c) for c in schema.exclude_columns}
    if schema.feature_columns is not None:
        features = [_resolve(frame, c) for c in schema.feature_columns]
        if response in features:
            raise InvalidArgumentError(f"response column '{response}' is also listed as a feature")
    else:
        features = [c for c in frame.columns if c != response and c not in excluded and _is_numeric_column(frame, c)]
    features = [c for c in features if c not in excluded]
    if not features:
        raise DataFormatError(f"{path} has no numeric feature columns")

    x = numeric_frame(frame, features, header_lines).to_numpy()
    y = _numeric_column(frame, response, header_lines)
    return Dataset(x, y, feature_names=tuple(str(c) for c in features), response_name=str(response))

def split(data: Dataset, test_fraction: float, seed: int = 0) -> tuple:
    """Seeded random (train, test) split, test size rounded to the nearest integer."""
    if not (0.0 < test_fraction < 1.0):
        raise InvalidArgumentError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    n = data.n
    n_test = int(np.floor(n * test_fraction + 0.5))
    if n_test < 1 or n - n_test < 1:
        raise InvalidArgumentError(f"test_fraction {test_fraction} leaves an empty part for n = {n}")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), SPLIT_STREAM]))
    perm = rng.permutation(n)
    return data.subset(np.sort(perm[n_test:])), data.subset(np.sort(perm[:n_test]))

def describe(data) -> pd.DataFrame:
    """Per-column mean, std (n - 1), min and max of a Dataset or a numeric DataFrame."""
    if isinstance(data, Dataset):
        names = list(data.feature_names or [f"x{j + 1}" for j in range(data.d)])
        frame = pd.DataFrame(np.column_stack([data.x, data.y]), columns=names + [data.response_name or 'y'])
    else:
        frame = data
    return pd.DataFrame({'mean': frame.mean(), 'std': frame.std(ddof=1), 'min': frame.min(), 'max': frame.max()})

### Standardization

def standardize(data: Dataset) -> tuple:
    """Dataset with centred, unit-variance features and the (mean, scale) used."""
    mean = data.x.mean(axis=0)
    scale = data.x.std(axis=0, ddof=0)
    scale = np.where(scale > 0, scale, 1.0)
    return Dataset((data.x - mean) / scale, data.y, data.feature_names, data.response_name), mean, scale

def unstandardize_model(model: FittedModel, mean, scale) -> FittedModel:
    """Hyperplanes of a model fitted on standardized features, expressed in raw units."""
    mean, scale = np.asarray(mean, dtype=float), np.asarray(scale, dtype=float)
    beta = model.beta / scale
    alpha = model.alpha - beta @ mean
    return FittedModel(alpha, beta, shape=model.shape, method_tag=model.method_tag,
                       hyperparams=model.hyperparams, solver_report=model.solver_report)
