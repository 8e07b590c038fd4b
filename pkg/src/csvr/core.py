# Description: Domain types, the epsilon-insensitive loss, the representor predictor and MSE metrics
# Date: 04-03-2024

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

AFRIAT_TOL = 1e-6

### Errors

class CsvrError(Exception):
    """Base error of the toolkit. The category is what the command line prints."""
    category = 'error'
    exit_code = 1

class InvalidArgumentError(CsvrError, ValueError):
    category = 'invalid-argument'
    exit_code = 2

class DimensionMismatchError(InvalidArgumentError):
    category = 'dimension-mismatch'
    exit_code = 4

class DataFormatError(CsvrError, ValueError):
    category = 'data-format'
    exit_code = 3

class SolverError(CsvrError, RuntimeError):
    category = 'solver'
    exit_code = 5

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution

class SelectionError(CsvrError):
    category = 'selection'
    exit_code = 6

def _as_finite_array(values, name, ndim):
    arr = np.array(values, dtype=float, ndmin=ndim)
    if arr.ndim != ndim:
        raise InvalidArgumentError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr

### Domain types

@dataclass(frozen=True, eq=False)
class Dataset:
    """Design matrix x (n rows, d columns) and response vector y."""
    x: np.ndarray
    y: np.ndarray
    feature_names: tuple = None
    response_name: str = None

    def __post_init__(self):
        x = self.x
        if np.ndim(x) == 1:
            x = np.reshape(x, (-1, 1))
        x = _as_finite_array(x, 'x', 2)
        y = _as_finite_array(np.ravel(self.y), 'y', 1)
        if x.shape[0] < 1 or x.shape[1] < 1:
            raise InvalidArgumentError(f"dataset needs n >= 1 and d >= 1, got shape {x.shape}")
        if len(y) != x.shape[0]:
            raise DimensionMismatchError(f"y has length {len(y)} but x has {x.shape[0]} rows")
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'y', y)
        if self.feature_names is not None:
            names = tuple(str(name) for name in self.feature_names)
            if len(names) != x.shape[1]:
                raise DimensionMismatchError(f"{len(names)} feature names for {x.shape[1]} columns")
            object.__setattr__(self, 'feature_names', names)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    def subset(self, indices):
        indices = np.asarray(indices, dtype=int)
        return Dataset(self.x[indices], self.y[indices], self.feature_names, self.response_name)

    def with_response(self, y):
        return Dataset(self.x, y, self.feature_names, self.response_name)


class Curvature(str, Enum):
    CONCAVE = 'concave'
    CONVEX = 'convex'

class Monotonicity(str, Enum):
    NONE = 'none'
    INCREASING = 'increasing'
    DECREASING = 'decreasing'

class PenaltyKind(str, Enum):
    SQUARED_L2 = 'squared_l2'
    L1 = 'l1'
    LINF = 'linf'
    NONE = 'none'


@dataclass(frozen=True)
class Shape:
    curvature: Curvature = Curvature.CONCAVE
    monotonicity: Monotonicity = Monotonicity.NONE
    homogeneous: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'curvature', Curvature(self.curvature))
        object.__setattr__(self, 'monotonicity', Monotonicity(self.monotonicity))
        object.__setattr__(self, 'homogeneous', bool(self.homogeneous))

    @property
    def is_concave(self) -> bool:
        return self.curvature == Curvature.CONCAVE

    def flipped(self):
        """Opposite curvature, used for the convex/concave duality on (x, -y)."""
        curvature = Curvature.CONVEX if self.is_concave else Curvature.CONCAVE
        return replace(self, curvature=curvature)

    def to_dict(self) -> dict:
        return {'curvature': self.curvature.value,
                'monotonicity': self.monotonicity.value,
                'homogeneous': self.homogeneous}

    @classmethod
    def from_dict(cls, values: dict):
        return cls(**values)


@dataclass(frozen=True)
class Hyperparams:
    """Margin epsilon, penalty C (A = 1/C in the penalized forms) and Lipschitz bound L."""
    epsilon: float = 0.1
    c: float = 1.0
    lipschitz_bound: float = None
    penalty_kind: PenaltyKind = PenaltyKind.SQUARED_L2

    def __post_init__(self):
        object.__setattr__(self, 'penalty_kind', PenaltyKind(self.penalty_kind))
        if not (np.isfinite(self.epsilon) and self.epsilon >= 0):
            raise InvalidArgumentError(f"epsilon must be finite and >= 0, got {self.epsilon}")
        if not (np.isfinite(self.c) and self.c > 0):
            raise InvalidArgumentError(f"c must be finite and > 0, got {self.c}")
        if self.lipschitz_bound is not None and not (np.isfinite(self.lipschitz_bound) and self.lipschitz_bound > 0):
            raise InvalidArgumentError(f"lipschitz_bound must be > 0 when given, got {self.lipschitz_bound}")

    @property
    def a(self) -> float:
        return 1.0 / self.c

    def to_dict(self) -> dict:
        return {'epsilon': float(self.epsilon), 'c': float(self.c),
                'lipschitz_bound': None if self.lipschitz_bound is None else float(self.lipschitz_bound),
                'penalty_kind': self.penalty_kind.value}

    @classmethod
    def from_dict(cls, values: dict):
        return cls(**values)


@dataclass(frozen=True)
class SolverReport:
    status: str
    objective: float
    iterations: int
    primal_residual: float
    dual_residual: float
    polished: bool = False
    runtime: float = 0.0
    backend: str = 'admm'

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True, eq=False)
class FittedModel:
    """Per-observation intercepts alpha (n,) and subgradients beta (n, d)."""
    alpha: np.ndarray
    beta: np.ndarray
    shape: Shape = field(default_factory=Shape)
    method_tag: str = ''
    hyperparams: Hyperparams = None
    solver_report: SolverReport = None

    def __post_init__(self):
        alpha = _as_finite_array(np.ravel(self.alpha), 'alpha', 1)
        beta = self.beta
        if np.ndim(beta) == 1:
            beta = np.reshape(beta, (1, -1) if len(alpha) == 1 else (-1, 1))
        beta = _as_finite_array(beta, 'beta', 2)
        if beta.shape[0] != len(alpha):
            raise DimensionMismatchError(f"{len(alpha)} intercepts but {beta.shape[0]} subgradient rows")
        object.__setattr__(self, 'alpha', alpha)
        object.__setattr__(self, 'beta', beta)

    @property
    def n(self) -> int:
        return len(self.alpha)

    @property
    def d(self) -> int:
        return self.beta.shape[1]

    def hyperplanes(self, x) -> np.ndarray:
        """Values of every affine piece at every row of x, shape (m, n)."""
        x = _check_points(x, self.d)
        return self.alpha[None, :] + x @ self.beta.T

    def fitted_values(self, x) -> np.ndarray:
        """alpha_i + beta_i'x_i for the training rows x."""
        x = _check_points(x, self.d)
        if x.shape[0] != self.n:
            raise DimensionMismatchError(f"expected the {self.n} training rows, got {x.shape[0]}")
        return self.alpha + np.sum(self.beta * x, axis=1)

    def predict(self, x) -> np.ndarray:
        values = self.hyperplanes(x)
        if self.shape.is_concave:
            return values.min(axis=1)
        return values.max(axis=1)

    def residuals(self, data: Dataset) -> np.ndarray:
        return data.y - self.fitted_values(data.x)


def _check_points(x, d):
    x = np.array(x, dtype=float)
    if x.ndim == 1:
        x = x.reshape(1, -1) if d > 1 or x.size == 1 else x.reshape(-1, 1)
    if x.ndim != 2 or x.shape[1] != d:
        raise DimensionMismatchError(f"model has d={d} covariates, got points of shape {np.shape(x)}")
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("points contain non-finite entries")
    return x

### Operations

def eps_loss(residual, epsilon):
    """Epsilon-insensitive loss max(|r| - epsilon, 0), elementwise for arrays."""
    r = np.asarray(residual, dtype=float)
    if not np.all(np.isfinite(r)):
        raise InvalidArgumentError("residual must be finite")
    if not (np.isfinite(epsilon) and epsilon >= 0):
        raise InvalidArgumentError(f"epsilon must be finite and >= 0, got {epsilon}")
    loss = np.maximum(np.abs(r) - epsilon, 0.0)
    if loss.ndim == 0:
        return float(loss)
    return loss

def predict(model: FittedModel, x):
    """Representor function: min (concave) or max (convex) of the fitted hyperplanes.

    A single point of length d gives a float, a matrix of points gives an array.
    """
    x_arr = np.asarray(x, dtype=float)
    single = x_arr.ndim == 0 or (x_arr.ndim == 1 and (model.d > 1 or x_arr.size == 1))
    if single and x_arr.size != model.d:
        raise DimensionMismatchError(f"model has d={model.d} covariates, got a point of length {x_arr.size}")
    values = model.predict(x_arr.reshape(1, -1) if single else x_arr)
    return float(values[0]) if single else values

def mse(predictions, targets) -> float:
    predictions = np.ravel(np.asarray(predictions, dtype=float))
    targets = np.ravel(np.asarray(targets, dtype=float))
    if len(predictions) == 0 or len(targets) == 0:
        raise InvalidArgumentError("mse needs at least one value")
    if len(predictions) != len(targets):
        raise DimensionMismatchError(f"mse got {len(predictions)} predictions for {len(targets)} targets")
    return float(np.mean((predictions - targets)**2))

def mse_true(model: FittedModel, x, true_values) -> float:
    """MSE against the noiseless regression function (simulations)."""
    return mse(model.predict(x), true_values)

def mse_observed(model: FittedModel, data: Dataset) -> float:
    """MSE against the observed responses (cross-validation and applied data)."""
    return mse(model.predict(data.x), data.y)

def afriat_violation(model: FittedModel, x) -> float:
    """Largest violation of the Afriat inequalities at the training points x."""
    values = model.hyperplanes(x)
    if values.shape[0] != model.n:
        raise DimensionMismatchError(f"expected the {model.n} training rows, got {values.shape[0]}")
    own = np.diag(values)
    if model.shape.is_concave:
        gaps = own[:, None] - values
    else:
        gaps = values - own[:, None]
    return float(max(gaps.max(), 0.0))

def check_feasibility(model: FittedModel, x, tol: float = AFRIAT_TOL) -> dict:
    """Afriat, monotonicity and homogeneity checks of a fitted model."""
    report = {'afriat': afriat_violation(model, x)}
    if model.shape.monotonicity == Monotonicity.INCREASING:
        report['monotonicity'] = float(max(-model.beta.min(), 0.0))
    elif model.shape.monotonicity == Monotonicity.DECREASING:
        report['monotonicity'] = float(max(model.beta.max(), 0.0))
    if model.shape.homogeneous:
        report['homogeneity'] = float(np.abs(model.alpha).max())
    report['feasible'] = all(value <= tol for value in report.values())
    return report
