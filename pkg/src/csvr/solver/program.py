# Description: Canonical conic program handed to the solver backends
# Date: 05-03-2024

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as spspa

from ..core import InvalidArgumentError, DimensionMismatchError

SYMMETRY_TOL = 1e-9
PSD_CHECK_MAX_DIM = 2000


@dataclass(frozen=True, eq=False)
class BallBlock:
    """Requires ||z[indices]||_2 <= radius."""
    indices: np.ndarray
    radius: float

    def __post_init__(self):
        indices = np.asarray(self.indices, dtype=int).ravel()
        if len(indices) == 0:
            raise InvalidArgumentError("ball block needs at least one index")
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise InvalidArgumentError(f"ball radius must be > 0, got {self.radius}")
        object.__setattr__(self, 'indices', indices)
        object.__setattr__(self, 'radius', float(self.radius))


@dataclass(frozen=True, eq=False)
class ConicProgram:
    """minimize 1/2 z'Pz + q'z  subject to  l <= Az <= u  and  ||z[B]||_2 <= r for every ball block.

    var_names maps a block name ('alpha', 'beta', 'xi', 'xi_star', 't', ...) to
    the slice of z it occupies.
    """
    p: spspa.csc_matrix
    q: np.ndarray
    a: spspa.csc_matrix
    l: np.ndarray
    u: np.ndarray
    ball_blocks: tuple = ()
    var_names: dict = field(default_factory=dict)

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).ravel()
        nvar = len(q)
        p = spspa.csc_matrix(self.p, dtype=float)
        a = spspa.csc_matrix(self.a, dtype=float)
        if a.shape[1] != nvar and a.shape[0] == 0:
            a = spspa.csc_matrix((0, nvar))
        l = np.asarray(self.l, dtype=float).ravel()
        u = np.asarray(self.u, dtype=float).ravel()

        if p.shape != (nvar, nvar):
            raise DimensionMismatchError(f"P has shape {p.shape}, expected ({nvar}, {nvar})")
        if a.shape[1] != nvar:
            raise DimensionMismatchError(f"A has {a.shape[1]} columns, expected {nvar}")
        if len(l) != a.shape[0] or len(u) != a.shape[0]:
            raise DimensionMismatchError(f"bounds have lengths {len(l)}/{len(u)} for {a.shape[0]} rows")
        if not np.all(np.isfinite(q)) or not np.all(np.isfinite(p.data)) or not np.all(np.isfinite(a.data)):
            raise InvalidArgumentError("P, q and A must be finite")
        if np.any(np.isnan(l)) or np.any(np.isnan(u)):
            raise InvalidArgumentError("bounds must not be NaN")
        if np.any(l > u):
            rows = np.nonzero(l > u)[0]
            raise InvalidArgumentError(f"lower bound exceeds upper bound in rows {rows[:5].tolist()}")

        asym = abs(p - p.T)
        if asym.nnz and asym.max() > SYMMETRY_TOL:
            raise InvalidArgumentError("P is not symmetric")
        _check_psd(p)

        balls = tuple(self.ball_blocks)
        for ball in balls:
            if ball.indices.min() < 0 or ball.indices.max() >= nvar:
                raise DimensionMismatchError("ball block index out of range")

        object.__setattr__(self, 'p', p)
        object.__setattr__(self, 'q', q)
        object.__setattr__(self, 'a', a)
        object.__setattr__(self, 'l', l)
        object.__setattr__(self, 'u', u)
        object.__setattr__(self, 'ball_blocks', balls)
        object.__setattr__(self, 'var_names', dict(self.var_names))

    @property
    def num_vars(self) -> int:
        return len(self.q)

    @property
    def num_rows(self) -> int:
        return self.a.shape[0]

    def objective(self, z) -> float:
        z = np.asarray(z, dtype=float)
        return float(0.5 * z @ (self.p @ z) + self.q @ z)

    def block(self, name, z):
        return np.asarray(z)[self.var_names[name]]

    def constraint_violation(self, z) -> float:
        """Largest violation of the linear rows and ball blocks at z."""
        az = self.a @ z
        viol = np.concatenate([np.maximum(self.l - az, 0.0), np.maximum(az - self.u, 0.0), [0.0]])
        for ball in self.ball_blocks:
            viol = np.append(viol, np.linalg.norm(z[ball.indices]) - ball.radius)
        return float(max(viol.max(), 0.0))


def _check_psd(p):
    n = p.shape[0]
    if p.nnz == 0:
        return
    off = p - spspa.diags(p.diagonal())
    if off.nnz == 0 or not np.any(off.data):
        if p.diagonal().min() < -SYMMETRY_TOL:
            raise InvalidArgumentError("P is not positive semidefinite")
        return
    if n <= PSD_CHECK_MAX_DIM:
        dense = p.toarray()
        lowest = np.linalg.eigvalsh(0.5 * (dense + dense.T)).min()
        if lowest < -SYMMETRY_TOL * max(1.0, np.abs(dense).max()):
            raise InvalidArgumentError(f"P is not positive semidefinite (smallest eigenvalue {lowest:.3e})")


class SolverStatus(str, Enum):
    OPTIMAL = 'optimal'
    MAX_ITERATIONS = 'max_iterations'
    PRIMAL_INFEASIBLE = 'primal_infeasible'
    DUAL_INFEASIBLE = 'dual_infeasible'


@dataclass(frozen=True, eq=False)
class SolverSolution:
    z: np.ndarray
    objective: float
    status: SolverStatus
    iterations: int
    primal_residual: float
    dual_residual: float
    eps_primal: float = np.inf
    eps_dual: float = np.inf
    y: np.ndarray = None
    polished: bool = False
    runtime: float = 0.0
    backend: str = 'admm'

    @property
    def is_optimal(self) -> bool:
        return self.status == SolverStatus.OPTIMAL


@dataclass(frozen=True)
class SolverConfig:
    eps_abs: float = 1e-6
    eps_rel: float = 1e-6
    max_iter: int = 200000
    step_rho: float = 0.1
    over_relaxation: float = 1.6
    polish: bool = True
    adaptive_rho: bool = True
    adaptive_rho_interval: int = 50
    eps_prim_inf: float = 1e-5
    eps_dual_inf: float = 1e-5
    sigma: float = 1e-6
    scaling_iter: int = 10
    check_interval: int = 25
    polish_interval: int = 100
    polish_refine_iter: int = 10
    delta: float = 1e-6
    verbose: bool = False
    print_interval: int = 200
    fallback: bool = True

    def __post_init__(self):
        for name in ('eps_abs', 'eps_rel', 'step_rho', 'eps_prim_inf', 'eps_dual_inf', 'sigma', 'delta'):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be > 0")
        if self.max_iter < 1:
            raise InvalidArgumentError("max_iter must be >= 1")
        if not 1.0 < self.over_relaxation < 2.0:
            raise InvalidArgumentError("over_relaxation must lie in (1, 2)")
        if min(self.adaptive_rho_interval, self.check_interval, self.polish_interval) < 1:
            raise InvalidArgumentError("iteration intervals must be >= 1")
