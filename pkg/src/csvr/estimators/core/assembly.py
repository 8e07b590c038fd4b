# Description: Sparse assembly of the regression programs (Afriat system, margins, shape rows)
# Date: 11-03-2024

import numpy as np
import scipy.sparse as spspa

from ...core import Monotonicity
from ...solver import BallBlock, ConicProgram


class ProgramBuilder():
    """
    Collects variable blocks, constraint rows (as coordinate triplets) and
    cost terms, then emits one ConicProgram. Row indices passed to
    add_rows() are local to the call.
    """

    def __init__(self) -> None:
        self.blocks = {}
        self.num_vars = 0
        self.num_rows = 0
        self._rows, self._cols, self._vals = [], [], []
        self._lower, self._upper = [], []
        self._p_diag = {}
        self._q = {}
        self._balls = []

    def add_block(self, name, size) -> slice:
        block = slice(self.num_vars, self.num_vars + int(size))
        self.blocks[name] = block
        self.num_vars += int(size)
        return block

    def index(self, name, offsets=None) -> np.ndarray:
        block = self.blocks[name]
        idx = np.arange(block.start, block.stop)
        return idx if offsets is None else idx[offsets]

    def add_rows(self, rows, cols, vals, lower, upper) -> None:
        rows = np.asarray(rows, dtype=int)
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        count = int(rows.max()) + 1 if len(rows) else max(len(lower), len(upper))
        self._rows.append(rows + self.num_rows)
        self._cols.append(np.asarray(cols, dtype=int))
        self._vals.append(np.asarray(vals, dtype=float))
        self._lower.append(np.broadcast_to(lower, (count,)))
        self._upper.append(np.broadcast_to(upper, (count,)))
        self.num_rows += count

    def add_quadratic(self, indices, weight) -> None:
        for i in np.atleast_1d(indices):
            self._p_diag[int(i)] = self._p_diag.get(int(i), 0.0) + weight

    def add_linear(self, indices, weight) -> None:
        for i in np.atleast_1d(indices):
            self._q[int(i)] = self._q.get(int(i), 0.0) + weight

    def add_ball(self, indices, radius) -> None:
        self._balls.append(BallBlock(indices, radius))

    def build(self) -> ConicProgram:
        n = self.num_vars
        if self._rows:
            rows = np.concatenate(self._rows)
            cols = np.concatenate(self._cols)
            vals = np.concatenate(self._vals)
            keep = vals != 0.0
            a = spspa.csc_matrix((vals[keep], (rows[keep], cols[keep])), shape=(self.num_rows, n))
            l = np.concatenate(self._lower)
            u = np.concatenate(self._upper)
        else:
            a, l, u = spspa.csc_matrix((0, n)), np.zeros(0), np.zeros(0)

        diag = np.zeros(n)
        for i, w in self._p_diag.items():
            diag[i] = w
        q = np.zeros(n)
        for i, w in self._q.items():
            q[i] = w
        nz = np.nonzero(diag)[0]
        p = spspa.csc_matrix((diag[nz], (nz, nz)), shape=(n, n))
        return ConicProgram(p, q, a, l, u,
                            ball_blocks=tuple(self._balls), var_names=dict(self.blocks))


### Row families. alpha_of / beta_of map observation i to the alpha index and
### the row of the (pieces x d) beta block it uses.

def fitted_value_terms(builder, x, alpha_of=None, beta_of=None):
    """Triplets (local row, col, value) of alpha_{a(i)} + beta_{b(i)}'x_i, one row per observation."""
    n, d = x.shape
    alpha_of = np.arange(n) if alpha_of is None else np.asarray(alpha_of)
    beta_of = np.arange(n) if beta_of is None else np.asarray(beta_of)
    alpha_idx = builder.index('alpha', alpha_of)
    beta_idx = builder.index('beta').reshape(-1, d)[beta_of]
    rows = np.concatenate([np.arange(n), np.repeat(np.arange(n), d)])
    cols = np.concatenate([alpha_idx, beta_idx.ravel()])
    vals = np.concatenate([np.ones(n), x.ravel()])
    return rows, cols, vals

def add_regression_rows(builder, x, y, residual_block='residual'):
    """alpha_i + beta_i'x_i + e_i = y_i."""
    n = len(y)
    rows, cols, vals = fitted_value_terms(builder, x)
    rows = np.concatenate([rows, np.arange(n)])
    cols = np.concatenate([cols, builder.index(residual_block)])
    vals = np.concatenate([vals, np.ones(n)])
    builder.add_rows(rows, cols, vals, y, y)

def add_margin_rows(builder, x, y, epsilon, alpha_of=None, beta_of=None):
    """Soft margin: y_i - f_i <= epsilon + xi_i and f_i - y_i <= epsilon + xi*_i, slacks >= 0."""
    n = len(y)
    rows, cols, vals = fitted_value_terms(builder, x, alpha_of, beta_of)
    xi, xi_star = builder.index('xi'), builder.index('xi_star')

    builder.add_rows(np.concatenate([rows, np.arange(n)]), np.concatenate([cols, xi]),
                     np.concatenate([vals, np.ones(n)]), y - epsilon, np.inf)
    builder.add_rows(np.concatenate([rows, np.arange(n)]), np.concatenate([cols, xi_star]),
                     np.concatenate([vals, -np.ones(n)]), -np.inf, y + epsilon)
    builder.add_rows(np.arange(2 * n), np.concatenate([xi, xi_star]), np.ones(2 * n), 0.0, np.inf)

def add_afriat_rows(builder, x, concave=True):
    """All ordered pairs i != h: alpha_i + beta_i'x_i <= alpha_h + beta_h'x_i (>= for convex)."""
    n, d = x.shape
    if n < 2:
        return
    own, other = np.nonzero(~np.eye(n, dtype=bool))
    m = len(own)
    alpha = builder.index('alpha')
    beta = builder.index('beta').reshape(n, d)
    xi = x[own]
    row = np.arange(m)
    rows = np.concatenate([row, row, np.repeat(row, d), np.repeat(row, d)])
    cols = np.concatenate([alpha[own], alpha[other], beta[own].ravel(), beta[other].ravel()])
    vals = np.concatenate([np.ones(m), -np.ones(m), xi.ravel(), -xi.ravel()])
    if concave:
        builder.add_rows(rows, cols, vals, np.full(m, -np.inf), 0.0)
    else:
        builder.add_rows(rows, cols, vals, np.zeros(m), np.inf)

def add_monotonicity_rows(builder, monotonicity):
    if monotonicity == Monotonicity.NONE:
        return
    beta = builder.index('beta')
    k = len(beta)
    if monotonicity == Monotonicity.INCREASING:
        builder.add_rows(np.arange(k), beta, np.ones(k), np.zeros(k), np.inf)
    else:
        builder.add_rows(np.arange(k), beta, np.ones(k), np.full(k, -np.inf), 0.0)

def add_homogeneity_rows(builder):
    alpha = builder.index('alpha')
    k = len(alpha)
    builder.add_rows(np.arange(k), alpha, np.ones(k), np.zeros(k), np.zeros(k))

def add_shape_rows(builder, x, shape):
    add_afriat_rows(builder, x, concave=shape.is_concave)
    add_monotonicity_rows(builder, shape.monotonicity)
    if shape.homogeneous:
        add_homogeneity_rows(builder)

def add_norm_bound_rows(builder, d, per_coordinate=True):
    """t >= |beta| elementwise (L1) or t_i >= |beta_ij| for all j (L-infinity)."""
    beta = builder.index('beta').reshape(-1, d)
    n = beta.shape[0]
    t = builder.index('t')
    t_cols = t if per_coordinate else np.repeat(t, d)
    k = n * d
    for sign in (1.0, -1.0):
        rows = np.concatenate([np.arange(k), np.arange(k)])
        cols = np.concatenate([t_cols, beta.ravel()])
        vals = np.concatenate([np.ones(k), np.full(k, sign)])
        builder.add_rows(rows, cols, vals, np.zeros(k), np.inf)
