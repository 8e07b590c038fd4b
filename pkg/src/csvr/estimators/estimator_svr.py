# Description: Linear support vector regression (soft margin primal)
# Date: 13-03-2024

import numpy as np

from ..core import Dataset, FittedModel, Hyperparams, Monotonicity
from .core.assembly import ProgramBuilder, add_homogeneity_rows, add_margin_rows, add_monotonicity_rows
from .core.estimator import EstimatorClass

class LinearSVR(EstimatorClass):
    """One global (alpha, beta) minimizing 1/2||beta||^2 + C sum(xi + xi*).

    The fitted model repeats that pair on n rows so it predicts like every
    other estimator. Curvature has no effect on an affine function.
    """

    @staticmethod
    def name() -> str:
        return 'svr'

    def pieces(self):
        n = self.data.n
        return np.zeros(n, dtype=int), np.zeros(n, dtype=int)

    def build_program(self):
        x, y = self.data.x, self.data.y
        n, d = x.shape
        hp = self.hyperparams
        builder = ProgramBuilder()
        builder.add_block('alpha', 1)
        builder.add_block('beta', d)
        builder.add_block('xi', n)
        builder.add_block('xi_star', n)

        alpha_of, beta_of = self.pieces()
        add_margin_rows(builder, x, y, hp.epsilon, alpha_of, beta_of)
        if self.shape.monotonicity != Monotonicity.NONE:
            add_monotonicity_rows(builder, self.shape.monotonicity)
        if self.shape.homogeneous:
            add_homogeneity_rows(builder)
        builder.add_quadratic(builder.index('beta'), 1.0)
        builder.add_linear(np.concatenate([builder.index('xi'), builder.index('xi_star')]), hp.c)
        return builder.build()

def fit_svr(data: Dataset, hp: Hyperparams = None, shape=None, config=None, backend=None, verbose=False) -> FittedModel:
    return LinearSVR(data, shape, hp, config, backend, verbose).fit()
