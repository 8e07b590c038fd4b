# Description: Lasso CSVR, epsilon-insensitive loss with an L1 or L-infinity penalty on the subgradients
# Date: 14-03-2024

from dataclasses import replace

import numpy as np

from ..core import Dataset, FittedModel, Hyperparams, PenaltyKind, Shape
from .core.assembly import add_norm_bound_rows
from .estimator_csvr import ConvexSVR

class LassoConvexSVR(ConvexSVR):
    """minimize sum (xi_i + xi*_i) + A/2 sum ||beta_i||_1 with A = 1/C.

    Linear program: t_ij >= |beta_ij| through the rows t - beta >= 0 and
    t + beta >= 0.
    """

    per_coordinate = True

    @staticmethod
    def name() -> str:
        return 'csvr_l1'

    def build_program(self):
        builder = self.assemble()
        n, d = self.data.n, self.data.d
        builder.add_block('t', n * d if self.per_coordinate else n)
        add_norm_bound_rows(builder, d, per_coordinate=self.per_coordinate)
        builder.add_linear(np.concatenate([builder.index('xi'), builder.index('xi_star')]), 1.0)
        builder.add_linear(builder.index('t'), self.hyperparams.a / 2.0)
        return builder.build()


class LinfLassoConvexSVR(LassoConvexSVR):
    """Same loss with A/2 sum ||beta_i||_inf, one bound t_i per observation."""

    per_coordinate = False

    @staticmethod
    def name() -> str:
        return 'csvr_linf'

def fit_csvr_l1(data: Dataset, shape: Shape = None, hp: Hyperparams = None, config=None, backend=None, verbose=False) -> FittedModel:
    hp = replace(hp if hp is not None else Hyperparams(), penalty_kind=PenaltyKind.L1)
    return LassoConvexSVR(data, shape, hp, config, backend, verbose).fit()

def fit_csvr_linf(data: Dataset, shape: Shape = None, hp: Hyperparams = None, config=None, backend=None, verbose=False) -> FittedModel:
    hp = replace(hp if hp is not None else Hyperparams(), penalty_kind=PenaltyKind.LINF)
    return LinfLassoConvexSVR(data, shape, hp, config, backend, verbose).fit()
