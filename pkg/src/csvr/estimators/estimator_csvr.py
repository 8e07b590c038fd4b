# Description: Convex support vector regression, in the C form and in the penalized A = 1/C form
# Date: 13-03-2024

import numpy as np

from ..core import Dataset, FittedModel, Hyperparams, PenaltyKind, Shape
from .core.assembly import ProgramBuilder, add_margin_rows, add_shape_rows
from .core.estimator import EstimatorClass

class ConvexSVR(EstimatorClass):
    """
    minimize 1/2 sum ||beta_i||^2 + C sum (xi_i + xi*_i)

    subject to the soft margin rows, xi, xi* >= 0 and the Afriat system.
    With penalty_kind NONE the beta term is dropped and the program is the
    linear epsilon-insensitive convex regression (absolute loss when epsilon = 0).
    """

    @staticmethod
    def name() -> str:
        return 'csvr'

    def penalty_weights(self):
        """(weight on 1/2||beta||^2, weight on the slacks)."""
        return 1.0, self.hyperparams.c

    def assemble(self) -> ProgramBuilder:
        x, y = self.data.x, self.data.y
        n, d = x.shape
        builder = ProgramBuilder()
        builder.add_block('alpha', n)
        builder.add_block('beta', n * d)
        builder.add_block('xi', n)
        builder.add_block('xi_star', n)

        add_margin_rows(builder, x, y, self.hyperparams.epsilon)
        add_shape_rows(builder, x, self.shape)
        return builder

    def build_program(self):
        builder = self.assemble()
        beta_weight, slack_weight = self.penalty_weights()
        slacks = np.concatenate([builder.index('xi'), builder.index('xi_star')])
        if self.hyperparams.penalty_kind == PenaltyKind.NONE:
            builder.add_linear(slacks, 1.0)
        else:
            builder.add_quadratic(builder.index('beta'), beta_weight)
            builder.add_linear(slacks, slack_weight)
        return builder.build()


class PenalizedConvexSVR(ConvexSVR):
    """minimize sum eps_loss(y_i - f_i) + A/2 sum ||beta_i||^2 with A = 1/C.

    Same minimizers as the C form, objective scaled by 1/C.
    """

    @staticmethod
    def name() -> str:
        return 'csvr_penalized'

    def penalty_weights(self):
        return self.hyperparams.a, 1.0

def fit_csvr(data: Dataset, shape: Shape = None, hp: Hyperparams = None, config=None, backend=None, verbose=False) -> FittedModel:
    if hp is not None and hp.penalty_kind in (PenaltyKind.L1, PenaltyKind.LINF):
        from .estimator_lasso_csvr import fit_csvr_l1, fit_csvr_linf
        lasso = fit_csvr_l1 if hp.penalty_kind == PenaltyKind.L1 else fit_csvr_linf
        return lasso(data, shape, hp, config, backend, verbose)
    return ConvexSVR(data, shape, hp, config, backend, verbose).fit()

def fit_csvr_penalized(data: Dataset, shape: Shape = None, hp: Hyperparams = None, config=None, backend=None, verbose=False) -> FittedModel:
    return PenalizedConvexSVR(data, shape, hp, config, backend, verbose).fit()
