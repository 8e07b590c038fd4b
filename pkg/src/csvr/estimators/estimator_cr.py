# Description: Convex regression by least squares under the Afriat system
# Date: 12-03-2024

from ..core import Dataset, FittedModel, Shape
from .core.assembly import ProgramBuilder, add_regression_rows, add_shape_rows
from .core.estimator import EstimatorClass

class ConvexRegression(EstimatorClass):
    """Minimizes 1/2 sum e_i^2 subject to y_i = alpha_i + beta_i'x_i + e_i and
    the Afriat inequalities of the requested shape. Only the fitted values are
    unique, the subgradients generally are not.
    """

    @staticmethod
    def name() -> str:
        return 'cr'

    def assemble(self) -> ProgramBuilder:
        x, y = self.data.x, self.data.y
        n, d = x.shape
        builder = ProgramBuilder()
        builder.add_block('alpha', n)
        builder.add_block('beta', n * d)
        builder.add_block('residual', n)

        add_regression_rows(builder, x, y)
        add_shape_rows(builder, x, self.shape)
        builder.add_quadratic(builder.index('residual'), 1.0)
        return builder

    def build_program(self):
        return self.assemble().build()

def fit_cr(data: Dataset, shape: Shape = None, config=None, backend=None, verbose=False) -> FittedModel:
    return ConvexRegression(data, shape, None, config, backend, verbose).fit()
