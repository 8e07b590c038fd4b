# Description: Lipschitz convex regression, convex regression with a norm ball on every subgradient
# Date: 12-03-2024

from ..core import Dataset, FittedModel, Hyperparams, InvalidArgumentError, Shape
from .core.assembly import ProgramBuilder
from .estimator_cr import ConvexRegression

class LipschitzConvexRegression(ConvexRegression):
    """Convex regression plus ||beta_i||_2 <= L for every observation."""

    @staticmethod
    def name() -> str:
        return 'lcr'

    def assemble(self) -> ProgramBuilder:
        bound = self.hyperparams.lipschitz_bound
        if bound is None:
            raise InvalidArgumentError("lcr requires hyperparams.lipschitz_bound")
        builder = super().assemble()
        beta = builder.index('beta').reshape(self.data.n, self.data.d)
        for row in beta:
            builder.add_ball(row, bound)
        return builder

def fit_lcr(data: Dataset, shape: Shape = None, hp: Hyperparams = None, config=None, backend=None, verbose=False) -> FittedModel:
    return LipschitzConvexRegression(data, shape, hp, config, backend, verbose).fit()
