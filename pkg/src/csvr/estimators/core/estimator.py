# Description: Abstract estimator class and the estimator specification
# Date: 11-03-2024

import sys
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from ...core import (AFRIAT_TOL, Dataset, FittedModel, Hyperparams, InvalidArgumentError, PenaltyKind,
                     Shape, SolverError, SolverReport, check_feasibility)
from ...solver import ConicProgram, SolverConfig, SolverSolution, solve


class Method(str, Enum):
    CR = 'cr'
    LCR = 'lcr'
    SVR = 'svr'
    CSVR = 'csvr'
    CSVR_L1 = 'csvr_l1'
    CSVR_LINF = 'csvr_linf'
    CSVR_PENALIZED = 'csvr_penalized'

LASSO_PENALTIES = {Method.CSVR_L1: PenaltyKind.L1, Method.CSVR_LINF: PenaltyKind.LINF}


@dataclass(frozen=True)
class EstimatorSpec:
    """Which formulation to fit, under which shape, with which hyperparameters.

    A CSVR spec whose penalty_kind is L1 or LINF is the corresponding Lasso
    method, and the Lasso methods always carry their own penalty kind.
    """
    method: Method
    shape: Shape = field(default_factory=Shape)
    hyperparams: Hyperparams = field(default_factory=Hyperparams)

    def __post_init__(self):
        try:
            method = Method(self.method)
        except ValueError:
            raise InvalidArgumentError(f"unknown method '{self.method}', expected one of {[m.value for m in Method]}")
        hp = self.hyperparams if self.hyperparams is not None else Hyperparams()
        shape = self.shape if self.shape is not None else Shape()

        if method == Method.CSVR and hp.penalty_kind in (PenaltyKind.L1, PenaltyKind.LINF):
            method = Method.CSVR_L1 if hp.penalty_kind == PenaltyKind.L1 else Method.CSVR_LINF
        if method in LASSO_PENALTIES:
            hp = replace(hp, penalty_kind=LASSO_PENALTIES[method])
        if method == Method.LCR and hp.lipschitz_bound is None:
            raise InvalidArgumentError("method lcr requires a lipschitz_bound")

        object.__setattr__(self, 'method', method)
        object.__setattr__(self, 'shape', shape)
        object.__setattr__(self, 'hyperparams', hp)

    def with_hyperparams(self, **changes):
        return replace(self, hyperparams=replace(self.hyperparams, **changes))

    def to_dict(self) -> dict:
        return {'method': self.method.value, 'shape': self.shape.to_dict(),
                'hyperparams': self.hyperparams.to_dict()}

    @classmethod
    def from_dict(cls, values: dict):
        return cls(values['method'], Shape.from_dict(values.get('shape', {})),
                   Hyperparams.from_dict(values.get('hyperparams', {})))


class EstimatorClass(ABC):
    """
    The Estimator Class turns one regression formulation into a ConicProgram,
    hands it to a solver backend and unpacks (alpha, beta) into a FittedModel.
    """

    def __init__(
            self,
            data: Dataset,
            shape: Shape = None,
            hyperparams: Hyperparams = None,
            config: SolverConfig = None,
            backend=None,
            verbose: bool = False,
    ) -> None:
        if not isinstance(data, Dataset):
            raise InvalidArgumentError("estimators expect a Dataset")
        self.data = data
        self.shape = shape if shape is not None else Shape()
        self.hyperparams = hyperparams if hyperparams is not None else Hyperparams()
        self.config = config
        self.backend = backend
        self.verbose = verbose

        self.program = None
        self.solution = None

    @staticmethod
    @abstractmethod
    def name() -> str:
        """method tag stored on the fitted model"""
        pass

    @abstractmethod
    def build_program(self) -> ConicProgram:
        """Assemble the formulation for self.data."""
        pass

    ### Hooks
    def pieces(self):
        """(alpha_of, beta_of): which alpha entry and beta row observation i uses."""
        n = self.data.n
        return np.arange(n), np.arange(n)

    def fit(self) -> FittedModel:
        self.program = self.build_program()
        if self.verbose:
            print(f"csvr: fitting {self.name()} with n = {self.data.n}, d = {self.data.d}, "
                  f"{self.program.num_vars} variables and {self.program.num_rows} rows", file=sys.stderr)
        self.solution = solve(self.program, self.config, self.backend)
        if not self.solution.is_optimal:
            raise SolverError(f"{self.name()} fit ended with status '{self.solution.status.value}' after "
                              f"{self.solution.iterations} iterations (primal residual {self.solution.primal_residual:.3e}, "
                              f"dual residual {self.solution.dual_residual:.3e})", solution=self.solution)
        model = self.unpack(self.solution)
        config = self.config if self.config is not None else SolverConfig()
        report = check_feasibility(model, self.data.x, max(AFRIAT_TOL, config.eps_abs))
        if not report['feasible']:
            violations = ', '.join(f"{key} {value:.3e}" for key, value in report.items() if key != 'feasible')
            raise SolverError(f"{self.name()} fit reported optimal but breaks the shape constraints ({violations})",
                              solution=self.solution)
        return model

    def unpack(self, solution: SolverSolution) -> FittedModel:
        d = self.data.d
        alpha_of, beta_of = self.pieces()
        alpha = self.program.block('alpha', solution.z)[alpha_of]
        beta = self.program.block('beta', solution.z).reshape(-1, d)[beta_of]
        report = SolverReport(status=solution.status.value, objective=float(solution.objective),
                              iterations=int(solution.iterations),
                              primal_residual=float(solution.primal_residual),
                              dual_residual=float(solution.dual_residual),
                              polished=bool(solution.polished), runtime=float(solution.runtime),
                              backend=solution.backend)
        return FittedModel(alpha, beta, shape=self.shape, method_tag=self.name(),
                           hyperparams=self.hyperparams, solver_report=report)
