__version__ = "0.1.0"

from .core import (AFRIAT_TOL, CsvrError, Curvature, DataFormatError, Dataset, DimensionMismatchError,
                   FittedModel, Hyperparams, InvalidArgumentError, Monotonicity, PenaltyKind, SelectionError,
                   Shape, SolverError, SolverReport, afriat_violation, check_feasibility, eps_loss, mse,
                   mse_observed, mse_true, predict)
from .estimators import (EstimatorSpec, Method, fit, fit_cr, fit_csvr, fit_csvr_l1, fit_csvr_linf,
                         fit_csvr_penalized, fit_lcr, fit_svr, load_estimators)
from .model_selection import CvGrid, CvResult, cross_validate, tune_and_fit
