import glob
import importlib
import os
from os.path import basename, dirname, join

from ..core import Dataset, FittedModel, InvalidArgumentError
from .core.estimator import EstimatorClass, EstimatorSpec, Method
from .estimator_cr import fit_cr
from .estimator_csvr import fit_csvr, fit_csvr_penalized
from .estimator_lasso_csvr import fit_csvr_l1, fit_csvr_linf
from .estimator_lcr import fit_lcr
from .estimator_svr import fit_svr


def load_estimators():
    """Map of method tag to estimator class, found in the estimator_*.py modules."""
    loaded_estimators = {}
    estimator_files = glob.glob(join(dirname(__file__), "estimator_*.py"))

    for estimator_file in sorted(estimator_files):
        module_name = __name__ + '.' + os.path.splitext(basename(estimator_file))[0]
        module = importlib.import_module(module_name)

        for attribute_name in dir(module):
            attribute = getattr(module, attribute_name)
            if (
                isinstance(attribute, type)
                and issubclass(attribute, EstimatorClass)
                and attribute != EstimatorClass
            ):
                loaded_estimators[attribute.name()] = attribute
    return loaded_estimators

def make_estimator(data: Dataset, spec: EstimatorSpec, config=None, backend=None, verbose=False) -> EstimatorClass:
    estimators = load_estimators()
    if spec.method.value not in estimators:
        raise InvalidArgumentError(f"no estimator registered for method '{spec.method.value}'")
    return estimators[spec.method.value](data, spec.shape, spec.hyperparams, config, backend, verbose)

def fit(data: Dataset, spec: EstimatorSpec, config=None, backend=None, verbose=False) -> FittedModel:
    """Fit the estimator named by spec.method."""
    return make_estimator(data, spec, config, backend, verbose).fit()
