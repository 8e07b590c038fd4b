# Description: JSON model archive, fitted hyperplanes plus the metadata needed to reuse them
# Date: 25-03-2024

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from ..core import DataFormatError, FittedModel, Hyperparams, Shape, SolverReport

ARCHIVE_FORMAT = 'csvr-model'

def schema_fingerprint(feature_names, response_name) -> str:
    """sha256 over the ordered feature names and the response name."""
    payload = json.dumps({'features': list(feature_names or []), 'response': response_name})
    return hashlib.sha256(payload.encode('utf-8')).hexdigest()


@dataclass(frozen=True, eq=False)
class ModelArchive:
    model: FittedModel
    feature_names: tuple = None
    response_name: str = None
    standardization: dict = None
    version: str = None

    @property
    def fingerprint(self) -> str:
        return schema_fingerprint(self.feature_names, self.response_name)

    def to_dict(self) -> dict:
        from .. import __version__
        model = self.model
        return {'format': ARCHIVE_FORMAT,
                'version': self.version or __version__,
                'method_tag': model.method_tag,
                'shape': model.shape.to_dict(),
                'hyperparams': model.hyperparams.to_dict() if model.hyperparams is not None else None,
                'n': model.n,
                'd': model.d,
                'alpha': model.alpha.tolist(),
                'beta': model.beta.tolist(),
                'feature_names': list(self.feature_names) if self.feature_names is not None else None,
                'response_name': self.response_name,
                'schema_fingerprint': self.fingerprint,
                'standardization': self.standardization,
                'solver_report': model.solver_report.to_dict() if model.solver_report is not None else None}

    @classmethod
    def from_dict(cls, values: dict):
        if values.get('format') != ARCHIVE_FORMAT:
            raise DataFormatError("not a csvr model archive")
        try:
            d = int(values['d'])
            beta = np.array(values['beta'], dtype=float).reshape(int(values['n']), d)
            hp = values.get('hyperparams')
            report = values.get('solver_report')
            model = FittedModel(np.array(values['alpha'], dtype=float), beta,
                                shape=Shape.from_dict(values['shape']),
                                method_tag=values.get('method_tag', ''),
                                hyperparams=Hyperparams.from_dict(hp) if hp is not None else None,
                                solver_report=SolverReport(**report) if report is not None else None)
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"malformed model archive: {exc}") from exc
        names = values.get('feature_names')
        archive = cls(model, tuple(names) if names is not None else None, values.get('response_name'),
                      values.get('standardization'), values.get('version'))
        stored = values.get('schema_fingerprint')
        if stored is not None and stored != archive.fingerprint:
            raise DataFormatError("model archive fingerprint does not match its feature names")
        return archive

def save_model(archive: ModelArchive, path) -> None:
    with open(path, 'w') as fp:
        json.dump(archive.to_dict(), fp, indent=2)

def load_model(path) -> ModelArchive:
    try:
        with open(path, 'r') as fp:
            values = json.load(fp)
    except OSError as exc:
        raise DataFormatError(f"cannot read model archive {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"model archive {path} is not valid JSON: {exc}") from exc
    return ModelArchive.from_dict(values)
