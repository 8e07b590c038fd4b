import json
import os
import sys

import click
import numpy as np
import pandas as pd
from click import Path, argument, option

from . import __version__
from .core import (CsvrError, DimensionMismatchError, Hyperparams, InvalidArgumentError, Shape,
                   check_feasibility, mse_observed)
from .estimators import EstimatorSpec, Method, fit as fit_model, make_estimator
from .model_selection import CvGrid, cross_validate, tune_and_fit
from .solver import SolverConfig, dump_program, load_program, solve
from .utils.archive import ModelArchive, load_model, save_model
from .utils.console_output import format_row, format_table
from .utils.dataio import CsvSchema, describe as describe_frame, load_csv, numeric_frame, read_frame, split, standardize, unstandardize_model


class CsvrGroup(click.Group):
    """Turns every toolkit error into one 'error[<category>]: <message>' line on stderr."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except CsvrError as exc:
            click.echo(f"error[{exc.category}]: {exc}", err=True)
            ctx.exit(exc.exit_code)


def _split_list(text):
    if text is None:
        return None
    return tuple(item.strip() for item in text.split(',') if item.strip())

def _float_list(text):
    return tuple(float(item) for item in _split_list(text))

def schema_options(func):
    func = option("--response", "-y", default="-1", show_default=True, help="Response column name or 0-based index.")(func)
    func = option("--features", "-x", default=None, help="Comma separated feature columns (default: all other numeric columns).")(func)
    func = option("--exclude", default=None, help="Comma separated columns to leave out, e.g. a dummy variable.")(func)
    func = option("--no-header", is_flag=True, default=False, help="The file has no header line.")(func)
    func = option("--delimiter", default=",", show_default=True, help="Field delimiter.")(func)
    return func

def estimator_options(func):
    func = option("--method", "-m", type=click.Choice([m.value for m in Method]), default='csvr', show_default=True)(func)
    func = option("--epsilon", "-e", type=float, default=0.1, show_default=True, help="Margin epsilon.")(func)
    func = option("--c", "-c", "c", type=float, default=1.0, show_default=True, help="Penalty C (A = 1/C in the penalized forms).")(func)
    func = option("--lipschitz-bound", "-L", type=float, default=None, help="Lipschitz bound L (lcr).")(func)
    func = option("--penalty", type=click.Choice(['squared_l2', 'l1', 'linf', 'none']), default='squared_l2', show_default=True)(func)
    func = option("--shape", type=click.Choice(['concave', 'convex']), default='concave', show_default=True)(func)
    func = option("--monotonicity", type=click.Choice(['none', 'increasing', 'decreasing']), default='none', show_default=True)(func)
    func = option("--homogeneous", is_flag=True, default=False, help="Force every intercept to zero.")(func)
    func = option("--backend", type=click.Choice(['admm', 'reference']), default='admm', show_default=True)(func)
    func = option("--max-iter", type=int, default=200000, show_default=True)(func)
    func = option("--verbose", "-v", is_flag=True, default=False)(func)
    return func

def grid_options(func):
    func = option("--c-values", default="0.1,0.5,1,2,5", show_default=True, help="C multipliers.")(func)
    func = option("--c-base", type=float, default=1.0, show_default=True, help="Base the C multipliers scale.")(func)
    func = option("--epsilon-values", default="0,0.001,0.01,0.1,0.2", show_default=True)(func)
    func = option("--l-values", default="0.1,0.25,0.5,1,2,5,10", show_default=True)(func)
    func = option("--folds", type=int, default=5, show_default=True)(func)
    func = option("--cv-seed", type=int, default=0, show_default=True)(func)
    func = option("--one-se", type=click.Choice(['smallest', 'largest']), default='smallest', show_default=True,
                  help="Which L the one standard error rule keeps.")(func)
    func = option("--n-jobs", type=int, default=1, show_default=True)(func)
    return func

def _schema(kw) -> CsvSchema:
    return CsvSchema(response_column=kw['response'], feature_columns=_split_list(kw['features']),
                     has_header=not kw['no_header'], delimiter=kw['delimiter'],
                     exclude_columns=_split_list(kw['exclude']) or ())

def _spec(kw, tuning=False) -> EstimatorSpec:
    lipschitz = kw['lipschitz_bound']
    if tuning and kw['method'] == 'lcr' and lipschitz is None:
        lipschitz = _float_list(kw['l_values'])[0] if kw.get('l_values') else None
    hp = Hyperparams(epsilon=kw['epsilon'], c=kw['c'], lipschitz_bound=lipschitz, penalty_kind=kw['penalty'])
    shape = Shape(kw['shape'], kw['monotonicity'], kw['homogeneous'])
    return EstimatorSpec(kw['method'], shape, hp)

def _grid(kw) -> CvGrid:
    return CvGrid(c_multipliers=_float_list(kw['c_values']), c_base=kw['c_base'],
                  epsilon_values=_float_list(kw['epsilon_values']), l_values=_float_list(kw['l_values']),
                  folds=kw['folds'], rng_seed=kw['cv_seed'], one_se_direction=kw['one_se'])

def _config(kw) -> SolverConfig:
    return SolverConfig(max_iter=kw['max_iter'], verbose=kw['verbose'])


@click.group(cls=CsvrGroup)
@click.version_option(version=__version__, prog_name='csvr')
def cli():
    """Shape-constrained regression: CR, LCR, SVR, CSVR and Lasso CSVR."""
    pass

@cli.command()
@argument("data", type=Path(exists=True, dir_okay=False))
@schema_options
@estimator_options
@grid_options
@option("--output", "-o", default="model.json", show_default=True, type=Path(dir_okay=False), help="Model archive to write.")
@option("--test-fraction", type=float, default=None, help="Hold out this fraction for an out-of-sample MSE.")
@option("--seed", type=int, default=0, show_default=True, help="Seed of the train/test split.")
@option("--tune", is_flag=True, default=False, help="Cross-validate the hyperparameters before the final fit.")
@option("--standardize", "standardize_features", is_flag=True, default=False, help="Fit on standardized features, archive raw-unit hyperplanes.")
def fit(data, output, test_fraction, seed, tune, standardize_features, **kw):
    """Fit an estimator to a CSV file and write a model archive."""
    dataset = load_csv(data, _schema(kw))
    spec, config = _spec(kw, tuning=tune), _config(kw)
    train, test = split(dataset, test_fraction, seed) if test_fraction is not None else (dataset, None)

    scaling = None
    fit_data = train
    if standardize_features:
        if spec.shape.homogeneous:
            raise InvalidArgumentError("--standardize cannot be combined with --homogeneous (centering moves the origin)")
        fit_data, mean, scale = standardize(train)
        scaling = {'mean': mean.tolist(), 'scale': scale.tolist()}

    cv = None
    if tune:
        model, cv = tune_and_fit(fit_data, spec, _grid(kw), config, kw['backend'], kw['n_jobs'], kw['verbose'])
    else:
        model = fit_model(fit_data, spec, config, kw['backend'], kw['verbose'])
    if scaling is not None:
        model = unstandardize_model(model, scaling['mean'], scaling['scale'])

    save_model(ModelArchive(model, dataset.feature_names, dataset.response_name, scaling), output)

    if cv is not None:
        click.echo(cv.format_output())
        click.echo()
    hp = model.hyperparams
    rows = [format_row("method", model.method_tag), format_row("epsilon", hp.epsilon), format_row("C", hp.c)]
    if hp.lipschitz_bound is not None:
        rows.append(format_row("Lipschitz bound L", hp.lipschitz_bound))
    rows.append(format_row("training observations", train.n))
    rows.append(format_row("in-sample MSE (observed y)", mse_observed(model, train)))
    if test is not None:
        rows.append(format_row("test observations", test.n))
        rows.append(format_row("out-of-sample MSE (observed y)", mse_observed(model, test)))
    report = model.solver_report
    rows.append(format_row("solver status", report.status))
    rows.append(format_row("solver iterations", report.iterations))
    rows.append(format_row("Afriat violation", check_feasibility(model, train.x)['afriat']))
    click.echo(format_table(f"csvr fit of {os.path.basename(data)}", rows))
    click.echo(f"csvr: model archive written to {output}", err=True)

@cli.command()
@argument("model", type=Path(exists=True, dir_okay=False))
@argument("data", type=Path(exists=True, dir_okay=False))
@option("--response", "-y", default=None, help="Column to ignore when the file also holds the response.")
@option("--no-header", is_flag=True, default=False)
@option("--delimiter", default=",", show_default=True)
@option("--output", "-o", default=None, type=Path(dir_okay=False), help="Predictions CSV (default: standard output).")
def predict(model, data, response, no_header, delimiter, output):
    """Predict with a model archive at the rows of a CSV file."""
    archive = load_model(model)
    frame = read_frame(data, not no_header, delimiter)
    header_lines = 0 if no_header else 1
    names = archive.feature_names
    if names is not None and all(name in frame.columns for name in names):
        columns = list(names)
    else:
        skip = {response, archive.response_name} - {None}
        columns = [c for c in frame.columns if str(c) not in skip]
    if len(columns) != archive.model.d:
        raise DimensionMismatchError(f"model expects d = {archive.model.d} features, {os.path.basename(data)} provides {len(columns)}")
    x = numeric_frame(frame, columns, header_lines).to_numpy()
    predictions = pd.DataFrame({'prediction': archive.model.predict(x)})
    if output is None:
        click.echo(predictions.to_csv(index=False, float_format='%.17g'), nl=False)
    else:
        predictions.to_csv(output, index=False, float_format='%.17g')
        click.echo(f"csvr: {len(predictions)} predictions written to {output}", err=True)

@cli.command()
@argument("data", type=Path(exists=True, dir_okay=False))
@schema_options
@estimator_options
@grid_options
@option("--json", "json_path", default=None, type=Path(dir_okay=False), help="Also write the result as JSON.")
def cv(data, json_path, **kw):
    """Cross-validate an estimator over a hyperparameter grid."""
    dataset = load_csv(data, _schema(kw))
    result = cross_validate(dataset, _spec(kw, tuning=True), _grid(kw), _config(kw), kw['backend'], kw['n_jobs'], kw['verbose'])
    click.echo(result.format_output())
    if json_path is not None:
        with open(json_path, 'w') as fp:
            json.dump(result.to_dict(), fp, indent=2)

@cli.command()
@argument("experiment", default="desk")
@option("--replicates", type=int, default=None, help="Override the replicate count of every scenario.")
@option("--n-jobs", type=int, default=1, show_default=True, help="Parallel replicates.")
@option("--backend", type=click.Choice(['admm', 'reference']), default='admm', show_default=True)
@option("--log", "log_path", default=None, type=Path(dir_okay=False), help="Per-replicate JSON-lines log.")
@option("--json", "json_path", default=None, type=Path(dir_okay=False), help="Also write the summary tables as JSON.")
@option("--verbose", "-v", is_flag=True, default=False)
def simulate(experiment, replicates, n_jobs, backend, log_path, json_path, verbose):
    """Run a simulation study from a preset name or a JSON/TOML file."""
    from .simulation import load_preset, run_study
    study = load_preset(experiment)
    if replicates is not None:
        study['replicates'] = replicates
        study['scenarios'] = [dict(s, replicates=replicates) for s in study.get('scenarios', [])]
    result = run_study(study, None, backend, n_jobs, verbose, log_path)
    click.echo(result.format_output())
    if json_path is not None:
        with open(json_path, 'w') as fp:
            json.dump(result.to_dict(), fp, indent=2)

@cli.command()
@argument("data", type=Path(exists=True, dir_okay=False))
@option("--no-header", is_flag=True, default=False)
@option("--delimiter", default=",", show_default=True)
def describe(data, no_header, delimiter):
    """Mean, standard deviation, min and max of every numeric column."""
    frame = read_frame(data, not no_header, delimiter)
    numeric = [c for c in frame.columns if pd.to_numeric(frame[c].str.strip(), errors='coerce').notna().any()]
    stats = describe_frame(numeric_frame(frame, numeric, 0 if no_header else 1))
    rows = [format_row(f"{name}  mean / std", stats.loc[name, 'mean'], stats.loc[name, 'std']) for name in stats.index]
    rows += [format_row(f"{name}  min / max", stats.loc[name, 'min'], stats.loc[name, 'max']) for name in stats.index]
    click.echo(format_table(f"describe {os.path.basename(data)} (n = {len(frame)})", rows,
                            header="column                                    value    value"))

@cli.command("oracle-check")
@argument("data", type=Path(exists=True, dir_okay=False), required=False)
@schema_options
@estimator_options
@option("--program", "program_path", default=None, type=Path(exists=True, dir_okay=False), help="Solve a dumped program instead of a CSV fit.")
@option("--dump", "dump_path", default=None, type=Path(dir_okay=False), help="Write the program in the text dump format.")
@option("--compare", is_flag=True, default=False, help="Solve with the ADMM and the reference backend and report the gap.")
def oracle_check(data, program_path, dump_path, compare, **kw):
    """Dump the conic program of a fit for external solvers, optionally cross-checking two backends."""
    if program_path is not None:
        program = load_program(program_path)
    elif data is not None:
        program = make_estimator(load_csv(data, _schema(kw)), _spec(kw)).build_program()
    else:
        raise InvalidArgumentError("give a CSV file or --program")
    if dump_path is not None:
        dump_program(program, dump_path)
        click.echo(f"csvr: program with {program.num_vars} variables and {program.num_rows} rows written to {dump_path}", err=True)
    if not compare:
        return
    config = _config(kw)
    admm = solve(program, config, 'admm')
    ref = solve(program, config, 'reference')
    gap = abs(admm.objective - ref.objective) / max(1.0, abs(ref.objective)) if admm.is_optimal and ref.is_optimal else np.nan
    rows = [format_row("admm status", admm.status.value), format_row("admm objective", admm.objective),
            format_row("reference status", ref.status.value), format_row("reference objective", ref.objective),
            format_row("relative objective gap", gap)]
    click.echo(format_table("oracle check", rows))

def cli_main(argv=None) -> int:
    """Run the CLI without exiting the interpreter, return the exit code."""
    try:
        code = cli.main(args=argv, prog_name='csvr', standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        return 1
    return code if isinstance(code, int) else 0

if __name__ == '__main__':
    sys.exit(cli_main())
