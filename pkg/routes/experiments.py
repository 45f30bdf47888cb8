"""Experiment registry: expand a RunConfig into sweep points, compute them, write tables and a manifest."""
import concurrent.futures
import logging
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from models.chain_models import ModelParams, Schedule
from models.errors import BottleneckError, ConfigError, ParameterError
from spectrum.crossing import analytic_crossing, min_gap_scan
from spectrum.eigen import ground_state_energy
from cd.cost import time_averaged_cost
from cd.generators import CDMatrices, bare_gap_generator, cd_gap_generator
from dynamics.observables import evolve_observables, final_observables
from dynamics.propagation import DriveSpec
from analysis.fits import alpha_cd_table, fit_exponential
from data.results_io import emit_results, library_versions, utc_now, write_manifest
from schemas.run_config import RunConfig

logger = logging.getLogger(__name__)

Point = Dict[str, object]
Rows = List[dict]

SERIES_COLUMNS = ['L', 'T', 'cd_mode', 't', 'lambda', 'kinks', 'energy']


def default_jobs() -> int:
    """Worker count from BOTTLENECK_CD_JOBS, falling back to the number of logical cores"""
    raw = os.environ.get('BOTTLENECK_CD_JOBS', '')
    if not raw:
        return os.cpu_count() or 1
    try:
        jobs = int(raw)
    except ValueError:
        raise ConfigError(f"expected a positive integer, got {raw!r}", field='BOTTLENECK_CD_JOBS')
    if jobs < 1:
        raise ConfigError(f"expected a positive integer, got {jobs}", field='BOTTLENECK_CD_JOBS')
    return jobs


# ============== POINT COMPUTATIONS ==============

def _crossing_point(config: RunConfig, point: Point) -> Tuple[Rows, Rows]:
    crossing = analytic_crossing(ModelParams(ell=2, J=config.J, Jp=config.Jp))
    return [{'J': config.J, 'Jp': config.Jp, **crossing.to_dict()}], []


def _gap_point(config: RunConfig, point: Point) -> Tuple[Rows, Rows]:
    params = config.params(point['L'])
    scan = min_gap_scan(params, bare_gap_generator(params), n_grid=config.n_grid)
    return [{'L': params.L, 'lambda_star': scan.lam_star, 'delta_min': scan.delta_min}], []


def _gap_cd_point(config: RunConfig, point: Point) -> Tuple[Rows, Rows]:
    params = config.params(point['L'])
    generator = cd_gap_generator(params, point['cd_mode'], point['T'])
    scan = min_gap_scan(params, generator, n_grid=config.n_grid)
    return [{
        'L': params.L,
        'T': point['T'],
        'cd_mode': point['cd_mode'],
        'lambda_star': scan.lam_star,
        'delta_min': scan.delta_min,
    }], []


def _dynamics_point(config: RunConfig, point: Point) -> Tuple[Rows, Rows]:
    params = config.params(point['L'])
    spec = DriveSpec(
        cd_mode=point['cd_mode'],
        params=params,
        schedule=Schedule(point['T']),
        dt=config.dt,
        stepper=config.stepper,
        coefficient_grid=config.coefficient_grid,
    )
    final = final_observables(spec, check_convergence=config.check_convergence)
    row = {'L': params.L, 'T': point['T'], 'cd_mode': point['cd_mode'], **final.to_dict()}

    series: Rows = []
    if config.n_samples > 0:
        frame = evolve_observables(spec, config.n_samples).to_frame()
        for record in frame.to_dict("records"):
            series.append({'L': params.L, 'T': point['T'], 'cd_mode': point['cd_mode'], **record})
    return [row], series


def _cost_point(config: RunConfig, point: Point) -> Tuple[Rows, Rows]:
    params = config.params(point['L'])
    matrices = CDMatrices(params, point['cd_mode'])
    cost = time_averaged_cost(lambda lam, lam_dot: matrices.gamma(lam), Schedule(1.0))
    return [{'L': params.L, 'cd_mode': point['cd_mode'], 'cost': cost}], []


# ============== SWEEP EXPANSION ==============

def _single_point(config: RunConfig) -> List[Point]:
    return [{}]


def _size_points(config: RunConfig) -> List[Point]:
    return [{'L': L} for L in config.L_list]


def _size_time_mode_points(config: RunConfig) -> List[Point]:
    return [
        {'L': L, 'T': T, 'cd_mode': mode}
        for L in config.L_list
        for T in config.T_list
        for mode in config.cd_modes
    ]


def _size_mode_points(config: RunConfig) -> List[Point]:
    return [{'L': L, 'cd_mode': mode} for L in config.L_list for mode in config.cd_modes]


# ============== FIT SUMMARIES ==============

def _gap_fits(rows: Rows) -> dict:
    if len(rows) < 4:
        return {}
    try:
        fit = fit_exponential((row['L'], row['delta_min']) for row in rows)
    except ParameterError as exc:
        logger.warning("gap fit skipped: %s", exc)
        return {}
    return {'alpha_hat': fit.rate, 'alpha_stderr': fit.stderr, 'n_points': fit.n_points}


def _gap_cd_fits(rows: Rows) -> dict:
    try:
        table = alpha_cd_table(rows)
    except ParameterError as exc:
        logger.warning("alpha_cd fits skipped: %s", exc)
        return {}
    return {'alpha_cd': table.to_dict("records")}


@dataclass(frozen=True)
class Experiment:
    """Model representing one registered experiment"""
    name: str
    columns: Tuple[str, ...]
    points: Callable[[RunConfig], List[Point]]
    compute: Callable[[RunConfig, Point], Tuple[Rows, Rows]]
    fits: Optional[Callable[[Rows], dict]] = None


DYNAMICS_COLUMNS = ('L', 'T', 'cd_mode', 'kinks', 'excess_energy')

EXPERIMENTS: Dict[str, Experiment] = {
    'crossing-report': Experiment(
        'crossing-report',
        ('J', 'Jp', 'alpha', 'lambda_c', 'kappa_c', 'mu', 'eps_c', 'B_c'),
        _single_point,
        _crossing_point,
    ),
    'gap-scan': Experiment('gap-scan', ('L', 'lambda_star', 'delta_min'), _size_points, _gap_point, _gap_fits),
    'gap-cd-scan': Experiment(
        'gap-cd-scan',
        ('L', 'T', 'cd_mode', 'lambda_star', 'delta_min'),
        _size_time_mode_points,
        _gap_cd_point,
        _gap_cd_fits,
    ),
    'dynamics': Experiment('dynamics', DYNAMICS_COLUMNS, _size_time_mode_points, _dynamics_point),
    'qbcd-dynamics': Experiment('qbcd-dynamics', DYNAMICS_COLUMNS, _size_time_mode_points, _dynamics_point),
    'cost-scan': Experiment('cost-scan', ('L', 'cd_mode', 'cost'), _size_mode_points, _cost_point),
}


# ============== RUNNER ==============

@dataclass
class PointOutcome:
    """Result of one sweep point, successful or not"""
    index: int
    point: Point
    rows: Rows = field(default_factory=list)
    series: Rows = field(default_factory=list)
    wall_time: float = 0.0
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self):
        return {
            'index': self.index,
            'point': self.point,
            'status': 'ok' if self.ok else 'failed',
            'wall_time': self.wall_time,
            'error': self.error,
        }


@dataclass
class ExperimentRun:
    """Outcome of run_experiment: ordered point results plus written files"""
    config: RunConfig
    outcomes: List[PointOutcome]
    outputs: List[str]
    manifest_path: str
    fits: dict = field(default_factory=dict)

    @property
    def rows(self) -> Rows:
        return [row for outcome in self.outcomes for row in outcome.rows]

    @property
    def failures(self) -> List[PointOutcome]:
        return [outcome for outcome in self.outcomes if not outcome.ok]

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0


def run_point(config: RunConfig, index: int, point: Point) -> PointOutcome:
    """Compute one sweep point; failures are captured, never raised"""
    experiment = EXPERIMENTS[config.experiment]
    started = time.perf_counter()
    logger.info("%s point %d %s started", config.experiment, index, point)
    try:
        rows, series = experiment.compute(config, point)
    except (BottleneckError, ArithmeticError, ValueError, MemoryError) as exc:
        elapsed = time.perf_counter() - started
        logger.error("%s point %d %s failed: %s", config.experiment, index, point, exc)
        return PointOutcome(index, point, wall_time=elapsed, error=f"{type(exc).__name__}: {exc}")
    elapsed = time.perf_counter() - started
    logger.info("%s point %d finished in %.2fs", config.experiment, index, elapsed)
    return PointOutcome(index, point, rows, series, elapsed)


def _compute_points(config: RunConfig, points: List[Point], jobs: int) -> List[PointOutcome]:
    if jobs <= 1 or len(points) <= 1:
        return [run_point(config, i, p) for i, p in enumerate(points)]

    outcomes: List[Optional[PointOutcome]] = [None] * len(points)
    with concurrent.futures.ProcessPoolExecutor(max_workers=min(jobs, len(points))) as executor:
        futures = {executor.submit(run_point, config, i, p): i for i, p in enumerate(points)}
        for future in concurrent.futures.as_completed(futures):
            i = futures[future]
            try:
                outcomes[i] = future.result()
            except Exception as exc:  # worker crash, pickling failure
                logger.error("worker for point %d crashed: %s", i, exc)
                outcomes[i] = PointOutcome(i, points[i], error=f"{type(exc).__name__}: {exc}")
    return outcomes


def run_experiment(config: RunConfig, jobs: Optional[int] = None) -> ExperimentRun:
    """Run every sweep point, then write result tables and manifest.json in point order"""
    experiment = EXPERIMENTS[config.experiment]
    jobs = default_jobs() if jobs is None else jobs
    if jobs < 1:
        raise ConfigError(f"expected a positive integer, got {jobs}", field='jobs')

    os.makedirs(config.output_dir, exist_ok=True)
    started_at, started = utc_now(), time.perf_counter()
    points = experiment.points(config)
    logger.info("running %s: %d points on %d workers", config.experiment, len(points), jobs)

    outcomes = _compute_points(config, points, jobs)
    rows = [row for outcome in outcomes for row in outcome.rows]
    series = [row for outcome in outcomes for row in outcome.series]

    extension = 'json' if config.format == 'json' else 'csv'
    outputs = [
        emit_results(
            rows,
            config.format,
            os.path.join(config.output_dir, f"{config.experiment}.{extension}"),
            columns=experiment.columns,
        )
    ]
    if series:
        outputs.append(
            emit_results(
                series,
                config.format,
                os.path.join(config.output_dir, f"{config.experiment}_series.{extension}"),
                columns=SERIES_COLUMNS,
            )
        )

    fits = experiment.fits(rows) if experiment.fits is not None else {}
    manifest = {
        'experiment': config.experiment,
        'config': config.to_dict(),
        'config_hash': config.config_hash(),
        'versions': library_versions(),
        'jobs': jobs,
        'started': started_at,
        'finished': utc_now(),
        'wall_time': time.perf_counter() - started,
        'points': [outcome.to_dict() for outcome in outcomes],
        'outputs': [os.path.basename(path) for path in outputs],
        'fits': fits,
    }
    manifest_path = write_manifest(config.output_dir, manifest)
    run = ExperimentRun(config, outcomes, outputs, manifest_path, fits)
    if run.failures:
        logger.error("%d of %d points failed; partial results kept", len(run.failures), len(outcomes))
    return run
