"""Command-line entry point: bottleneck-cd <experiment> --config <file> [options]."""
import argparse
import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv

from models import __version__
from models.errors import BottleneckError, ConfigError
from routes.experiments import EXPERIMENTS, run_experiment
from schemas.run_config import load_config

logger = logging.getLogger("bottleneck_cd")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

EXIT_OK = 0
EXIT_COMPUTE_FAILURE = 1
EXIT_CONFIG_ERROR = 2


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="bottleneck-cd",
        description="Counterdiabatic driving sweeps for the bottleneck Ising chain.",
    )
    parser.add_argument("experiment", choices=sorted(EXPERIMENTS), help="Experiment to run.")
    parser.add_argument("--config", required=True, help="Flat key = value run configuration.")
    parser.add_argument("--out", default=None, help="Output directory (overrides output_dir).")
    parser.add_argument("--jobs", type=int, default=None, help="Parallel sweep workers (default: BOTTLENECK_CD_JOBS or cores).")
    parser.add_argument("--dt", default=None, help="Time step, a number or 'auto' (overrides dt).")
    parser.add_argument("--cd-mode", default=None, help="CD mode or comma list (overrides cd_mode).")
    parser.add_argument(
        "--log-level",
        default=None,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default: BOTTLENECK_CD_LOG_LEVEL or INFO).",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser.parse_args(argv)


def configure_logging(level: Optional[str] = None):
    level = level or os.environ.get("BOTTLENECK_CD_LOG_LEVEL", "INFO")
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=LOG_FORMAT)


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = parse_args(argv)
    configure_logging(args.log_level)

    overrides = {'output_dir': args.out, 'dt': args.dt, 'cd_mode': args.cd_mode}
    try:
        config = load_config(args.config, overrides=overrides, experiment=args.experiment)
        run = run_experiment(config, jobs=args.jobs)
    except ConfigError as exc:
        print(f"configuration error: {exc.render()}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except BottleneckError as exc:
        logger.error("run aborted: %s", exc)
        return EXIT_COMPUTE_FAILURE

    done = len(run.outcomes) - len(run.failures)
    print(f"{config.experiment}: {done}/{len(run.outcomes)} points ok, results in {config.output_dir}")
    return run.exit_code


if __name__ == '__main__':
    sys.exit(main())
