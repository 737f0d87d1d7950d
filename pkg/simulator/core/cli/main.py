"""
Command-line entry point.

    python manage.py <command> [--config FILE] [--out DIR] [--seed N]
                               [--format csv|json] [--trials N] [--deep]
                               [--workers N] [--r_a X] [--s X] [--k 1,2,3]
                               [--eta X] [--name SCHEMA]

Exit codes: 0 success, 2 configuration or input errors, 1 anything else.
"""

import argparse
import logging
import logging.config
from typing import Optional, Sequence, Tuple

from config import settings
from core.cli.commands import get_command
from core.cli.manifest import COMMAND_NAMES, FORMATS, RunManifest
from core.exceptions import AnalysisError, ConfigError, ValidationError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _k_list(raw: str) -> Tuple[int, ...]:
    try:
        values = tuple(int(part) for part in raw.split(',') if part.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f'expected comma-separated integers, got {raw!r}') from exc
    if not values or any(k < 1 for k in values):
        raise argparse.ArgumentTypeError('depths must be positive integers')
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='quicksync',
        description='QuickSync consensus simulator and analysis toolkit',
    )
    parser.add_argument('command', choices=COMMAND_NAMES)
    parser.add_argument('--config', dest='config_path', help='config or grid file')
    parser.add_argument('--out', dest='output_dir', default=settings.OUTPUT_DIR, help='output directory')
    parser.add_argument('--seed', type=int, help='root seed')
    parser.add_argument('--format', choices=FORMATS, default='csv')
    parser.add_argument('--trials', type=int, help='Monte Carlo trials, or simulator trials for simulate')
    parser.add_argument('--deep', action='store_true', help='allow cells that need far more trials')
    parser.add_argument('--workers', type=int, default=settings.MC_WORKERS, help='process-pool size')
    parser.add_argument('--r_a', type=float, help='adversary stake fraction')
    parser.add_argument('--s', type=float, help='scale factor')
    parser.add_argument('--k', type=_k_list, help='depth(s), comma separated')
    parser.add_argument('--eta', type=float, help='target violation probability')
    parser.add_argument('--name', help='schema name (schema command)')
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, run one command and map its outcome to an exit code.

    argparse usage errors exit with 2 on their own (SystemExit).
    """
    logging.config.dictConfig(settings.LOGGING)
    args = build_parser().parse_args(argv)

    try:
        manifest = RunManifest(**vars(args))
        return get_command(manifest.command)(manifest)
    except ConfigError as exc:
        logger.error('config error: %s', exc.diagnostic())
        return EXIT_USAGE
    except ValidationError as exc:
        logger.error('invalid input: %s', exc)
        return EXIT_USAGE
    except LookupError as exc:
        logger.error('%s', exc)
        return EXIT_USAGE
    except AnalysisError as exc:
        logger.error('analysis failed: %s', exc)
        return EXIT_USAGE if str(exc) == 'no honest advantage' else EXIT_FAILURE
    except ValueError as exc:
        # out-of-range flags or grid values rejected by the analysis routines
        logger.error('invalid input: %s', exc)
        return EXIT_USAGE
    except Exception:
        logger.exception('%s failed', args.command)
        return EXIT_FAILURE
