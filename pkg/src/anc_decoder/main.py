"""Command-line entry point for the BER sweep.

Module Information:
    - Filename: main.py
    - Module: main
    - Location: src/anc_decoder/

Key Concepts:
    - Flags map one-to-one onto ``SweepConfig`` fields
    - Exit codes: 0 success, 1 configuration error, 2 I/O error

Example:
    uv run anc-sweep --snr 20:30:2 --sir -3:3:1 --trials 100 --out results/ber.csv
"""

#####################################
# Imports At the Top
#####################################

import argparse
from collections.abc import Sequence
import pathlib
from typing import NoReturn

from .decoder import Strategy
from .errors import ConfigError, InvalidArgumentError
from .harness import (
    DEFAULT_MEAN_OVERLAP,
    DEFAULT_OUT_PATH,
    DEFAULT_PACKET_BITS,
    DEFAULT_TRIALS,
    SweepConfig,
    parse_grid,
    sweep,
)
from .modem import DEFAULT_PILOT_BITS
from .utils_logger import init_logger, log_section, logger

#####################################
# Constants
#####################################

EXIT_OK: int = 0
EXIT_CONFIG: int = 1
EXIT_IO: int = 2


#####################################
# Argument Parsing
#####################################


class _ArgumentParser(argparse.ArgumentParser):
    """Raise instead of exiting so bad flags map to exit code 1."""

    def error(self, message: str) -> NoReturn:
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    """Flags of the ``anc-sweep`` command."""
    parser = _ArgumentParser(
        prog="anc-sweep",
        description="Monte-Carlo BER sweep for two-way relay interference decoding.",
    )
    parser.add_argument("--snr", default="20:30:2", help="SNR grid in dB, min:max:step or value")
    parser.add_argument("--sir", default="-3:3:1", help="SIR grid in dB, min:max:step or value")
    parser.add_argument("--packet-bits", type=int, default=DEFAULT_PACKET_BITS)
    parser.add_argument("--pilot-bits", type=int, default=DEFAULT_PILOT_BITS)
    parser.add_argument("--overlap", type=float, default=DEFAULT_MEAN_OVERLAP)
    parser.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--strategy",
        choices=[s.value for s in Strategy],
        default=Strategy.GEOMETRIC.value,
    )
    parser.add_argument("--out", type=pathlib.Path, default=DEFAULT_OUT_PATH)
    parser.add_argument("--plot", type=pathlib.Path, default=None)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--log-level", default="INFO")
    return parser


def config_from_args(argv: Sequence[str] | None = None) -> tuple[SweepConfig, str]:
    """Parse ``argv`` into a validated ``SweepConfig`` and the log level."""
    args = build_parser().parse_args(argv)
    cfg = SweepConfig(
        snr_db=parse_grid(args.snr),
        sir_db=parse_grid(args.sir),
        packet_bits=args.packet_bits,
        pilot_bits=args.pilot_bits,
        mean_overlap=args.overlap,
        trials_per_point=args.trials,
        master_seed=args.seed,
        strategy=Strategy(args.strategy),
        out_path=args.out,
        plot_path=args.plot,
        threads=args.threads,
    )
    return cfg.validate(), args.log_level


#####################################
# Main Function
#####################################


def main(argv: Sequence[str] | None = None) -> int:
    """Run the sweep described by ``argv``.

    Returns:
        int: 0 on success, 1 on a configuration error, 2 on an I/O error.
    """
    try:
        cfg, level = config_from_args(argv)
    except (ConfigError, InvalidArgumentError) as e:
        init_logger()
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG

    init_logger(level)
    log_section("ANC DECODER BER SWEEP")
    try:
        records = sweep(cfg)
    except (ConfigError, InvalidArgumentError) as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO

    logger.info(f"Sweep complete: {len(records)} records in {cfg.out_path}")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())


__all__ = ["build_parser", "config_from_args", "main"]
