"""Command line interface of the denoising experiments."""

import logging
import sys

from argparse import ArgumentParser, Namespace
from pathlib import Path
from typing import Optional, Sequence

from .config import load_config, parse_float_list, parse_widths, RunConfiguration
from .dbn import Dbn
from .denoising import denoise, load_profile, save_profile
from .errors import StageError
from .experiment import (
    load_training_pairs,
    MODEL_FILE,
    PROFILE_FILE,
    pretrain,
    run_experiment,
    select_profile,
)
from .images import load_pgm, save_pgm
from .serialization import load_model, save_model
from .version import __version__

__all__ = ("create_parser", "main")

logger = logging.getLogger(__name__)


def _add_shared_arguments(parser: ArgumentParser) -> None:
    parser.add_argument(
        "--config", default=None, help="configuration file with key = value lines"
    )
    parser.add_argument("--mnist-dir", help="directory holding the MNIST IDX files")
    parser.add_argument("--out-dir", help="directory to write the results to")
    parser.add_argument(
        "--widths",
        type=parse_widths,
        help="layer widths of the network, e.g. 784,1000,500,250,100",
    )
    parser.add_argument("--epochs", type=int, help="training epochs per layer")
    parser.add_argument(
        "--lr", dest="learning_rate", type=float, help="learning rate"
    )
    parser.add_argument("--batch-size", type=int, help="training batch size")
    parser.add_argument("--weight-scale", type=float, help="std of initial weights")
    parser.add_argument("--weight-decay", type=float, help="L2 penalty on weights")
    parser.add_argument("--cd-steps", type=int, help="Gibbs steps of CD learning")
    parser.add_argument(
        "--init-visible-bias",
        action="store_true",
        default=None,
        help="start visible biases from the log-odds of the data means",
    )
    parser.add_argument(
        "--noise-variance", type=float, help="variance of the Gaussian noise"
    )
    parser.add_argument(
        "--threshold", type=float, help="average relative activity threshold"
    )
    parser.add_argument(
        "--threshold-sweep",
        type=parse_float_list,
        help="comma-separated fallback thresholds",
    )
    parser.add_argument("--train-count", type=int, help="number of training pairs")
    parser.add_argument("--test-count", type=int, help="number of test images")
    parser.add_argument(
        "--grid-samples", type=int, help="number of test images in the grid"
    )
    parser.add_argument("--seed", type=int, help="master random seed")


def create_parser() -> ArgumentParser:
    """Creates the argument parser of the command line interface."""
    parser = ArgumentParser(
        prog="flockwave-denoise",
        description=(
            "Deep belief network denoising of images by neutralizing the "
            "noise nodes of the last layer"
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument(
        "-v", "--verbose", action="store_true", help="show debug messages"
    )
    verbosity.add_argument(
        "-q", "--quiet", action="store_true", help="show warnings and errors only"
    )

    subparsers = parser.add_subparsers(dest="command", required=True)

    train = subparsers.add_parser("train", help="pretrain a network and save it")
    _add_shared_arguments(train)

    profile = subparsers.add_parser(
        "profile", help="detect the noise nodes of a trained network"
    )
    _add_shared_arguments(profile)
    profile.add_argument("--model", help="model file; defaults to the output dir")

    denoise_cmd = subparsers.add_parser("denoise", help="denoise a single PGM image")
    _add_shared_arguments(denoise_cmd)
    denoise_cmd.add_argument("--model", help="model file; defaults to the output dir")
    denoise_cmd.add_argument(
        "--profile", help="noise profile file; defaults to the output dir"
    )
    denoise_cmd.add_argument("input", help="the noisy input image (binary PGM)")
    denoise_cmd.add_argument("output", help="the denoised output image (binary PGM)")

    evaluate = subparsers.add_parser("eval", help="run the complete experiment")
    _add_shared_arguments(evaluate)

    return parser


def _get_configuration(args: Namespace) -> RunConfiguration:
    """Returns the effective configuration: the defaults, overridden by the
    configuration file, overridden by the command line flags.
    """
    config = RunConfiguration()
    if args.config:
        config = load_config(args.config, config)
    return config.updated(
        mnist_dir=args.mnist_dir,
        out_dir=args.out_dir,
        widths=args.widths,
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        batch_size=args.batch_size,
        weight_scale=args.weight_scale,
        weight_decay=args.weight_decay,
        cd_steps=args.cd_steps,
        init_visible_bias=args.init_visible_bias,
        noise_variance=args.noise_variance,
        threshold=args.threshold,
        threshold_sweep=args.threshold_sweep,
        train_count=args.train_count,
        test_count=args.test_count,
        grid_samples=args.grid_samples,
        seed=args.seed,
    )


def _run_train(args: Namespace, config: RunConfiguration) -> None:
    dbn = pretrain(config, load_training_pairs(config))
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_model(dbn, out_dir / MODEL_FILE)
    logger.info(f"Model saved to {out_dir / MODEL_FILE}")


def _run_profile(args: Namespace, config: RunConfiguration) -> None:
    out_dir = Path(config.out_dir)
    dbn = load_model(args.model or out_dir / MODEL_FILE)
    profile, _ = select_profile(dbn, load_training_pairs(config), config)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_profile(profile, out_dir / PROFILE_FILE)
    logger.info(f"Noise profile saved to {out_dir / PROFILE_FILE}")


def _run_denoise(args: Namespace, config: RunConfiguration) -> None:
    out_dir = Path(config.out_dir)
    dbn = load_model(args.model or out_dir / MODEL_FILE)
    profile = load_profile(args.profile or out_dir / PROFILE_FILE)
    image = load_pgm(args.input)
    dbn = Dbn(dbn.layers, image_shape=image.shape)
    save_pgm(denoise(dbn, profile, image), args.output)


def _run_eval(args: Namespace, config: RunConfiguration) -> None:
    report = run_experiment(config)
    sys.stdout.write(report.format())


_COMMANDS = {
    "train": _run_train,
    "profile": _run_profile,
    "denoise": _run_denoise,
    "eval": _run_eval,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of the command line interface.

    Returns:
        the exit code of the process
    """
    args = create_parser().parse_args(argv)

    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    else:
        level = logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(message)s")

    try:
        config = _get_configuration(args)
        _COMMANDS[args.command](args, config)
    except (OSError, StageError, ValueError) as ex:
        logger.error(str(ex))
        return 1

    return 0
