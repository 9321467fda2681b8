"""End-to-end denoising experiment on the MNIST dataset corrupted with
additive white Gaussian noise.
"""

import logging
import numpy as np

from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional

from .config import RunConfiguration
from .datasets import make_pairs, PairedDataset, training_mixture
from .dbn import Dbn, encode_batch, Pretrainer, reconstruct_batch
from .denoising import (
    activity_histogram,
    average_relative_activity,
    denoise_batch,
    detect_noise_nodes,
    neutral_values,
    NoiseProfile,
    save_profile,
)
from .errors import StageError
from .idx import find_mnist_file, load_idx_matrix
from .images import Image, image_grid
from .serialization import save_model

__all__ = (
    "evaluate",
    "ExperimentReport",
    "load_test_pairs",
    "load_training_pairs",
    "pretrain",
    "run_experiment",
    "select_profile",
)

#: Random stream of the noise added to the training images
TRAIN_NOISE_STREAM = 1000

#: Random stream of the noise added to the test images
TEST_NOISE_STREAM = 1001

#: Names of the files written into the output directory
MODEL_FILE = "model.dbnm"
PROFILE_FILE = "profile.txt"
REPORT_FILE = "report.txt"
GRID_FILE = "grid.pgm"

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentReport:
    """Summary of a denoising experiment."""

    #: Mean square error between the clean and the noisy test images
    mse_noisy: float

    #: Mean square error between the clean test images and the plain
    #: reconstructions of the noisy ones
    mse_plain_reconstruction: float

    #: Mean square error between the clean test images and the
    #: reconstructions of the noisy ones with the noise nodes made inactive
    mse_denoised: float

    #: Number of noise nodes in the profile used for denoising
    n_noise_nodes: int

    #: Threshold that produced the noise nodes
    threshold: float

    #: Number of test images the errors were averaged over
    test_count: int

    #: Number of clean/noisy training pairs
    train_count: int

    #: Number of noise nodes found at each threshold that was tried
    threshold_counts: tuple[tuple[float, int], ...]

    #: Histogram of the average relative activities of the last layer
    histogram: tuple[tuple[float, float, int], ...]

    #: The configuration of the experiment
    config: RunConfiguration

    @property
    def reduction(self) -> float:
        """Relative reduction of the mean square error achieved by denoising,
        compared to the noisy images.
        """
        return 1.0 - self.mse_denoised / self.mse_noisy if self.mse_noisy > 0 else 0.0

    def format(self) -> str:
        """Formats the report as text."""
        lines = [
            "[results]",
            f"mse_noisy = {self.mse_noisy:.10g}",
            f"mse_plain_reconstruction = {self.mse_plain_reconstruction:.10g}",
            f"mse_denoised = {self.mse_denoised:.10g}",
            f"reduction = {self.reduction:.10g}",
            f"n_noise_nodes = {self.n_noise_nodes}",
            f"threshold = {self.threshold!r}",
            f"train_count = {self.train_count}",
            f"test_count = {self.test_count}",
            "",
            "[threshold sweep]",
        ]
        lines.extend(
            f"{threshold!r} = {count}" for threshold, count in self.threshold_counts
        )
        lines.extend(["", "[average relative activity histogram]"])
        lines.extend(
            f"{low:.2f}-{high:.2f} = {count}" for low, high, count in self.histogram
        )
        lines.extend(["", "[configuration]", self.config.format()])
        return "\n".join(lines)


@contextmanager
def _stage(name: str) -> Iterator[None]:
    """Context manager that labels any exception escaping from its body with
    the name of the pipeline stage.
    """
    try:
        yield
    except StageError:
        raise
    except Exception as ex:
        raise StageError(name, str(ex)) from ex


def _load_images(config: RunConfiguration, kind: str, count: int):
    path = find_mnist_file(config.mnist_dir, kind)
    matrix, width, height = load_idx_matrix(path, limit=count)
    if matrix.shape[0] < count:
        logger.warning(
            f"Requested {count} {kind} images but {path} has only {matrix.shape[0]}"
        )
    logger.info(f"Loaded {matrix.shape[0]} {kind} images from {path}")
    return matrix, width, height


def load_training_pairs(config: RunConfiguration) -> PairedDataset:
    """Loads the clean training images and pairs them with noisy copies."""
    matrix, width, height = _load_images(config, "train", config.train_count)
    return make_pairs(
        matrix,
        config.noise_variance,
        (config.seed, TRAIN_NOISE_STREAM),
        shape=(width, height),
    )


def load_test_pairs(config: RunConfiguration) -> PairedDataset:
    """Loads the clean test images and pairs them with noisy copies."""
    matrix, width, height = _load_images(config, "test", config.test_count)
    return make_pairs(
        matrix,
        config.noise_variance,
        (config.seed, TEST_NOISE_STREAM),
        shape=(width, height),
    )


def pretrain(config: RunConfiguration, pairs: PairedDataset) -> Dbn:
    """Trains a network greedily on the clean and noisy images of the
    training pairs.
    """
    if config.widths[0] != pairs.width * pairs.height:
        raise ValueError(
            f"input layer has {config.widths[0]} units but the images have "
            f"{pairs.width * pairs.height} pixels"
        )

    trainer = Pretrainer()

    def log_progress(progress) -> None:
        if progress.epoch + 1 == config.epochs:
            logger.info(
                f"Layer {progress.layer + 1} trained, reconstruction error "
                f"{progress.reconstruction_error:.6f}"
            )

    with trainer.use_progress_handler(log_progress):
        return trainer.run(
            config.widths,
            training_mixture(pairs),
            config.train_config,
            image_shape=(pairs.width, pairs.height),
        )


def select_profile(
    dbn: Dbn, pairs: PairedDataset, config: RunConfiguration
) -> tuple[NoiseProfile, tuple[tuple[float, int], ...]]:
    """Builds the noise profile of a network from the training pairs.

    The configured threshold is tried first, followed by the sweep
    thresholds in order. The first threshold yielding a nonempty proper
    subset of the last layer is used; if none does, the configured threshold
    is used.

    Returns:
        the profile and the number of noise nodes found at each threshold
    """
    ara = average_relative_activity(dbn, pairs)

    candidates = [config.threshold]
    candidates.extend(t for t in config.threshold_sweep if t not in candidates)

    counts = []
    selected: Optional[float] = None
    for threshold in candidates:
        count = len(detect_noise_nodes(ara, threshold))
        counts.append((threshold, count))
        if selected is None and 0 < count < dbn.top_width:
            selected = threshold

    if selected is None:
        selected = config.threshold
    elif selected != config.threshold:
        logger.warning(
            f"Threshold {config.threshold} does not separate noise nodes, "
            f"using {selected} instead"
        )

    nodes = detect_noise_nodes(ara, selected)
    profile = NoiseProfile(
        threshold=selected,
        noise_nodes=nodes,
        neutral_values=neutral_values(dbn, pairs.clean, nodes),
        average_relative_activity=ara,
    )
    logger.info(
        f"Found {len(nodes)} noise nodes out of {dbn.top_width} at threshold "
        f"{selected}"
    )
    return profile, tuple(counts)


def _mean_square_error(a: np.ndarray, b: np.ndarray) -> float:
    diff = a - b
    return float(np.mean(diff * diff))


def evaluate(
    dbn: Dbn, profile: NoiseProfile, pairs: PairedDataset
) -> tuple[float, float, float, np.ndarray, np.ndarray]:
    """Evaluates a network and its noise profile on a set of test pairs.

    Returns:
        the mean square errors of the noisy images, of their plain
        reconstructions and of their denoised reconstructions with respect
        to the clean images, followed by the plain and the denoised
        reconstructions themselves
    """
    plain = reconstruct_batch(dbn, encode_batch(dbn, pairs.noisy).top)
    denoised = denoise_batch(dbn, profile, pairs.noisy)
    return (
        _mean_square_error(pairs.clean, pairs.noisy),
        _mean_square_error(pairs.clean, plain),
        _mean_square_error(pairs.clean, denoised),
        plain,
        denoised,
    )


def _grid_rows(
    pairs: PairedDataset, plain: np.ndarray, denoised: np.ndarray, count: int
) -> list[list[Image]]:
    def to_image(row: np.ndarray) -> Image:
        return Image(width=pairs.width, height=pairs.height, pixels=row)

    return [
        [
            to_image(pairs.clean[index]),
            to_image(pairs.noisy[index]),
            to_image(plain[index]),
            to_image(denoised[index]),
        ]
        for index in range(min(count, len(pairs)))
    ]


def run_experiment(
    config: RunConfiguration, write_outputs: bool = True
) -> ExperimentReport:
    """Runs the complete denoising experiment: loads and corrupts the data,
    pretrains the network, builds the noise profile and evaluates the
    reconstructions on the test set.

    When ``write_outputs`` is set, the model, the profile, the report and an
    image grid of the first few test images (clean, noisy, plain and
    denoised reconstruction) are written into the output directory.

    Raises:
        StageError: if any stage of the pipeline fails
    """
    with _stage("load"):
        train_pairs = load_training_pairs(config)
        test_pairs = load_test_pairs(config)

    with _stage("pretrain"):
        dbn = pretrain(config, train_pairs)

    with _stage("profile"):
        profile, counts = select_profile(dbn, train_pairs, config)

    with _stage("evaluate"):
        mse_noisy, mse_plain, mse_denoised, plain, denoised = evaluate(
            dbn, profile, test_pairs
        )

    report = ExperimentReport(
        mse_noisy=mse_noisy,
        mse_plain_reconstruction=mse_plain,
        mse_denoised=mse_denoised,
        n_noise_nodes=len(profile),
        threshold=profile.threshold,
        test_count=len(test_pairs),
        train_count=len(train_pairs),
        threshold_counts=counts,
        histogram=tuple(activity_histogram(profile.average_relative_activity)),
        config=config,
    )
    logger.info(
        f"MSE noisy {mse_noisy:.4f}, plain reconstruction {mse_plain:.4f}, "
        f"denoised {mse_denoised:.4f}"
    )

    if write_outputs:
        with _stage("write"):
            out_dir = Path(config.out_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            save_model(dbn, out_dir / MODEL_FILE)
            save_profile(profile, out_dir / PROFILE_FILE)
            (out_dir / REPORT_FILE).write_text(report.format(), encoding="utf-8")
            rows = _grid_rows(test_pairs, plain, denoised, config.grid_samples)
            if rows:
                image_grid(rows, out_dir / GRID_FILE)
            logger.info(f"Results written to {out_dir}")

    return report
