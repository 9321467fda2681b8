"""Detection of noise nodes in the last layer of a deep belief network and
reconstruction of images with the noise nodes made inactive.

A node of the last layer is a noise node if its activation differs a lot
between a clean image and the noisy copy of the same image. Replacing the
activations of noise nodes with their average activation over clean images
before the downward pass removes the noise from the reconstruction.
"""

import logging
import numpy as np

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

from .datasets import batches, PairedDataset
from .dbn import Dbn, encode, encode_batch, reconstruct, reconstruct_batch
from .errors import FormatError
from .images import Image, stack_images

__all__ = (
    "activity_histogram",
    "average_relative_activity",
    "build_profile",
    "denoise",
    "denoise_batch",
    "detect_noise_nodes",
    "format_profile",
    "load_profile",
    "neutral_values",
    "NoiseProfile",
    "parse_profile",
    "relative_activity",
    "relative_activity_batch",
    "save_profile",
    "suppress_noise_nodes",
)

#: Number of images encoded at once when processing datasets
CHUNK_SIZE = 1000

PathLike = Union[str, Path]

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class NoiseProfile:
    """The noise nodes of the last layer of a network, together with the
    values that make them inactive.
    """

    #: Threshold on the average relative activity above which a node is
    #: considered a noise node
    threshold: float

    #: Sorted indices of the noise nodes
    noise_nodes: tuple[int, ...]

    #: Neutral value of each noise node, aligned with `noise_nodes`
    neutral_values: np.ndarray

    #: Average relative activity of every node of the last layer
    average_relative_activity: np.ndarray

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")

        ara = np.array(self.average_relative_activity, dtype=np.float64).reshape(-1)
        nodes = tuple(int(index) for index in self.noise_nodes)
        values = np.array(self.neutral_values, dtype=np.float64).reshape(-1)

        if any(index < 0 or index >= ara.shape[0] for index in nodes):
            raise ValueError(f"noise node index out of range 0..{ara.shape[0] - 1}")
        if list(nodes) != sorted(set(nodes)):
            raise ValueError("noise node indices must be sorted and unique")
        if values.shape[0] != len(nodes):
            raise ValueError(
                f"got {values.shape[0]} neutral values for {len(nodes)} noise nodes"
            )
        if not np.all((values >= 0.0) & (values <= 1.0)):
            raise ValueError("neutral values must be in [0, 1]")

        ara.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "average_relative_activity", ara)
        object.__setattr__(self, "noise_nodes", nodes)
        object.__setattr__(self, "neutral_values", values)

    @classmethod
    def empty(cls, top_width: int) -> "NoiseProfile":
        """Returns a profile of a last layer with the given width that has no
        noise nodes.
        """
        return cls(
            threshold=1.0,
            noise_nodes=(),
            neutral_values=np.zeros(0),
            average_relative_activity=np.zeros(top_width),
        )

    @property
    def flags(self) -> np.ndarray:
        """Boolean array telling for each node of the last layer whether it is
        a noise node.
        """
        result = np.zeros(self.top_width, dtype=bool)
        result[list(self.noise_nodes)] = True
        return result

    @property
    def top_width(self) -> int:
        """Number of nodes in the last layer."""
        return self.average_relative_activity.shape[0]

    def is_consistent(self) -> bool:
        """Returns whether the noise nodes are exactly the nodes whose average
        relative activity exceeds the threshold.
        """
        return self.noise_nodes == detect_noise_nodes(
            self.average_relative_activity, self.threshold
        )

    def __len__(self) -> int:
        return len(self.noise_nodes)


def _check_image(dbn: Dbn, image: Image) -> None:
    if image.size != dbn.input_width:
        raise ValueError(
            f"image has {image.size} pixels but the network expects "
            f"{dbn.input_width}"
        )


def relative_activity(dbn: Dbn, clean: Image, noisy: Image) -> np.ndarray:
    """Returns the absolute difference between the last-layer activations of
    a clean image and its noisy counterpart.
    """
    _check_image(dbn, clean)
    _check_image(dbn, noisy)
    return np.abs(encode(dbn, clean).top - encode(dbn, noisy).top)


def relative_activity_batch(dbn: Dbn, clean, noisy) -> np.ndarray:
    """Returns the relative activity of every pair of rows of two aligned
    image matrices, one row per pair.
    """
    clean = np.asarray(clean, dtype=np.float64)
    noisy = np.asarray(noisy, dtype=np.float64)
    if clean.shape != noisy.shape:
        raise ValueError(
            f"clean and noisy images have different shapes: {clean.shape} and "
            f"{noisy.shape}"
        )
    return np.abs(encode_batch(dbn, clean).top - encode_batch(dbn, noisy).top)


def _chunked_mean(values: Sequence[np.ndarray], count: int) -> np.ndarray:
    """Adds up per-chunk column sums in chunk order and divides by the total
    number of rows.
    """
    total = np.zeros_like(values[0])
    for value in values:
        total += value
    return total / count


def average_relative_activity(dbn: Dbn, dataset: PairedDataset) -> np.ndarray:
    """Returns the mean relative activity of every last-layer node over all
    the pairs of a dataset.
    """
    if len(dataset) == 0:
        raise ValueError("dataset must not be empty")
    if dataset.clean.shape[1] != dbn.input_width:
        raise ValueError(
            f"images have {dataset.clean.shape[1]} pixels but the network "
            f"expects {dbn.input_width}"
        )

    sums = [
        relative_activity_batch(dbn, chunk.clean, chunk.noisy).sum(axis=0)
        for chunk in batches(dataset, CHUNK_SIZE)
    ]
    return _chunked_mean(sums, len(dataset))


def detect_noise_nodes(ara, threshold: float) -> tuple[int, ...]:
    """Returns the sorted indices of the nodes whose average relative activity
    is strictly higher than the threshold.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    ara = np.asarray(ara, dtype=np.float64)
    return tuple(int(index) for index in np.flatnonzero(ara > threshold))


def neutral_values(
    dbn: Dbn,
    clean_images: Union[Sequence[Image], np.ndarray],
    nodes: Sequence[int],
) -> np.ndarray:
    """Returns the mean last-layer activation of the given nodes over a set
    of clean images.

    Parameters:
        dbn: the network
        clean_images: the clean images, or a matrix of them, one per row
        nodes: the indices of the nodes

    Returns:
        the neutral values, aligned with the node indices
    """
    if isinstance(clean_images, np.ndarray):
        matrix = np.atleast_2d(np.asarray(clean_images, dtype=np.float64))
    elif clean_images:
        matrix, _, _ = stack_images(clean_images)
    else:
        matrix = np.zeros((0, dbn.input_width))

    if matrix.shape[0] == 0:
        raise ValueError("at least one clean image is needed")

    nodes = list(nodes)
    if any(index < 0 or index >= dbn.top_width for index in nodes):
        raise ValueError(f"node index out of range 0..{dbn.top_width - 1}")

    sums = [
        encode_batch(dbn, chunk).top.sum(axis=0)
        for chunk in batches(matrix, CHUNK_SIZE)
    ]
    return _chunked_mean(sums, matrix.shape[0])[nodes]


def build_profile(dbn: Dbn, dataset: PairedDataset, threshold: float) -> NoiseProfile:
    """Builds the noise profile of a network from a paired dataset.

    Noise nodes are detected from the average relative activity over the
    pairs, and their neutral values are computed from the clean sides of the
    same pairs.
    """
    ara = average_relative_activity(dbn, dataset)
    nodes = detect_noise_nodes(ara, threshold)
    values = neutral_values(dbn, dataset.clean, nodes)
    logger.info(
        f"Found {len(nodes)} noise nodes out of {dbn.top_width} at threshold "
        f"{threshold}"
    )
    return NoiseProfile(
        threshold=threshold,
        noise_nodes=nodes,
        neutral_values=values,
        average_relative_activity=ara,
    )


def suppress_noise_nodes(top: np.ndarray, profile: NoiseProfile) -> np.ndarray:
    """Returns a copy of the given last-layer activations (a single vector or
    a matrix with one vector per row) where the noise nodes of the profile
    are replaced by their neutral values.
    """
    top = np.array(top, dtype=np.float64)
    if top.shape[-1] != profile.top_width:
        raise ValueError(
            f"top vector has {top.shape[-1]} nodes but the profile has "
            f"{profile.top_width}"
        )
    if profile.noise_nodes:
        top[..., list(profile.noise_nodes)] = profile.neutral_values
    return top


def denoise(dbn: Dbn, profile: NoiseProfile, noisy: Image) -> Image:
    """Reconstructs an image from its noisy version with the noise nodes of
    the network made inactive.
    """
    _check_image(dbn, noisy)
    top = suppress_noise_nodes(encode(dbn, noisy).top, profile)
    return reconstruct(dbn, top)


def denoise_batch(dbn: Dbn, profile: NoiseProfile, noisy) -> np.ndarray:
    """Denoises a matrix of images with one image per row."""
    top = suppress_noise_nodes(encode_batch(dbn, noisy).top, profile)
    return reconstruct_batch(dbn, top)


def activity_histogram(
    ara, bins: int = 10
) -> list[tuple[float, float, int]]:
    """Returns a histogram of average relative activities over the unit
    interval.

    Returns:
        the lower and upper edge of each bin and the number of nodes in it
    """
    counts, edges = np.histogram(np.asarray(ara, dtype=np.float64), bins=bins, range=(0.0, 1.0))
    return [
        (float(edges[index]), float(edges[index + 1]), int(count))
        for index, count in enumerate(counts)
    ]


def format_profile(profile: NoiseProfile) -> str:
    """Formats a noise profile as text with one line per last-layer node.

    Each line holds the index of the node, its average relative activity,
    whether it is a noise node (0 or 1) and its neutral value (``-`` for
    image nodes), in aligned columns with ten significant digits.
    """
    neutral = dict(zip(profile.noise_nodes, profile.neutral_values))
    lines = [
        f"# threshold {profile.threshold!r}",
        f"# {'index':>6} {'activity':>17} {'flagged':>7} {'neutral':>17}",
    ]
    for index, activity in enumerate(profile.average_relative_activity):
        value = f"{neutral[index]:.10g}" if index in neutral else "-"
        flag = 1 if index in neutral else 0
        lines.append(f"  {index:>6d} {activity:>17.10g} {flag:>7d} {value:>17}")
    return "\n".join(lines) + "\n"


def parse_profile(text: str) -> NoiseProfile:
    """Parses a noise profile from the text format produced by
    `format_profile()`.

    Raises:
        FormatError: if the text is not a valid profile
    """
    threshold = None
    activities: list[float] = []
    nodes: list[int] = []
    values: list[float] = []

    for line_number, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "threshold":
                try:
                    threshold = float(parts[1])
                except ValueError:
                    raise FormatError(
                        f"invalid threshold in line {line_number}"
                    ) from None
            continue

        parts = line.split()
        try:
            if len(parts) != 4:
                raise ValueError
            index, activity, flag = int(parts[0]), float(parts[1]), int(parts[2])
            if index != len(activities) or flag not in (0, 1):
                raise ValueError
            if flag:
                values.append(float(parts[3]))
                nodes.append(index)
            elif parts[3] != "-":
                raise ValueError
        except ValueError:
            raise FormatError(f"invalid profile entry in line {line_number}") from None
        activities.append(activity)

    if threshold is None:
        raise FormatError("profile has no threshold")
    if not activities:
        raise FormatError("profile has no entries")

    try:
        return NoiseProfile(
            threshold=threshold,
            noise_nodes=tuple(nodes),
            neutral_values=np.array(values),
            average_relative_activity=np.array(activities),
        )
    except ValueError as ex:
        raise FormatError(f"invalid profile: {ex}") from None


def save_profile(profile: NoiseProfile, path: PathLike) -> None:
    """Saves a noise profile into a text file."""
    with open(path, "w", encoding="utf-8") as fp:
        fp.write(format_profile(profile))


def load_profile(path: PathLike) -> NoiseProfile:
    """Loads a noise profile from a text file."""
    with open(path, "r", encoding="utf-8") as fp:
        return parse_profile(fp.read())
