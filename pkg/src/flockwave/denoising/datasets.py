"""Noise corruption and paired clean/noisy datasets."""

import numpy as np

from numpy.random import Generator
from typing import Iterator, Optional, Sequence, TypeVar, Union, overload

from .images import Image, stack_images
from .utils import create_rng, infer_image_shape, Seed

__all__ = (
    "add_awgn",
    "add_awgn_to_matrix",
    "batches",
    "make_pairs",
    "PairedDataset",
    "training_mixture",
)

T = TypeVar("T")


def _check_variance(variance: float) -> None:
    if not variance >= 0:
        raise ValueError(f"noise variance must be non-negative, got {variance}")


def add_awgn_to_matrix(
    pixels: np.ndarray, variance: float, rng: Generator
) -> np.ndarray:
    """Adds white Gaussian noise with the given variance to an array of
    intensities and clamps the result to the unit interval.

    One standard normal variate is drawn for each entry of the array, in
    row-major order, even if the variance is zero.

    Returns:
        a new array with the noisy intensities
    """
    _check_variance(variance)
    noise = rng.standard_normal(pixels.shape)
    if variance == 0:
        return np.array(pixels, dtype=np.float64)
    return np.clip(pixels + np.sqrt(variance) * noise, 0.0, 1.0)


def add_awgn(image: Image, variance: float, seed: Seed) -> Image:
    """Returns a copy of the image corrupted with additive white Gaussian
    noise.

    Parameters:
        image: the clean image
        variance: the variance (not the standard deviation) of the noise
        seed: seed of the random number generator that draws the noise

    Returns:
        the noisy image, clamped to the unit interval
    """
    pixels = add_awgn_to_matrix(image.pixels, variance, create_rng(seed))
    return Image(width=image.width, height=image.height, pixels=pixels)


class PairedDataset:
    """Sequence of clean images paired with their noisy counterparts.

    The pixels are stored as two matrices with one image per row; slicing a
    dataset returns another dataset.
    """

    _clean: np.ndarray
    _noisy: np.ndarray

    width: int
    """Width of all the images in the dataset"""

    height: int
    """Height of all the images in the dataset"""

    noise_variance: float
    """Variance of the noise that was used to create the noisy images"""

    def __init__(
        self,
        clean: np.ndarray,
        noisy: np.ndarray,
        width: int,
        height: int,
        noise_variance: float,
    ):
        """Constructor.

        Parameters:
            clean: matrix of clean images, one image per row
            noisy: matrix of noisy images, aligned with the clean ones
            width: the width of the images
            height: the height of the images
            noise_variance: the variance of the noise in the noisy images

        Raises:
            ValueError: if the matrices do not match each other or the image
                size, or hold intensities outside ``[0, 1]``
        """
        _check_variance(noise_variance)

        clean = np.asarray(clean, dtype=np.float64)
        noisy = np.asarray(noisy, dtype=np.float64)
        if clean.ndim != 2 or clean.shape != noisy.shape:
            raise ValueError(
                f"clean and noisy matrices must have the same 2D shape, got "
                f"{clean.shape} and {noisy.shape}"
            )
        if clean.shape[1] != width * height:
            raise ValueError(
                f"images have {clean.shape[1]} pixels, expected {width * height}"
            )
        for name, matrix in (("clean", clean), ("noisy", noisy)):
            if not np.all((matrix >= 0.0) & (matrix <= 1.0)):
                raise ValueError(f"{name} pixel intensities must be in [0, 1]")

        self._clean = clean
        self._noisy = noisy
        self.width = width
        self.height = height
        self.noise_variance = float(noise_variance)

    @property
    def clean(self) -> np.ndarray:
        """Matrix of the clean images, one image per row."""
        return self._clean

    @property
    def noisy(self) -> np.ndarray:
        """Matrix of the noisy images, one image per row."""
        return self._noisy

    @property
    def pairs(self) -> list[tuple[Image, Image]]:
        """The clean-noisy image pairs of the dataset."""
        return [self[index] for index in range(len(self))]

    def noisy_images(self) -> list[Image]:
        """Returns the noisy sides of the pairs as images."""
        return [self._to_image(row) for row in self._noisy]

    def _to_image(self, row: np.ndarray) -> Image:
        return Image(width=self.width, height=self.height, pixels=row)

    @overload
    def __getitem__(self, index: int) -> tuple[Image, Image]: ...

    @overload
    def __getitem__(self, index: slice) -> "PairedDataset": ...

    def __getitem__(self, index):
        if isinstance(index, slice):
            return PairedDataset(
                self._clean[index],
                self._noisy[index],
                self.width,
                self.height,
                self.noise_variance,
            )
        return self._to_image(self._clean[index]), self._to_image(self._noisy[index])

    def __iter__(self) -> Iterator[tuple[Image, Image]]:
        for index in range(len(self)):
            yield self[index]

    def __len__(self) -> int:
        return self._clean.shape[0]


def make_pairs(
    clean: Union[Sequence[Image], np.ndarray],
    variance: float,
    seed: Seed,
    shape: Optional[tuple[int, int]] = None,
) -> PairedDataset:
    """Pairs each clean image with a copy corrupted by clamped additive white
    Gaussian noise.

    Parameters:
        clean: the clean images, or a matrix of clean images with one image
            per row
        variance: the variance of the noise
        seed: seed of the random number generator that draws the noise
        shape: the width and height of the images when ``clean`` is a matrix;
            inferred from the number of columns when omitted

    Returns:
        the dataset; the i-th pair belongs to the i-th clean image

    Raises:
        ValueError: if there are no clean images or the variance is negative
    """
    _check_variance(variance)

    if isinstance(clean, np.ndarray):
        matrix = np.array(clean, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] == 0:
            raise ValueError("at least one clean image is needed")
        width, height = shape or infer_image_shape(matrix.shape[1])
    else:
        if not clean:
            raise ValueError("at least one clean image is needed")
        matrix, width, height = stack_images(clean)

    noisy = add_awgn_to_matrix(matrix, variance, create_rng(seed))
    return PairedDataset(matrix, noisy, width, height, variance)


def batches(source: Sequence[T], batch_size: int) -> list[Sequence[T]]:
    """Splits a sequence into consecutive batches of the given size.

    The source may be anything that supports ``len()`` and slicing, e.g.
    lists, NumPy arrays (split along the first axis) or paired datasets.
    The last batch is shorter if the length of the source is not a multiple
    of the batch size.
    """
    if batch_size < 1:
        raise ValueError(f"batch size must be positive, got {batch_size}")
    return [
        source[start : start + batch_size]  # type: ignore[index]
        for start in range(0, len(source), batch_size)
    ]


def training_mixture(dataset: PairedDataset) -> np.ndarray:
    """Returns the matrix of training elements for a dataset: the clean and
    noisy images of all pairs interleaved, clean first.
    """
    count, num_pixels = dataset.clean.shape
    result = np.empty((2 * count, num_pixels), dtype=np.float64)
    result[0::2] = dataset.clean
    result[1::2] = dataset.noisy
    return result
