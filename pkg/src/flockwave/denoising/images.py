"""Grayscale image type, pixel normalization, error metrics and PGM files."""

import numpy as np

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

from .errors import FormatError, TruncatedDataError

__all__ = (
    "denormalize",
    "Image",
    "image_grid",
    "load_pgm",
    "mse",
    "normalize_bytes",
    "render_grid",
    "save_pgm",
    "stack_images",
)

#: Intensity of the separator lines between the cells of an image grid
GRID_SEPARATOR_VALUE = 128

#: Width of the separator lines between the cells of an image grid, in pixels
GRID_SEPARATOR_WIDTH = 2

PathLike = Union[str, Path]


def normalize_bytes(data) -> np.ndarray:
    """Maps raw 8-bit grayscale values to the unit interval.

    Normalization is min-max with the fixed range 0..255 of the storage
    format and not the range of the individual image.
    """
    return np.asarray(data, dtype=np.uint8).astype(np.float64) / 255.0


def denormalize(pixels) -> np.ndarray:
    """Maps intensities in the unit interval back to 8-bit grayscale values,
    rounding to the nearest integer.
    """
    values = np.clip(np.asarray(pixels, dtype=np.float64), 0.0, 1.0)
    return np.rint(values * 255.0).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class Image:
    """A grayscale raster with intensities in the unit interval."""

    #: Number of pixel columns
    width: int

    #: Number of pixel rows
    height: int

    #: Read-only array of ``width * height`` intensities, in row-major order
    pixels: np.ndarray

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"invalid image dimensions: {self.width}x{self.height}")

        pixels = np.array(self.pixels, dtype=np.float64).reshape(-1)
        if pixels.shape[0] != self.width * self.height:
            raise ValueError(
                f"expected {self.width * self.height} pixels, got {pixels.shape[0]}"
            )
        if not np.all((pixels >= 0.0) & (pixels <= 1.0)):
            raise ValueError("pixel intensities must be in [0, 1]")

        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @classmethod
    def from_array(cls, array) -> "Image":
        """Creates an image from a two-dimensional array of intensities whose
        rows are the rows of the image.
        """
        array = np.asarray(array, dtype=np.float64)
        if array.ndim != 2:
            raise ValueError(f"expected a 2D array, got {array.ndim} dimensions")
        height, width = array.shape
        return cls(width=width, height=height, pixels=array.reshape(-1))

    @property
    def shape(self) -> tuple[int, int]:
        """The width and height of the image."""
        return self.width, self.height

    @property
    def size(self) -> int:
        """The number of pixels in the image."""
        return self.width * self.height

    def as_array(self) -> np.ndarray:
        """Returns a read-only two-dimensional view of the pixels with one row
        per image row.
        """
        return self.pixels.reshape(self.height, self.width)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.pixels, other.pixels)

    def __repr__(self) -> str:
        return f"Image(width={self.width}, height={self.height})"


def stack_images(images: Sequence[Image]) -> tuple[np.ndarray, int, int]:
    """Stacks the pixels of the given images into a matrix with one row per
    image.

    Returns:
        the matrix, and the common width and height of the images

    Raises:
        ValueError: if the sequence is empty or the images have different
            dimensions
    """
    if not images:
        raise ValueError("at least one image is needed")

    width, height = images[0].shape
    for image in images:
        if image.shape != (width, height):
            raise ValueError(
                f"mixed image sizes: {width}x{height} and "
                f"{image.width}x{image.height}"
            )

    return np.stack([image.pixels for image in images]), width, height


def mse(a: Image, b: Image) -> float:
    """Returns the mean square error between two images of the same size,
    computed on normalized intensities.
    """
    if a.shape != b.shape:
        raise ValueError(
            f"cannot compare {a.width}x{a.height} image with "
            f"{b.width}x{b.height} image"
        )
    diff = a.pixels - b.pixels
    return float(np.mean(diff * diff))


def _write_pgm(path: PathLike, data: np.ndarray) -> None:
    height, width = data.shape
    with open(path, "wb") as fp:
        fp.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fp.write(np.ascontiguousarray(data, dtype=np.uint8).tobytes())


def save_pgm(image: Image, path: PathLike) -> None:
    """Saves an image as a binary (P5) PGM file with a maximum value of 255.

    Parameters:
        image: the image to save
        path: the path of the output file
    """
    _write_pgm(path, denormalize(image.as_array()))


def _read_pgm_header(data: bytes) -> tuple[list[int], int]:
    """Parses the width, height and maxval fields of a PGM header.

    Returns:
        the three header fields and the offset of the first payload byte
    """
    fields: list[int] = []
    index = 2
    while len(fields) < 3:
        while index < len(data) and data[index : index + 1].isspace():
            index += 1
        if index >= len(data):
            raise TruncatedDataError("PGM header ends prematurely")
        if data[index : index + 1] == b"#":
            end = data.find(b"\n", index)
            if end < 0:
                raise TruncatedDataError("PGM header ends prematurely")
            index = end + 1
            continue

        start = index
        while index < len(data) and data[index : index + 1].isdigit():
            index += 1
        if start == index:
            raise FormatError(f"unexpected byte in PGM header at offset {index}")
        fields.append(int(data[start:index]))

    # Exactly one whitespace byte separates the header from the payload
    if index >= len(data) or not data[index : index + 1].isspace():
        raise FormatError("missing whitespace after PGM header")

    return fields, index + 1


def load_pgm(path: PathLike) -> Image:
    """Loads a binary (P5) PGM file with a maximum value of at most 255.

    Raises:
        FormatError: if the file is not a binary 8-bit PGM file
    """
    with open(path, "rb") as fp:
        data = fp.read()

    if data[:2] != b"P5":
        raise FormatError(f"not a binary PGM file: {str(path)!r}")

    (width, height, maxval), offset = _read_pgm_header(data)
    if maxval <= 0 or maxval > 255:
        raise FormatError(f"unsupported PGM maximum value: {maxval}")
    if width <= 0 or height <= 0:
        raise FormatError(f"invalid PGM dimensions: {width}x{height}")

    payload = data[offset : offset + width * height]
    if len(payload) < width * height:
        raise TruncatedDataError(
            f"PGM payload has {len(payload)} bytes, expected {width * height}"
        )

    values = np.frombuffer(payload, dtype=np.uint8).astype(np.float64)
    return Image(width=width, height=height, pixels=np.minimum(values / maxval, 1.0))


def render_grid(rows: Sequence[Sequence[Image]]) -> np.ndarray:
    """Tiles the given images into a single 8-bit raster.

    Each inner sequence is one row of the grid; cells are separated by
    two-pixel lines of intensity 128.

    Returns:
        the grid as a two-dimensional array of 8-bit values

    Raises:
        ValueError: if the grid is empty, ragged or the images have
            different sizes
    """
    if not rows or not rows[0]:
        raise ValueError("image grid must have at least one cell")

    num_columns = len(rows[0])
    if any(len(row) != num_columns for row in rows):
        raise ValueError("all rows of an image grid must have the same length")

    _, width, height = stack_images([image for row in rows for image in row])

    gap = GRID_SEPARATOR_WIDTH
    canvas = np.full(
        (
            len(rows) * height + (len(rows) - 1) * gap,
            num_columns * width + (num_columns - 1) * gap,
        ),
        GRID_SEPARATOR_VALUE,
        dtype=np.uint8,
    )
    for row_index, row in enumerate(rows):
        top = row_index * (height + gap)
        for column_index, image in enumerate(row):
            left = column_index * (width + gap)
            canvas[top : top + height, left : left + width] = denormalize(
                image.as_array()
            )

    return canvas


def image_grid(rows: Sequence[Sequence[Image]], path: PathLike) -> None:
    """Saves a grid of images as a single PGM file. Columns are typically
    conditions (clean, noisy, reconstructed...) and rows are samples.
    """
    _write_pgm(path, render_grid(rows))
