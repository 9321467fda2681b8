"""Parser for the IDX container format used by the MNIST dataset."""

import gzip
import logging
import numpy as np

from pathlib import Path
from struct import unpack_from
from typing import Optional, Union

from .errors import FormatError, TruncatedDataError
from .images import Image, normalize_bytes

__all__ = (
    "find_mnist_file",
    "IDX_IMAGE_MAGIC",
    "IDX_LABEL_MAGIC",
    "load_idx",
    "load_idx_labels",
    "load_idx_matrix",
)

#: Magic number of IDX files holding unsigned byte images
IDX_IMAGE_MAGIC = 0x00000803

#: Magic number of IDX files holding unsigned byte labels
IDX_LABEL_MAGIC = 0x00000801

#: Base names of the MNIST files, keyed by the part of the dataset they hold
MNIST_FILE_NAMES = {
    "train": ("train-images-idx3-ubyte", "train-images.idx3-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-images.idx3-ubyte"),
    "train-labels": ("train-labels-idx1-ubyte", "train-labels.idx1-ubyte"),
    "test-labels": ("t10k-labels-idx1-ubyte", "t10k-labels.idx1-ubyte"),
}

PathLike = Union[str, Path]

logger = logging.getLogger(__name__)


def _read_file(path: PathLike) -> bytes:
    if str(path).endswith(".gz"):
        with gzip.open(path, "rb") as fp:
            return fp.read()
    with open(path, "rb") as fp:
        return fp.read()


def _parse_header(data: bytes, magic: int, num_dims: int, path: PathLike) -> list[int]:
    header_length = 4 * (num_dims + 1)
    if len(data) < 4:
        raise TruncatedDataError(f"IDX file too short: {str(path)!r}")

    (actual_magic,) = unpack_from(">I", data, 0)
    if actual_magic != magic:
        raise FormatError(
            f"bad IDX magic number in {str(path)!r}: expected 0x{magic:08x}, "
            f"got 0x{actual_magic:08x}"
        )

    if len(data) < header_length:
        raise TruncatedDataError(f"IDX header truncated in {str(path)!r}")

    return list(unpack_from(f">{num_dims}I", data, 4))


def load_idx_matrix(
    path: PathLike, limit: Optional[int] = None
) -> tuple[np.ndarray, int, int]:
    """Loads an IDX image file into a matrix with one normalized image per
    row.

    Parameters:
        path: the path of the file; files ending in ``.gz`` are decompressed
            transparently
        limit: maximum number of images to return from the start of the file;
            ``None`` means all of them

    Returns:
        the matrix of pixel intensities, the width and the height of the
        images

    Raises:
        FormatError: if the magic number is not the one of image files
        TruncatedDataError: if the payload is shorter than the header declares
    """
    data = _read_file(path)
    count, rows, cols = _parse_header(data, IDX_IMAGE_MAGIC, 3, path)

    expected = count * rows * cols
    payload = data[16:]
    if len(payload) < expected:
        raise TruncatedDataError(
            f"IDX payload of {str(path)!r} has {len(payload)} bytes, "
            f"expected {expected}"
        )
    if len(payload) > expected:
        raise FormatError(
            f"IDX file {str(path)!r} has {len(payload) - expected} trailing bytes"
        )

    if limit is not None:
        if limit < 0:
            raise ValueError(f"invalid limit: {limit}")
        count = min(count, limit)

    raw = np.frombuffer(payload, dtype=np.uint8, count=count * rows * cols)
    logger.debug(f"Loaded {count} images of size {cols}x{rows} from {path}")
    return normalize_bytes(raw.reshape(count, rows * cols)), cols, rows


def load_idx(path: PathLike, limit: Optional[int] = None) -> list[Image]:
    """Loads the images stored in an IDX image file.

    Pixels are normalized by dividing the stored bytes by 255.

    Parameters:
        path: the path of the file
        limit: maximum number of images to return from the start of the file

    Returns:
        the images in the order they appear in the file
    """
    matrix, width, height = load_idx_matrix(path, limit)
    return [Image(width=width, height=height, pixels=row) for row in matrix]


def load_idx_labels(path: PathLike) -> np.ndarray:
    """Loads the labels stored in an IDX label file.

    Returns:
        the labels as an array of unsigned bytes
    """
    data = _read_file(path)
    (count,) = _parse_header(data, IDX_LABEL_MAGIC, 1, path)
    payload = data[8:]
    if len(payload) < count:
        raise TruncatedDataError(
            f"IDX payload of {str(path)!r} has {len(payload)} bytes, expected {count}"
        )
    return np.frombuffer(payload, dtype=np.uint8, count=count).copy()


def find_mnist_file(directory: PathLike, kind: str) -> Path:
    """Finds one of the standard MNIST files in the given directory.

    Parameters:
        directory: the directory to search
        kind: ``train``, ``test``, ``train-labels`` or ``test-labels``

    Returns:
        the path of the file; compressed variants with a ``.gz`` extension
        are also accepted

    Raises:
        ValueError: if the kind is unknown
        FileNotFoundError: if no matching file exists in the directory
    """
    try:
        names = MNIST_FILE_NAMES[kind]
    except KeyError:
        raise ValueError(f"unknown MNIST file kind: {kind!r}") from None

    directory = Path(directory)
    for name in names:
        for candidate in (directory / name, directory / f"{name}.gz"):
            if candidate.is_file():
                return candidate

    raise FileNotFoundError(f"no MNIST {kind} file found in {str(directory)!r}")
