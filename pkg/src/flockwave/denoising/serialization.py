"""Binary model files for deep belief networks.

The format is little-endian: the magic bytes ``DBNM``, a 32-bit version
number and a 32-bit layer count, followed by, for each machine, its number of
visible and hidden units as 32-bit integers and then the visible biases, the
hidden biases and the row-major weight matrix as 64-bit floats.
"""

import numpy as np

from pathlib import Path
from struct import calcsize, pack, unpack_from
from typing import Union

from .dbn import Dbn
from .errors import FormatError, TruncatedDataError
from .rbm import Rbm, VisibleKind

__all__ = ("dump_model", "load_model", "parse_model", "save_model")

MODEL_MAGIC = b"DBNM"
MODEL_VERSION = 1

_HEADER = "<4sII"
_LAYER_HEADER = "<II"
_FLOAT = np.dtype("<f8")

PathLike = Union[str, Path]


def dump_model(dbn: Dbn) -> bytes:
    """Returns the binary representation of a network."""
    chunks = [pack(_HEADER, MODEL_MAGIC, MODEL_VERSION, len(dbn.layers))]
    for rbm in dbn.layers:
        chunks.append(pack(_LAYER_HEADER, rbm.n_visible, rbm.n_hidden))
        for array in (rbm.visible_bias, rbm.hidden_bias, rbm.weights):
            chunks.append(np.ascontiguousarray(array, dtype=_FLOAT).tobytes())
    return b"".join(chunks)


def _read_floats(data: bytes, offset: int, count: int) -> tuple[np.ndarray, int]:
    end = offset + count * _FLOAT.itemsize
    if end > len(data):
        raise TruncatedDataError(
            f"model file ends at byte {len(data)}, expected at least {end}"
        )
    return np.frombuffer(data, dtype=_FLOAT, count=count, offset=offset).astype(
        np.float64
    ), end


def parse_model(data: bytes) -> Dbn:
    """Parses the binary representation of a network.

    Raises:
        FormatError: if the magic bytes, the version or the layer dimensions
            are invalid
        TruncatedDataError: if the data ends prematurely
    """
    if len(data) < calcsize(_HEADER):
        raise TruncatedDataError("model file too short")

    magic, version, num_layers = unpack_from(_HEADER, data, 0)
    if magic != MODEL_MAGIC:
        raise FormatError(
            f"bad model file magic: expected {MODEL_MAGIC!r}, got {magic!r}"
        )
    if version != MODEL_VERSION:
        raise FormatError(f"unsupported model file version: {version}")
    if num_layers < 1:
        raise FormatError("model file contains no layers")

    offset = calcsize(_HEADER)
    layers: list[Rbm] = []
    for index in range(num_layers):
        if offset + calcsize(_LAYER_HEADER) > len(data):
            raise TruncatedDataError(f"model file truncated at layer {index}")
        n_visible, n_hidden = unpack_from(_LAYER_HEADER, data, offset)
        offset += calcsize(_LAYER_HEADER)

        if n_visible == 0 or n_hidden == 0:
            raise FormatError(f"layer {index} has invalid dimensions")
        if layers and layers[-1].n_hidden != n_visible:
            raise FormatError(
                f"layer {index} has {n_visible} visible units, expected "
                f"{layers[-1].n_hidden}"
            )

        visible_bias, offset = _read_floats(data, offset, n_visible)
        hidden_bias, offset = _read_floats(data, offset, n_hidden)
        weights, offset = _read_floats(data, offset, n_visible * n_hidden)

        try:
            layers.append(
                Rbm(
                    weights=weights.reshape(n_visible, n_hidden),
                    visible_bias=visible_bias,
                    hidden_bias=hidden_bias,
                    visible_kind=VisibleKind.UNIT_INTERVAL
                    if index == 0
                    else VisibleKind.BINARY,
                )
            )
        except ValueError as ex:
            raise FormatError(f"invalid parameters in layer {index}: {ex}") from None

    if offset != len(data):
        raise FormatError(f"model file has {len(data) - offset} trailing bytes")

    return Dbn(layers)


def save_model(dbn: Dbn, path: PathLike) -> None:
    """Saves a network into a model file."""
    data = dump_model(dbn)
    with open(path, "wb") as fp:
        fp.write(data)


def load_model(path: PathLike) -> Dbn:
    """Loads a network from a model file.

    Raises:
        FormatError: if the file is not a valid model file
    """
    with open(path, "rb") as fp:
        return parse_model(fp.read())
