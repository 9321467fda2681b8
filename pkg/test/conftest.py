import numpy as np

from pathlib import Path
from pytest import fixture
from struct import pack

from flockwave.denoising import Dbn, Rbm, VisibleKind


def write_idx_images(path: Path, data: np.ndarray) -> Path:
    """Writes an IDX image file from an array of shape (count, rows, cols)
    holding unsigned bytes.
    """
    data = np.asarray(data, dtype=np.uint8)
    count, rows, cols = data.shape
    with open(path, "wb") as fp:
        fp.write(pack(">IIII", 0x00000803, count, rows, cols))
        fp.write(data.tobytes())
    return path


def make_digits(count: int, side: int = 4, seed: int = 0) -> np.ndarray:
    """Creates near-binary synthetic "digits": horizontal or vertical bars on a
    dark background, as unsigned bytes of shape (count, side, side).
    """
    rng = np.random.default_rng(seed)
    result = np.zeros((count, side, side), dtype=np.uint8)
    for index in range(count):
        position = rng.integers(side)
        if index % 2:
            result[index, position, :] = 255
        else:
            result[index, :, position] = 255
    return result


@fixture
def mnist_dir(tmp_path: Path) -> Path:
    """Directory holding a tiny MNIST-like dataset of 4x4 images."""
    write_idx_images(tmp_path / "train-images-idx3-ubyte", make_digits(60, seed=1))
    write_idx_images(tmp_path / "t10k-images-idx3-ubyte", make_digits(20, seed=2))
    return tmp_path


@fixture
def zero_dbn() -> Dbn:
    """A 16-8-4 network with all parameters set to zero."""
    return Dbn(
        [
            Rbm.zeros(16, 8, VisibleKind.UNIT_INTERVAL),
            Rbm.zeros(8, 4, VisibleKind.BINARY),
        ]
    )


@fixture
def random_dbn() -> Dbn:
    """An untrained 16-8-4 network with large random weights."""
    return Dbn.create([16, 8, 4], seed=3, weight_scale=1.0)


@fixture
def paired_block_dbn() -> Dbn:
    """A hand-wired 16-8-4 network where every hidden unit pools two adjacent
    units of the layer below with log-ratio weights, so that activations of
    inputs made of 0, 0.5 and 1 come out as closed-form numbers.
    """
    log3 = np.log(3.0)
    lower = np.kron(np.eye(8), np.ones((2, 1))) * log3
    upper = np.kron(np.eye(4), np.ones((2, 1))) * 2 * log3
    return Dbn(
        [
            Rbm(
                weights=lower,
                visible_bias=np.zeros(16),
                hidden_bias=np.full(8, -log3),
                visible_kind=VisibleKind.UNIT_INTERVAL,
            ),
            Rbm(
                weights=upper,
                visible_bias=np.zeros(8),
                hidden_bias=np.full(4, -2 * log3),
            ),
        ]
    )
