from math import isqrt
from numpy.random import Generator, PCG64, SeedSequence
from typing import Union

__all__ = ("create_rng", "infer_image_shape", "Seed")

#: Type specification for values accepted as random seeds
Seed = Union[int, tuple[int, ...], list[int]]


def create_rng(seed: Seed, *stream: int) -> Generator:
    """Creates a random number generator from the given seed and optional
    stream identifiers.

    The generator is always a PCG64 bit generator fed from a NumPy
    ``SeedSequence``; Gaussian variates drawn from it use NumPy's ziggurat
    method. Generators created with the same seed but different stream
    identifiers are statistically independent.

    Parameters:
        seed: the seed of the generator; an integer or a sequence of
            non-negative integers
        stream: additional integers that select an independent stream
            derived from the same seed

    Returns:
        the newly created generator
    """
    if isinstance(seed, (tuple, list)):
        entropy = [int(x) for x in seed]
    else:
        entropy = [int(seed)]
    entropy.extend(int(x) for x in stream)
    if any(x < 0 for x in entropy):
        raise ValueError(f"seeds must be non-negative, got {entropy!r}")
    return Generator(PCG64(SeedSequence(entropy)))


def infer_image_shape(size: int) -> tuple[int, int]:
    """Returns the (width, height) pair of a raster with the given number of
    pixels; square when possible, a single row otherwise.
    """
    if size <= 0:
        raise ValueError(f"invalid image size: {size}")
    side = isqrt(size)
    if side * side == size:
        return side, side
    return size, 1
