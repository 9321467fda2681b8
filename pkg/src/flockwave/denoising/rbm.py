"""Restricted Boltzmann machines and contrastive divergence learning."""

import logging
import numpy as np

from dataclasses import dataclass
from enum import Enum
from numpy.random import Generator
from scipy.special import expit, logit
from typing import Callable, Optional

from .datasets import batches

__all__ = (
    "cd1_step",
    "cd_gradient",
    "energy",
    "hidden_activation",
    "initial_visible_bias",
    "Rbm",
    "RbmGradient",
    "reconstruction_error",
    "sample_bernoulli",
    "train_rbm",
    "TrainConfig",
    "visible_activation",
    "VisibleKind",
)

logger = logging.getLogger(__name__)


class VisibleKind(Enum):
    """Kind of the visible units of a machine."""

    #: Stochastic binary units
    BINARY = "binary"

    #: Real-valued units in the unit interval that take their mean activation
    #: as their value and are never sampled
    UNIT_INTERVAL = "unit-interval"


def _as_float_array(value, name: str, ndim: int) -> np.ndarray:
    result = np.array(value, dtype=np.float64)
    if result.ndim != ndim:
        raise ValueError(f"{name} must have {ndim} dimensions, got {result.ndim}")
    if not np.all(np.isfinite(result)):
        raise ValueError(f"{name} must be finite")
    return result


@dataclass(eq=False)
class Rbm:
    """A restricted Boltzmann machine with an energy function of the form
    ``E(v, h) = -a.v - b.h - v.W.h``.
    """

    #: Weight matrix with one row per visible and one column per hidden unit
    weights: np.ndarray

    #: Visible biases (``a``)
    visible_bias: np.ndarray

    #: Hidden biases (``b``)
    hidden_bias: np.ndarray

    #: Kind of the visible units
    visible_kind: VisibleKind = VisibleKind.BINARY

    def __post_init__(self) -> None:
        self.weights = _as_float_array(self.weights, "weights", 2)
        self.visible_bias = _as_float_array(self.visible_bias, "visible bias", 1)
        self.hidden_bias = _as_float_array(self.hidden_bias, "hidden bias", 1)

        n_visible, n_hidden = self.weights.shape
        if n_visible == 0 or n_hidden == 0:
            raise ValueError("machine must have at least one visible and hidden unit")
        if self.visible_bias.shape[0] != n_visible:
            raise ValueError(
                f"visible bias has length {self.visible_bias.shape[0]}, "
                f"expected {n_visible}"
            )
        if self.hidden_bias.shape[0] != n_hidden:
            raise ValueError(
                f"hidden bias has length {self.hidden_bias.shape[0]}, "
                f"expected {n_hidden}"
            )

        self.visible_kind = VisibleKind(self.visible_kind)

    @classmethod
    def create(
        cls,
        n_visible: int,
        n_hidden: int,
        *,
        rng: Generator,
        visible_kind: VisibleKind = VisibleKind.BINARY,
        weight_scale: float = 0.01,
    ) -> "Rbm":
        """Creates a new machine with Gaussian random weights of the given
        standard deviation and zero biases.
        """
        if weight_scale < 0:
            raise ValueError(f"weight scale must be non-negative, got {weight_scale}")
        return cls(
            weights=rng.standard_normal((n_visible, n_hidden)) * weight_scale,
            visible_bias=np.zeros(n_visible),
            hidden_bias=np.zeros(n_hidden),
            visible_kind=visible_kind,
        )

    @classmethod
    def zeros(
        cls,
        n_visible: int,
        n_hidden: int,
        visible_kind: VisibleKind = VisibleKind.BINARY,
    ) -> "Rbm":
        """Creates a new machine with all parameters set to zero."""
        return cls(
            weights=np.zeros((n_visible, n_hidden)),
            visible_bias=np.zeros(n_visible),
            hidden_bias=np.zeros(n_hidden),
            visible_kind=visible_kind,
        )

    @property
    def n_visible(self) -> int:
        """Number of visible units."""
        return self.weights.shape[0]

    @property
    def n_hidden(self) -> int:
        """Number of hidden units."""
        return self.weights.shape[1]

    def copy(self) -> "Rbm":
        """Returns a deep copy of the machine."""
        return Rbm(
            weights=self.weights.copy(),
            visible_bias=self.visible_bias.copy(),
            hidden_bias=self.hidden_bias.copy(),
            visible_kind=self.visible_kind,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Rbm):
            return NotImplemented
        return (
            self.visible_kind is other.visible_kind
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.visible_bias, other.visible_bias)
            and np.array_equal(self.hidden_bias, other.hidden_bias)
        )

    def __repr__(self) -> str:
        return (
            f"Rbm(n_visible={self.n_visible}, n_hidden={self.n_hidden}, "
            f"visible_kind={self.visible_kind.value!r})"
        )


@dataclass(frozen=True)
class TrainConfig:
    """Training parameters of a single machine."""

    #: Learning rate of the parameter updates
    learning_rate: float = 0.1

    #: Number of passes over the training data
    epochs: int = 10

    #: Number of training vectors averaged in a single update
    batch_size: int = 100

    #: Seed of the random number generator used for initialization and
    #: sampling
    seed: int = 0

    #: Standard deviation of the initial Gaussian weights
    weight_scale: float = 0.01

    #: Coefficient of the L2 penalty on the weights; zero disables it
    weight_decay: float = 0.0

    #: Number of Gibbs steps in the negative phase of contrastive divergence
    cd_steps: int = 1

    #: Whether to start the visible biases from the log-odds of the mean
    #: training data instead of zero
    init_visible_bias: bool = False

    def __post_init__(self) -> None:
        if not self.learning_rate >= 0:
            raise ValueError(
                f"learning rate must be non-negative, got {self.learning_rate}"
            )
        if self.epochs < 0:
            raise ValueError(f"number of epochs must be non-negative, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be positive, got {self.batch_size}")
        if self.weight_scale < 0:
            raise ValueError(
                f"weight scale must be non-negative, got {self.weight_scale}"
            )
        if self.weight_decay < 0:
            raise ValueError(
                f"weight decay must be non-negative, got {self.weight_decay}"
            )
        if self.cd_steps < 1:
            raise ValueError(f"number of CD steps must be positive, got {self.cd_steps}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")


@dataclass
class RbmGradient:
    """Parameter-shaped gradient (or gradient estimate) of a machine."""

    weights: np.ndarray
    visible_bias: np.ndarray
    hidden_bias: np.ndarray

    def flatten(self) -> np.ndarray:
        """Returns all the components of the gradient in a single vector."""
        return np.concatenate(
            [self.weights.reshape(-1), self.visible_bias, self.hidden_bias]
        )

    def cosine(self, other: "RbmGradient") -> float:
        """Returns the cosine of the angle between this gradient and another
        one, or zero if either of them is the zero vector.
        """
        ours, theirs = self.flatten(), other.flatten()
        norm = float(np.linalg.norm(ours) * np.linalg.norm(theirs))
        return float(np.dot(ours, theirs) / norm) if norm > 0 else 0.0


def _check_width(vectors: np.ndarray, expected: int, what: str) -> np.ndarray:
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim not in (1, 2) or vectors.shape[-1] != expected:
        raise ValueError(
            f"{what} vector must have length {expected}, got shape {vectors.shape}"
        )
    return vectors


def energy(rbm: Rbm, v, h) -> float:
    """Returns the energy of a joint configuration of the visible and hidden
    units.
    """
    v = _check_width(v, rbm.n_visible, "visible")
    h = _check_width(h, rbm.n_hidden, "hidden")
    if v.ndim != 1 or h.ndim != 1:
        raise ValueError("energy is defined for a single configuration")
    return float(
        -np.dot(rbm.visible_bias, v)
        - np.dot(rbm.hidden_bias, h)
        - np.dot(v, rbm.weights @ h)
    )


def hidden_activation(rbm: Rbm, v) -> np.ndarray:
    """Returns the probabilities of the hidden units being on, given the
    state of the visible units.

    Accepts a single visible vector or a matrix with one vector per row.
    """
    v = _check_width(v, rbm.n_visible, "visible")
    return expit(v @ rbm.weights + rbm.hidden_bias)


def visible_activation(rbm: Rbm, h) -> np.ndarray:
    """Returns the mean activations of the visible units given the state of
    the hidden units. For binary units this is the probability of the unit
    being on; unit-interval units take this value directly.

    Accepts a single hidden vector or a matrix with one vector per row.
    """
    h = _check_width(h, rbm.n_hidden, "hidden")
    return expit(h @ rbm.weights.T + rbm.visible_bias)


def initial_visible_bias(data, eps: float = 1e-3) -> np.ndarray:
    """Returns visible biases that make a machine with zero weights reproduce
    the mean of the given training vectors, i.e. the log-odds of the mean
    activation of each visible unit.

    Parameters:
        data: matrix of training vectors, one per row
        eps: mean activations are clipped into ``[eps, 1 - eps]`` so units
            that are always off or always on get finite biases

    Raises:
        ValueError: if there are no training vectors
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError("at least one training vector is needed")
    if not 0.0 < eps < 0.5:
        raise ValueError(f"eps must be in (0, 0.5), got {eps}")
    return logit(np.clip(data.mean(axis=0), eps, 1.0 - eps))


def sample_bernoulli(p, rng: Generator) -> np.ndarray:
    """Samples independent binary units that are on with the given
    probabilities.

    Returns:
        an array of zeros and ones with the same shape as the input
    """
    p = np.asarray(p, dtype=np.float64)
    if not np.all((p >= 0.0) & (p <= 1.0)):
        raise ValueError("probabilities must be in [0, 1]")
    return (rng.random(p.shape) < p).astype(np.float64)


def _reconstruct_visible(rbm: Rbm, h: np.ndarray, rng: Generator) -> np.ndarray:
    mean = visible_activation(rbm, h)
    if rbm.visible_kind is VisibleKind.UNIT_INTERVAL:
        return mean
    return sample_bernoulli(mean, rng)


def cd_gradient(rbm: Rbm, batch, rng: Generator, steps: int = 1) -> RbmGradient:
    """Estimates the log-likelihood gradient of a machine on a batch with
    contrastive divergence.

    Hidden states are sampled from the data, then ``steps`` alternating Gibbs
    updates produce the reconstruction. Statistics of the hidden units use
    probabilities both in the data and in the reconstruction phase.

    Returns:
        the batch average of the data statistics minus the reconstruction
        statistics

    Raises:
        ValueError: if the number of Gibbs steps is not positive or the
            batch is empty
    """
    if steps < 1:
        raise ValueError(f"number of CD steps must be positive, got {steps}")

    v0 = _check_width(batch, rbm.n_visible, "visible")
    if v0.ndim == 1:
        v0 = v0[np.newaxis, :]
    if v0.shape[0] == 0:
        raise ValueError("batch must not be empty")

    h0 = hidden_activation(rbm, v0)
    h = sample_bernoulli(h0, rng)
    for step in range(steps):
        vk = _reconstruct_visible(rbm, h, rng)
        hk = hidden_activation(rbm, vk)
        if step + 1 < steps:
            h = sample_bernoulli(hk, rng)

    count = v0.shape[0]
    return RbmGradient(
        weights=(v0.T @ h0 - vk.T @ hk) / count,
        visible_bias=(v0 - vk).mean(axis=0),
        hidden_bias=(h0 - hk).mean(axis=0),
    )


def cd1_step(rbm: Rbm, batch, config: TrainConfig, rng: Generator) -> Rbm:
    """Performs a single contrastive divergence update of a machine on a
    batch of visible vectors.

    The machine is updated in place.

    Returns:
        the updated machine
    """
    gradient = cd_gradient(rbm, batch, rng, config.cd_steps)
    rate = config.learning_rate
    if config.weight_decay:
        gradient.weights -= config.weight_decay * rbm.weights
    rbm.weights += rate * gradient.weights
    rbm.visible_bias += rate * gradient.visible_bias
    rbm.hidden_bias += rate * gradient.hidden_bias
    return rbm


def reconstruction_error(rbm: Rbm, data) -> float:
    """Returns the mean square error of the deterministic one-step
    reconstruction of the given visible vectors.
    """
    data = _check_width(data, rbm.n_visible, "visible")
    diff = data - visible_activation(rbm, hidden_activation(rbm, data))
    return float(np.mean(diff * diff))


def train_rbm(
    rbm: Rbm,
    data: np.ndarray,
    config: TrainConfig,
    rng: Generator,
    on_epoch: Optional[Callable[[int, float], None]] = None,
) -> Rbm:
    """Trains a machine with mini-batch contrastive divergence.

    The training vectors are visited in a fresh random order in every epoch.

    Parameters:
        rbm: the machine to train; it is updated in place
        data: matrix of training vectors, one per row
        config: the training parameters
        rng: random number generator for shuffling and sampling
        on_epoch: function to call after every epoch with the index of the
            epoch and the reconstruction error on the training data

    Returns:
        the trained machine
    """
    data = _check_width(data, rbm.n_visible, "visible")
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError("training data must be a non-empty matrix")

    for epoch in range(config.epochs):
        order = rng.permutation(data.shape[0])
        for batch in batches(order, config.batch_size):
            cd1_step(rbm, data[batch], config, rng)

        error = reconstruction_error(rbm, data)
        logger.debug(f"Epoch {epoch + 1}/{config.epochs}, reconstruction error {error:.6f}")
        if on_epoch:
            on_epoch(epoch, error)

    return rbm
