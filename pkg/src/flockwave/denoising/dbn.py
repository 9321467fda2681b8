"""Deep belief networks built from a stack of restricted Boltzmann machines."""

import logging
import numpy as np

from contextlib import contextmanager
from dataclasses import dataclass
from functools import partial
from typing import Callable, Iterator, Optional, Sequence, Union

from .images import Image, stack_images
from .rbm import (
    hidden_activation,
    initial_visible_bias,
    Rbm,
    sample_bernoulli,
    train_rbm,
    TrainConfig,
    visible_activation,
    VisibleKind,
)
from .utils import create_rng, infer_image_shape

__all__ = (
    "Activations",
    "Dbn",
    "encode",
    "encode_batch",
    "greedy_pretrain",
    "Pretrainer",
    "PretrainingProgress",
    "reconstruct",
    "reconstruct_batch",
)

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class Dbn:
    """A deep belief network, i.e. an ordered stack of machines where the
    hidden layer of each machine is the visible layer of the next one.

    The first machine has real-valued visible units in the unit interval;
    all other units are binary.
    """

    #: The machines of the network, from the input layer upwards
    layers: list[Rbm]

    #: Width and height of the images processed by the network; inferred
    #: from the input width when omitted
    image_shape: Optional[tuple[int, int]] = None

    def __post_init__(self) -> None:
        self.layers = list(self.layers)
        if not self.layers:
            raise ValueError("network must have at least one layer")

        for index, (lower, upper) in enumerate(zip(self.layers, self.layers[1:])):
            if lower.n_hidden != upper.n_visible:
                raise ValueError(
                    f"layer {index} has {lower.n_hidden} hidden units but layer "
                    f"{index + 1} has {upper.n_visible} visible units"
                )

        if self.layers[0].visible_kind is not VisibleKind.UNIT_INTERVAL:
            raise ValueError("the input layer must have unit-interval visible units")
        if any(rbm.visible_kind is not VisibleKind.BINARY for rbm in self.layers[1:]):
            raise ValueError("layers above the input layer must have binary units")

        if self.image_shape is None:
            self.image_shape = infer_image_shape(self.input_width)
        else:
            width, height = self.image_shape
            if width * height != self.input_width:
                raise ValueError(
                    f"image shape {width}x{height} does not match input width "
                    f"{self.input_width}"
                )
            self.image_shape = (width, height)

    @classmethod
    def create(
        cls,
        widths: Sequence[int],
        *,
        seed: int = 0,
        weight_scale: float = 0.01,
    ) -> "Dbn":
        """Creates an untrained network with the given layer widths.

        The machine of layer ``k`` is initialized from the random stream
        ``k`` of the given seed, the same way as `greedy_pretrain()` does.
        """
        _check_widths(widths)
        return cls(
            [
                Rbm.create(
                    n_visible,
                    n_hidden,
                    rng=create_rng(seed, index),
                    visible_kind=_visible_kind_of_layer(index),
                    weight_scale=weight_scale,
                )
                for index, (n_visible, n_hidden) in enumerate(zip(widths, widths[1:]))
            ]
        )

    @property
    def input_width(self) -> int:
        """Number of units in the input layer."""
        return self.layers[0].n_visible

    @property
    def layer_widths(self) -> list[int]:
        """Number of units in each layer, from the input layer upwards."""
        return [self.input_width] + [rbm.n_hidden for rbm in self.layers]

    @property
    def top_width(self) -> int:
        """Number of units in the last layer."""
        return self.layers[-1].n_hidden

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dbn):
            return NotImplemented
        return len(self.layers) == len(other.layers) and all(
            ours == theirs for ours, theirs in zip(self.layers, other.layers)
        )

    def __repr__(self) -> str:
        widths = "-".join(str(width) for width in self.layer_widths)
        return f"Dbn({widths})"


@dataclass(frozen=True)
class Activations:
    """Activations of all the layers of a network for a single input, or for
    a batch of inputs with one input per row.
    """

    #: Activations of each layer, from the input layer upwards
    layers: tuple[np.ndarray, ...]

    @property
    def top(self) -> np.ndarray:
        """Activations of the last layer."""
        return self.layers[-1]

    def __getitem__(self, index: int) -> np.ndarray:
        return self.layers[index]

    def __len__(self) -> int:
        return len(self.layers)


@dataclass(frozen=True)
class PretrainingProgress:
    """Progress report emitted after each epoch of greedy pretraining."""

    #: Index of the machine being trained
    layer: int

    #: Index of the epoch that has just finished
    epoch: int

    #: Mean square one-step reconstruction error of the layer inputs
    reconstruction_error: float


def _check_widths(widths: Sequence[int]) -> None:
    if len(widths) < 2:
        raise ValueError("at least one hidden layer is needed")
    if any(width < 1 for width in widths):
        raise ValueError(f"invalid layer widths: {list(widths)}")


def _visible_kind_of_layer(index: int) -> VisibleKind:
    return VisibleKind.UNIT_INTERVAL if index == 0 else VisibleKind.BINARY


def _as_matrix(images: Union[Sequence[Image], np.ndarray]) -> np.ndarray:
    if isinstance(images, np.ndarray):
        return np.atleast_2d(np.asarray(images, dtype=np.float64))
    matrix, _, _ = stack_images(images)
    return matrix


ProgressHandler = Callable[[PretrainingProgress], None]


class Pretrainer:
    """Greedy layer-wise trainer of deep belief networks.

    Each machine is trained on the deterministic activations of the layer
    below it, or on the training images for the first machine. Progress
    handlers registered on the trainer are notified after each epoch.
    """

    _handlers: list[ProgressHandler]

    sample_hidden: bool
    """Whether to train each machine on sampled binary states of the layer
    below instead of its activation probabilities
    """

    def __init__(self, sample_hidden: bool = False) -> None:
        """Constructor.

        Parameters:
            sample_hidden: whether the data of the upper machines should be
                sampled binary states instead of probabilities
        """
        self._handlers = []
        self.sample_hidden = bool(sample_hidden)

    def add_progress_handler(self, func: ProgressHandler) -> Callable[[], None]:
        """Registers the given function to be called after every epoch of
        every layer.

        Returns:
            a function that can be called with no arguments to unregister the
            handler function
        """
        self._handlers.append(func)
        return partial(self._remove_progress_handler, func)

    @contextmanager
    def use_progress_handler(self, func: ProgressHandler) -> Iterator[None]:
        """Context manager that registers the given progress handler when the
        context is entered and unregisters it when the context is exited.
        """
        disposer = self.add_progress_handler(func)
        try:
            yield
        finally:
            disposer()

    def run(
        self,
        widths: Sequence[int],
        training_images: Union[Sequence[Image], np.ndarray],
        configs: Union[TrainConfig, Sequence[TrainConfig]],
        image_shape: Optional[tuple[int, int]] = None,
    ) -> Dbn:
        """Trains a new network greedily, one layer at a time.

        Parameters:
            widths: the number of units in each layer, starting with the
                number of pixels of the input images
            training_images: the training images, or a matrix of them with
                one image per row
            configs: the training parameters of all layers, or one set of
                parameters per machine. The machine of layer ``k`` draws its
                initial weights and samples from stream ``k`` of the seed of
                its configuration.
            image_shape: the width and height of the images; inferred from
                the images or the input width when omitted

        Returns:
            the trained network
        """
        _check_widths(widths)

        if isinstance(configs, TrainConfig):
            configs = [configs] * (len(widths) - 1)
        elif len(configs) != len(widths) - 1:
            raise ValueError(
                f"expected {len(widths) - 1} training configurations, "
                f"got {len(configs)}"
            )

        if image_shape is None and not isinstance(training_images, np.ndarray):
            if training_images:
                image_shape = training_images[0].shape

        data = _as_matrix(training_images)
        if data.shape[0] == 0:
            raise ValueError("at least one training image is needed")
        if data.shape[1] != widths[0]:
            raise ValueError(
                f"images have {data.shape[1]} pixels but the input layer has "
                f"{widths[0]} units"
            )

        layers: list[Rbm] = []
        for index, (n_visible, n_hidden) in enumerate(zip(widths, widths[1:])):
            config = configs[index]
            rng = create_rng(config.seed, index)
            rbm = Rbm.create(
                n_visible,
                n_hidden,
                rng=rng,
                visible_kind=_visible_kind_of_layer(index),
                weight_scale=config.weight_scale,
            )
            if config.init_visible_bias:
                rbm.visible_bias = initial_visible_bias(data)

            logger.info(
                f"Training layer {index + 1}/{len(widths) - 1} "
                f"({n_visible}x{n_hidden}) on {data.shape[0]} vectors"
            )
            train_rbm(
                rbm,
                data,
                config,
                rng,
                on_epoch=partial(self._notify_progress, index),
            )
            layers.append(rbm)

            if index + 2 < len(widths):
                data = hidden_activation(rbm, data)
                if self.sample_hidden:
                    data = sample_bernoulli(data, rng)

        return Dbn(layers, image_shape=image_shape)

    def _notify_progress(self, layer: int, epoch: int, error: float) -> None:
        progress = PretrainingProgress(
            layer=layer, epoch=epoch, reconstruction_error=error
        )
        for handler in self._handlers:
            handler(progress)

    def _remove_progress_handler(self, func: ProgressHandler) -> None:
        try:
            self._handlers.remove(func)
        except ValueError:
            pass


def greedy_pretrain(
    widths: Sequence[int],
    training_images: Union[Sequence[Image], np.ndarray],
    configs: Union[TrainConfig, Sequence[TrainConfig]],
    on_progress: Optional[ProgressHandler] = None,
) -> Dbn:
    """Trains a deep belief network greedily, one layer at a time, on the
    deterministic activations of the layers below.

    See `Pretrainer.run()` for the description of the parameters.
    """
    trainer = Pretrainer()
    if on_progress:
        trainer.add_progress_handler(on_progress)
    return trainer.run(widths, training_images, configs)


def encode_batch(dbn: Dbn, inputs, levels: Optional[int] = None) -> Activations:
    """Propagates a batch of input vectors upwards through the network.

    Parameters:
        dbn: the network
        inputs: matrix of input vectors, one per row
        levels: number of machines to propagate through; ``None`` means all
            of them

    Returns:
        the activation probabilities of every layer; the input layer is the
        first entry
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 2 or inputs.shape[1] != dbn.input_width:
        raise ValueError(
            f"inputs must have {dbn.input_width} columns, got shape {inputs.shape}"
        )

    layers = [inputs]
    for rbm in dbn.layers[:levels]:
        layers.append(hidden_activation(rbm, layers[-1]))
    return Activations(tuple(layers))


def encode(dbn: Dbn, image: Image) -> Activations:
    """Propagates an image upwards through the network.

    Returns:
        the activation probabilities of every layer; the last entry is the
        feature vector of the image
    """
    if image.size != dbn.input_width:
        raise ValueError(
            f"image has {image.size} pixels but the network expects "
            f"{dbn.input_width}"
        )
    activations = encode_batch(dbn, image.pixels[np.newaxis, :])
    return Activations(tuple(layer[0] for layer in activations.layers))


def reconstruct_batch(dbn: Dbn, top) -> np.ndarray:
    """Propagates a batch of last-layer vectors downwards through the network.

    Returns:
        the matrix of reconstructed input vectors, one per row
    """
    top = np.asarray(top, dtype=np.float64)
    if top.ndim != 2 or top.shape[1] != dbn.top_width:
        raise ValueError(
            f"top vectors must have {dbn.top_width} columns, got shape {top.shape}"
        )
    if not np.all((top >= 0.0) & (top <= 1.0)):
        raise ValueError("top activations must be in [0, 1]")

    result = top
    for rbm in reversed(dbn.layers):
        result = visible_activation(rbm, result)
    return np.clip(result, 0.0, 1.0)


def reconstruct(dbn: Dbn, top) -> Image:
    """Reconstructs an image from the activations of the last layer of the
    network with a deterministic downward pass.
    """
    top = np.asarray(top, dtype=np.float64)
    if top.ndim != 1:
        raise ValueError("expected a single top vector")
    width, height = dbn.image_shape  # type: ignore[misc]
    pixels = reconstruct_batch(dbn, top[np.newaxis, :])[0]
    return Image(width=width, height=height, pixels=pixels)
