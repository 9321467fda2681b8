"""Configuration of denoising experiments."""

from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Optional, Union

from .errors import FormatError
from .rbm import TrainConfig

__all__ = (
    "load_config",
    "parse_bool",
    "parse_config",
    "parse_float_list",
    "parse_widths",
    "RunConfiguration",
)

PathLike = Union[str, Path]


def parse_widths(value: str) -> tuple[int, ...]:
    """Parses a comma- or dash-separated list of layer widths, e.g.
    ``784,1000,500,250,100``.
    """
    parts = [part.strip() for part in value.replace("-", ",").split(",")]
    try:
        widths = tuple(int(part) for part in parts if part)
    except ValueError:
        raise ValueError(f"invalid layer widths: {value!r}") from None
    if len(widths) < 2 or any(width < 1 for width in widths):
        raise ValueError(f"invalid layer widths: {value!r}")
    return widths


def parse_bool(value: str) -> bool:
    """Parses a boolean flag written as ``true`` or ``false`` (also ``yes``,
    ``no``, ``on``, ``off``, ``1`` and ``0``), case insensitively.
    """
    normalized = value.strip().lower()
    if normalized in ("true", "yes", "on", "1"):
        return True
    if normalized in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"invalid boolean: {value!r}")


def parse_float_list(value: str) -> tuple[float, ...]:
    """Parses a comma-separated list of real numbers. Duplicates are dropped,
    the order of the first occurrences is kept.
    """
    result: list[float] = []
    for part in value.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            number = float(part)
        except ValueError:
            raise ValueError(f"invalid number: {part!r}") from None
        if number not in result:
            result.append(number)
    return tuple(result)


@dataclass(frozen=True)
class RunConfiguration:
    """Every parameter of a denoising experiment. The defaults reproduce the
    full-scale MNIST experiment.
    """

    #: Directory holding the MNIST IDX files
    mnist_dir: str = "."

    #: Directory where the model, the profile, the report and the image grid
    #: are written
    out_dir: str = "out"

    #: Layer widths of the network, starting with the number of pixels
    widths: tuple[int, ...] = (784, 1000, 500, 250, 100)

    #: Number of training epochs per layer
    epochs: int = 10

    #: Learning rate of contrastive divergence
    learning_rate: float = 0.1

    #: Number of training elements per parameter update
    batch_size: int = 100

    #: Standard deviation of the initial weights
    weight_scale: float = 0.01

    #: L2 penalty on the weights during training
    weight_decay: float = 0.0

    #: Number of Gibbs steps in contrastive divergence
    cd_steps: int = 1

    #: Whether to start visible biases from the log-odds of the data means
    init_visible_bias: bool = False

    #: Variance of the additive white Gaussian noise
    noise_variance: float = 0.2

    #: Threshold on the average relative activity of noise nodes
    threshold: float = 0.9

    #: Fallback thresholds to try, in order, when the main threshold yields
    #: no noise nodes or only noise nodes
    threshold_sweep: tuple[float, ...] = (0.7, 0.5, 0.3)

    #: Number of clean/noisy training pairs; the network is trained on twice
    #: as many elements
    train_count: int = 10000

    #: Number of test images
    test_count: int = 10000

    #: Number of test images shown in the image grid
    grid_samples: int = 10

    #: Master seed of every random number generator of the experiment
    seed: int = 0

    def __post_init__(self) -> None:
        if len(self.widths) < 2:
            raise ValueError("at least one hidden layer is needed")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")
        if any(not 0.0 <= value <= 1.0 for value in self.threshold_sweep):
            raise ValueError("sweep thresholds must be in [0, 1]")
        if self.noise_variance < 0:
            raise ValueError(
                f"noise variance must be non-negative, got {self.noise_variance}"
            )
        if self.train_count < 1 or self.test_count < 1:
            raise ValueError("training and test counts must be positive")
        if self.grid_samples < 0:
            raise ValueError(f"invalid number of grid samples: {self.grid_samples}")

        # Constructing the training parameters validates them
        _ = self.train_config

    @property
    def train_config(self) -> TrainConfig:
        """The training parameters of each layer of the network."""
        return TrainConfig(
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            batch_size=self.batch_size,
            seed=self.seed,
            weight_scale=self.weight_scale,
            weight_decay=self.weight_decay,
            cd_steps=self.cd_steps,
            init_visible_bias=self.init_visible_bias,
        )

    def format(self) -> str:
        """Formats the configuration as ``key = value`` lines, sorted by key,
        in the syntax accepted by `parse_config()`.
        """
        lines = []
        for name in sorted(f.name for f in fields(self)):
            lines.append(f"{name} = {_format_value(getattr(self, name))}")
        return "\n".join(lines) + "\n"

    def updated(self, **kwds: Any) -> "RunConfiguration":
        """Returns a copy of the configuration with the given keys replaced;
        keys whose value is ``None`` are left intact.
        """
        return replace(self, **{k: v for k, v in kwds.items() if v is not None})


def _format_value(value: Any) -> str:
    if isinstance(value, tuple):
        return ",".join(_format_value(item) for item in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


_CONVERTERS = {
    "mnist_dir": str,
    "out_dir": str,
    "widths": parse_widths,
    "epochs": int,
    "learning_rate": float,
    "batch_size": int,
    "weight_scale": float,
    "weight_decay": float,
    "cd_steps": int,
    "init_visible_bias": parse_bool,
    "noise_variance": float,
    "threshold": float,
    "threshold_sweep": parse_float_list,
    "train_count": int,
    "test_count": int,
    "grid_samples": int,
    "seed": int,
}


def parse_config(
    text: str, base: Optional[RunConfiguration] = None
) -> RunConfiguration:
    """Parses a configuration from flat ``key = value`` lines.

    Blank lines and lines starting with ``#`` are ignored; dashes and
    underscores are interchangeable in keys. Keys that do not appear keep
    their values from the base configuration.

    Raises:
        FormatError: if a line is malformed, a key is unknown or a value is
            invalid
    """
    values: dict[str, Any] = {}
    for line_number, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue

        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise FormatError(f"expected 'key = value' in line {line_number}")

        converter = _CONVERTERS.get(key)
        if converter is None:
            raise FormatError(f"unknown configuration key in line {line_number}: {key!r}")

        try:
            values[key] = converter(value.strip())
        except ValueError:
            raise FormatError(
                f"invalid value for {key!r} in line {line_number}: {value.strip()!r}"
            ) from None

    try:
        return replace(base or RunConfiguration(), **values)
    except ValueError as ex:
        raise FormatError(f"invalid configuration: {ex}") from None


def load_config(
    path: PathLike, base: Optional[RunConfiguration] = None
) -> RunConfiguration:
    """Loads a configuration file."""
    with open(path, "r", encoding="utf-8") as fp:
        return parse_config(fp.read(), base)
