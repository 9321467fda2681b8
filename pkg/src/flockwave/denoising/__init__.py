"""Image denoising with deep belief networks by detecting and neutralizing
the noise nodes of the last layer.
"""

from .config import load_config, RunConfiguration
from .datasets import (
    add_awgn,
    batches,
    make_pairs,
    PairedDataset,
    training_mixture,
)
from .dbn import (
    Activations,
    Dbn,
    encode,
    encode_batch,
    greedy_pretrain,
    Pretrainer,
    PretrainingProgress,
    reconstruct,
    reconstruct_batch,
)
from .denoising import (
    average_relative_activity,
    build_profile,
    denoise,
    denoise_batch,
    detect_noise_nodes,
    load_profile,
    neutral_values,
    NoiseProfile,
    relative_activity,
    save_profile,
)
from .enumeration import exact_loglik_grad, partition_function
from .errors import CapacityError, FormatError, StageError, TruncatedDataError
from .experiment import ExperimentReport, run_experiment
from .idx import load_idx, load_idx_labels
from .images import image_grid, Image, load_pgm, mse, save_pgm
from .rbm import (
    cd1_step,
    energy,
    hidden_activation,
    Rbm,
    sample_bernoulli,
    TrainConfig,
    visible_activation,
    VisibleKind,
)
from .serialization import load_model, save_model
from .version import __version__

__all__ = (
    "add_awgn",
    "average_relative_activity",
    "batches",
    "build_profile",
    "cd1_step",
    "denoise",
    "denoise_batch",
    "detect_noise_nodes",
    "encode",
    "encode_batch",
    "energy",
    "exact_loglik_grad",
    "greedy_pretrain",
    "hidden_activation",
    "image_grid",
    "load_config",
    "load_idx",
    "load_idx_labels",
    "load_model",
    "load_pgm",
    "load_profile",
    "make_pairs",
    "mse",
    "neutral_values",
    "partition_function",
    "reconstruct",
    "reconstruct_batch",
    "relative_activity",
    "run_experiment",
    "sample_bernoulli",
    "save_model",
    "save_pgm",
    "save_profile",
    "training_mixture",
    "visible_activation",
    "Activations",
    "CapacityError",
    "Dbn",
    "ExperimentReport",
    "FormatError",
    "Image",
    "NoiseProfile",
    "PairedDataset",
    "Pretrainer",
    "PretrainingProgress",
    "Rbm",
    "RunConfiguration",
    "StageError",
    "TrainConfig",
    "TruncatedDataError",
    "VisibleKind",
    "__version__",
)
