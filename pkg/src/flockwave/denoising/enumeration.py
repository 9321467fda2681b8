"""Exact quantities of small binary machines computed by exhaustive
enumeration of their configurations.

These functions are exponential in the number of units and are meant for
validating the approximate learning rules on tiny machines.
"""

import numpy as np

from scipy.special import expit, logsumexp

from .errors import CapacityError
from .rbm import Rbm, RbmGradient, VisibleKind

__all__ = (
    "all_binary_states",
    "average_log_likelihood",
    "exact_hidden_conditional",
    "exact_loglik_grad",
    "exact_visible_conditional",
    "free_energy",
    "joint_probabilities",
    "log_partition_function",
    "MAX_ENUMERATION_UNITS",
    "partition_function",
    "visible_marginals",
)

#: Maximum number of units that the enumeration functions are willing to
#: enumerate
MAX_ENUMERATION_UNITS = 20


def all_binary_states(n: int) -> np.ndarray:
    """Returns all binary vectors of length ``n`` as rows of a matrix, in
    lexicographic order.
    """
    if n > MAX_ENUMERATION_UNITS:
        raise CapacityError(f"cannot enumerate {n} binary units")
    codes = np.arange(2**n)[:, np.newaxis]
    shifts = np.arange(n - 1, -1, -1)[np.newaxis, :]
    return ((codes >> shifts) & 1).astype(np.float64)


def _check_enumerable(rbm: Rbm) -> None:
    if rbm.visible_kind is not VisibleKind.BINARY:
        raise ValueError("exact enumeration requires binary visible units")
    total = rbm.n_visible + rbm.n_hidden
    if total > MAX_ENUMERATION_UNITS:
        raise CapacityError(
            f"machine has {total} units, at most {MAX_ENUMERATION_UNITS} "
            f"can be enumerated"
        )


def _negative_energies(rbm: Rbm, v: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Returns the matrix of ``-E(v, h)`` for every row of ``v`` and every
    row of ``h``.
    """
    return (
        (v @ rbm.visible_bias)[:, np.newaxis]
        + (h @ rbm.hidden_bias)[np.newaxis, :]
        + v @ rbm.weights @ h.T
    )


def log_partition_function(rbm: Rbm) -> float:
    """Returns the logarithm of the partition function of a binary machine."""
    _check_enumerable(rbm)
    v = all_binary_states(rbm.n_visible)
    h = all_binary_states(rbm.n_hidden)
    return float(logsumexp(_negative_energies(rbm, v, h)))


def partition_function(rbm: Rbm) -> float:
    """Returns the partition function of a binary machine, i.e. the sum of
    ``exp(-E(v, h))`` over all joint configurations.

    Raises:
        CapacityError: if the machine has more than 20 units in total
    """
    return float(np.exp(log_partition_function(rbm)))


def joint_probabilities(rbm: Rbm) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns the probability of every joint configuration of a binary
    machine.

    Returns:
        the matrix of visible states, the matrix of hidden states and the
        matrix of joint probabilities indexed by visible and hidden state
    """
    _check_enumerable(rbm)
    v = all_binary_states(rbm.n_visible)
    h = all_binary_states(rbm.n_hidden)
    log_weights = _negative_energies(rbm, v, h)
    return v, h, np.exp(log_weights - logsumexp(log_weights))


def free_energy(rbm: Rbm, v) -> np.ndarray:
    """Returns the free energy of visible vectors, with the hidden units
    summed out analytically.
    """
    v = np.asarray(v, dtype=np.float64)
    return -(v @ rbm.visible_bias) - np.logaddexp(
        0.0, v @ rbm.weights + rbm.hidden_bias
    ).sum(axis=-1)


def visible_marginals(rbm: Rbm, v) -> np.ndarray:
    """Returns the marginal probabilities ``p(v)`` of the given visible
    vectors under a binary machine.
    """
    return np.exp(-free_energy(rbm, v) - log_partition_function(rbm))


def average_log_likelihood(rbm: Rbm, data) -> float:
    """Returns the exact average log-probability of the given visible vectors
    under a binary machine.
    """
    data = np.atleast_2d(np.asarray(data, dtype=np.float64))
    log_z = log_partition_function(rbm)
    return float(np.mean(-free_energy(rbm, data) - log_z))


def exact_hidden_conditional(rbm: Rbm, v) -> np.ndarray:
    """Returns ``p(h_j = 1 | v)`` for every hidden unit by enumerating all
    hidden configurations.
    """
    if rbm.n_hidden > MAX_ENUMERATION_UNITS:
        raise CapacityError(f"cannot enumerate {rbm.n_hidden} hidden units")
    v = np.asarray(v, dtype=np.float64)[np.newaxis, :]
    h = all_binary_states(rbm.n_hidden)
    log_weights = _negative_energies(rbm, v, h)[0]
    weights = np.exp(log_weights - logsumexp(log_weights))
    return weights @ h


def exact_visible_conditional(rbm: Rbm, h) -> np.ndarray:
    """Returns ``p(v_i = 1 | h)`` for every visible unit by enumerating all
    visible configurations.
    """
    if rbm.n_visible > MAX_ENUMERATION_UNITS:
        raise CapacityError(f"cannot enumerate {rbm.n_visible} visible units")
    h = np.asarray(h, dtype=np.float64)[np.newaxis, :]
    v = all_binary_states(rbm.n_visible)
    log_weights = _negative_energies(rbm, v, h)[:, 0]
    weights = np.exp(log_weights - logsumexp(log_weights))
    return weights @ v


def exact_loglik_grad(rbm: Rbm, data) -> RbmGradient:
    """Returns the exact gradient of the average log-likelihood of the given
    visible vectors with respect to the parameters of a binary machine.

    The data expectations marginalize the hidden units analytically; the
    model expectations enumerate every joint configuration.
    """
    data = np.atleast_2d(np.asarray(data, dtype=np.float64))
    if data.shape[0] == 0:
        raise ValueError("data must not be empty")

    v, h, p = joint_probabilities(rbm)

    data_hidden = expit(data @ rbm.weights + rbm.hidden_bias)
    count = data.shape[0]

    return RbmGradient(
        weights=data.T @ data_hidden / count - v.T @ p @ h,
        visible_bias=data.mean(axis=0) - p.sum(axis=1) @ v,
        hidden_bias=data_hidden.mean(axis=0) - p.sum(axis=0) @ h,
    )
