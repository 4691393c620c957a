"""Memoryless Gaussian broadcast channel.

Receiver ``k`` observes ``Y[k, i] = X[i] + Z[k, i]`` with independent
zero-mean Gaussian noise of variance ``noise_variances[k]``. Receivers are
kept sorted from the noisiest to the least noisy; the permutation applied to
the caller's ordering is stored on the model.

Noise comes from NumPy's ``PCG64`` bit generator (``numpy.random.default_rng``)
and its ziggurat ``standard_normal``. A given ``(model, n, seed)`` therefore
yields bit-identical samples for a fixed NumPy major version; fixtures in the
test-suite were frozen with NumPy 2.x.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = ['ChannelModel', 'NoiseBlock', 'make_channel', 'sample_noise',
           'sample_noise_batch', 'transmit', 'average_power']


@dataclass(frozen=True)
class ChannelModel:
    """Power budget and per-receiver noise variances of a Gaussian BC.

    Attributes
    ----------
    power_budget : float
        Expected average energy per channel use, ``P``.
    noise_variances : tuple of float
        ``sigma_k^2`` sorted in nonincreasing order.
    order : tuple of int
        ``order[k]`` is the caller's (zero-based) index of the receiver stored
        at position ``k``.
    """
    power_budget: float
    noise_variances: tuple
    order: tuple = None

    def __post_init__(self):
        variances = tuple(float(v) for v in self.noise_variances)
        object.__setattr__(self, 'noise_variances', variances)
        if self.order is None:
            object.__setattr__(self, 'order', tuple(range(len(variances))))
        if not self.power_budget > 0:
            raise ValidationError(
                f"power budget must be positive, got {self.power_budget!r}")
        if not variances:
            raise ValidationError("at least one receiver is required")
        for k, v in enumerate(variances):
            if not v > 0:
                raise ValidationError(
                    f"noise variance at index {k} must be positive, got {v!r}")
        if any(a < b for a, b in zip(variances, variances[1:])):
            raise ValidationError(
                "noise variances must be nonincreasing; use make_channel()")

    @property
    def num_receivers(self):
        return len(self.noise_variances)

    @property
    def sigma2(self):
        """Noise variances as a float array."""
        return np.asarray(self.noise_variances)

    def with_power(self, power):
        return ChannelModel(power, self.noise_variances, self.order)


@dataclass(frozen=True, eq=False)
class NoiseBlock:
    """A ``K x n`` realization of the receivers' noise.

    Row ``k`` holds ``Z[k, 0..n-1]``. ``seed`` is ``None`` for blocks built by
    hand (e.g. forced-noise fixtures).
    """
    samples: np.ndarray
    seed: int = None

    def __post_init__(self):
        arr = np.array(self.samples, dtype=float)
        if arr.ndim != 2:
            raise ValidationError("noise samples must be a K x n matrix")
        arr.setflags(write=False)
        object.__setattr__(self, 'samples', arr)

    @property
    def shape(self):
        return self.samples.shape

    @classmethod
    def zeros(cls, num_receivers, n):
        return cls(np.zeros((num_receivers, n)))


def make_channel(power, variances):
    """Build a :class:`ChannelModel`, sorting receivers by noise variance.

    Parameters
    ----------
    power : float
        Power budget ``P > 0``.
    variances : sequence of float
        Noise variances in the caller's receiver order.

    Returns
    -------
    ChannelModel
        ``order`` maps stored positions back to the caller's indices; ties keep
        their original relative order.

    Raises
    ------
    ValidationError
        If ``power`` or any variance is not strictly positive (the message
        names the offending index in the caller's ordering).

    Examples
    --------
    >>> ch = make_channel(10.0, [0.5, 2.0])
    >>> ch.noise_variances, ch.order
    ((2.0, 0.5), (1, 0))
    """
    if not float(power) > 0:
        raise ValidationError(f"power must be positive, got {power!r}")
    variances = [float(v) for v in variances]
    for k, v in enumerate(variances):
        if not v > 0:
            raise ValidationError(
                f"noise variance at index {k} must be positive, got {v!r}")
    order = tuple(sorted(range(len(variances)), key=lambda k: -variances[k]))
    return ChannelModel(float(power), tuple(variances[k] for k in order), order)


def sample_noise(ch, n, seed):
    """Draw one ``K x n`` noise block; entry ``(k, i) ~ N(0, sigma_k^2)``."""
    if int(n) < 1:
        raise ValidationError(f"block length must be >= 1, got {n!r}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((ch.num_receivers, int(n)))
    z *= np.sqrt(ch.sigma2)[:, None]
    return NoiseBlock(z, seed)


def sample_noise_batch(ch, n, trials, rng):
    """Draw ``trials`` independent noise blocks as a ``(trials, K, n)`` array.

    ``rng`` is a :class:`numpy.random.Generator` or a seed.
    """
    if int(n) < 1 or int(trials) < 1:
        raise ValidationError("block length and trial count must be >= 1")
    rng = np.random.default_rng(rng)
    z = rng.standard_normal((int(trials), ch.num_receivers, int(n)))
    z *= np.sqrt(ch.sigma2)[None, :, None]
    return z


def transmit(x, noise):
    """Pass the input ``x`` through the channel: row ``k`` is ``x + Z[k]``.

    ``noise`` may be a :class:`NoiseBlock` or a plain ``K x n`` array.
    """
    z = noise.samples if isinstance(noise, NoiseBlock) else np.asarray(noise)
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or z.ndim != 2 or z.shape[1] != x.shape[0]:
        raise ValidationError(
            f"input of length {x.shape} does not match noise of shape {z.shape}")
    return x[None, :] + z


def average_power(x):
    """Empirical average energy per symbol, ``sum(x**2) / n``."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise ValidationError("cannot take the power of an empty vector")
    return float(np.dot(x, x) / x.size)
