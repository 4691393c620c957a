"""Gaussian tail function Q(x) and its logarithm.

``qfunc`` is accurate to ~1e-15 relative error wherever the result is a
normal float (x up to about 37.5). Past that the result is subnormal, so its
relative precision decays with the shrinking number of significant bits until
it underflows to 0 near x = 38.6. Code that probes extreme tails (the gamma
recursion at large n) must work with ``log_qfunc``, which stays finite and
accurate for arbitrarily large x.
"""

import math

import numpy as np
from scipy.special import erfc, erfcx

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
# erfcx(t) ~ 1/(t sqrt(pi)) * (1 - 1/(2t^2) + ...); past this the series is
# used directly so that x**2 never overflows.
_ASYMPTOTIC_FROM = 1e8


def qfunc(x):
    """Tail probability of the standard normal, ``Pr[N(0,1) > x]``.

    Parameters
    ----------
    x : float or array_like

    Returns
    -------
    float or ndarray
    """
    x = np.asarray(x, dtype=float)
    t = x / _SQRT2
    with np.errstate(under='ignore', over='ignore'):
        # erfc loses ~1e-13 relative accuracy in the far tail; the scaled form
        # erfcx(t) exp(-t^2) does not.
        out = np.where(x < 0.5, 0.5 * erfc(t),
                       0.5 * erfcx(np.maximum(t, 0.0)) * np.exp(-t * t))
    return float(out) if np.ndim(out) == 0 else out


def _log_q_scalar(x):
    if math.isnan(x):
        return math.nan
    if x == math.inf:
        return -math.inf
    if x < 0.0:
        return math.log1p(-0.5 * float(erfc(-x / _SQRT2)))
    if x < _ASYMPTOTIC_FROM:
        # Q(x) = erfcx(x/sqrt2) * exp(-x^2/2) / 2, no underflow in erfcx.
        return math.log(0.5 * float(erfcx(x / _SQRT2))) - 0.5 * x * x
    # Mills-ratio expansion; the correction terms are below 1e-16 here.
    return -0.5 * x * x - math.log(x) - _LOG_SQRT_2PI + math.log1p(-1.0 / (x * x))


def log_qfunc(x):
    """Natural log of :func:`qfunc`, finite for every finite ``x``.

    Parameters
    ----------
    x : float or array_like

    Returns
    -------
    float or ndarray
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        return _log_q_scalar(float(arr))
    return np.vectorize(_log_q_scalar, otypes=[float])(arr)
