"""Rate bounds for linear-feedback schemes on the Gaussian BC.

All rates are in nats per channel use.

The upper bound on the common rate of linear-feedback schemes is the common
value of the private-message outer-bound rates once the power fractions
``alpha_1..alpha_K`` are chosen to sum to one and equalize every rate. This
module finds those fractions by reducing the system to one unknown:

* fix ``alpha_1`` and let ``g = alpha_1 P / ((1 - alpha_1) P + sigma_1^2)``
  (so the target rate is ``log(1 + g) / 2``);
* every later rate equals the target iff
  ``alpha_k = g (beta_{k-1} P + N_k) / ((1 + g) P)`` where
  ``beta_k = 1 - alpha_1 - ... - alpha_k``;
* the fractions sum to one iff ``beta_K(alpha_1) = 0``.

``beta_K`` is positive near ``alpha_1 = 0`` and negative near 1, so a sign
scan followed by bisection brackets the root. The elimination is our own
derivation, so the result is always re-checked against the raw equations.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, SolverError, ValidationError

__all__ = ['AlphaStar', 'EffectiveNoises', 'capacity', 'effective_noises',
           'solve_alpha_star', 'linfb_upper_bound', 'prop2_envelope',
           'private_outer_rates']

SCAN_POINTS = 1000
MAX_BISECTIONS = 200
BETA_TOL = 1e-12


@dataclass(frozen=True)
class EffectiveNoises:
    """``N_k = (sum_{k' <= k} 1/sigma_k'^2)^-1`` for ``k = 1..K``."""
    values: tuple

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k):
        return self.values[k]


@dataclass(frozen=True)
class AlphaStar:
    """Solution of the rate-equalization system.

    Attributes
    ----------
    alphas : tuple of float
        Power fractions ``alpha_1*, ..., alpha_K*``.
    common_rate : float
        The equalized rate, which upper-bounds the linear-feedback capacity.
    residuals : tuple of float
        ``residuals[0] = sum(alphas) - 1``; ``residuals[k]`` is the rate of
        receiver ``k + 1`` minus the rate of receiver 1.
    degenerate : bool
        True for ``K = 1``, where the solution is the boundary ``alpha_1 = 1``.
    iterations : int
        Bisection steps taken.
    """
    alphas: tuple
    common_rate: float
    residuals: tuple
    degenerate: bool = False
    iterations: int = 0

    @property
    def max_residual(self):
        return max(abs(r) for r in self.residuals)


def capacity(ch):
    """Common-message capacity ``log(1 + P / sigma_1^2) / 2``."""
    return 0.5 * math.log1p(ch.power_budget / ch.noise_variances[0])


def effective_noises(ch):
    """Harmonic partial sums of the noise variances.

    >>> from bcfeedback.channel import make_channel
    >>> effective_noises(make_channel(1.0, [2.0, 1.0])).values
    (2.0, 0.6666666666666666)
    """
    vals = [float(v) for v in 1.0 / np.cumsum(1.0 / ch.sigma2)]
    vals[0] = ch.noise_variances[0]  # 1/(1/x) can be off by an ulp
    return EffectiveNoises(tuple(vals))


def _first_rate_gain(alpha1, ch):
    P, s1 = ch.power_budget, ch.noise_variances[0]
    return alpha1 * P / ((1.0 - alpha1) * P + s1)


def _eliminate(alpha1, ch, noises):
    """Fractions forced by equal rates given ``alpha_1``; returns (alphas, beta_K)."""
    P = ch.power_budget
    g = _first_rate_gain(alpha1, ch)
    alphas = [alpha1]
    beta = 1.0 - alpha1
    for N in noises[1:]:
        a = g * (beta * P + N) / ((1.0 + g) * P)
        alphas.append(a)
        beta -= a
    return alphas, beta


def _raw_residuals(alphas, ch, noises):
    rates = private_outer_rates(ch, alphas, _noises=noises, _check=False)
    res = [math.fsum(alphas) - 1.0]
    res.extend(r - rates[0] for r in rates[1:])
    return res, rates


def solve_alpha_star(ch, tol=1e-10):
    """Solve for the power fractions that equalize all outer-bound rates.

    Parameters
    ----------
    ch : ChannelModel
    tol : float
        Bound on every entry of ``AlphaStar.residuals``.

    Returns
    -------
    AlphaStar

    Raises
    ------
    SolverError
        If the scan of ``beta_K(alpha_1)`` over ``(tol, 1 - tol)`` shows no
        sign change or more than one (the latter would make the answer
        ambiguous, so all brackets are reported instead of picking one).
    AccuracyError
        If the converged fractions violate the raw equations by more than
        ``tol``, or fall outside ``(0, 1)``.
    """
    if not tol > 0:
        raise ValidationError(f"tol must be positive, got {tol!r}")
    K = ch.num_receivers
    if K == 1:
        rate = capacity(ch)
        return AlphaStar((1.0,), rate, (0.0,), degenerate=True)

    noises = effective_noises(ch).values
    grid = np.linspace(tol, 1.0 - tol, SCAN_POINTS)
    betas = [_eliminate(a, ch, noises)[1] for a in grid]
    trace = list(zip(grid.tolist(), betas))

    brackets = []
    for (a0, b0), (a1, b1) in zip(trace, trace[1:]):
        if b0 == 0.0:
            brackets.append((a0, a0))
        elif b0 * b1 < 0.0:
            brackets.append((a0, a1))
    if trace[-1][1] == 0.0:
        brackets.append((trace[-1][0], trace[-1][0]))
    if len(brackets) != 1:
        what = "no sign change" if not brackets else (
            f"{len(brackets)} sign changes")
        raise SolverError(
            f"beta_K(alpha_1) shows {what} on ({tol}, {1 - tol})",
            trace=trace, brackets=brackets)

    lo, hi = brackets[0]
    f_lo = _eliminate(lo, ch, noises)[1]
    best, f_best = lo, f_lo
    it = 0
    # Bisect to machine precision: a leftover beta_K is amplified by P / N_K
    # in the last rate, so |beta_K| < BETA_TOL alone is not enough there.
    while lo != hi and it < MAX_BISECTIONS:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        f_mid = _eliminate(mid, ch, noises)[1]
        it += 1
        if abs(f_mid) < abs(f_best):
            best, f_best = mid, f_mid
        if f_mid == 0.0:
            break
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    if abs(f_best) > BETA_TOL:
        raise AccuracyError(
            f"bisection stalled at |beta_K| = {abs(f_best):.3e}",
            trace=trace, brackets=brackets)

    alphas, _ = _eliminate(best, ch, noises)
    residuals, rates = _raw_residuals(alphas, ch, noises)
    if max(abs(r) for r in residuals) > tol:
        raise AccuracyError(
            f"residual {max(abs(r) for r in residuals):.3e} exceeds tol {tol}",
            trace=trace, brackets=brackets)
    if not all(0.0 < a < 1.0 for a in alphas):
        raise AccuracyError(
            f"solution {alphas} leaves the open unit interval",
            trace=trace, brackets=brackets)
    return AlphaStar(tuple(alphas), rates[0], tuple(residuals), False, it)


def linfb_upper_bound(ch, tol=1e-10):
    """Upper bound on the rates achievable by linear-feedback schemes."""
    star = solve_alpha_star(ch, tol)
    a1 = star.alphas[0]
    return 0.5 * math.log1p(_first_rate_gain(a1, ch))


def prop2_envelope(ch):
    """Closed-form envelope ``log(1 + P / sum_k N_k) / 2`` of the bound."""
    total = math.fsum(effective_noises(ch).values)
    return 0.5 * math.log1p(ch.power_budget / total)


def private_outer_rates(ch, alphas, _noises=None, _check=True):
    """Private-message outer-bound rates for given power fractions.

    ``R_k = log(1 + alpha_k P / ((1 - alpha_1 - ... - alpha_k) P + N_k)) / 2``.

    Raises
    ------
    ValidationError
        If the number of fractions is not K, a fraction lies outside
        ``[0, 1]``, or a partial sum exceeds one.
    """
    alphas = [float(a) for a in alphas]
    K = ch.num_receivers
    noises = _noises if _noises is not None else effective_noises(ch).values
    if _check:
        if len(alphas) != K:
            raise ValidationError(f"expected {K} fractions, got {len(alphas)}")
        for k, a in enumerate(alphas):
            if not 0.0 <= a <= 1.0:
                raise ValidationError(f"alpha[{k}] = {a} is outside [0, 1]")
    P = ch.power_budget
    rates = []
    partial = 0.0
    for k, (a, N) in enumerate(zip(alphas, noises)):
        partial = math.fsum(alphas[:k + 1])
        if _check and partial > 1.0 + 1e-12:
            raise ValidationError(
                f"partial sum of alphas up to index {k} is {partial} > 1")
        remaining = max(1.0 - partial, 0.0) if _check else 1.0 - partial
        rates.append(0.5 * math.log1p(a * P / (remaining * P + N)))
    return rates
