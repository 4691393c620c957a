"""Monte Carlo error estimation with Wilson confidence intervals.

A *runner* is any callable ``seed -> TrialOutcome``. Trial ``i`` of an
estimate uses seed ``seed_base + i``, so any single trial can be replayed.
Sweep cells derive their base seed from a hash of the cell's parameters,
which makes every cell independent of grid order and of the other cells.
"""

import hashlib
import json
import math
from dataclasses import dataclass, field

from .errors import ValidationError

__all__ = ['TrialOutcome', 'TrialReport', 'TrialFailure', 'wilson_interval',
           'trial_seeds', 'estimate_error', 'report_from_counts', 'cell_key',
           'cell_seed', 'sweep', 'MIN_TRIALS', 'Z95']

MIN_TRIALS = 100
# Two-sided 95% standard-normal quantile.
Z95 = 1.959963984540054
EVENTS = ('E1', 'E2', 'E3')


@dataclass(frozen=True)
class TrialOutcome:
    error: bool
    power: float = math.nan
    fb_nats: float = 0.0
    events: frozenset = frozenset()


@dataclass(frozen=True)
class TrialReport:
    """Summary of a batch of trials.

    ``ci_low``/``ci_high`` form the 95% Wilson score interval for the error
    probability; ``below_resolution`` is set when no error was seen, in which
    case ``ci_high`` is the only meaningful figure.
    """
    trials: int
    errors: int
    p_hat: float
    ci_low: float
    ci_high: float
    mean_power: float = math.nan
    power_stderr: float = math.nan
    mean_fb_nats: float = 0.0
    event_counts: dict = field(default_factory=lambda: dict.fromkeys(EVENTS, 0))
    seed_base: int = 0

    @property
    def below_resolution(self):
        return self.errors == 0

    def to_dict(self):
        return {'trials': self.trials, 'errors': self.errors, 'p_hat': self.p_hat,
                'ci_low': self.ci_low, 'ci_high': self.ci_high,
                'mean_power': self.mean_power, 'power_stderr': self.power_stderr,
                'mean_fb_nats': self.mean_fb_nats,
                'event_counts': dict(self.event_counts),
                'seed_base': self.seed_base,
                'below_resolution': self.below_resolution}


class TrialFailure(RuntimeError):
    """A runner raised; ``seed`` replays the failing trial."""

    def __init__(self, seed, cause):
        super().__init__(f"trial with seed {seed} failed: {cause!r}")
        self.seed = seed


def wilson_interval(errors, trials, z=Z95):
    """Wilson score interval for a binomial proportion, clamped to [0, 1].

    >>> lo, hi = wilson_interval(0, 100)
    >>> lo, round(hi, 4)
    (0.0, 0.037)
    """
    if trials < 1 or not 0 <= errors <= trials:
        raise ValidationError(f"invalid counts: {errors} errors in {trials} trials")
    p = errors / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    lo = 0.0 if errors == 0 else max(0.0, centre - half)
    hi = 1.0 if errors == trials else min(1.0, centre + half)
    return lo, hi


def trial_seeds(seed_base, trials):
    return range(int(seed_base), int(seed_base) + int(trials))


def report_from_counts(errors, trials, seed_base=0, **extra):
    lo, hi = wilson_interval(errors, trials)
    return TrialReport(trials, errors, errors / trials, lo, hi,
                       seed_base=seed_base, **extra)


def estimate_error(runner, trials, seed_base=0, min_trials=MIN_TRIALS):
    """Run ``trials`` independent trials and summarize them.

    Parameters
    ----------
    runner : callable
        ``seed -> TrialOutcome``.
    trials : int
    seed_base : int
    min_trials : int
        Smaller batches are refused since the interval would be meaningless.

    Raises
    ------
    ValidationError
        If ``trials < min_trials``.
    TrialFailure
        If the runner raises; carries the seed of that trial.
    """
    if int(trials) < min_trials:
        raise ValidationError(f"need at least {min_trials} trials, got {trials}")
    errors = 0
    powers, fbs = [], []
    events = dict.fromkeys(EVENTS, 0)
    for s in trial_seeds(seed_base, trials):
        try:
            out = runner(s)
        except Exception as exc:
            raise TrialFailure(s, exc) from exc
        errors += bool(out.error)
        powers.append(out.power)
        fbs.append(out.fb_nats)
        for e in out.events:
            events[e] = events.get(e, 0) + 1
    n = len(powers)
    mean_p = math.fsum(powers) / n
    var = math.fsum((p - mean_p) ** 2 for p in powers) / max(n - 1, 1)
    return report_from_counts(errors, n, seed_base, mean_power=mean_p,
                              power_stderr=math.sqrt(var / n),
                              mean_fb_nats=math.fsum(fbs) / n,
                              event_counts=events)


def cell_key(params):
    """Canonical JSON text of a parameter mapping."""
    return json.dumps(params, sort_keys=True, separators=(',', ':'))


def cell_seed(seed, params):
    """63-bit seed from SHA-256 of the base seed and the cell parameters."""
    digest = hashlib.sha256(f"{int(seed)}|{cell_key(params)}".encode()).digest()
    return int.from_bytes(digest[:8], 'big') >> 1


def sweep(grid, make_runner, trials, seed):
    """Estimate the error probability at every point of ``grid``.

    Parameters
    ----------
    grid : iterable of dict
        JSON-serializable parameter mappings.
    make_runner : callable
        ``params -> runner``.

    Returns
    -------
    dict
        :func:`cell_key` of each cell mapped to its :class:`TrialReport`.
    """
    out = {}
    for params in grid:
        key = cell_key(params)
        if key in out:
            raise ValidationError(f"duplicate sweep cell {key}")
        out[key] = estimate_error(make_runner(params), trials,
                                  cell_seed(seed, params))
    return out
