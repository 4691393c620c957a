"""Intermittent-feedback retransmission protocol for a common message.

The block of ``n`` channel uses is split into ``L`` phases ending at
``n_1 < n_2 < ... < n_L = n`` with ``n_1 = (1 - eps) n``. Phase 1 sends the
codeword of the message from a random Gaussian codebook of power ``P``. After
every phase but the last, each receiver feeds back its current guess (the only
nonzero feedback symbols). If some guess is wrong, the next phase opens with an
error signal of amplitude ``sqrt(P / gamma_{l-1})`` followed by the codeword
from a fresh codebook of power ``P / gamma_{l-1}``; otherwise the phase is
silent. A receiver redecodes only if the signal slot exceeds half the signal
amplitude.

``gamma_l`` stands for an upper bound on the probability that some receiver is
wrong after phase ``l``. It can be set analytically (:func:`gamma_recursion`,
:func:`analytic_log_gammas`) or measured (:func:`calibrate_gammas`).

Desk-scale simplifications: the message set has an explicit size ``M`` rather
than ``floor(exp(nR))``, codewords are normalized to exactly the codebook
power, and decoding is minimum-distance (maximum likelihood for AWGN).
Messages are zero-based codebook rows.
"""

import functools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import logsumexp
from scipy.stats import linregress

from .channel import NoiseBlock, sample_noise
from .errors import ConfigError, ValidationError
from .special import log_qfunc, qfunc

__all__ = [
    'IntermittentConfig', 'Codebook', 'PhaseRecord', 'ProtocolTrace',
    'FeedbackBudget', 'DecayReport', 'phase_schedule', 'shannon_exponent',
    'exponent_rate_limit', 'gamma_recursion', 'log_gamma_recursion',
    'analytic_log_gammas', 'build_codebook', 'nearest_codeword', 'run_protocol',
    'classify_error_events', 'feedback_budget', 'decay_order_diagnostic',
    'draw_message', 'protocol_runner', 'calibrate_gammas', 'calibrate_power',
    'baseline_config',
]

_CODEBOOK_TAG = 0xC0DE
_MESSAGE_TAG = 0x4D5347


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def phase_schedule(n, epsilon, L):
    """Phase boundaries ``n_1, ..., n_L``.

    ``n_1 = round((1 - eps) n)`` and ``n_l = n_1 + round((n - n_1)(l - 1)/(L - 1))``
    with halves rounded up, so ``n_L = n`` exactly.

    Raises
    ------
    ConfigError
        If ``eps`` is outside ``(0, 1)``, ``L < 1`` or some phase would be
        shorter than two channel uses.

    Examples
    --------
    >>> phase_schedule(90, 0.3, 4)
    [63, 72, 81, 90]
    """
    if not 0.0 < epsilon < 1.0:
        raise ConfigError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if int(L) < 1:
        raise ConfigError(f"L must be a positive integer, got {L!r}")
    n, L = int(n), int(L)
    if L == 1:
        bounds = [n]
    else:
        n1 = _round_half_up((1.0 - epsilon) * n)
        bounds = [n1 + _round_half_up((n - n1) * (l - 1) / (L - 1))
                  for l in range(1, L + 1)]
    lengths = np.diff([0] + bounds)
    if np.any(lengths < 2):
        raise ConfigError(
            f"phase lengths {lengths.tolist()} for n={n}, eps={epsilon}, L={L}"
            " include a phase shorter than 2 channel uses")
    return bounds


@dataclass(frozen=True)
class IntermittentConfig:
    """Parameters of one protocol instance.

    Attributes
    ----------
    L : int
        Number of phases.
    n : int
        Total blocklength.
    epsilon : float
        Fraction of the block reserved for retransmission phases.
    message_count : int
        Number of messages ``M``.
    power_budget : float
        Average power constraint ``P``.
    fb_rate : float
        Feedback rate in nats per channel use; must be at least
        ``(L - 1) log(M) / n``.
    gamma : tuple of float or None
        ``gamma_1..gamma_L``; the first ``L - 1`` set error-signal amplitudes
        and retransmission powers and must be strictly decreasing in
        ``(0, 1]``. ``None`` means not yet calibrated.
    seeds : tuple of int
        One codebook seed per phase.
    """
    L: int
    n: int
    epsilon: float
    message_count: int
    power_budget: float
    fb_rate: float
    gamma: tuple = None
    seeds: tuple = None

    def __post_init__(self):
        if self.seeds is None:
            object.__setattr__(self, 'seeds', tuple(range(self.L)))
        object.__setattr__(self, 'seeds', tuple(int(s) for s in self.seeds))
        if self.gamma is not None:
            object.__setattr__(self, 'gamma', tuple(float(g) for g in self.gamma))
        self.validate()

    def validate(self):
        phase_schedule(self.n, self.epsilon, self.L)
        if int(self.message_count) < 2:
            raise ConfigError("message_count must be at least 2")
        if not self.power_budget > 0:
            raise ConfigError("power_budget must be positive")
        if len(self.seeds) != self.L:
            raise ConfigError(f"need {self.L} codebook seeds, got {len(self.seeds)}")
        need = (self.L - 1) * math.log(self.message_count) / self.n
        if self.fb_rate < need * (1 - 1e-12):
            raise ConfigError(
                f"feedback rate {self.fb_rate} is below (L-1) log(M) / n = {need}")
        if self.gamma is not None:
            g = self.gamma
            if len(g) != self.L:
                raise ConfigError(f"need {self.L} gamma values, got {len(g)}")
            bad = [x for x in g if not 0.0 < x <= 1.0]
            if bad:
                raise ConfigError(f"gamma values must lie in (0, 1], got {bad}")
            used = g[:-1]
            if any(b >= a for a, b in zip(used, used[1:])):
                raise ConfigError(f"gamma_1..gamma_(L-1) must decrease, got {used}")

    @property
    def boundaries(self):
        return phase_schedule(self.n, self.epsilon, self.L)

    @property
    def codebook_lengths(self):
        """Codeword length per phase; later phases give one slot to the signal."""
        b = [0] + self.boundaries
        return [b[1]] + [b[l + 1] - b[l] - 1 for l in range(1, self.L)]

    def codebook_power(self, l):
        """Power of the phase-``l`` codebook (``l`` is 1-based)."""
        if l == 1:
            return self.power_budget
        self._require_gamma()
        return self.power_budget / self.gamma[l - 2]

    def codebook(self, l):
        return build_codebook(self.message_count, self.codebook_lengths[l - 1],
                              self.codebook_power(l), self.seeds[l - 1])

    def _require_gamma(self):
        if self.gamma is None:
            raise ConfigError("gamma values are required for retransmission phases")

    def to_dict(self):
        return {'L': self.L, 'n': self.n, 'epsilon': self.epsilon,
                'message_count': self.message_count,
                'power_budget': self.power_budget, 'fb_rate': self.fb_rate,
                'gamma': None if self.gamma is None else list(self.gamma),
                'seeds': list(self.seeds)}

    @classmethod
    def from_dict(cls, doc):
        """Build a config from a JSON-style mapping.

        ``seeds`` may be a list or a single base seed ``s`` (giving
        ``s, s+1, ...``); ``fb_rate`` defaults to ``(L - 1) log(M) / n``.
        """
        try:
            L, n = int(doc['L']), int(doc['n'])
            M = int(doc['message_count'])
            kw = dict(L=L, n=n, epsilon=float(doc['epsilon']), message_count=M,
                      power_budget=float(doc['power_budget']))
        except KeyError as exc:
            raise ConfigError(f"config lacks field {exc}") from None
        kw['fb_rate'] = float(doc.get('fb_rate', (L - 1) * math.log(M) / n))
        seeds = doc.get('seeds')
        if isinstance(seeds, int):
            seeds = tuple(range(seeds, seeds + L))
        kw['seeds'] = seeds
        kw['gamma'] = doc.get('gamma')
        return cls(**kw)


# ---------------------------------------------------------------------------
# Analytic model
# ---------------------------------------------------------------------------

def shannon_exponent(rate, snr):
    """Random-coding-style exponent ``snr/4 * (1 - sqrt(1 - exp(-2 rate)))``."""
    if rate < 0 or not snr > 0:
        raise ValidationError("need rate >= 0 and snr > 0")
    return 0.25 * snr * (1.0 - math.sqrt(-math.expm1(-2.0 * rate)))


def exponent_rate_limit(snr):
    """Largest rate for which :func:`shannon_exponent` is a valid exponent."""
    return 0.5 * math.log((2.0 + math.sqrt(snr * snr + 4.0)) / 4.0)


def log_gamma_recursion(log_rho, ch, power):
    """Log-domain form of :func:`gamma_recursion`.

    Stays finite where ``gamma`` itself underflows; a ``-inf`` entry means the
    value is below ``exp(-1.8e308)``.
    """
    log_rho = [float(r) for r in log_rho]
    s = np.sqrt(ch.sigma2)
    out = [log_rho[0]]
    for lr in log_rho[1:]:
        try:
            amp = math.sqrt(power) * math.exp(-0.5 * out[-1])
        except OverflowError:
            amp = math.inf
        terms = [math.log(2.0) + log_qfunc(amp / (2.0 * sk)) for sk in s]
        out.append(float(logsumexp([lr] + terms)))
    return tuple(out)


def gamma_recursion(rho, ch, power):
    """Upper bounds on the probability that some receiver errs after each phase.

    ``gamma_1 = rho_1`` and, for ``l >= 2``,
    ``gamma_l = rho_l + 2 sum_k Q(sqrt(P / gamma_{l-1}) / (2 sigma_k))``.
    ``gamma_{l-1} = 0`` makes the signal term vanish.
    """
    rho = [float(r) for r in rho]
    if any(not 0.0 <= r <= 1.0 for r in rho):
        raise ValidationError(f"rho values must lie in [0, 1], got {rho}")
    s = np.sqrt(ch.sigma2)
    out = [rho[0]]
    for r in rho[1:]:
        prev = out[-1]
        if prev == 0.0:
            out.append(r)
            continue
        x = math.sqrt(power / prev) / (2.0 * s)
        out.append(r + 2.0 * math.fsum(qfunc(x)))
    return tuple(out)


def _log_rho_bound(length, rate, snr, K):
    """``log min(1, K exp(-length * E(rate, snr)))`` in the log domain."""
    if rate >= exponent_rate_limit(snr) or length <= 0:
        return 0.0
    log_e = math.log(0.25 * snr) + math.log1p(-math.sqrt(-math.expm1(-2.0 * rate)))
    try:
        return min(0.0, math.log(K) - length * math.exp(log_e))
    except OverflowError:
        return -math.inf


def analytic_log_gammas(n, L, epsilon, rate, ch, log_rho1=None):
    """``log gamma_1..gamma_L`` from the random-coding exponent bound.

    ``rho_l`` is taken as ``min(1, K exp(-m E(R~, P~/sigma_1^2)))`` for a
    length-``m`` code of rate ``R~`` and power ``P~`` (with the exponent slack
    set to zero): phase 1 uses ``m = n_1``, ``R~ = nR/n_1``, ``P~ = P``;
    phase ``l`` uses ``m = eps n/(L-1) - 1``, ``R~ = R(L-1)/(eps - (L-1)/n)``
    and ``P~ = P/gamma_{l-1}``. ``log_rho1`` overrides the phase-1 value.
    """
    P, s1, K = ch.power_budget, ch.noise_variances[0], ch.num_receivers
    n1 = (1.0 - epsilon) * n if L > 1 else float(n)
    if log_rho1 is None:
        log_rho1 = _log_rho_bound(n1, n * rate / n1, P / s1, K)
    logs = [float(log_rho1)]
    if L > 1:
        length = epsilon * n / (L - 1) - 1.0
        denom = epsilon - (L - 1) / n
        r_tilde = rate * (L - 1) / denom if denom > 0 else math.inf
    for _ in range(2, L + 1):
        try:
            snr = P * math.exp(-logs[-1]) / s1
        except OverflowError:
            snr = math.inf
        log_rho = (-math.inf if snr == math.inf
                   else _log_rho_bound(length, r_tilde, snr, K))
        logs.append(log_gamma_recursion([logs[-1], log_rho], ch, P)[1])
    return tuple(logs)


@dataclass(frozen=True)
class DecayReport:
    """Regression of iterated logs of ``-log gamma`` against ``n``.

    ``sub_order`` is set when the transformed values are not growing or are
    fit better by ``log n`` than by ``n``, i.e. the decay is of lower order
    than tested.
    """
    slope: float
    intercept: float
    r_squared: float
    log_r_squared: float
    usable: tuple
    transformed: tuple
    sub_order: bool


def decay_order_diagnostic(ns, gammas, L, log_input=False):
    """Test for ``L``-th order exponential decay of ``gamma(n)``.

    ``log`` is applied ``L - 1`` times to ``-log gamma(n)``; under ``L``-th
    order decay the result grows linearly in ``n``.

    Parameters
    ----------
    ns : sequence of int
        At least four blocklengths.
    gammas : sequence of float
        ``gamma(n)`` in ``(0, 1)``, or ``log gamma(n)`` if ``log_input``.
    L : int

    Returns
    -------
    DecayReport
        Points where ``gamma >= 1`` or an intermediate log argument is not
        positive are marked unusable and left out of the fit.
    """
    ns = np.asarray(ns, dtype=float)
    g = np.asarray(gammas, dtype=float)
    if ns.size < 4 or ns.size != g.size:
        raise ValidationError("need at least four (n, gamma) pairs")
    with np.errstate(divide='ignore', invalid='ignore'):
        t = -g if log_input else -np.log(g)
        usable = np.isfinite(t) & (t > 0)
        for _ in range(int(L) - 1):
            usable &= t > 0
            t = np.where(usable, np.log(np.where(usable, t, 1.0)), np.nan)
            usable &= np.isfinite(t)
    if usable.sum() < 2:
        return DecayReport(math.nan, math.nan, math.nan, math.nan,
                           tuple(usable.tolist()), tuple(t.tolist()), True)
    x, y = ns[usable], t[usable]
    lin = linregress(x, y)
    logfit = linregress(np.log(x), y)
    r2, r2_log = lin.rvalue ** 2, logfit.rvalue ** 2
    sub = bool(lin.slope <= 0 or r2_log > r2)
    return DecayReport(float(lin.slope), float(lin.intercept), float(r2),
                       float(r2_log), tuple(usable.tolist()), tuple(t.tolist()),
                       sub)


# ---------------------------------------------------------------------------
# Codebooks
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Codebook:
    """``M`` codewords of equal average power ``power``."""
    codewords: np.ndarray
    power: float
    seed: int

    @property
    def size(self):
        return self.codewords.shape[0]

    @property
    def length(self):
        return self.codewords.shape[1]


@functools.lru_cache(maxsize=256)
def build_codebook(M, length, power, seed):
    """Gaussian codebook with every codeword scaled to average power ``power``.

    Entries are drawn i.i.d. ``N(0, power)`` from a stream keyed by
    ``(seed, codebook tag)`` (so codebook and noise seeds never collide), then
    each row is rescaled so that ``mean(row**2) == power``.
    """
    if int(M) < 2 or int(length) < 1 or not power > 0:
        raise ValidationError("need M >= 2, length >= 1 and power > 0")
    rng = np.random.default_rng([int(seed), _CODEBOOK_TAG])
    c = rng.standard_normal((int(M), int(length)))
    c *= np.sqrt(power / np.mean(c * c, axis=1, keepdims=True))
    c.setflags(write=False)
    return Codebook(c, float(power), int(seed))


def nearest_codeword(cb, y):
    """Minimum-distance decision; ties go to the smaller index.

    ``y`` may be a single word or a stack of words (last axis is time).
    """
    c = cb.codewords if isinstance(cb, Codebook) else np.asarray(cb)
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != c.shape[1]:
        raise ValidationError(
            f"received word of length {y.shape[-1]} for codewords of length {c.shape[1]}")
    diff = y[..., None, :] - c
    idx = np.argmin(np.einsum('...mt,...mt->...m', diff, diff), axis=-1)
    return int(idx) if idx.ndim == 0 else idx


# ---------------------------------------------------------------------------
# Protocol
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PhaseRecord:
    """What happened in one phase (``index`` is 1-based).

    ``decoded`` holds every receiver's decision from this phase's codebook;
    ``guesses`` the temporary guesses after the phase. For phases after the
    first, ``signal``/``threshold``/``fired`` describe the error-signal test.
    ``feedback`` is the guess vector fed back at the end of the phase, or
    ``None`` after the last phase.
    """
    index: int
    start: int
    stop: int
    transmitted: np.ndarray
    outputs: np.ndarray
    retransmitted: bool
    decoded: np.ndarray
    guesses: np.ndarray
    signal: np.ndarray = None
    threshold: float = None
    fired: np.ndarray = None
    feedback: np.ndarray = None

    def to_dict(self):
        def arr(a):
            return None if a is None else np.asarray(a).tolist()
        return {'index': self.index, 'start': self.start, 'stop': self.stop,
                'transmitted': arr(self.transmitted), 'outputs': arr(self.outputs),
                'retransmitted': self.retransmitted, 'decoded': arr(self.decoded),
                'guesses': arr(self.guesses), 'signal': arr(self.signal),
                'threshold': self.threshold, 'fired': arr(self.fired),
                'feedback': arr(self.feedback)}


@dataclass(frozen=True, eq=False)
class ProtocolTrace:
    """Full transcript of one protocol run."""
    message: int
    phases: tuple
    energy: float
    feedback_nats: tuple
    n: int = field(default=0)

    @property
    def final_guesses(self):
        return self.phases[-1].guesses

    @property
    def error(self):
        return bool(np.any(self.final_guesses != self.message))

    @property
    def power(self):
        return self.energy / self.n

    def to_dict(self):
        return {'message': self.message, 'n': self.n, 'energy': self.energy,
                'feedback_nats': list(self.feedback_nats),
                'final_guesses': self.final_guesses.tolist(),
                'phases': [p.to_dict() for p in self.phases]}


def run_protocol(cfg, message, ch, seed=None, noise=None):
    """Run the ``L``-phase protocol once.

    Parameters
    ----------
    cfg : IntermittentConfig
    message : int
        Zero-based message index.
    ch : ChannelModel
    seed : int, optional
        Noise seed (ignored when ``noise`` is given).
    noise : NoiseBlock or array_like, optional
        Explicit ``K x n`` noise, for forced-noise fixtures.

    Returns
    -------
    ProtocolTrace
    """
    M, n, K = cfg.message_count, cfg.n, ch.num_receivers
    if not 0 <= message < M:
        raise ValidationError(f"message {message} outside 0..{M - 1}")
    if noise is None:
        z = sample_noise(ch, n, seed).samples
    else:
        z = noise.samples if isinstance(noise, NoiseBlock) else np.asarray(noise, float)
        if z.shape != (K, n):
            raise ValidationError(f"noise must have shape ({K}, {n}), got {z.shape}")

    bounds = [0] + cfg.boundaries
    log_m = math.log(M)
    phases = []
    energy = 0.0
    fb_nats = np.zeros(K)

    cb = cfg.codebook(1)
    x = cb.codewords[message]
    y = x[None, :] + z[:, :bounds[1]]
    guesses = nearest_codeword(cb, y)
    energy += float(x @ x)
    phases.append(PhaseRecord(1, 0, bounds[1], x, y, True, guesses, guesses))

    for l in range(2, cfg.L + 1):
        start, stop = bounds[l - 1], bounds[l]
        # The previous phase's guesses were fed back at its last channel use.
        prev = phases[-1]
        object.__setattr__(prev, 'feedback', prev.guesses)
        fb_nats += log_m
        cb = cfg.codebook(l)
        amp = math.sqrt(cfg.power_budget / cfg.gamma[l - 2])
        retransmit = bool(np.any(prev.guesses != message))
        x = np.zeros(stop - start)
        if retransmit:
            x[0] = amp
            x[1:] = cb.codewords[message]
        y = x[None, :] + z[:, start:stop]
        threshold = 0.5 * amp
        signal = y[:, 0]
        fired = signal >= threshold
        decoded = nearest_codeword(cb, y[:, 1:])
        guesses = np.where(fired, decoded, prev.guesses)
        energy += float(x @ x)
        phases.append(PhaseRecord(l, start, stop, x, y, retransmit, decoded,
                                  guesses, signal, threshold, fired))
    return ProtocolTrace(int(message), tuple(phases), energy,
                         tuple(fb_nats.tolist()), n)


def classify_error_events(trace, message=None):
    """Tag each phase with the error events that occurred in it.

    For phase ``l >= 2``:

    * ``E1``: every phase-``(l-1)`` guess was right, yet some receiver's
      signal test fired;
    * ``E2``: some receiver was wrong after phase ``l-1`` and its test did not
      fire;
    * ``E3``: some receiver was wrong after phase ``l-1`` and some receiver
      whose test fired decoded the phase-``l`` codeword wrongly.

    Returns
    -------
    list of frozenset
        One entry per phase; phase 1 is always empty.
    """
    m = trace.message if message is None else message
    tags = [frozenset()]
    for prev, cur in zip(trace.phases, trace.phases[1:]):
        prev_wrong = prev.guesses != m
        found = set()
        if not prev_wrong.any() and cur.fired.any():
            found.add('E1')
        if np.any(prev_wrong & ~cur.fired):
            found.add('E2')
        if prev_wrong.any() and np.any(cur.fired & (cur.decoded != m)):
            found.add('E3')
        tags.append(frozenset(found))
    return tags


@dataclass(frozen=True)
class FeedbackBudget:
    used: tuple
    limit: float
    passes: bool


def feedback_budget(trace, cfg):
    """Feedback entropy used per receiver against the budget ``n R_fb``.

    Each fed-back guess is charged ``log M`` nats (the log-cardinality of its
    alphabet, an upper bound on its entropy); the deterministic zeros cost
    nothing.
    """
    limit = cfg.n * cfg.fb_rate
    used = tuple(float(u) for u in trace.feedback_nats)
    tol = 1e-12 * max(1.0, limit)
    return FeedbackBudget(used, limit, all(u <= limit + tol for u in used))


# ---------------------------------------------------------------------------
# Monte Carlo plumbing and calibration
# ---------------------------------------------------------------------------

def draw_message(seed, message_count):
    """Uniform message for trial ``seed``, from a stream separate from the noise."""
    return int(np.random.default_rng([int(seed), _MESSAGE_TAG]).integers(message_count))


def protocol_runner(cfg, ch, noiseless=False):
    """Trial function ``seed -> TrialOutcome`` for :mod:`bcfeedback.montecarlo`."""
    from .montecarlo import TrialOutcome

    zeros = NoiseBlock.zeros(ch.num_receivers, cfg.n) if noiseless else None

    def run(seed):
        m = draw_message(seed, cfg.message_count)
        trace = run_protocol(cfg, m, ch, seed, noise=zeros)
        events = classify_error_events(trace)[-1]
        return TrialOutcome(trace.error, trace.power,
                            max(trace.feedback_nats), events)
    return run


def _phase_errors(cfg, ch, trials, seed_base):
    from .montecarlo import trial_seeds

    counts = np.zeros(cfg.L, dtype=int)
    for s in trial_seeds(seed_base, trials):
        m = draw_message(s, cfg.message_count)
        trace = run_protocol(cfg, m, ch, s)
        counts += [bool(np.any(p.guesses != m)) for p in trace.phases]
    return counts


def calibrate_gammas(cfg, ch, trials, seed):
    """Measure ``gamma_1..gamma_L`` as upper 95% Wilson bounds on phase errors.

    Phase ``l`` only depends on ``gamma_1..gamma_{l-1}``, so the values are
    measured one phase at a time, each stage reusing the ones already fixed.
    Placeholders for later phases are irrelevant to the measured phase.

    Raises
    ------
    ConfigError
        If a measured ``gamma_l`` (``l < L``) is not below ``gamma_{l-1}``.
    """
    from .montecarlo import wilson_interval

    gammas = []
    for l in range(1, cfg.L + 1):
        fill = gammas[-1] if gammas else 1.0
        trial_gamma = gammas + [fill * 0.5 ** (i + 1)
                                for i in range(cfg.L - len(gammas))]
        stage = replace(cfg, gamma=tuple(trial_gamma))
        errors = _phase_errors(stage, ch, trials, seed + 7919 * l)[l - 1]
        g = wilson_interval(int(errors), trials)[1]
        if l < cfg.L and gammas and g >= gammas[-1]:
            raise ConfigError(
                f"measured gamma_{l} = {g:.4g} is not below gamma_{l-1} = "
                f"{gammas[-1]:.4g}")
        gammas.append(min(g, 1.0))
    return tuple(gammas)


def baseline_config(cfg):
    """Single-phase config with the same blocklength, power, messages and seed."""
    return IntermittentConfig(1, cfg.n, cfg.epsilon, cfg.message_count,
                              cfg.power_budget, 0.0, (1.0,), cfg.seeds[:1])


def calibrate_power(cfg, ch, target, trials, seed, lo=1e-3, hi=1e3, steps=40):
    """Power at which the single-phase baseline errs with probability ``target``.

    Bisection on ``log P`` with common random numbers (the same trial seeds at
    every step). Returns the calibrated power.
    """
    def rate(P):
        c = baseline_config(replace(cfg, power_budget=P, gamma=None))
        return _phase_errors(c, ch.with_power(P), trials, seed)[0] / trials

    a, b = math.log(lo), math.log(hi)
    for _ in range(steps):
        mid = 0.5 * (a + b)
        if rate(math.exp(mid)) > target:
            a = mid
        else:
            b = mid
        if b - a < 1e-3:
            break
    return math.exp(0.5 * (a + b))
