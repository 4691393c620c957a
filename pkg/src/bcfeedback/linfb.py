"""Linear-feedback schemes with message points.

A blocklength-``n`` common-message scheme sends ``X = theta * d + sum_k A_k Z_k``
with strictly lower-triangular ``A_k``: every input is a linear function of the
message point and of past noise samples, which the transmitter recovers from
perfect output feedback.

The second half of the module turns the feedback matrices of such a scheme into
a scheme for ``K`` *private* messages of blocklength ``n + 2K``:

* ``K`` initialization slots, one per receiver, carry the (centered, scaled)
  message points;
* ``n`` regular slots replay ``sum_k A_k Z~_k`` without any message component,
  where ``Z~_k`` is receiver ``k``'s regular noise with sample ``j_k`` swapped
  for the noise of receiver ``k``'s extra slot;
* one extra slot per receiver, right after regular slot ``j_k``, resends
  ``X_{j_k}`` plus the noise receiver ``k`` saw in its initialization slot.

Receiver ``k`` estimates that initialization noise from its regular and extra
outputs by LMMSE, subtracts it, and rounds to the nearest message point.

Indexing is zero-based throughout: receivers ``0..K-1``, regular slots
``0..n-1``, messages ``0..N-1`` with message ``m`` mapped to the point
``1/2 - m/N``.
"""

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import CausalityError, ValidationError
from .special import qfunc

__all__ = [
    'LinearFeedbackScheme', 'SchemeCheck', 'validate_scheme', 'check_causal',
    'encode_linear', 'encode_sequential', 'scheme_from_dict', 'scheme_to_dict',
    'load_scheme', 'c_coefficient', 'multiletter_rate', 'dpi_lower_bound',
    'MessagePoint', 'message_point', 'message_count', 'theta_moments',
    'nearest_message_point', 'PrivateScheme', 'construct_private_scheme',
    'lmmse_directions', 'observation_covariance', 'LmmseEstimate', 'lmmse',
    'lmmse_noise_estimate', 'private_transmit', 'private_transmit_sequential',
    'receiver_view', 'decode_private', 'private_error_bound',
    'PrivateSimulation', 'simulate_private',
]

UNIT_NORM_TOL = 1e-9
RIDGE_SCALE = 1e-12


# ---------------------------------------------------------------------------
# Common-message schemes
# ---------------------------------------------------------------------------

def check_causal(a_mats):
    """Raise :class:`CausalityError` unless every ``A_k`` is strictly lower."""
    a = np.asarray(a_mats, dtype=float)
    for k in range(a.shape[0]):
        upper = np.triu(a[k])
        if np.any(upper != 0):
            i, j = map(int, np.argwhere(upper != 0)[0])
            raise CausalityError(k, i, j, float(a[k, i, j]))


@dataclass(frozen=True, eq=False)
class LinearFeedbackScheme:
    """One blocklength-``n`` linear-feedback code with a message point.

    Attributes
    ----------
    d : ndarray, shape (n,)
        Direction along which the message point is sent.
    a_mats : ndarray, shape (K, n, n)
        Strictly lower-triangular feedback matrices.
    theta_variance : float
        Second moment ``E|theta|^2`` of the message point.
    """
    d: np.ndarray
    a_mats: np.ndarray
    theta_variance: float = 1.0

    def __post_init__(self):
        d = np.array(self.d, dtype=float)
        a = np.array(self.a_mats, dtype=float)
        if d.ndim != 1:
            raise ValidationError("d must be a vector")
        if a.ndim != 3 or a.shape[1:] != (d.size, d.size):
            raise ValidationError(
                f"A must have shape (K, {d.size}, {d.size}), got {a.shape}")
        if not self.theta_variance >= 0:
            raise ValidationError("theta_variance must be nonnegative")
        check_causal(a)
        d.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, 'd', d)
        object.__setattr__(self, 'a_mats', a)
        object.__setattr__(self, 'theta_variance', float(self.theta_variance))

    @property
    def blocklength(self):
        return self.d.size

    @property
    def num_receivers(self):
        return self.a_mats.shape[0]


@dataclass(frozen=True)
class SchemeCheck:
    """Outcome of :func:`validate_scheme`."""
    power: float
    budget: float
    passes: bool
    strictly_lower: bool = True


def validate_scheme(s, ch):
    """Check the power condition of a scheme against a channel.

    The expected block energy of ``theta d + sum_k A_k Z_k`` is
    ``sum_k ||A_k||_F^2 sigma_k^2 + ||d||^2 E|theta|^2``; it must not exceed
    ``n P``.

    Raises
    ------
    CausalityError
        If some ``A_k`` has a nonzero entry on or above the diagonal.
    ValidationError
        If the number of matrices differs from the number of receivers.
    """
    check_causal(s.a_mats)
    if s.num_receivers != ch.num_receivers:
        raise ValidationError(
            f"scheme has {s.num_receivers} matrices, channel has "
            f"{ch.num_receivers} receivers")
    frob = np.einsum('kij,kij->k', s.a_mats, s.a_mats)
    power = math.fsum(frob * ch.sigma2) + float(s.d @ s.d) * s.theta_variance
    budget = s.blocklength * ch.power_budget
    return SchemeCheck(power, budget, power <= budget * (1 + 1e-12))


def _noise_matrix(noise, K, n):
    z = getattr(noise, 'samples', noise)
    z = np.asarray(z, dtype=float)
    if z.shape != (K, n):
        raise ValidationError(f"noise must have shape ({K}, {n}), got {z.shape}")
    return z


def encode_linear(s, theta, noise):
    """Channel inputs ``theta d + sum_k A_k Z_k`` in matrix form."""
    z = _noise_matrix(noise, s.num_receivers, s.blocklength)
    return theta * s.d + np.einsum('kij,kj->i', s.a_mats, z)


def encode_sequential(s, theta, noise):
    """Run the scheme symbol by symbol, using only fed-back outputs.

    At time ``i`` the transmitter knows ``Y[:, :i]`` and its own past inputs,
    hence the past noise ``Y - X``. The result must agree with
    :func:`encode_linear`; this is the causal reading of the matrix form.
    """
    z = _noise_matrix(noise, s.num_receivers, s.blocklength)
    n, K = s.blocklength, s.num_receivers
    x = np.zeros(n)
    y = np.zeros((K, n))
    for i in range(n):
        recovered = y[:, :i] - x[None, :i]
        x[i] = theta * s.d[i] + sum(
            s.a_mats[k, i, :i] @ recovered[k] for k in range(K))
        y[:, i] = x[i] + z[:, i]
    return x


def scheme_from_dict(doc):
    """Build a scheme from ``{n, K, d, A, theta_variance}``.

    ``A`` is a list of ``K`` row-major ``n x n`` matrices.
    """
    try:
        n, K = int(doc['n']), int(doc['K'])
        d = np.asarray(doc['d'], dtype=float)
        a = np.asarray(doc['A'], dtype=float)
    except KeyError as exc:
        raise ValidationError(f"scheme document lacks field {exc}") from None
    if d.shape != (n,) or a.shape != (K, n, n):
        raise ValidationError(
            f"scheme document declares n={n}, K={K} but d has shape {d.shape}"
            f" and A has shape {a.shape}")
    return LinearFeedbackScheme(d, a, float(doc.get('theta_variance', 1.0)))


def scheme_to_dict(s):
    return {'n': s.blocklength, 'K': s.num_receivers, 'd': s.d.tolist(),
            'A': s.a_mats.tolist(), 'theta_variance': s.theta_variance}


def load_scheme(source):
    """Load a scheme from a JSON file path, a JSON string or a mapping."""
    if isinstance(source, dict):
        return scheme_from_dict(source)
    if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        with open(source, encoding='utf-8') as fh:
            return scheme_from_dict(json.load(fh))
    return scheme_from_dict(json.loads(source))


# ---------------------------------------------------------------------------
# Rate characterization
# ---------------------------------------------------------------------------

def _unit_rows(v, K, n):
    v = np.asarray(v, dtype=float)
    if v.shape != (K, n):
        raise ValidationError(f"v must have shape ({K}, {n}), got {v.shape}")
    norms = np.linalg.norm(v, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_NORM_TOL)
    if bad.size:
        raise ValidationError(
            f"v[{bad[0]}] has norm {norms[bad[0]]!r}, expected 1")
    return v


def c_coefficient(a_mats, v, ch):
    """Noise energy seen through each receiver's combining vector.

    ``c_k = sigma_k^2 ||v_k (I + A_k)||^2 + sum_{k' != k} sigma_k'^2 ||v_k A_k'||^2``,
    i.e. the variance of ``v_k`` applied to the noise part of receiver ``k``'s
    output vector.

    Parameters
    ----------
    a_mats : array_like, shape (K, n, n)
    v : array_like, shape (K, n)
        Unit-norm row vectors.
    ch : ChannelModel

    Returns
    -------
    list of float
    """
    a = np.asarray(a_mats, dtype=float)
    K, n = a.shape[0], a.shape[1]
    v = _unit_rows(v, K, n)
    s2 = ch.sigma2
    out = []
    for k in range(K):
        vA = v[k] @ a                          # (K, n): v_k A_k' for every k'
        energy = np.einsum('ij,ij->i', vA, vA)
        own = v[k] + vA[k]
        out.append(math.fsum(s2[kk] * energy[kk] for kk in range(K) if kk != k)
                   + s2[k] * float(own @ own))
    return out


def multiletter_rate(c_k, n):
    """Per-symbol exponent ``-log(c_k) / (2n)``."""
    if not c_k > 0:
        raise ValidationError(f"c_k must be positive, got {c_k!r}")
    return -math.log(c_k) / (2.0 * n)


def dpi_lower_bound(v_k, c_k, j_k, noise_variance=1.0):
    """Mutual information carried by the single combination ``v_k . Y~_k``.

    Equals ``log(1 + sigma_k^2 v_k[j_k]^2 / c_k) / 2``; it lower-bounds the
    information the full vector ``Y~_k`` carries about receiver ``k``'s
    initialization noise. With unit noise variance this is the bare
    ``log(1 + |v_k[j_k]|^2 / c_k) / 2``.
    """
    if not c_k > 0:
        raise ValidationError(f"c_k must be positive, got {c_k!r}")
    vj = float(np.asarray(v_k, dtype=float)[j_k])
    return 0.5 * math.log1p(noise_variance * vj * vj / c_k)


# ---------------------------------------------------------------------------
# Message points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MessagePoint:
    value: float
    message_index: int
    count: int


def message_point(m, count):
    """Point ``1/2 - m/count`` in ``(-1/2, 1/2]`` for message ``m``."""
    if not 0 <= m < count:
        raise ValidationError(f"message {m} outside 0..{count - 1}")
    return MessagePoint(0.5 - m / count, int(m), int(count))


def message_count(rate, length):
    """``floor(exp(length * rate))``, robust to rates built as ``log(N)/length``."""
    return max(1, int(math.floor(math.exp(length * rate) * (1 + 1e-12))))


def theta_moments(count):
    """Mean and variance of a uniformly drawn message point."""
    mean = 1.0 / (2.0 * count)
    var = (count * count - 1.0) / (12.0 * count * count)
    return mean, var


def nearest_message_point(theta_hat, count):
    """Index of the message point closest to ``theta_hat``.

    Exact midpoints go to the smaller index.
    """
    t = (0.5 - np.asarray(theta_hat, dtype=float)) * count
    m = np.clip(np.ceil(t - 0.5), 0, count - 1).astype(int)
    return int(m) if m.ndim == 0 else m


# ---------------------------------------------------------------------------
# Private-message construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PrivateScheme:
    """Blocklength-``n + 2K`` private-message scheme built from ``A_1..A_K``.

    ``slot_layout`` lists the transmission slots in time order as
    ``('init', k)``, ``('regular', i)`` or ``('extra', k)``. ``gains[k]`` is
    the amplitude applied to receiver ``k``'s centered message point.
    ``delta`` is the power back-off assumed for the regular slots.
    """
    a_mats: np.ndarray
    v: np.ndarray
    j: tuple
    message_counts: tuple
    power: float
    delta: float
    slot_layout: tuple = field(repr=False)
    gains: tuple = field(repr=False)
    noise_map: np.ndarray = field(repr=False)
    message_map: np.ndarray = field(repr=False)

    @property
    def n(self):
        return self.a_mats.shape[1]

    @property
    def num_receivers(self):
        return self.a_mats.shape[0]

    @property
    def total_length(self):
        return len(self.slot_layout)

    @property
    def rates(self):
        return tuple(math.log(c) / self.total_length for c in self.message_counts)

    def position(self, kind, index):
        return self._positions[(kind, index)]

    @property
    def _positions(self):
        return {slot: p for p, slot in enumerate(self.slot_layout)}

    def view_positions(self, k):
        """Slot positions forming receiver ``k``'s vector ``Y~_k``."""
        pos = self._positions
        return [pos[('extra', k)] if i == self.j[k] else pos[('regular', i)]
                for i in range(self.n)]

    def regular_power(self, ch):
        """Expected energy of the ``n`` regular inputs."""
        frob = np.einsum('kij,kij->k', self.a_mats, self.a_mats)
        return math.fsum(frob * ch.sigma2)

    def slot_energy(self, ch):
        """Expected energy of every slot, in time order."""
        var = np.array([theta_moments(c)[1] for c in self.message_counts])
        msg = (self.message_map ** 2) @ var
        noise = np.einsum('skt,k->s', self.noise_map ** 2, ch.sigma2)
        return msg + noise

    def power_bound(self, ch):
        """``K P + n (P - delta) + sum_k E|X_{j_k}|^2 + sum_k sigma_k^2``."""
        e = self.slot_energy(ch)
        pos = self._positions
        xj = math.fsum(e[pos[('regular', jk)]] for jk in self.j)
        K, n, P = self.num_receivers, self.n, self.power
        return K * P + n * (P - self.delta) + xj + math.fsum(ch.sigma2)


def _slot_layout(n, j):
    K = len(j)
    layout = [('init', k) for k in reversed(range(K))]
    for i in range(n):
        layout.append(('regular', i))
        layout.extend(('extra', k) for k in range(K) if j[k] == i)
    return tuple(layout)


def construct_private_scheme(a_mats, v, j, ch, rates=None, message_counts=None,
                             delta=None):
    """Build the private-message scheme from common-scheme feedback matrices.

    Parameters
    ----------
    a_mats : array_like, shape (K, n, n)
        Strictly lower-triangular feedback matrices of the common scheme.
    v : array_like, shape (K, n)
        Unit-norm combining vectors (kept for the rate diagnostics; the
        encoder itself only needs ``j``).
    j : sequence of int
        Regular slot ``j[k]`` in ``0..n-1`` whose noise is swapped for
        receiver ``k``'s extra-slot noise. Extra slots that follow the same
        regular slot are ordered by receiver index, so ``j`` need not be sorted.
    ch : ChannelModel
    rates, message_counts : sequence, optional
        Exactly one must be given. Rates are in nats per symbol of the full
        blocklength ``n + 2K``; counts are ``floor(exp((n + 2K) R_k))``.
    delta : float, optional
        Power back-off of the regular slots; defaults to ``0.05 P``.

    Returns
    -------
    PrivateScheme
    """
    a = np.array(a_mats, dtype=float)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValidationError(f"A must have shape (K, n, n), got {a.shape}")
    K, n = a.shape[0], a.shape[1]
    if K != ch.num_receivers:
        raise ValidationError(
            f"{K} feedback matrices for a {ch.num_receivers}-receiver channel")
    check_causal(a)
    v = _unit_rows(v, K, n).copy()
    j = tuple(int(x) for x in j)
    if len(j) != K or any(not 0 <= x < n for x in j):
        raise ValidationError(f"j must hold {K} indices in 0..{n - 1}, got {j}")
    if (rates is None) == (message_counts is None):
        raise ValidationError("give exactly one of rates or message_counts")
    total = n + 2 * K
    if message_counts is None:
        message_counts = [message_count(r, total) for r in rates]
    counts = tuple(int(c) for c in message_counts)
    if len(counts) != K or any(c < 1 for c in counts):
        raise ValidationError(f"need {K} positive message counts, got {counts}")
    P = ch.power_budget
    delta = 0.05 * P if delta is None else float(delta)

    layout = _slot_layout(n, j)
    pos = {slot: p for p, slot in enumerate(layout)}
    S = len(layout)

    # Source slot of the m-th entry of Z~_k.
    src = np.array([[pos[('extra', k)] if m == j[k] else pos[('regular', m)]
                     for m in range(n)] for k in range(K)])
    G = np.zeros((S, K, S))
    for i in range(n):
        row = G[pos[('regular', i)]]
        for k in range(K):
            np.add.at(row[k], src[k, :i], a[k, i, :i])
    for k in range(K):
        q = pos[('extra', k)]
        G[q] = G[pos[('regular', j[k])]]
        G[q, k, pos[('init', k)]] += 1.0

    gains = []
    H = np.zeros((S, K))
    for k, c in enumerate(counts):
        _, var = theta_moments(c)
        g = math.sqrt(P / var) if c > 1 else 0.0
        gains.append(g)
        H[pos[('init', k)], k] = g

    a.setflags(write=False)
    v.setflags(write=False)
    G.setflags(write=False)
    H.setflags(write=False)
    return PrivateScheme(a, v, j, counts, P, delta, layout, tuple(gains), G, H)


def lmmse_directions(s, ch):
    """Default combining vectors and swap indices for a common scheme.

    ``v_k`` is the (normalized) LMMSE combiner of the message point from
    receiver ``k``'s outputs, treating ``theta_variance`` as the variance of
    the message point; ``j_k`` is the position of its largest entry.
    """
    n, K = s.blocklength, s.num_receivers
    a, s2 = s.a_mats, ch.sigma2
    eye = np.eye(n)
    v = np.zeros((K, n))
    j = []
    for k in range(K):
        cov = s.theta_variance * np.outer(s.d, s.d)
        for kk in range(K):
            m = a[kk] + eye if kk == k else a[kk]
            cov += s2[kk] * m @ m.T
        w = linalg.solve(cov, s.d, assume_a='pos')
        norm = np.linalg.norm(w)
        if norm == 0.0:
            w, norm = eye[-1], 1.0
        v[k] = w / norm
        j.append(int(np.argmax(np.abs(v[k]))))
    return v, tuple(j)


# ---------------------------------------------------------------------------
# Transmission and decoding
# ---------------------------------------------------------------------------

def private_transmit(ps, messages, noise):
    """Inputs and outputs of the private scheme, vectorized over trials.

    Parameters
    ----------
    ps : PrivateScheme
    messages : array_like of int, shape (..., K)
    noise : array_like, shape (..., K, n + 2K)
        Noise in slot order (column ``p`` is slot ``ps.slot_layout[p]``).

    Returns
    -------
    x : ndarray, shape (..., n + 2K)
    y : ndarray, shape (..., K, n + 2K)
    """
    z = np.asarray(noise, dtype=float)
    centered = _centered_points(ps, messages)
    x = centered @ ps.message_map.T + np.einsum('skt,...kt->...s', ps.noise_map, z)
    return x, x[..., None, :] + z


def _centered_points(ps, messages):
    m = np.asarray(messages)
    counts = np.asarray(ps.message_counts)
    if m.shape[-1] != ps.num_receivers or np.any((m < 0) | (m >= counts)):
        raise ValidationError("messages must be in 0..count-1 for each receiver")
    means = 1.0 / (2.0 * counts)
    return (0.5 - m / counts) - means


def private_transmit_sequential(ps, messages, noise):
    """Single-trial transmission driven slot by slot through feedback.

    Only fed-back outputs are used: after each slot the transmitter recovers
    every receiver's noise as ``Y - X``. Independent of the precomputed
    ``noise_map`` and used to cross-check it.
    """
    z = np.asarray(noise, dtype=float)
    K, n = ps.num_receivers, ps.n
    S = ps.total_length
    if z.shape != (K, S):
        raise ValidationError(f"noise must have shape ({K}, {S}), got {z.shape}")
    theta = _centered_points(ps, np.asarray(messages)[None, :])[0]
    pos = {slot: p for p, slot in enumerate(ps.slot_layout)}
    x = np.zeros(S)
    y = np.zeros((K, S))
    recovered = np.zeros((K, S))
    regular_x = {}
    for p, (kind, idx) in enumerate(ps.slot_layout):
        if kind == 'init':
            x[p] = ps.gains[idx] * theta[idx]
        elif kind == 'regular':
            total = 0.0
            for k in range(K):
                for m in range(idx):
                    slot = ('extra', k) if m == ps.j[k] else ('regular', m)
                    total += ps.a_mats[k, idx, m] * recovered[k, pos[slot]]
            x[p] = regular_x[idx] = total
        else:
            x[p] = regular_x[ps.j[idx]] + recovered[idx, pos[('init', idx)]]
        y[:, p] = x[p] + z[:, p]
        recovered[:, p] = y[:, p] - x[p]
    return x, y


def receiver_view(ps, k, outputs):
    """Split receiver ``k``'s outputs into ``(Y_init, Y~_k)``.

    ``outputs`` has the slot axis last (shape ``(..., n + 2K)``).
    """
    y = np.asarray(outputs, dtype=float)
    return y[..., ps.position('init', k)], y[..., ps.view_positions(k)]


def observation_covariance(ps, k, ch):
    """Covariance of ``Y~_k``.

    ``sum_{k' != k} s_k' A_k' A_k'^T + s_k (I + A_k)(I + A_k)^T + s_k e_j e_j^T``
    with ``s_k = sigma_k^2`` and ``j = j_k``.
    """
    n = ps.n
    s2 = ch.sigma2
    cov = np.zeros((n, n))
    for kk in range(ps.num_receivers):
        m = ps.a_mats[kk] + np.eye(n) if kk == k else ps.a_mats[kk]
        cov += s2[kk] * m @ m.T
    cov[ps.j[k], ps.j[k]] += s2[k]
    return cov


@dataclass(frozen=True)
class LmmseEstimate:
    """Result of a scalar LMMSE estimation.

    ``estimate`` has the shape of the observations minus their last axis.
    """
    estimate: object
    error_variance: float
    mutual_info: float
    weights: np.ndarray
    regularized: bool = False


def lmmse(cross_cov, obs_cov, prior_var, y=None):
    """Linear MMSE estimate of a zero-mean scalar from zero-mean observations.

    Solves ``obs_cov w = cross_cov``. When ``obs_cov`` is not positive
    definite a ridge of ``1e-12 trace / n`` is added and the result flagged.
    For jointly Gaussian variables the error is independent of the
    observations, so ``mutual_info = log(prior_var / error_variance) / 2``.
    """
    c = np.asarray(cross_cov, dtype=float)
    cov = np.asarray(obs_cov, dtype=float)
    regularized = False
    try:
        w = linalg.cho_solve(linalg.cho_factor(cov), c)
    except linalg.LinAlgError:
        ridge = RIDGE_SCALE * np.trace(cov) / cov.shape[0]
        w = linalg.solve(cov + ridge * np.eye(cov.shape[0]), c, assume_a='sym')
        regularized = True
    explained = float(c @ w)
    if explained <= 0.0:
        info, err = 0.0, float(prior_var)
    else:
        frac = min(explained / prior_var, 1.0)
        info = -0.5 * math.log1p(-frac)
        err = prior_var * (1.0 - frac)
    est = None if y is None else np.asarray(y, dtype=float) @ w
    return LmmseEstimate(est, err, info, w, regularized)


def lmmse_noise_estimate(ps, k, y_tilde, ch):
    """LMMSE estimate of receiver ``k``'s initialization noise from ``Y~_k``.

    The only component of ``Y~_k`` correlated with that noise is the extra
    output at position ``j_k``, so the cross-covariance is
    ``sigma_k^2 e_{j_k}``.
    """
    s2 = ch.noise_variances[k]
    cross = np.zeros(ps.n)
    cross[ps.j[k]] = s2
    return lmmse(cross, observation_covariance(ps, k, ch), s2, y_tilde)


def decode_private(ps, k, outputs, ch):
    """Receiver ``k``'s message decision from its ``n + 2K`` outputs.

    Vectorized over leading axes of ``outputs``.
    """
    count = ps.message_counts[k]
    y_init, y_tilde = receiver_view(ps, k, outputs)
    if count == 1:
        return np.zeros(np.shape(y_init), dtype=int) if np.ndim(y_init) else 0
    z_hat = lmmse_noise_estimate(ps, k, y_tilde, ch).estimate
    mean, _ = theta_moments(count)
    theta_hat = mean + (y_init - z_hat) / ps.gains[k]
    return nearest_message_point(theta_hat, count)


def private_error_bound(ps, k, ch):
    """Upper bound ``2 Q(e^I / (2N) * sqrt(P / (Var(theta) sigma_k^2)))``.

    ``I`` is the information ``Y~_k`` carries about receiver ``k``'s
    initialization noise and ``N`` its message count; a single message is
    never decoded wrongly.
    """
    count = ps.message_counts[k]
    if count == 1:
        return 0.0
    _, var = theta_moments(count)
    s2 = ch.noise_variances[k]
    s = lmmse_noise_estimate(ps, k, None, ch)
    arg = math.exp(s.mutual_info) / (2.0 * count) * math.sqrt(ps.power / (var * s2))
    return 2.0 * qfunc(arg)


@dataclass(frozen=True, eq=False)
class PrivateSimulation:
    """Monte Carlo transcript of :func:`simulate_private`.

    Arrays are indexed ``[trial, receiver]``; ``views[t, k]`` is ``Y~_k``.
    """
    messages: np.ndarray
    decoded: np.ndarray
    noise_error: np.ndarray
    views: np.ndarray
    energy: np.ndarray

    @property
    def errors(self):
        return self.decoded != self.messages


def simulate_private(ps, ch, trials, seed):
    """Run ``trials`` independent blocks of the private scheme."""
    rng = np.random.default_rng(seed)
    K = ps.num_receivers
    counts = np.asarray(ps.message_counts)
    messages = rng.integers(0, counts, size=(trials, K))
    z = rng.standard_normal((trials, K, ps.total_length))
    z *= np.sqrt(ch.sigma2)[None, :, None]
    x, y = private_transmit(ps, messages, z)
    decoded = np.empty_like(messages)
    z_err = np.empty((trials, K))
    views = np.empty((trials, K, ps.n))
    for k in range(K):
        _, views[:, k] = receiver_view(ps, k, y[:, k])
        est = lmmse_noise_estimate(ps, k, views[:, k], ch).estimate
        z_err[:, k] = z[:, k, ps.position('init', k)] - est
        decoded[:, k] = decode_private(ps, k, y[:, k], ch)
    return PrivateSimulation(messages, decoded, z_err, views,
                             np.einsum('ts,ts->t', x, x))
