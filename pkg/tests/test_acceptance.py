"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Fixture choices (fixed before any run, not tuned afterwards):

* random channels: ``numpy.random.default_rng(2026)``;
* bound-vs-K shape: equal unit variances with ``P = 1``;
* decay order: analytic gammas with ``rho_1(n) = exp(-0.05 n)``, ``eps = 0.25``
  and rate ``R = 0.05`` nats for the retransmission exponent;
* reference protocol: ``K = 2``, unit variances, ``M = 64``, ``n = 120``,
  ``eps = 0.25``, ``L = 2``, ``R_fb = log(64)/120``, codebook seeds ``(0, 1)``,
  Monte Carlo base seed 2026.
"""

import math
import time

import numpy as np
import pytest

from bcfeedback.bounds import (capacity, linfb_upper_bound, prop2_envelope,
                               solve_alpha_star)
from bcfeedback.channel import make_channel
from bcfeedback.intermittent import (IntermittentConfig, analytic_log_gammas,
                                     baseline_config, calibrate_gammas,
                                     calibrate_power, classify_error_events,
                                     decay_order_diagnostic, draw_message,
                                     feedback_budget, protocol_runner,
                                     run_protocol)
from bcfeedback.linfb import (LinearFeedbackScheme, construct_private_scheme,
                              lmmse_directions, lmmse_noise_estimate,
                              private_error_bound, simulate_private)
from bcfeedback.montecarlo import estimate_error, trial_seeds
from bcfeedback.special import qfunc

SEED = 2026


@pytest.fixture
def report(capsys):
    def emit(crit, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {crit}: {detail}")
        return ok
    return emit


def random_channels():
    rng = np.random.default_rng(SEED)
    out = []
    for _ in range(50):
        K = int(rng.integers(2, 9))
        out.append(make_channel(rng.uniform(0.1, 100.0), rng.uniform(0.1, 10.0, K)))
    return out


def test_criterion_1_bound_below_capacity(report):
    t0 = time.perf_counter()
    worst_res, min_gap = 0.0, math.inf
    for ch in random_channels():
        star = solve_alpha_star(ch, tol=1e-10)
        worst_res = max(worst_res, star.max_residual)
        min_gap = min(min_gap, capacity(ch) - linfb_upper_bound(ch))
    elapsed = time.perf_counter() - t0
    ok = worst_res < 1e-10 and min_gap > 1e-6 and elapsed < 5.0
    report(1, ok, f"max residual {worst_res:.2e}, min capacity gap {min_gap:.3e} nats, "
                  f"{elapsed:.2f} s")
    assert ok


def test_criterion_2_bound_vs_k_shape(report):
    P = 1.0
    t0 = time.perf_counter()
    vals = [linfb_upper_bound(make_channel(P, [1.0] * K)) for K in range(1, 31)]
    elapsed = time.perf_counter() - t0
    h30 = math.fsum(1.0 / k for k in range(1, 31))
    env30 = 0.5 * math.log1p(P / h30)
    assert prop2_envelope(make_channel(P, [1.0] * 30)) == pytest.approx(env30, rel=1e-14)
    cap = capacity(make_channel(P, [1.0]))
    decreasing = all(b < a for a, b in zip(vals, vals[1:]))
    k1 = abs(vals[0] - cap) <= 1e-10 * cap
    ok = decreasing and vals[-1] < env30 and k1 and elapsed < 2.0
    report(2, ok, f"strictly decreasing={decreasing}, bound(30)={vals[-1]:.6f} < "
                  f"envelope {env30:.6f}, bound(1)=capacity: {k1}, {elapsed:.2f} s")
    assert ok


def test_criterion_3_envelope_consistency(report):
    margins = [prop2_envelope(ch) - linfb_upper_bound(ch) for ch in random_channels()]
    ok = min(margins) >= -1e-12
    report(3, ok, f"min envelope - bound = {min(margins):.3e}")
    assert ok


def test_criterion_4_toy_private_scheme(report):
    t0 = time.perf_counter()
    s2 = 1.0
    ch = make_channel(1.0, [s2])
    ps = construct_private_scheme(np.zeros((1, 1, 1)), [[1.0]], [0], ch,
                                  message_counts=[4])
    est = lmmse_noise_estimate(ps, 0, None, ch)
    # closed form to machine precision (the Cholesky solve rounds w = 1/2 by an ulp)
    ulp4 = 4 * np.finfo(float).eps
    exact = (math.isclose(est.mutual_info, 0.5 * math.log(2), rel_tol=ulp4)
             and math.isclose(est.error_variance, s2 / 2, rel_tol=ulp4))
    sim = simulate_private(ps, ch, 100_000, SEED)
    mse = float(np.mean(sim.noise_error[:, 0] ** 2))
    err = float(sim.errors.mean())
    bound = private_error_bound(ps, 0, ch)
    elapsed = time.perf_counter() - t0
    ok = (exact and abs(mse - s2 / 2) <= 0.03 * s2 / 2 and err <= bound
          and elapsed < 10.0)
    report(4, ok, f"I={est.mutual_info!r}, Var={est.error_variance!r}, MC MSE={mse:.4f}, "
                  f"error rate {err:.4f} <= bound {bound:.4f}, {elapsed:.2f} s")
    assert ok


def test_criterion_5_lmmse_orthogonality(report):
    rng = np.random.default_rng(SEED)
    n, K = 8, 2
    ch = make_channel(1.0, [1.0, 1.0])
    A = np.tril(rng.normal(scale=0.3, size=(K, n, n)), -1)
    s = LinearFeedbackScheme(rng.normal(size=n), A)
    v, j = lmmse_directions(s, ch)
    ps = construct_private_scheme(A, v, j, ch, message_counts=[4, 4])
    sim = simulate_private(ps, ch, 100_000, SEED)
    worst = 0.0
    for k in range(K):
        e = sim.noise_error[:, k]
        prod = e[:, None] * sim.views[:, k]
        z = np.abs(prod.mean(axis=0)) / (prod.std(axis=0, ddof=1) / math.sqrt(len(e)))
        worst = max(worst, float(z.max()))
    ok = worst < 5.0
    report(5, ok, f"largest |cov(error, y~_i)| = {worst:.2f} standard errors over "
                  f"{K * n} coordinates")
    assert ok


@pytest.fixture(scope='module')
def reference():
    M, n = 64, 120
    cfg = IntermittentConfig(2, n, 0.25, M, 1.0, math.log(M) / n, seeds=(0, 1))
    ch = make_channel(1.0, [1.0, 1.0])
    P = calibrate_power(cfg, ch, 0.1, 4000, SEED + 1)
    cfg = IntermittentConfig(2, n, 0.25, M, P, math.log(M) / n, seeds=(0, 1))
    ch = ch.with_power(P)
    gamma = calibrate_gammas(cfg, ch, 4000, SEED + 2)
    return IntermittentConfig(2, n, 0.25, M, P, math.log(M) / n, gamma, (0, 1)), ch


def test_criterion_6_intermittent_beats_baseline(report, reference):
    t0 = time.perf_counter()
    cfg, ch = reference
    trials = 20_000
    rep2 = estimate_error(protocol_runner(cfg, ch), trials, SEED)
    base = baseline_config(cfg)
    rep1 = estimate_error(protocol_runner(base, ch), trials, SEED)
    fb = feedback_budget(run_protocol(cfg, 0, ch, SEED), cfg)
    elapsed = time.perf_counter() - t0
    calibrated = 0.05 <= rep1.p_hat <= 0.15
    better = rep2.p_hat < rep1.p_hat and rep2.ci_high < rep1.ci_low
    power_ok = rep2.mean_power <= cfg.power_budget + 2 * rep2.power_stderr
    ok = calibrated and better and power_ok and fb.passes and elapsed < 300
    report(6, ok,
           f"P={cfg.power_budget:.4f}, gamma={tuple(round(g, 4) for g in cfg.gamma)}; "
           f"L=1 p={rep1.p_hat:.4f} [{rep1.ci_low:.4f}, {rep1.ci_high:.4f}] "
           f"(in [0.05, 0.15]: {calibrated}); "
           f"L=2 p={rep2.p_hat:.4f} [{rep2.ci_low:.4f}, {rep2.ci_high:.4f}] "
           f"(better, disjoint: {better}); events {rep2.event_counts}; "
           f"power {rep2.mean_power:.4f} +- {rep2.power_stderr:.4f} (ok: {power_ok}); "
           f"feedback {fb.used[0]:.4f} <= {fb.limit:.4f} (ok: {fb.passes}); "
           f"{elapsed:.1f} s")
    assert ok


def test_criterion_7_gamma_decay_order(report):
    t0 = time.perf_counter()
    ch = make_channel(1.0, [1.0, 1.0])
    ns = np.arange(100, 900, 100)
    lg = [analytic_log_gammas(int(n), 2, 0.25, 0.05, ch, log_rho1=-0.05 * n)[1]
          for n in ns]
    rep = decay_order_diagnostic(ns, lg, 2, log_input=True)
    elapsed = time.perf_counter() - t0
    ok = rep.slope > 0 and rep.r_squared > 0.95 and elapsed < 1.0
    report(7, ok, f"slope {rep.slope:.5f}, R^2 {rep.r_squared:.6f}, "
                  f"sub-order flag {rep.sub_order}, {elapsed:.3f} s")
    assert ok


def test_criterion_8_error_event_accounting(report, reference):
    cfg, ch = reference
    sig = np.sqrt(ch.sigma2)
    T = math.sqrt(cfg.power_budget / cfg.gamma[0]) / 2
    q = np.array([qfunc(T / s) for s in sig])
    N = 10_000
    untagged = 0
    e1 = e2 = 0
    p1, p2 = [], []
    fa = np.zeros((2, 2))      # per receiver: [fired while silent, silent slots]
    miss = np.zeros((2, 2))    # per receiver: [missed signal, signal slots]
    for s in trial_seeds(SEED + 10, N):
        m = draw_message(s, cfg.message_count)
        tr = run_protocol(cfg, m, ch, s)
        tags = classify_error_events(tr)
        if tr.error and not tags[-1]:
            untagged += 1
        prev, cur = tr.phases[0], tr.phases[1]
        wrong = prev.guesses != m
        e1 += 'E1' in tags[1]
        e2 += 'E2' in tags[1]
        if wrong.any():
            p1.append(0.0)
            p2.append(1.0 - np.prod(1.0 - q[wrong]))
            miss[:, 0] += ~cur.fired
            miss[:, 1] += 1
        else:
            p1.append(1.0 - np.prod(1.0 - q))
            p2.append(0.0)
            fa[:, 0] += cur.fired
            fa[:, 1] += 1
    p1, p2 = np.array(p1), np.array(p2)

    def zscore(count, probs):
        se = math.sqrt(float(np.sum(probs * (1 - probs))))
        return abs(count - probs.sum()) / se if se > 0 else float(count != 0) * math.inf

    z1, z2 = zscore(e1, p1), zscore(e2, p2)
    per_rx = []
    for k in range(2):
        for hits, total in (fa[k], miss[k]):
            if total:
                per_rx.append(float(abs(hits / total - q[k]) / math.sqrt(q[k] * (1 - q[k]) / total)))
    ok = untagged == 0 and z1 <= 3 and z2 <= 3
    report(8, ok, f"untagged erroneous traces {untagged}; Pr[E1] {e1 / N:.4f} vs "
                  f"{p1.mean():.4f} ({z1:.2f} SE); Pr[E2] {e2 / N:.4f} vs {p2.mean():.4f} "
                  f"({z2:.2f} SE); per-receiver false-alarm/miss z-scores "
                  f"{[round(z, 2) for z in per_rx]} (Q(T/sigma) = {q.round(4).tolist()})")
    assert ok
