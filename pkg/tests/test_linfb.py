import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bcfeedback.channel import NoiseBlock, make_channel, sample_noise
from bcfeedback.errors import CausalityError, ValidationError
from bcfeedback.linfb import (LinearFeedbackScheme, c_coefficient,
                              construct_private_scheme, decode_private,
                              dpi_lower_bound, encode_linear, encode_sequential,
                              lmmse, lmmse_directions, lmmse_noise_estimate,
                              load_scheme, message_count, message_point,
                              multiletter_rate, nearest_message_point,
                              observation_covariance, private_error_bound,
                              private_transmit, private_transmit_sequential,
                              receiver_view, scheme_to_dict, simulate_private,
                              theta_moments, validate_scheme)
from bcfeedback.special import qfunc


def random_lower(rng, K, n, scale=0.3):
    return np.tril(rng.normal(scale=scale, size=(K, n, n)), -1)


def toy(count=4, power=1.0, s2=1.0):
    ch = make_channel(power, [s2])
    ps = construct_private_scheme(np.zeros((1, 1, 1)), [[1.0]], [0], ch,
                                  message_counts=[count])
    return ps, ch


# -- common schemes ----------------------------------------------------------

def test_validate_zero_scheme():
    ch = make_channel(1.0, [1.0, 1.0])
    chk = validate_scheme(LinearFeedbackScheme(np.zeros(3), np.zeros((2, 3, 3))), ch)
    assert chk.power == 0.0 and chk.passes


def test_causality_error_names_entry():
    a = np.zeros((1, 2, 2))
    a[0, 0, 0] = 1.0
    with pytest.raises(CausalityError, match=r'\[0\]\[0\]\[0\]'):
        LinearFeedbackScheme(np.ones(2), a)


def test_power_boundary_passes():
    ch = make_channel(1.5, [1.0])
    s = LinearFeedbackScheme([1.0, 0.0], np.zeros((1, 2, 2)), theta_variance=3.0)
    chk = validate_scheme(s, ch)
    assert chk.power == 3.0 == chk.budget and chk.passes
    s2 = LinearFeedbackScheme([1.0, 0.1], np.zeros((1, 2, 2)), theta_variance=3.0)
    assert not validate_scheme(s2, ch).passes


def test_validate_receiver_mismatch():
    with pytest.raises(ValidationError):
        validate_scheme(LinearFeedbackScheme(np.ones(2), np.zeros((1, 2, 2))),
                        make_channel(1.0, [1.0, 1.0]))


def test_encode_examples():
    z = NoiseBlock([[0.3, -1.2]])
    s = LinearFeedbackScheme([0.0, 0.0], np.zeros((1, 2, 2)))
    np.testing.assert_array_equal(encode_linear(s, 0.0, z), [0, 0])
    s = LinearFeedbackScheme([1.0, 1.0], np.zeros((1, 2, 2)))
    np.testing.assert_array_equal(encode_linear(s, 0.7, z), [0.7, 0.7])
    s = LinearFeedbackScheme([1.0, 2.0], [[[0, 0], [1, 0]]])
    np.testing.assert_allclose(encode_linear(s, 0.5, z), [0.5, 1.0 + 0.3])


def test_sequential_encoder_matches_matrix_form():
    rng = np.random.default_rng(3)
    for trial in range(10):
        K, n = rng.integers(1, 4), rng.integers(1, 17)
        ch = make_channel(1.0, rng.uniform(0.2, 3.0, K))
        s = LinearFeedbackScheme(rng.normal(size=n), random_lower(rng, K, n))
        z = sample_noise(ch, n, trial)
        theta = rng.normal()
        np.testing.assert_allclose(encode_sequential(s, theta, z),
                                   encode_linear(s, theta, z), atol=1e-12)


def test_scheme_json_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    s = LinearFeedbackScheme(rng.normal(size=4), random_lower(rng, 2, 4), 0.25)
    path = tmp_path / 's.json'
    path.write_text(json.dumps(scheme_to_dict(s)))
    for src in (str(path), path.read_text(), scheme_to_dict(s)):
        t = load_scheme(src)
        np.testing.assert_array_equal(t.a_mats, s.a_mats)
        assert t.theta_variance == 0.25


def test_scheme_json_rejects_upper_entry():
    doc = {'n': 2, 'K': 1, 'd': [1, 0], 'A': [[[0, 1], [0, 0]]]}
    with pytest.raises(CausalityError):
        load_scheme(doc)
    with pytest.raises(ValidationError):
        load_scheme({'n': 3, 'K': 1, 'd': [1, 0], 'A': [[[0, 0], [0, 0]]]})


# -- rate characterization ---------------------------------------------------

def test_c_coefficient_identity_cases():
    ch = make_channel(1.0, [2.0, 0.5])
    v = np.array([[0.6, 0.8], [1.0, 0.0]])
    assert c_coefficient(np.zeros((2, 2, 2)), v, ch) == pytest.approx([2.0, 0.5])
    assert c_coefficient(np.zeros((1, 3, 3)), [[0, 1, 0]], make_channel(1, [2.0])) == [2.0]


def test_c_coefficient_hand_expansion_n2():
    # A_1 = [[0,0],[a,0]], A_2 = 0, v_1 = e_2, v_2 = (s, c):
    # c_1 = s1 ||(a, 1)||^2, c_2 = s2 + s1 ||v_2 A_1||^2 = s2 + s1 (c a)^2
    a, s1, s2 = 0.7, 2.0, 0.5
    sn, cs = 0.6, 0.8
    A = np.zeros((2, 2, 2))
    A[0, 1, 0] = a
    c = c_coefficient(A, [[0, 1], [sn, cs]], make_channel(1.0, [s1, s2]))
    assert c == pytest.approx([s1 * (1 + a * a), s2 + s1 * (cs * a) ** 2])


def test_c_coefficient_rejects_non_unit():
    with pytest.raises(ValidationError):
        c_coefficient(np.zeros((1, 2, 2)), [[1.0, 1e-4]], make_channel(1, [1]))


@pytest.mark.parametrize('c, n, r', [(1.0, 5, 0.0), (math.exp(-14), 7, 1.0),
                                     (math.exp(-3), 3, 0.5)])
def test_multiletter_rate(c, n, r):
    assert multiletter_rate(c, n) == pytest.approx(r, abs=1e-15)


def test_multiletter_rate_rejects():
    with pytest.raises(ValidationError):
        multiletter_rate(0.0, 3)


def test_dpi_examples():
    assert dpi_lower_bound([0.0, 1.0], 2.0, 0) == 0.0
    assert dpi_lower_bound([0.6, 0.8], 0.36, 0) == pytest.approx(0.5 * math.log(2))


def test_dpi_below_exact_information():
    rng = np.random.default_rng(11)
    for _ in range(100):
        K, n = rng.integers(1, 4), rng.integers(1, 6)
        ch = make_channel(1.0, rng.uniform(0.2, 3.0, K))
        A = random_lower(rng, K, n, 0.5)
        v = rng.normal(size=(K, n))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        j = rng.integers(0, n, K)
        ps = construct_private_scheme(A, v, j, ch, message_counts=[2] * K)
        c = c_coefficient(A, v, ch)
        for k in range(K):
            exact = lmmse_noise_estimate(ps, k, None, ch).mutual_info
            lb = dpi_lower_bound(v[k], c[k], j[k], ch.noise_variances[k])
            assert lb <= exact + 1e-12


# -- message points ----------------------------------------------------------

def test_message_points_and_spacing():
    pts = [message_point(m, 5).value for m in range(5)]
    assert pts[0] == 0.5
    np.testing.assert_allclose(np.diff(pts), -0.2, atol=1e-15)
    assert all(-0.5 < p <= 0.5 for p in pts)
    with pytest.raises(ValidationError):
        message_point(5, 5)


def test_theta_moments_exact():
    for N in (1, 2, 3, 7):
        vals = np.array([message_point(m, N).value for m in range(N)])
        mean, var = theta_moments(N)
        assert mean == pytest.approx(vals.mean(), abs=1e-15)
        assert var == pytest.approx(vals.var(), abs=1e-15)


def test_message_count_survives_roundoff():
    assert message_count(math.log(64) / 12, 12) == 64
    assert message_count(0.0, 12) == 1


def test_nearest_point_and_ties():
    assert nearest_message_point(0.375, 4) == 0
    assert nearest_message_point(0.125, 4) == 1
    assert nearest_message_point(0.26, 4) == 1
    assert nearest_message_point(9.0, 4) == 0 and nearest_message_point(-9.0, 4) == 3
    pts = np.array([message_point(m, 6).value for m in range(6)])
    np.testing.assert_array_equal(nearest_message_point(pts, 6), np.arange(6))


@settings(max_examples=200, deadline=None)
@given(st.floats(-1, 1), st.integers(1, 40))
def test_nearest_point_matches_scan(t, N):
    pts = np.array([0.5 - m / N for m in range(N)])
    d = np.abs(pts - t)
    best = np.flatnonzero(d <= d.min() + 1e-12)
    assert nearest_message_point(t, N) in best


# -- private construction ----------------------------------------------------

def test_toy_layout_and_slots():
    ps, ch = toy()
    assert ps.slot_layout == (('init', 0), ('regular', 0), ('extra', 0))
    z = np.array([[0.4, -0.3, 1.1]])
    x, y = private_transmit(ps, [2], z)
    mean, var = theta_moments(4)
    theta = message_point(2, 4).value
    np.testing.assert_allclose(x, [math.sqrt(1 / var) * (theta - mean), 0.0, 0.4])


def test_slot_count_n8_k2():
    rng = np.random.default_rng(0)
    ch = make_channel(1.0, [1.0, 1.0])
    ps = construct_private_scheme(random_lower(rng, 2, 8), np.eye(8)[[0, 1]], [5, 2],
                                  ch, message_counts=[3, 3])
    assert ps.total_length == 12
    assert [s for s in ps.slot_layout if s[0] == 'extra'] == [('extra', 1), ('extra', 0)]


def test_encoder_dependence_points_backward():
    rng = np.random.default_rng(5)
    ch = make_channel(1.0, [2.0, 1.0, 0.5])
    v, j = np.eye(6)[[1, 3, 3]], [1, 3, 3]
    ps = construct_private_scheme(random_lower(rng, 3, 6), v, j, ch,
                                  message_counts=[2, 3, 4])
    S = ps.total_length
    dep = np.abs(ps.noise_map).sum(axis=1)
    assert np.all(dep[np.triu_indices(S)] == 0)
    kinds = [s[0] for s in ps.slot_layout]
    for p, kind in enumerate(kinds):
        assert (np.any(ps.message_map[p] != 0)) == (kind == 'init')


def test_sequential_private_transmit_matches():
    rng = np.random.default_rng(8)
    for _ in range(10):
        K, n = rng.integers(1, 4), rng.integers(1, 9)
        ch = make_channel(1.0, rng.uniform(0.3, 2.0, K))
        counts = rng.integers(1, 9, K)
        j = rng.integers(0, n, K)
        ps = construct_private_scheme(random_lower(rng, K, n), np.eye(n)[j], j, ch,
                                      message_counts=counts)
        m = rng.integers(0, counts)
        z = rng.normal(size=(K, ps.total_length))
        x1, y1 = private_transmit(ps, m, z)
        x2, y2 = private_transmit_sequential(ps, m, z)
        np.testing.assert_allclose(x1, x2, atol=1e-12)
        np.testing.assert_allclose(y1, y2, atol=1e-12)


def test_construct_rejects_bad_inputs():
    ch = make_channel(1.0, [1.0])
    with pytest.raises(ValidationError):
        construct_private_scheme(np.zeros((1, 2, 2)), [[1.0, 0.0]], [2], ch,
                                 message_counts=[2])
    with pytest.raises(ValidationError):
        construct_private_scheme(np.zeros((1, 2, 2)), [[1.0, 0.0]], [0], ch)
    with pytest.raises(ValidationError):
        construct_private_scheme(np.zeros((1, 2, 2)), [[1.0, 1.0]], [0], ch,
                                 message_counts=[2])


def test_rates_to_counts():
    ps, _ = toy()
    ch = make_channel(1.0, [1.0])
    ps2 = construct_private_scheme(np.zeros((1, 1, 1)), [[1.0]], [0], ch,
                                   rates=[math.log(4) / 3])
    assert ps2.message_counts == (4,)
    assert ps.rates == pytest.approx((math.log(4) / 3,))


# -- LMMSE -------------------------------------------------------------------

def test_toy_lmmse_exact():
    for s2 in (1.0, 2.5):
        ps, ch = toy(s2=s2)
        est = lmmse_noise_estimate(ps, 0, None, ch)
        assert est.error_variance == pytest.approx(s2 / 2, rel=1e-15)
        assert est.mutual_info == pytest.approx(0.5 * math.log(2), rel=1e-15)


def test_independent_observation_gives_prior():
    est = lmmse(np.zeros(3), np.eye(3), 2.0, np.ones(3))
    assert est.estimate == 0.0 and est.error_variance == 2.0 and est.mutual_info == 0.0


def test_singular_covariance_regularized():
    est = lmmse([1.0, 0.0], np.diag([1.0, 0.0]), 2.0)
    assert est.regularized
    assert est.error_variance == pytest.approx(1.0)


def test_error_variance_consistent_with_information():
    rng = np.random.default_rng(2)
    for _ in range(30):
        K, n = rng.integers(1, 4), rng.integers(1, 7)
        ch = make_channel(1.0, rng.uniform(0.2, 3.0, K))
        j = rng.integers(0, n, K)
        ps = construct_private_scheme(random_lower(rng, K, n), np.eye(n)[j], j, ch,
                                      message_counts=[2] * K)
        for k in range(K):
            e = lmmse_noise_estimate(ps, k, None, ch)
            assert e.error_variance == pytest.approx(
                ch.noise_variances[k] * math.exp(-2 * e.mutual_info), rel=1e-14)


def test_observation_covariance_matches_simulation():
    rng = np.random.default_rng(4)
    ch = make_channel(1.0, [1.5, 0.7])
    ps = construct_private_scheme(random_lower(rng, 2, 4, 0.5), np.eye(4)[[1, 2]],
                                  [1, 2], ch, message_counts=[1, 1])
    sim = simulate_private(ps, ch, 40000, 9)
    for k in range(2):
        emp = np.cov(sim.views[:, k].T)
        np.testing.assert_allclose(emp, observation_covariance(ps, k, ch), atol=0.06)


def test_toy_mse_matches_error_variance():
    ps, ch = toy()
    sim = simulate_private(ps, ch, 40000, 1)
    assert np.mean(sim.noise_error[:, 0] ** 2) == pytest.approx(0.5, rel=0.03)


# -- decoding ----------------------------------------------------------------

def test_noiseless_decoding_is_exact():
    rng = np.random.default_rng(6)
    ch = make_channel(1.0, [1.0, 1.0])
    s = LinearFeedbackScheme(np.ones(5), random_lower(rng, 2, 5))
    v, j = lmmse_directions(s, ch)
    ps = construct_private_scheme(s.a_mats, v, j, ch, message_counts=[5, 9])
    for m in ([0, 0], [4, 8], [2, 3]):
        _, y = private_transmit(ps, m, np.zeros((2, ps.total_length)))
        assert [decode_private(ps, k, y[k], ch) for k in range(2)] == m


def test_single_message_never_wrong():
    ps, ch = toy(count=1)
    sim = simulate_private(ps, ch, 500, 2)
    assert not sim.errors.any()
    assert private_error_bound(ps, 0, ch) == 0.0


def test_error_bound_formula_toy():
    ps, ch = toy()
    _, var = theta_moments(4)
    expect = 2 * qfunc(math.sqrt(2) / 8 * math.sqrt(1 / var))
    assert private_error_bound(ps, 0, ch) == pytest.approx(expect, rel=1e-14)


def test_error_bound_vanishes_as_rate_shrinks():
    rng = np.random.default_rng(1)
    ch = make_channel(1.0, [1.0])
    A = random_lower(rng, 1, 6, 0.6)
    b = [private_error_bound(construct_private_scheme(A, [np.eye(6)[2]], [2], ch,
                                                      message_counts=[N]), 0, ch)
         for N in (2, 8, 64)]
    assert b[0] < b[1] < b[2]


def test_toy_error_rate_below_bound():
    ps, ch = toy()
    sim = simulate_private(ps, ch, 40000, 3)
    assert sim.errors.mean() <= private_error_bound(ps, 0, ch)


def test_power_display_bound():
    rng = np.random.default_rng(7)
    ch = make_channel(2.0, [1.0, 0.5])
    n = 6
    A = random_lower(rng, 2, n, 0.4)
    ps = construct_private_scheme(A, np.eye(n)[[2, 4]], [2, 4], ch,
                                  message_counts=[4, 4])
    assert ps.regular_power(ch) <= n * (ch.power_budget - ps.delta)
    e = ps.slot_energy(ch)
    assert e.sum() <= ps.power_bound(ch) + 1e-12
    sim = simulate_private(ps, ch, 40000, 5)
    assert sim.energy.mean() == pytest.approx(e.sum(), rel=0.03)


def test_receiver_view_positions():
    ps, ch = toy()
    y = np.array([[10.0, 20.0, 30.0]])
    init, tilde = receiver_view(ps, 0, y)
    assert init[0] == 10.0 and tilde.tolist() == [[30.0]]
