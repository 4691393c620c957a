"""Private-message construction on a random two-receiver scheme.

Prints the LMMSE error variance of each receiver's initialization noise,
the Monte Carlo squared error, and the simulated error rate next to the
analytic bound.

    python demos/private_scheme.py
"""
import numpy as np

from bcfeedback.channel import make_channel
from bcfeedback.linfb import (LinearFeedbackScheme, construct_private_scheme,
                              lmmse_directions, lmmse_noise_estimate,
                              private_error_bound, simulate_private)


def main(seed=7, n=8, trials=50_000):
    rng = np.random.default_rng(seed)
    ch = make_channel(4.0, [1.0, 2.0])
    A = np.tril(rng.normal(scale=0.3, size=(2, n, n)), -1)
    v, j = lmmse_directions(LinearFeedbackScheme(rng.normal(size=n), A), ch)
    ps = construct_private_scheme(A, v, j, ch, message_counts=[4, 4])
    sim = simulate_private(ps, ch, trials, seed)
    for k in range(2):
        est = lmmse_noise_estimate(ps, k, None, ch)
        mse = float(np.mean(sim.noise_error[:, k] ** 2))
        print(f"receiver {k}: j={ps.j[k]}, Var={est.error_variance:.4f} "
              f"(MC {mse:.4f}), I={est.mutual_info:.4f} nats, "
              f"error {sim.errors[:, k].mean():.4f} <= bound "
              f"{private_error_bound(ps, k, ch):.4f}")


if __name__ == '__main__':
    main()
