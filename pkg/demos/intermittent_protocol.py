"""One trace of the intermittent-feedback protocol, then a small error estimate.

    python demos/intermittent_protocol.py
"""
import math

from bcfeedback.channel import make_channel
from bcfeedback.intermittent import (IntermittentConfig, baseline_config,
                                     calibrate_gammas, classify_error_events,
                                     protocol_runner, run_protocol)
from bcfeedback.montecarlo import estimate_error


def main(trials=2000):
    M, n, P = 16, 30, 1.0
    ch = make_channel(P, [1.0, 1.0])
    cfg = IntermittentConfig(3, n, 0.3, M, P, 2 * math.log(M) / n)
    cfg = IntermittentConfig(3, n, 0.3, M, P, cfg.fb_rate,
                             calibrate_gammas(cfg, ch, trials, 1))
    print('phase boundaries', cfg.boundaries, 'gamma', [round(g, 4) for g in cfg.gamma])

    tr = run_protocol(cfg, 5, ch, seed=11)
    for ph, tags in zip(tr.phases, classify_error_events(tr)):
        fired = '-' if ph.fired is None else ph.fired.tolist()
        print(f"phase {ph.index}: symbols [{ph.start}, {ph.stop}) "
              f"guesses {ph.guesses.tolist()} fired {fired} events {sorted(tags)}")
    print(f"power {tr.power:.4f}, feedback per receiver "
          f"{[round(f, 3) for f in tr.feedback_nats]} nats")

    for name, c in (('intermittent', cfg), ('no feedback', baseline_config(cfg))):
        rep = estimate_error(protocol_runner(c, ch), trials, 100)
        print(f"{name}: p={rep.p_hat:.4f} [{rep.ci_low:.4f}, {rep.ci_high:.4f}] "
              f"events {rep.event_counts}")


if __name__ == '__main__':
    main()
