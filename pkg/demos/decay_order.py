"""Decay order of the analytic phase error probabilities.

With rho_1 decaying exponentially in n, each retransmission phase compounds
the decay. The diagnostic regresses the iterated logarithm of 1/gamma_L on n
and reports the slope and fit quality.

    python demos/decay_order.py [outdir]
"""
import sys
from pathlib import Path

import numpy as np

from bcfeedback.channel import make_channel
from bcfeedback.intermittent import analytic_log_gammas, decay_order_diagnostic
from bcfeedback.svg import write_line_plot


def main(outdir='.'):
    ch = make_channel(1.0, [1.0, 1.0])
    ns = np.arange(100, 900, 100)
    lg = np.array([analytic_log_gammas(int(n), 2, 0.25, 0.05, ch,
                                       log_rho1=-0.05 * n) for n in ns])
    rep = decay_order_diagnostic(ns, lg[:, 1], 2, log_input=True)
    print(f"slope {rep.slope:.5f}, R^2 {rep.r_squared:.6f}, sub-order {rep.sub_order}")
    out = Path(outdir) / 'decay_order.svg'
    write_line_plot(out, {'-log gamma_1': (ns, -lg[:, 0]),
                          '-log gamma_2': (ns, -lg[:, 1])},
                    xlabel='block length n', ylabel='nats',
                    title='phase error exponents')
    print('wrote', out)


if __name__ == '__main__':
    main(*sys.argv[1:])
