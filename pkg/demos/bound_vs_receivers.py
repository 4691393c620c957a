"""Linear-feedback rate bound against the number of receivers.

Equal unit noise variances, so the feedback-free capacity does not depend on
K while the bound falls off roughly like log(1 + P / log K) / 2.

    python demos/bound_vs_receivers.py [outdir]
"""
import sys
from pathlib import Path

import numpy as np

from bcfeedback.bounds import capacity, linfb_upper_bound, prop2_envelope
from bcfeedback.channel import make_channel
from bcfeedback.svg import write_line_plot


def main(outdir='.'):
    ks = np.arange(1, 31)
    series = {}
    for P in (1.0, 10.0):
        chans = [make_channel(P, [1.0] * int(K)) for K in ks]
        series[f'bound, P={P:g}'] = (ks, [linfb_upper_bound(c) for c in chans])
        series[f'envelope, P={P:g}'] = (ks, [prop2_envelope(c) for c in chans])
        print(f"P={P:g}: capacity {capacity(chans[0]):.4f}, "
              f"bound at K=30 {series[f'bound, P={P:g}'][1][-1]:.4f} nats")
    out = Path(outdir) / 'bound_vs_receivers.svg'
    write_line_plot(out, series, xlabel='receivers K', ylabel='rate (nats)',
                    title='linear-feedback bound, unit noise variances')
    print('wrote', out)


if __name__ == '__main__':
    main(*sys.argv[1:])
