"""Command-line front end.

Subcommands
-----------
bound
    Linear-feedback upper bound, its closed-form envelope and the capacity for
    K = 1..kmax receivers.
alpha
    Power fractions that equalize the outer-bound rates, with residuals.
simulate-intermittent
    Monte Carlo of the intermittent-feedback protocol plus the single-phase
    baseline at the same blocklength, power and message count.
simulate-linfb
    Monte Carlo of the private-message scheme built from a linear-feedback
    scheme file.
sweep
    Protocol Monte Carlo over a grid of config overrides.

Exit codes: 0 success, 1 unexpected failure, 2 invalid input or config,
3 solver failure (rows that failed are still written).
"""

import argparse
import csv
import io
import itertools
import json
import math
import sys
from dataclasses import replace

import numpy as np

from . import bounds, intermittent, linfb, montecarlo
from .channel import make_channel
from .errors import SolverError, ValidationError
from .svg import write_line_plot

SCHEMA_VERSION = 1
HEADERS = {
    'bound': ['K', 'linfb_upper_bound', 'prop2_envelope', 'capacity', 'status'],
    'alpha': ['k', 'caller_index', 'noise_variance', 'effective_noise', 'alpha',
              'rate', 'residual'],
    'simulate-intermittent': [
        'protocol', 'L', 'n', 'message_count', 'power_budget', 'trials', 'errors',
        'p_hat', 'ci_low', 'ci_high', 'mean_power', 'power_stderr', 'E1', 'E2',
        'E3', 'fb_used', 'fb_limit', 'fb_pass'],
    'simulate-linfb': [
        'receiver', 'message_count', 'rate', 'trials', 'errors', 'p_hat', 'ci_low',
        'ci_high', 'error_bound', 'lmmse_var', 'lmmse_var_empirical',
        'mutual_info', 'bound_holds'],
    'sweep': [
        'cell', 'L', 'n', 'epsilon', 'message_count', 'power_budget', 'trials',
        'errors', 'p_hat', 'ci_low', 'ci_high', 'mean_power', 'power_stderr', 'E1',
        'E2', 'E3'],
}

EXIT_OK, EXIT_UNEXPECTED, EXIT_INVALID, EXIT_SOLVER = 0, 1, 2, 3


def fmt(x):
    """CSV cell text: 12 significant digits for floats."""
    if isinstance(x, (bool, np.bool_)):
        return 'true' if x else 'false'
    if isinstance(x, (float, np.floating)):
        return f'{float(x):.12g}'
    return str(x)


class _Units:
    def __init__(self, bits):
        self.scale = 1.0 / math.log(2.0) if bits else 1.0

    def __call__(self, nats):
        return nats * self.scale


def write_csv(command, rows, out):
    buf = io.StringIO(newline='')
    w = csv.writer(buf, lineterminator='\n')
    w.writerow(HEADERS[command])
    for row in rows:
        w.writerow([fmt(c) for c in row])
    text = buf.getvalue()
    if out in (None, '-'):
        sys.stdout.write(text)
    else:
        with open(out, 'w', encoding='utf-8', newline='') as fh:
            fh.write(text)


def parse_sigma(text):
    try:
        vals = [float(t) for t in text.split(',') if t.strip()]
    except ValueError:
        raise ValidationError(f"--sigma must be a comma list of numbers, got {text!r}") from None
    if not vals:
        raise ValidationError("--sigma is empty")
    return vals


def _read_json(path):
    try:
        with open(path, encoding='utf-8') as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from None


def _require_positive_int(name, value, minimum=1):
    if value is None or int(value) < minimum:
        raise ValidationError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


# ---------------------------------------------------------------------------
# bound / alpha
# ---------------------------------------------------------------------------

def cmd_bound(args):
    kmax = _require_positive_int('--kmax', args.kmax)
    sigma = parse_sigma(args.sigma)
    if len(sigma) not in (1,) and len(sigma) < kmax:
        raise ValidationError(
            f"--sigma gives {len(sigma)} variances; need 1 or at least kmax={kmax}")
    make_channel(args.power, sigma)  # validate before computing anything
    u = _Units(args.bits)
    rows, failed = [], False
    for K in range(1, kmax + 1):
        var = sigma * K if len(sigma) == 1 else sigma[:K]
        ch = make_channel(args.power, var)
        env, cap = u(bounds.prop2_envelope(ch)), u(bounds.capacity(ch))
        try:
            rows.append([K, u(bounds.linfb_upper_bound(ch)), env, cap, 'ok'])
        except SolverError as exc:
            failed = True
            rows.append([K, math.nan, env, cap, f'solver_error: {exc}'])
    write_csv('bound', rows, args.out)
    if args.svg:
        ks = [r[0] for r in rows]
        write_line_plot(args.svg, {
            'linear-feedback bound': (ks, [r[1] for r in rows]),
            'closed-form envelope': (ks, [r[2] for r in rows]),
        }, xlabel='number of receivers K',
            ylabel='rate (bits)' if args.bits else 'rate (nats)',
            title=f'common-message rate bounds, P = {args.power:g}')
    return EXIT_SOLVER if failed else EXIT_OK


def cmd_alpha(args):
    ch = make_channel(args.power, parse_sigma(args.sigma))
    star = bounds.solve_alpha_star(ch)
    noises = bounds.effective_noises(ch).values
    u = _Units(args.bits)
    rates = bounds.private_outer_rates(ch, star.alphas)
    rows = []
    for k in range(ch.num_receivers):
        rows.append([k, ch.order[k], ch.noise_variances[k], noises[k],
                     star.alphas[k], u(rates[k]), star.residuals[k]])
    write_csv('alpha', rows, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Protocol simulation
# ---------------------------------------------------------------------------

def _protocol_setup(args):
    doc = _read_json(args.config)
    if args.sigma is not None:
        sigma = parse_sigma(args.sigma)
    elif 'noise_variances' in doc:
        sigma = [float(v) for v in doc['noise_variances']]
    else:
        raise ValidationError("noise variances missing: pass --sigma or set "
                              "'noise_variances' in the config")
    if args.power is not None:
        doc = dict(doc, power_budget=args.power)
    cfg = intermittent.IntermittentConfig.from_dict(doc)
    ch = make_channel(cfg.power_budget, sigma)
    return doc, cfg, ch


def _calibrate(cfg, ch, args):
    if args.calibrate_power is not None:
        P = intermittent.calibrate_power(cfg, ch, args.calibrate_power,
                                         args.calibration_trials, args.seed + 1)
        cfg = replace(cfg, power_budget=P, gamma=None)
        ch = ch.with_power(P)
    if cfg.gamma is None and cfg.L > 1:
        g = intermittent.calibrate_gammas(cfg, ch, args.calibration_trials,
                                          args.seed + 2)
        cfg = replace(cfg, gamma=g)
    return cfg, ch


def _protocol_row(name, cfg, rep, u):
    used = rep.mean_fb_nats
    limit = cfg.n * cfg.fb_rate
    ok = used <= limit * (1 + 1e-12) + 1e-15
    ev = rep.event_counts
    return [name, cfg.L, cfg.n, cfg.message_count, cfg.power_budget, rep.trials,
            rep.errors, rep.p_hat, rep.ci_low, rep.ci_high, rep.mean_power,
            rep.power_stderr, ev['E1'], ev['E2'], ev['E3'], u(used), u(limit), ok]


def cmd_simulate_intermittent(args):
    trials = _require_positive_int('--trials', args.trials, montecarlo.MIN_TRIALS)
    _, cfg, ch = _protocol_setup(args)
    cfg, ch = _calibrate(cfg, ch, args)
    base = intermittent.baseline_config(cfg)
    u = _Units(args.bits)
    reports = {}
    for name, c in (('intermittent', cfg), ('baseline', base)):
        runner = intermittent.protocol_runner(c, ch, noiseless=args.noiseless)
        reports[name] = (c, montecarlo.estimate_error(runner, trials, args.seed))
    write_csv('simulate-intermittent',
              [_protocol_row(k, c, r, u) for k, (c, r) in reports.items()], args.out)
    if args.json:
        with open(args.json, 'w', encoding='utf-8', newline='\n') as fh:
            json.dump({k: {'config': c.to_dict(), 'report': r.to_dict(),
                           'noise_variances': list(ch.noise_variances)}
                       for k, (c, r) in reports.items()}, fh, indent=2)
            fh.write('\n')
    return EXIT_OK


def parse_grid(items):
    """``['n=100,200', 'L=1,2']`` -> list of override dicts (cartesian product)."""
    axes = []
    for item in items or []:
        key, sep, vals = item.partition('=')
        if not sep or not vals:
            raise ValidationError(f"grid entry must look like key=v1,v2: {item!r}")
        parsed = []
        for v in vals.split(','):
            num = float(v)
            parsed.append(int(num) if num.is_integer() and key != 'epsilon'
                          and key != 'power_budget' else num)
        axes.append([(key.strip(), v) for v in parsed])
    if not axes:
        raise ValidationError("sweep needs at least one --grid entry")
    return [dict(combo) for combo in itertools.product(*axes)]


def cmd_sweep(args):
    trials = _require_positive_int('--trials', args.trials, montecarlo.MIN_TRIALS)
    doc, _, ch = _protocol_setup(args)
    grid = parse_grid(args.grid)
    configs = {}
    for cell in grid:
        cell_doc = dict(doc, **cell)
        if any(k in cell for k in ('L', 'n', 'epsilon', 'message_count')):
            cell_doc.pop('gamma', None)
            cell_doc.pop('fb_rate', None)
            cell_doc.pop('seeds', None)
        cfg = intermittent.IntermittentConfig.from_dict(cell_doc)
        cch = ch.with_power(cfg.power_budget)
        if cfg.gamma is None and cfg.L > 1:
            seed = montecarlo.cell_seed(args.seed, cell)
            cfg = replace(cfg, gamma=intermittent.calibrate_gammas(
                cfg, cch, args.calibration_trials, seed + 2))
        configs[montecarlo.cell_key(cell)] = (cfg, cch)

    def make_runner(cell):
        cfg, cch = configs[montecarlo.cell_key(cell)]
        return intermittent.protocol_runner(cfg, cch, noiseless=args.noiseless)

    table = montecarlo.sweep(grid, make_runner, trials, args.seed)
    rows = []
    for key, rep in table.items():
        cfg, _ = configs[key]
        ev = rep.event_counts
        rows.append([key, cfg.L, cfg.n, cfg.epsilon, cfg.message_count,
                     cfg.power_budget, rep.trials, rep.errors, rep.p_hat,
                     rep.ci_low, rep.ci_high, rep.mean_power, rep.power_stderr,
                     ev['E1'], ev['E2'], ev['E3']])
    write_csv('sweep', rows, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Private-message scheme simulation
# ---------------------------------------------------------------------------

def cmd_simulate_linfb(args):
    trials = _require_positive_int('--trials', args.trials, montecarlo.MIN_TRIALS)
    doc = _read_json(args.config)
    scheme = linfb.load_scheme(doc)
    K = scheme.num_receivers
    if args.sigma is not None:
        sigma = parse_sigma(args.sigma)
    else:
        sigma = [float(v) for v in doc.get('noise_variances', [1.0] * K)]
    power = args.power if args.power is not None else float(doc.get('power', 1.0))
    if len(sigma) == 1:
        sigma = sigma * K
    ch = make_channel(power, sigma)
    if ch.num_receivers != K:
        raise ValidationError(f"{ch.num_receivers} noise variances for K={K}")
    perm = list(ch.order)

    def pick(key, default):
        val = doc.get(key)
        return default if val is None else [val[p] for p in perm]

    # Receivers are stored noisiest first; per-receiver inputs follow suit.
    a = scheme.a_mats[perm]
    s = linfb.LinearFeedbackScheme(scheme.d, a, scheme.theta_variance)
    v0, j0 = linfb.lmmse_directions(s, ch)
    v = pick('v', v0)
    j = pick('j', list(j0))
    if doc.get('rates') is not None:
        ps = linfb.construct_private_scheme(a, v, j, ch, rates=pick('rates', None),
                                            delta=doc.get('delta'))
    else:
        ps = linfb.construct_private_scheme(
            a, v, j, ch, message_counts=pick('message_counts', [2] * K),
            delta=doc.get('delta'))
    sim = linfb.simulate_private(ps, ch, trials, args.seed)
    u = _Units(args.bits)
    rows = []
    for k in range(K):
        errs = int(sim.errors[:, k].sum())
        rep = montecarlo.report_from_counts(errs, trials, args.seed)
        est = linfb.lmmse_noise_estimate(ps, k, None, ch)
        bound = linfb.private_error_bound(ps, k, ch)
        rows.append([ch.order[k], ps.message_counts[k], u(ps.rates[k]), trials,
                     errs, rep.p_hat, rep.ci_low, rep.ci_high, bound,
                     est.error_variance, float(np.mean(sim.noise_error[:, k] ** 2)),
                     u(est.mutual_info), rep.ci_low <= bound])
    rows.sort(key=lambda r: r[0])
    write_csv('simulate-linfb', rows, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(
        prog='bcfeedback',
        description='Bounds and simulations for feedback coding on the '
                    'Gaussian broadcast channel.',
        epilog='exit codes: 0 ok, 1 unexpected error, 2 invalid input, '
               '3 solver failure')
    p.add_argument('--version', action='version',
                   version=f'%(prog)s (csv schema {SCHEMA_VERSION})')
    sub = p.add_subparsers(dest='command', required=True)

    def common(sp, sigma_default=None, power_default=None):
        sp.add_argument('--power', type=float, default=power_default,
                        help='power budget P')
        sp.add_argument('--sigma', default=sigma_default,
                        help='comma-separated noise variances')
        sp.add_argument('--out', default='-', help="CSV path ('-' for stdout)")
        sp.add_argument('--bits', action='store_true',
                        help='report rates in bits instead of nats')

    sp = sub.add_parser('bound', help='upper bound vs number of receivers')
    common(sp, '1', 1.0)
    sp.add_argument('--kmax', type=int, default=30)
    sp.add_argument('--svg', help='also write an SVG plot here')
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser('alpha', help='rate-equalizing power fractions')
    common(sp, '1,1', 1.0)
    sp.set_defaults(func=cmd_alpha)

    for name, func, help_ in (
            ('simulate-intermittent', cmd_simulate_intermittent,
             'intermittent-feedback protocol vs single-phase baseline'),
            ('sweep', cmd_sweep, 'protocol Monte Carlo over a parameter grid')):
        sp = sub.add_parser(name, help=help_)
        common(sp)
        sp.add_argument('--config', required=True, help='protocol config JSON')
        sp.add_argument('--trials', type=int, default=2000)
        sp.add_argument('--seed', type=int, default=0)
        sp.add_argument('--calibration-trials', type=int, default=2000)
        sp.add_argument('--noiseless', action='store_true',
                        help='debug: force all noise to zero')
        sp.set_defaults(func=func)
        if name == 'sweep':
            sp.add_argument('--grid', action='append',
                            help='key=v1,v2,... (repeatable; cartesian product)')
        else:
            sp.add_argument('--calibrate-power', type=float, metavar='TARGET',
                            help='first tune P so the baseline errs at TARGET')
            sp.add_argument('--json', help='also write full JSON reports here')

    sp = sub.add_parser('simulate-linfb', help='private-message scheme Monte Carlo')
    common(sp)
    sp.add_argument('--config', required=True, help='scheme JSON')
    sp.add_argument('--trials', type=int, default=10000)
    sp.add_argument('--seed', type=int, default=0)
    sp.set_defaults(func=cmd_simulate_linfb)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except Exception as exc:  # noqa: BLE001
        print(f"unexpected error: {exc!r}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == '__main__':
    sys.exit(main())
