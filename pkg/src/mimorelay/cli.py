"""Command-line front end: single evaluations, sweeps and figure data as CSV.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import List, Optional

import numpy as np

from . import analytic as outage, capacity, mcsim, multirelay
from .channel import ChannelConfig, CorrelationMatrix, FadingModel, exponential_corr, two_antenna_corr
from .errors import DegeneracyError, DomainError, InsufficientDataError, NumericalError, RelayError, ValidationError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

FIG_TRIALS = 10**6
FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6")


class UsageError(ValidationError):
    pass


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "nan"
    return "%.11e" % v


class CsvWriter:
    def __init__(self, stream):
        self.stream = stream

    def header(self, items):
        for key, value in items:
            self.stream.write(f"# {key}: {value}\n")

    def columns(self, names):
        self.stream.write(",".join(names) + "\n")

    def row(self, values):
        self.stream.write(",".join(fmt(v) for v in values) + "\n")


# ---------------------------------------------------------------------------
# scenario resolution
# ---------------------------------------------------------------------------


def load_scenario(path: str) -> dict:
    """Scenario file: YAML or JSON mapping (see README for the keys)."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".json"):
        data = json.loads(text)
    else:
        import yaml

        data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise UsageError(f"scenario file {path} must hold a mapping")
    known = {"m", "n", "alpha", "rho_sr", "rho_rd", "corr_sr", "corr_rd", "fading_sr", "fading_rd",
             "csi_at_source", "relays", "direct_p"}
    unknown = set(data) - known
    if unknown:
        raise UsageError(f"unknown scenario keys: {sorted(unknown)}")
    return data


def _to_complex(v):
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(v[0], v[1])
    return complex(v)


def _corr(rho, matrix, dim, side):
    if matrix is not None:
        entries = np.array([[_to_complex(v) for v in row] for row in matrix])
        return CorrelationMatrix(entries)
    if rho is None:
        return None
    rho = _to_complex(rho)
    if rho == 0:
        return None
    if dim < 2:
        raise UsageError(f"--rho-{side} needs at least 2 antennas on that side (got {dim})")
    return two_antenna_corr(rho) if dim == 2 else exponential_corr(rho, dim)


def resolve_config(args) -> tuple:
    """Merge the scenario file (if any) with explicit flags; flags win."""
    data = load_scenario(args.corr_file) if args.corr_file else {}

    def pick(flag, key, default):
        v = getattr(args, flag, None)
        if v is not None:
            return v
        return data.get(key, default)

    m = int(pick("m", "m", 1))
    n = int(pick("n", "n", 1))
    alpha = float(pick("alpha", "alpha", 0.0))
    fading_sr = FadingModel.parse(str(pick("fading_sr", "fading_sr", "rayleigh")))
    fading_rd = FadingModel.parse(str(pick("fading_rd", "fading_rd", "rayleigh")))
    csi = data.get("csi_at_source", True)
    if getattr(args, "no_csi", False):
        csi = False
    corr_sr = _corr(pick("rho_sr", "rho_sr", None), None if args.rho_sr is not None else data.get("corr_sr"), m, "sr")
    corr_rd = _corr(pick("rho_rd", "rho_rd", None), None if args.rho_rd is not None else data.get("corr_rd"), n, "rd")
    config = ChannelConfig(m, n, alpha, corr_sr, corr_rd, fading_sr, fading_rd, bool(csi))
    relays = int(pick("relays", "relays", 1))
    direct_p = pick("direct_p", "direct_p", None)
    return config, relays, (None if direct_p is None else float(direct_p))


def config_header(config: ChannelConfig, relays=1, direct_p=None, protocol="af"):
    def corr_text(c):
        if c is None or c.is_identity():
            return "identity"
        return json.dumps([[f"{complex(v).real:.12g}{complex(v).imag:+.12g}j" for v in row] for row in c.entries])

    items = [
        ("m", config.m),
        ("n", config.n),
        ("alpha", repr(float(config.alpha))),
        ("corr_sr", corr_text(config.corr_sr)),
        ("corr_rd", corr_text(config.corr_rd)),
        ("fading_sr", str(config.fading_sr)),
        ("fading_rd", str(config.fading_rd)),
        ("csi_at_source", str(config.csi_at_source).lower()),
        ("protocol", protocol),
        ("relays", relays),
    ]
    if direct_p is not None:
        items.append(("direct_p", repr(direct_p)))
    return items


def _thresholds(args) -> List[tuple]:
    """(snr_db or nan, x) pairs from --x or --rate-bits/--snr-db."""
    if args.x:
        if args.snr_db:
            raise UsageError("give either --x or --snr-db, not both")
        return [(float("nan"), x) for x in args.x]
    if not args.snr_db:
        raise UsageError("need --x or --snr-db (with --rate-bits)")
    rate = args.rate_bits * math.log(2.0)
    return [(db, outage.threshold(rate, 10.0 ** (db / 10.0))) for db in args.snr_db]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_outage(args, out):
    config, relays, direct_p = resolve_config(args)
    pts = _thresholds(args)
    out.header([("command", "outage")] + config_header(config, relays, direct_p, args.protocol)
               + [("rate_bits", repr(args.rate_bits))])
    cols = ["snr_db", "x", "p_outage"]
    lowout = None
    if args.protocol == "af" and config.is_rayleigh and config.csi_at_source:
        lowout = outage.lowout(config)
        cols.append("p_lowout")
    if relays > 1 or direct_p is not None:
        cols.append("p_selection")
    out.columns(cols)
    for db, x in pts:
        p = outage.outage(x, config, args.protocol)
        row = [db, x, p]
        if lowout is not None:
            row.append(lowout(x) if x > 0 else 0.0)
        if relays > 1 or direct_p is not None:
            row.append(multirelay.selection_outage([p] * relays, direct_p))
        out.row(row)


def cmd_capacity(args, out):
    config, _, _ = resolve_config(args)
    if args.eps is None:
        raise UsageError("capacity needs --eps")
    if not args.snr_db:
        raise UsageError("capacity needs --snr-db")
    out.header([("command", "capacity")] + config_header(config, protocol=args.protocol) + [("eps", repr(args.eps))])
    approx = None
    if args.protocol == "af" and config.is_rayleigh and config.csi_at_source:
        approx = capacity.snr_loss_approx(args.eps, config)
    out.columns(["snr_db", "gamma", "x_eps", "c_exact", "c_high_snr", "c_low_snr", "c_awgn", "x_eps_approx", "approx_applicable"])
    for db in args.snr_db:
        g = 10.0 ** (db / 10.0)
        c = capacity.outage_capacity(args.eps, g, config, args.protocol)
        row = [db, g, c.x_eps, c.exact, c.high_snr, c.low_snr, math.log1p(g)]
        row += [approx.x_eps, approx.applicable] if approx else [float("nan"), False]
        out.row(row)


def cmd_dmt(args, out):
    config, relays, _ = resolve_config(args)
    if not args.snr_db:
        raise UsageError("dmt needs --snr-db")
    rs = args.r if args.r else [0.0]
    d_s, d_d = config.diversity_orders()
    out.header([("command", "dmt")] + config_header(config, relays, protocol=args.protocol)
               + [("threshold", "x = gamma^(r-1)"), ("d_s", repr(d_s)), ("d_d", repr(d_d))])
    out.columns(["r", "snr_db", "d_finite", "saturated", "d_asymptotic"])
    for r in rs:
        d_inf = capacity.asymptotic_dmt(r=r, relays=[(d_s, d_d)] * relays)
        for db in args.snr_db:
            if relays > 1:
                g = 10.0 ** (db / 10.0)
                p = multirelay.selection_outage([outage.outage(capacity.dmt_threshold(g, r), config, args.protocol)] * relays)
                sat = p < capacity.P_FLOOR
                pt = capacity.DmtPoint(r, -math.log(max(p, capacity.P_FLOOR)) / math.log(g), g, sat)
            else:
                pt = capacity.finite_snr_dmt(10.0 ** (db / 10.0), r, config, args.protocol)
            out.row([r, db, pt.d, pt.saturated, d_inf])


def _mc_target(config, relays, direct_p, args):
    if relays > 1 or args.selection or direct_p is not None:
        return multirelay.RelaySet.identical(config, relays, direct_p), args.protocol + "-selection"
    return config, args.protocol


def cmd_mc(args, out):
    config, relays, direct_p = resolve_config(args)
    if not args.snr_db:
        raise UsageError("mc needs --snr-db")
    target, protocol = _mc_target(config, relays, direct_p, args)
    out.header([("command", "mc")] + config_header(config, relays, direct_p, protocol)
               + [("rate_bits", repr(args.rate_bits)), ("trials", args.trials), ("seed", args.seed),
                  ("partitions", args.partitions)])
    if args.slope:
        rs = args.r if args.r else [0.0]
        out.columns(["r", "slope", "intercept", "points_used", "points_excluded"])
        for r in rs:
            fit = mcsim.diversity_fit(config, r, args.snr_db, args.trials, args.seed, args.protocol)
            out.row([r, fit.slope, fit.intercept, len(fit.used_db), len(fit.excluded_db)])
        return
    rate = args.rate_bits * math.log(2.0)
    out.columns(["snr_db", "x", "p_mc", "stderr", "outages", "trials", "p_analytic"])
    for i, db in enumerate(args.snr_db):
        g = 10.0 ** (db / 10.0)
        x = outage.threshold(rate, g)
        est = mcsim.estimate_outage(target, rate, g, args.trials, args.seed + i, protocol, args.partitions)
        if isinstance(target, multirelay.RelaySet):
            ref = target.outage(x, args.protocol)
        else:
            ref = outage.outage(x, config, args.protocol)
        out.row([db, x, est.p_hat, est.stderr, est.outages, est.trials, ref])


def cmd_selection(args, out):
    config, relays, direct_p = resolve_config(args)
    if not config.is_iid_rayleigh:
        raise UsageError("selection low-outage forms need i.i.d. Rayleigh links")
    pts = _thresholds(args)
    rs = multirelay.RelaySet.identical(config, relays, direct_p)
    lo = multirelay.selection_lowout(None, config.alpha, config.m, config.n, relays)
    out.header([("command", "selection")] + config_header(config, relays, direct_p, args.protocol))
    out.columns(["snr_db", "x", "p_single", "p_selection", "p_lowout"])
    for db, x in pts:
        single = outage.outage(x, config, args.protocol)
        out.row([db, x, single, rs.outage(x, args.protocol), lo(x) if x > 0 else 0.0])


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------


def fig2(args, out):
    c0 = ChannelConfig(2, 2, 0.0, two_antenna_corr(0.5), two_antenna_corr(0.5))
    xs = (1e-1, 1e-2, 1e-3)
    alphas = np.logspace(-3, 2, 26)
    out.header([("figure", "fig2"), ("sweep", "alpha logspace[1e-3, 1e2], 26 points")] + config_header(c0))
    out.columns(["alpha"] + [f"p_x{x:g}" for x in xs])
    for a in alphas:
        c = ChannelConfig(2, 2, float(a), c0.corr_sr, c0.corr_rd)
        out.row([float(a)] + [outage.outage_af(x, c) for x in xs])


_FIG3_SHAPES = ((1, 1), (2, 1), (1, 2))


def fig3(args, out):
    alpha = 1.0
    xs = np.logspace(-4, 1, 21)
    trials = args.trials or FIG_TRIALS
    tags = [f"{m}x{n}" for m, n in _FIG3_SHAPES]
    out.header([("figure", "fig3"), ("alpha", repr(alpha)), ("sweep", "x logspace[1e-4, 10], 21 points"),
                ("trials", trials), ("seed", args.seed)])
    out.columns(["x"] + [f"p_exact_{t}" for t in tags] + [f"p_approx_{t}" for t in tags] + [f"p_mc_{t}" for t in tags])
    mc = []
    for i, (m, n) in enumerate(_FIG3_SHAPES):
        p, _ = mcsim.empirical_outage_curve(ChannelConfig(m, n, alpha), xs, trials, args.seed + i)
        mc.append(p)
    for j, x in enumerate(xs):
        x = float(x)
        exact = [outage.outage_af(x, ChannelConfig(m, n, alpha)) for m, n in _FIG3_SHAPES]
        approx = [multirelay.selection_lowout_simple(x, alpha, m, n, 1) for m, n in _FIG3_SHAPES]
        out.row([x] + exact + approx + [float(p[j]) for p in mc])


def fig4(args, out):
    x = 1e-2
    out.header([("figure", "fig4"), ("x", repr(x)), ("alpha", "0.0"), ("m", 1), ("n", 2),
                ("correlation", "relay-destination, two antennas"), ("sweep", "|rho| 0..0.99 step 0.01")])
    out.columns(["rho", "p_exact", "p_approx", "p_1x1"])
    p11 = outage.outage_af(x, ChannelConfig(1, 1, 0.0))
    for k in range(100):
        rho = k / 100.0
        c = ChannelConfig(1, 2, 0.0, None, two_antenna_corr(rho) if rho else None)
        out.row([rho, outage.outage_af(x, c), outage.two_by_one_corr_approx(x, rho), p11])


def fig5(args, out):
    alpha = 1.0
    dbs = list(range(0, 41, 2))
    trials = args.trials or FIG_TRIALS
    tags = [f"{m}x{n}" for m, n in _FIG3_SHAPES]
    out.header([("figure", "fig5"), ("alpha", repr(alpha)), ("r", "0"), ("threshold", "x = 1/gamma"),
                ("trials", trials), ("seed", args.seed)])
    out.columns(["snr_db"] + [f"p_exact_{t}" for t in tags] + [f"p_approx_{t}" for t in tags] + [f"p_mc_{t}" for t in tags])
    xs = [10.0 ** (-db / 10.0) for db in dbs]
    mc = [mcsim.empirical_outage_curve(ChannelConfig(m, n, alpha), xs, trials, args.seed + i)[0]
          for i, (m, n) in enumerate(_FIG3_SHAPES)]
    for j, db in enumerate(dbs):
        x = xs[j]
        exact = [outage.outage_af(x, ChannelConfig(m, n, alpha)) for m, n in _FIG3_SHAPES]
        approx = [outage.lowout_iid(x, alpha, m, n)(x) for m, n in _FIG3_SHAPES]
        out.row([db] + exact + approx + [float(p[j]) for p in mc])


def fig6(args, out):
    eps = 0.05
    dbs = list(range(-10, 41, 2))
    shapes = ((1, 1), (2, 1))
    trials = args.trials or FIG_TRIALS
    tags = [f"{m}x{n}" for m, n in shapes]
    out.header([("figure", "fig6"), ("eps", repr(eps)), ("alpha", "0.0"), ("normalization", "C_eps / ln(1 + gamma)"),
                ("trials", trials), ("seed", args.seed)])
    out.columns(["snr_db"] + [f"c_norm_exact_{t}" for t in tags] + [f"c_norm_approx_{t}" for t in tags]
                + [f"c_norm_mc_{t}" for t in tags])
    configs = [ChannelConfig(m, n, 0.0) for m, n in shapes]
    x_exact = [capacity.invert_outage(eps, lambda x, c=c: outage.outage_af(x, c)) for c in configs]
    x_approx = [capacity.snr_loss_approx(eps, c).x_eps for c in configs]
    # the eps-quantile of the effective gain is the empirical x_eps
    x_mc = [float(np.quantile(mcsim.sample_effective_gain(c, trials, args.seed + i), eps))
            for i, c in enumerate(configs)]
    for db in dbs:
        g = 10.0 ** (db / 10.0)
        awgn = math.log1p(g)
        row = [db] + [math.log1p(g * x) / awgn for x in x_exact + x_approx + x_mc]
        out.row(row)


_FIG_FUNCS = {"fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5, "fig6": fig6}


def cmd_figure(args, out):
    _FIG_FUNCS[args.name](args, out)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _scenario_flags(p):
    g = p.add_argument_group("scenario")
    g.add_argument("--m", type=int, help="source (Tx) antennas")
    g.add_argument("--n", type=int, help="destination (Rx) antennas")
    g.add_argument("--alpha", type=float, help="relay-noise ratio")
    g.add_argument("--rho-sr", dest="rho_sr", type=complex, help="source-side correlation (exponential model)")
    g.add_argument("--rho-rd", dest="rho_rd", type=complex, help="destination-side correlation (exponential model)")
    g.add_argument("--corr-file", dest="corr_file", help="YAML or JSON scenario file")
    g.add_argument("--fading-sr", dest="fading_sr", help="rayleigh | rician:K | nakagami:m | weibull:k")
    g.add_argument("--fading-rd", dest="fading_rd")
    g.add_argument("--no-csi", dest="no_csi", action="store_true", help="no channel knowledge at the source")
    g.add_argument("--relays", type=int, help="number of identical relays (selection)")
    g.add_argument("--selection", action="store_true", help="use selection relaying even for one relay")
    g.add_argument("--direct-p", dest="direct_p", type=float, help="direct-link outage probability")
    g.add_argument("--protocol", choices=("af", "df"), default="af")


def _query_flags(p):
    p.add_argument("--x", type=float, nargs="+", help="normalized threshold(s)")
    p.add_argument("--rate-bits", dest="rate_bits", type=float, default=1.0, help="target rate, bits/s/Hz")
    p.add_argument("--snr-db", dest="snr_db", type=float, nargs="+", help="average SNR(s) in dB")
    p.add_argument("--eps", type=float, help="outage level for capacity")
    p.add_argument("--r", type=float, nargs="+", help="multiplexing gain(s)")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--partitions", type=int, default=1)
    p.add_argument("--slope", action="store_true", help="mc: fit the diversity slope over --snr-db")


def _output_flags(p):
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.add_argument("--format", choices=("csv",), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mimorelay", description="Outage, capacity and DMT of MIMO relay channels.")
    sub = parser.add_subparsers(dest="command", required=True)
    cmds = {
        "outage": (cmd_outage, "exact outage probability"),
        "capacity": (cmd_capacity, "outage capacity and SNR loss"),
        "dmt": (cmd_dmt, "finite-SNR and asymptotic diversity"),
        "mc": (cmd_mc, "Monte-Carlo outage estimate"),
        "selection": (cmd_selection, "selection relaying over identical relays"),
    }
    for name, (func, help_text) in cmds.items():
        p = sub.add_parser(name, help=help_text)
        _scenario_flags(p)
        _query_flags(p)
        _output_flags(p)
        p.set_defaults(func=func)
    p = sub.add_parser("figure", help="data series of a figure")
    p.add_argument("name", choices=FIGURES)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=1)
    _output_flags(p)
    p.set_defaults(func=cmd_figure)
    return parser


def _run_into(args, stream):
    if getattr(args, "func", None) is cmd_mc and args.trials is None:
        args.trials = FIG_TRIALS
    args.func(args, CsvWriter(stream))


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG
    try:
        if args.out:
            # build in memory so a failed run leaves no partial file
            import io

            buf = io.StringIO()
            _run_into(args, buf)
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(buf.getvalue())
        else:
            _run_into(args, sys.stdout)
    except (NumericalError, InsufficientDataError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValidationError, DomainError, DegeneracyError, NotImplementedError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except RelayError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main() -> None:
    sys.exit(run())
