"""Command-line interface.

Angles given as flags are in units of pi: ``--alpha 0.1667`` means
0.1667*pi radians.  Parameter files store radians.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DataError, InvalidParameterError, NumericalError, WlcarError
from .estimate import METHODS, FrequencyBand, fit, fit_proper
from .inference import ellipse_intervals, segment_bounds, segment_tests
from .io import (
    default_threads,
    read_params,
    read_segments,
    read_signal,
    write_keyvalue,
    write_signal,
    write_table,
)
from .model import EllipticalParams, WlParams, elliptical_to_wl, implied_relation
from .moments import expected_periodograms, moment_sequences
from .rolling import PARAM_NAMES, RollingConfig, roll, to_decibels
from .simulate import simulate_improper_car1, simulate_wlcar1

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(WlcarError):
    module = "cli"


def _add_common(p):
    p.add_argument("--no-timestamp", action="store_true", help="omit the creation time from output metadata")
    p.add_argument("--threads", type=int, default=default_threads(),
                   help="worker processes for independent fits (default: $WLCAR_THREADS or 1)")


def _add_params(p):
    g = p.add_argument_group("model parameters (angles in units of pi)")
    g.add_argument("--params", help="key=value parameter file (radians)")
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--gamma", type=float)
    g.add_argument("--phi", type=float)
    g.add_argument("--sigma2-nu", type=float)
    g.add_argument("--a", type=float)
    g.add_argument("--theta", type=float)
    g.add_argument("--rho", type=float)
    g.add_argument("--psi", type=float)
    g.add_argument("--sigma2-eps", type=float)


def _add_band(p, lo, hi):
    p.add_argument("--band-min", type=float, default=lo, help=f"lower band edge in units of pi (default {lo})")
    p.add_argument("--band-max", type=float, default=hi, help=f"upper band edge in units of pi (default {hi})")


def _add_method(p):
    p.add_argument("--method", choices=METHODS, default="whittle")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wlcar", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"wlcar {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a signal")
    _add_params(p)
    p.add_argument("--model", choices=("wlcar", "improper"), default="wlcar",
                   help="'improper': Z_t = lambda e^{i alpha} Z_{t-1} + nu_t with free noise relation")
    p.add_argument("--c-nu-abs", type=float, default=0.0, help="noise relation modulus (improper model)")
    p.add_argument("--c-nu-arg", type=float, default=0.0, help="noise relation phase in units of pi (improper model)")
    p.add_argument("-n", "--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", default="-")
    _add_common(p)

    p = sub.add_parser("fit", help="fit the model to a signal")
    p.add_argument("input")
    _add_method(p)
    _add_band(p, -1.0, 1.0)
    p.add_argument("--init", help="parameter file used as an extra starting point")
    p.add_argument("--proper", action="store_true", help="fit the proper (gamma = 0) model")
    p.add_argument("--seed", type=int, default=None, help="recorded in the metadata")
    p.add_argument("-o", "--out", default="-", help="key=value result file")
    p.add_argument("--csv", help="also write the result as a one-row CSV")
    _add_common(p)

    p = sub.add_parser("roll", help="rolling-window fits and spectrograms")
    p.add_argument("input")
    _add_method(p)
    _add_band(p, -0.25, 0.25)
    p.add_argument("--window", type=int, default=161)
    p.add_argument("--hop", type=int, default=1)
    p.add_argument("--smooth", type=int, default=11)
    p.add_argument("--no-warm-start", action="store_true")
    p.add_argument("--outdir", default=".")
    _add_common(p)

    p = sub.add_parser("test", help="impropriety likelihood-ratio tests with FDR control")
    p.add_argument("input")
    _add_method(p)
    _add_band(p, -0.25, 0.25)
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--segments", help="CSV of start,stop sample ranges")
    grp.add_argument("-m", "--m", type=int, default=11, help="number of equal non-overlapping segments")
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("-o", "--out", default="-")
    _add_common(p)

    p = sub.add_parser("moments", help="covariance/relation sequences and expected periodograms")
    _add_params(p)
    p.add_argument("--max-lag", type=int, default=20)
    p.add_argument("-n", "--n", type=int, default=256, help="length for the expected periodograms")
    p.add_argument("--outdir", default=".")
    _add_common(p)
    return parser


# -- helpers -------------------------------------------------------------------


def _params_from_args(args) -> tuple[WlParams, complex]:
    wl = (args.lam, args.alpha, args.gamma, args.phi, args.sigma2_nu)
    el = (args.a, args.theta, args.rho, args.psi, args.sigma2_eps)
    given = [args.params is not None, any(v is not None for v in wl), any(v is not None for v in el)]
    if sum(given) != 1:
        raise UsageError("give exactly one of --params, the widely linear flags or the elliptical flags")
    if args.params is not None:
        p = read_params(args.params)
    elif given[1]:
        if any(v is None for v in wl):
            raise UsageError("widely linear flags need --lambda --alpha --gamma --phi --sigma2-nu")
        p = WlParams(args.lam, args.alpha * math.pi, args.gamma, args.phi * math.pi, args.sigma2_nu)
    else:
        if any(v is None for v in el):
            raise UsageError("elliptical flags need --a --theta --rho --psi --sigma2-eps")
        p = EllipticalParams(args.a, args.theta * math.pi, args.rho, args.psi * math.pi, args.sigma2_eps)
    if isinstance(p, EllipticalParams):
        return elliptical_to_wl(p)
    return p, implied_relation(p)


def _band(args) -> FrequencyBand:
    try:
        return FrequencyBand.from_pi_units(args.band_min, args.band_max)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _meta(args, **extra):
    meta = {"command": args.command}
    meta.update(extra)
    return meta


# -- subcommands ---------------------------------------------------------------


def cmd_simulate(args):
    if args.n < 1:
        raise UsageError("--n must be positive")
    if args.model == "improper":
        if args.lam is None or args.alpha is None or args.sigma2_nu is None:
            raise UsageError("improper model needs --lambda --alpha --sigma2-nu")
        g = args.lam * cmath.exp(1j * math.pi * args.alpha)
        c_nu = args.c_nu_abs * cmath.exp(1j * math.pi * args.c_nu_arg)
        z = simulate_improper_car1(g, args.sigma2_nu, c_nu, args.n, args.seed)
        meta = _meta(args, seed=args.seed, model="improper", g_re=g.real, g_im=g.imag,
                     sigma2_nu=args.sigma2_nu, c_nu_re=c_nu.real, c_nu_im=c_nu.imag)
    else:
        p, c_nu = _params_from_args(args)
        z = simulate_wlcar1(p, c_nu, args.n, args.seed)
        meta = _meta(args, seed=args.seed, model="wlcar", **p.as_dict(), c_nu_re=c_nu.real, c_nu_im=c_nu.imag)
    text = write_signal(args.out, z, meta, not args.no_timestamp)
    if args.out == "-":
        sys.stdout.write(text)


def cmd_fit(args):
    z = read_signal(args.input)
    band = _band(args)
    if args.proper:
        res = fit_proper(z, args.method, band)
    else:
        init = None
        if args.init:
            init = read_params(args.init)
            if isinstance(init, EllipticalParams):
                init = elliptical_to_wl(init)[0]
        res = fit(z, args.method, band, init=init)
    summary = res.summary()
    if not res.proper:
        e_ci, p_ci = ellipse_intervals(res)
        summary.update(eccentricity_ci95=e_ci, orientation_ci95=p_ci)
    meta = _meta(args, seed=args.seed, band=str(band), method=args.method, input=Path(args.input).name)
    text = write_keyvalue(args.out, summary, meta, not args.no_timestamp)
    if args.out == "-":
        sys.stdout.write(text)
    if args.csv:
        write_table(args.csv, list(summary), [list(summary.values())], meta, not args.no_timestamp)


def cmd_roll(args):
    z = read_signal(args.input)
    try:
        cfg = RollingConfig(args.window, args.hop, _band(args), args.method, args.smooth,
                            not args.no_warm_start)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if z.size < cfg.window_len:
        raise DataError(f"signal length {z.size} is shorter than the window ({cfg.window_len})")
    ts = roll(z, cfg, threads=args.threads)
    meta = _meta(args, band=str(cfg.band), method=cfg.method, window=cfg.window_len, hop=cfg.hop,
                 smooth=cfg.smooth_width, warm_start=cfg.warm_start, input=Path(args.input).name)
    ts_stamp = not args.no_timestamp
    out = Path(args.outdir)
    sm = ts.smoothed()
    header = ["center", *PARAM_NAMES, "eccentricity", "orientation", "ecc_ci95", "psi_ci95",
              "loglik", "W", "converged",
              "eccentricity_smooth", "orientation_smooth", "ecc_ci95_smooth", "psi_ci95_smooth", "W_smooth"]
    rows = []
    for j in range(len(ts)):
        rows.append([int(ts.centers[j]), *ts.params[j], ts.eccentricity[j], ts.orientation[j], ts.ecc_ci[j],
                     ts.psi_ci[j], ts.loglik[j], ts.W[j], bool(ts.converged[j]),
                     sm["eccentricity"][j], sm["orientation"][j], sm["ecc_ci"][j], sm["psi_ci"][j], sm["W"][j]])
    write_table(out / "tracks.csv", header, rows, meta, ts_stamp)
    mheader = ["omega", *[f"c{int(c)}" for c in ts.centers]]
    for name, mat in (("spec_data", to_decibels(ts.spec_data)), ("spec_model", to_decibels(ts.spec_model)),
                      ("cspec_data", to_decibels(ts.cspec_data)), ("cspec_model", to_decibels(ts.cspec_model))):
        mrows = [[w, *mat[i]] for i, w in enumerate(ts.freqs)]
        write_table(out / f"{name}.csv", mheader, mrows, {**meta, "units": "dB"}, ts_stamp)


def cmd_test(args):
    z = read_signal(args.input)
    band = _band(args)
    if args.segments:
        segs = read_segments(args.segments)
        if any(b > z.size for _, b in segs):
            raise DataError("segment extends beyond the signal")
    else:
        try:
            segs = segment_bounds(z.size, args.m)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    results, dec = segment_tests(z, segs, band, args.method, args.level, args.threads)
    order = np.argsort([r.p_value for r in results], kind="stable")
    rank = np.empty(len(results), dtype=int)
    rank[order] = np.arange(1, len(results) + 1)
    rows = []
    for i, ((a, b), r) in enumerate(zip(segs, results)):
        rows.append([i, a, b, r.W, r.p_value, int(rank[i]), r.p_value < args.level,
                     args.level * rank[i] / len(results), dec.is_rejected(i)])
    meta = _meta(args, band=str(band), method=args.method, level=args.level,
                 fdr_threshold_index=dec.threshold_index, input=Path(args.input).name)
    text = write_table(args.out, ["segment", "start", "stop", "W", "p_value", "rank", "reject_unadjusted",
                                  "bh_critical", "reject_fdr"], rows, meta, not args.no_timestamp)
    if args.out == "-":
        sys.stdout.write(text)


def cmd_moments(args):
    p, c_nu = _params_from_args(args)
    if args.max_lag < 0 or args.n < 2:
        raise UsageError("need --max-lag >= 0 and --n >= 2")
    seq = moment_sequences(p, c_nu, args.max_lag)
    spec = expected_periodograms(p, c_nu, args.n)
    meta = _meta(args, **p.as_dict(), c_nu_re=c_nu.real, c_nu_im=c_nu.imag)
    out = Path(args.outdir)
    stamp = not args.no_timestamp
    write_table(out / "moments.csv", ["tau", "s_re", "s_im", "r_re", "r_im"],
                ([t, s.real, s.imag, r.real, r.imag] for t, (s, r) in enumerate(zip(seq.s, seq.r))), meta, stamp)
    order = np.argsort(spec.freqs, kind="stable")
    write_table(out / "spectra.csv", ["k", "omega", "Sbar", "Rbar_re", "Rbar_im"],
                ([int(k), spec.freqs[k], spec.Sbar[k], spec.Rbar[k].real, spec.Rbar[k].imag] for k in order),
                {**meta, "n": args.n}, stamp)


COMMANDS = {"simulate": cmd_simulate, "fit": cmd_fit, "roll": cmd_roll, "test": cmd_test, "moments": cmd_moments}


def _error_line(code, exc):
    module = getattr(exc, "module", type(exc).__module__)
    msg = json.dumps(str(exc))
    return f"error: code={code} module={module} type={type(exc).__name__} message={msg}"


def run(argv=None) -> int:
    """Parse ``argv``, execute the subcommand and return the exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be positive")
    try:
        COMMANDS[args.command](args)
    except (UsageError, InvalidParameterError) as exc:
        code = EXIT_USAGE
        if isinstance(exc, InvalidParameterError) and args.command in ("fit", "roll", "test"):
            code = EXIT_NUMERIC
        print(_error_line(code, exc), file=sys.stderr)
        return code
    except DataError as exc:
        print(_error_line(EXIT_DATA, exc), file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, WlcarError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(_error_line(EXIT_NUMERIC, exc), file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:  # invalid option values caught by the library
        print(_error_line(EXIT_USAGE, exc), file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def main(argv=None):
    try:
        code = run(argv)
    except SystemExit as exc:  # argparse usage errors
        code = exc.code if isinstance(exc.code, int) else EXIT_USAGE
    sys.exit(code)


if __name__ == "__main__":
    main()
