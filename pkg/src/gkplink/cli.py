"""Command-line front end.

Subcommands: ``rate-curve``, ``asymptote``, ``csum-fidelity``, ``swap-mc``.
Exit status: 0 ok, 1 usage error, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .cavity import CavityParams, load_pulse, pulse_length_threshold
from .channel import AmpMode
from .csum import Gate, amplitude_schedule, csum_fidelity, schedule_pulses, simulate_csum
from .gkp import GkpCode, Lattice, SqueezedGkp, shift_distribution, squeezing_db_to_variance
from .montecarlo import SwapTrialConfig, run_swap_trials, z_scores
from .rates import (
    Combine,
    OptimizationError,
    asymptotic_rate,
    capacity,
    dimension_for_xi,
    effective_variance,
    link_rate,
    nearest_power_of_two,
    optimize_xi,
    rate_at_dimension,
)

log = logging.getLogger("gkplink")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

RATE_COLUMNS = (
    "lattice", "amp", "combine", "squeezing_db", "N", "d", "half_loss_db",
    "sigma2_eff", "rate", "capacity_q2", "capacity_c",
)
ASYMPTOTE_COLUMNS = (
    "lattice", "xi_opt", "gap", "eps", "dimension", "i_lb", "q2", "separation", "d_pow2", "rate_pow2",
)
CSUM_COLUMNS = (
    "lattice", "gate", "N", "d", "C", "zeta", "bs_zeta", "tau", "pulse_ok",
    "coherence_min", "coherence_mean", "max_disp_error", "sigma2", "fidelity",
)
SWAP_COLUMNS = (
    "lattice", "N", "d", "combine", "sigma2_eff", "trials", "seed", "axis", "k",
    "count", "empirical", "analytic", "z",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --- flag value parsing ---------------------------------------------------


def _float(tok: str) -> float:
    tok = tok.strip().lower()
    if tok in ("inf", "+inf", "infinity"):
        return math.inf
    return float(tok)


def float_list(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:step`` (stop inclusive)."""
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
                raise ValueError
            start, stop, step = parts
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 12) for i in range(n)]
        return [_float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number list {text!r}") from None


def int_list(text: str) -> list[int]:
    """``1,2,3`` or ``1:10`` (inclusive)."""
    try:
        if ":" in text:
            lo, hi = (int(p) for p in text.split(":"))
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer list {text!r}") from None


def _enum_list(enum_cls):
    def parse(text: str):
        try:
            return [enum_cls.parse(p) for p in text.split(",") if p.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    parse.__name__ = enum_cls.__name__.lower()
    return parse


def _combine(text: str) -> Combine:
    try:
        return Combine.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# --- output ---------------------------------------------------------------


def _cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return format(value, ".10g")
    if hasattr(value, "value"):
        return value.value
    return value


def render(rows: list[dict], columns, fmt: str) -> str:
    buf = io.StringIO()
    if fmt == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r[c]) for c in columns])
    else:
        for r in rows:
            rec = {}
            for c in columns:
                v = _cell(r[c])
                if isinstance(v, str) and c not in ("lattice", "amp", "combine", "gate", "axis"):
                    # numeric columns: keep finite numbers numeric in JSON
                    try:
                        fv = float(v)
                        v = fv if not math.isfinite(fv) else json.loads(v)
                    except ValueError:
                        pass
                    if isinstance(v, float) and not math.isfinite(v):
                        v = _cell(v)
                rec[c] = v
            buf.write(json.dumps(rec) + "\n")
    return buf.getvalue()


def emit(rows, columns, args) -> None:
    text = render(rows, columns, args.format)
    if args.out in (None, "-"):
        sys.stdout.write(text)
        return
    Path(args.out).write_text(text)


def _maybe_plot(args, plot_fn, rows):
    if not getattr(args, "plot", None):
        return
    from . import plotting

    path = getattr(plotting, plot_fn)(rows, args.plot)
    log.info("wrote figure %s", path)


def _map(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def _sort_key_inf(x):
    # infinite squeezing sorts first
    return -math.inf if math.isinf(x) else x


# --- subcommands ----------------------------------------------------------


def cmd_rate_curve(args) -> list[dict]:
    grid = [
        (lat, amp, sq, n, loss)
        for lat in args.lattice
        for amp in args.amp
        for sq in args.squeeze_db
        for n in args.n
        for loss in args.loss_db
    ]
    for _, _, sq, n, loss in grid:
        if n < 1 or loss < 0 or not sq >= 0:
            raise UsageError("N must be >= 1, losses and squeezing >= 0")

    def point(key):
        lat, amp, sq, n, loss = key
        p = link_rate(n, lat, loss, sq, amp, args.combine)
        return {
            "lattice": p.lattice.value,
            "amp": p.amp_mode.value,
            "combine": p.combine.value,
            "squeezing_db": p.squeezing_db,
            "N": p.N,
            "d": p.d,
            "half_loss_db": p.half_loss_db,
            "sigma2_eff": p.sigma2_eff,
            "rate": p.rate,
            "capacity_q2": p.capacity,
            "capacity_c": p.capacity_full,
        }

    rows = _map(point, grid, args.threads)
    rows.sort(key=lambda r: (r["lattice"], r["amp"], _sort_key_inf(r["squeezing_db"]), r["N"], r["half_loss_db"]))
    emit(rows, RATE_COLUMNS, args)
    _maybe_plot(args, "plot_rate_curve", rows)
    return rows


def cmd_asymptote(args) -> list[dict]:
    lo, hi, count = args.eps_range
    eps_grid = np.logspace(math.log10(lo), math.log10(hi), int(count))
    rows = []
    for lat in args.lattice:
        res = optimize_xi(lat)
        for eps in eps_grid:
            eps = float(eps)
            q2 = -math.log2(eps)
            d_real = dimension_for_xi(res.xi_opt, eps, lat)
            d_pow2 = nearest_power_of_two(d_real)
            i_lb = asymptotic_rate(res.xi_opt, eps, lat)
            rows.append({
                "lattice": res.lattice.value,
                "xi_opt": res.xi_opt,
                "gap": res.gap,
                "eps": eps,
                "dimension": d_real,
                "i_lb": i_lb,
                "q2": q2,
                "separation": q2 - i_lb,
                "d_pow2": d_pow2,
                "rate_pow2": rate_at_dimension(d_pow2, lat, eps),
            })
        log.info("%s: xi_opt=%.4f gap=%.4f ebits", res.lattice.value, res.xi_opt, res.gap)
    rows.sort(key=lambda r: (r["lattice"], r["eps"]))
    emit(rows, ASYMPTOTE_COLUMNS, args)
    _maybe_plot(args, "plot_asymptote", rows)
    return rows


def cmd_csum_fidelity(args) -> list[dict]:
    sigma2 = squeezing_db_to_variance(args.squeeze_db)
    grid = [(lat, n, c, z) for lat in args.lattice for n in args.n for c in args.C for z in args.zeta]

    def point(key):
        lat, n, c, zeta = key
        code = GkpCode(lat, n)
        try:
            cav = CavityParams(c, zeta, args.kappa, args.gamma, args.delta_c, args.delta_a)
            sched = amplitude_schedule(code, args.gate, args.bs_zeta)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        threshold = pulse_length_threshold(code.d, args.kappa, args.bs_zeta, args.margin)
        tau = args.tau if args.tau else threshold
        if args.pulse_file:
            base = load_pulse(args.pulse_file, tau)
            pulses = [base.with_alpha(a) for a in sched.alphas]
        else:
            pulses = schedule_pulses(sched, tau, args.pulse, n=args.samples)
        state = simulate_csum(sched, cav, pulses, args.variant, args.bs_noise)
        off = ~np.eye(code.d, dtype=bool)
        coh = np.abs(state.g[off]) if code.d > 1 else np.ones(1)
        return {
            "lattice": code.lattice.value,
            "gate": sched.gate.value,
            "N": n,
            "d": code.d,
            "C": float(c),
            "zeta": float(zeta),
            "bs_zeta": args.bs_zeta,
            "tau": tau,
            "pulse_ok": bool(tau >= threshold),
            "coherence_min": float(coh.min()),
            "coherence_mean": float(coh.mean()),
            "max_disp_error": float(np.max(np.abs(state.displacement_error))),
            "sigma2": sigma2,
            "fidelity": csum_fidelity(state, sigma2),
        }

    rows = _map(point, grid, args.threads)
    rows.sort(key=lambda r: (r["lattice"], r["N"], r["zeta"], r["C"]))
    emit(rows, CSUM_COLUMNS, args)
    _maybe_plot(args, "plot_csum", rows)
    return rows


def cmd_swap_mc(args) -> tuple[list[dict], bool]:
    if args.sigma2 is not None:
        effs = args.sigma2
        if any(not s >= 0 for s in effs):
            raise UsageError("sigma2 values must be >= 0")
    else:
        effs = [
            effective_variance(loss, sq, amp, args.combine)[1]
            for sq in args.squeeze_db
            for loss in args.loss_db
            for amp in args.amp
        ]
    effs = sorted(set(effs))
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    rows = []
    dumps = []
    for lat in args.lattice:
        for n in args.n:
            code = GkpCode(lat, n)
            for eff in effs:
                arm = eff if args.combine is Combine.SINGLE else eff / 2
                cfg = SwapTrialConfig(code, arm, args.trials, args.seed, args.combine)
                res = run_swap_trials(cfg, keep_outcomes=bool(args.dump), threads=args.threads)
                if args.dump:
                    dumps.append((code, eff, res.outcomes))
                probs = shift_distribution(SqueezedGkp(code, eff)).probs
                for axis in ("x", "y"):
                    counts = res.marginal(axis)
                    zs = z_scores(counts, probs)
                    for k, cnt, p, z in zip(res.ks, counts, probs, zs):
                        if p < 1e-12 and cnt == 0:
                            continue
                        rows.append({
                            "lattice": code.lattice.value,
                            "N": n,
                            "d": code.d,
                            "combine": args.combine.value,
                            "sigma2_eff": eff,
                            "trials": args.trials,
                            "seed": args.seed,
                            "axis": axis,
                            "k": int(k),
                            "count": int(cnt),
                            "empirical": cnt / args.trials,
                            "analytic": float(p),
                            "z": float(z),
                        })
    emit(rows, SWAP_COLUMNS, args)
    if args.dump:
        _write_dump(args.dump, dumps)
    _maybe_plot(args, "plot_swap_mc", rows)
    ok = all(abs(r["z"]) <= args.z_max for r in rows)
    return rows, ok


def _write_dump(path, dumps) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("lattice", "d", "sigma2_eff", "x", "y", "x_L", "y_L", "x_f", "y_f", "k_label", "l_label", "shift_x", "shift_y"))
        for code, eff, out in dumps:
            for i in range(len(out)):
                o = out.row(i)
                w.writerow((
                    code.lattice.value, code.d, _cell(eff), _cell(o.x), _cell(o.y), o.x_L, o.y_L,
                    _cell(o.x_f), _cell(o.y_f), o.heralded[0], o.heralded[1], o.true_shift[0], o.true_shift[1],
                ))


# --- parser ---------------------------------------------------------------


def _common(p: argparse.ArgumentParser, lattice_default="sq") -> None:
    p.add_argument("--config", help="TOML file of flag values; flags given on the command line win")
    p.add_argument("--lattice", type=_enum_list(Lattice), default=lattice_default, help="sq, hex or sq,hex")
    p.add_argument("--out", default="-", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--plot", metavar="PATH", help="also render a figure to PATH (png, pdf, svg)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gkplink", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("rate-curve", help="hashing rate versus half-channel loss")
    _common(p)
    p.add_argument("--n", type=int_list, default="1:10")
    p.add_argument("--loss-db", type=float_list, default="0:3:0.1", help="half-channel loss grid in dB")
    p.add_argument("--squeeze-db", type=float_list, default="inf,10,5")
    p.add_argument("--amp", type=_enum_list(AmpMode), default="pre")
    p.add_argument("--combine", type=_combine, default="sum")
    p.set_defaults(func=cmd_rate_curve, columns=RATE_COLUMNS)

    p = sub.add_parser("asymptote", help="low-loss asymptote and optimal xi")
    _common(p, lattice_default="sq,hex")
    p.add_argument("--eps-range", type=float_list, default="1e-6,1e-3,31", help="lo,hi,count (log-spaced)")
    p.set_defaults(func=cmd_asymptote, columns=ASYMPTOTE_COLUMNS)

    p = sub.add_parser("csum-fidelity", help="imperfect CSUM gate over a cavity parameter grid")
    _common(p)
    p.add_argument("--n", type=int_list, default="1:3")
    p.add_argument("--C", type=float_list, default="1,10,100,1000")
    p.add_argument("--zeta", type=float_list, default="0.9,0.95,0.99")
    p.add_argument("--bs-zeta", type=float, default=0.9, help="displacement beamsplitter reflectivity")
    p.add_argument("--kappa", type=float, default=1e9, help="cavity linewidth [rad/s]")
    p.add_argument("--gamma", type=float, default=1e8, help="atomic decay rate [rad/s]")
    p.add_argument("--delta-c", type=float, default=0.0, help="cavity detuning [rad/s]")
    p.add_argument("--delta-a", type=float, default=0.0, help="atomic detuning [rad/s]")
    p.add_argument("--tau", type=float, default=None, help="pulse duration [s] (default: the pulse-length threshold)")
    p.add_argument("--margin", type=float, default=10.0)
    p.add_argument("--pulse", choices=("gaussian", "flat"), default="gaussian")
    p.add_argument("--pulse-file", default=None, help="tabulated spectral shape: omega re im")
    p.add_argument("--samples", type=int, default=2048)
    p.add_argument("--squeeze-db", type=_float, default=10.0)
    p.add_argument("--gate", type=Gate.parse, default="csum")
    p.add_argument("--variant", choices=("real", "literal"), default="real")
    p.add_argument("--bs-noise", action="store_true")
    p.set_defaults(func=cmd_csum_fidelity, columns=CSUM_COLUMNS)

    p = sub.add_parser("swap-mc", help="Monte Carlo check of the shift-error model")
    _common(p)
    p.add_argument("--n", type=int_list, default="2")
    p.add_argument("--sigma2", type=float_list, default=None, help="effective swap variance(s); overrides loss/squeezing")
    p.add_argument("--loss-db", type=float_list, default="0.5")
    p.add_argument("--squeeze-db", type=float_list, default="10")
    p.add_argument("--amp", type=_enum_list(AmpMode), default="pre")
    p.add_argument("--combine", type=_combine, default="sum")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--z-max", type=float, default=5.0)
    p.add_argument("--dump", default=None, help="write raw outcomes to this CSV")
    p.set_defaults(func=cmd_swap_mc, columns=SWAP_COLUMNS)
    return parser


def _config_defaults(path) -> dict[str, str]:
    import tomli

    with open(path, "rb") as fh:
        data = tomli.load(fh)
    out = {}
    for key, value in data.items():
        if isinstance(value, list):
            value = ",".join(_cell(v) if isinstance(v, float) else str(v) for v in value)
        elif isinstance(value, bool):
            value = value
        elif isinstance(value, float):
            value = _cell(value)
        else:
            value = str(value)
        out[key.replace("-", "_")] = value
    return out


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            defaults = _config_defaults(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        except Exception as exc:  # tomli.TOMLDecodeError
            raise UsageError(f"invalid config {args.config}: {exc}") from None
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(defaults) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"gkplink: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        result = args.func(args)
    except UsageError as exc:
        print(f"gkplink: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OptimizationError as exc:
        print(f"gkplink: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"gkplink: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"gkplink: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "swap-mc" and not result[1]:
        print(f"gkplink: Monte Carlo disagrees with the analytic model (|z| > {args.z_max})", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
