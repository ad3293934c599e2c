"""Command-line interface: reproducible CSV-emitting experiments.

Subcommands: exponents (trade-off table on a lambda grid), tradeoff (dense
curves per gamma), simulate (one Monte Carlo run), sweep (grid of runs),
lattice-info (lattice facts or a codebook dump).

Every run writes its full resolved parameter set as '# key=value' comment
lines above the CSV header, uses '.' as the radix with fixed formats, and
contains no timestamps, so identical invocations produce identical bytes.
All numeric output is in nats unless --bits is given, which converts the
rate and exponent columns by 1/ln 2.  Exit codes: 0 success, 2 usage
error, 3 infeasible configuration.
"""

from __future__ import annotations

import argparse
import io
import math
import sys

import numpy as np

from .exponents import TradeoffParams, curve_point
from .lattices import (
    EnumerationCapError,
    build_codebook,
    codebook_to_csv,
    make_lattice,
    nvnr,
)
from .sim import (
    SWEEP_COLUMNS,
    SimConfig,
    make_scheme,
    result_row,
    run_importance_sampled,
    run_plain_mc,
    sweep_exponents,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3

_LN2 = math.log(2.0)

# Columns measured in nats; divided by ln 2 under --bits.
_NAT_COLUMNS = {
    "lambda",
    "rate_converse",
    "rate_achievable",
    "E_U",
    "E_L",
    "gap",
    "emp_outage_exp",
    "emp_cost_exp",
}
_INT_COLUMNS = {"n", "tight", "index", "dimension"}
_SCI_COLUMNS = {"p_out", "stderr", "worst_cost"}


class _Infeasible(RuntimeError):
    pass


def _float_list(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _float_range(text: str) -> np.ndarray:
    """'lo:hi:count' -> linspace(lo, hi, count)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"range must be lo:hi:count, got {text!r}")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise ValueError(f"range count must be >= 1, got {count}")
    return np.linspace(lo, hi, count)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text!r}")
    return value


def _parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.rstrip()!r}")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


_BOOL_WORDS = {"1": True, "true": True, "yes": True, "0": False, "false": False, "no": False}


def _resolve(args: argparse.Namespace, config: dict[str, str], key: str, conv, default):
    """Explicit flag > config file entry > built-in default."""
    explicit = getattr(args, key, None)
    if explicit is not None:
        return explicit
    if key in config:
        raw = config[key]
        if conv is bool:
            word = raw.lower()
            if word not in _BOOL_WORDS:
                raise ValueError(f"config {key}={raw!r} is not a boolean")
            return _BOOL_WORDS[word]
        return conv(raw)
    return default


def _fmt(column: str, value) -> str:
    if column in _INT_COLUMNS:
        return str(int(value))
    if isinstance(value, str):
        return value
    if column in _SCI_COLUMNS:
        return format(float(value), ".6e")
    return format(float(value), ".9f")


def _emit(out_path: str | None, command: str, params: dict, columns, rows, bits: bool) -> None:
    buf = io.StringIO()
    buf.write(f"# command={command}\n")
    for key in sorted(params):
        buf.write(f"# {key}={params[key]}\n")
    buf.write(f"# units={'bits' if bits else 'nats'}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        cells = []
        for col in columns:
            value = row[col]
            if bits and col in _NAT_COLUMNS and isinstance(value, (int, float)):
                value = value / _LN2
            cells.append(_fmt(col, value))
        buf.write(",".join(cells) + "\n")
    text = buf.getvalue()
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output CSV file (default: stdout)")
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--bits", action=argparse.BooleanOptionalAction,
                   help="report rate/exponent columns in bits instead of nats")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weaknoise",
        description="Outage-exponent vs weak-noise-cost trade-off curves and "
                    "lattice-code AWGN simulations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exponents", help="trade-off table on a lambda grid")
    p.add_argument("--lambda", dest="lam", help="comma-separated outage exponents (nats)")
    p.add_argument("--lambda-range", dest="lam_range", help="lo:hi:count grid alternative")
    p.add_argument("--gamma", type=float, help="SNR P/sigma^2")
    p.add_argument("--alpha", type=float, help="error cost power (default 2)")
    _add_common(p)
    p.set_defaults(func=_cmd_exponents)

    p = sub.add_parser("tradeoff", help="dense E_U/E_L curves per gamma")
    p.add_argument("--gamma", help="comma-separated SNR values")
    p.add_argument("--lambda-range", dest="lam_range", help="lo:hi:count lambda grid")
    p.add_argument("--alpha", type=float, help="error cost power (default 2)")
    _add_common(p)
    p.set_defaults(func=_cmd_tradeoff)

    p = sub.add_parser("simulate", help="one Monte Carlo run of the scheme")
    p.add_argument("--lattice", choices=("z", "d", "e8"), help="base lattice (default z)")
    p.add_argument("--n", type=_positive_int, help="block length")
    p.add_argument("--P", type=float, help="power limit per channel use (default 1)")
    p.add_argument("--sigma", type=float, help="noise standard deviation")
    p.add_argument("--lambda", dest="lam", type=float, help="outage exponent (nats)")
    p.add_argument("--alpha", type=float, help="error cost power (default 2)")
    p.add_argument("--M", type=_positive_int, help="quantizer bins (give --M or --rate)")
    p.add_argument("--rate", type=float, help="coding rate in nats; M = ceil(e^(n*rate))")
    p.add_argument("--trials", type=_positive_int, help="Monte Carlo trials per grid point")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--tilt", type=float,
                   help="IS noise-variance factor >= 1; omit for plain Monte Carlo")
    p.add_argument("--outage", choices=("decode", "sphere"), help="outage kind (default decode)")
    p.add_argument("--theta", type=float, help="sphere outage radius parameter (default w(lambda))")
    p.add_argument("--pairing", action=argparse.BooleanOptionalAction,
                   help="map consecutive bin pairs to one codeword")
    p.add_argument("--full-lattice", dest="full_lattice", action=argparse.BooleanOptionalAction,
                   help="decode-error outage over the infinite lattice (oracle mode)")
    p.add_argument("--u-grid", dest="u_grid", type=_positive_int, help="uniform u-grid size (default 33)")
    p.add_argument("--edge-points", dest="edge_points", action=argparse.BooleanOptionalAction,
                   help="augment the u-grid with bin-edge-adjacent points (default on)")
    p.add_argument("--fast-decode", dest="fast_decode", action=argparse.BooleanOptionalAction,
                   help="lattice fast path for codebook decoding")
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="grid sweep over (n, lambda, gamma)")
    p.add_argument("--n-list", dest="n_list", help="comma-separated block lengths")
    p.add_argument("--lambda-list", dest="lambda_list", help="comma-separated outage exponents")
    p.add_argument("--gamma-list", dest="gamma_list", help="comma-separated SNR values")
    p.add_argument("--lattice", choices=("z", "d", "e8"), help="base lattice (default z)")
    p.add_argument("--P", type=float, help="power limit (default 1)")
    p.add_argument("--alpha", type=float, help="error cost power (default 2)")
    p.add_argument("--trials", type=_positive_int, help="trials per grid point")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--tilt", type=float, help="IS tilt; default 1 + w(lambda) per point")
    p.add_argument("--outage", choices=("decode", "sphere"), help="outage kind (default decode)")
    p.add_argument("--u-grid", dest="u_grid", type=_positive_int, help="uniform u-grid size (default 9)")
    p.add_argument("--exact-sphere", dest="exact_sphere", action=argparse.BooleanOptionalAction,
                   help="closed-form sphere-outage rows, no Monte Carlo")
    _add_common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("lattice-info", help="lattice facts, or a codebook CSV with --M")
    p.add_argument("--lattice", choices=("z", "d", "e8"), help="base lattice (default z)")
    p.add_argument("--n", type=_positive_int, help="dimension")
    p.add_argument("--P", type=float, help="power limit for the codebook (default 1)")
    p.add_argument("--M", type=_positive_int, help="codebook size; emits index,coordinates CSV")
    _add_common(p)
    p.set_defaults(func=_cmd_lattice_info)

    return parser


def _cmd_exponents(args: argparse.Namespace) -> int:
    config = _parse_config_file(args.config) if args.config else {}
    gamma = _resolve(args, config, "gamma", float, 100.0)
    alpha = _resolve(args, config, "alpha", float, 2.0)
    bits = bool(_resolve(args, config, "bits", bool, False))
    lam_range = _resolve(args, config, "lam_range", str, None)
    lam_text = _resolve(args, config, "lam", str, None)
    if lam_range is not None:
        lams = list(_float_range(lam_range))
    elif lam_text is not None:
        lams = _float_list(lam_text)
    else:
        lams = list(np.linspace(0.01, 1.0, 100))
    columns = ("lambda", "w", "rate_converse", "rate_achievable", "E_U", "E_L", "gap", "tight")
    rows = []
    for lam in lams:
        cp = curve_point(TradeoffParams(lam, gamma, alpha))
        rows.append(
            {
                "lambda": cp.lam,
                "w": cp.w,
                "rate_converse": cp.rate_converse,
                "rate_achievable": cp.rate_achievable,
                "E_U": cp.e_upper,
                "E_L": cp.e_lower,
                "gap": cp.gap,
                "tight": int(cp.tight),
            }
        )
    params = {"lambda": ",".join(format(v, ".9g") for v in lams), "gamma": gamma, "alpha": alpha}
    _emit(args.out, "exponents", params, columns, rows, bits)
    return EXIT_OK


def _cmd_tradeoff(args: argparse.Namespace) -> int:
    config = _parse_config_file(args.config) if args.config else {}
    gamma_text = _resolve(args, config, "gamma", str, "100,10000")
    gammas = _float_list(gamma_text)
    alpha = _resolve(args, config, "alpha", float, 2.0)
    bits = bool(_resolve(args, config, "bits", bool, False))
    lam_range = _resolve(args, config, "lam_range", str, "0.01:1.0:100")
    lams = _float_range(lam_range)
    columns = ("gamma", "lambda", "E_U", "E_L", "gap")
    rows = []
    for gamma in gammas:
        for lam in lams:
            cp = curve_point(TradeoffParams(float(lam), gamma, alpha))
            rows.append(
                {
                    "gamma": gamma,
                    "lambda": cp.lam,
                    "E_U": cp.e_upper,
                    "E_L": cp.e_lower,
                    "gap": cp.gap,
                }
            )
    params = {"gamma": gamma_text, "lambda_range": lam_range, "alpha": alpha}
    _emit(args.out, "tradeoff", params, columns, rows, bits)
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = _parse_config_file(args.config) if args.config else {}
    lattice = _resolve(args, config, "lattice", str, "z")
    n = _resolve(args, config, "n", int, 8)
    P = _resolve(args, config, "P", float, 1.0)
    sigma = _resolve(args, config, "sigma", float, 0.1)
    lam = _resolve(args, config, "lam", float, 0.1)
    alpha = _resolve(args, config, "alpha", float, 2.0)
    M = _resolve(args, config, "M", int, None)
    rate = _resolve(args, config, "rate", float, None)
    trials = _resolve(args, config, "trials", int, 10_000)
    seed = _resolve(args, config, "seed", int, 0)
    tilt = _resolve(args, config, "tilt", float, None)
    outage = _resolve(args, config, "outage", str, "decode")
    theta = _resolve(args, config, "theta", float, None)
    pairing = bool(_resolve(args, config, "pairing", bool, False))
    full_lattice = bool(_resolve(args, config, "full_lattice", bool, False))
    u_grid = _resolve(args, config, "u_grid", int, 33)
    edge_points = bool(_resolve(args, config, "edge_points", bool, True))
    fast_decode = bool(_resolve(args, config, "fast_decode", bool, False))
    bits = bool(_resolve(args, config, "bits", bool, False))
    if (M is None) == (rate is None):
        raise ValueError("give exactly one of --M or --rate")

    cfg = SimConfig(
        n=n, P=P, sigma=sigma, lam=lam, alpha=alpha, trials=trials, seed=seed,
        outage=outage, sphere_theta=theta, full_lattice=full_lattice, tilt=tilt,
        u_grid=u_grid, edge_points=edge_points, fast_decode=fast_decode,
    )
    try:
        s = make_scheme(cfg, lattice, M=M, rate=rate, pairing=pairing)
    except (EnumerationCapError, ValueError) as exc:
        raise _Infeasible(str(exc)) from exc
    res = run_importance_sampled(cfg, s) if tilt is not None else run_plain_mc(cfg, s)
    row = result_row(cfg, res)
    params = {
        "lattice": lattice, "n": n, "P": P, "sigma": sigma, "lambda": lam,
        "alpha": alpha, "M": s.M, "trials": trials, "seed": seed,
        "tilt": "none" if tilt is None else tilt, "outage": outage,
        "pairing": int(pairing), "full_lattice": int(full_lattice),
        "u_grid": u_grid, "edge_points": int(edge_points),
    }
    _emit(args.out, "simulate", params, SWEEP_COLUMNS, [row], bits)
    print(
        f"p_out={res.p_out:.6e} stderr={res.stderr:.6e} "
        f"ess={res.trials_effective:.1f} worst_cost={res.worst_cost:.6e} "
        f"u*={res.u_worst_outage:.6f}"
        + (f" notes: {'; '.join(res.notes)}" if res.notes else ""),
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _parse_config_file(args.config) if args.config else {}
    n_list = [int(v) for v in _float_list(_resolve(args, config, "n_list", str, "8"))]
    lambda_list = _float_list(_resolve(args, config, "lambda_list", str, "0.05,0.1"))
    gamma_list = _float_list(_resolve(args, config, "gamma_list", str, "100"))
    lattice = _resolve(args, config, "lattice", str, "z")
    P = _resolve(args, config, "P", float, 1.0)
    alpha = _resolve(args, config, "alpha", float, 2.0)
    trials = _resolve(args, config, "trials", int, 10_000)
    seed = _resolve(args, config, "seed", int, 0)
    tilt = _resolve(args, config, "tilt", float, None)
    outage = _resolve(args, config, "outage", str, "decode")
    u_grid = _resolve(args, config, "u_grid", int, 9)
    exact_sphere = bool(_resolve(args, config, "exact_sphere", bool, False))
    bits = bool(_resolve(args, config, "bits", bool, False))
    cfg = SimConfig(
        n=max(n_list) if n_list else 1, P=P, sigma=1.0, lam=0.1, alpha=alpha,
        trials=trials, seed=seed, outage=outage, tilt=tilt, u_grid=u_grid,
    )
    try:
        rows = sweep_exponents(cfg, n_list, lambda_list, gamma_list,
                               lattice_kind=lattice, exact_sphere=exact_sphere)
    except (EnumerationCapError, ValueError) as exc:
        raise _Infeasible(str(exc)) from exc
    params = {
        "n_list": ",".join(str(v) for v in n_list),
        "lambda_list": ",".join(format(v, ".9g") for v in lambda_list),
        "gamma_list": ",".join(format(v, ".9g") for v in gamma_list),
        "lattice": lattice, "P": P, "alpha": alpha, "trials": trials,
        "seed": seed, "tilt": "auto" if tilt is None else tilt,
        "outage": outage, "exact_sphere": int(exact_sphere), "u_grid": u_grid,
    }
    _emit(args.out, "sweep", params, SWEEP_COLUMNS, rows, bits)
    for row in rows:
        if row.get("note"):
            print(f"n={row['n']} lambda={row['lambda']} gamma={row['gamma']}: {row['note']}",
                  file=sys.stderr)
    return EXIT_OK


def _cmd_lattice_info(args: argparse.Namespace) -> int:
    config = _parse_config_file(args.config) if args.config else {}
    kind = _resolve(args, config, "lattice", str, "z")
    n = _resolve(args, config, "n", int, None)
    P = _resolve(args, config, "P", float, 1.0)
    M = _resolve(args, config, "M", int, None)
    lat = make_lattice(kind, n)
    if M is not None:
        try:
            cb = build_codebook(lat, lat.dimension, P, M)
        except (EnumerationCapError, ValueError) as exc:
            raise _Infeasible(str(exc)) from exc
        buf = io.StringIO()
        buf.write(f"# command=lattice-info\n# M={M}\n# P={P}\n")
        buf.write(f"# lattice={kind}\n# n={lat.dimension}\n# scale={cb.scale:.12g}\n")
        codebook_to_csv(cb, buf)
        text = buf.getvalue()
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as f:
                f.write(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    columns = ("name", "dimension", "voronoi_volume", "nvnr_unit")
    rows = [
        {
            "name": lat.name,
            "dimension": lat.dimension,
            "voronoi_volume": lat.voronoi_volume,
            "nvnr_unit": nvnr(lat, 1.0, 1.0),
        }
    ]
    _emit(args.out, "lattice-info", {"lattice": kind, "n": lat.dimension}, columns, rows, False)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Infeasible as exc:
        print(f"error: infeasible configuration: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except EnumerationCapError as exc:
        print(f"error: infeasible configuration: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
