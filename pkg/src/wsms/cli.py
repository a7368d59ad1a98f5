"""Command-line front end.

Subcommands map onto the library::

    wsms channel    --config PATH [--k K --ds M]      channel statistics
    wsms beamform   --config PATH [--validate]        closed-form beamformer report
    wsms configure  --config PATH [--method M]        array configuration
    wsms pipeline   --config PATH [--oracle]          configuration + beamforming
    wsms power      [--config PATH] [--n N --l L]     hardware power table
    wsms sweep      --config PATH --axis rho=-10:20:5 --arch wsms,planar-baseline --out results.csv

Exit codes: 0 ok, 1 usage, 2 config, 3 numerical failure or failed validation.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Optional, Sequence

import numpy as np

from .arrayconfig import dlr_select, exhaustive_search, full_pipeline, weighted_dlr
from .beamforming import DegenerateChannelError, closed_form_wsms, evaluate_se, validate_constraints
from .channel import assemble_wsms_channel
from .config import ConfigError, ScenarioConfig, load_config
from .geometry import GeometryError, aperture_and_rayleigh, build_layout
from .numerics import capacity, numerical_rank
from .power import ARCHITECTURES, power_consumption
from .sweep import SweepError, parse_architectures, run_sweep

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _scenario(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    changes = {}
    if getattr(args, "k", None) is not None:
        changes["k"] = args.k
    if getattr(args, "rho", None) is not None:
        changes["transmit_power_dbm"] = (args.rho,)
    return cfg.replace(**changes) if changes else cfg


def _layouts(cfg: ScenarioConfig, d_s: Optional[float]):
    """Layouts at the configured or DLR-chosen ``(k, d_s)``."""
    if cfg.k is not None and d_s is not None:
        k = cfg.k
    else:
        sol = dlr_select(cfg)
        k, d_s = sol.k, d_s if d_s is not None else sol.d_s
    lam = cfg.wavelength
    return build_layout(cfg.n_tx, k, d_s, lam, 0.0), build_layout(cfg.n_rx, k, d_s, lam, cfg.distance)


def _emit(args, payload: dict, lines: Sequence[str]) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)


def cmd_channel(args) -> int:
    cfg = _scenario(args)
    tx, rx = _layouts(cfg, args.ds)
    paths = cfg.paths()
    ch = assemble_wsms_channel(paths, tx, rx, cfg.wavelength)
    s = np.linalg.svd(ch.entries, compute_uv=False)
    c_full = capacity(ch, cfg.transmit_power, cfg.noise_power)
    c_los = capacity(ch.los, cfg.transmit_power, cfg.noise_power) if ch.split else float("nan")
    ap, rayleigh = aperture_and_rayleigh(tx, cfg.wavelength)
    top = s[: min(len(s), tx.k * len(paths) + 2)]
    payload = dict(
        shape=list(ch.shape),
        k=tx.k,
        d_s=tx.d_s,
        paths=[dict(kind=p.kind.value, gain=float(p.gain), length=p.length) for p in paths],
        rank=numerical_rank(ch.entries),
        singular_values=top.tolist(),
        frobenius=float(np.linalg.norm(ch.entries)),
        capacity=c_full,
        los_capacity=c_los,
        aperture=ap,
        rayleigh_distance=rayleigh,
    )
    lines = [
        f"H: {ch.shape[0]}x{ch.shape[1]}  k={tx.k}  d_s={tx.d_s:.6g} m  paths={len(paths)}",
        f"numerical rank: {payload['rank']}",
        "leading singular values: " + " ".join(f"{v:.4e}" for v in top),
        f"capacity: {c_full:.6g} bits/s/Hz  (LoS only: {c_los:.6g})",
        f"aperture: {ap:.4g} m  Rayleigh distance: {rayleigh:.4g} m",
    ]
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_beamform(args) -> int:
    cfg = _scenario(args)
    tx, rx = _layouts(cfg, args.ds)
    paths = cfg.paths()
    bf = closed_form_wsms(paths, tx, rx, cfg.transmit_power, cfg.noise_power, cfg.wavelength)
    if args.pd_scale != 1.0:
        bf = type(bf)(bf.P_A, bf.P_D * args.pd_scale, bf.C_A, bf.C_D, bf.k, bf.l_t, bf.l_r, bf.n_streams)
    h = assemble_wsms_channel(paths, tx, rx, cfg.wavelength)
    se = evaluate_se(h, bf, cfg.transmit_power, cfg.noise_power)
    cap = capacity(h, cfg.transmit_power, cfg.noise_power)
    viol = validate_constraints(bf)
    payload = dict(
        k=bf.k,
        d_s=tx.d_s,
        n_streams=bf.n_streams,
        rf_chains=bf.k * bf.l_t,
        se=se,
        capacity=cap,
        violations=[dict(kind=v.kind, matrix=v.matrix, measured=v.measured, detail=v.detail) for v in viol],
    )
    lines = [
        f"k={bf.k}  d_s={tx.d_s:.6g} m  streams={bf.n_streams}",
        f"SE: {se:.9g} bits/s/Hz  capacity: {cap:.9g}",
        "constraints: ok" if not viol else "constraints violated:",
    ] + [f"  {v.kind} in {v.matrix}: {v.measured:.6g} ({v.detail})" for v in viol]
    _emit(args, payload, lines)
    if args.validate and viol:
        return EXIT_NUMERIC
    return EXIT_OK


def _solution_dict(sol) -> dict:
    return dict(k=sol.k, d_s=sol.d_s, objective_se=sol.objective_se, method=sol.method, d_s_bounds=list(sol.d_s_bounds))


def cmd_configure(args) -> int:
    cfg = _scenario(args)
    t0 = time.perf_counter()
    if args.method == "dlr":
        sol = dlr_select(cfg)
    elif args.method == "weighted":
        sol = weighted_dlr(cfg)
    else:
        sol = exhaustive_search(cfg, args.resolution)
    ms = (time.perf_counter() - t0) * 1e3
    payload = _solution_dict(sol)
    lines = [f"method={sol.method}  k={sol.k}  d_s={sol.d_s:.6g} m  objective SE={sol.objective_se:.6g} bits/s/Hz"]
    if args.oracle and args.method != "exhaustive":
        ref = exhaustive_search(cfg, args.resolution)
        gap = 100.0 * (ref.objective_se - sol.objective_se) / ref.objective_se if ref.objective_se > 0 else 0.0
        payload["oracle"] = _solution_dict(ref)
        payload["gap_percent"] = gap
        lines.append(f"exhaustive: k={ref.k}  d_s={ref.d_s:.6g} m  SE={ref.objective_se:.6g}  gap={gap:.3f}%")
    if args.timing:
        payload["wall_ms"] = ms
        lines.append(f"wall: {ms:.1f} ms")
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    cfg = _scenario(args)
    sol, bf = full_pipeline(cfg)
    paths = cfg.paths()
    tx, rx = sol.layouts(cfg)
    h = assemble_wsms_channel(paths, tx, rx, cfg.wavelength)
    se = evaluate_se(h, bf, cfg.transmit_power, cfg.noise_power)
    payload = dict(_solution_dict(sol), se=se, n_streams=bf.n_streams)
    lines = [f"k={sol.k}  d_s={sol.d_s:.6g} m  SE={se:.6g} bits/s/Hz  streams={bf.n_streams}"]
    if args.oracle:
        ref = exhaustive_search(cfg, args.resolution)
        gap = 100.0 * (ref.objective_se - se) / ref.objective_se if ref.objective_se > 0 else 0.0
        payload["oracle"] = _solution_dict(ref)
        payload["gap_percent"] = gap
        lines.append(f"exhaustive: k={ref.k}  d_s={ref.d_s:.6g} m  capacity={ref.objective_se:.6g}  gap={gap:.3f}%")
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_power(args) -> int:
    cfg = _scenario(args)
    n = args.n if args.n is not None else cfg.n_tx
    k = args.k if args.k is not None else 1
    l = args.l if args.l is not None else k * len(cfg.paths())
    archs = [a.strip() for a in args.arch.split(",")] if args.arch else list(ARCHITECTURES)
    table = []
    for a in archs:
        if a not in ARCHITECTURES:
            raise _UsageError(f"unknown architecture {a!r}; expected some of {', '.join(ARCHITECTURES)}")
        l_a = n if a == "digital" else l
        table.append(dict(architecture=a, n=n, l=l_a, k=k, power_w=power_consumption(a, n, l_a, k)))
    lines = [f"{'architecture':<12} {'N':>6} {'L':>6} {'k':>4} {'power (W)':>12}"]
    lines += [f"{r['architecture']:<12} {r['n']:>6} {r['l']:>6} {r['k']:>4} {r['power_w']:>12.6g}" for r in table]
    _emit(args, dict(rows=table), lines)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _scenario(args)
    archs = parse_architectures(args.arch)
    result = run_sweep(cfg, args.axis or [], archs, args.workers, args.timing)
    text = result.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        print(result.summary() + f", wrote {args.out}")
    else:
        sys.stdout.write(text)
        print(result.summary(), file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="scenario file (defaults apply when omitted)")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--k", type=int, help="fix the subarray count")
    common.add_argument("--rho", type=float, help="transmit power in dBm (overrides the config)")

    p = _Parser(prog="wsms", description="Widely-spaced multi-subarray link toolkit.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    c = sub.add_parser("channel", parents=[common], help="channel statistics")
    c.add_argument("--ds", type=float, help="subarray spacing in metres")
    c.set_defaults(func=cmd_channel)

    b = sub.add_parser("beamform", parents=[common], help="closed-form hybrid beamformer")
    b.add_argument("--ds", type=float, help="subarray spacing in metres")
    b.add_argument("--validate", action="store_true", help="exit 3 if any hardware constraint is violated")
    b.add_argument("--pd-scale", type=float, default=1.0, help="scale the digital precoder (fault injection)")
    b.set_defaults(func=cmd_beamform)

    g = sub.add_parser("configure", parents=[common], help="choose k and d_s")
    g.add_argument("--method", choices=("dlr", "exhaustive", "weighted"), default="dlr")
    g.add_argument("--resolution", type=int, default=200, help="spacing grid size for the exhaustive search")
    g.add_argument("--oracle", action="store_true", help="also run the exhaustive search and report the gap")
    g.add_argument("--timing", action="store_true")
    g.set_defaults(func=cmd_configure)

    q = sub.add_parser("pipeline", parents=[common], help="configuration followed by beamforming")
    q.add_argument("--oracle", action="store_true", help="compare with the exhaustive search")
    q.add_argument("--resolution", type=int, default=200)
    q.set_defaults(func=cmd_pipeline)

    w = sub.add_parser("power", parents=[common], help="hardware power per terminal")
    w.add_argument("--n", type=int, help="antennas")
    w.add_argument("--l", type=int, help="RF chains")
    w.add_argument("--arch", help=f"comma list from {','.join(ARCHITECTURES)}")
    w.set_defaults(func=cmd_power)

    s = sub.add_parser("sweep", parents=[common], help="parameter sweep to CSV")
    s.add_argument("--axis", action="append", metavar="NAME=START:STOP:STEP", help="repeatable; rho, k, ds, N, D")
    s.add_argument("--arch", help="comma list from wsms,planar-baseline,aosa,los-mimo")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", metavar="PATH")
    s.add_argument("--timing", action="store_true", help="fill the wall_ms column (breaks byte-identical reruns)")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be at least 1")
    try:
        return args.func(args)
    except (_UsageError, SweepError) as exc:
        print(f"wsms: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, OSError) as exc:
        print(f"wsms: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegenerateChannelError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"wsms: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (GeometryError, ValueError) as exc:
        print(f"wsms: infeasible scenario: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
