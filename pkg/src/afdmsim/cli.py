"""Command-line entry point.

Subcommands: `ber` (Monte Carlo BER/SER sweep), `exit` (EXIT experiment on a
fixed channel), `complexity` (operation counts plus measured timings), and
`channel-dump` (serialize a channel realization, optionally with the
effective-channel magnitude grid).  Flags mirror ExperimentConfig fields; a
JSON config file supplies defaults that flags then override.
"""

import argparse
import dataclasses
import sys

from .harness import (
    DETECTOR_KINDS,
    ExperimentConfig,
    dump_channel,
    report_complexity,
    run_ber_sweep,
    run_exit,
)


def _add_common(parser):
    parser.add_argument("--config", help="JSON file with ExperimentConfig fields")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", help="output file path")
    parser.add_argument("--n", type=int, dest="n_subcarriers")
    parser.add_argument("--constellation", choices=["qpsk", "qam16"])
    parser.add_argument("--blocks", type=int, dest="block_count")
    parser.add_argument("--paths", type=int)
    parser.add_argument("--tau-max", type=float, dest="tau_max")
    parser.add_argument("--nu-max", type=float, dest="nu_max")
    parser.add_argument("--rolloff", type=float)
    parser.add_argument("--fixed-channel", dest="fixed_channel")
    parser.add_argument("--detector", action="append", choices=DETECTOR_KINDS,
                        dest="detector_list",
                        help="restrict to one detector (repeatable)")
    parser.add_argument("--max-iter", type=int, dest="max_iter")
    parser.add_argument("--damping", type=float)
    parser.add_argument("--tol", type=float)
    parser.add_argument("--gamp-k-per-path", type=int, dest="gamp_k_per_path")
    parser.add_argument("--gamp-dense", action="store_true",
                        help="full-support GAMP baseline (no row truncation)")
    parser.add_argument("--no-timing", action="store_true",
                        help="zero the wall_ms column for reproducible CSVs")


def _build_config(args):
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    updates = {}
    field_names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    for name in field_names:
        value = getattr(args, name, None)
        if value is not None:
            updates[name] = value
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if args.detector_list:
        updates["detectors"] = tuple(args.detector_list)
    if getattr(args, "snr", None):
        updates["snr_db"] = tuple(args.snr)
    if getattr(args, "frames", None) is not None:
        updates["frames"] = args.frames
    if args.gamp_dense:
        updates["gamp_k_per_path"] = None
    if args.no_timing:
        updates["timing"] = False
    return dataclasses.replace(cfg, **updates)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="afdmsim")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ber = sub.add_parser("ber", help="Monte Carlo BER/SER sweep")
    _add_common(p_ber)
    p_ber.add_argument("--snr", type=float, action="append",
                       help="SNR point in dB (repeatable)")
    p_ber.add_argument("--frames", type=int, help="frames per SNR point")

    p_exit = sub.add_parser("exit", help="EXIT experiment (fixed channel)")
    _add_common(p_exit)
    p_exit.add_argument("--snr-db", type=float, default=10.0, dest="exit_snr_db")
    p_exit.add_argument("--ia-grid", type=float, action="append",
                        help="I_A grid point (repeatable)")
    p_exit.add_argument("--min-bits", type=int, dest="exit_min_bits_arg")

    p_cx = sub.add_parser("complexity", help="operation counts and timings")
    _add_common(p_cx)
    p_cx.add_argument("--no-measure", action="store_true")

    p_dump = sub.add_parser("channel-dump", help="serialize a channel realization")
    _add_common(p_dump)
    p_dump.add_argument("--heff-out", help="also write the |H_eff| magnitude grid")

    args = parser.parse_args(argv)
    cfg = _build_config(args)

    if args.command == "ber":
        out = args.out or "ber.csv"
        result = run_ber_sweep(cfg, workers=args.workers, out=out)
        for row in result.rows:
            rec = row.as_record()
            print(f"{rec['snr_db']:>5} dB  {rec['detector']:8s} "
                  f"ber={rec['ber']}  ser={rec['ser']}  iters={rec['mean_iters']}")
        print(f"wrote {out}")
    elif args.command == "exit":
        if args.ia_grid is not None:
            if len(args.ia_grid) == 0:
                parser.error("empty --ia-grid")
            cfg = dataclasses.replace(cfg, exit_ia_grid=tuple(args.ia_grid))
        if args.exit_min_bits_arg is not None:
            cfg = dataclasses.replace(cfg, exit_min_bits=args.exit_min_bits_arg)
        out = args.out or "exit.csv"
        records = run_exit(cfg, snr_db=args.exit_snr_db, out=out)
        curve = [r for r in records if r["iterations"] == 1]
        for rec in curve:
            print(f"{rec['detector']:8s} I_A={rec['i_a']}  I_E={rec['i_e']}")
        print(f"wrote {out}")
    elif args.command == "complexity":
        report = report_complexity(cfg, measure=not args.no_measure)
        print(report)
    elif args.command == "channel-dump":
        out = args.out or "channel.txt"
        real = dump_channel(cfg, out, heff_out=args.heff_out)
        print(f"wrote {out} ({real.path_count} paths)"
              + (f" and {args.heff_out}" if args.heff_out else ""))
    return 0


if __name__ == "__main__":
    sys.exit(main())
