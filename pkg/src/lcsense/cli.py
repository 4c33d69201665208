"""Command line entry point: ``lcsense gen|solve|experiment|report``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import coeffio
from .errors import CorruptStream, InvalidArgument, Underdetermined
from .harness import (
    LC_SOLVERS,
    SOLVERS,
    ZC_SOLVERS,
    ExperimentConfig,
    make_instance,
    read_csv,
    success_probability,
    sweep,
)
from .lc_solvers import biht_lc, bsl0_lc
from .omp import crossing_measurements, omp_solve
from .sampling import (
    LCEventStream,
    MeasurementEnsemble,
    build_phi,
    build_phi_prime,
    decode_lc_events,
    encode_lc_events,
)
from .signal import reconstruction_snr
from .solvers import biht_zc, bsl0_zc

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3

log = logging.getLogger("lcsense")


def _config(args) -> ExperimentConfig:
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["master_seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        overrides["trials"] = args.trials
    if args.config:
        d = json.loads(Path(args.config).read_text())
        if getattr(args, "mode", None):
            d["mode"] = args.mode
        d.update(overrides)
        return ExperimentConfig.from_dict(d)
    return ExperimentConfig.for_mode(getattr(args, "mode", None) or "single", **overrides)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_gen(args) -> int:
    config = _config(args)
    K = args.K if args.K is not None else config.K_list[0]
    L = args.L if args.L is not None else config.L_list[0]
    inst = make_instance(config.spec, K, L, config.master_seed, config.include_dc)
    if args.zc:
        stream = encode_lc_events(inst.samples, [0.0], config.spec.sample_period)
    else:
        stream = inst.events()
    out = _out_dir(args)
    coeffio.save(out / "coeffs.csv", inst.coeffs)
    coeffio.save(out / "coeffs.json", inst.coeffs)
    stream.save(out / "events.lcs")
    (out / "config.json").write_text(json.dumps({**config.to_dict(), "K_list": [K], "L_list": [L]}, indent=2))
    print(f"wrote {out}/coeffs.csv, coeffs.json, events.lcs ({len(stream.events)} events), config.json")
    return EXIT_OK


def cmd_solve(args) -> int:
    config = _config(args)
    spec = config.spec
    stream = LCEventStream.load(args.stream)
    if stream.M != spec.num_samples or not np.isclose(stream.sample_period, spec.sample_period):
        raise InvalidArgument(
            f"stream grid (M={stream.M}, T={stream.sample_period}) does not match the config "
            f"(M={spec.num_samples}, T={spec.sample_period})"
        )
    K = args.K if args.K is not None else config.K_list[0]
    signs = decode_lc_events(stream)
    phi = build_phi(spec)
    solver = args.solver
    if solver in ZC_SOLVERS:
        if len(stream.levels) != 1:
            raise InvalidArgument(f"{solver} needs a single-level stream; use an LC solver for {len(stream.levels)} levels")
        # A single non-zero level is handled by shifting it into phi's DC column; plain ZC has level 0.
        ens = MeasurementEnsemble(phi, signs, "ZC", spec)
        trace = bsl0_zc(ens, config.bsl0_params()) if solver == "bsl0" else biht_zc(ens, K, **config.biht_kwargs())
        estimate, payload = trace.estimate, trace.to_dict()
    elif solver in LC_SOLVERS:
        ens = MeasurementEnsemble(build_phi_prime(phi, stream.levels), signs, "LC", spec, np.asarray(stream.levels))
        if solver == "biht_lc":
            trace = biht_lc(ens, K, **config.biht_kwargs("biht_lc"))
        else:
            trace = bsl0_lc(ens, config.bsl0_params("bsl0_lc"))
        estimate, payload = trace.estimate, trace.to_dict()
    else:
        res = omp_solve(crossing_measurements(stream, spec), K)
        estimate = res.estimate
        payload = {"estimate": [float(v) for v in estimate], "support": res.support,
                   "residual_norms": res.residual_norms, "rank_deficient": res.rank_deficient}
    if args.reference:
        ref = coeffio.load(args.reference, spec.n_coeffs)
        payload["snr_db"] = reconstruction_snr(ref, estimate, scale_invariant=solver in ZC_SOLVERS)
        print(f"{solver}: SNR {payload['snr_db']:.2f} dB")
    out = _out_dir(args)
    coeffio.save(out / f"estimate_{solver}.csv", estimate)
    coeffio.save(out / f"estimate_{solver}.json", estimate)
    (out / f"trace_{solver}.json").write_text(json.dumps(payload, indent=2))
    return EXIT_OK


def _print_rates(rows, threshold):
    for (solver, K, L), p in sorted(success_probability(rows, threshold).items()):
        print(f"{solver:8s} K={K:<4d} L={L:<3d} P(SNR>{threshold:g}dB)={p:.3f}")


def cmd_experiment(args) -> int:
    from .plotting import emit_report

    config = _config(args)
    out = _out_dir(args)

    def progress(done, total):
        if done == total or done % max(1, total // 20) == 0:
            log.info("%d/%d cells", done, total)

    rows = sweep(config, threads=args.threads, progress=progress)
    emit_report(rows, out / "results.csv", include_timing=args.timing)
    (out / "config.json").write_text(json.dumps(config.to_dict(), indent=2))
    fig_path = out / f"results.{args.figure_format}"
    emit_report(rows, fig_path, mode=config.mode, threshold_db=config.success_threshold_db,
                band_width=config.spec.band_width)
    _print_rates(rows, config.success_threshold_db)
    print(f"wrote {out / 'results.csv'} ({len(rows)} rows) and {fig_path}")
    return EXIT_OK


def cmd_report(args) -> int:
    from .plotting import emit_report

    rows = read_csv(args.csv)
    if not rows:
        raise InvalidArgument(f"{args.csv} has no rows")
    out = Path(args.out)
    if out.suffix == "":
        out.mkdir(parents=True, exist_ok=True)
        out = out / (Path(args.csv).stem + ".svg")
    emit_report(rows, out, mode=args.mode or "fig1", threshold_db=args.threshold, band_width=args.band_width)
    _print_rates(rows, args.threshold)
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lcsense", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_default="out"):
        sp.add_argument("--config", help="JSON file with ExperimentConfig fields")
        sp.add_argument("--seed", type=int, help="master seed (overrides the config)")
        sp.add_argument("--out", default=out_default, help="output directory")
        sp.add_argument("--mode", choices=["fig1", "fig2", "fig3", "single"])
        sp.add_argument("--threads", type=int, default=1)

    g = sub.add_parser("gen", help="generate a random sparse signal and its crossing event stream")
    common(g)
    g.add_argument("--K", type=int)
    g.add_argument("--L", type=int)
    g.add_argument("--zc", action="store_true", help="record zero crossings (single level at 0)")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="reconstruct one signal from an event stream file")
    common(s)
    s.add_argument("--stream", required=True)
    s.add_argument("--solver", choices=SOLVERS, required=True)
    s.add_argument("--K", type=int)
    s.add_argument("--reference", help="true coefficients (CSV/JSON) for an SNR readout")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("experiment", help="run a seeded sweep and write results.csv plus a figure")
    common(e)
    e.add_argument("--trials", type=int)
    e.add_argument("--timing", action="store_true", help="fill the wall_time column (breaks byte-identical reruns)")
    e.add_argument("--figure-format", default="svg", choices=["svg", "png", "pdf"])
    e.set_defaults(func=cmd_experiment)

    r = sub.add_parser("report", help="render a results CSV as a figure")
    r.add_argument("csv")
    r.add_argument("--out", default="out")
    r.add_argument("--mode", choices=["fig1", "fig2", "fig3", "single"])
    r.add_argument("--threshold", type=float, default=20.0)
    r.add_argument("--band-width", type=int)
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (InvalidArgument, CorruptStream, Underdetermined, json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
