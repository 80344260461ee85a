"""Command-line front end.

Subcommands: identify, benchmark, bode, compare, validate.  Every command is
deterministic given its flags and seed; re-running overwrites outputs with
byte-identical files.  Set OKID_LOG=debug (or another logging level name)
for diagnostic output.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .analysis import (
    compare_frequency_responses,
    default_frequency_grid,
    frequency_response,
    validate_kalman,
)
from .benchmark import BenchmarkScenario, generate
from .era import IdentifiedModel, identify
from .exceptions import OkideraError
from .okid import OkidConfig
from .state_space import TimeSeriesDataset
from . import serialize

log = logging.getLogger("okidera")

PAPER_IV_LENGTH = 1600
PAPER_IV_HORIZON = 800
PAPER_IV_ORDER = 10
PAPER_IV_SAMPLE_RATE = 38520.0
# With 800 equations against 1601 unknown columns the late Markov blocks are
# minimum-norm fill; a compact Hankel window keeps the realization on the
# well-estimated early blocks.
PAPER_IV_HANKEL_BLOCKS = 80


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="okidera",
        description="State-space identification from input/output time series "
        "corrupted by colored measurement noise.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_id = sub.add_parser("identify", help="fit a model + Kalman gain from a dataset CSV")
    p_id.add_argument("--input", required=True, help="dataset CSV (k,u_*,y_* columns)")
    p_id.add_argument("--output-dir", default=".", help="directory for result files")
    p_id.add_argument("--p", type=int, help="observer horizon in samples")
    p_id.add_argument("--order", type=int, help="realized model order")
    p_id.add_argument("--threshold", type=float,
                      help="relative singular-value cutoff (alternative to --order)")
    p_id.add_argument("--alpha", type=int, help="Hankel block rows (default p//2)")
    p_id.add_argument("--beta", type=int, help="Hankel block columns (default p//2)")
    p_id.add_argument("--mean-removal", action="store_true",
                      help="subtract the sample means of u and y before fitting")
    p_id.add_argument("--sample-rate", type=float,
                      help="sample rate in Hz (manifest value used when omitted)")
    p_id.add_argument("--truth", help="truth model JSON; adds a comparison CSV")
    p_id.add_argument("--paper-iv", action="store_true",
                      help="preset: horizon 800, order 10, 38520 Hz, 80x80-block Hankel window")

    p_bm = sub.add_parser("benchmark", help="generate a synthetic seek/cross-transfer dataset")
    p_bm.add_argument("--output-dir", default=".", help="directory for dataset + truth files")
    p_bm.add_argument("--seed", type=int, default=1)
    p_bm.add_argument("--length", type=int, default=4000, help="number of samples")
    p_bm.add_argument("--sample-rate", type=float, default=38520.0)
    p_bm.add_argument("--snr-db", type=float, default=20.0,
                      help="output signal-to-noise ratio of the colored disturbance")
    p_bm.add_argument("--zero-noise", action="store_true", help="disable the disturbance")
    p_bm.add_argument("--amplitude", type=float, default=1.0, help="seek pulse amplitude")
    p_bm.add_argument("--lobe-lengths", default="3,5,8",
                      help="comma-separated accel lobe lengths (samples) of the three pulses")
    p_bm.add_argument("--paper-iv", action="store_true",
                      help="preset: 1600 samples at 38520 Hz")

    p_bode = sub.add_parser("bode", help="evaluate a model JSON on a frequency grid")
    p_bode.add_argument("--model", required=True, help="model JSON path")
    p_bode.add_argument("--output", required=True, help="frequency response CSV path")
    p_bode.add_argument("--sample-rate", type=float,
                        help="sample rate in Hz (model diagnostics value used when omitted)")
    p_bode.add_argument("--fmin", type=float, help="grid start, Hz")
    p_bode.add_argument("--fmax", type=float, help="grid end, Hz")
    p_bode.add_argument("--points", type=int, default=200)

    p_cmp = sub.add_parser("compare", help="diff two frequency-response CSVs")
    p_cmp.add_argument("--a", required=True, help="response CSV under test")
    p_cmp.add_argument("--b", required=True, help="reference response CSV")
    p_cmp.add_argument("--output", help="comparison CSV path")

    p_val = sub.add_parser("validate", help="score a model's one-step predictor on a dataset")
    p_val.add_argument("--model", required=True, help="identified model JSON")
    p_val.add_argument("--input", required=True, help="dataset CSV")
    p_val.add_argument("--burn-in", type=int, default=0,
                       help="samples discarded before scoring (use the fit horizon p)")
    p_val.add_argument("--sample-rate", type=float)
    p_val.add_argument("--output", help="prediction report JSON path")
    return parser


def cmd_identify(args) -> int:
    data = serialize.load_dataset(args.input, sample_rate=args.sample_rate)
    p = args.p
    order = args.order
    alpha, beta = args.alpha, args.beta
    sample_rate = data.sample_rate
    if args.paper_iv:
        p = p if p is not None else PAPER_IV_HORIZON
        if order is None and args.threshold is None:
            order = PAPER_IV_ORDER
        if args.sample_rate is None:
            sample_rate = PAPER_IV_SAMPLE_RATE
        alpha = alpha if alpha is not None else PAPER_IV_HANKEL_BLOCKS
        beta = beta if beta is not None else PAPER_IV_HANKEL_BLOCKS
    if p is None:
        raise OkideraError("identify: --p is required (or use --paper-iv)")
    if (order is None) == (args.threshold is None):
        raise OkideraError("identify: give exactly one of --order and --threshold")

    u, y = data.u, data.y
    if args.mean_removal:
        u = u - u.mean(axis=0)
        y = y - y.mean(axis=0)
    data = TimeSeriesDataset(u=u, y=y, sample_rate=sample_rate)
    model = identify(
        data,
        OkidConfig(p=p),
        order=order,
        threshold=args.threshold,
        alpha=alpha,
        beta=beta,
    )
    model.diagnostics["sample_rate"] = sample_rate
    for note in model.diagnostics.get("okid_warnings", []):
        log.warning("%s", note)

    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    serialize.save_model(model, outdir / "model.json")
    sv_lines = ["index,singular_value"] + [
        f"{i},{_fmt(s)}" for i, s in enumerate(model.singular_values)
    ]
    (outdir / "singular_values.csv").write_text("\n".join(sv_lines) + "\n")

    print(f"identified order {model.order} model from {data.length} samples (p={p})")
    print(f"observer spectral radius: {model.observer_spectral_radius:.6g}")
    print(f"residual norm: {model.diagnostics['residual_norm']:.6g}")

    if args.truth:
        truth = serialize.load_model(args.truth)
        grid = default_frequency_grid(sample_rate)
        resp_est = frequency_response(model, grid, sample_rate)
        resp_true = frequency_response(truth, grid, sample_rate)
        report = compare_frequency_responses(resp_est, resp_true)
        serialize.save_comparison(report, outdir / "comparison.csv")
        print(
            f"vs truth: max |mag err| {report.max_mag_err_db:.4g} dB, "
            f"mean {report.mean_mag_err_db:.4g} dB"
        )
    return 0


def cmd_benchmark(args) -> int:
    length = args.length
    sample_rate = args.sample_rate
    if args.paper_iv:
        length = PAPER_IV_LENGTH
        sample_rate = PAPER_IV_SAMPLE_RATE
    lobes = tuple(int(v) for v in str(args.lobe_lengths).split(","))
    scenario = BenchmarkScenario(
        length=length,
        sample_rate=sample_rate,
        snr_db=None if args.zero_noise else args.snr_db,
        amplitude=args.amplitude,
        lobe_lengths=lobes,
        seed=args.seed,
    )
    run = generate(scenario)
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    serialize.save_dataset(run.data, outdir / "dataset.csv")
    serialize.save_model(run.truth, outdir / "truth_model.json")
    print(
        f"wrote {run.data.length}-sample dataset (seed {scenario.seed}, "
        f"noise scale {run.noise_scale:.6g}) to {outdir}"
    )
    return 0


def cmd_bode(args) -> int:
    model = serialize.load_model(args.model)
    sample_rate = args.sample_rate
    if sample_rate is None and isinstance(model, IdentifiedModel):
        sample_rate = model.diagnostics.get("sample_rate")
    if sample_rate is None:
        raise OkideraError("bode: --sample-rate is required for this model file")
    fmin = args.fmin if args.fmin is not None else sample_rate / 1e4
    fmax = args.fmax if args.fmax is not None else 0.95 * sample_rate / 2.0
    for f in (fmin, fmax):
        if f > sample_rate / 2.0:
            raise OkideraError(
                f"bode: frequency {f} Hz exceeds the Nyquist limit {sample_rate / 2.0} Hz"
            )
    grid = np.geomspace(fmin, fmax, args.points) if fmin > 0 else np.linspace(fmin, fmax, args.points)
    resp = frequency_response(model, grid, sample_rate)
    serialize.save_frequency_response(resp, args.output)
    print(f"wrote {args.points}-point response [{fmin:.6g}, {fmax:.6g}] Hz to {args.output}")
    return 0


def cmd_compare(args) -> int:
    resp_a = serialize.load_frequency_response(args.a, sample_rate=None)
    resp_b = serialize.load_frequency_response(args.b, sample_rate=None)
    report = compare_frequency_responses(resp_a, resp_b)
    if args.output:
        serialize.save_comparison(report, args.output)
    print(f"max |mag err|: {_fmt(report.max_mag_err_db)} dB")
    print(f"mean |mag err|: {_fmt(report.mean_mag_err_db)} dB")
    print(f"max |phase err|: {_fmt(report.max_phase_err_deg)} deg")
    excluded = int(np.sum(report.excluded))
    if excluded:
        print(f"excluded {excluded} zero-magnitude reference points")
    return 0


def cmd_validate(args) -> int:
    model = serialize.load_model(args.model)
    if not isinstance(model, IdentifiedModel):
        raise OkideraError("validate: model file carries no Kalman gain")
    data = serialize.load_dataset(args.input, sample_rate=args.sample_rate)
    report = validate_kalman(model, data, burn_in=args.burn_in)
    payload = {
        "one_step_rmse": report.one_step_rmse,
        "residual_autocorr": [list(map(float, row)) for row in report.residual_autocorr],
        "output_autocorr": [list(map(float, row)) for row in report.output_autocorr],
        "observer_spectral_radius": report.observer_spectral_radius,
        "divergent": report.divergent,
        "burn_in": args.burn_in,
    }
    if args.output:
        Path(args.output).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"one-step RMSE: {report.one_step_rmse:.6g}")
    print(
        "residual lag-1 autocorr: "
        + ", ".join(f"{v:.4f}" for v in report.residual_autocorr[0])
    )
    print(
        "output lag-1 autocorr: "
        + ", ".join(f"{v:.4f}" for v in report.output_autocorr[0])
    )
    print(f"observer spectral radius: {report.observer_spectral_radius:.6g}")
    if report.divergent:
        print("warning: observer is divergent")
    return 0


_COMMANDS = {
    "identify": cmd_identify,
    "benchmark": cmd_benchmark,
    "bode": cmd_bode,
    "compare": cmd_compare,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    level = os.environ.get("OKID_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (OkideraError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
