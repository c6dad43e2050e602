"""Command-line entry point for Monte Carlo sweeps.

Example::

    onebit-joint --sigma-v-sq 1e-4 --m 10:100:10 --p 1:30 --trials 100 --out high_snr.csv
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import ParameterError
from .harness import ExperimentConfig, Method, emit_csv, format_csv, run_sweep
from .solver import Init, KnownK, SolverConfig, Threshold


def parse_range(text: str) -> tuple[int, ...]:
    """``"a:b:s"`` (inclusive of ``b``), ``"a:b"``, ``"a,b,c"`` or a single integer."""
    try:
        if ":" in text:
            parts = [int(x) for x in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            if len(parts) != 3:
                raise ValueError
            start, stop, step = parts
            if step < 1 or stop < start:
                raise ValueError
            return tuple(range(start, stop + 1, step))
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; use start:stop[:step] or a comma list") from None


def parse_extraction(text: str):
    if text == "known-k":
        return None
    if text.startswith("threshold:"):
        try:
            return Threshold(float(text.split(":", 1)[1]))
        except (ValueError, ParameterError) as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    raise argparse.ArgumentTypeError("extraction must be 'known-k' or 'threshold:<tau>'")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="onebit-joint",
        description="Joint support recovery from 1-bit measurements: Monte Carlo sweep over (M, P).",
    )
    ap.add_argument("--n", type=int, default=100, help="signal dimension N (default 100)")
    ap.add_argument("--k", type=int, default=5, help="number of nonzero rows K (default 5)")
    ap.add_argument("--m", type=parse_range, required=True, help="measurements per sensor, e.g. 10:100:10")
    ap.add_argument("--p", type=parse_range, required=True, help="sensor counts, e.g. 1:30")
    ap.add_argument("--sigma-v-sq", type=float, required=True, help="noise variance sigma_v^2")
    ap.add_argument("--phi-variance", type=float, default=0.004, help="entry variance of Phi (default 0.004)")
    ap.add_argument("--trials", type=int, default=100, help="Monte Carlo trials per cell (default 100)")
    ap.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    ap.add_argument("--method", choices=[m.value for m in Method], default="joint")
    ap.add_argument("--lambda", dest="lam", type=float, default=None, help="absolute target penalty")
    ap.add_argument(
        "--lambda-ratio", type=float, default=0.01, help="target penalty as a fraction of lambda_max (default 0.01)"
    )
    ap.add_argument("--alpha", type=float, default=0.5, help="continuation factor (default 0.5)")
    ap.add_argument("--epsilon", type=float, default=1e-4, help="relative stopping tolerance (default 1e-4)")
    ap.add_argument("--init", choices=[i.value for i in Init], default="zero")
    ap.add_argument(
        "--extraction", type=parse_extraction, default=None, help="'known-k' (default) or 'threshold:<tau>'"
    )
    ap.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on this)")
    ap.add_argument("--out", default=None, help="CSV path (stdout if omitted)")
    ap.add_argument("--print-config", action="store_true", help="echo the resolved configuration as JSON to stderr")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    solver = SolverConfig(
        lam=args.lam,
        lam_ratio=args.lambda_ratio,
        alpha=args.alpha,
        epsilon=args.epsilon,
        init=Init(args.init),
    )
    return ExperimentConfig(
        sigma_v_sq=args.sigma_v_sq,
        m_values=args.m,
        p_values=args.p,
        n=args.n,
        k=args.k,
        phi_variance=args.phi_variance,
        trials=args.trials,
        seed=args.seed,
        method=Method(args.method),
        solver=solver,
        extraction=args.extraction if args.extraction is not None else KnownK(args.k),
    )


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
    except ParameterError as exc:
        print(f"onebit-joint: configuration error: {exc}", file=sys.stderr)
        return 2
    if args.print_config:
        print(json.dumps(cfg.to_dict(), indent=2, sort_keys=True), file=sys.stderr)
    cells = run_sweep(cfg, workers=args.workers)
    if args.out is None:
        sys.stdout.write(format_csv(cells))
        return 0
    try:
        emit_csv(cells, args.out)
    except OSError as exc:
        print(f"onebit-joint: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
