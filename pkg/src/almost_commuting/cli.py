"""Command-line harness: ``index``, ``solve``, ``gen`` and ``sweep``.

Exit codes: 0 success, 1 bad input (parse or structure), 2 degenerate
determinant path, 3 solver failure, 4 solver fell back to an unrefined
clustered answer.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .ensembles import (
    EnsembleSpec,
    almost_normal,
    commuting_pair,
    derive_seed,
    perturb,
    voiculescu_pair,
)
from .indices import (
    CommutatorTooLargeError,
    DegeneratePathError,
    bott_projection,
    bott_trace_log,
    bott_winding,
    k_class,
)
from .matrixio import MatrixFileError, format_matrices, read_matrices, write_matrices
from .solvers import (
    NORMAL_KINDS,
    PAIR_KINDS,
    SolverParams,
    Status,
    commuting_approximation,
    nearest_normal,
)
from .structures import StructuredMatrix, StructureError, StructureKind, commutator_norm
from .sweep import SweepSpec, format_summary, records_csv, run_sweep, summarize

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE, EXIT_FAILED, EXIT_FALLBACK = 0, 1, 2, 3, 4
CLOCK_SHIFT = "clock-shift"


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def cmd_index(args) -> int:
    try:
        mats = read_matrices(args.input)
        if len(mats) != 2 or mats[0].shape != mats[1].shape:
            raise MatrixFileError("expected two square matrices of equal dimension")
    except MatrixFileError as exc:
        _err(str(exc))
        return EXIT_INPUT
    U, V = mats
    try:
        wr = bott_winding(U, V, initial_samples=args.samples)
    except (DegeneratePathError, CommutatorTooLargeError) as exc:
        _err(str(exc))
        _emit({"winding": None, "trace_log": None, "k_class": None,
               "commutator": commutator_norm(U, V), "error": str(exc)})
        return EXIT_DEGENERATE
    except StructureError as exc:
        _err(str(exc))
        return EXIT_INPUT
    out = {"winding": wr.winding, "commutator": commutator_norm(U, V),
           "path_min_abs_det": wr.path_min_abs_det, "samples_used": wr.samples_used}
    try:
        out["trace_log"] = bott_trace_log(U, V)
    except ValueError as exc:
        _err(f"trace_log unavailable: {exc}")
        out["trace_log"] = None
    try:
        out["k_class"] = k_class(bott_projection(U, V), args.gap_tol)
    except ValueError as exc:
        _err(f"k_class unavailable: {exc}")
        out["k_class"] = None
    _emit(out)
    return EXIT_OK


def cmd_solve(args) -> int:
    kind = args.kind
    try:
        mats = read_matrices(args.input)
    except MatrixFileError as exc:
        _err(str(exc))
        return EXIT_INPUT
    params = SolverParams() if args.delta is None else SolverParams(delta_max=args.delta)
    try:
        if len(mats) == 2:
            if kind not in PAIR_KINDS:
                raise StructureError("a matrix pair needs --kind real-orthogonal or symplectic-unitary")
            U = StructuredMatrix.checked(mats[0], kind)
            V = StructuredMatrix.checked(mats[1], kind)
            res = commuting_approximation(U, V, params)
        elif len(mats) == 1:
            if kind not in NORMAL_KINDS:
                raise StructureError("a single matrix needs --kind real-contraction or quaternionic-contraction")
            res = nearest_normal(StructuredMatrix.checked(mats[0], kind), params)
        else:
            raise MatrixFileError(f"expected one or two matrices, got {len(mats)}")
    except (StructureError, MatrixFileError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    out_path = args.out or f"{args.input}.solved"
    outs = [o.entries.real if kind.is_real else o.entries for o in res.outputs]
    write_matrices(out_path, outs)
    summary = res.summary()
    summary.update(kind=kind.value, output=str(out_path))
    _emit(summary)
    return {Status.CONVERGED: EXIT_OK, Status.FAILED: EXIT_FAILED,
            Status.CLUSTER_FALLBACK: EXIT_FALLBACK}[res.status]


def generate(kind: str, dim: int, seed: int, eta: float = 0.0, delta: float = 0.05) -> list:
    """Matrices written by ``gen``; ``kind`` may also be ``clock-shift``."""
    if kind == CLOCK_SHIFT:
        return list(voiculescu_pair(dim))
    kind = StructureKind.parse(kind)
    if kind in NORMAL_KINDS:
        return [almost_normal(dim, delta, kind, seed).entries]
    U, V = commuting_pair(EnsembleSpec(dim, kind, seed=derive_seed(seed, 0)))
    U, V = perturb(U, eta, derive_seed(seed, 1)), perturb(V, eta, derive_seed(seed, 2))
    return [U.entries, V.entries]


def cmd_gen(args) -> int:
    try:
        mats = generate(args.kind, args.dim, args.seed, args.eta, args.delta)
    except (ValueError, StructureError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    if args.kind != CLOCK_SHIFT and StructureKind.parse(args.kind).is_real:
        mats = [M.real for M in mats]
    if args.out:
        write_matrices(args.out, mats)
    else:
        sys.stdout.write(format_matrices(mats))
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        spec = SweepSpec.load(args.spec)
    except (OSError, ValueError, TypeError) as exc:
        _err(f"bad sweep spec: {exc}")
        return EXIT_INPUT
    if args.trials is not None:
        spec = SweepSpec(spec.dims, spec.kinds, spec.deltas, args.trials, spec.base_seed,
                         spec.output_path)
    if args.seed is not None:
        spec = SweepSpec(spec.dims, spec.kinds, spec.deltas, spec.trials, args.seed,
                         spec.output_path)
    csv_path = Path(args.out or spec.output_path)
    summary_path = csv_path.with_name(csv_path.name + ".summary.json")
    records = run_sweep(spec, jobs=args.jobs, timing=args.timing)
    summary = summarize(records)
    try:
        csv_path.write_text(records_csv(records), encoding="utf-8", newline="\n")
        summary_path.write_text(format_summary(summary), encoding="utf-8", newline="\n")
        if args.figure:
            from .plotting import plot_epsilon_delta
            plot_epsilon_delta(records, args.figure)
    except OSError as exc:
        _err(str(exc))
        return EXIT_INPUT
    if args.json:
        sys.stdout.write(format_summary(summary))
    else:
        print(f"{len(records)} trials -> {csv_path}")
        for c in summary["cells"]:
            med = c["median_epsilon"]
            med = "n/a" if med is None else f"{med:.4g}"
            print(f"  {c['kind']:<24} n={c['dim']:<4} delta={c['target_delta']:<8g} "
                  f"converged={c['convergence_rate']:.0%} median_eps={med}")
    return EXIT_OK


def _kind_arg(value: str):
    try:
        return StructureKind.parse(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="almost-commuting",
                                description="Bott indices and nearby commuting structured matrices.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("index", help="Bott index of a matrix pair file")
    q.add_argument("input")
    q.add_argument("--samples", type=int, default=64, help="initial path samples")
    q.add_argument("--gap-tol", type=float, default=0.05)
    q.add_argument("--json", action="store_true", help="accepted for symmetry; output is JSON")
    q.set_defaults(func=cmd_index)

    q = sub.add_parser("solve", help="nearby commuting pair or nearby normal matrix")
    q.add_argument("input")
    q.add_argument("--kind", type=_kind_arg, required=True)
    q.add_argument("--delta", type=float, default=None, help="largest accepted input commutator")
    q.add_argument("--out", default=None, help="output matrix file (default INPUT.solved)")
    q.add_argument("--json", action="store_true", help="accepted for symmetry; output is JSON")
    q.set_defaults(func=cmd_solve)

    q = sub.add_parser("gen", help="write a seeded test ensemble to a matrix file")
    q.add_argument("--kind", required=True,
                   choices=[k.value for k in StructureKind] + [CLOCK_SHIFT])
    q.add_argument("--dim", type=int, required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--eta", type=float, default=0.0, help="perturbation of a commuting pair")
    q.add_argument("--delta", type=float, default=0.05, help="self-commutator target (contractions)")
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_gen)

    q = sub.add_parser("sweep", help="run an epsilon-delta sweep from a JSON spec")
    q.add_argument("spec")
    q.add_argument("--out", default=None, help="CSV path (overrides output_path)")
    q.add_argument("--trials", type=int, default=None)
    q.add_argument("--seed", type=int, default=None, help="override base_seed")
    q.add_argument("--jobs", type=int, default=1)
    q.add_argument("--timing", action="store_true", help="record wall_time_ms (not reproducible)")
    q.add_argument("--figure", default=None, help="also render epsilon vs delta to this image")
    q.add_argument("--json", action="store_true", help="print the summary JSON")
    q.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
