"""Command-line surface.

Subcommands: gen, rip, code, equiv, kappa, learn, verify, experiment.
Matrices travel in the shared text format; reports are JSON (CSV is
available for convergence traces). Exit codes: 0 success, 2 bad
arguments, 3 capacity error, 4 hypothesis violation, 1 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .coding import DEFAULT_CODING_TOL, block_omp, exhaustive_code
from .core import BlockDict, BlockStructure
from .equivalence import (
    DEFAULT_CERTIFICATE_TOL,
    construct_kappa,
    recover_equivalence,
    verify_theorem_instance,
)
from .errors import CapacityError, HypothesisViolationError
from .harness import (
    MODE_BLOCK_ORTH,
    MODE_GAUSSIAN,
    ExperimentConfig,
    codes_to_matrix,
    gen_codes,
    gen_dictionary,
    learn_dictionary,
    run_experiment,
    trace_to_csv,
)
from .matrixio import read_matrix_text, write_matrix_text
from .rip import rip_constant_exact, rip_lower_bound_sampled
from .subspace import DEFAULT_RANK_TOL


def _structure_from_args(args, n_cols: int) -> BlockStructure:
    if n_cols % args.alpha != 0:
        raise ValueError(
            f"matrix has {n_cols} columns, not divisible by alpha={args.alpha}"
        )
    K = n_cols // args.alpha
    s = getattr(args, "sparsity", None) or 1
    return BlockStructure(K=K, alpha=args.alpha, s=s)


def _load_dict(path, args, sparsity: int | None = None) -> BlockDict:
    data = read_matrix_text(path)
    structure = _structure_from_args(args, data.shape[1])
    if sparsity is not None:
        structure = BlockStructure(structure.K, structure.alpha, sparsity)
    return BlockDict(structure, data)


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _parse_support(spec: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in spec.split(",") if p.strip())
    except ValueError:
        raise ValueError(f"support must be comma-separated integers, got {spec!r}")


def _cmd_gen(args) -> int:
    structure = BlockStructure(K=args.blocks, alpha=args.alpha, s=args.sparsity)
    A = gen_dictionary(args.ambient_dim, structure, seed=args.seed, mode=args.mode)
    if args.out_dict:
        write_matrix_text(args.out_dict, A.data)
    if args.out_codes or args.out_samples:
        codes = gen_codes(structure, args.n_samples, seed=args.seed + 1,
                          coefficient_scale=args.scale)
        X = codes_to_matrix(codes)
        if args.out_codes:
            write_matrix_text(args.out_codes, X)
        if args.out_samples:
            write_matrix_text(args.out_samples, A.data @ X)
    if not (args.out_dict or args.out_codes or args.out_samples):
        raise ValueError("nothing to do: pass --out-dict, --out-codes, or --out-samples")
    return 0


def _cmd_rip(args) -> int:
    A = _load_dict(args.dictionary, args)
    if args.mode == "exact":
        report = rip_constant_exact(A, args.level)
    else:
        report = rip_lower_bound_sampled(A, args.level, args.samples, args.seed)
    _emit(args, report.to_json(indent=2))
    return 0


def _cmd_code(args) -> int:
    A = _load_dict(args.dictionary, args, sparsity=args.sparsity)
    y = read_matrix_text(args.measurement).reshape(-1)
    if args.method == "omp":
        result = block_omp(A, y, s=args.sparsity, tol=args.tol)
    else:
        result = exhaustive_code(A, y, s=args.sparsity, tol=args.tol)
    _emit(args, result.to_json(indent=2))
    return 0


def _cmd_equiv(args) -> int:
    A = _load_dict(args.dict_a, args)
    B = _load_dict(args.dict_b, args)
    cert = recover_equivalence(A, B, tol=args.tol, span_tol=args.span_tol)
    _emit(args, cert.to_json(indent=2))
    return 0


def _cmd_kappa(args) -> int:
    support = _parse_support(args.support)
    A = _load_dict(args.dict_a, args, sparsity=max(len(support), 1))
    B = _load_dict(args.dict_b, args, sparsity=max(len(support), 1))
    result = construct_kappa(A, B, support, n_probes=args.probes, seed=args.seed,
                             tol=args.tol)
    _emit(args, json.dumps(result.to_dict(), indent=2))
    return 0


def _cmd_learn(args) -> int:
    config = ExperimentConfig.from_json_file(args.config)
    Y = read_matrix_text(args.samples)
    learned, trace = learn_dictionary(Y, config)
    if args.out_dict:
        write_matrix_text(args.out_dict, learned.data)
    if args.format == "csv":
        _emit(args, trace_to_csv(trace.to_dict()))
    else:
        _emit(args, json.dumps(trace.to_dict(), indent=2))
    return 0


def _cmd_verify(args) -> int:
    A = _load_dict(args.dict_a, args, sparsity=args.sparsity)
    B = _load_dict(args.dict_b, args, sparsity=args.sparsity)
    report = verify_theorem_instance(
        A, B, s=args.sparsity, n_probes=args.probes, seed=args.seed, tol=args.tol
    )
    _emit(args, report.to_json(indent=2))
    return 0


def _cmd_experiment(args) -> int:
    config = ExperimentConfig.from_json_file(args.config)
    report = run_experiment(config)
    if args.format == "csv" and report.trace is not None:
        _emit(args, trace_to_csv(report.trace))
    else:
        _emit(args, report.to_json(indent=2))
    for err in report.stage_errors:
        sys.stderr.write(f"stage {err['stage']} failed: {err['error']}\n")
    if report.stage_errors:
        return 4 if "HypothesisViolation" in report.stage_errors[0]["error"] else 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blockdict",
        description="Block-sparse dictionary identifiability toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, tol_default=None):
        p.add_argument("--seed", type=int, default=0, help="RNG seed")
        if tol_default is not None:
            p.add_argument("--tol", type=float, default=tol_default, help="tolerance")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=["json", "csv"], default="json")

    p = sub.add_parser("gen", help="generate a dictionary and/or codes to files")
    p.add_argument("--ambient-dim", type=int, required=True)
    p.add_argument("--blocks", type=int, required=True, help="number of blocks K")
    p.add_argument("--alpha", type=int, required=True, help="block width")
    p.add_argument("--sparsity", type=int, required=True, help="active blocks s")
    p.add_argument("--mode", choices=[MODE_GAUSSIAN, MODE_BLOCK_ORTH],
                   default=MODE_BLOCK_ORTH)
    p.add_argument("--n-samples", type=int, default=1)
    p.add_argument("--scale", type=float, default=1.0, help="coefficient scale")
    p.add_argument("--out-dict", help="write the dictionary here")
    p.add_argument("--out-codes", help="write the code matrix here")
    p.add_argument("--out-samples", help="write dictionary @ codes here")
    add_common(p)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("rip", help="restricted isometry constant of a dictionary")
    p.add_argument("dictionary", help="matrix file")
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--level", type=int, required=True, help="support size t")
    p.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    p.add_argument("--samples", type=int, default=200, help="sampled supports")
    add_common(p)
    p.set_defaults(func=_cmd_rip)

    p = sub.add_parser("code", help="block-sparse code of one measurement")
    p.add_argument("dictionary")
    p.add_argument("measurement", help="matrix file with one column")
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--sparsity", type=int, required=True)
    p.add_argument("--method", choices=["omp", "exhaustive"], default="omp")
    add_common(p, tol_default=DEFAULT_CODING_TOL)
    p.set_defaults(func=_cmd_code)

    p = sub.add_parser("equiv", help="equivalence certificate between two dictionaries")
    p.add_argument("dict_a")
    p.add_argument("dict_b")
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--span-tol", type=float, default=DEFAULT_RANK_TOL)
    add_common(p, tol_default=DEFAULT_CERTIFICATE_TOL)
    p.set_defaults(func=_cmd_equiv)

    p = sub.add_parser("kappa", help="support correspondence by probing")
    p.add_argument("dict_a")
    p.add_argument("dict_b")
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--support", required=True, help="comma-separated 1-based blocks")
    p.add_argument("--probes", type=int, default=8)
    add_common(p, tol_default=1e-8)
    p.set_defaults(func=_cmd_kappa)

    p = sub.add_parser("learn", help="learn a dictionary from samples")
    p.add_argument("samples", help="matrix file, one sample per column")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--out-dict", help="write the learned dictionary here")
    add_common(p)
    p.set_defaults(func=_cmd_learn)

    p = sub.add_parser("verify", help="end-to-end identifiability report for a pair")
    p.add_argument("dict_a")
    p.add_argument("dict_b")
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--sparsity", type=int, required=True)
    p.add_argument("--probes", type=int, default=8)
    add_common(p, tol_default=DEFAULT_CERTIFICATE_TOL)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("experiment", help="run a full experiment from a config JSON")
    p.add_argument("--config", required=True)
    add_common(p)
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapacityError as exc:
        sys.stderr.write(f"capacity error: {exc}\n")
        return 3
    except HypothesisViolationError as exc:
        sys.stderr.write(f"hypothesis violation: {exc}\n")
        return 4
    except (ValueError, IndexError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except Exception as exc:  # internal error
        sys.stderr.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
