"""Command-line front end: ``subq <subcommand> ...``.

Exit status is 0 on success, 2 for invalid input, 3 when a size limit is hit
and 4 when an eigensolver fails to converge.
"""

from __future__ import annotations

import argparse
import sys

from subq.errors import SubqError
from subq.hamiltonian import build_cim, enumerate_determinants, read_fcidump, save_matrix
from subq.pauli import fwht_coefficients, pad_dimension, save_alpha
from subq.pipeline import load_config, load_problem, report_text, run
from subq.qdrift import compute_budget, plan_repetitions

RUN_MODES = {"run-qsci": "qsci", "run-qshci": "qshci", "run-hci": "hci", "run-exact": "exact"}


def _space_args(p):
    p.add_argument("input", help="FCIDUMP or CIM1 matrix file")
    p.add_argument("--n-orb", type=int)
    p.add_argument("--n-alpha", type=int)
    p.add_argument("--n-beta", type=int)
    p.add_argument("--drop-tol", type=float)


def _drift_args(p):
    p.add_argument("--time", dest="t", type=float, help="evolution time (default 1)")
    p.add_argument("--na-override", type=int)
    p.add_argument("--r-override", type=int)


def _common_args(p):
    p.add_argument("--seed", type=int, help="RNG seed (falls back to $SUBQ_SEED, then 0)")
    p.add_argument("--threads", type=int, help="cap BLAS/OpenMP threads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-cim", help="build a CI matrix from an FCIDUMP and save it as CIM1")
    p.add_argument("input")
    p.add_argument("--n-alpha", type=int)
    p.add_argument("--n-beta", type=int)
    p.add_argument("--drop-tol", type=float, default=0.0)
    p.add_argument("--output", required=True)

    p = sub.add_parser("decompose", help="Pauli coefficients and qDRIFT budget of a CI matrix")
    _space_args(p)
    _drift_args(p)
    _common_args(p)
    p.add_argument("--epsilon", type=float, help="reference qDRIFT accuracy (n_c terms, r = 1)")
    p.add_argument("--dump-alpha", metavar="PATH", help="write the coefficients as a CIM1 file")
    p.add_argument("--dump-plans", metavar="PATH", help="write the sampled plans as text")

    for name, mode in RUN_MODES.items():
        p = sub.add_parser(name, help=f"{mode} ground-state run")
        _space_args(p)
        _common_args(p)
        p.add_argument("--config", help="flat key = value file; flags override it")
        p.add_argument("--output", help="directory for report.csv and stage artifacts")
        p.add_argument("--max-iter", type=int)
        if mode == "hci":
            p.add_argument("--epsilon", type=float, required=False, help="HCI tolerance")
        if mode in ("qsci", "qshci"):
            _drift_args(p)
            p.add_argument("--epsilon", dest="drift_epsilon", type=float,
                           help="reference qDRIFT accuracy (n_c terms, r = 1)")
            p.add_argument("--shots", type=int, help="shots per repetition (default 10000)")
            p.add_argument("--readout-flip-prob", type=float)
            p.add_argument("--no-recovery", dest="recovery", action="store_const", const=False)
        if mode == "qsci":
            p.add_argument("--fractions", type=lambda s: tuple(float(x) for x in s.split(",")),
                           help="comma-separated subspace fractions")
            p.add_argument("--loops", dest="n_loops", type=int)
            p.add_argument("--batches", dest="n_batches", type=int)
        if mode == "qshci":
            p.add_argument("--variance-factor", type=float)

    p = sub.add_parser("analyze", help="distance metrics between two counts files")
    p.add_argument("counts_a")
    p.add_argument("counts_b")
    p.add_argument("--output", help="directory for metrics.csv")
    return parser


def _build_cim(args):
    integrals = read_fcidump(args.input)
    n_alpha = integrals.n_alpha if args.n_alpha is None else args.n_alpha
    n_beta = integrals.n_beta if args.n_beta is None else args.n_beta
    basis = enumerate_determinants(integrals.n_orb, n_alpha, n_beta)
    cim = build_cim(basis, integrals, args.drop_tol)
    save_matrix(args.output, cim)
    print(f"n={cim.n} nnz={cim.nnz} core_energy={cim.core_energy!r}")


def _decompose(args):
    cim = load_problem(args.input, args.n_alpha, args.n_beta, args.n_orb, args.drop_tol or 0.0)
    padded, q = pad_dimension(cim)
    coeffs = fwht_coefficients(padded)
    budget = compute_budget(
        coeffs,
        1.0 if args.t is None else args.t,
        epsilon=args.epsilon,
        n_a_override=args.na_override,
        r_override=args.r_override,
    )
    n_terms = int(coeffs.nonidentity()[0].size)
    print(f"n={cim.n} q={q} q_total={q + 1} terms={n_terms} max_imag={coeffs.max_imag:.3g}")
    print(
        f"lambda={budget.lambda_norm!r} lambda_abs={budget.lambda_abs!r} "
        f"n_a={budget.n_a} r={budget.r} gate_count={budget.n_a * budget.r}"
    )
    if args.dump_alpha:
        save_alpha(args.dump_alpha, coeffs)
    if args.dump_plans:
        seed = 0 if args.seed is None else args.seed
        with open(args.dump_plans, "w") as fh:
            for plan in plan_repetitions(coeffs, budget, seed):
                fh.write(plan.to_text())


_CONFIG_KEYS = (
    "input", "n_orb", "n_alpha", "n_beta", "drop_tol", "seed", "t", "na_override", "r_override",
    "epsilon", "drift_epsilon", "shots", "readout_flip_prob", "recovery", "fractions", "n_loops",
    "n_batches", "variance_factor", "max_iter", "output", "counts_a", "counts_b",
)


def _run(args, mode):
    overrides = {k: getattr(args, k) for k in _CONFIG_KEYS if hasattr(args, k)}
    overrides["mode"] = mode
    config = load_config(getattr(args, "config", None), overrides)
    report = run(config, threads=getattr(args, "threads", None))
    if mode == "analyze":
        sys.stdout.write(report.artifacts["metrics.csv"])
    else:
        sys.stdout.write(report_text(report))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "build-cim":
            _build_cim(args)
        elif args.command == "decompose":
            _decompose(args)
        elif args.command == "analyze":
            _run(args, "analyze")
        else:
            _run(args, RUN_MODES[args.command])
    except SubqError as exc:
        stage = getattr(exc, "stage", None)
        prefix = f"{stage}: " if stage else ""
        print(f"subq: error: {prefix}{exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"subq: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
