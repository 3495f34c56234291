"""Command-line interface: ``qchi2 <subcommand> ...``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 an oracle
verdict failed.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from . import tolerances as tol
from .chi2stat import run_test
from .errors import NumericalError, ValidationError
from .gof import divergence_rate, expected_statistic, required_samples
from .oracle import (
    SweepConfig,
    random_density,
    random_povm,
    verify_lemma1,
    verify_split_dominance,
    verify_xi,
)
from .operators import maximally_mixed, pure_state, validate_density
from .povm import degrees_of_freedom, induced_distribution, optimal_povm
from .simulator import PRNG_NAME, power_curve, sample_record

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_ORACLE = 0, 2, 3, 4


def _g(x):
    return f"{x:.6g}"


def _options(args, skip=("out", "func", "command")):
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _manifest(args, inputs=()):
    return io.manifest(args.command, inputs, getattr(args, "seed", None), _options(args))


# -- subcommands -------------------------------------------------------------


def cmd_xi(args):
    sigma = io.load_state(args.state)
    res = divergence_rate(sigma)
    df = sigma.dim**2 - 1
    n_req = required_samples(sigma, df, args.epsilon, args.alpha)
    print(f"xi        {_g(res.xi)}")
    print(f"mu(S)     {_g(res.mu_S)}")
    print(f"dim       {sigma.dim}")
    if res.rank_deficient:
        print("note      sigma is rank-deficient; xi uses its exact eigenvalues")
    print(f"n_req     {n_req.n}  (eps={_g(args.epsilon)}, df={df}, alpha={_g(args.alpha)})")
    doc = {
        "manifest": _manifest(args, [args.state]),
        "xi": res.xi,
        "mu_S": res.mu_S,
        "dim": sigma.dim,
        "rank_deficient": res.rank_deficient,
        "regularized": res.regularized,
        "required_samples": {
            "epsilon": args.epsilon,
            "alpha": args.alpha,
            "df": df,
            "n": n_req.n,
            "raw": n_req.raw,
            "critical_value": n_req.critical_value,
        },
    }
    if args.out:
        io.write_json(args.out, doc)
    return EXIT_OK


def cmd_optimal_povm(args):
    sigma = io.load_state(args.state)
    opt = optimal_povm(sigma, regularize_deficient=args.regularize)
    doc = {
        "manifest": _manifest(args, [args.state]),
        "xi": opt.xi,
        "df": opt.df,
        "rank_deficient": opt.rank_deficient,
        "regularized": opt.regularized,
        "basis_construction": opt.bases.construction,
        "basis_seed": opt.bases.seed,
        "exact": opt.exact,
        **io.design_to_json(opt.design),
        "flattened": io.povm_to_json(opt.povm),
    }
    print(f"xi        {_g(opt.xi)}")
    print(f"elements  {opt.povm.size}")
    print(f"df        {opt.df}")
    print(f"bases     {opt.bases.construction}" + ("" if opt.exact else " (not optimal)"))
    if opt.rank_deficient:
        print("note      sigma is rank-deficient" + ("; regularized" if opt.regularized else ""))
    io.write_json(args.out, doc)
    return EXIT_OK


def cmd_simulate(args):
    plan = io.load_plan(args.plan)
    if args.seed is not None:
        plan = type(plan)(plan.design, plan.rho, plan.n_total, args.seed)
    record = sample_record(plan)
    doc = io.record_to_json(record, PRNG_NAME)
    doc["seed"] = int(plan.seed)
    doc["manifest"] = io.manifest(args.command, [args.plan], int(plan.seed), _options(args))
    io.write_json(args.out, doc)
    return EXIT_OK


def cmd_test(args):
    record = io.load_record(args.record)
    sigma = io.load_state(args.state)
    rep = run_test(record, sigma, args.alpha, args.two_sided)
    print(f"statistic {_g(rep.statistic)}")
    print(f"df        {rep.df}")
    if rep.two_sided:
        print(f"accept    ({_g(rep.critical_value_low)}, {_g(rep.critical_value)})")
    else:
        print(f"critical  {_g(rep.critical_value)}")
    print(f"p-value   {_g(rep.p_value)}")
    print(f"decision  {rep.decision.value}")
    if rep.small_count_warning:
        print("warning   some expected counts are below 5")
    if args.out:
        io.write_json(args.out, {"manifest": _manifest(args, [args.record, args.state]), **rep.to_dict()})
    return EXIT_OK


def _verify_reports(args):
    checks = ["lemma1", "xi", "split"] if args.all else [c for c in ("lemma1", "xi", "split") if getattr(args, c)]
    if not checks:
        raise ValidationError("choose at least one of --lemma1, --xi, --split, --all")
    dims = {"lemma1": [2, 3, 4], "xi": [2, 3], "split": [2, 3]}
    reports = []
    for check in checks:
        for d in [args.dim] if args.dim else dims[check]:
            cfg = SweepConfig(args.trials, args.seed, d)
            sigma = random_density(d, args.seed + 1000 * d)
            if check == "lemma1":
                rho = random_density(d, args.seed + 1000 * d + 1)
                rep = verify_lemma1(sigma, rho, cfg)
            elif check == "xi":
                rep = verify_xi(sigma, cfg)
            else:
                povm = random_povm(d, 3, args.seed + 1000 * d + 2)
                rep = verify_split_dominance(povm, sigma, cfg)
            reports.append((check, d, rep))
    return reports


def cmd_verify(args):
    reports = _verify_reports(args)
    for check, d, rep in reports:
        verdict = "PASS" if rep.verdict else "FAIL"
        print(f"{verdict}  {check:<7} D={d}  closed_form={_g(rep.closed_form)}  empirical={_g(rep.empirical)}  gap={_g(rep.gap)}")
    if args.out:
        doc = {
            "manifest": _manifest(args),
            "reports": [{"check": c, "dim": d, **r.to_dict()} for c, d, r in reports],
        }
        io.write_json(args.out, doc)
    return EXIT_OK if all(r.verdict for _, _, r in reports) else EXIT_ORACLE


def xi_table():
    """Rows ``(case, dim, parameter, closed_form, computed, abs_error)``."""
    rows = []

    def add(case, state, param, closed):
        computed = divergence_rate(state).xi
        rows.append((case, state.dim, param, closed, computed, abs(closed - computed)))

    add("pure", pure_state([1, 0]), "", 1.0)
    add("rank2_equal", validate_density(np.diag([0.5, 0.5, 0.0])), "", 2 / 3)
    for d in range(2, 9):
        add("maximally_mixed", maximally_mixed(d), "", d / (d + 1))
    for k in range(5, 11):
        l1 = k / 10
        l2 = 1 - l1
        add("qubit", validate_density(np.diag([l1, l2])), repr(l1), 1 / (1 + 2 * l1 * l2))
    return rows


def qubit_example(epsilon=0.1):
    """``sigma = diag(0.7, 0.3)`` and ``rho`` displaced by ``epsilon`` along ``sigma_x / sqrt 2``."""
    sigma = validate_density(np.diag([0.7, 0.3]))
    x = np.array([[0, 1], [1, 0]]) / np.sqrt(2)
    return sigma, validate_density(sigma.matrix + epsilon * x)


def cmd_paper_examples(args):
    outdir = Path(args.out or "paper_examples")
    outdir.mkdir(parents=True, exist_ok=True)
    header_line = "# manifest: " + json.dumps(_manifest(args), sort_keys=True)

    rows = xi_table()
    print(f"{'case':<16}{'D':>3} {'lambda1':>8} {'closed_form':>12} {'computed':>12} {'abs_error':>10}")
    for case, d, param, closed, comp, err in rows:
        print(f"{case:<16}{d:>3} {param:>8} {_g(closed):>12} {_g(comp):>12} {err:>10.2g}")
    with open(outdir / "xi_examples.csv", "w", newline="") as fh:
        fh.write(header_line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["case", "dim", "lambda1", "closed_form", "computed", "abs_error"])
        for case, d, param, closed, comp, err in rows:
            w.writerow([case, d, param, repr(closed), repr(comp), repr(err)])

    sigma, rho = qubit_example(args.epsilon)
    opt = optimal_povm(sigma)
    df = degrees_of_freedom(opt.design)
    p = induced_distribution(opt.povm, sigma)
    q = induced_distribution(opt.povm, rho)
    grid = [50, 100, 200, 400, 800, 1600, 3200]
    curve = power_curve(sigma, rho, opt.design, args.alpha, grid, args.trials, args.seed, args.two_sided)
    with open(outdir / "qubit_power_curve.csv", "w", newline="") as fh:
        fh.write(header_line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "rejection_rate", "expected_statistic", "df"])
        for n, rate in curve:
            w.writerow([n, repr(rate), repr(expected_statistic(p, q, n)), df])
    print()
    print(f"qubit power curve (sigma=diag(0.7,0.3), eps={_g(args.epsilon)}, alpha={_g(args.alpha)}, trials={args.trials})")
    for n, rate in curve:
        print(f"  n={n:<5} rejection={_g(rate)}")
    print(f"wrote {outdir / 'xi_examples.csv'} and {outdir / 'qubit_power_curve.csv'}")
    worst = max(r[5] for r in rows)
    return EXIT_OK if worst <= 1e-9 else EXIT_NUMERICAL


def _detect_kind(doc):
    if "rho" in doc and "n" in doc:
        return "plan"
    groups = doc.get("groups")
    if isinstance(groups, list) and groups and "counts" in groups[0]:
        return "record"
    if isinstance(groups, list):
        return "design"
    if "elements" in doc:
        return "povm"
    if "matrix" in doc:
        return "state"
    raise ValidationError("unrecognized document: expected a state, POVM, design, plan or record")


def cmd_validate(args):
    doc = io.read_json(args.file)
    if not isinstance(doc, dict):
        raise ValidationError("top-level JSON value must be an object")
    kind = _detect_kind(doc)
    if kind == "state":
        s = io.state_from_json(doc, args.file)
        print(f"valid state: dim {s.dim}, rank-deficient {not s.is_full_rank}")
    elif kind == "povm":
        p = io.povm_from_json(doc, args.file)
        print(f"valid POVM: dim {p.dim}, {p.size} elements")
    elif kind == "design":
        d = io.design_from_json(doc, args.file)
        print(f"valid design: dim {d.dim}, {len(d.groups)} groups, df {degrees_of_freedom(d)}")
    elif kind == "plan":
        pl = io.plan_from_json(doc, args.file)
        print(f"valid plan: n {pl.n_total}, seed {pl.seed}, shots per group {list(map(int, pl.shots))}")
    else:
        r = io.record_from_json(doc, args.file)
        print(f"valid record: {r.n_total} shots in {len(r.totals)} groups")
    return EXIT_OK


# -- argument parsing --------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-psd", type=float, default=None, help="override the PSD tolerance")
    common.add_argument("--out", default=None, help="output file (directory for paper-examples)")

    parser = argparse.ArgumentParser(prog="qchi2", description="Quantum chi-squared goodness-of-fit testing.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("xi", parents=[common], help="divergence rate of a state")
    p.add_argument("state")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_xi)

    p = sub.add_parser("optimal-povm", parents=[common], help="optimal measurement design for a state")
    p.add_argument("state")
    p.add_argument("--regularize", action="store_true", help="regularize a rank-deficient state first")
    p.set_defaults(func=cmd_optimal_povm)

    p = sub.add_parser("simulate", parents=[common], help="sample a record from a plan")
    p.add_argument("plan")
    p.add_argument("--seed", type=int, default=None, help="override the plan's seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("test", parents=[common], help="chi-squared test of a record against a state")
    p.add_argument("record")
    p.add_argument("state")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--two-sided", action="store_true")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("verify", parents=[common], help="run brute-force oracles")
    p.add_argument("--lemma1", action="store_true")
    p.add_argument("--xi", action="store_true")
    p.add_argument("--split", action="store_true")
    p.add_argument("--all", action="store_true")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("paper-examples", parents=[common], help="closed-form xi table and qubit power curve")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--two-sided", action="store_true")
    p.set_defaults(func=cmd_paper_examples)

    p = sub.add_parser("validate", parents=[common], help="check a JSON input file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    saved_psd = tol.PSD
    if args.tol_psd is not None:
        tol.PSD = args.tol_psd
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationError, ValueError, KeyError, TypeError, OSError) as exc:
        name = type(exc).__name__
        print(f"invalid input: {name}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ArithmeticError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    finally:
        tol.PSD = saved_psd


if __name__ == "__main__":
    sys.exit(main())
