"""Command-line interface: generate instances, analyze their structure,
run threshold sweeps, and run the acceptance suite.

Exit codes: 0 on success, 1 when a verifier or acceptance criterion fails,
2 on usage errors. All randomness flows from --seed (default: the
GNRP_SEED environment variable, else 0).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from gnrp import solvers
from gnrp.experiments import (
    GridKind,
    NoCrossing,
    SweepConfig,
    Theorem,
    run_sweep,
    threshold_crossing,
    write_records_csv,
    write_summary_json,
)
from gnrp.generator import ModelParams, generate, load_json
from gnrp.geometry import GridMode, build_grid
from gnrp.graph_core import (
    DisconnectedError,
    components,
    diameter_exact,
    is_connected,
    isolated_count,
)
from gnrp.hamilton import HamiltonCertificate, hamilton_constructive, verify_hamilton

SEED_ENV = "GNRP_SEED"
ALL_PROPS = ("clique", "alpha", "chi", "diam", "conn", "ham")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    return int(raw) if raw else 0


def parse_grid(text: str) -> tuple[float, ...]:
    """'start:stop:step' (inclusive of both ends when step divides the
    range) or a single value."""
    parts = text.split(":")
    if len(parts) == 1:
        return (float(parts[0]),)
    if len(parts) != 3:
        raise ValueError(f"grid must be 'value' or 'start:stop:step', got {text!r}")
    start, stop, step = (float(s) for s in parts)
    if step <= 0:
        raise ValueError(f"grid step must be positive, got {step}")
    if stop < start:
        raise ValueError(f"grid stop {stop} is below start {start}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 12) for i in range(count))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gnrp",
        description="Random geometric graphs with independent edge thinning.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample an instance and write it out")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--r", type=float, required=True)
    g.add_argument("--p", type=float, required=True)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", default=None, help="output path (default: stdout)")
    g.add_argument("--format", choices=("json", "edgelist"), default="json",
                   help="json keeps coordinates and channels; edgelist is lossy")

    a = sub.add_parser("analyze", help="measure properties of a saved instance")
    a.add_argument("--in", dest="path", required=True, help="instance JSON")
    a.add_argument("--props", default=",".join(ALL_PROPS),
                   help=f"comma list from {{{','.join(ALL_PROPS)}}}")
    a.add_argument("--budget", type=int, default=solvers.DEFAULT_BUDGET)
    a.add_argument("--restarts", type=int, default=20)
    a.add_argument("--out", default=None, help="report path (default: stdout)")

    s = sub.add_parser("sweep", help="Monte Carlo sweep around a threshold")
    s.add_argument("--theorem", required=True,
                   choices=[t.value.lower() for t in Theorem])
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--r", type=float, required=True)
    s.add_argument("--c", help="c grid start:stop:step with q = c ln n / n")
    s.add_argument("--K", help="K grid start:stop:step with q = K ln n / n")
    s.add_argument("--p", help="p grid start:stop:step, probabilities directly")
    s.add_argument("--trials", type=int, default=30)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--out", required=True, help="records CSV path")
    s.add_argument("--summary", default=None, help="summary JSON path")
    s.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    s.add_argument("--budget", type=int, default=solvers.DEFAULT_BUDGET)
    s.add_argument("--restarts", type=int, default=20)

    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--criteria", default=None,
                   help="comma list of criterion numbers (default: all)")
    return ap


def _cmd_generate(args) -> int:
    seed = _default_seed() if args.seed is None else args.seed
    inst = generate(ModelParams(n=args.n, r=args.r, p=args.p, seed=seed))
    if args.out is None:
        if args.format == "edgelist":
            for u, v in zip(inst.kept_u.tolist(), inst.kept_v.tolist()):
                print(u, v)
        else:
            json.dump(inst.to_json_dict(), sys.stdout)
            print()
        return 0
    if args.format == "edgelist":
        inst.save_edgelist(args.out)
    else:
        inst.save_json(args.out)
    print(f"wrote {args.out}: n={inst.params.n} r={inst.params.r} "
          f"p={inst.params.p} seed={seed} kept_edges={inst.n_kept_edges}")
    return 0


def _cmd_analyze(args) -> int:
    inst = load_json(args.path)
    props = [s.strip() for s in args.props.split(",") if s.strip()]
    unknown = [s for s in props if s not in ALL_PROPS]
    if unknown:
        raise ValueError(f"unknown props {unknown}; choose from {ALL_PROPS}")
    g = inst.graph
    report: dict = {
        "n": inst.params.n, "r": inst.params.r, "p": inst.params.p,
        "seed": inst.params.seed, "kept_edges": inst.n_kept_edges,
    }
    failures = []
    for prop in props:
        try:
            if prop == "conn":
                report["connected"] = is_connected(g)
                report["isolated"] = isolated_count(g)
                report["components"] = len(components(g))
            elif prop == "diam":
                try:
                    cells = None
                    if g.n > 4096:
                        grid = build_grid(inst.params.r / 2.0, GridMode.AT_MOST)
                        cells = grid.cell_ids(inst.points)
                    report["diameter"] = diameter_exact(g, cell_ids=cells)
                except DisconnectedError:
                    report["diameter"] = None
            elif prop == "clique":
                res = solvers.clique_lower_dense_cell(inst, budget=args.budget)
                report["clique_lower"] = res.size
            elif prop == "alpha":
                lo = solvers.alpha_lower_spaced_cells(inst, budget=args.budget)
                up = solvers.alpha_upper_cellsum(inst, budget=args.budget)
                report["alpha_lower"] = lo.size
                report["alpha_upper"] = up.value
            elif prop == "chi":
                lo, up = solvers.chromatic_sandwich(inst, budget=args.budget)
                report["chi_lower"] = lo
                report["chi_upper"] = up
            elif prop == "ham":
                out = hamilton_constructive(
                    inst, restarts=args.restarts, seed=inst.params.seed)
                ok = isinstance(out, HamiltonCertificate)
                if ok and not verify_hamilton(inst, out):
                    failures.append("ham: certificate rejected by the verifier")
                    ok = False
                report["hamiltonian"] = ok
                if not isinstance(out, HamiltonCertificate):
                    report["ham_failure_stage"] = out.stage.value
        except AssertionError as exc:  # a solver's self-check rejected a witness
            failures.append(f"{prop}: {exc}")
    if failures:
        report["verifier_failures"] = failures
    text = json.dumps(report, indent=2)
    if args.out is None:
        print(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.out}")
    for line in failures:
        print(f"verifier failure: {line}", file=sys.stderr)
    return 1 if failures else 0


def _cmd_sweep(args) -> int:
    grids = [(kind, text) for kind, text in
             ((GridKind.C, args.c), (GridKind.K, args.K), (GridKind.P, args.p))
             if text is not None]
    if len(grids) != 1:
        raise ValueError("exactly one of --c, --K, --p is required")
    kind, text = grids[0]
    seed = _default_seed() if args.seed is None else args.seed
    cfg = SweepConfig(
        theorem=Theorem[args.theorem.upper()], n=args.n, r=args.r,
        grid_kind=kind, grid=parse_grid(text), trials=args.trials,
        master_seed=seed, budget=args.budget, restarts=args.restarts,
        workers=args.workers,
    )
    records, summary = run_sweep(cfg)
    write_records_csv(records, args.out)
    if args.summary:
        write_summary_json(summary, args.summary)
    for q in summary.points:
        if q.infeasible:
            print(f"{kind.value}={q.value:g}: INFEASIBLE_POINT (p={q.p:.4f} > 1)")
        else:
            print(f"{kind.value}={q.value:g}: p={q.p:.4f} "
                  f"success={q.success_frac:.2f} mean={q.mean}")
    try:
        print(f"crossing(0.5) at {kind.value}={threshold_crossing(summary, 0.5):.4f}")
    except NoCrossing:
        pass
    print(f"wrote {args.out}" + (f" and {args.summary}" if args.summary else ""))
    return 0


def _cmd_verify(args) -> int:
    from gnrp.acceptance import run_all

    indices = None
    if args.criteria:
        indices = [int(s) for s in args.criteria.split(",") if s.strip()]
    results = run_all(indices)
    failed = [res.index for res in results if not res.passed]
    if failed:
        print(f"{len(failed)} criteria failed: {failed}")
        return 1
    print(f"all {len(results)} criteria passed")
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "analyze": _cmd_analyze,
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
}


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
