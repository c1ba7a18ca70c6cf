"""Command-line entry point.

Subcommands cover the whole pipeline: generate graphs, solve single
instances, run factorial sweeps, train the multiplier regressors, predict
weights for new graphs, emit comparison/heatmap reports, and benchmark the
sweep kernels.

Exit codes: 0 ok, 2 usage or bad values, 3 unresolvable penalty strategy,
4 solver capability exceeded, 5 bad or insufficient data.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

from . import gbr, harness, penalty, qubo, solvers
from .graph import GraphFormatError, generate_er, load_graph, save_graph

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_STRATEGY = 3
EXIT_CAPABILITY = 4
EXIT_DATA = 5


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _print_config(args)
    try:
        return args.func(args)
    except penalty.StrategyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STRATEGY
    except solvers.CapabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (GraphFormatError, harness.StoreVersionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, solvers.UnknownBackendError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _print_config(args) -> None:
    shown = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    print("config:", json.dumps(shown, default=str))


def _add_sa_flags(sub) -> None:
    sub.add_argument("--sweeps", type=int, default=2000)
    sub.add_argument("--restarts", type=int, default=8)
    sub.add_argument("--cooling", type=float, default=0.97)
    sub.add_argument("--t-initial", type=float, default=None,
                     help="initial temperature (default: auto-calibrated)")
    sub.add_argument("--t-final", type=float, default=None,
                     help="temperature floor (default: 1e-3 * initial)")


def _sa_params(args) -> solvers.SaParams:
    return solvers.SaParams(sweeps=args.sweeps, restarts=args.restarts,
                            cooling=args.cooling, t_initial=args.t_initial,
                            t_final=args.t_final)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mbp", description="Minimum-bisection experiment toolkit")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("generate", help="write a seeded random graph to an edge-list file")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--prob", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = subs.add_parser("solve", help="solve one instance with one backend")
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--solver", required=True,
                   help=f"one of: {', '.join(solvers.backend_ids())}")
    p.add_argument("--lambda-strategy", default="est",
                   help="maxcut | est | mult:<v> | gbr:<modeldir> | fixed:<v>")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--store", default=None, help="append the record to this store file")
    _add_sa_flags(p)
    p.set_defaults(func=cmd_solve)

    p = subs.add_parser("sweep", help="factorial experiment sweep (resumable)")
    p.add_argument("--nodes-list", required=True, help="comma-separated node counts")
    p.add_argument("--probs-list", required=True, help="comma-separated edge probabilities")
    p.add_argument("--seeds-per-cell", type=int, default=1)
    p.add_argument("--multipliers", default="table1",
                   help="'table1' (per-size candidates) or a comma-separated list")
    p.add_argument("--solvers", default="hybrid-standin", help="comma-separated backend ids")
    p.add_argument("--store", required=True)
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1, help="concurrent sweep cells")
    _add_sa_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = subs.add_parser("train", help="extract multiplier ranges and train the regressors")
    p.add_argument("--store", required=True)
    p.add_argument("--model-out", required=True, help="directory for the model files")
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--solver", default="hybrid-standin",
                   help="which solver's sweep records to learn from")
    p.set_defaults(func=cmd_train)

    p = subs.add_parser("predict", help="predict a penalty weight for a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--models", required=True, help="directory holding the model files")
    p.set_defaults(func=cmd_predict)

    p = subs.add_parser("report", help="comparison table and success heatmap CSVs")
    p.add_argument("--store", required=True)
    p.add_argument("--baseline", default="multilevel")
    p.add_argument("--subject", default="hybrid-standin")
    p.add_argument("--out", default=None, help="comparison CSV path")
    p.add_argument("--heatmap-out", default=None, help="success-rate CSV path")
    p.add_argument("--heatmap-solver", default="hybrid-standin")
    p.set_defaults(func=cmd_report)

    p = subs.add_parser("bench", help="time the compiled sweep kernel against the pure twin")
    p.add_argument("--nodes", type=int, default=400)
    p.add_argument("--prob", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sweeps", type=int, default=200)
    p.add_argument("--restarts", type=int, default=2)
    p.set_defaults(func=cmd_bench)

    return parser


def cmd_generate(args) -> int:
    g = generate_er(args.nodes, args.prob, args.seed)
    save_graph(g, args.out)
    print(f"wrote {args.out}: n={g.node_count} m={g.edge_count}")
    return EXIT_OK


def _load_strategy(args) -> penalty.LambdaStrategy:
    text = args.lambda_strategy
    if text.startswith("gbr:"):
        model_dir = Path(text[4:])
        models = (gbr.load_model(model_dir / "gbr_min.txt"),
                  gbr.load_model(model_dir / "gbr_max.txt"))
        return penalty.LambdaStrategy(kind="gbr", models=models)
    return penalty.LambdaStrategy.parse(text)


def cmd_solve(args) -> int:
    g = load_graph(args.graph)
    strategy = _load_strategy(args)
    store = harness.RecordStore(args.store) if args.store else None
    record = harness.solve_once(g, strategy, args.solver, seed=args.seed,
                                sa_params=_sa_params(args), store=store)
    spec = record.lambda_spec
    print(f"graph: n={record.graph.n} m={record.graph.edge_count} "
          f"density={record.graph.density:.4f} maxdeg={record.graph.max_degree}")
    if spec is not None:
        print(f"lambda: strategy={spec.strategy} value={spec.value:.6g} "
              f"est={spec.lambda_est} mult={spec.multiplier} bounds={spec.bounds} "
              f"gbr_pred={spec.gbr_pred}")
    else:
        print("lambda: trivial instance (no edges), skipped")
    print(f"solver: {record.solver_id} seed={record.solver_seed}")
    print(f"result: cut={record.inter_edges} balanced={record.balanced} "
          f"deviation={record.balance_deviation} energy={record.energy:.6g}")
    print(f"time: qubo_build={record.wall_time_qubo_build:.3f}s "
          f"solve={record.wall_time_solve:.3f}s")
    return EXIT_OK


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t]


def cmd_sweep(args) -> int:
    store = harness.RecordStore(args.store)
    multipliers = None if args.multipliers == "table1" else _float_list(args.multipliers)
    outcome = harness.sweep(
        n_list=_int_list(args.nodes_list), p_list=_float_list(args.probs_list),
        seeds_per_cell=args.seeds_per_cell, solver_ids=args.solvers.split(","),
        store=store, master_seed=args.master_seed, multipliers=multipliers,
        sa_params=_sa_params(args), jobs=args.jobs)
    print(f"sweep: {len(outcome.records)} new records, {outcome.skipped} skipped, "
          f"{len(outcome.errors)} errors")
    for err in outcome.errors:
        print(f"  error: {err}", file=sys.stderr)
    if outcome.errors and not outcome.records and not outcome.skipped:
        return EXIT_DATA
    return EXIT_OK


def cmd_train(args) -> int:
    store = harness.RecordStore(args.store)
    rows, excluded = harness.extract_lambda_ranges(store.scan(), solver_id=args.solver)
    print(f"ranges: {len(rows)} graphs usable, {excluded} excluded (no balanced result)")
    if len(rows) < 10:
        print(f"error: need at least 10 usable rows to train, have {len(rows)}",
              file=sys.stderr)
        return EXIT_DATA
    report = gbr.train_lambda_models(rows, split_seed=args.split_seed)
    out = Path(args.model_out)
    out.mkdir(parents=True, exist_ok=True)
    gbr.save_model(report.model_min, out / "gbr_min.txt")
    gbr.save_model(report.model_max, out / "gbr_max.txt")
    metrics = {
        "n_train": report.n_train, "n_test": report.n_test,
        "split_seed": report.split_seed,
        "min": report.metrics_min.to_dict(), "max": report.metrics_max.to_dict(),
    }
    (out / "metrics.json").write_text(json.dumps(metrics, indent=2) + "\n")
    print(f"lambda_min model: rmse={report.metrics_min.rmse:.4f} "
          f"mae={report.metrics_min.mae:.4f} r2={report.metrics_min.r2:.4f}")
    print(f"lambda_max model: rmse={report.metrics_max.rmse:.4f} "
          f"mae={report.metrics_max.mae:.4f} r2={report.metrics_max.r2:.4f}")
    print(f"models written to {out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    g = load_graph(args.graph)
    model_dir = Path(args.models)
    spec = penalty.lambda_from_gbr(gbr.load_model(model_dir / "gbr_min.txt"),
                                   gbr.load_model(model_dir / "gbr_max.txt"), g)
    print(json.dumps(spec.to_dict(), indent=2))
    return EXIT_OK


def _write_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)


def _print_table(rows) -> None:
    widths = [max(len(str(r[c])) for r in rows) for c in range(len(rows[0]))]
    for r in rows:
        print("  ".join(str(v).ljust(w) for v, w in zip(r, widths)))


def cmd_report(args) -> int:
    store = harness.RecordStore(args.store)
    records = store.scan()
    if args.out:
        report = harness.compare_report(records, args.baseline, args.subject)
        rows = report.to_csv_rows()
        _write_csv(args.out, rows)
        print(f"comparison ({args.subject} vs {args.baseline}), "
              f"{report.skipped_groups} unpaired graphs skipped:")
        _print_table(rows)
    if args.heatmap_out:
        heatmap = harness.success_heatmap(records, solver_id=args.heatmap_solver)
        rows = heatmap.to_csv_rows()
        _write_csv(args.heatmap_out, rows)
        print(f"success heatmap for {args.heatmap_solver} ({heatmap.total_runs} runs):")
        _print_table(rows)
    if not args.out and not args.heatmap_out:
        print("nothing to do: pass --out and/or --heatmap-out")
    return EXIT_OK


def cmd_bench(args) -> int:
    from .solvers import _sa_pure
    try:
        from .solvers import _sa_core
    except ImportError:
        _sa_core = None
    g = generate_er(args.nodes, args.prob, args.seed)
    lam = penalty.lambda_est(g) * 0.1
    params = solvers.SaParams(sweeps=args.sweeps, restarts=args.restarts)
    print(f"bench: n={args.nodes} p={args.prob} sweeps={args.sweeps} "
          f"restarts={args.restarts} lambda={lam:.4g}")
    rows = [["kernel", "variant", "seconds", "energy", "cut", "balanced"]]
    variants = [("pure", _sa_pure)] + ([("compiled", _sa_core)] if _sa_core else [])
    for name, module in variants:
        t0 = time.perf_counter()
        res = solvers.solve_sa_mbp(g, lam, params=params, seed=args.seed, kernels=module)
        dt = time.perf_counter() - t0
        rows.append(["sa-mbp", name, f"{dt:.3f}", f"{res.energy:.6g}",
                     res.inter_edges, res.balanced])
    q = qubo.build_mbp_qubo(g, lam)
    for name, module in variants:
        t0 = time.perf_counter()
        res = solvers.solve_sa(q, params=params, seed=args.seed, graph=g, kernels=module)
        dt = time.perf_counter() - t0
        rows.append(["sa", name, f"{dt:.3f}", f"{res.energy:.6g}",
                     res.inter_edges, res.balanced])
    _print_table(rows)
    if _sa_core is None:
        print("compiled kernel not available; showing pure-Python timings only")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
