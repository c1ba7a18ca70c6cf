"""Experiment loop: generate, weight, solve, persist, analyze.

Records live in an append-only length-prefixed line file so interrupted
sweeps resume without duplicating work; every record carries the full
penalty-weight provenance and enough graph metadata to be regenerated and
audited from its seeds.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional, Sequence

from . import penalty, qubo, solvers
from ._rng import derive_seed
from .graph import Graph, density, generate_er, max_degree

STORE_HEADER = "mbpkit-records v1"


class StoreVersionError(RuntimeError):
    """Record file has a different schema version than this code."""


@dataclass(frozen=True)
class GraphInfo:
    n: int
    p: Optional[float]
    seed: Optional[int]
    density: float
    max_degree: int
    edge_count: int

    @classmethod
    def of(cls, g: Graph) -> "GraphInfo":
        return cls(n=g.node_count,
                   p=g.gen_meta.edge_probability if g.gen_meta else None,
                   seed=g.gen_meta.seed if g.gen_meta else None,
                   density=density(g), max_degree=max_degree(g),
                   edge_count=g.edge_count)


@dataclass(frozen=True)
class ExperimentRecord:
    record_id: str
    graph: GraphInfo
    lambda_spec: Optional[penalty.LambdaSpec]
    solver_id: str
    inter_edges: int
    balanced: bool
    balance_deviation: int
    energy: float
    wall_time_qubo_build: float
    wall_time_solve: float
    solver_seed: Optional[int]
    created_at: str
    pre_repair_balanced: Optional[bool] = None

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "graph": vars(self.graph).copy(),
            "lambda_spec": self.lambda_spec.to_dict() if self.lambda_spec else None,
            "solver_id": self.solver_id,
            "inter_edges": self.inter_edges,
            "balanced": self.balanced,
            "balance_deviation": self.balance_deviation,
            "energy": self.energy,
            "wall_time_qubo_build": self.wall_time_qubo_build,
            "wall_time_solve": self.wall_time_solve,
            "solver_seed": self.solver_seed,
            "created_at": self.created_at,
            "pre_repair_balanced": self.pre_repair_balanced,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentRecord":
        return cls(
            record_id=d["record_id"],
            graph=GraphInfo(**d["graph"]),
            lambda_spec=penalty.LambdaSpec.from_dict(d["lambda_spec"]) if d.get("lambda_spec") else None,
            solver_id=d["solver_id"],
            inter_edges=d["inter_edges"],
            balanced=d["balanced"],
            balance_deviation=d["balance_deviation"],
            energy=d["energy"],
            wall_time_qubo_build=d["wall_time_qubo_build"],
            wall_time_solve=d["wall_time_solve"],
            solver_seed=d.get("solver_seed"),
            created_at=d["created_at"],
            pre_repair_balanced=d.get("pre_repair_balanced"),
        )


class RecordStore:
    """Append-only record file.  Each line is `<nbytes> <json>`; a torn final
    line (crash mid-append) is skipped with a warning, never an error."""

    def __init__(self, path):
        self.path = Path(path)
        self.warnings = 0
        if self.path.exists():
            with self.path.open() as fh:
                head = fh.readline().rstrip("\n")
            if head != STORE_HEADER:
                raise StoreVersionError(
                    f"{self.path}: expected header {STORE_HEADER!r}, found {head!r}")
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text(STORE_HEADER + "\n")

    def append(self, record: ExperimentRecord) -> None:
        payload = json.dumps(record.to_dict(), sort_keys=True)
        line = f"{len(payload.encode())} {payload}\n"
        with self.path.open("a") as fh:
            fh.write(line)
            fh.flush()

    def scan(self, n: Optional[int] = None, p: Optional[float] = None,
             solver_id: Optional[str] = None, strategy: Optional[str] = None) -> list[ExperimentRecord]:
        self.warnings = 0
        records = []
        with self.path.open() as fh:
            header = fh.readline().rstrip("\n")
            if header != STORE_HEADER:
                raise StoreVersionError(
                    f"{self.path}: expected header {STORE_HEADER!r}, found {header!r}")
            for raw in fh:
                record = self._parse_line(raw)
                if record is None:
                    continue
                if n is not None and record.graph.n != n:
                    continue
                if p is not None and record.graph.p != p:
                    continue
                if solver_id is not None and record.solver_id != solver_id:
                    continue
                if strategy is not None and (
                        record.lambda_spec is None or record.lambda_spec.strategy != strategy):
                    continue
                records.append(record)
        return records

    def _parse_line(self, raw: str) -> Optional[ExperimentRecord]:
        line = raw.rstrip("\n")
        if not line:
            return None
        size_text, _, payload = line.partition(" ")
        try:
            size = int(size_text)
            if len(payload.encode()) != size or not raw.endswith("\n"):
                raise ValueError("torn record")
            return ExperimentRecord.from_dict(json.loads(payload))
        except (ValueError, KeyError, json.JSONDecodeError):
            self.warnings += 1
            return None

    def existing_ids(self) -> set:
        return {r.record_id for r in self.scan()}


def graph_key(g: Graph) -> str:
    if g.gen_meta is not None:
        return f"er-n{g.node_count}-p{g.gen_meta.edge_probability}-s{g.gen_meta.seed}"
    digest = hashlib.blake2b(
        ("\n".join(f"{i} {j}" for i, j in g.sorted_edges()) + f"|{g.node_count}").encode(),
        digest_size=6).hexdigest()
    return f"g-{digest}"


def strategy_tag(spec: Optional[penalty.LambdaSpec]) -> str:
    if spec is None:
        return "trivial"
    if spec.strategy == penalty.EST_TIMES_MULT:
        return f"mult:{spec.multiplier}"
    if spec.strategy == penalty.FIXED:
        return f"fixed:{spec.value}"
    return spec.strategy.lower()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def run_instance(g: Graph, strategy: penalty.LambdaStrategy, solver_ids: Sequence[str],
                 store: Optional[RecordStore] = None, master_seed: int = 0,
                 sa_params: Optional[solvers.SaParams] = None) -> list[ExperimentRecord]:
    """Resolve the weight once, build the matrix at most once, run each solver.

    An edgeless graph short-circuits to a single trivial record (any balanced
    split is optimal); a strategy that cannot be resolved raises before any
    solver runs."""
    info = GraphInfo.of(g)
    gkey = graph_key(g)
    if g.edge_count == 0:
        record = ExperimentRecord(
            record_id=f"{gkey}|trivial|trivial", graph=info, lambda_spec=None,
            solver_id="trivial", inter_edges=0, balanced=True, balance_deviation=0,
            energy=0.0, wall_time_qubo_build=0.0, wall_time_solve=0.0,
            solver_seed=None, created_at=_now())
        if store is not None:
            store.append(record)
        return [record]

    spec = penalty.resolve_lambda(g, strategy)
    tag = strategy_tag(spec)
    q = None
    build_time = 0.0
    if any(solvers.get_backend(s).info.needs_qubo for s in solver_ids):
        t0 = time.perf_counter()
        q = qubo.build_mbp_qubo(g, spec.value)
        build_time = time.perf_counter() - t0

    records = []
    for solver_id in solver_ids:
        needs_q = solvers.get_backend(solver_id).info.needs_qubo
        seed = derive_seed(master_seed, gkey, tag, solver_id)
        result = solvers.solve_with(solver_id, g, lam=spec.value, q=q if needs_q else None,
                                    seed=seed, params=sa_params)
        record = ExperimentRecord(
            record_id=f"{gkey}|{tag}|{solver_id}", graph=info, lambda_spec=spec,
            solver_id=solver_id, inter_edges=result.inter_edges,
            balanced=result.balanced, balance_deviation=result.balance_deviation,
            energy=result.energy, wall_time_qubo_build=build_time if needs_q else 0.0,
            wall_time_solve=result.wall_time, solver_seed=seed, created_at=_now(),
            pre_repair_balanced=result.extras.get("pre_repair_balanced"))
        records.append(record)
        if store is not None:
            store.append(record)
    return records


def solve_once(g: Graph, strategy: penalty.LambdaStrategy, solver_id: str,
               seed: int, sa_params: Optional[solvers.SaParams] = None,
               store: Optional[RecordStore] = None) -> ExperimentRecord:
    """One explicit solve with a caller-chosen seed (the CLI path)."""
    info = GraphInfo.of(g)
    gkey = graph_key(g)
    if g.edge_count == 0:
        record = ExperimentRecord(
            record_id=f"{gkey}|trivial|trivial", graph=info, lambda_spec=None,
            solver_id="trivial", inter_edges=0, balanced=True, balance_deviation=0,
            energy=0.0, wall_time_qubo_build=0.0, wall_time_solve=0.0,
            solver_seed=None, created_at=_now())
        if store is not None:
            store.append(record)
        return record
    spec = penalty.resolve_lambda(g, strategy)
    needs_q = solvers.get_backend(solver_id).info.needs_qubo
    q = None
    build_time = 0.0
    if needs_q:
        t0 = time.perf_counter()
        q = qubo.build_mbp_qubo(g, spec.value)
        build_time = time.perf_counter() - t0
    result = solvers.solve_with(solver_id, g, lam=spec.value, q=q, seed=seed,
                                params=sa_params)
    record = ExperimentRecord(
        record_id=f"{gkey}|{strategy_tag(spec)}|{solver_id}", graph=info,
        lambda_spec=spec, solver_id=solver_id, inter_edges=result.inter_edges,
        balanced=result.balanced, balance_deviation=result.balance_deviation,
        energy=result.energy, wall_time_qubo_build=build_time,
        wall_time_solve=result.wall_time, solver_seed=seed, created_at=_now(),
        pre_repair_balanced=result.extras.get("pre_repair_balanced"))
    if store is not None:
        store.append(record)
    return record


@dataclass
class SweepOutcome:
    records: list[ExperimentRecord] = field(default_factory=list)
    skipped: int = 0
    errors: list[str] = field(default_factory=list)


def sweep(n_list: Sequence[int], p_list: Sequence[float], seeds_per_cell: int,
          solver_ids: Sequence[str], store: RecordStore, master_seed: int = 0,
          multipliers: Optional[Sequence[float]] = None,
          sa_params: Optional[solvers.SaParams] = None, jobs: int = 1) -> SweepOutcome:
    """Full factorial over (n, p, seed, multiplier); multiplier default is
    the per-size candidate table.  Already-present record ids are skipped,
    so an interrupted sweep resumes cleanly; per-instance failures are
    collected, not fatal."""
    outcome = SweepOutcome()
    existing = store.existing_ids()

    cells = []
    for n in n_list:
        mult_set = tuple(multipliers) if multipliers is not None else penalty.lambda_mult_candidates(n)
        for p in p_list:
            for rep in range(seeds_per_cell):
                seed = derive_seed(master_seed, "graph", n, p, rep)
                for mult in mult_set:
                    cells.append((n, p, rep, seed, mult))

    def run_cell(cell):
        n, p, rep, seed, mult = cell
        g = generate_er(n, p, seed)
        gkey = graph_key(g)
        if g.edge_count == 0:
            wanted = [f"{gkey}|trivial|trivial"]
        else:
            wanted = [f"{gkey}|mult:{mult}|{s}" for s in solver_ids]
        if all(w in existing for w in wanted):
            return ("skipped", len(wanted), None)
        try:
            records = run_instance(g, penalty.LambdaStrategy(kind="mult", mult=mult),
                                   solver_ids, store=None, master_seed=master_seed,
                                   sa_params=sa_params)
            return ("done", records, None)
        except Exception as exc:  # per-cell failures become report lines
            return ("error", None, f"n={n} p={p} rep={rep} mult={mult}: {exc}")

    if jobs <= 1:
        results = map(run_cell, cells)
        for status, payload, err in results:
            _collect(outcome, store, existing, status, payload, err)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for status, payload, err in pool.map(run_cell, cells):
                _collect(outcome, store, existing, status, payload, err)
    return outcome


def _collect(outcome: SweepOutcome, store: RecordStore, existing: set,
             status: str, payload, err: Optional[str]) -> None:
    if status == "skipped":
        outcome.skipped += payload
    elif status == "error":
        outcome.errors.append(err)
    else:
        for record in payload:
            if record.record_id in existing:
                outcome.skipped += 1
                continue
            store.append(record)
            existing.add(record.record_id)
            outcome.records.append(record)


@dataclass(frozen=True)
class LambdaRangeRow:
    graph_key: str
    n: int
    density: float
    lambda_est: float
    lambda_min: float
    lambda_max: float

    def __post_init__(self):
        if self.lambda_min > self.lambda_max:
            raise ValueError("lambda_min must not exceed lambda_max")


def extract_lambda_ranges(records: Iterable[ExperimentRecord],
                          solver_id: Optional[str] = None) -> tuple[list[LambdaRangeRow], int]:
    """Per graph, the multiplier range attaining the minimal inter-edges
    among balanced multiplier-sweep results.  Graphs with no balanced result
    are excluded; the second return value counts them."""
    groups: dict[str, list[ExperimentRecord]] = {}
    for r in records:
        if solver_id is not None and r.solver_id != solver_id:
            continue
        if r.lambda_spec is None or r.lambda_spec.strategy != penalty.EST_TIMES_MULT:
            continue
        groups.setdefault(graph_key_of_record(r), []).append(r)

    rows = []
    excluded = 0
    for gkey in sorted(groups):
        balanced = [r for r in groups[gkey] if r.balanced]
        if not balanced:
            excluded += 1
            continue
        best_cut = min(r.inter_edges for r in balanced)
        winners = [r.lambda_spec.multiplier for r in balanced if r.inter_edges == best_cut]
        sample = balanced[0]
        rows.append(LambdaRangeRow(
            graph_key=gkey, n=sample.graph.n, density=sample.graph.density,
            lambda_est=sample.lambda_spec.lambda_est,
            lambda_min=min(winners), lambda_max=max(winners)))
    return rows, excluded


def graph_key_of_record(r: ExperimentRecord) -> str:
    if r.graph.p is not None and r.graph.seed is not None:
        return f"er-n{r.graph.n}-p{r.graph.p}-s{r.graph.seed}"
    return r.record_id.split("|", 1)[0]


@dataclass(frozen=True)
class HeatmapCell:
    n: int
    density_bucket: float
    runs: int
    successes: int

    @property
    def rate(self) -> float:
        return self.successes / self.runs


@dataclass(frozen=True)
class SuccessHeatmap:
    cells: tuple[HeatmapCell, ...]
    total_runs: int

    def to_csv_rows(self) -> list[list]:
        rows = [["nodes", "density", "runs", "successes", "rate"]]
        for c in self.cells:
            rows.append([c.n, c.density_bucket, c.runs, c.successes, f"{c.rate:.6f}"])
        return rows


def success_heatmap(records: Iterable[ExperimentRecord],
                    solver_id: Optional[str] = None) -> SuccessHeatmap:
    """Success = balanced and matching the per-graph minimal inter-edges
    found anywhere in the sweep; rates bucketed by (n, density to 1 decimal)."""
    considered = [r for r in records
                  if (solver_id is None or r.solver_id == solver_id)
                  and r.lambda_spec is not None
                  and r.lambda_spec.strategy == penalty.EST_TIMES_MULT]
    best: dict[str, int] = {}
    for r in considered:
        key = graph_key_of_record(r)
        if r.balanced and (key not in best or r.inter_edges < best[key]):
            best[key] = r.inter_edges

    buckets: dict[tuple[int, float], list[int]] = {}
    for r in considered:
        key = graph_key_of_record(r)
        success = r.balanced and key in best and r.inter_edges == best[key]
        bucket = (r.graph.n, round(r.graph.density, 1))
        buckets.setdefault(bucket, []).append(1 if success else 0)

    cells = tuple(HeatmapCell(n=n, density_bucket=dens, runs=len(v), successes=sum(v))
                  for (n, dens), v in sorted(buckets.items()))
    return SuccessHeatmap(cells=cells, total_runs=len(considered))


@dataclass(frozen=True)
class CompareRow:
    n: int
    avg_density: float
    baseline_balanced_pct: float
    subject_better_pct: float
    abs_diff: float
    perc_diff: float
    graphs: int


@dataclass(frozen=True)
class CompareReport:
    baseline_id: str
    subject_id: str
    rows: tuple[CompareRow, ...]
    skipped_groups: int

    def to_csv_rows(self) -> list[list]:
        rows = [["nodes", "avg_density", "baseline_balanced_pct", "subject_better_pct",
                 "abs_diff", "perc_diff", "graphs"]]
        for r in self.rows:
            rows.append([r.n, f"{r.avg_density:.6f}", f"{r.baseline_balanced_pct:.2f}",
                         f"{r.subject_better_pct:.2f}", f"{r.abs_diff:.4f}",
                         f"{r.perc_diff:.4f}", r.graphs])
        return rows


def compare_report(records: Iterable[ExperimentRecord], baseline_id: str,
                   subject_id: str) -> CompareReport:
    """Per-n comparison table.

    For each graph the subject and baseline collapse to their best run
    (minimum inter-edges, balanced runs preferred).  Per n bucket:
    average density, percent of baseline runs balanced (pre-repair balance
    when the solver reports it), percent of graphs where the subject is
    strictly better, |avg(subject) - avg(baseline)|, and
    (avg(baseline) - avg(subject)) / avg(subject) * 100."""
    groups: dict[str, dict] = {}
    for r in records:
        if r.solver_id not in (baseline_id, subject_id):
            continue
        entry = groups.setdefault(graph_key_of_record(r), {})
        entry.setdefault(r.solver_id, []).append(r)

    per_n: dict[int, list] = {}
    skipped = 0
    for gkey in sorted(groups):
        entry = groups[gkey]
        if baseline_id not in entry or subject_id not in entry:
            skipped += 1
            continue
        base = _best_record(entry[baseline_id])
        subj = _best_record(entry[subject_id])
        base_balanced = base.pre_repair_balanced if base.pre_repair_balanced is not None else base.balanced
        per_n.setdefault(base.graph.n, []).append(
            (base.graph.density, base.inter_edges, subj.inter_edges, base_balanced))

    rows = []
    for n in sorted(per_n):
        group = per_n[n]
        avg_base = sum(t[1] for t in group) / len(group)
        avg_subj = sum(t[2] for t in group) / len(group)
        better = sum(1 for t in group if t[2] < t[1])
        balanced = sum(1 for t in group if t[3])
        perc = 0.0 if avg_subj == 0 else (avg_base - avg_subj) / avg_subj * 100.0
        rows.append(CompareRow(
            n=n, avg_density=sum(t[0] for t in group) / len(group),
            baseline_balanced_pct=100.0 * balanced / len(group),
            subject_better_pct=100.0 * better / len(group),
            abs_diff=abs(avg_subj - avg_base), perc_diff=perc, graphs=len(group)))
    return CompareReport(baseline_id=baseline_id, subject_id=subject_id,
                         rows=tuple(rows), skipped_groups=skipped)


def _best_record(records: list[ExperimentRecord]) -> ExperimentRecord:
    balanced = [r for r in records if r.balanced]
    pool = balanced if balanced else records
    return min(pool, key=lambda r: r.inter_edges)


def store_digest(records: Iterable[ExperimentRecord]) -> str:
    """Hash of the record set with timing/timestamp fields removed; equal
    digests mean a sweep reproduced identically."""
    cleaned = []
    for r in sorted(records, key=lambda r: r.record_id):
        d = r.to_dict()
        d.pop("created_at")
        d.pop("wall_time_qubo_build")
        d.pop("wall_time_solve")
        cleaned.append(d)
    blob = json.dumps(cleaned, sort_keys=True).encode()
    return hashlib.blake2b(blob, digest_size=16).hexdigest()


def audit_record(record: ExperimentRecord) -> list[str]:
    """Recompute what can be recomputed from the stored seeds; returns a
    list of discrepancies (empty = clean)."""
    problems = []
    if record.graph.p is None or record.graph.seed is None:
        return problems
    g = generate_er(record.graph.n, record.graph.p, record.graph.seed)
    if g.edge_count != record.graph.edge_count:
        problems.append(f"edge_count {g.edge_count} != {record.graph.edge_count}")
    if abs(density(g) - record.graph.density) > 1e-12:
        problems.append(f"density {density(g)} != {record.graph.density}")
    if max_degree(g) != record.graph.max_degree:
        problems.append(f"max_degree {max_degree(g)} != {record.graph.max_degree}")
    if not record.balanced and record.balance_deviation == 0:
        problems.append("balanced flag inconsistent with deviation")
    return problems


def replay_record(record: ExperimentRecord,
                  sa_params: Optional[solvers.SaParams] = None) -> list[str]:
    """Full audit: re-run the stored solver with the stored seed and compare
    the result fields (stochastic solvers replay exactly via their seed)."""
    problems = audit_record(record)
    if record.graph.p is None or record.graph.seed is None or record.solver_id == "trivial":
        return problems
    g = generate_er(record.graph.n, record.graph.p, record.graph.seed)
    lam = record.lambda_spec.value if record.lambda_spec else None
    result = solvers.solve_with(record.solver_id, g, lam=lam,
                                seed=record.solver_seed, params=sa_params)
    if result.inter_edges != record.inter_edges:
        problems.append(f"inter_edges {result.inter_edges} != {record.inter_edges}")
    if result.balanced != record.balanced:
        problems.append("balanced flag differs on replay")
    return problems
