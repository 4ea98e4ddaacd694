"""Synthetic benchmark families and the timing harness.

Three scenario families of increasing head complexity:

- ``of``: each tgd copies a keyed source relation into a shared hub
  relation carrying existential payload columns, with an fd keyed on the
  hub's first column.
- ``of+``: adds a second head atom keyed on an existential, so fd keys
  are mutable and merges cascade one level.
- ``of++``: adds a third chained head atom for two-level cascades.

Tgds are grouped into batches; tgds of a batch write the same hub
relation and therefore share fds, so every batch is one connected
component of the Conflict Graph.  A fusion-rate fraction of source keys
is shared between the tgds of a batch, which is what makes assignments
actually collide at run time.
"""

from __future__ import annotations

import csv
import random
import time
from dataclasses import dataclass
from pathlib import Path

from .chase import run_engine
from .core import Atom, Fd, Instance, Schema, Scenario, StTgd, Var

FAMILIES = ("of", "of+", "of++")


@dataclass
class ScenarioSpec:
    family: str = "of"
    tgds: int = 30
    fds: int = 10
    rows: int = 50_000
    existentials: int = 3  # payload columns per hub tuple
    batches: int | None = None  # Conflict Graph components; default one per fd group
    fusion: float = 0.10  # fraction of source keys shared within a batch
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if not 0.0 <= self.fusion <= 1.0:
            raise ValueError("fusion must be in [0, 1]")
        if self.tgds < 1 or self.fds < 1 or self.rows < 1 or self.existentials < 1:
            raise ValueError("tgds, fds, rows and existentials must be positive")


def _fds_per_batch(family: str) -> int:
    return {"of": 1, "of+": 2, "of++": 3}[family]


def generate_scenario(spec: ScenarioSpec) -> tuple[Scenario, Instance]:
    """Build the scenario and a source instance, deterministically from the
    spec's seed."""
    rng = random.Random(spec.seed)
    per_batch = _fds_per_batch(spec.family)
    n_batches = spec.batches if spec.batches is not None else max(1, spec.fds // per_batch)
    if n_batches > spec.tgds:
        raise ValueError("more batches than tgds")
    p = spec.existentials

    source, target = Schema(), Schema()
    tgds: list[StTgd] = []
    fds: list[Fd] = []

    # round-robin tgd -> batch so batch sizes differ by at most one
    batch_of = [i % n_batches for i in range(spec.tgds)]
    fd_budget = spec.fds

    for b in range(n_batches):
        hub = f"T{b}"
        target.add(hub, ("k", *[f"e{j}" for j in range(p)]))
        if fd_budget > 0:
            fds.append(Fd(id=f"f{len(fds)}", relation=hub, lhs=(1,), rhs=tuple(range(2, p + 2))))
            fd_budget -= 1
        if spec.family in ("of+", "of++"):
            target.add(f"V{b}", ("z", "w"))
            if fd_budget > 0:
                fds.append(Fd(id=f"f{len(fds)}", relation=f"V{b}", lhs=(1,), rhs=(2,)))
                fd_budget -= 1
        if spec.family == "of++":
            target.add(f"U{b}", ("w", "w2"))
            if fd_budget > 0:
                fds.append(Fd(id=f"f{len(fds)}", relation=f"U{b}", lhs=(1,), rhs=(2,)))
                fd_budget -= 1
    # leftover fd budget: extra single-column fds on the first hubs
    extra = 0
    while fd_budget > 0:
        hub = f"T{extra % n_batches}"
        col = 2 + extra // n_batches % p
        fds.append(Fd(id=f"f{len(fds)}", relation=hub, lhs=(1,), rhs=(col,)))
        fd_budget -= 1
        extra += 1

    for i in range(spec.tgds):
        b = batch_of[i]
        rel = f"S{i}"
        source.add(rel, ("k", "c"))
        x, y = Var("x"), Var("y")
        zs = [Var(f"z{j}") for j in range(p)]
        head = [Atom(f"T{b}", (x, *zs))]
        if spec.family in ("of+", "of++"):
            head.append(Atom(f"V{b}", (zs[0], Var("w"))))
        if spec.family == "of++":
            head.append(Atom(f"U{b}", (Var("w"), Var("w2"))))
        tgds.append(StTgd(id=f"m{i}", body=[Atom(rel, (x, y))], head=head))

    scenario = Scenario(source=source, target=target, tgds=tgds, fds=fds)

    instance = Instance(source)
    base_rows = spec.rows // spec.tgds
    leftover_rows = spec.rows - base_rows * spec.tgds
    shared_pool = max(1, int(base_rows * spec.fusion))
    for i in range(spec.tgds):
        b = batch_of[i]
        n = base_rows + (1 if i < leftover_rows else 0)
        for r in range(n):
            if rng.random() < spec.fusion:
                key = f"b{b}_shared{rng.randrange(shared_pool)}"
            else:
                key = f"b{b}_t{i}_r{r}"
            instance.add(f"S{i}", (key, f"c{i}_{r}"))
    return scenario, instance


@dataclass
class BenchRow:
    engine: str
    family: str
    tgds: int
    fds: int
    rows: int
    seed: int
    repeat: int
    elapsed: float
    status: str  # ok | fail | timeout
    solution_size: int = 0
    n_sets: int = 0
    max_set_size: int = 0
    n_merges: int = 0
    n_mask_skips: int = 0
    peak_in_flight: int = 0


CSV_FIELDS = [f.name for f in BenchRow.__dataclass_fields__.values()]


def _one_run(engine: str, spec: ScenarioSpec, workers: int, parallel: bool, conn) -> None:
    scenario, instance = generate_scenario(spec)
    t0 = time.perf_counter()
    outcome = run_engine(engine, scenario, instance, workers=workers, parallel=parallel)
    elapsed = time.perf_counter() - t0
    stats = outcome.stats
    conn.send(
        {
            "elapsed": elapsed,
            "status": "fail" if outcome.failed else "ok",
            "solution_size": len(outcome.solution) if outcome.solution is not None else 0,
            "n_sets": stats.n_sets,
            "max_set_size": stats.max_set_size,
            "n_merges": stats.n_merges,
            "n_mask_skips": stats.n_mask_skips,
            "peak_in_flight": stats.peak_in_flight,
        }
    )


def timed_run(
    engine: str,
    spec: ScenarioSpec,
    workers: int = 1,
    parallel: bool = False,
    timeout: float = 600.0,
) -> dict:
    """Run one engine on one generated scenario in a forked child so the
    timeout can actually kill it; returns a result dict."""
    import multiprocessing as mp

    ctx = mp.get_context("fork")
    parent, child = ctx.Pipe(duplex=False)
    proc = ctx.Process(target=_one_run, args=(engine, spec, workers, parallel, child))
    proc.start()
    child.close()
    result = None
    if parent.poll(timeout):
        result = parent.recv()
    proc.join(timeout=5.0)
    if result is None:
        proc.terminate()
        proc.join()
        return {"elapsed": timeout, "status": "timeout", "solution_size": 0,
                "n_sets": 0, "max_set_size": 0, "n_merges": 0,
                "n_mask_skips": 0, "peak_in_flight": 0}
    return result


def run_benchmark(
    specs: list[ScenarioSpec],
    engines: list[str],
    out_path: str | Path,
    repeats: int = 3,
    warmup: bool = True,
    timeout: float = 600.0,
    workers: int = 1,
    parallel: bool = False,
) -> list[BenchRow]:
    """Time every engine on every spec; the first repeat is a discarded
    warm-up unless disabled.  Appends nothing: the CSV is rewritten whole."""
    rows: list[BenchRow] = []
    total = repeats + (1 if warmup else 0)
    for spec in specs:
        for engine in engines:
            for rep in range(total):
                result = timed_run(engine, spec, workers=workers, parallel=parallel,
                                   timeout=timeout)
                if warmup and rep == 0:
                    continue
                rows.append(
                    BenchRow(
                        engine=engine,
                        family=spec.family,
                        tgds=spec.tgds,
                        fds=spec.fds,
                        rows=spec.rows,
                        seed=spec.seed,
                        repeat=rep - (1 if warmup else 0),
                        **result,
                    )
                )
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: getattr(row, k) for k in CSV_FIELDS})
    return rows
