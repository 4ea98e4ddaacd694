"""The three chase engines: Oblivious, Classical DE, and Interleaved
(sequential and parallel over Conflict Graph components).

The Interleaved engine repeatedly seeds a Saturation Set, grows it by
mask-directed discovery of overlapping assignments (applying fds eagerly
after every addition), then materializes and discards it.  Parallel mode
forks one task per Conflict Graph connected component.
"""

from __future__ import annotations

import heapq
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import analysis as ana
from .assign import Assignment, initial_assignment_set, materialize
from .core import Instance, NullCounter, Scenario, is_null, is_var
from .egd import (
    ChaseFail,
    DebugInvariants,
    SetChaseState,
    apply_egds_to_termination,
    egd_slots,
)


@dataclass
class ChaseStats:
    engine: str
    n_assignments: int = 0
    n_sets: int = 0
    max_set_size: int = 0
    mean_set_size: float = 0.0
    n_merges: int = 0
    n_mask_skips: int = 0
    n_components: int = 0
    # max assignments simultaneously held in under-construction sets; for the
    # parallel engine this sums the largest per-component set over the worker
    # group that can be active at once
    peak_in_flight: int = 0
    phase_times: dict[str, float] = field(default_factory=dict)
    solution_counts: dict[str, int] = field(default_factory=dict)
    pre_solution_counts: dict[str, int] | None = None
    debug_violations: list[str] = field(default_factory=list)
    partition_ok: bool | None = None


@dataclass
class ChaseOutcome:
    stats: ChaseStats
    solution: Instance | None = None
    failure: tuple | None = None  # (fd id, (witness fact, witness fact))

    @property
    def failed(self) -> bool:
        return self.failure is not None


class _Pool:
    """Not-yet-picked assignments of one tgd, with per-conflict-area
    inverted indexes supporting mask matching."""

    __slots__ = ("tgd_id", "alive", "areas", "value_maps", "null_sets")

    def __init__(self, tgd_id: str, assignments: list[Assignment], areas: list[ana.ConflictArea]):
        self.tgd_id = tgd_id
        self.alive: dict[int, Assignment] = {a.id: a for a in assignments}
        self.areas = areas
        self.value_maps: list[list[dict]] = []
        self.null_sets: list[list[set]] = []
        for area in areas:
            vmaps = [dict() for _ in area.terms]
            nsets = [set() for _ in area.terms]
            for a in assignments:
                for i, term in enumerate(area.terms):
                    v = a.image[term.name] if is_var(term) else term
                    if is_null(v):
                        nsets[i].add(a.id)
                    else:
                        vmaps[i].setdefault(v, set()).add(a.id)
            self.value_maps.append(vmaps)
            self.null_sets.append(nsets)

    def remove(self, assignment: Assignment) -> None:
        del self.alive[assignment.id]
        for area_idx, area in enumerate(self.areas):
            vmaps = self.value_maps[area_idx]
            nsets = self.null_sets[area_idx]
            for i, term in enumerate(area.terms):
                v = assignment.image[term.name] if is_var(term) else term
                if is_null(v):
                    nsets[i].discard(assignment.id)
                else:
                    bucket = vmaps[i].get(v)
                    if bucket is not None:
                        bucket.discard(assignment.id)

    def candidates(self, mask: tuple, area_idx: int) -> list[int]:
        """Ids of alive assignments matching the mask on the given area,
        sorted; probes the most selective constant cell first."""
        area = self.areas[area_idx]
        const_cells = [i for i, c in enumerate(mask) if c is not ana.STAR]
        if not const_cells:
            return sorted(self.alive)
        vmaps = self.value_maps[area_idx]
        nsets = self.null_sets[area_idx]

        def cell_cost(i):
            return len(vmaps[i].get(mask[i], ())) + len(nsets[i])

        best = min(const_cells, key=cell_cost)
        pool_ids = set(vmaps[best].get(mask[best], ()))
        pool_ids |= nsets[best]
        if len(const_cells) == 1:
            return sorted(pool_ids)
        out = []
        alive = self.alive
        terms = area.terms
        for aid in pool_ids:
            a = alive.get(aid)
            if a is None:
                continue
            ok = True
            for i in const_cells:
                if i == best:
                    continue
                t = terms[i]
                v = a.image[t.name] if is_var(t) else t
                if v != mask[i] and not is_null(v):
                    ok = False
                    break
            if ok:
                out.append(aid)
        out.sort()
        return out


@dataclass
class _Options:
    discovery: str = "masked"  # or "naive"
    early_egds: bool = True
    mask_skip: bool = True
    debug: DebugInvariants | None = None


def build_and_chase_saturation_set(
    seed: Assignment,
    pools: dict[str, _Pool],
    scenario_analysis: ana.ScenarioAnalysis,
    slots: dict[str, list],
    options: _Options | None = None,
) -> tuple[SetChaseState, int]:
    """Grow a Saturation Set from the seed and chase it to fd-quiescence.

    Returns the chased set state and the number of pool searches skipped
    through used-mask subsumption.  Raises ChaseFail on failure.
    """
    options = options or _Options()
    graph = scenario_analysis.graph
    state = SetChaseState(slots, debug=options.debug)
    used_masks: list[tuple[str, tuple]] = []
    frontier: list[int] = []
    by_id: dict[int, Assignment] = {}
    skipped = 0

    def add(assignment: Assignment) -> None:
        pools[assignment.tgd.id].remove(assignment)
        state.add_member(assignment)
        heapq.heappush(frontier, assignment.id)
        by_id[assignment.id] = assignment
        if options.early_egds:
            apply_egds_to_termination(state, assignment)

    add(seed)
    resolve = state.resolve if options.early_egds else None
    while frontier:
        a = by_id[heapq.heappop(frontier)]
        if options.discovery == "naive":
            _discover_naive(a, pools, scenario_analysis, resolve, add)
            continue
        for area in graph.areas[a.tgd.id]:
            mask = ana.mask_of(a, area, resolve=resolve)
            if options.mask_skip and any(
                fd_id == area.fd.id and ana.subsumes(used, mask) for fd_id, used in used_masks
            ):
                skipped += 1
                continue
            # trivial conflicts: same tgd, same area
            own = pools[a.tgd.id]
            for aid in own.candidates(mask, _area_ordinal(graph, a.tgd.id, area)):
                cand = own.alive.get(aid)
                if cand is not None:
                    add(cand)
            # non-trivial conflicts via the graph: every other area on this fd
            for other in graph.areas_by_fd.get(area.fd.id, ()):
                if other is area:
                    continue
                pool = pools.get(other.tgd_id)
                if pool is None:  # tgd outside this run's component slice
                    continue
                for aid in pool.candidates(mask, _area_ordinal(graph, other.tgd_id, other)):
                    cand = pool.alive.get(aid)
                    if cand is not None:
                        add(cand)
            used_masks.append((area.fd.id, mask))
    if not options.early_egds:
        for member in state.members:
            apply_egds_to_termination(state, member)
    state.compact()
    return state, skipped


def _area_ordinal(graph: ana.ConflictGraph, tgd_id: str, area: ana.ConflictArea) -> int:
    areas = graph.areas[tgd_id]
    for i, a in enumerate(areas):
        if a is area:
            return i
    raise ValueError(f"area {area!r} not registered for tgd {tgd_id}")


def _discover_naive(a, pools, scenario_analysis, resolve, add) -> None:
    """Reference discovery: scan every pool and test overlap directly,
    without masks or the graph."""
    fds = scenario_analysis.scenario.fds
    mutables = scenario_analysis.mutables
    for pool in pools.values():
        for aid in sorted(pool.alive):
            cand = pool.alive.get(aid)
            if cand is not None and ana.overlapping(a, cand, fds, mutables, resolve1=resolve):
                add(cand)


def _build_pools(
    scenario_analysis: ana.ScenarioAnalysis,
    assignments: dict[str, list[Assignment]],
    tgd_ids=None,
) -> dict[str, _Pool]:
    graph = scenario_analysis.graph
    ids = tgd_ids if tgd_ids is not None else list(assignments)
    return {t: _Pool(t, assignments[t], graph.areas[t]) for t in ids}


def _chase_component(
    tgd_ids: list[str],
    assignments: dict[str, list[Assignment]],
    scenario_analysis: ana.ScenarioAnalysis,
    slots: dict[str, list],
    options: _Options,
):
    """Run the seed loop over one Conflict Graph component.

    Returns (facts, set_sizes, merges, skips, member_id_sets, violations).
    """
    pools = _build_pools(scenario_analysis, assignments, tgd_ids)
    order = sorted(a.id for t in tgd_ids for a in assignments[t])
    by_id = {a.id: a for t in tgd_ids for a in assignments[t]}
    facts: list[tuple] = []
    set_sizes: list[int] = []
    member_sets: list[set[int]] = []
    merges = 0
    skips = 0
    cursor = 0
    picked: set[int] = set()
    while cursor < len(order):
        aid = order[cursor]
        if aid in picked:
            cursor += 1
            continue
        seed = by_id[aid]
        state, skipped = build_and_chase_saturation_set(
            seed, pools, scenario_analysis, slots, options
        )
        skips += skipped
        merges += len(state.events)
        picked |= state.member_ids
        member_sets.append(set(state.member_ids))
        set_sizes.append(len(state.members))
        for member in state.members:
            facts.extend(materialize(member))
    violations = list(options.debug.violations) if options.debug else []
    return facts, set_sizes, merges, skips, member_sets, violations


# module-level slot for fork-based parallel workers (set right before the
# executor is created; children inherit it via fork)
_PARALLEL_WORK = None


def _parallel_worker(component_index: int):
    tgd_ids, assignments, scenario_analysis, slots, options = _PARALLEL_WORK
    try:
        result = _chase_component(
            tgd_ids[component_index], assignments, scenario_analysis, slots, options
        )
        return ("ok", result)
    except ChaseFail as exc:
        return ("fail", exc.fd_id, exc.witnesses)


def interleaved_chase(
    scenario: Scenario,
    source: Instance,
    parallel: bool = False,
    workers: int = 1,
    discovery: str = "masked",
    early_egds: bool = True,
    mask_skip: bool = True,
    debug: bool = False,
) -> ChaseOutcome:
    if workers < 1:
        raise ValueError("workers must be >= 1")
    stats = ChaseStats(engine="interleaved-parallel" if parallel else "interleaved")
    t0 = time.perf_counter()
    scenario_analysis = ana.analyze(scenario)
    slots = egd_slots(scenario)
    t1 = time.perf_counter()
    assignments = initial_assignment_set(scenario, source, NullCounter())
    t2 = time.perf_counter()
    stats.n_assignments = sum(len(v) for v in assignments.values())
    stats.n_components = len(scenario_analysis.graph.components)

    debug_ctx = None
    if debug:
        birth = {
            v.id: a.id
            for pool in assignments.values()
            for a in pool
            for v in a.image.values()
            if is_null(v)
        }
        debug_ctx = DebugInvariants(birth)
    options = _Options(discovery, early_egds, mask_skip, debug_ctx)

    solution = Instance(scenario.target)
    all_member_sets: list[set[int]] = []
    set_sizes: list[int] = []
    components = scenario_analysis.graph.components

    try:
        if not parallel:
            # global seed loop: lowest available assignment id first
            result = _chase_component(
                list(assignments), assignments, scenario_analysis, slots, options
            )
            facts, sizes, merges, skips, member_sets, violations = result
            for relation, args in facts:
                solution.add(relation, args)
            set_sizes.extend(sizes)
            stats.n_merges += merges
            stats.n_mask_skips += skips
            all_member_sets.extend(member_sets)
            stats.debug_violations.extend(violations)
            stats.peak_in_flight = max(sizes, default=0)
        else:
            comp_order = sorted(
                range(len(components)),
                key=lambda i: (-sum(len(assignments[t]) for t in components[i]), i),
            )
            ordered = [components[i] for i in comp_order]
            global _PARALLEL_WORK
            _PARALLEL_WORK = (ordered, assignments, scenario_analysis, slots, options)
            per_comp_max: list[int] = []
            try:
                import multiprocessing as mp

                ctx = mp.get_context("fork")
                with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
                    futures = [pool.submit(_parallel_worker, i) for i in range(len(ordered))]
                    for fut in futures:
                        result = fut.result()
                        if result[0] == "fail":
                            raise ChaseFail(result[1], *result[2])
                        facts, sizes, merges, skips, member_sets, violations = result[1]
                        for relation, args in facts:
                            solution.add(relation, args)
                        set_sizes.extend(sizes)
                        stats.n_merges += merges
                        stats.n_mask_skips += skips
                        all_member_sets.extend(member_sets)
                        stats.debug_violations.extend(violations)
                        per_comp_max.append(max(sizes, default=0))
            finally:
                _PARALLEL_WORK = None
            per_comp_max.sort(reverse=True)
            stats.peak_in_flight = sum(per_comp_max[:workers])
    except ChaseFail as exc:
        stats.phase_times = {
            "analysis": t1 - t0,
            "assignments": t2 - t1,
            "chase": time.perf_counter() - t2,
        }
        return ChaseOutcome(stats=stats, failure=(exc.fd_id, exc.witnesses))

    t3 = time.perf_counter()
    stats.phase_times = {"analysis": t1 - t0, "assignments": t2 - t1, "chase": t3 - t2}
    stats.n_sets = len(set_sizes)
    stats.max_set_size = max(set_sizes, default=0)
    stats.mean_set_size = (sum(set_sizes) / len(set_sizes)) if set_sizes else 0.0
    stats.solution_counts = solution.counts()
    if debug:
        seen: set[int] = set()
        disjoint = True
        for members in all_member_sets:
            if members & seen:
                disjoint = False
            seen |= members
        complete = len(seen) == stats.n_assignments and sum(map(len, all_member_sets)) == len(seen)
        stats.partition_ok = disjoint and complete
    return ChaseOutcome(stats=stats, solution=solution)


def oblivious_chase(scenario: Scenario, source: Instance, seed: int = 0) -> ChaseOutcome:
    """Arbitrary-interleaved Oblivious Chase: picks assignments in a
    seeded-random order, applying fds to termination after every pick."""
    import random

    stats = ChaseStats(engine="oblivious")
    t0 = time.perf_counter()
    assignments = initial_assignment_set(scenario, source, NullCounter())
    slots = egd_slots(scenario)
    order = [a for pool in assignments.values() for a in pool]
    random.Random(seed).shuffle(order)
    stats.n_assignments = len(order)
    state = SetChaseState(slots)
    try:
        for assignment in order:
            state.add_member(assignment)
            apply_egds_to_termination(state, assignment)
    except ChaseFail as exc:
        stats.phase_times = {"chase": time.perf_counter() - t0}
        return ChaseOutcome(stats=stats, failure=(exc.fd_id, exc.witnesses))
    state.compact()
    solution = Instance(scenario.target)
    for assignment in order:
        for relation, args in materialize(assignment):
            solution.add(relation, args)
    stats.n_merges = len(state.events)
    stats.n_sets = 1
    stats.max_set_size = stats.mean_set_size = len(order)
    stats.peak_in_flight = len(order)
    stats.phase_times = {"chase": time.perf_counter() - t0}
    stats.solution_counts = solution.counts()
    return ChaseOutcome(stats=stats, solution=solution)


def classical_chase(scenario: Scenario, source: Instance) -> ChaseOutcome:
    """Classical DE Chase: materialize the full pre-solution first, then
    apply fds to termination over the single global set."""
    stats = ChaseStats(engine="classical")
    t0 = time.perf_counter()
    assignments = initial_assignment_set(scenario, source, NullCounter())
    slots = egd_slots(scenario)
    order = [a for pool in assignments.values() for a in pool]
    stats.n_assignments = len(order)

    pre_solution = Instance(scenario.target)
    for assignment in order:
        for relation, args in materialize(assignment):
            pre_solution.add(relation, args)
    stats.pre_solution_counts = pre_solution.counts()
    t1 = time.perf_counter()

    state = SetChaseState(slots)
    for assignment in order:
        state.add_member(assignment)
    try:
        for assignment in order:
            state.enqueue_assignment(assignment)
        state.drain()
    except ChaseFail as exc:
        stats.phase_times = {"tgds": t1 - t0, "egds": time.perf_counter() - t1}
        return ChaseOutcome(stats=stats, failure=(exc.fd_id, exc.witnesses))
    state.compact()
    solution = Instance(scenario.target)
    for assignment in order:
        for relation, args in materialize(assignment):
            solution.add(relation, args)
    stats.n_merges = len(state.events)
    stats.n_sets = 1
    stats.max_set_size = stats.mean_set_size = len(order)
    stats.peak_in_flight = len(order)
    stats.phase_times = {"tgds": t1 - t0, "egds": time.perf_counter() - t1}
    stats.solution_counts = solution.counts()
    return ChaseOutcome(stats=stats, solution=solution)


def run_engine(
    engine: str,
    scenario: Scenario,
    source: Instance,
    workers: int = 1,
    parallel: bool = False,
    discovery: str = "masked",
    seed: int = 0,
    debug: bool = False,
) -> ChaseOutcome:
    if engine == "oblivious":
        return oblivious_chase(scenario, source, seed=seed)
    if engine == "classical":
        return classical_chase(scenario, source)
    if engine == "interleaved":
        return interleaved_chase(
            scenario,
            source,
            parallel=parallel,
            workers=workers,
            discovery=discovery,
            debug=debug,
        )
    raise ValueError(f"unknown engine {engine!r}")
