"""Acceptance gate: one test per acceptance criterion, each printing a
single pass/fail line.  Run with ``pytest -s tests/test_acceptance.py`` to
see the lines as they appear."""

import os
import random
import statistics
import time

import pytest

from helpers import early_egd_scenario, mutables_tgd, random_scenario, researcher_scenario, researcher_source
from satchase import analysis as ana
from satchase.assign import initial_assignment_set
from satchase.bench import ScenarioSpec, generate_scenario
from satchase.chase import (
    _build_pools,
    _Options,
    build_and_chase_saturation_set,
    classical_chase,
    interleaved_chase,
    oblivious_chase,
)
from satchase.core import NullCounter
from satchase.egd import ChaseFail, egd_slots
from satchase.iso import is_isomorphic
from test_analysis import RESEARCHER_GRAPH
from test_chase import collision_closure


def report(num: int, desc: str, ok: bool) -> None:
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'} - {desc}")
    assert ok, f"criterion {num} failed: {desc}"


def test_criterion_1_worked_example_goldens():
    scenario, source = researcher_scenario(), researcher_source()
    t0 = time.perf_counter()
    inter = interleaved_chase(scenario, source)
    classical = classical_chase(scenario, source)
    elapsed = time.perf_counter() - t0
    ok = (
        inter.solution.counts() == {"Researcher": 7, "Research_Prize": 4}
        and classical.stats.pre_solution_counts == {"Researcher": 11, "Research_Prize": 5}
        and elapsed < 1.0
    )
    report(1, f"worked-example solution 7+4, pre-solution 11+5, {elapsed:.3f}s < 1s", ok)


def test_criterion_2_static_analysis_goldens():
    tgd, fds = mutables_tgd()
    muts = ana.compute_mutable_existentials(tgd, fds)
    graph = ana.build_conflict_graph(researcher_scenario())
    ok = muts == {"C", "G", "D", "M", "N"} and ana.dump_graph(graph) == RESEARCHER_GRAPH
    report(2, "mutable existentials {C,G,D,M,N} and conflict graph golden", ok)


def test_criterion_3_early_egds_shrink_sets():
    scenario, source = early_egd_scenario()
    result = ana.analyze(scenario)
    slots = egd_slots(scenario)

    def set_size(early: bool) -> int:
        assignments = initial_assignment_set(scenario, source, NullCounter())
        pools = _build_pools(result, assignments)
        state, _ = build_and_chase_saturation_set(
            assignments["m1"][0], pools, result, slots, _Options(early_egds=early)
        )
        return len(state.members)

    early, late = set_size(True), set_size(False)
    report(3, f"saturation set: {early} members with early fds, {late} without", early == 2 and late == 3)


def test_criterion_4_engine_differential():
    t0 = time.perf_counter()
    n = 0
    ok = True
    detail = ""
    for seed in range(200):
        rng = random.Random(seed * 7919 + 13)
        scenario, source = random_scenario(rng)
        n += 1
        outs = [
            oblivious_chase(scenario, source, seed=seed % 11),
            classical_chase(scenario, source),
            interleaved_chase(scenario, source),
            interleaved_chase(scenario, source, discovery="naive"),
        ]
        if len({o.failed for o in outs}) != 1:
            ok, detail = False, f"fail/success disagreement at seed {seed}"
            break
        if not outs[0].failed:
            base = outs[0].solution
            if not all(is_isomorphic(base, o.solution) for o in outs[1:]):
                ok, detail = False, f"non-isomorphic solutions at seed {seed}"
                break
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 60.0
    report(4, detail or f"{n} random scenarios, 4 engines agree up to iso, {elapsed:.1f}s < 60s", ok)


def test_criterion_5_saturation_soundness():
    checked = 0
    ok = True
    detail = ""
    for seed in range(120):
        rng = random.Random(seed * 104729 + 7)
        scenario, source = random_scenario(rng)
        result = ana.analyze(scenario)
        slots = egd_slots(scenario)
        assignments = initial_assignment_set(scenario, source, NullCounter())
        flat = [a for pool in assignments.values() for a in pool]
        if not flat:
            continue
        pools = _build_pools(result, assignments)
        try:
            state, _ = build_and_chase_saturation_set(
                flat[0], pools, result, slots, _Options(early_egds=False)
            )
            oracle = collision_closure(flat[0].id, scenario, source)
        except ChaseFail:
            continue
        checked += 1
        if not oracle <= state.member_ids:
            ok, detail = False, f"collision group escaped the set at seed {seed}"
            break
    ok = ok and checked >= 50
    report(5, detail or f"collision-closure oracle contained in saturation set on {checked} scenarios", ok)


def test_criterion_6_debug_invariants():
    ok = True
    detail = ""
    # confinement and partition on the worked example and random scenarios
    runs = [(researcher_scenario(), researcher_source())]
    for seed in range(30):
        runs.append(random_scenario(random.Random(seed * 31 + 5)))
    for scenario, source in runs:
        out = interleaved_chase(scenario, source, debug=True)
        if out.failed:
            continue
        if out.stats.debug_violations or out.stats.partition_ok is not True:
            ok, detail = False, "confinement or partition violated"
            break
    if ok:
        # disabling mask subsumption must not change any set
        for seed in range(20):
            scenario, source = random_scenario(random.Random(seed * 53 + 1))
            with_skip = interleaved_chase(scenario, source, mask_skip=True)
            without = interleaved_chase(scenario, source, mask_skip=False)
            if with_skip.failed != without.failed:
                ok, detail = False, "mask skip changed failure status"
                break
            if with_skip.failed:
                continue
            if (
                with_skip.solution != without.solution
                or with_skip.stats.n_sets != without.stats.n_sets
                or with_skip.stats.max_set_size != without.stats.max_set_size
            ):
                ok, detail = False, "mask skip changed set structure"
                break
    report(6, detail or "confinement, partition and mask-skip no-op hold across runs", ok)


def test_criterion_7_scaling():
    times = {}
    # warm caches before measuring
    interleaved_chase(*generate_scenario(ScenarioSpec(family="of", tgds=30, fds=10, rows=2000, seed=0)))
    for rows in (50_000, 100_000, 200_000, 400_000):
        spec = ScenarioSpec(family="of", tgds=30, fds=10, rows=rows, seed=0)
        scenario, instance = generate_scenario(spec)
        t0 = time.perf_counter()
        out = interleaved_chase(scenario, instance)
        times[rows] = time.perf_counter() - t0
        assert not out.failed
    ratios = [times[2 * r] / times[r] for r in (50_000, 100_000, 200_000)]
    ok = times[400_000] <= 120.0 and all(r <= 2.6 for r in ratios)
    report(
        7,
        f"50K..400K rows: {times[400_000]:.1f}s at 400K (<=120s), "
        f"doubling ratios {['%.2f' % r for r in ratios]} (<=2.6)",
        ok,
    )


def test_criterion_8_parallel_speedup():
    if (os.cpu_count() or 1) < 2:
        print("criterion 8: FAIL - parallel speedup unattainable on a single-core host")
        pytest.xfail("host exposes fewer than 2 cpu cores; parallel speedup cannot manifest")
    spec = ScenarioSpec(family="of", tgds=30, fds=10, rows=200_000, batches=5, seed=0)
    scenario, instance = generate_scenario(spec)
    graph = ana.build_conflict_graph(scenario)
    assert len(graph.components) == 5

    def median_time(workers: int) -> float:
        samples = []
        for _ in range(5):
            t0 = time.perf_counter()
            out = interleaved_chase(scenario, instance, parallel=True, workers=workers)
            samples.append(time.perf_counter() - t0)
            assert not out.failed
        return statistics.median(samples)

    t1, t4 = median_time(1), median_time(4)
    speedup = t1 / t4
    report(8, f"5 components, 200K rows: {speedup:.2f}x speedup with 4 workers (>=1.5)", speedup >= 1.5)


def test_criterion_9_peak_in_flight():
    spec = ScenarioSpec(family="of", tgds=30, fds=10, rows=50_000, seed=0)
    scenario, instance = generate_scenario(spec)
    inter = interleaved_chase(scenario, instance)
    classical = classical_chase(scenario, instance)
    peak, total = inter.stats.peak_in_flight, classical.stats.peak_in_flight
    report(9, f"interleaved peak {peak} assignments in flight vs classical {total}", 0 < peak < total)
