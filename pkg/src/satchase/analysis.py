"""Static analysis of tgd/fd interplay: mutable existentials, conflict
areas, the Conflict Graph with its connected components, conflict masks,
matching and subsumption.

All outputs are immutable after construction and shared read-only by
chase workers.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .assign import Assignment
from .core import Fd, Scenario, StTgd, Var, is_null, is_var


class _Star:
    """The wildcard mask cell (distinct from any constant, incl. the string '*')."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "*"

    def __reduce__(self):
        return (_Star, ())


STAR = _Star()


@dataclass(frozen=True)
class ConflictArea:
    """A (key-term tuple, fd) pair hosted by one head atom of a tgd."""

    tgd_id: str
    atom_index: int
    fd: Fd
    terms: tuple  # one term per fd lhs position, in position order

    def __repr__(self):
        rendered = ", ".join(t.name if is_var(t) else repr(t) for t in self.terms)
        return f"<({rendered}), {self.fd.id}>"


def _term_kind_ok(term, tgd: StTgd, mutables: set[str]) -> bool:
    """Universal variable, constant, or mutable existential."""
    if not is_var(term):
        return True
    return term.name in tgd.universals or term.name in mutables


def _key_terms(atom, fd: Fd):
    return tuple(atom.args[p - 1] for p in fd.lhs)


def compute_mutable_existentials(tgd: StTgd, fds: list[Fd]) -> set[str]:
    """Least fixpoint of the inductive mutable-existential definition."""
    mutables: set[str] = set()
    slots = []  # (key terms, rhs existential names, atom index, relation)
    for idx, atom in enumerate(tgd.head):
        for fd in fds:
            if fd.relation != atom.relation:
                continue
            rhs_vars = {
                atom.args[p - 1].name
                for p in fd.rhs
                if is_var(atom.args[p - 1]) and atom.args[p - 1].name in tgd.existentials
            }
            slots.append((_key_terms(atom, fd), rhs_vars, idx, atom.relation, fd))
    changed = True
    while changed:
        changed = False
        for key_terms, rhs_vars, idx, relation, fd in slots:
            if rhs_vars <= mutables:
                continue
            qualifies = all(_term_kind_ok(t, tgd, mutables) for t in key_terms)
            if not qualifies:
                for other_terms, _, other_idx, other_rel, other_fd in slots:
                    if other_idx == idx or other_rel != relation or other_fd is not fd:
                        continue
                    if all(
                        (_term_kind_ok(t, tgd, mutables) and _term_kind_ok(u, tgd, mutables))
                        or t == u
                        for t, u in zip(key_terms, other_terms)
                    ):
                        qualifies = True
                        break
            if qualifies and not rhs_vars <= mutables:
                mutables |= rhs_vars
                changed = True
    return mutables


def compute_conflict_areas(tgd: StTgd, fds: list[Fd], mutables: set[str] | None = None) -> list[ConflictArea]:
    """One area per (fd, qualifying head atom), in (atom, fd) declaration order."""
    if mutables is None:
        mutables = compute_mutable_existentials(tgd, fds)
    areas = []
    for idx, atom in enumerate(tgd.head):
        for fd in fds:
            if fd.relation != atom.relation:
                continue
            terms = _key_terms(atom, fd)
            if all(_term_kind_ok(t, tgd, mutables) for t in terms):
                areas.append(ConflictArea(tgd.id, idx, fd, terms))
    return areas


@dataclass
class ConflictGraph:
    """Tgd vertices adorned with conflict areas; edges mark non-trivial
    conflicts (shared fd between distinct tgds, or distinct areas of one tgd
    as a self-loop)."""

    vertices: list[str]
    areas: dict[str, list[ConflictArea]]
    edges: set[frozenset]
    self_loops: set[str]
    components: list[list[str]]
    areas_by_fd: dict[str, list[ConflictArea]] = field(default_factory=dict)

    def neighbours(self, tgd_id: str) -> list[str]:
        out = [v for v in self.vertices if v != tgd_id and frozenset((tgd_id, v)) in self.edges]
        if tgd_id in self.self_loops:
            out.append(tgd_id)
        return out

    def component_of(self, tgd_id: str) -> int:
        for i, comp in enumerate(self.components):
            if tgd_id in comp:
                return i
        raise KeyError(tgd_id)


def build_conflict_graph(scenario: Scenario) -> ConflictGraph:
    mutables = {t.id: compute_mutable_existentials(t, scenario.fds) for t in scenario.tgds}
    areas = {
        t.id: compute_conflict_areas(t, scenario.fds, mutables[t.id]) for t in scenario.tgds
    }
    areas_by_fd: dict[str, list[ConflictArea]] = {}
    for t in scenario.tgds:
        for area in areas[t.id]:
            areas_by_fd.setdefault(area.fd.id, []).append(area)

    edges: set[frozenset] = set()
    self_loops: set[str] = set()
    for fd_id, fd_areas in areas_by_fd.items():
        for i, a1 in enumerate(fd_areas):
            for a2 in fd_areas[i:]:
                if a1.tgd_id != a2.tgd_id:
                    edges.add(frozenset((a1.tgd_id, a2.tgd_id)))
                elif a1 is not a2:
                    self_loops.add(a1.tgd_id)

    order = [t.id for t in scenario.tgds]
    index = {v: i for i, v in enumerate(order)}
    seen: set[str] = set()
    components: list[list[str]] = []
    adjacency: dict[str, set[str]] = {v: set() for v in order}
    for edge in edges:
        u, v = tuple(edge)
        adjacency[u].add(v)
        adjacency[v].add(u)
    for v in order:
        if v in seen:
            continue
        comp = []
        queue = deque([v])
        seen.add(v)
        while queue:
            u = queue.popleft()
            comp.append(u)
            for w in sorted(adjacency[u], key=index.get):
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        components.append(sorted(comp, key=index.get))
    return ConflictGraph(order, areas, edges, self_loops, components, areas_by_fd)


@dataclass
class ScenarioAnalysis:
    """Bundle of all static-analysis products for one scenario."""

    scenario: Scenario
    mutables: dict[str, set[str]]
    graph: ConflictGraph

    @property
    def areas(self) -> dict[str, list[ConflictArea]]:
        return self.graph.areas


def analyze(scenario: Scenario) -> ScenarioAnalysis:
    graph = build_conflict_graph(scenario)
    mutables = {t.id: compute_mutable_existentials(t, scenario.fds) for t in scenario.tgds}
    return ScenarioAnalysis(scenario, mutables, graph)


def mask_of(assignment: Assignment, area: ConflictArea, resolve=None) -> tuple:
    """Cellwise image of the area terms: constants kept, nulls become *."""
    cells = []
    for term in area.terms:
        value = assignment.image[term.name] if is_var(term) else term
        if resolve is not None and is_null(value):
            value = resolve(value)
        cells.append(STAR if is_null(value) else value)
    return tuple(cells)


def matches(assignment: Assignment, mask: tuple, area: ConflictArea, resolve=None) -> bool:
    """True iff on every constant cell the assignment holds that constant or
    a null."""
    image = assignment.image
    for cell, term in zip(mask, area.terms):
        if cell is STAR:
            continue
        value = image[term.name] if is_var(term) else term
        if resolve is not None and is_null(value):
            value = resolve(value)
        if value != cell and not is_null(value):
            return False
    return True


def subsumes(m1: tuple, m2: tuple) -> bool:
    """Cellwise: m1 is * or equal to m2's cell."""
    return all(c1 is STAR or c1 == c2 for c1, c2 in zip(m1, m2))


def overlapping(
    a1: Assignment,
    a2: Assignment,
    fds: list[Fd],
    mutables: dict[str, set[str]],
    resolve1=None,
    resolve2=None,
) -> bool:
    """Direct overlap test between two distinct assignments, enumerating
    fd/head-atom pairs (no masks, no graph); the oracle side of the
    conflict-plus-matching characterization."""
    if a1.id == a2.id:
        return False
    m1, m2 = a1.tgd, a2.tgd
    mut1, mut2 = mutables[m1.id], mutables[m2.id]
    for fd in fds:
        atoms1 = [a for a in m1.head if a.relation == fd.relation]
        atoms2 = [a for a in m2.head if a.relation == fd.relation]
        for r1 in atoms1:
            terms1 = _key_terms(r1, fd)
            if not all(_term_kind_ok(t, m1, mut1) for t in terms1):
                continue
            values1 = []
            for t in terms1:
                v = a1.image[t.name] if is_var(t) else t
                if resolve1 is not None and is_null(v):
                    v = resolve1(v)
                values1.append(v)
            for r2 in atoms2:
                terms2 = _key_terms(r2, fd)
                if not all(_term_kind_ok(t, m2, mut2) for t in terms2):
                    continue
                ok = True
                for v1, t2 in zip(values1, terms2):
                    v2 = a2.image[t2.name] if is_var(t2) else t2
                    if resolve2 is not None and is_null(v2):
                        v2 = resolve2(v2)
                    if not is_null(v1) and not is_null(v2) and v1 != v2:
                        ok = False
                        break
                if ok:
                    return True
    return False


def dump_graph(graph: ConflictGraph) -> str:
    """Deterministic text listing of the Conflict Graph (for golden tests)."""
    index = {v: i for i, v in enumerate(graph.vertices)}
    lines = ["conflict graph"]
    for i, v in enumerate(graph.vertices, start=1):
        lines.append(f"vertex v{i} tgd={v}")
        for area in graph.areas[v]:
            rendered = ",".join(t.name if is_var(t) else repr(t) for t in area.terms)
            lines.append(f"  area atom={area.atom_index + 1} fd={area.fd.id} terms=({rendered})")
    for edge in sorted(
        (sorted(e, key=index.get) for e in graph.edges), key=lambda e: (index[e[0]], index[e[1]])
    ):
        lines.append(f"edge v{index[edge[0]] + 1} -- v{index[edge[1]] + 1}")
    for v in sorted(graph.self_loops, key=index.get):
        lines.append(f"selfloop v{index[v] + 1}")
    for i, comp in enumerate(graph.components, start=1):
        lines.append(f"component {i}: " + " ".join(f"v{index[v] + 1}" for v in comp))
    return "\n".join(lines) + "\n"
