"""Body-assignment enumeration and full-assignment construction.

A full assignment maps every body and head variable of its tgd to a
constant or null; universals keep the values of the originating body
match, existentials start as pairwise-distinct fresh nulls.
"""

from __future__ import annotations

from .core import (
    Atom,
    Instance,
    NullCounter,
    Scenario,
    StTgd,
    Var,
    is_var,
)


class Assignment:
    """A full s-t tgd assignment with a mutable variable -> value image."""

    __slots__ = ("id", "tgd", "image")

    def __init__(self, aid: int, tgd: StTgd, image: dict):
        self.id = aid
        self.tgd = tgd
        self.image = image

    def value(self, term):
        """Image of a term: constants map to themselves."""
        return self.image[term.name] if is_var(term) else term

    def __repr__(self):
        return f"Assignment(a{self.id}:{self.tgd.id})"


def _sort_key(value):
    return (type(value).__name__, value)


def _atom_plan(atom: Atom, bound: set[str]):
    """Split an atom's positions into constant checks, bound-var key
    positions and new-var extraction positions (first occurrence per var)."""
    const_checks = []
    key_positions = []
    new_vars = []
    repeats = []
    seen: dict[str, int] = {}
    for pos, term in enumerate(atom.args):
        if is_var(term):
            if term.name in seen:
                repeats.append((seen[term.name], pos))
            else:
                seen[term.name] = pos
                if term.name in bound:
                    key_positions.append((term.name, pos))
                else:
                    new_vars.append((term.name, pos))
        else:
            const_checks.append((pos, term))
    return const_checks, key_positions, new_vars, repeats


def compute_body_assignments(tgd: StTgd, source: Instance) -> list[dict]:
    """All maps a over body variables with source |= body(a), deduplicated
    and deterministically ordered (sorted by assigned values).

    Atoms are joined with hash indexes, in declaration order with a greedy
    bound-variable reordering; self-joins are supported.
    """
    remaining = list(tgd.body)
    bound: set[str] = set()
    partials: list[dict] = [{}]
    while remaining and partials:
        atom = max(
            remaining,
            key=lambda a: (sum(1 for t in a.args if is_var(t) and t.name in bound), -remaining.index(a)),
        )
        remaining.remove(atom)
        const_checks, key_positions, new_vars, repeats = _atom_plan(atom, bound)
        index: dict[tuple, list[tuple]] = {}
        for fact in source.relation(atom.relation):
            if any(fact[p] != c for p, c in const_checks):
                continue
            if any(fact[p1] != fact[p2] for p1, p2 in repeats):
                continue
            key = tuple(fact[p] for _, p in key_positions)
            index.setdefault(key, []).append(tuple(fact[p] for _, p in new_vars))
        next_partials = []
        key_vars = [v for v, _ in key_positions]
        ext_vars = [v for v, _ in new_vars]
        for partial in partials:
            key = tuple(partial[v] for v in key_vars)
            for ext in index.get(key, ()):
                extended = dict(partial)
                extended.update(zip(ext_vars, ext))
                next_partials.append(extended)
        partials = next_partials
        bound.update(v for v, _ in key_positions)
        bound.update(v for v, _ in new_vars)
    # deduplicate (identical maps can arise from duplicate-free sets only via
    # variables absent from some atom orderings; cheap and safe regardless)
    var_order = sorted(bound)
    unique = {tuple(p[v] for v in var_order): p for p in partials}
    return [unique[k] for k in sorted(unique, key=lambda t: tuple(map(_sort_key, t)))]


def initial_assignment_set(
    scenario: Scenario, source: Instance, nulls: NullCounter
) -> dict[str, list[Assignment]]:
    """Per-tgd pools of full assignments, ids and fresh nulls assigned in
    deterministic order (tgd declaration order, then body-assignment order)."""
    pools: dict[str, list[Assignment]] = {}
    next_id = 0
    for tgd in scenario.tgds:
        pool = []
        existentials = sorted(tgd.existentials)
        for body in compute_body_assignments(tgd, source):
            image = dict(body)
            for var in existentials:
                image[var] = nulls.fresh()
            pool.append(Assignment(next_id, tgd, image))
            next_id += 1
        pools[tgd.id] = pool
    return pools


def head_template(tgd: StTgd) -> list[tuple[str, tuple]]:
    """Per head atom: (relation, arg accessors), each accessor a Var or constant."""
    return [(atom.relation, atom.args) for atom in tgd.head]


def materialize(assignment: Assignment, resolve=None) -> set[tuple]:
    """Head materialization: the set of (relation, value tuple) facts.

    ``resolve`` (optional) maps image values through current equality
    classes before substitution.
    """
    image = assignment.image
    facts = set()
    for atom in assignment.tgd.head:
        if resolve is None:
            args = tuple(image[t.name] if is_var(t) else t for t in atom.args)
        else:
            args = tuple(resolve(image[t.name]) if is_var(t) else t for t in atom.args)
        facts.add((atom.relation, args))
    return facts


def build_pre_solution(scenario: Scenario, pools: dict[str, list[Assignment]]) -> Instance:
    """Union of all head materializations: the Classical DE Chase pre-solution."""
    instance = Instance(scenario.target)
    for pool in pools.values():
        for assignment in pool:
            for relation, args in materialize(assignment):
                instance.add(relation, args)
    return instance
