"""Homomorphism search and isomorphism checking between instances with
labelled nulls.

Constants only map to themselves.  A homomorphism may send nulls to
constants or nulls and need not be injective; an isomorphism is a null
bijection carrying the fact set exactly onto the other.

Both searches decompose the instances into null-connected components
(facts linked by shared nulls) and solve each component independently,
so backtracking never crosses component boundaries.
"""

from __future__ import annotations

from collections import Counter, deque

from .core import Instance, Null, is_null


def _fact_list(instance: Instance) -> list[tuple]:
    return [(rel, args) for rel, facts in sorted(instance.facts.items()) for args in sorted(facts, key=repr)]


def _components(facts: list[tuple]) -> tuple[list[list[tuple]], set[tuple]]:
    """Split facts into null-connected components; facts without nulls are
    returned separately as the ground set."""
    ground: set[tuple] = set()
    by_null: dict[Null, list[int]] = {}
    with_nulls: list[tuple] = []
    for fact in facts:
        nulls = [v for v in fact[1] if is_null(v)]
        if not nulls:
            ground.add(fact)
            continue
        idx = len(with_nulls)
        with_nulls.append(fact)
        for n in nulls:
            by_null.setdefault(n, []).append(idx)
    seen: set[int] = set()
    components: list[list[tuple]] = []
    for start in range(len(with_nulls)):
        if start in seen:
            continue
        comp: list[int] = []
        queue = deque([start])
        seen.add(start)
        while queue:
            i = queue.popleft()
            comp.append(i)
            for v in with_nulls[i][1]:
                if is_null(v):
                    for j in by_null[v]:
                        if j not in seen:
                            seen.add(j)
                            queue.append(j)
        components.append([with_nulls[i] for i in sorted(comp)])
    return components, ground


def _profile(fact: tuple) -> tuple:
    rel, args = fact
    return (rel, tuple(("n",) if is_null(v) else ("c", v) for v in args))


def _component_key(comp: list[tuple]) -> tuple:
    """Invariant under null renaming: fact-profile multiset plus null count."""
    nulls = {v for _, args in comp for v in args if is_null(v)}
    return (len(nulls), tuple(sorted(Counter(map(_profile, comp)).items())))


def _search_order(comp: list[tuple]) -> list[tuple]:
    """Facts ordered so each one (after the first) shares a null with an
    earlier one; most-constant facts first for cheap early pruning."""

    def constants(fact):
        return sum(0 if is_null(v) else 1 for v in fact[1])

    remaining = list(comp)
    remaining.sort(key=lambda f: (-constants(f), repr(f)))
    order = [remaining.pop(0)]
    known = {v for v in order[0][1] if is_null(v)}
    while remaining:
        pick = None
        for i, fact in enumerate(remaining):
            if any(is_null(v) and v in known for v in fact[1]):
                pick = i
                break
        if pick is None:
            pick = 0  # disconnected only within pathological inputs
        fact = remaining.pop(pick)
        order.append(fact)
        known |= {v for v in fact[1] if is_null(v)}
    return order


def _match_component(
    comp: list[tuple],
    dst_by_rel: dict[str, list[tuple]],
    iso: bool,
    used: set | None = None,
) -> dict[Null, object] | None:
    """Backtracking embedding of one component.  In iso mode null images
    must be unused nulls; otherwise any value works."""
    order = _search_order(comp)
    mapping: dict[Null, object] = {}
    taken: set = set(used or ())

    def candidates(fact):
        rel, args = fact
        out = []
        for dst_args in dst_by_rel.get(rel, ()):
            ok = True
            for v, w in zip(args, dst_args):
                if is_null(v):
                    bound = mapping.get(v)
                    if bound is not None:
                        if bound != w:
                            ok = False
                            break
                    elif iso and (not is_null(w) or w in taken):
                        ok = False
                        break
                elif v != w:
                    ok = False
                    break
            if ok:
                out.append(dst_args)
        return out

    def extend(depth: int) -> bool:
        if depth == len(order):
            return True
        fact = order[depth]
        rel, args = fact
        for dst_args in candidates(fact):
            newly = []
            ok = True
            for v, w in zip(args, dst_args):
                if is_null(v) and v not in mapping:
                    if iso and w in taken:  # claimed by an earlier cell
                        ok = False
                        break
                    mapping[v] = w
                    if iso:
                        taken.add(w)
                    newly.append((v, w))
                elif is_null(v) and mapping[v] != w:
                    ok = False
                    break
            if ok and extend(depth + 1):
                return True
            for v, w in newly:
                del mapping[v]
                if iso:
                    taken.discard(w)
        return False

    return mapping if extend(0) else None


def _dst_index(facts: list[tuple]) -> dict[str, list[tuple]]:
    index: dict[str, list[tuple]] = {}
    for rel, args in facts:
        index.setdefault(rel, []).append(args)
    return index


def find_homomorphism(src: Instance, dst: Instance) -> dict[Null, object] | None:
    """A map on nulls (identity on constants) carrying every fact of src
    into dst, or None."""
    src_facts, dst_facts = _fact_list(src), _fact_list(dst)
    components, ground = _components(src_facts)
    dst_set = set(dst_facts)
    if not ground <= dst_set:
        return None
    dst_by_rel = _dst_index(dst_facts)
    mapping: dict[Null, object] = {}
    for comp in components:
        part = _match_component(comp, dst_by_rel, iso=False)
        if part is None:
            return None
        mapping.update(part)
    return mapping


def _bipartite_match(compat: list[list[int]], n_right: int) -> bool:
    """Perfect matching over a compatibility lists (augmenting paths)."""
    match_right = [-1] * n_right

    def augment(u: int, visited: set[int]) -> bool:
        for v in compat[u]:
            if v in visited:
                continue
            visited.add(v)
            if match_right[v] == -1 or augment(match_right[v], visited):
                match_right[v] = u
                return True
        return False

    return all(augment(u, set()) for u in range(len(compat)))


def is_isomorphic(a: Instance, b: Instance) -> bool:
    """True iff some null bijection maps a's fact set exactly onto b's."""
    facts_a, facts_b = _fact_list(a), _fact_list(b)
    if Counter(rel for rel, _ in facts_a) != Counter(rel for rel, _ in facts_b):
        return False
    comps_a, ground_a = _components(facts_a)
    comps_b, ground_b = _components(facts_b)
    if ground_a != ground_b or len(comps_a) != len(comps_b):
        return False
    keys_a = [_component_key(c) for c in comps_a]
    keys_b = [_component_key(c) for c in comps_b]
    if Counter(keys_a) != Counter(keys_b):
        return False
    # group components by invariant; within a group decide pairwise
    # embeddability and demand a perfect matching
    groups: dict[tuple, tuple[list[int], list[int]]] = {}
    for i, k in enumerate(keys_a):
        groups.setdefault(k, ([], []))[0].append(i)
    for j, k in enumerate(keys_b):
        groups[k][1].append(j)
    for key, (left, right) in groups.items():
        compat: list[list[int]] = []
        for i in left:
            row = []
            for jpos, j in enumerate(right):
                comp_b = comps_b[j]
                index = _dst_index(comp_b)
                part = _match_component(comps_a[i], index, iso=True)
                # equal null counts and fact counts make an injective
                # embedding between same-key components a bijection
                if part is not None:
                    row.append(jpos)
            compat.append(row)
        if not _bipartite_match(compat, len(right)):
            return False
    return True
