"""Fd application to termination inside one Saturation Set.

Values are merged through equality classes over nulls (union-find with an
optional constant per class); between two nulls the smallest id becomes
the resolved representative, a constant always beats a null, and two
distinct constants abort the whole chase.

The union-find kernel is compiled (Cython) when available, with a
pure-Python twin selected at import; set ``SATCHASE_PURE=1`` to force the
fallback.
"""

from __future__ import annotations

import os
from collections import deque

from .assign import Assignment
from .core import Fd, Null, Scenario, StTgd, is_null, is_var

if os.environ.get("SATCHASE_PURE"):
    from ._eqpure import EqClasses

    COMPILED_KERNEL = False
else:
    try:
        from ._eqcore import EqClasses  # type: ignore[no-redef]

        COMPILED_KERNEL = True
    except ImportError:  # pragma: no cover - build-environment dependent
        from ._eqpure import EqClasses

        COMPILED_KERNEL = False


class ChaseFail(Exception):
    """Two distinct constants forced equal; carries the fd and witness facts."""

    def __init__(self, fd_id: str, witness1, witness2):
        super().__init__(f"chase failed on fd {fd_id}: {witness1} vs {witness2}")
        self.fd_id = fd_id
        self.witnesses = (witness1, witness2)


class _Occurrence:
    """One (assignment, head atom, fd) triple feeding the key index."""

    __slots__ = ("assignment", "atom_index", "fd", "key_terms", "rhs_terms")

    def __init__(self, assignment, atom_index, fd, key_terms, rhs_terms):
        self.assignment = assignment
        self.atom_index = atom_index
        self.fd = fd
        self.key_terms = key_terms
        self.rhs_terms = rhs_terms


def egd_slots(scenario: Scenario) -> dict[str, list]:
    """Per tgd: (fd, head atom index, key terms, rhs terms) for every head
    atom whose relation carries an fd."""
    slots: dict[str, list] = {}
    for tgd in scenario.tgds:
        entries = []
        for idx, atom in enumerate(tgd.head):
            for fd in scenario.fds:
                if fd.relation != atom.relation:
                    continue
                key_terms = tuple(atom.args[p - 1] for p in fd.lhs)
                rhs_terms = tuple(atom.args[p - 1] for p in fd.rhs)
                entries.append((fd, idx, key_terms, rhs_terms))
        slots[tgd.id] = entries
    return slots


class DebugInvariants:
    """Optional runtime checks: null confinement at every merge."""

    def __init__(self, birth_owner: dict[int, int]):
        self.birth_owner = birth_owner  # null id -> assignment id that created it
        self.violations: list[str] = []


class SetChaseState:
    """Equality classes plus key index owned by one Saturation Set (or by
    the single global set of the classical/oblivious engines)."""

    def __init__(self, slots: dict[str, list], debug: DebugInvariants | None = None):
        self.slots = slots
        self.eq = EqClasses()
        self.nulls: dict[int, Null] = {}
        self.index: dict[str, dict[tuple, _Occurrence]] = {}
        self.occ_by_root: dict[int, list[_Occurrence]] = {}
        self.worklist: deque[_Occurrence] = deque()
        self.members: list[Assignment] = []
        self.member_ids: set[int] = set()
        self.events: list[tuple] = []
        self.debug = debug
        self._class_nulls: dict[int, list[int]] | None = {} if debug else None

    # -- value resolution ------------------------------------------------

    def resolve(self, value):
        """Current representative of a value: its class constant if any,
        else the smallest null of its class; constants map to themselves."""
        if type(value) is not Null:
            return value
        eq = self.eq
        root = eq.find(value.id)
        const = eq.constant_of(root)
        if const is not None:
            return const
        return self.nulls[eq.min_of(root)]

    def _register_null(self, null: Null) -> None:
        nid = null.id
        if nid not in self.nulls:
            self.nulls[nid] = null
            self.eq.add(nid)
            if self._class_nulls is not None:
                # roots are opaque kernel handles, not null ids
                self._class_nulls[self.eq.find(nid)] = [nid]

    # -- membership ------------------------------------------------------

    def add_member(self, assignment: Assignment) -> None:
        self.members.append(assignment)
        self.member_ids.add(assignment.id)
        for value in assignment.image.values():
            if type(value) is Null:
                self._register_null(value)

    # -- fd enforcement --------------------------------------------------

    def unify(self, t1, t2, fd_id: str = "<direct>") -> str:
        """Make t1 and t2 resolve equal. Returns 'noop' or 'merged'; raises
        ChaseFail on two distinct constants."""
        v1, v2 = self.resolve(t1), self.resolve(t2)
        if v1 == v2:
            return "noop"
        n1, n2 = type(v1) is Null, type(v2) is Null
        if not n1 and not n2:
            raise ChaseFail(fd_id, v1, v2)
        self._merge(v1, v2)
        return "merged"

    def _merge(self, v1, v2) -> None:
        """Merge resolved values, at least one of which is a null; schedules
        reindexing of occurrences whose keys may have changed."""
        eq = self.eq
        if type(v1) is Null and type(v2) is Null:
            r1, r2 = eq.find(v1.id), eq.find(v2.id)
            if self.debug:
                self._check_confinement(r1, r2)
            loser = eq.union(r1, r2)
            if loser == -1:
                return
            winner = r1 if loser == r2 else r2
            if self._class_nulls is not None:
                self._class_nulls[winner].extend(self._class_nulls.pop(loser))
            self.events.append(("union", v1.id, v2.id))
            self.worklist.extend(self.occ_by_root.pop(loser, ()))
            moved = self.occ_by_root.pop(winner, None)
            if moved:
                self.worklist.extend(moved)
        else:
            null, const = (v1, v2) if type(v1) is Null else (v2, v1)
            root = eq.find(null.id)
            if self.debug:
                self._check_confinement(root, None)
            eq.bind_constant(root, const)
            self.events.append(("bind", null.id, const))
            self.worklist.extend(self.occ_by_root.pop(root, ()))

    def _check_confinement(self, r1: int, r2: int | None) -> None:
        """Every null touched by this merge must belong to an assignment
        inside this set (birth owners are the only image holders, since raw
        images are rewritten lazily)."""
        assert self._class_nulls is not None
        roots = (r1,) if r2 is None else (r1, r2)
        for root in roots:
            for nid in self._class_nulls[root]:
                owner = self.debug.birth_owner.get(nid)
                if owner is not None and owner not in self.member_ids:
                    self.debug.violations.append(
                        f"null _:N{nid} of assignment a{owner} merged outside its set"
                    )

    def _value_of(self, assignment: Assignment, term):
        return assignment.image[term.name] if is_var(term) else term

    def _process(self, occ: _Occurrence) -> None:
        resolve = self.resolve
        assignment = occ.assignment
        image = assignment.image
        key = tuple(
            resolve(image[t.name]) if is_var(t) else t for t in occ.key_terms
        )
        bucket = self.index.setdefault(occ.fd.id, {})
        rep = bucket.get(key)
        if rep is None or rep is occ:
            bucket[key] = occ
            eq = self.eq
            for cell in key:
                if type(cell) is Null:
                    self.occ_by_root.setdefault(eq.find(cell.id), []).append(occ)
            return
        rep_image = rep.assignment.image
        for t1, t2 in zip(occ.rhs_terms, rep.rhs_terms):
            v1 = resolve(image[t1.name]) if is_var(t1) else t1
            v2 = resolve(rep_image[t2.name]) if is_var(t2) else t2
            if v1 == v2:
                continue
            if type(v1) is not Null and type(v2) is not Null:
                raise ChaseFail(
                    occ.fd.id,
                    self._witness(occ),
                    self._witness(rep),
                )
            self._merge(v1, v2)

    def _witness(self, occ: _Occurrence) -> tuple:
        atom = occ.assignment.tgd.head[occ.atom_index]
        args = tuple(
            self.resolve(occ.assignment.image[t.name]) if is_var(t) else t for t in atom.args
        )
        return (atom.relation, args)

    def enqueue_assignment(self, assignment: Assignment) -> None:
        for fd, idx, key_terms, rhs_terms in self.slots[assignment.tgd.id]:
            self.worklist.append(_Occurrence(assignment, idx, fd, key_terms, rhs_terms))

    def drain(self) -> None:
        worklist = self.worklist
        while worklist:
            self._process(worklist.popleft())

    def compact(self) -> None:
        """Rewrite member images in place through the equality classes
        (universal positions hold constants and are never touched)."""
        resolve = self.resolve
        for assignment in self.members:
            image = assignment.image
            for var in assignment.tgd.existentials:
                value = image[var]
                if type(value) is Null:
                    image[var] = resolve(value)


def apply_egds_to_termination(state: SetChaseState, trigger: Assignment) -> list:
    """Fire all fds triggered (directly or transitively) by the assignment
    last added to the set; returns the merge events as a mutation log."""
    log_start = len(state.events)
    state.enqueue_assignment(trigger)
    state.drain()
    return state.events[log_start:]


def quiescence_violations(state: SetChaseState) -> list:
    """Exhaustive O(n^2) scan for remaining fd violations over the set's
    materialized facts (test oracle; independent of the key index)."""
    facts: dict[str, list[tuple]] = {}
    for assignment in state.members:
        for idx, atom in enumerate(assignment.tgd.head):
            args = tuple(
                state.resolve(assignment.image[t.name]) if is_var(t) else t for t in atom.args
            )
            facts.setdefault(atom.relation, []).append(args)
    violations = []
    for tgd_slots in state.slots.values():
        for fd, _, _, _ in tgd_slots:
            rel_facts = facts.get(fd.relation, ())
            for i, f1 in enumerate(rel_facts):
                for f2 in rel_facts[i + 1 :]:
                    if all(f1[p - 1] == f2[p - 1] for p in fd.lhs) and any(
                        f1[p - 1] != f2[p - 1] for p in fd.rhs
                    ):
                        violations.append((fd.id, f1, f2))
    return violations
