"""Domain model: terms, atoms, facts, dependencies, schemas, instances.

Constants are plain Python scalars (``str`` or ``int``) compared by value;
an integer never equals its string rendering.  Labelled nulls and variables
get small dedicated classes so the three term kinds stay disjoint.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union


class Null:
    """A labelled null. Identified by a dense unsigned id, displayed ``_:N<k>``."""

    __slots__ = ("id",)

    def __init__(self, nid: int):
        self.id = nid

    def __eq__(self, other):
        return isinstance(other, Null) and other.id == self.id

    def __hash__(self):
        return hash((Null, self.id))

    def __repr__(self):
        return f"_:N{self.id}"

    def __reduce__(self):
        return (Null, (self.id,))


class Var:
    """A variable occurring in a dependency. Quantifier is decided by binding
    analysis on the owning tgd, not stored here."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __eq__(self, other):
        return isinstance(other, Var) and other.name == self.name

    def __hash__(self):
        return hash((Var, self.name))

    def __repr__(self):
        return f"?{self.name}"


Constant = Union[str, int]
Value = Union[Constant, Null]  # what instances and assignment images hold
Term = Union[Constant, Null, Var]


def is_constant(t: object) -> bool:
    return isinstance(t, (str, int)) and not isinstance(t, bool)


def is_null(t: object) -> bool:
    return isinstance(t, Null)


def is_var(t: object) -> bool:
    return isinstance(t, Var)


class NullCounter:
    """Shared monotone source of fresh null ids, safe for concurrent use."""

    def __init__(self, start: int = 0):
        self._next = start
        self._lock = threading.Lock()

    def fresh(self) -> Null:
        with self._lock:
            nid = self._next
            self._next += 1
        return Null(nid)

    @property
    def issued(self) -> int:
        return self._next


def fresh_null(counter: NullCounter) -> Null:
    """Return a null whose id has never been returned before in this run."""
    return counter.fresh()


@dataclass(frozen=True)
class Atom:
    """A relational atom; args may be variables or constants (facts are plain
    tuples, see :class:`Instance`)."""

    relation: str
    args: tuple

    def __repr__(self):
        return f"{self.relation}({', '.join(map(repr, self.args))})"


# A fact is stored as a bare tuple of values under its relation name.
Fact = tuple


class SchemaError(ValueError):
    """Raised when a schema, dependency or instance violates a structural
    invariant (unknown relation, arity mismatch, ...)."""


@dataclass
class Schema:
    """Relation name -> ordered attribute names (arity implied)."""

    relations: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def add(self, name: str, attributes: Iterable[str]) -> None:
        attrs = tuple(attributes)
        if name in self.relations:
            raise SchemaError(f"duplicate relation {name!r}")
        if len(attrs) < 1:
            raise SchemaError(f"relation {name!r} must have arity >= 1")
        self.relations[name] = attrs

    def arity(self, name: str) -> int:
        try:
            return len(self.relations[name])
        except KeyError:
            raise SchemaError(f"unknown relation {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.relations


@dataclass
class StTgd:
    """A source-to-target tgd. ``universals`` are the body-bound variables,
    ``existentials`` the head-only ones."""

    id: str
    body: list[Atom]
    head: list[Atom]
    universals: frozenset[str] = field(default_factory=frozenset)
    existentials: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        body_vars = {a.name for atom in self.body for a in atom.args if is_var(a)}
        head_vars = {a.name for atom in self.head for a in atom.args if is_var(a)}
        if not self.universals and not self.existentials:
            self.universals = frozenset(body_vars)
            self.existentials = frozenset(head_vars - body_vars)
        if self.universals & self.existentials:
            raise SchemaError(f"tgd {self.id}: universals and existentials overlap")
        unbound = head_vars - self.universals - self.existentials
        if unbound:
            raise SchemaError(f"tgd {self.id}: unbound head variables {sorted(unbound)}")

    def __repr__(self):
        return f"StTgd({self.id})"


@dataclass
class Fd:
    """A functional dependency R.A -> R.B with 1-based position sets.

    Normalization drops lhs positions from rhs; an fd whose rhs becomes
    empty is rejected as degenerate.
    """

    id: str
    relation: str
    lhs: tuple[int, ...]
    rhs: tuple[int, ...]

    def __post_init__(self):
        lhs = tuple(sorted(set(self.lhs)))
        rhs = tuple(sorted(set(self.rhs) - set(lhs)))
        if not lhs:
            raise SchemaError(f"fd {self.id}: empty lhs")
        if not rhs:
            raise SchemaError(f"fd {self.id}: rhs empty after normalization")
        self.lhs = lhs
        self.rhs = rhs

    def __repr__(self):
        return f"Fd({self.id}: {self.relation}{list(self.lhs)} -> {list(self.rhs)})"


@dataclass
class Scenario:
    """A mapping M = (source schema, target schema, s-t tgds, target fds)."""

    source: Schema
    target: Schema
    tgds: list[StTgd]
    fds: list[Fd]

    def __post_init__(self):
        shared = set(self.source.relations) & set(self.target.relations)
        if shared:
            raise SchemaError(f"source/target relation names not disjoint: {sorted(shared)}")
        seen_ids: set[str] = set()
        for dep in itertools.chain(self.tgds, self.fds):
            if dep.id in seen_ids:
                raise SchemaError(f"duplicate dependency id {dep.id!r}")
            seen_ids.add(dep.id)
        for tgd in self.tgds:
            for atom in tgd.body:
                self._check_atom(atom, self.source, tgd.id, "body")
            for atom in tgd.head:
                self._check_atom(atom, self.target, tgd.id, "head")
        for fd in self.fds:
            if fd.relation in self.source:
                raise SchemaError(f"fd {fd.id}: source relation {fd.relation!r} not allowed")
            arity = self.target.arity(fd.relation)
            bad = [p for p in fd.lhs + fd.rhs if not 1 <= p <= arity]
            if bad:
                raise SchemaError(f"fd {fd.id}: positions {bad} out of range for {fd.relation!r}")

    @staticmethod
    def _check_atom(atom: Atom, schema: Schema, dep_id: str, side: str) -> None:
        if atom.relation not in schema:
            raise SchemaError(f"tgd {dep_id}: unknown {side} relation {atom.relation!r}")
        if len(atom.args) != schema.arity(atom.relation):
            raise SchemaError(
                f"tgd {dep_id}: {side} atom {atom.relation!r} has arity "
                f"{len(atom.args)}, expected {schema.arity(atom.relation)}"
            )

    def tgd_by_id(self, tgd_id: str) -> StTgd:
        for t in self.tgds:
            if t.id == tgd_id:
                return t
        raise KeyError(tgd_id)


class Instance:
    """A set of facts, stored per relation with set semantics (append-only)."""

    def __init__(self, schema: Schema | None = None):
        self.schema = schema
        self.facts: dict[str, set[Fact]] = {}

    def add(self, relation: str, fact: Fact) -> None:
        if self.schema is not None:
            if relation not in self.schema:
                raise SchemaError(f"unknown relation {relation!r}")
            if len(fact) != self.schema.arity(relation):
                raise SchemaError(f"arity mismatch for {relation!r}: {fact!r}")
        self.facts.setdefault(relation, set()).add(fact)

    def extend(self, relation: str, facts: Iterable[Fact]) -> None:
        for f in facts:
            self.add(relation, f)

    def relation(self, name: str) -> set[Fact]:
        return self.facts.get(name, set())

    def __len__(self) -> int:
        return sum(len(s) for s in self.facts.values())

    def __iter__(self) -> Iterator[tuple[str, Fact]]:
        for rel in sorted(self.facts):
            for fact in self.facts[rel]:
                yield rel, fact

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        mine = {r: s for r, s in self.facts.items() if s}
        theirs = {r: s for r, s in other.facts.items() if s}
        return mine == theirs

    def counts(self) -> dict[str, int]:
        return {r: len(s) for r, s in sorted(self.facts.items()) if s}

    def nulls(self) -> set[Null]:
        return {v for s in self.facts.values() for f in s for v in f if is_null(v)}

    def __repr__(self):
        return f"Instance({self.counts()})"
