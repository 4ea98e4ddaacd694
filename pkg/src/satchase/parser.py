"""Mapping-language parser plus CSV instance loading/serialization.

The ``.map`` grammar (statements end with ``.``):

    SOURCE Rel(attr, attr, ...).
    TARGET Rel(attr, attr, ...).
    TGD id: Atom, Atom -> Atom, Atom.
    FD id: Rel[1,2] -> [3,4].

Atom arguments are identifiers (variables), quoted strings or integers.
Variable case carries no meaning: a head variable not bound in the body is
existential.  Fd positions are 1-based.
"""

from __future__ import annotations

import csv
import re
import warnings
from pathlib import Path

from .core import (
    Atom,
    Fd,
    Instance,
    Null,
    Schema,
    Scenario,
    SchemaError,
    StTgd,
    Var,
    is_null,
)

NULL_RE = re.compile(r"_:N(\d+)$")
INT_RE = re.compile(r"-?(0|[1-9]\d*)$")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<arrow>->)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<int>-?\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<punct>[()\[\],:.])
    """,
    re.VERBOSE,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class _Token:
    __slots__ = ("kind", "value", "line", "col")

    def __init__(self, kind, value, line, col):
        self.kind = kind
        self.value = value
        self.line = line
        self.col = col


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind != "ws":
            tokens.append(_Token(kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message: str):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.col)

    def expect(self, kind: str, value: str | None = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (value is not None and tok.value != value):
            want = value if value is not None else kind
            self.fail(f"expected {want!r}, found {tok.value!r}")
        return self.next()

    def parse(self) -> Scenario:
        source, target = Schema(), Schema()
        tgds: list[StTgd] = []
        fds: list[Fd] = []
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.kind != "ident":
                self.fail(f"expected statement keyword, found {tok.value!r}")
            if tok.value in ("SOURCE", "TARGET"):
                self.next()
                schema = source if tok.value == "SOURCE" else target
                name, attrs = self.relation_decl()
                try:
                    schema.add(name, attrs)
                except SchemaError as exc:
                    raise ParseError(str(exc), tok.line, tok.col) from None
            elif tok.value == "TGD":
                tgds.append(self.tgd())
            elif tok.value == "FD":
                fds.append(self.fd())
            else:
                self.fail(f"unknown statement {tok.value!r}")
            self.expect("punct", ".")
        try:
            return Scenario(source=source, target=target, tgds=tgds, fds=fds)
        except SchemaError as exc:
            raise ParseError(str(exc), self.peek().line, self.peek().col) from None

    def relation_decl(self) -> tuple[str, list[str]]:
        name = self.expect("ident").value
        self.expect("punct", "(")
        attrs = [self.expect("ident").value]
        while self.peek().value == ",":
            self.next()
            attrs.append(self.expect("ident").value)
        self.expect("punct", ")")
        return name, attrs

    def atom(self) -> Atom:
        name = self.expect("ident").value
        self.expect("punct", "(")
        args = [self.term()]
        while self.peek().value == ",":
            self.next()
            args.append(self.term())
        self.expect("punct", ")")
        return Atom(name, tuple(args))

    def term(self):
        tok = self.peek()
        if tok.kind == "ident":
            return Var(self.next().value)
        if tok.kind == "int":
            return int(self.next().value)
        if tok.kind == "string":
            raw = self.next().value[1:-1]
            return raw.replace('\\"', '"').replace("\\\\", "\\")
        self.fail(f"expected term, found {tok.value!r}")

    def atom_list(self) -> list[Atom]:
        atoms = [self.atom()]
        while self.peek().value == ",":
            self.next()
            atoms.append(self.atom())
        return atoms

    def tgd(self) -> StTgd:
        tok = self.expect("ident", "TGD")
        dep_id = self.expect("ident").value
        self.expect("punct", ":")
        body = self.atom_list()
        self.expect("arrow")
        head = self.atom_list()
        try:
            return StTgd(id=dep_id, body=body, head=head)
        except SchemaError as exc:
            raise ParseError(str(exc), tok.line, tok.col) from None

    def fd(self) -> Fd:
        tok = self.expect("ident", "FD")
        dep_id = self.expect("ident").value
        self.expect("punct", ":")
        relation = self.expect("ident").value
        lhs = self.position_list()
        self.expect("arrow")
        rhs = self.position_list()
        try:
            return Fd(id=dep_id, relation=relation, lhs=lhs, rhs=rhs)
        except SchemaError as exc:
            raise ParseError(str(exc), tok.line, tok.col) from None

    def position_list(self) -> tuple[int, ...]:
        self.expect("punct", "[")
        positions = [int(self.expect("int").value)]
        while self.peek().value == ",":
            self.next()
            positions.append(int(self.expect("int").value))
        self.expect("punct", "]")
        return tuple(positions)


def parse_mapping(text: str) -> Scenario:
    """Parse a ``.map`` document into a validated :class:`Scenario`."""
    return _Parser(text).parse()


def _render_term(t) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, str):
        escaped = t.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    return str(t)


def print_mapping(scenario: Scenario) -> str:
    """Pretty-print a scenario; ``parse_mapping(print_mapping(s))`` == s."""
    lines = []
    for schema, kw in ((scenario.source, "SOURCE"), (scenario.target, "TARGET")):
        for name, attrs in schema.relations.items():
            lines.append(f"{kw} {name}({', '.join(attrs)}).")
    for tgd in scenario.tgds:
        body = ", ".join(f"{a.relation}({', '.join(_render_term(t) for t in a.args)})" for a in tgd.body)
        head = ", ".join(f"{a.relation}({', '.join(_render_term(t) for t in a.args)})" for a in tgd.head)
        lines.append(f"TGD {tgd.id}: {body} -> {head}.")
    for fd in scenario.fds:
        lines.append(
            f"FD {fd.id}: {fd.relation}[{','.join(map(str, fd.lhs))}] -> [{','.join(map(str, fd.rhs))}]."
        )
    return "\n".join(lines) + "\n"


def _parse_cell(cell: str, allow_nulls: bool):
    m = NULL_RE.match(cell)
    if m:
        if not allow_nulls:
            raise ValueError(f"null syntax {cell!r} not allowed in a source instance")
        return Null(int(m.group(1)))
    if INT_RE.fullmatch(cell):
        return int(cell)
    return cell


def _render_cell(value) -> str:
    return repr(value) if is_null(value) else str(value)


def load_instance(directory: str | Path, schema: Schema, allow_nulls: bool = False) -> Instance:
    """Load one ``<relation>.csv`` per schema relation; a missing file is an
    empty relation (with a warning), a column-count mismatch is an error."""
    directory = Path(directory)
    instance = Instance(schema)
    for relation, attrs in schema.relations.items():
        path = directory / f"{relation}.csv"
        if not path.exists():
            warnings.warn(f"no file for relation {relation!r} ({path}); treating as empty")
            continue
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                continue
            if len(header) != len(attrs):
                raise ValueError(
                    f"{path}: header has {len(header)} columns, schema says {len(attrs)}"
                )
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(attrs):
                    raise ValueError(f"{path}:{lineno}: expected {len(attrs)} cells, got {len(row)}")
                instance.add(relation, tuple(_parse_cell(c, allow_nulls) for c in row))
    return instance


def serialize_solution(instance: Instance, directory: str | Path, schema: Schema | None = None) -> list[Path]:
    """Write one CSV per relation, nulls rendered ``_:N<k>``, rows sorted."""
    schema = schema or instance.schema
    if schema is None:
        raise ValueError("no schema available for serialization")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for relation, attrs in schema.relations.items():
        path = directory / f"{relation}.csv"
        rows = sorted(tuple(_render_cell(v) for v in fact) for fact in instance.relation(relation))
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(attrs)
            writer.writerows(rows)
        written.append(path)
    return written
