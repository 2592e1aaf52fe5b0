"""The message algebra: atoms, concatenation, encryption, parsing and printing.

Messages are immutable trees.  Concatenation is stored flattened (n-ary,
never nested, never containing the empty message), which makes structural
equality insensitive to parse shape and makes "the parts beside an atom"
well defined.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, Optional, Sequence, Union

from .errors import (
    MessageSyntaxError,
    SubstitutedIntoKeyPosition,
    UndeclaredIdentifier,
    VariableInKeyPosition,
)


class Sort(Enum):
    CONSTANT = "constant"
    PARAMETER = "parameter"
    VARIABLE = "variable"


_INDEX_RE = re.compile(r"^(.*)_([0-9]+)$")


@dataclass(frozen=True)
class Atom:
    """An atomic name.  (name, session_tag) identifies the atom; sort is fixed
    at construction and never changes."""

    name: str
    sort: Sort = Sort.CONSTANT
    session_tag: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("atom name must be non-empty")

    @property
    def base_name(self) -> str:
        """Name with any trailing numeric index stripped: A_3 -> A, kb-1_2 -> kb-1."""
        m = _INDEX_RE.match(self.name)
        return m.group(1) if m else self.name

    @property
    def index(self) -> Optional[int]:
        m = _INDEX_RE.match(self.name)
        return int(m.group(2)) if m else None

    def with_index(self, index: int) -> "Atom":
        return Atom(f"{self.base_name}_{index}", self.sort, self.session_tag)

    def display(self) -> str:
        return self.name + (f"^{self.session_tag}" if self.session_tag else "")

    def __repr__(self) -> str:  # keeps pytest diffs readable
        marker = {Sort.CONSTANT: "", Sort.PARAMETER: "'", Sort.VARIABLE: "?"}[self.sort]
        return marker + self.display()


class Mode(Enum):
    SYMMETRIC = "sym"
    ASYMMETRIC = "asym"


class Message:
    """Base class; concrete nodes are Atomic, Concat, Enc and Empty."""

    __slots__ = ()

    def __str__(self) -> str:
        return print_message(self)


@dataclass(frozen=True, repr=False)
class Atomic(Message):
    atom: Atom

    def __repr__(self) -> str:
        return f"Atomic({self.atom!r})"


@dataclass(frozen=True, repr=False)
class Concat(Message):
    parts: tuple[Message, ...]

    def __post_init__(self) -> None:
        if len(self.parts) < 2:
            raise ValueError("Concat needs at least two parts; use concat()")
        for p in self.parts:
            if isinstance(p, (Concat, Empty)):
                raise ValueError("Concat parts must be flattened and non-empty")

    def __repr__(self) -> str:
        return f"Concat({', '.join(map(repr, self.parts))})"


@dataclass(frozen=True, repr=False)
class Enc(Message):
    body: Message
    key: Atom
    mode: Mode = Mode.ASYMMETRIC

    def __post_init__(self) -> None:
        if self.key.sort is Sort.VARIABLE:
            raise VariableInKeyPosition(self.key.display())

    def __repr__(self) -> str:
        return f"Enc({self.body!r}, {self.key!r})"


@dataclass(frozen=True, repr=False)
class Empty(Message):
    def __repr__(self) -> str:
        return "Empty()"


EMPTY = Empty()


def atomic(atom: Atom) -> Atomic:
    return Atomic(atom)


def concat(*messages: Message) -> Message:
    """Smart constructor: flattens nested concatenations and drops the empty
    message, returning the neutral element when nothing remains."""
    parts: list[Message] = []
    for m in messages:
        if isinstance(m, Empty):
            continue
        if isinstance(m, Concat):
            parts.extend(m.parts)
        else:
            parts.append(m)
    if not parts:
        return EMPTY
    if len(parts) == 1:
        return parts[0]
    return Concat(tuple(parts))


def enc(body: Message, key: Atom, mode: Mode = Mode.ASYMMETRIC) -> Enc:
    return Enc(body, key, mode)


def flatten(m: Message) -> tuple[Message, ...]:
    """Top-level parts of a message: the concatenation's parts, or the message
    itself; the empty message has no parts."""
    if isinstance(m, Concat):
        return m.parts
    if isinstance(m, Empty):
        return ()
    return (m,)


def subterms(m: Message) -> Iterator[Message]:
    """Pre-order traversal, outermost first, left to right."""
    yield m
    if isinstance(m, Concat):
        for p in m.parts:
            yield from subterms(p)
    elif isinstance(m, Enc):
        yield from subterms(m.body)


def atoms(m: Message) -> frozenset[Atom]:
    """Every atom of the tree, encryption keys included."""
    out: set[Atom] = set()
    for t in subterms(m):
        if isinstance(t, Atomic):
            out.add(t.atom)
        elif isinstance(t, Enc):
            out.add(t.key)
    return frozenset(out)


def atoms_of_set(ms: Sequence[Message]) -> frozenset[Atom]:
    out: set[Atom] = set()
    for m in ms:
        out |= atoms(m)
    return frozenset(out)


def body_atoms_in_order(m: Message) -> list[Atom]:
    """Atoms in first-occurrence order, skipping key positions."""
    seen: list[Atom] = []

    def walk(t: Message) -> None:
        if isinstance(t, Atomic):
            if t.atom not in seen:
                seen.append(t.atom)
        elif isinstance(t, Concat):
            for p in t.parts:
                walk(p)
        elif isinstance(t, Enc):
            walk(t.body)

    walk(m)
    return seen


def variables_of(m: Message) -> frozenset[Atom]:
    return frozenset(a for a in atoms(m) if a.sort is Sort.VARIABLE)


class Substitution(Mapping[Atom, Message]):
    """A finite map from Parameters/Variables to messages.

    Images never contain their own key (occurs check is enforced by the
    unifier that builds these); applying twice equals applying once because
    images are fully resolved at construction.
    """

    __slots__ = ("_bindings",)

    def __init__(self, bindings: Optional[Mapping[Atom, Message]] = None):
        items = dict(bindings or {})
        for a in items:
            if a.sort is Sort.CONSTANT:
                raise ValueError(f"cannot bind constant {a!r}")
        self._bindings = items

    def __getitem__(self, key: Atom) -> Message:
        return self._bindings[key]

    def __iter__(self) -> Iterator[Atom]:
        return iter(self._bindings)

    def __len__(self) -> int:
        return len(self._bindings)

    def __repr__(self) -> str:
        inner = ", ".join(f"{a!r} -> {print_message(m)}" for a, m in self._bindings.items())
        return "{" + inner + "}"

    def restrict(self, keep) -> "Substitution":
        """New substitution keeping only bindings whose key satisfies `keep`."""
        return Substitution({a: m for a, m in self._bindings.items() if keep(a)})

    def image_of(self, a: Atom) -> Optional[Message]:
        return self._bindings.get(a)


EMPTY_SUBSTITUTION = Substitution()


def substitute(m: Message, sigma: Mapping[Atom, Message]) -> Message:
    """Simultaneous replacement; the result is rebuilt through the smart
    constructors so empty parts vanish and concatenations stay flat."""
    if isinstance(m, Atomic):
        return sigma.get(m.atom, m)
    if isinstance(m, Concat):
        return concat(*(substitute(p, sigma) for p in m.parts))
    if isinstance(m, Enc):
        image = sigma.get(m.key)
        key = m.key
        if image is not None:
            if not isinstance(image, Atomic) or image.atom.sort is Sort.VARIABLE:
                raise SubstitutedIntoKeyPosition(m.key.display(), print_message(image))
            key = image.atom
        return Enc(substitute(m.body, sigma), key, m.mode)
    return m


def encryption_patterns(ms: Sequence[Message]) -> list[Message]:
    """All encryption-rooted subterms of the given messages, in traversal
    order, deduplicated by equality."""
    out: list[Message] = []
    for m in ms:
        for t in subterms(m):
            if isinstance(t, Enc) and t not in out:
                out.append(t)
    return out


# ---------------------------------------------------------------------------
# Concrete syntax
#
#   msg  := part ("." part)*
#   part := IDENT | "{" msg "}" "_" key
#   key  := IDENT | "{" IDENT "}"
#
# Identifiers match [A-Za-z][A-Za-z0-9_^-]*, so ka-1, Na^i and A_3 are single
# tokens.  A session tag is written with ^ and split off during resolution.

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_^-]*")


class SymbolTable:
    """Declared names available to the message parser.

    Maps a base name to its Atom prototype; resolution strips a ^tag suffix
    and re-attaches it to the prototype.
    """

    def __init__(self, atoms_by_name: Mapping[str, Atom]):
        self._by_name = dict(atoms_by_name)

    @classmethod
    def of(cls, *atoms_: Atom) -> "SymbolTable":
        return cls({a.name: a for a in atoms_})

    def resolve(self, ident: str) -> Atom:
        if ident in self._by_name:
            return self._by_name[ident]
        if "^" in ident:
            base, tag = ident.split("^", 1)
            if base in self._by_name:
                proto = self._by_name[base]
                return Atom(proto.name, proto.sort, tag)
        raise UndeclaredIdentifier(ident)

    def resolve_key(self, ident: str) -> Atom:
        # key positions resolve the same way by default; subclasses may
        # treat unknown names differently there
        return self.resolve(ident)


class _Cursor:
    def __init__(self, text: str, pos: int = 0):
        self.text = text
        self.pos = pos

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r\n":
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        self.skip_ws()
        if not self.text.startswith(ch, self.pos):
            raise MessageSyntaxError(self.text, self.pos, repr(ch))
        self.pos += len(ch)

    def ident(self) -> str:
        self.skip_ws()
        m = _IDENT_RE.match(self.text, self.pos)
        if not m:
            raise MessageSyntaxError(self.text, self.pos, "identifier")
        self.pos = m.end()
        return m.group(0)

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)


def _parse_key(cur: _Cursor, symbols: SymbolTable) -> Atom:
    if cur.peek() == "{":
        cur.expect("{")
        name = cur.ident()
        cur.expect("}")
    else:
        name = cur.ident()
    key = symbols.resolve_key(name)
    if key.sort is Sort.VARIABLE:
        raise VariableInKeyPosition(key.display())
    return key


def _parse_part(cur: _Cursor, symbols: SymbolTable, allow_dec: bool) -> Message:
    if cur.peek() == "{":
        cur.expect("{")
        body = _parse_msg(cur, symbols, allow_dec)
        cur.expect("}")
        cur.expect("_")
        return Enc(body, _parse_key(cur, symbols))
    start = cur.pos
    name = cur.ident()
    if allow_dec and name == "d" and cur.peek() == "(":
        # d(k, m) abbreviates {m}_k: decryption is encryption with the
        # inverse key in this algebra.  Only rule declarations use it.
        cur.expect("(")
        key_name = cur.ident()
        cur.expect(",")
        body = _parse_msg(cur, symbols, allow_dec)
        cur.expect(")")
        key = symbols.resolve_key(key_name)
        if key.sort is Sort.VARIABLE:
            raise VariableInKeyPosition(key.display())
        return Enc(body, key)
    try:
        return Atomic(symbols.resolve(name))
    except UndeclaredIdentifier:
        cur.pos = start
        raise


def _parse_msg(cur: _Cursor, symbols: SymbolTable, allow_dec: bool) -> Message:
    parts = [_parse_part(cur, symbols, allow_dec)]
    while cur.peek() == ".":
        cur.expect(".")
        parts.append(_parse_part(cur, symbols, allow_dec))
    return concat(*parts)


def parse_message(text: str, symbols: SymbolTable, allow_dec: bool = False) -> Message:
    cur = _Cursor(text)
    m = _parse_msg(cur, symbols, allow_dec)
    if not cur.at_end():
        raise MessageSyntaxError(text, cur.pos, "end of message")
    return m


def print_message(m: Message) -> str:
    if isinstance(m, Empty):
        return "ε"
    if isinstance(m, Atomic):
        return m.atom.display()
    if isinstance(m, Concat):
        return ".".join(print_message(p) for p in m.parts)
    if isinstance(m, Enc):
        return "{" + print_message(m.body) + "}_" + m.key.display()
    raise TypeError(f"not a message: {m!r}")
