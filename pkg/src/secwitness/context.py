"""Security lattice and verification context.

The lattice is the powerset of principals ordered by reverse inclusion:
the more principals may read an atom, the lower its level.  Bottom (public,
readable by everyone) is kept symbolic instead of materializing "all
principals", because indexed stand-in identities (A_3 and friends) enter the
universe during analysis and must compare below every finite level.
Levels carry principal NAMES, not atom objects, so an identity reached as a
parameter and the same identity declared as a constant agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import ContextError, MismatchedUniverse, NotAKey, UnleveledKey
from .terms import Atom, Mode, Sort


@dataclass(frozen=True)
class SecurityLevel:
    """members=None encodes bottom (every principal); frozenset() is top."""

    members: Optional[frozenset[str]] = None

    @property
    def is_bottom(self) -> bool:
        return self.members is None

    @property
    def is_top(self) -> bool:
        return self.members is not None and not self.members

    def __repr__(self) -> str:
        if self.is_bottom:
            return "⊥"
        if self.is_top:
            return "⊤"
        return "{" + ",".join(sorted(self.members)) + "}"


BOTTOM = SecurityLevel(None)
TOP = SecurityLevel(frozenset())


def finite(names: Iterable[str]) -> SecurityLevel:
    return SecurityLevel(frozenset(names))


def _require_level(x) -> None:
    if not isinstance(x, SecurityLevel):
        raise MismatchedUniverse(f"not a security level: {x!r}")


def geq(a: SecurityLevel, b: SecurityLevel) -> bool:
    """a dominates b: a's reader set is contained in b's."""
    _require_level(a)
    _require_level(b)
    if b.is_bottom:
        return True
    if a.is_bottom:
        return False
    return a.members <= b.members


def meet(a: SecurityLevel, b: SecurityLevel) -> SecurityLevel:
    _require_level(a)
    _require_level(b)
    if a.is_bottom or b.is_bottom:
        return BOTTOM
    return SecurityLevel(a.members | b.members)


def join(a: SecurityLevel, b: SecurityLevel) -> SecurityLevel:
    _require_level(a)
    _require_level(b)
    if a.is_bottom:
        return b
    if b.is_bottom:
        return a
    return SecurityLevel(a.members & b.members)


def meet_all(levels: Iterable[SecurityLevel]) -> SecurityLevel:
    out = TOP
    for lv in levels:
        out = meet(out, lv)
    return out


@dataclass(frozen=True)
class KeyDeclaration:
    name: str
    inverse: str
    mode: Mode


@dataclass(frozen=True)
class VerificationContext:
    principals: tuple[Atom, ...]
    intruder: Atom
    levels: Mapping[str, SecurityLevel]
    keys: Mapping[str, KeyDeclaration]  # indexed by BOTH names of each pair
    rewrite_rules: tuple = ()

    def __post_init__(self) -> None:
        names = {p.name for p in self.principals}
        if self.intruder.name not in names:
            raise ContextError("intruder must be one of the principals")
        for decl in set(self.keys.values()):
            if decl.name not in self.levels and decl.inverse not in self.levels:
                raise ContextError(
                    f"key pair {decl.name}/{decl.inverse} has no declared level on either side"
                )

    @property
    def principal_names(self) -> frozenset[str]:
        return frozenset(p.name for p in self.principals)


def make_context(
    principals: Sequence[str],
    intruder: str,
    levels: Mapping[str, Iterable[str]],
    keys: Sequence[tuple[str, str, Mode]] = (),
    rewrite_rules: tuple = (),
) -> VerificationContext:
    """Convenience builder used by tests and the protocol loader."""
    atoms = tuple(Atom(p) for p in principals)
    key_index: dict[str, KeyDeclaration] = {}
    for name, inverse, mode in keys:
        decl = KeyDeclaration(name, inverse, mode)
        key_index[name] = decl
        key_index[inverse] = KeyDeclaration(inverse, name, mode)
    lvls = {name: finite(members) for name, members in levels.items()}
    return VerificationContext(
        principals=atoms,
        intruder=Atom(intruder),
        levels=lvls,
        keys=key_index,
        rewrite_rules=rewrite_rules,
    )


def _name_chain(x: Union[Atom, str]) -> list[str]:
    """Lookup candidates for a name: as-is, tag stripped, index stripped."""
    if isinstance(x, Atom):
        chain = [x.name, x.base_name]
    else:
        base = x.split("^", 1)[0]
        chain = [x, base]
        stripped = Atom(base).base_name
        chain.append(stripped)
    out: list[str] = []
    for c in chain:
        if c not in out:
            out.append(c)
    return out


def level_of(ctx: VerificationContext, x: Union[Atom, str]) -> SecurityLevel:
    """Declared level, or the public default.

    Variables have no declared level; the selection and criterion layers give
    them their own treatment, and the public default here is what makes every
    key protective for them.
    """
    for name in _name_chain(x):
        if name in ctx.levels:
            return ctx.levels[name]
    return BOTTOM


def intruder_allowed(ctx: VerificationContext, x: Union[Atom, str]) -> bool:
    lv = level_of(ctx, x)
    return lv.is_bottom or ctx.intruder.name in lv.members


def is_key(ctx: VerificationContext, x: Union[Atom, str]) -> bool:
    name = x.base_name if isinstance(x, Atom) else Atom(x.split("^", 1)[0]).base_name
    return name in ctx.keys


def inverse_key(ctx: VerificationContext, k: Atom) -> Atom:
    """Involutive inverse; an indexed copy keeps its index (kb_1 -> kb-1_1)."""
    base = k.base_name
    decl = ctx.keys.get(base)
    if decl is None:
        raise NotAKey(k.display())
    inv_name = decl.inverse if k.index is None else f"{decl.inverse}_{k.index}"
    return Atom(inv_name, k.sort, k.session_tag)


def key_mode(ctx: VerificationContext, k: Atom) -> Mode:
    decl = ctx.keys.get(k.base_name)
    if decl is None:
        raise NotAKey(k.display())
    return decl.mode


def is_identity(ctx: VerificationContext, a: Atom) -> bool:
    """True for principal identities, including indexed copies (A_3)."""
    return a.sort is not Sort.VARIABLE and a.base_name in ctx.principal_names


def intruder_knowledge(ctx: VerificationContext) -> frozenset[Atom]:
    """K(I): every declared atomic name the intruder is allowed to read,
    identities included."""
    known: set[Atom] = {Atom(p.name) for p in ctx.principals}
    for name in set(ctx.levels) | set(ctx.keys):
        if intruder_allowed(ctx, name):
            known.add(Atom(name))
    return frozenset(known)
