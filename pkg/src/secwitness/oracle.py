"""An independent attacker model used to sanity-check the bounds.

The closure of a message set is what an eavesdropper could compute from it:
split concatenations, strip encryptions whose inverse key is in reach, and
recombine what it has by pairing and by encrypting under keys it fully
controls (both halves of the pair derivable).  The closure is depth-bounded
and size-capped; caps mark the result truncated rather than pretending
completeness.

Against that model two statements are tested by randomized search: a bound
evaluated on anything derivable never reads below the bound on the original
set, and a well-protected set never puts a non-public atom in the clear.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Union

from .context import (
    SecurityLevel,
    VerificationContext,
    geq,
    intruder_allowed,
    intruder_knowledge,
    inverse_key,
    key_mode,
    level_of,
)
from .errors import NotAKey, WellProtectionViolation
from .rewrite import check_well_protected, normalize
from .selection import SelectionResult
from .terms import Atom, Atomic, Concat, Empty, Enc, Message, atoms, concat, enc


@dataclass(frozen=True)
class DeductionResult:
    terms: frozenset[Message]
    truncated: bool
    depth_budget: int

    def __contains__(self, m: Message) -> bool:
        return m in self.terms


def _term_size(m: Message) -> int:
    return len(atoms(m)) + (1 if isinstance(m, (Enc, Concat)) else 0)


def deduce_closure(M: Iterable[Message], ctx: VerificationContext,
                   depth_budget: int = 5, atom_cap: int = 24,
                   round_cap: int = 1500) -> DeductionResult:
    """Depth-tagged closure: a full take-apart pass to a fixpoint, one
    recombination round over what that produced, then take-apart again."""
    known: dict[Message, int] = {}
    truncated = False

    def add(t: Message, d: int) -> bool:
        nonlocal truncated
        if d > depth_budget:
            return False
        if len(atoms(t)) > atom_cap:
            truncated = True
            return False
        old = known.get(t)
        if old is None or d < old:
            known[t] = d
            return old is None
        return False

    for m in M:
        add(normalize(m, ctx), 0)
    for a in intruder_knowledge(ctx):
        add(Atomic(a), 0)

    def decompose() -> None:
        changed = True
        while changed:
            changed = False
            for t, d in sorted(known.items(), key=lambda kv: (kv[1], str(kv[0]))):
                if isinstance(t, Concat):
                    for p in t.parts:
                        changed |= add(p, d + 1)
                elif isinstance(t, Enc):
                    try:
                        inv = inverse_key(ctx, t.key)
                    except NotAKey:
                        continue
                    di = known.get(Atomic(inv))
                    if di is not None:
                        changed |= add(t.body, max(d, di) + 1)

    decompose()

    snapshot = sorted(known.items(), key=lambda kv: (_term_size(kv[0]), str(kv[0])))
    enc_keys = []
    for t, _ in snapshot:
        if isinstance(t, Atomic) and t.atom.name in ctx.keys:
            try:
                inv = inverse_key(ctx, t.atom)
            except NotAKey:
                continue
            if Atomic(inv) in known:
                enc_keys.append(t.atom)
    fresh = 0
    for a, da in snapshot:
        if fresh > round_cap:
            truncated = True
            break
        for b, db in snapshot:
            if fresh > round_cap:
                truncated = True
                break
            if isinstance(a, Empty) or isinstance(b, Empty):
                continue
            if add(concat(a, b), max(da, db) + 1):
                fresh += 1
        for k in enc_keys:
            if isinstance(a, Empty):
                continue
            dk = known[Atomic(k)]
            if add(enc(a, k, key_mode(ctx, k)), max(da, dk) + 1):
                fresh += 1

    decompose()
    return DeductionResult(frozenset(known), truncated, depth_budget)


def derivable(m: Message, ctx: VerificationContext, closure: DeductionResult) -> bool:
    """Membership query that also recombines on demand, so it does not
    depend on the capped recombination round."""
    t = normalize(m, ctx)
    if t in closure.terms or isinstance(t, Empty):
        return True
    if isinstance(t, Concat):
        return all(derivable(p, ctx, closure) for p in t.parts)
    if isinstance(t, Enc):
        return derivable(t.body, ctx, closure) and derivable(Atomic(t.key), ctx, closure)
    return False


# ---------------------------------------------------------------------------
# Random well-protected material


def _classify(ctx: VerificationContext) -> tuple[list[Atom], list[Atom], list[Atom]]:
    """(public atoms, secret atoms, encryption keys with known inverses)."""
    public: list[Atom] = list(ctx.principals)
    secret: list[Atom] = []
    enc_keys: list[Atom] = []
    named = set(ctx.levels) | set(ctx.keys)
    for name in sorted(named):
        a = Atom(name)
        if name in ctx.keys:
            enc_keys.append(a)
        if intruder_allowed(ctx, a):
            if all(p.name != name for p in ctx.principals):
                public.append(a)
        else:
            secret.append(a)
    return public, secret, enc_keys


def random_well_protected_set(rng: random.Random, ctx: VerificationContext,
                              max_messages: int = 5, max_depth: int = 3,
                              ) -> list[Message]:
    """Random message sets with every non-public atom under a key strong
    enough for it; checked, not merely constructed."""
    public, secret, enc_keys = _classify(ctx)

    def qualifying(s: Atom) -> list[Atom]:
        lvl = level_of(ctx, s)
        out = []
        for k in enc_keys:
            try:
                inv = inverse_key(ctx, k)
            except NotAKey:
                continue
            if geq(level_of(ctx, inv), lvl):
                out.append(k)
        return out

    def build(depth: int, guards: tuple[SecurityLevel, ...]) -> Message:
        roll = rng.random()
        allowed_secrets = [s for s in secret
                           if any(geq(g, level_of(ctx, s)) for g in guards)]
        if depth <= 0 or roll < 0.35:
            if allowed_secrets and rng.random() < 0.5:
                return Atomic(rng.choice(allowed_secrets))
            return Atomic(rng.choice(public))
        if roll < 0.7 and enc_keys:
            k = rng.choice(enc_keys)
            try:
                inv_level = level_of(ctx, inverse_key(ctx, k))
            except NotAKey:
                inv_level = level_of(ctx, k)
            return enc(build(depth - 1, guards + (inv_level,)), k, key_mode(ctx, k))
        parts = [build(depth - 1, guards) for _ in range(rng.randint(2, 3))]
        return concat(*parts)

    for _ in range(64):
        out: list[Message] = []
        for _ in range(rng.randint(1, max_messages)):
            m = build(rng.randint(1, max_depth), ())
            if m not in out:
                out.append(m)
        if check_well_protected(out, ctx).ok:
            return out
    raise RuntimeError("could not build a well-protected sample; context too restrictive")


def random_message(rng: random.Random, pool: Sequence[Atom], keys: Sequence[Atom],
                   max_depth: int = 3) -> Message:
    """Unconstrained random message over the given atoms; for algebra laws,
    not for protection-sensitive checks."""
    if max_depth <= 0 or rng.random() < 0.4:
        return Atomic(rng.choice(list(pool)))
    if rng.random() < 0.5 and keys:
        return Enc(random_message(rng, pool, keys, max_depth - 1), rng.choice(list(keys)))
    parts = [random_message(rng, pool, keys, max_depth - 1) for _ in range(rng.randint(2, 3))]
    return concat(*parts)


# ---------------------------------------------------------------------------
# Property checks


@dataclass(frozen=True)
class Failure:
    origin: tuple[str, ...]
    derived: str
    atom: str
    detail: str


@dataclass(frozen=True)
class PropertyReport:
    name: str
    ok: bool
    trials: int
    failures: tuple[Failure, ...] = ()
    precondition_failures: tuple[str, ...] = ()
    truncated_trials: int = 0

    def __bool__(self) -> bool:
        return self.ok


BoundOrSelection = Callable[..., Union[SecurityLevel, SelectionResult]]


def _dominates(on_derived, on_base) -> bool:
    if isinstance(on_derived, SelectionResult):
        return on_derived.subset_of(on_base)
    return geq(on_derived, on_base)


def check_full_invariance(func: BoundOrSelection, ctx: VerificationContext,
                          trials: int = 500, depth: int = 4,
                          seed: int = 0, max_messages: int = 5,
                          sample_terms: int = 40,
                          rng: Optional[random.Random] = None) -> PropertyReport:
    """Randomized search for a derivable message on which the bound reads
    lower than on the originating set.  Derived terms are sampled when the
    closure is large; the sampling is seeded and reported."""
    rng = rng or random.Random(seed)
    failures: list[Failure] = []
    truncated = 0
    for _ in range(trials):
        M = random_well_protected_set(rng, ctx, max_messages=max_messages)
        closure = deduce_closure(M, ctx, depth_budget=depth, round_cap=400)
        if closure.truncated:
            truncated += 1
        terms = sorted(closure.terms, key=lambda t: (_term_size(t), str(t)))
        if len(terms) > sample_terms:
            terms = rng.sample(terms, sample_terms)
        base_cache: dict[Atom, Union[SecurityLevel, SelectionResult]] = {}
        for t in terms:
            for a in sorted(atoms(t), key=lambda x: x.display()):
                if intruder_allowed(ctx, a):
                    continue
                try:
                    on_derived = func(a, t, ctx)
                    if a not in base_cache:
                        base_cache[a] = func(a, M, ctx)
                    on_base = base_cache[a]
                except WellProtectionViolation as err:
                    failures.append(Failure(
                        tuple(str(m) for m in M), str(t), a.display(),
                        f"protection violated on derived term: {err}"))
                    continue
                if not _dominates(on_derived, on_base):
                    failures.append(Failure(
                        tuple(str(m) for m in M), str(t), a.display(),
                        f"derived value {on_derived!r} below base value {on_base!r}"))
        if failures:
            break
    return PropertyReport("full-invariance", not failures, trials,
                          tuple(failures), (), truncated)


def check_non_disclosure(M: Sequence[Message], ctx: VerificationContext,
                         depth: int = 5) -> PropertyReport:
    """A well-protected set must not make any non-public atom derivable;
    an ill-protected input is a precondition failure, not a refutation."""
    wp = check_well_protected(M, ctx)
    if not wp.ok:
        pre = tuple(f"{a.display()} unprotected in {m}" for a, m, _ in wp.violations)
        return PropertyReport("non-disclosure", False, 0, (), pre, 0)
    closure = deduce_closure(M, ctx, depth_budget=depth)
    failures = []
    for t in sorted(closure.terms, key=str):
        if isinstance(t, Atomic) and not intruder_allowed(ctx, t.atom):
            failures.append(Failure(tuple(str(m) for m in M), str(t),
                                    t.atom.display(), "secret atom in the clear"))
    return PropertyReport("non-disclosure", not failures, 1, tuple(failures),
                          (), 1 if closure.truncated else 0)
