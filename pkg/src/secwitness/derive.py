"""Variable pruning and the closed/abstract valuation of a matched source.

Pruning erases chosen variables from a message (encryption keys are never
variables, so structure above survives).  The valuation of a candidate match
looks at the source two ways: with the queried atom fixed and every variable
erased, and once per source variable whose image contains the queried atom,
with that one variable kept.  The two views overlap by meet, so adding a
view can only tighten the answer.
"""

from __future__ import annotations

from typing import Callable, Iterable, Optional, Union

from .context import TOP, SecurityLevel, VerificationContext, meet_all
from .errors import OccurrenceNotFound
from .terms import (
    EMPTY,
    Atom,
    Atomic,
    Concat,
    Enc,
    Message,
    Sort,
    Substitution,
    atoms,
    concat,
    substitute,
    variables_of,
)

ValueFunction = Callable[[Atom, Union[Message, Iterable[Message]], VerificationContext], SecurityLevel]


def derive(m: Message, remove: Iterable[Atom]) -> Message:
    """Erase the given variables; other sorts are untouched."""
    gone = {a for a in remove if a.sort is Sort.VARIABLE}
    if not gone:
        return m

    def go(t: Message) -> Message:
        if isinstance(t, Atomic):
            return EMPTY if t.atom in gone else t
        if isinstance(t, Concat):
            return concat(*(go(p) for p in t.parts))
        if isinstance(t, Enc):
            return Enc(go(t.body), t.key, t.mode)
        return t

    return go(m)


def derive_all(m: Message) -> Message:
    """Erase every variable."""
    return derive(m, variables_of(m))


def derive_keeping(m: Message, keep: Atom) -> Message:
    """Erase every variable except the given one."""
    return derive(m, variables_of(m) - {keep})


def contribution_of(F: ValueFunction, alpha: Atom, source: Message,
                    sigma: Substitution, ctx: VerificationContext) -> Optional[SecurityLevel]:
    """The candidate's value for the queried atom, or None when this
    candidate says nothing about it.

    Static view: parameters of the source take their matched images (atomic
    images only ever arise there); all variables are erased; if the queried
    atom, or the source atom it was matched to, survives, the bound of that
    atom in the pruned source counts.  Dynamic view: each source variable
    whose image contains the queried atom contributes the bound of the
    variable in the source pruned down to it.
    """
    param_only = sigma.restrict(lambda a: a.sort is Sort.PARAMETER)
    inst = substitute(source, param_only)
    values: list[SecurityLevel] = []

    # A fixed queried atom may have been matched by one of the source's own
    # names; the source then speaks about it under that name.  A queried
    # variable gets no such transfer: renaming it tells us nothing about
    # what it carries, only the dynamic view below does.
    probe = alpha
    if alpha.sort is not Sort.VARIABLE:
        image = sigma.image_of(alpha)
        if isinstance(image, Atomic):
            probe = image.atom
    static_view = derive_all(inst)
    if probe in atoms(static_view):
        values.append(F(probe, static_view, ctx))

    for var in sorted(variables_of(source), key=lambda a: a.name):
        image = sigma.image_of(var)
        if image is None:
            continue
        if alpha in atoms(image):
            values.append(F(var, derive(inst, variables_of(inst) - {var}), ctx))

    if not values:
        return None
    return meet_all(values)


def f_derivative(F: ValueFunction, alpha: Atom, source: Message,
                 sigma: Substitution, ctx: VerificationContext) -> SecurityLevel:
    """Valuation of one candidate; the queried atom must occur once the
    match is applied."""
    value = contribution_of(F, alpha, source, sigma, ctx)
    if value is not None:
        return value
    if alpha not in atoms(substitute(source, sigma)):
        raise OccurrenceNotFound(alpha.display(), str(source))
    return TOP
