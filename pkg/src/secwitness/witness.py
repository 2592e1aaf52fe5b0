"""The secrecy criterion: per-send bounds, their comparison, and reports.

For every value an agent sends under protection, two levels are compared.
The sent-side bound asks: across everything this message could be an
instance of, who could the protected value have been addressed to?  The
reception-side estimate asks: who could have authored what the agent had
received by then?  The criterion holds when the sent-side bound reads at
least as restrictively as the declared level tightened by the estimate.
When it fails, the names on the sent side that the reception side cannot
justify are reported; a failure means no decision, not a proven leak.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .context import (
    BOTTOM,
    TOP,
    SecurityLevel,
    VerificationContext,
    geq,
    level_of,
    meet,
    meet_all,
)
from .derive import ValueFunction, derive, derive_all, derive_keeping
from .errors import NoProtectivePattern, WellProtectionViolation
from .rewrite import check_well_protected
from .roles import (
    RECV,
    SEND,
    GeneralizedRole,
    Protocol,
    generalized_message_space,
    roles_for,
)
from .selection import value_function
from .terms import (
    Atom,
    Atomic,
    Enc,
    Message,
    Sort,
    Substitution,
    atoms,
    body_atoms_in_order,
    flatten,
    print_message,
    substitute,
    variables_of,
)
from .unify import candidate_values


class _SymbolicUnknown:
    """Stands in for the declared level of a variable row: the row ranges
    over every value the variable could take."""

    def __repr__(self) -> str:
        return "∀"


SYMBOLIC_UNKNOWN = _SymbolicUnknown()


def lower_bound(alpha: Atom, sent: Message, pool: Sequence[Message],
                F: ValueFunction, ctx: VerificationContext) -> SecurityLevel:
    """Who the sent occurrence of the atom could be addressed to, folded
    over every pattern the protecting part might instantiate."""
    values: list[SecurityLevel] = []
    for part in flatten(sent):
        if isinstance(part, Atomic):
            if part.atom != alpha:
                continue
            if alpha.sort is Sort.VARIABLE or not level_of(ctx, alpha).is_bottom:
                raise NoProtectivePattern(alpha.display(), print_message(sent))
            continue
        if alpha not in atoms(part):
            continue
        values.extend(candidate_values(part, pool, ctx, alpha, F))
    return meet_all(values)


def upper_bound(alpha: Atom, m: Union[Message, Iterable[Message]],
                F: ValueFunction, ctx: VerificationContext) -> SecurityLevel:
    """Who could have authored the atom's occurrences in a reception,
    with the other variables erased."""
    if not isinstance(m, Message):
        return meet_all([upper_bound(alpha, member, F, ctx) for member in m])
    if alpha.sort is Sort.VARIABLE:
        pruned = derive_keeping(m, alpha)
    else:
        pruned = derive_all(m)
    return F(alpha, pruned, ctx)


def reception_estimate(alpha: Atom, received: Sequence[Message],
                       F: ValueFunction, ctx: VerificationContext) -> SecurityLevel:
    """The reception-side level for a row: for a variable, its own bound
    across the receptions; for a fixed atom, its bound tightened by the
    bound of every variable those receptions carry."""
    if not received:
        return TOP
    values: list[SecurityLevel] = []
    for m in received:
        values.append(upper_bound(alpha, m, F, ctx))
        if alpha.sort is not Sort.VARIABLE:
            for var in sorted(variables_of(m), key=lambda a: a.name):
                values.append(upper_bound(var, m, F, ctx))
    return meet_all(values)


def witness_value(alpha: Atom, source: Message, sigma: Substitution,
                  space: Union[Protocol, Sequence[Message]],
                  F: ValueFunction, ctx: Optional[VerificationContext] = None) -> SecurityLevel:
    """The bound of the atom in a closed instance of a sent message, folded
    over the patterns the instance matches."""
    if isinstance(space, Protocol):
        from .roles import pattern_space

        ctx = ctx or space.context
        pool = pattern_space(space)
    else:
        pool = list(space)
    assert ctx is not None, "a context is required with an explicit pattern pool"
    closed = substitute(source, sigma)
    values: list[SecurityLevel] = []
    for part in flatten(closed):
        if alpha not in atoms(part):
            continue
        if isinstance(part, Atomic):
            continue
        values.extend(candidate_values(part, pool, ctx, alpha, F))
    return meet_all(values)


@dataclass(frozen=True)
class CriterionRow:
    atom: Atom
    role_id: str
    agent: str
    step: int
    received: tuple[Message, ...]
    sent: Message
    lower: SecurityLevel
    atom_level: Union[SecurityLevel, _SymbolicUnknown]
    estimate: SecurityLevel
    fulfilled: bool
    blame: frozenset[str]

    @property
    def is_variable(self) -> bool:
        return self.atom.sort is Sort.VARIABLE


@dataclass(frozen=True)
class AnalysisReport:
    protocol: str
    function: str
    rows: tuple[CriterionRow, ...]
    fulfilled: bool
    pool: tuple[Message, ...]


def _row_for(alpha: Atom, role: GeneralizedRole, position: int,
             sent: Message, received: tuple[Message, ...],
             pool: Sequence[Message], F: ValueFunction,
             ctx: VerificationContext) -> CriterionRow:
    estimate = reception_estimate(alpha, received, F, ctx)
    if alpha.sort is Sort.VARIABLE:
        atom_level: Union[SecurityLevel, _SymbolicUnknown] = SYMBOLIC_UNKNOWN
        required = estimate
    else:
        atom_level = level_of(ctx, alpha)
        required = meet(atom_level, estimate)
    try:
        lower = lower_bound(alpha, sent, pool, F, ctx)
        fulfilled = geq(lower, required)
        if fulfilled:
            blame: frozenset[str] = frozenset()
        elif lower.is_bottom or required.is_bottom:
            blame = frozenset({alpha.display()})
        else:
            blame = frozenset(lower.members - required.members)
    except NoProtectivePattern:
        lower = BOTTOM
        fulfilled = False
        blame = frozenset({alpha.display()})
    step = role.steps[position]
    return CriterionRow(
        atom=alpha,
        role_id=role.role_id,
        agent=role.agent.name,
        step=step.step_id if step.step_id is not None else position + 1,
        received=received,
        sent=sent,
        lower=lower,
        atom_level=atom_level,
        estimate=estimate,
        fulfilled=fulfilled,
        blame=blame,
    )


def _eligible(sent: Message, ctx: VerificationContext) -> list[Atom]:
    out = []
    for a in body_atoms_in_order(sent):
        if a.sort is Sort.VARIABLE or not level_of(ctx, a).is_bottom:
            out.append(a)
    return out


def analyze(protocol: Protocol, function: str = "fmax",
            roles: Optional[Sequence[GeneralizedRole]] = None) -> AnalysisReport:
    """Runs the criterion over every distinct send position; the pattern
    space must be well protected or the analysis refuses to start."""
    ctx = protocol.context
    role_list = list(roles) if roles is not None else list(roles_for(protocol))
    pool = generalized_message_space(role_list, ctx, protocol.fresh_owners)
    wp = check_well_protected(pool, ctx)
    if not wp.ok:
        worst = wp.violations[0]
        raise WellProtectionViolation(worst[0].display(), print_message(worst[1]))
    F = value_function(function)

    rows: list[CriterionRow] = []
    seen: set[tuple[str, int, Atom]] = set()
    for role in role_list:
        for position, st in enumerate(role.steps):
            if st.direction is not SEND:
                continue
            received = role.received_before(position)
            for alpha in _eligible(st.message, ctx):
                key = (role.agent.name, position, alpha)
                if key in seen:
                    continue
                seen.add(key)
                rows.append(_row_for(alpha, role, position, st.message, received, pool, F, ctx))

    return AnalysisReport(
        protocol=protocol.name,
        function=function,
        rows=tuple(rows),
        fulfilled=all(r.fulfilled for r in rows),
        pool=tuple(pool),
    )


# ---------------------------------------------------------------------------
# Rendering


def _atom_cell(row: CriterionRow) -> str:
    return f"∀{row.atom.display()}" if row.is_variable else row.atom.display()


def _received_cell(row: CriterionRow) -> str:
    if not row.received:
        return "∅"
    return " , ".join(print_message(m) for m in row.received)


def render_table(report: AnalysisReport) -> str:
    headers = ("atom", "role", "received", "sent", "bound", "level", "estimate", "verdict")
    body = []
    for r in report.rows:
        body.append((
            _atom_cell(r),
            r.role_id,
            _received_cell(r),
            print_message(r.sent),
            repr(r.lower),
            repr(r.atom_level),
            repr(r.estimate),
            "Fulfilled" if r.fulfilled else "NotFulfilled",
        ))
    widths = [max(len(h), *(len(row[i]) for row in body)) if body else len(h)
              for i, h in enumerate(headers)]
    def fmt(cells: Sequence[str]) -> str:
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    lines = [fmt(headers), fmt(tuple("-" * w for w in widths))]
    lines.extend(fmt(row) for row in body)
    for r in report.rows:
        if not r.fulfilled:
            lines.append(f"unjustified on {_atom_cell(r)} ({r.role_id}): {', '.join(sorted(r.blame))}")
    return "\n".join(lines)


@dataclass(frozen=True, eq=True)
class RowRecord:
    """JSON-faithful image of a criterion row."""

    atom: str
    variable: bool
    role: str
    agent: str
    step: int
    received: tuple
    sent: str
    lowerBound: tuple
    atomLevel: tuple
    receptionEstimate: tuple
    verdict: str
    blame: tuple

    def to_json(self) -> str:
        def level_obj(t: tuple) -> dict:
            kind, payload = t
            return {kind: payload if kind == "members" else True}

        return json.dumps({
            "atom": self.atom,
            "variable": self.variable,
            "role": self.role,
            "agent": self.agent,
            "step": self.step,
            "received": list(self.received),
            "sent": self.sent,
            "lowerBound": level_obj(self.lowerBound),
            "atomLevel": level_obj(self.atomLevel),
            "receptionEstimate": level_obj(self.receptionEstimate),
            "verdict": self.verdict,
            "blame": list(self.blame),
        }, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "RowRecord":
        data = json.loads(line)

        def level_tuple(obj: dict) -> tuple:
            if obj.get("bottom"):
                return ("bottom", True)
            if obj.get("unknown"):
                return ("unknown", True)
            return ("members", tuple(obj.get("members", ())))

        return cls(
            atom=data["atom"],
            variable=data["variable"],
            role=data["role"],
            agent=data["agent"],
            step=data["step"],
            received=tuple(data["received"]),
            sent=data["sent"],
            lowerBound=level_tuple(data["lowerBound"]),
            atomLevel=level_tuple(data["atomLevel"]),
            receptionEstimate=level_tuple(data["receptionEstimate"]),
            verdict=data["verdict"],
            blame=tuple(data["blame"]),
        )


def _level_tuple(level: Union[SecurityLevel, _SymbolicUnknown]) -> tuple:
    if isinstance(level, _SymbolicUnknown):
        return ("unknown", True)
    if level.is_bottom:
        return ("bottom", True)
    return ("members", tuple(sorted(level.members)))


def row_record(r: CriterionRow) -> RowRecord:
    return RowRecord(
        atom=r.atom.display(),
        variable=r.is_variable,
        role=r.role_id,
        agent=r.agent,
        step=r.step,
        received=tuple(print_message(m) for m in r.received),
        sent=print_message(r.sent),
        lowerBound=_level_tuple(r.lower),
        atomLevel=_level_tuple(r.atom_level),
        receptionEstimate=_level_tuple(r.estimate),
        verdict="Fulfilled" if r.fulfilled else "NotFulfilled",
        blame=tuple(sorted(r.blame)),
    )


def to_json_lines(report: AnalysisReport) -> str:
    return "\n".join(row_record(r).to_json() for r in report.rows)


def from_json_lines(text: str) -> list[RowRecord]:
    return [RowRecord.from_json(line) for line in text.splitlines() if line.strip()]
