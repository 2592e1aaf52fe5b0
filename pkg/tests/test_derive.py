"""Variable erasure and source valuation through it."""

from __future__ import annotations

import pytest

from secwitness.context import BOTTOM, TOP, finite
from secwitness.derive import contribution_of, derive, derive_all, derive_keeping, f_derivative
from secwitness.errors import OccurrenceNotFound
from secwitness.selection import value_function
from secwitness.terms import (
    Atom,
    Sort,
    Substitution,
    atomic,
    atoms,
    concat,
    enc,
    parse_message,
    substitute,
    variables_of,
)
from secwitness.unify import unify

FMAX = value_function("fmax")

X = Atom("X", Sort.VARIABLE)
Y = Atom("Y", Sort.VARIABLE)


def _pattern(pool, text):
    by_str = {str(m): m for m in pool}
    return by_str[text]


def _role_send(roles, role_id, index):
    role = next(r for r in roles if r.role_id == role_id)
    return role.steps[index].message


def test_derive_removes_listed_variable(ns):
    m = parse_message("{Na.X.B}_ka", ns.symbols)
    assert derive(m, {X}) == parse_message("{Na.B}_ka", ns.symbols)


def test_derive_ground_noop(ns):
    m = parse_message("{A.Na}_kb", ns.symbols)
    assert derive(m, {X, Y}) == m


def test_derive_keeping(ns):
    m = parse_message("{Na.X.B}_ka", ns.symbols)
    assert derive_keeping(m, X) == m
    assert derive_all(m) == parse_message("{Na.B}_ka", ns.symbols)


def test_derive_empty_set_noop(ns):
    m = parse_message("{Na.X.B}_ka", ns.symbols)
    assert derive(m, set()) == m


def test_derive_order_free(ns):
    m = concat(atomic(X), parse_message("{Na.X.B}_ka", ns.symbols), atomic(Y))
    assert derive(m, {X, Y}) == derive(derive(m, {Y}), {X})
    assert variables_of(derive(m, {X, Y})) == set()


def test_derive_idempotent_per_variable(ns):
    m = parse_message("{Na.X.B}_ka", ns.symbols)
    assert derive(derive(m, {X}), {X}) == derive(m, {X})


# --- valuation on sources --------------------------------------------------


def test_static_case_initial_pattern(ns, ns_roles, ns_pool):
    source = _pattern(ns_pool, "{A_1.Na_1}_kb_1")
    target = _role_send(ns_roles, "A_G1", 0)           # {A.Na^i}_kb
    alpha = next(a for a in atoms(target) if a.base_name == "Na")
    sigma = unify(source, target)
    assert sigma is not None
    assert f_derivative(FMAX, alpha, source, sigma, ns.context) == finite(["A", "B"])


def test_dynamic_case_own_variable(ns, ns_roles, ns_pool):
    source = _pattern(ns_pool, "{X_2}_kb_3")
    target = _role_send(ns_roles, "A_G2", 2)           # {X}_kb
    alpha = next(iter(variables_of(target)))
    sigma = unify(source, target)
    assert f_derivative(FMAX, alpha, source, sigma, ns.context) == finite(["B"])


def test_dynamic_case_absorbed_occurrence(ns, ns_roles, ns_pool):
    # the queried nonce rides inside an absorbing variable of the source
    source = _pattern(ns_pool, "{A_3.Y_1}_kb_4")
    target = _role_send(ns_roles, "B_G1", 1)           # {Y.Nb^i.B}_ka
    alpha = next(a for a in atoms(target) if a.base_name == "Nb")
    sigma = unify(source, target)
    assert sigma is not None
    got = f_derivative(FMAX, alpha, source, sigma, ns.context)
    assert got == finite(["A", "A_3"])


def test_value_ignores_variable_bindings(ns, ns_roles, ns_pool):
    source = _pattern(ns_pool, "{X_2}_kb_3")
    target = _role_send(ns_roles, "A_G2", 2)
    alpha = next(iter(variables_of(target)))
    sigma = unify(source, target)
    x2 = next(iter(variables_of(source)))
    resigned = Substitution({
        **{a: m for a, m in sigma.items() if a != x2},
        x2: concat(atomic(alpha), atomic(Atom("C"))),
    })
    assert (f_derivative(FMAX, alpha, source, resigned, ns.context)
            == f_derivative(FMAX, alpha, source, sigma, ns.context))


def test_occurrence_not_found(ns, ns_pool):
    source = _pattern(ns_pool, "{A_1.Na_1}_kb_1")
    ghost = Atom("Nc")
    with pytest.raises(OccurrenceNotFound):
        f_derivative(FMAX, ghost, source, Substitution(), ns.context)


def test_no_contribution_is_none(ns, ns_roles, ns_pool):
    # {A_1.Na_1}_kb_1 says nothing about the content of a sent variable
    source = _pattern(ns_pool, "{A_1.Na_1}_kb_1")
    target = _role_send(ns_roles, "A_G2", 2)           # {X}_kb
    alpha = next(iter(variables_of(target)))
    sigma = unify(source, target)
    assert sigma is not None
    assert contribution_of(FMAX, alpha, source, sigma, ns.context) is None


def test_renaming_a_queried_variable_is_no_claim(ns, ns_roles, ns_pool):
    # {Nb_6}_kb_6 unifies with {X}_kb by renaming X; that gives no view on X
    source = _pattern(ns_pool, "{Nb_6}_kb_6")
    target = _role_send(ns_roles, "A_G2", 2)
    alpha = next(iter(variables_of(target)))
    sigma = unify(source, target)
    assert sigma is not None
    assert contribution_of(FMAX, alpha, source, sigma, ns.context) is None


def test_overlapping_occurrences_meet(witness_ctx, witness_pool):
    # alpha occurs statically and inside the bound variable: both views count
    source = witness_pool[0]                           # {alpha.B.X}_kad
    alpha = Atom("alpha")
    x = next(iter(variables_of(source)))
    sigma = Substitution({x: concat(atomic(alpha), atomic(Atom("B")))})
    static_only = FMAX(alpha, derive_all(source), witness_ctx)
    dynamic_only = FMAX(x, source, witness_ctx)
    got = contribution_of(FMAX, alpha, source, sigma, witness_ctx)
    from secwitness.context import meet
    assert got == meet(static_only, dynamic_only)
