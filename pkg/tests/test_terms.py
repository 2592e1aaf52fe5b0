"""Message algebra: parsing, printing, atoms, substitution."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from secwitness.context import Mode, inverse_key, make_context
from secwitness.errors import (
    MessageSyntaxError,
    NotAKey,
    SubstitutedIntoKeyPosition,
    UndeclaredIdentifier,
    VariableInKeyPosition,
)
from secwitness.terms import (
    EMPTY,
    EMPTY_SUBSTITUTION,
    Atom,
    Atomic,
    Concat,
    Enc,
    Sort,
    Substitution,
    SymbolTable,
    atomic,
    atoms,
    concat,
    enc,
    encryption_patterns,
    flatten,
    parse_message,
    print_message,
    substitute,
    variables_of,
)

A = Atom("A")
B = Atom("B")
NA = Atom("Na")
NB = Atom("Nb")
KA = Atom("ka")
KB = Atom("kb")
X = Atom("X", Sort.VARIABLE)
Y = Atom("Y", Sort.VARIABLE)
A1 = Atom("A_1", Sort.PARAMETER)
NA1 = Atom("Na_1", Sort.PARAMETER)
KB1 = Atom("kb_1", Sort.PARAMETER)

SYMS = SymbolTable({a.name: a for a in (A, B, NA, NB, KA, KB, X, Y)})


def test_parse_enc_concat():
    m = parse_message("{A.Na}_kb", SYMS)
    assert m == enc(concat(atomic(A), atomic(NA)), KB)


def test_parse_with_variable():
    m = parse_message("{Na.X.B}_ka", SYMS)
    assert m == enc(concat(atomic(NA), atomic(X), atomic(B)), KA)


def test_parse_variable_in_key_position():
    with pytest.raises(VariableInKeyPosition):
        parse_message("{X}_Y", SYMS)


def test_parse_undeclared():
    with pytest.raises(UndeclaredIdentifier):
        parse_message("{A.Nc}_kb", SYMS)


def test_parse_syntax_error_has_position():
    with pytest.raises(MessageSyntaxError) as e:
        parse_message("{A.}_kb", SYMS)
    assert "position" in str(e.value) or any(ch.isdigit() for ch in str(e.value))


def test_parse_session_tag():
    m = parse_message("Na^i", SYMS)
    assert m == atomic(Atom("Na", session_tag="i"))


def test_atoms_of_encryption():
    m = parse_message("{A.Na}_kb", SYMS)
    assert atoms(m) == {A, NA, KB}


def test_atoms_atomic_and_empty():
    assert atoms(atomic(A)) == {A}
    assert atoms(EMPTY) == set()


def test_variables_of():
    assert variables_of(parse_message("{Na.X.B}_ka", SYMS)) == {X}
    assert variables_of(parse_message("{A.Na}_kb", SYMS)) == set()
    assert variables_of(concat(atomic(X), atomic(Y))) == {X, Y}


def test_substitute_variable():
    m = parse_message("{X}_kb", SYMS)
    s = Substitution({X: concat(atomic(A), atomic(NA))})
    assert substitute(m, s) == parse_message("{A.Na}_kb", SYMS)


def test_substitute_ground_identity():
    m = parse_message("{A.Na}_kb", SYMS)
    s = Substitution({X: atomic(A)})
    assert substitute(m, s) == m
    assert substitute(m, EMPTY_SUBSTITUTION) == m


def test_substitute_parameters():
    m = enc(concat(atomic(A1), atomic(NA1)), KB1)
    s = Substitution({A1: atomic(A), NA1: atomic(NA), KB1: atomic(KB)})
    assert substitute(m, s) == parse_message("{A.Na}_kb", SYMS)


def test_substitute_compound_into_key_position():
    m = enc(atomic(A), KB1)
    s = Substitution({KB1: concat(atomic(A), atomic(B))})
    with pytest.raises(SubstitutedIntoKeyPosition):
        substitute(m, s)


def test_substitution_rejects_constant_binding():
    with pytest.raises(ValueError):
        Substitution({NA: atomic(A)})


def test_inverse_key_involution():
    ctx = make_context(["A", "B", "I"], "I", {"ka-1": ["A"]},
                       [("ka", "ka-1", Mode.ASYMMETRIC)])
    ka, kainv = Atom("ka"), Atom("ka-1")
    assert inverse_key(ctx, ka) == kainv
    assert inverse_key(ctx, kainv) == ka
    assert inverse_key(ctx, inverse_key(ctx, ka)) == ka


def test_inverse_key_symmetric_self():
    ctx = make_context(["A", "B", "I"], "I", {"kab": ["A", "B"]},
                       [("kab", "kab", Mode.SYMMETRIC)])
    kab = Atom("kab")
    assert inverse_key(ctx, kab) == kab


def test_inverse_key_not_a_key():
    ctx = make_context(["A", "B", "I"], "I", {"ka-1": ["A"]},
                       [("ka", "ka-1", Mode.ASYMMETRIC)])
    with pytest.raises(NotAKey):
        inverse_key(ctx, NA)


def test_encryption_patterns_single():
    m = parse_message("A.B.{X}_kb", SYMS)
    assert encryption_patterns([m]) == [parse_message("{X}_kb", SYMS)]


def test_encryption_patterns_two_in_one_message():
    m = parse_message("{B.Y}_ka.{B.Nb}_ka", SYMS)
    assert encryption_patterns([m]) == [
        parse_message("{B.Y}_ka", SYMS),
        parse_message("{B.Nb}_ka", SYMS),
    ]


def test_encryption_patterns_none():
    assert encryption_patterns([atomic(A), concat(atomic(A), atomic(B))]) == []


# --- algebraic laws -------------------------------------------------------

leaves = st.sampled_from([atomic(a) for a in (A, B, NA, NB, X, Y)])
keys = st.sampled_from([KA, KB])


def messages(depth=3):
    return st.recursive(
        leaves,
        lambda kids: st.one_of(
            st.builds(lambda k, b: enc(b, k), keys, kids),
            st.lists(kids, min_size=2, max_size=3).map(lambda ps: concat(*ps)),
        ),
        max_leaves=6,
    )


ground_images = st.sampled_from([
    atomic(A), atomic(B), atomic(NA),
    concat(atomic(A), atomic(NA)),
    enc(atomic(NA), KB),
])


@given(messages())
@settings(max_examples=200)
def test_print_parse_round_trip(m):
    assert parse_message(print_message(m), SYMS) == m


@given(messages(), messages(), messages())
def test_concat_flattening(a, b, c):
    assert concat(concat(a, b), c) == concat(a, concat(b, c))
    assert flatten(concat(a, b, c)) == flatten(concat(a, concat(b, c)))


@given(messages(), messages(), ground_images, ground_images)
def test_substitute_homomorphism(a, b, ix, iy):
    s = Substitution({X: ix, Y: iy})
    assert substitute(concat(a, b), s) == concat(substitute(a, s), substitute(b, s))
    assert substitute(enc(a, KB), s) == enc(substitute(a, s), KB)


@given(messages(), ground_images, ground_images)
def test_substitute_atoms_law(m, ix, iy):
    s = Substitution({X: ix, Y: iy})
    expected = set()
    for a in atoms(m):
        img = s.image_of(a)
        expected |= atoms(img) if img is not None else {a}
    assert atoms(substitute(m, s)) == expected


@given(messages())
def test_parse_is_inverse_on_printed_forms(m):
    # printing twice through a parse is stable
    once = print_message(parse_message(print_message(m), SYMS))
    assert once == print_message(m)
