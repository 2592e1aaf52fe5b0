"""Command line behaviour: exit codes, formats, and flag plumbing."""

from __future__ import annotations

import pytest

from secwitness.cli import EXIT_FILE, EXIT_OK, EXIT_UNDECIDED, EXIT_USAGE, main
from secwitness.protocols import bundled
from secwitness.witness import analyze, from_json_lines, row_record

WEAK = (
    "protocol Weak;\n"
    "principal A, B, C;\n"
    "intruder I;\n"
    "key kc inv kc-1;\n"
    "fresh Na by A;\n"
    "level Na = {A, B};\n"
    "level kc-1 = {C};\n"
    "step 1: A -> B : {A.Na}_kc;\n"
)


@pytest.fixture()
def ns_file(tmp_path):
    f = tmp_path / "ns.proto"
    f.write_text(bundled("ns"), encoding="utf-8")
    return str(f)


@pytest.fixture()
def nsl_file(tmp_path):
    f = tmp_path / "nsl.proto"
    f.write_text(bundled("nsl"), encoding="utf-8")
    return str(f)


def test_analyze_ns_gives_no_decision(ns_file, capsys):
    assert main(["analyze", ns_file]) == EXIT_UNDECIDED
    captured = capsys.readouterr()
    assert "NotFulfilled" in captured.out
    assert "unjustified on Nb^i (B_G1): A_3" in captured.out
    assert "no decision" in captured.err


def test_analyze_nsl_passes(nsl_file, capsys):
    assert main(["analyze", nsl_file]) == EXIT_OK
    captured = capsys.readouterr()
    assert "Fulfilled" in captured.out
    assert captured.err == ""


def test_missing_file(tmp_path, capsys):
    assert main(["analyze", str(tmp_path / "nope.proto")]) == EXIT_FILE
    assert "error:" in capsys.readouterr().err


def test_unparsable_file(tmp_path, capsys):
    f = tmp_path / "bad.proto"
    f.write_text("protocol ???\nnot a statement\n", encoding="utf-8")
    assert main(["analyze", str(f)]) == EXIT_FILE
    assert "error:" in capsys.readouterr().err


def test_unknown_subcommand(capsys):
    assert main(["frobnicate", "x"]) == EXIT_USAGE
    assert "usage error" in capsys.readouterr().err


def test_no_arguments(capsys):
    assert main([]) == EXIT_USAGE


def test_bad_function_value(ns_file, capsys):
    assert main(["analyze", ns_file, "--function", "bogus"]) == EXIT_USAGE


def test_json_lines_round_trip_and_stability(ns, ns_file, capsys):
    assert main(["analyze", ns_file, "--format", "json-lines"]) == EXIT_UNDECIDED
    first = capsys.readouterr().out
    main(["analyze", ns_file, "--format", "json-lines"])
    second = capsys.readouterr().out
    assert first == second
    assert from_json_lines(first) == [row_record(r) for r in analyze(ns).rows]


@pytest.mark.parametrize("name", ["fmax", "fek", "fn"])
def test_function_flag(ns, ns_file, capsys, name):
    want = EXIT_OK if analyze(ns, function=name).fulfilled else EXIT_UNDECIDED
    assert main(["analyze", ns_file, "--function", name]) == want
    assert f"function {name}" in capsys.readouterr().out


def test_function_env_default(ns_file, capsys, monkeypatch):
    monkeypatch.setenv("SECWITNESS_FUNCTION", "fek")
    main(["analyze", ns_file])
    assert "function fek" in capsys.readouterr().out
    # an explicit flag still wins
    main(["analyze", ns_file, "--function", "fmax"])
    assert "function fmax" in capsys.readouterr().out


def test_check_wp_accepts_the_handshakes(ns_file, nsl_file, capsys):
    assert main(["check-wp", ns_file]) == EXIT_OK
    assert "well protected" in capsys.readouterr().out
    assert main(["check-wp", nsl_file]) == EXIT_OK


def test_check_wp_flags_a_weak_key(tmp_path, capsys):
    # the nonce is shared by A and B but travels under a key C can open
    f = tmp_path / "weak.proto"
    f.write_text(WEAK, encoding="utf-8")
    assert main(["check-wp", str(f)]) == EXIT_UNDECIDED
    assert "unprotected: Na" in capsys.readouterr().out


def test_roles_listing(ns_file, capsys):
    assert main(["roles", ns_file]) == EXIT_OK
    out = capsys.readouterr().out
    for needle in ("A_G1", "A_G2", "B_G1", "B_G2", "pattern space:", "{X_2}_kb_3"):
        assert needle in out


def test_roles_auto_agrees_with_declared(ns_file, capsys):
    assert main(["analyze", ns_file, "--roles", "manual", "--format", "json-lines"]) == EXIT_UNDECIDED
    declared = capsys.readouterr().out
    assert main(["analyze", ns_file, "--roles", "auto", "--format", "json-lines"]) == EXIT_UNDECIDED
    computed = capsys.readouterr().out
    assert declared == computed


def test_oracle_subcommand(nsl_file, capsys):
    assert main(["oracle", nsl_file, "--trials", "3", "--depth", "3", "--seed", "0"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "full-invariance[fmax]: ok" in out
    assert "full-invariance[fek]: ok" in out
    assert "full-invariance[fn]: ok" in out
    assert "non-disclosure[one honest session]: ok" in out
