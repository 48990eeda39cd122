import io
import json
import os
import subprocess
import sys
from fractions import Fraction

import pytest

from subreal import base as B
from subreal import cli
from subreal import elementary as EL
from subreal import systems as S
from subreal import witnesses as W
from subreal.names import name_of_rational

from cli_corpus import CORPUS, prepare


def run(*argv, cwd=None):
    out, err = io.StringIO(), io.StringIO()
    old = os.getcwd()
    if cwd is not None:
        os.chdir(cwd)
    try:
        code = cli.main(list(argv), out=out, err=err)
    finally:
        os.chdir(old)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def workdir(tmp_path):
    prepare(tmp_path)
    return tmp_path


class TestEval:
    def test_reciprocal(self):
        assert run("eval", "1/x", "--var", "x=1/2", "--t", "9") == (0, "2 (± 1/10)\n", "")

    def test_identity_zero(self):
        assert run("eval", "x", "--var", "x=0", "--t", "5")[1] == "0 (± 1/6)\n"

    def test_decimal_flagged(self):
        code, out, _ = run("eval", "exp(ln(2))", "--eps", "1/1000", "--format", "decimal:6")
        assert code == 0 and "± 1/1000" in out
        assert abs(Fraction(out.split()[0]) - 2) < Fraction(1, 1000) + Fraction(1, 10**6)

    def test_decimal_rounding_is_correct(self):
        code, out, _ = run("eval", "x", "--var", "x=1/3", "--t", "2", "--format", "decimal:3")
        value = cli.S.eval_conditional(EL.compile_expression("x"), [name_of_rational(Fraction(1, 3))], 2).value
        shown = Fraction(out.split()[0])
        assert abs(shown - value) <= Fraction(1, 2000)
        assert "rounded" in out or shown == value

    def test_eps_matches_t(self):
        for t in (0, 4, 99):
            a = run("eval", "1/x + x", "--var", "x=3/5", "--t", str(t))
            b = run("eval", "1/x + x", "--var", "x=3/5", "--eps", f"1/{t + 1}")
            assert a == b

    def test_global_flags_before_subcommand(self):
        assert run("--t", "9", "eval", "1/x", "--var", "x=1/2") == run("eval", "1/x", "--var", "x=1/2", "--t", "9")

    def test_trace(self):
        code, out, _ = run("eval", "1/x", "--var", "x=1/2", "--t", "9", "--trace")
        lines = out.splitlines()
        assert code == 0 and lines[-1] == "2 (± 1/10)"
        assert all(line.startswith("node=") for line in lines[:-1]) and len(lines) > 2

    @pytest.mark.parametrize("argv", [
        ["eval", "1 +"], ["eval", "x", "--var", "x"], ["eval", "x", "--var", "x=1/0"],
        ["eval", "x", "--t", "-3"], ["eval", "x", "--t", "2", "--eps", "1/3"], ["eval", "x", "--eps", "0"],
        ["eval", "x", "--format", "hex"], ["frobnicate"],
    ])
    def test_parse_errors(self, argv):
        assert run(*argv)[0] == 1

    def test_unbound(self):
        code, _, err = run("eval", "x + y", "--var", "x=1")
        assert code == 2 and "'y'" in err

    def test_budget(self):
        code, out, err = run("eval", "1/(x-x)", "--var", "x=1", "--budget", "300")
        assert code == 3 and out == ""
        assert "0..300" in err and "reciprocal" in err


class TestTranslate:
    def test_roundtrip_preserves_contract(self, workdir):
        assert run("translate", "cond-to-tz", "recip.cond", "r.tz", cwd=workdir)[0] == 0
        assert (workdir / "r.tz.provenance.json").exists()
        json.loads((workdir / "r.tz.provenance.json").read_text())
        assert run("translate", "tz-to-cond", "r.tz", "back.cond", cwd=workdir)[0] == 0
        back = S.loads((workdir / "back.cond").read_text())
        for xi in (Fraction(1, 3), Fraction(-2, 7), Fraction(5)):
            for t in (0, 10, 60):
                value = S.eval_conditional(back, [name_of_rational(xi)], t).value
                assert abs(value - 1 / xi) < Fraction(1, t + 1)

    def test_normalize_idempotent(self, workdir):
        run("translate", "normalize", "recip.cond", "n1.cond", cwd=workdir)
        run("translate", "normalize", "n1.cond", "n2.cond", cwd=workdir)
        n1 = S.loads((workdir / "n1.cond").read_text())
        n2 = S.loads((workdir / "n2.cond").read_text())
        for xi in (Fraction(1, 2), Fraction(-7, 3)):
            for t in (3, 40):
                for sys in (n1, n2):
                    value = S.eval_conditional(sys, [name_of_rational(xi)], t).value
                    assert abs(value - 1 / xi) < Fraction(1, t + 1)

    def test_unif_to_cond_identity_gate(self, workdir):
        assert run("translate", "unif-to-cond", "builtin:add", "a.cond", cwd=workdir)[0] == 0
        assert ":E x\n" in (workdir / "a.cond").read_text()

    def test_uniform_witness_chain(self, workdir):
        assert run("translate", "unif-to-tz", "builtin:mul", "m.tz", cwd=workdir)[0] == 0
        assert run("translate", "tz-to-unif", "m.tz", "m.unif", cwd=workdir)[0] == 0
        sys = S.loads((workdir / "m.unif").read_text())
        value = S.eval_uniform(sys, [name_of_rational(2), name_of_rational(Fraction(-1, 3))], 50).value
        assert abs(value + Fraction(2, 3)) < Fraction(1, 51)

    def test_wrong_kind(self, workdir):
        assert run("translate", "tz-to-cond", "recip.cond", "x.cond", cwd=workdir)[0] == 1

    def test_missing_file(self, workdir):
        assert run("translate", "cond-to-tz", "nope.cond", "x.tz", cwd=workdir)[0] == 1

    def test_malformed_file(self, workdir):
        (workdir / "bad.cond").write_text("(conditional-system :k 1 :E (apply 1 x)")
        assert run("translate", "cond-to-tz", "bad.cond", "x.tz", cwd=workdir)[0] == 1

    def test_missing_modulus(self, workdir):
        if "test.cli.nomaj" not in B.native_names():
            B.register_native(B.Native("test.cli.nomaj", 1, lambda x: x))
        (workdir / "nomaj.cond").write_text(
            "(conditional-system :k 1 :E x :F (base (native test.cli.nomaj) (apply 1 x))"
            " :G x :H x)")
        code, _, err = run("translate", "cond-to-tz", "nomaj.cond", "x.tz", cwd=workdir)
        assert code == 4 and "modulus" in err


class TestBound:
    def test_reciprocal(self):
        code, out, _ = run("bound", "builtin:reciprocal", "--point", "1/2")
        assert code == 0 and "T = 3\n" in out and "note:" in out

    def test_lifted(self):
        code, out, _ = run("bound", "builtin:add", "--point", "1/3", "--point", "-4")
        assert code == 0 and "T = 0\n" in out

    def test_normalized_has_no_notice(self, workdir):
        run("translate", "normalize", "recip.cond", "n.cond", cwd=workdir)
        code, out, _ = run("bound", "n.cond", "--point", "1/2", cwd=workdir)
        assert code == 0 and "note:" not in out

    def test_outside_domain(self):
        assert run("bound", "builtin:reciprocal", "--point", "0", "--budget", "300")[0] == 3

    def test_dimension_mismatch(self):
        assert run("bound", "builtin:add", "--point", "1")[0] == 1


class TestCheck:
    def test_correct(self):
        code, out, _ = run("check", "builtin:reciprocal-tz", "--point", "1/2", "--function", "reciprocal")
        assert code == 0 and out.endswith("0 violations\n")

    def test_sabotaged(self, workdir):
        code, out, _ = run("check", "sabotaged.tz", "--point", "1/2", "--expect", "1/2", cwd=workdir)
        assert code == 5 and "violation:" in out
        replay = json.loads((workdir / "replay-seed0.json").read_text())
        assert replay["violations"]

    def test_zero_samples(self):
        code, out, _ = run("check", "builtin:identity-tz", "--point", "0", "--expect", "0", "--samples", "0")
        assert code == 0 and len(out.splitlines()) == 2

    def test_needs_target(self):
        assert run("check", "builtin:identity-tz", "--point", "0")[0] == 1

    def test_function_outside_domain(self):
        assert run("check", "builtin:reciprocal-tz", "--point", "0", "--function", "reciprocal")[0] == 1


class TestParseBase:
    def test_ok(self):
        code, out, _ = run("parse-base", "(subst (mul) (proj 2 1) (proj 2 1))", "--args", "7,1")
        assert code == 0
        assert out.splitlines() == ["arity = 2", "term = (subst (mul) (proj 2 1) (proj 2 1))",
                                    "value = 49", "majorant = 49"]

    def test_syntax_error(self):
        code, _, err = run("parse-base", "(subst (mul)\n (proj 2 1)")
        assert code == 1 and "line 1" in err

    def test_arity_error(self):
        assert run("parse-base", "(subst (mul) (proj 2 1))")[0] == 1

    def test_wrong_arg_count(self):
        assert run("parse-base", "(mul)", "--args", "1")[0] == 1


@pytest.mark.parametrize("argv,code", CORPUS, ids=[" ".join(a)[:60] for a, _ in CORPUS])
def test_corpus_exit_codes(argv, code, workdir):
    assert run(*argv, cwd=workdir)[0] == code


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "subreal.cli", "eval", "1/x", "--var", "x=1/2", "--t", "9"],
                          capture_output=True, cwd=tmp_path)
    assert proc.returncode == 0 and proc.stdout == "2 (± 1/10)\n".encode()
