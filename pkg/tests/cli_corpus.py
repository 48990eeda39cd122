"""CLI invocations shared by the CLI tests and the determinism check.

Each entry is (argv, expected exit code).  File arguments refer to names
created by ``prepare`` inside a scratch directory.
"""
import dataclasses

from subreal import base as B
from subreal import elementary as EL
from subreal import systems as S
from subreal import witnesses as W

CORPUS = [
    (["eval", "1/x", "--var", "x=1/2", "--t", "9"], 0),
    (["eval", "x", "--var", "x=0", "--t", "5"], 0),
    (["eval", "exp(ln(2))", "--eps", "1/1000", "--format", "decimal:6"], 0),
    (["eval", "sin(x)*sin(x) + cos(x)*cos(x)", "--var", "x=3/7", "--t", "99", "--trace"], 0),
    (["--t", "30", "eval", "sqrt(x) - 1/y", "--var", "x=2", "--var", "y=-3"], 0),
    (["eval", "1 +", "--t", "3"], 1),
    (["eval", "x + y", "--var", "x=1"], 2),
    (["eval", "1/(x-x)", "--var", "x=1/3", "--budget", "400"], 3),
    (["bound", "builtin:reciprocal", "--point", "1/2"], 0),
    (["bound", "recip.cond", "--point", "-3/4"], 0),
    (["bound", "builtin:add", "--point", "1", "--point", "2/3"], 0),
    (["bound", "builtin:reciprocal", "--point", "0", "--budget", "300"], 3),
    (["check", "builtin:reciprocal-tz", "--point", "1/2", "--function", "reciprocal", "--samples", "150"], 0),
    (["check", "builtin:exp", "--point", "1/2", "--function", "exp", "--samples", "40", "--t-max", "20"], 0),
    (["check", "sabotaged.tz", "--point", "1/2", "--expect", "1/2", "--seed", "3",
      "--replay", "replay.json"], 5),
    (["check", "builtin:identity-tz", "--point", "0", "--expect", "0", "--samples", "0"], 0),
    (["translate", "cond-to-tz", "recip.cond", "out.tz"], 0),
    (["translate", "unif-to-cond", "builtin:add", "add.cond"], 0),
    (["translate", "normalize", "expr:1/x", "norm.cond"], 0),
    (["parse-base", "(subst (mul) (proj 2 1) (proj 2 1))", "--args", "7,1"], 0),
    (["parse-base", "(subst (mul) (proj 2 1)"], 1),
]


def sabotaged_identity():
    w = EL.identity_tz_witness()
    return dataclasses.replace(w, d=B.parse_base_function("(subst (monus) (proj 2 2) (const 1 2))"))


def prepare(directory):
    (directory / "recip.cond").write_text(S.dumps(EL.builtin_system("reciprocal")), encoding="utf-8")
    (directory / "sabotaged.tz").write_text(W.dumps(sabotaged_identity()), encoding="utf-8")
