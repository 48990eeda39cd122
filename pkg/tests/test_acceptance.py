"""The ten acceptance criteria, each at its stated scale and tolerance.

Every test prints one ``[PASS]``/``[FAIL]`` line; the lines are repeated in
the terminal summary under "acceptance criteria".
"""
import random
import shutil
import subprocess
import sys
import time
from fractions import Fraction

from subreal import elementary as EL
from subreal import operators as O
from subreal import reference as R
from subreal import systems as S
from subreal import translations as T
from subreal import witnesses as W
from subreal.names import apply_K, ehelp, name_of_rational, random_name, validate_at

from cli_corpus import CORPUS, prepare
from helpers import perturbed_oracle, random_majorant, random_operator_term, random_oracle

F_ = Fraction


def names(*xs):
    return [name_of_rational(F_(x)) for x in xs]


def test_c01_ehelp_exhaustive(criterion):
    with criterion(1, "ehelp product-zero and 1/(2(n+1)) accuracy, p,q,r,n <= 30") as c:
        start = time.perf_counter()
        cases = 0
        for n in range(31):
            half = F_(1, 2 * (n + 1))
            for r in range(31):
                for p in range(31):
                    for q in range(31):
                        a, b = ehelp(p, q, r, n), ehelp(q, p, r, n)
                        assert a * b == 0, (p, q, r, n)
                        assert abs(F_(a - b, n + 1) - F_(p - q, r + 1)) <= half, (p, q, r, n)
                        cases += 1
        elapsed = time.perf_counter() - start
        c.detail = f"{cases} cases, {elapsed:.1f}s"
        assert cases == 923_521
        assert elapsed < 60


def test_c02_operator_K(criterion):
    with criterion(2, "apply_K names xi for 1000 random rationals, n <= 100") as c:
        rng = random.Random(2)
        for i in range(1000):
            den = rng.randint(1, 60)
            xi = F_(rng.randint(-10 * den, 10 * den), den)
            name = random_name(xi, f"c2:{i}", boundary=0.4)
            assert validate_at(name, xi, 201) == []          # premise: a valid name
            sp = apply_K(name)
            for n in range(101):
                f, g = sp.f(n), sp.g(n)
                assert f * g == 0
                assert abs(F_(f - g, n + 1) - xi) < F_(1, n + 1), (xi, i, n)
        c.detail = "1000 points x 101 indices"


def test_c03_uniformity_condition(criterion):
    with criterion(3, "oracles agreeing up to the modulus give equal outputs, 1000 terms") as c:
        rng = random.Random(3)
        queried = 0
        for trial in range(1000):
            term = random_operator_term(rng, depth=5, max_arity=3)
            g, _ = random_majorant(rng)
            x = rng.randint(0, 20)
            z = O.modulus(term, g, x)
            fs = [random_oracle(f"c3:{trial}:{i}", g) for i in range(term.arity)]
            alt = [perturbed_oracle(f, z, f"c3:{trial}:{i}", g) for i, f in enumerate(fs)]
            assert O.eval_operator(term, fs, x) == O.eval_operator(term, alt, x), O.to_sexpr(term)
            queried += any(isinstance(nd, O.Apply) for nd in O.nodes(term.root))
        c.detail = f"{queried} of 1000 terms query an oracle"


def test_c04_conditional_roundtrip(criterion):
    with criterion(4, "reciprocal -> TZ -> operators, xi in {1/3, -2/7, 5}, t <= 200") as c:
        start = time.perf_counter()
        sys_ = EL.builtin_system("reciprocal")
        witness = T.operators_to_tz_conditional(sys_)
        back = T.tz_to_operators_conditional(witness)
        for xi in (F_(1, 3), F_(-2, 7), F_(5)):
            ns = names(xi)
            target = 1 / xi
            for t in range(201):
                eps = F_(1, t + 1)
                assert abs(W.eval_tz_conditional(witness, ns, t).value - target) < eps, (xi, t)
                assert abs(S.eval_conditional(back, ns, t).value - target) < eps, (xi, t)
        elapsed = time.perf_counter() - start
        c.detail = f"{elapsed:.1f}s"
        assert elapsed < 300


def _sample_in_ball(rng, xi, prec):
    den = prec + 1 + rng.randint(0, prec + 1)
    lo, hi = (xi - F_(1, prec + 1)) * den, (xi + F_(1, prec + 1)) * den
    m = rng.choice([lo.__floor__() + 1, hi.__ceil__() - 1, rng.randint(lo.__floor__() + 1, hi.__ceil__() - 1)])
    extra = rng.randint(0, 3)
    return (m + extra, extra, den - 1) if m >= 0 else (extra, extra - m, den - 1)


def test_c05_uniform_roundtrip(criterion):
    with criterion(5, "add/mul/negate through TZ-style uniform and back, 20 points, t <= 100") as c:
        rng = random.Random(5)
        ops = {"add": (2, lambda x, y: x + y), "mul": (2, lambda x, y: x * y), "negate": (1, lambda x: -x)}
        checks = 0
        for op, (k, fn) in ops.items():
            w = T.operators_to_tz_uniform(EL.builtin_uniform(op))
            back = T.tz_to_operators_uniform(T.operators_to_tz_uniform(EL.builtin_uniform(op)))
            for _ in range(20):
                xs = [F_(rng.randint(-200, 200), rng.randint(1, 20)) for _ in range(k)]
                value = fn(*xs)
                ns = [random_name(x, rng.randint(0, 999)) for x in xs]
                for t in range(101):
                    eps = F_(1, t + 1)
                    assert abs(S.eval_uniform(back, ns, t).value - value) < eps, (op, xs, t)
                    # the witness contract on raw approximations
                    if all(abs(x) <= t + 1 for x in xs):
                        n = w.d(t)
                        raw = [v for x in xs for v in _sample_in_ball(rng, x, n)] + [t]
                        out = F_(w.f(*raw) - w.g(*raw), w.h(*raw) + 1)
                        assert abs(out - value) < eps, (op, xs, t, raw)
                    checks += 1
        c.detail = f"{checks} (point, t) checks"


def test_c06_search_bound(criterion):
    with criterion(6, "search bound for reciprocal at 1/2 is T = 3; 1000 special names accept by T") as c:
        sys_ = EL.builtin_system("reciprocal")
        result = T.compute_search_bound(sys_, [F_(1, 2)])
        c.detail = f"T = {result.T}, depth {result.depth}, {result.branches} branches"
        assert result.T == 3
        worst = 0
        for seed in range(1000):
            name = random_name(F_(1, 2), f"c6:{seed}", special=True, boundary=0.7)
            s = S.find_parameter(sys_, [name], result.T)
            worst = max(worst, s)
        assert worst <= result.T


def test_c07_embedding(criterion):
    with criterion(7, "uniform_to_conditional: E(...)(0) = 0 and bit-exact agreement, 20 points") as c:
        rng = random.Random(7)
        for op in ("add", "mul", "negate", "abs", "sin", "cos", "identity"):
            uni = EL.builtin_uniform(op)
            cond = S.uniform_to_conditional(uni)
            for _ in range(20):
                xs = [F_(rng.randint(-50, 50), rng.randint(1, 9)) for _ in range(uni.k)]
                ns = [random_name(x, rng.randint(0, 999)) for x in xs]
                oracles = [o for n in ns for o in n.oracles()]
                assert O.eval_operator(cond.E, oracles, 0) == 0
                for t in (0, 9, 99):
                    assert S.eval_conditional(cond, ns, t) == S.eval_uniform(uni, ns, t)
        c.detail = "7 systems x 20 points"


def test_c08_elementary_precision(criterion):
    with criterion(8, "exp(1) at t=10^4, exp(ln 2) at t=10^3, 1/x sqrt sin cos at 20 points") as c:
        start = time.perf_counter()
        t = 10_000
        value = S.eval_conditional(EL.builtin_system("exp"), names(1), t).value
        exp_time = time.perf_counter() - start
        assert R.within(value, R.enclosure_of("exp", 1), t)
        assert exp_time < 10

        value = S.eval_conditional(EL.compile_expression("exp(ln(x))"), names(2), 1000).value
        assert abs(value - 2) < F_(1, 1001)

        rng = random.Random(8)
        for fn in ("reciprocal", "sqrt", "sin", "cos"):
            sys_ = EL.builtin_system(fn)
            for _ in range(20):
                x = F_(rng.randint(1, 400), rng.randint(1, 60))
                if fn in ("reciprocal", "sin", "cos") and rng.random() < 0.5:
                    x = -x
                for tt in (9, 99, 999):
                    v = S.eval_conditional(sys_, names(x), tt).value
                    if fn == "reciprocal":
                        assert abs(v - 1 / x) < F_(1, tt + 1)
                    else:
                        assert R.within(v, R.enclosure_of(fn, x), tt), (fn, x, tt)
        c.detail = f"exp(1) at t=10^4 in {exp_time:.2f}s"


def test_c09_domain_boundary(criterion):
    with criterion(9, "reciprocal/ln at 0 and sqrt at -1 exhaust budget 10^4") as c:
        from subreal import cli
        import io
        for fn, x in (("reciprocal", 0), ("ln", 0), ("sqrt", -1)):
            try:
                S.eval_conditional(EL.builtin_system(fn), names(x), 9, budget=10_000)
            except S.BudgetExhausted as exc:
                assert exc.budget == 10_000
            else:
                raise AssertionError(f"{fn} at {x} returned a value")
        for expr, x in (("1/x", "0"), ("ln(x)", "0"), ("sqrt(x)", "-1")):
            out, err = io.StringIO(), io.StringIO()
            code = cli.main(["eval", expr, "--var", f"x={x}", "--budget", "10000"], out=out, err=err)
            assert code == 3 and out.getvalue() == "" and "budget exhausted" in err.getvalue()
        c.detail = "API raises, CLI exits 3"


def test_c10_cli_determinism(criterion, tmp_path):
    with criterion(10, "every corpus CLI invocation is byte-identical across two runs") as c:
        runs = []
        for attempt in ("a", "b"):
            root = tmp_path / attempt
            root.mkdir()
            prepare(root)
            outputs = []
            for i, (argv, expected) in enumerate(CORPUS):
                proc = subprocess.run([sys.executable, "-m", "subreal.cli", *argv],
                                      capture_output=True, cwd=root)
                assert proc.returncode == expected, (argv, proc.stderr)
                outputs.append((proc.returncode, proc.stdout, proc.stderr))
            files = {p.name: p.read_bytes() for p in sorted(root.iterdir())}
            runs.append((outputs, files))
            shutil.rmtree(root)
        assert runs[0][0] == runs[1][0]
        assert runs[0][1] == runs[1][1]
        c.detail = f"{len(CORPUS)} invocations, {len(runs[0][1])} files compared"
