import itertools
import random
from fractions import Fraction
from math import lcm

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rlctkit.errors import PivotLimitExceeded
from rlctkit.poly import GeneralPolynomial, OuterMonomial, SopPolynomial, parse_polynomial
from rlctkit.rational import INF
from rlctkit.simplex import (
    LpProblem,
    determinant,
    linear_transform,
    lp_solve,
    minimal_columns,
    minimum_index_ratio,
    optimal_weight,
    parameter_upper_bound_check,
    search_weights,
    simplex_upper_bound,
    substitute,
    translate,
    weighted_blowup_chart,
    weighted_blowup_outer,
)

F = Fraction


def vertex_oracle(columns, s):
    """max over alpha in the simplex of min_j alpha.mu_j by enumerating
    vertices of the hypograph: every optimum sits where d of the
    constraints {alpha_h = 0} U {alpha.mu_j = beta} are tight."""
    d = len(s)
    mu = [[F(c[h]) / s[h] for h in range(d)] for c in columns]
    rows = [("zero", h) for h in range(d)] + [("col", j) for j in range(len(mu))]
    best = F(0)
    for pick in itertools.combinations(rows, d):
        # unknowns alpha_1..alpha_d, beta; equations: picked rows + sum alpha = 1
        A, b = [], []
        for kind, k in pick:
            if kind == "zero":
                A.append([F(int(h == k)) for h in range(d)] + [F(0)])
            else:
                A.append(list(mu[k]) + [F(-1)])
            b.append(F(0))
        A.append([F(1)] * d + [F(0)])
        b.append(F(1))
        if determinant(A) == 0:
            continue
        x = solve(A, b)
        alpha, beta = x[:d], x[d]
        if any(a < 0 for a in alpha):
            continue
        if all(sum(a * m for a, m in zip(alpha, col)) >= beta for col in mu):
            best = max(best, beta)
    return best


def solve(A, b):
    n = len(A)
    M = [row[:] + [rhs] for row, rhs in zip(A, b)]
    for k in range(n):
        p = next(r for r in range(k, n) if M[r][k] != 0)
        M[k], M[p] = M[p], M[k]
        for r in range(n):
            if r != k and M[r][k]:
                f = M[r][k] / M[k][k]
                M[r] = [x - f * y for x, y in zip(M[r], M[k])]
    return [M[k][n] / M[k][k] for k in range(n)]


# ------------------------------------------------------------------- LP

def test_lp_examples():
    sol = lp_solve(LpProblem(((2, 0), (0, 4))))
    assert sol.beta == F(4, 3) and sol.alpha == (F(2, 3), F(1, 3))
    sol = lp_solve(LpProblem(((2, 0, 0), (0, 4, 0), (0, 0, 6))))
    assert sol.beta == F(12, 11)
    assert sol.alpha == (F(6, 11), F(3, 11), F(2, 11))
    assert lp_solve(LpProblem(((2, 0), (0, 0)))).beta == 0


def test_lp_rejects_bad_input():
    with pytest.raises(ValueError):
        LpProblem(((1, -1),))
    with pytest.raises(ValueError):
        LpProblem(((1, 2), (3,)))


def test_pivot_cap():
    with pytest.raises(PivotLimitExceeded):
        lp_solve(LpProblem(((2, 0, 0), (0, 4, 0), (0, 0, 6))), pivot_cap=1)


lp_inputs = st.integers(1, 4).flatmap(
    lambda d: st.tuples(
        st.lists(st.tuples(*[st.integers(0, 6)] * d), min_size=1, max_size=5, unique=True),
        st.tuples(*[st.sampled_from([F(1), F(1, 2), F(2), F(3)])] * d),
    )
)


@settings(max_examples=300, deadline=None)
@given(lp_inputs)
def test_lp_matches_vertex_enumeration(data):
    cols, s = data
    sol = lp_solve(LpProblem.from_columns(cols, OuterMonomial(s)))
    assert sol.beta == vertex_oracle(cols, s)
    assert sum(sol.alpha) == 1 and all(a >= 0 for a in sol.alpha)
    mu = [[F(c[h]) / s[h] for h in range(len(s))] for c in cols]
    assert sol.beta == min(sum(a * m for a, m in zip(sol.alpha, col)) for col in mu)
    # alpha_h / s_h are commensurable: clearing denominators gives integers
    ratios = [a / x for a, x in zip(sol.alpha, s)]
    den = lcm(*(r.denominator for r in ratios))
    assert all((r * den).denominator == 1 for r in ratios)


def test_minimal_columns():
    assert minimal_columns([(2, 0), (2, 2), (0, 4), (1, 5)]) == [(2, 0), (0, 4)]


# ---------------------------------------------------------------- bounds

def test_simplex_bound_examples():
    assert simplex_upper_bound(parse_polynomial("w1^2 + w2^4 + w3^6")).lambda_smplx == F(11, 12)
    assert simplex_upper_bound(parse_polynomial("1 + w1^2")).lambda_smplx is INF
    assert simplex_upper_bound(parse_polynomial("w1^2 + w2^4")).lambda_smplx == F(3, 4)
    with pytest.raises(ValueError):
        simplex_upper_bound(parse_polynomial("w1 - w1"))


def test_parameter_bound_examples():
    assert parameter_upper_bound_check(parse_polynomial("w1^2 + w2^4"))
    assert parameter_upper_bound_check(parse_polynomial("w1^2 + w2^4 + w3^6"))
    g = OuterMonomial((F(1, 2), F(1, 2)))
    f = parse_polynomial("w1^2 + w2^2")
    assert simplex_upper_bound(f, g).lambda_smplx == F(1, 2)
    assert parameter_upper_bound_check(f, g)


general = st.integers(1, 4).flatmap(
    lambda d: st.dictionaries(
        st.tuples(*[st.integers(0, 5)] * d),
        st.fractions(min_value=-4, max_value=4, max_denominator=5).filter(lambda c: c != 0),
        min_size=1, max_size=6,
    ).map(lambda t: GeneralPolynomial(d, t))
)


@settings(max_examples=300, deadline=None)
@given(general, st.data())
def test_soundness_properties(f, data):
    bound = simplex_upper_bound(f)
    has_const = f.constant_term() != 0
    assert (bound.lambda_smplx is INF) == has_const
    scales = data.draw(st.lists(st.fractions(min_value=-9, max_value=9, max_denominator=9)
                                .filter(lambda c: c != 0), min_size=f.n, max_size=f.n))
    scaled = GeneralPolynomial(f.d, {e: c * k for (e, c), k in zip(f.items(), scales)})
    assert simplex_upper_bound(scaled).lambda_smplx == bound.lambda_smplx


no_constant = general.filter(lambda f: f.constant_term() == 0 and not f.is_zero())


@settings(max_examples=200, deadline=None)
@given(st.lists(no_constant, min_size=1, max_size=3).filter(lambda fs: len({f.d for f in fs}) == 1),
       st.data())
def test_parameter_bound_on_sums_of_squares(parts, data):
    d = parts[0].d
    f = GeneralPolynomial(d, {})
    for p in parts:
        f = f + p * p
    s = data.draw(st.tuples(*[st.sampled_from([F(1), F(1, 2), F(3)])] * d))
    g = OuterMonomial(s)
    assert simplex_upper_bound(f, g).lambda_smplx <= sum(s) / 2
    assert parameter_upper_bound_check(f, g)


# ---------------------------------------------------------------- weights

def test_optimal_weight_examples():
    h = parse_polynomial("w1^2 + w2^4 + w3^6")
    res = optimal_weight(h)
    assert res.weight_q == (6, 3, 2)
    assert minimum_index_ratio(h, None, res.weight_q) == F(12, 11)
    assert optimal_weight(parse_polynomial("w1^2 + w2^2")).weight_q == (1, 1)
    assert minimum_index_ratio(parse_polynomial("w1^2 + w2^2"), None, (1, 1)) == 1


def test_degenerate_weight_is_deterministic():
    f = parse_polynomial("w1^4*w2^2")
    a, b = optimal_weight(f), optimal_weight(f)
    assert a == b
    assert a.alpha_star == (1, 0) and a.beta == 4 and a.weight_q == (1, 0)


def test_weight_rejections():
    with pytest.raises(ValueError):
        minimum_index_ratio(parse_polynomial("w1^2 + w2^2"), None, (0, 0))
    with pytest.raises(ValueError):
        optimal_weight(parse_polynomial("1 + w1"))
    with pytest.raises(ValueError):
        weighted_blowup_chart(parse_polynomial("w1^2 + w2^2"), (0, 1), 0)


def test_weighted_charts_match_displayed_forms():
    h = parse_polynomial("w1^2 + w2^4 + w3^6")
    q = (6, 3, 2)
    assert weighted_blowup_chart(h, q, 0) == parse_polynomial("w1^12 + w1^12*w2^4 + w1^12*w3^6")
    assert weighted_blowup_chart(h, q, 1) == parse_polynomial("w2^12*w1^2 + w2^12 + w2^12*w3^6")
    assert weighted_blowup_chart(h, q, 2) == parse_polynomial("w3^12*w1^2 + w3^12*w2^4 + w3^12")
    assert weighted_blowup_outer(OuterMonomial.ones(3), q, 0).s == (11, 1, 1)


def test_unit_weight_reproduces_ordinary_chart():
    f = parse_polynomial("w1^2 + w2^4", d=3)
    direct = substitute(f, [GeneralPolynomial.variable(3, 0),
                            GeneralPolynomial.variable(3, 1) * GeneralPolynomial.variable(3, 0),
                            GeneralPolynomial.variable(3, 2)])
    assert weighted_blowup_chart(f, (1, 1, 0), 0) == direct


def test_brute_force_weights_never_beat_lp():
    rng = random.Random(8)
    checked_equal = 0
    for _ in range(40):
        d = rng.randint(2, 3)
        n = rng.randint(2, 4)
        cols = {tuple(rng.randint(0, 6) for _ in range(d)) for _ in range(n)}
        cols.discard((0,) * d)
        if not cols:
            continue
        f = GeneralPolynomial(d, {c: 1 for c in cols})
        res = optimal_weight(f)
        best, _ = search_weights(f, None, 20 if d == 2 else 8)
        assert best <= res.beta
        if max(res.weight_q) <= (20 if d == 2 else 8):
            assert best == res.beta
            checked_equal += 1
    assert checked_equal > 10


def test_weight_gcd_one():
    res = optimal_weight(parse_polynomial("w1^4 + w2^8"))
    assert res.weight_q == (2, 1)


# ---------------------------------------------------- translate/transform

def test_translation_examples():
    f = parse_polynomial("w1^4*w2^2")
    assert simplex_upper_bound(translate(f, (1, 0))).lambda_smplx == F(1, 2)
    assert simplex_upper_bound(translate(f, (F(-3, 2), 0))).lambda_smplx == F(1, 2)
    assert simplex_upper_bound(translate(f, (0, 5))).lambda_smplx == F(1, 4)
    assert translate(f, (0, 0)) == f


def test_linear_transform_example():
    f = parse_polynomial("w1^4*w2^2")
    g = linear_transform(f, [[1, 1], [1, -1]])
    expected = parse_polynomial(
        "w1^6 + 2 w1^5 w2 - w1^4 w2^2 - 4 w1^3 w2^3 - w1^2 w2^4 + 2 w1 w2^5 + w2^6"
    )
    assert g == expected
    assert simplex_upper_bound(g).lambda_smplx == F(1, 3)
    assert linear_transform(f, [[1, 0], [0, 1]]) == f
    with pytest.raises(ValueError):
        linear_transform(f, [[1, 1], [2, 2]])


def evaluate(f, point):
    total = F(0)
    for e, c in f.items():
        term = c
        for x, k in zip(point, e):
            term *= F(x) ** k
        total += term
    return total


@settings(max_examples=100, deadline=None)
@given(
    st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), st.integers(-3, 3).filter(bool),
                    min_size=1, max_size=4),
    st.tuples(st.integers(-2, 2), st.integers(-2, 2)),
    st.tuples(st.integers(-2, 2), st.integers(-2, 2), st.integers(-2, 2), st.integers(-2, 2)),
)
def test_translate_and_transform_by_evaluation(terms, p, m):
    f = GeneralPolynomial(2, terms)
    P = [[m[0], m[1]], [m[2], m[3]]]
    if m[0] * m[3] - m[1] * m[2] == 0:
        P = [[1, 0], [0, 1]]
    composed = translate(linear_transform(f, P), p)
    for u in itertools.product((-1, 0, 2), repeat=2):
        x = (u[0] + p[0], u[1] + p[1])
        w = (P[0][0] * x[0] + P[0][1] * x[1], P[1][0] * x[0] + P[1][1] * x[1])
        assert evaluate(composed, u) == evaluate(f, w)


def test_determinant():
    assert determinant([[1, 2], [3, 4]]) == -2
    assert determinant([[0, 1], [1, 0]]) == -1
    assert determinant([[1, 2], [2, 4]]) == 0
