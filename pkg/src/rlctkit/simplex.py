"""Simplex upper bound on the RLCT and optimal weighted blow-ups.

For exponent columns a_j and outer exponents s, with mu_hj = a_hj / s_h,

    beta = max over alpha in the probability simplex of min_j sum_h alpha_h mu_hj

and the bound is lambda_smplx = 1/beta (infinity when beta = 0).  The LP is
solved exactly with Bland's rule, starting from the feasible point
alpha = e_1, beta = 0.  Pivoting runs on gmpy2 rationals for speed; results
are handed back as Fractions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from math import gcd, lcm

from gmpy2 import mpq

from .errors import InvariantViolation, PivotLimitExceeded
from .poly import GeneralPolynomial, OuterMonomial, SopPolynomial, as_general, leq
from .rational import INF, Extended, reciprocal, to_fraction

DEFAULT_PIVOT_CAP = 10**5


@dataclass(frozen=True)
class LpProblem:
    """mu is a d x n matrix stored as a tuple of rows."""

    mu: tuple

    def __post_init__(self):
        mu = tuple(tuple(Fraction(x) for x in row) for row in self.mu)
        object.__setattr__(self, "mu", mu)
        if not mu or not mu[0]:
            raise ValueError("LP needs at least one variable and one column")
        if len({len(r) for r in mu}) != 1:
            raise ValueError("ragged LP matrix")
        if any(x < 0 for r in mu for x in r):
            raise ValueError("index ratios are non-negative")

    @property
    def d(self) -> int:
        return len(self.mu)

    @property
    def n(self) -> int:
        return len(self.mu[0])

    @classmethod
    def from_columns(cls, columns, g: OuterMonomial) -> "LpProblem":
        d = g.d
        return cls(tuple(tuple(Fraction(c[h]) / g.s[h] for c in columns) for h in range(d)))


@dataclass(frozen=True)
class LpSolution:
    beta: Fraction
    alpha: tuple
    basis: tuple  # variable names: 'alpha1', 'beta', 'gamma3', ...
    status: str
    pivots: int


@dataclass(frozen=True)
class SimplexBound:
    lambda_smplx: Extended
    alpha_star: tuple
    beta: Fraction
    weight_q: tuple | None = None
    basis: tuple = ()


def _name(k: int, d: int) -> str:
    if k < d:
        return f"alpha{k + 1}"
    if k == d:
        return "beta"
    return f"gamma{k - d}"


def lp_solve(problem: LpProblem, pivot_cap: int = DEFAULT_PIVOT_CAP) -> LpSolution:
    """Maximise beta s.t. sum_h alpha_h mu_hj - beta >= 0, sum alpha = 1.

    Dictionary form: each basic variable equals rhs + sum coef * nonbasic.
    Variables are numbered alpha_1..alpha_d, beta, gamma_1..gamma_n.
    """
    mu = [[mpq(x) for x in row] for row in problem.mu]
    d, n = problem.d, problem.n
    nonbasic = list(range(1, d + 1))  # alpha_2..alpha_d, beta
    basic = [0] + [d + 1 + j for j in range(n)]
    zero, one = mpq(0), mpq(1)
    rhs = [one] + [mu[0][j] for j in range(n)]
    rows = [[-one] * (d - 1) + [zero]]
    for j in range(n):
        rows.append([mu[h][j] - mu[0][j] for h in range(1, d)] + [-one])
    obj = [zero] * (d - 1) + [one]
    z = zero
    pivots = 0
    while True:
        cands = [(nonbasic[c], c) for c in range(d) if obj[c] > 0]
        if not cands:
            break
        if pivots >= pivot_cap:
            raise PivotLimitExceeded(f"simplex pivot cap {pivot_cap} reached")
        _, e = min(cands)
        leave = None
        for r, row in enumerate(rows):
            a = row[e]
            if a < 0:
                ratio = rhs[r] / -a
                key = (ratio, basic[r])
                if leave is None or key < leave[0]:
                    leave = (key, r)
        if leave is None:
            raise InvariantViolation("LP unbounded; impossible for this problem")
        r = leave[1]
        piv = rows[r][e]
        # solve row r for the entering variable
        new_row = [-x / piv for x in rows[r]]
        new_row[e] = 1 / piv
        new_rhs = -rhs[r] / piv
        for i, row in enumerate(rows):
            if i == r:
                continue
            a = row[e]
            if a:
                for k in range(d):
                    if k == e:
                        row[k] = a * new_row[e]
                    elif new_row[k]:
                        row[k] += a * new_row[k]
                rhs[i] += a * new_rhs
        a = obj[e]
        for k in range(d):
            if k == e:
                obj[k] = a * new_row[e]
            elif new_row[k]:
                obj[k] += a * new_row[k]
        z += a * new_rhs
        rows[r] = new_row
        rhs[r] = new_rhs
        basic[r], nonbasic[e] = nonbasic[e], basic[r]
        pivots += 1
    values = dict(zip(basic, rhs))
    alpha = [values.get(h, zero) for h in range(d)]
    beta = values.get(d, zero)
    if sum(alpha) != 1 or any(x < 0 for x in alpha) or beta != z:
        raise InvariantViolation("LP solution is not on the simplex")
    achieved = min(sum(alpha[h] * mu[h][j] for h in range(d)) for j in range(n))
    if achieved != beta:
        raise InvariantViolation("LP optimum does not match its constraints")
    status = "degenerate-optimal" if any(v == 0 for v in rhs) else "optimal"
    return LpSolution(_frac(beta), tuple(_frac(x) for x in alpha),
                      tuple(_name(k, d) for k in sorted(basic)), status, pivots)


def _frac(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


def minimal_columns(columns) -> list:
    """Columns not componentwise >= some other column, in input order."""
    order = sorted(range(len(columns)), key=lambda j: sum(columns[j]))
    kept: list = []
    for j in order:
        c = columns[j]
        if not any(leq(columns[k], c) for k in kept):
            kept.append(j)
    keep = set(kept)
    return [columns[j] for j in range(len(columns)) if j in keep]


def _prepare(f, g):
    f = as_general(f)
    if f.is_zero():
        raise ValueError("the zero polynomial has no threshold")
    g = OuterMonomial.ones(f.d) if g is None else g
    if g.d != f.d:
        raise ValueError("outer monomial and polynomial have different variable counts")
    return f, g


def simplex_upper_bound(f, g: OuterMonomial | None = None,
                        pivot_cap: int = DEFAULT_PIVOT_CAP) -> SimplexBound:
    """Coefficients are ignored; dominated exponent columns are dropped first
    because they never bind in the inner minimum."""
    f, g = _prepare(f, g)
    cols = minimal_columns(list(f.columns))
    sol = lp_solve(LpProblem.from_columns(cols, g), pivot_cap)
    return SimplexBound(reciprocal(sol.beta), sol.alpha, sol.beta, None, sol.basis)


def optimal_weight(f, g: OuterMonomial | None = None,
                   pivot_cap: int = DEFAULT_PIVOT_CAP) -> SimplexBound:
    """Integer weight proportional to alpha*_h / s_h with gcd 1."""
    f, g = _prepare(f, g)
    bound = simplex_upper_bound(f, g, pivot_cap)
    if bound.beta == 0:
        raise ValueError("the bound is infinite; no weighted blow-up helps")
    ratios = [a / s for a, s in zip(bound.alpha_star, g.s)]
    den = lcm(*(r.denominator for r in ratios))
    ints = [int(r * den) for r in ratios]
    k = gcd(*ints)
    return replace(bound, weight_q=tuple(x // k for x in ints))


def _check_weight(q, d):
    q = tuple(int(x) for x in q)
    if len(q) != d:
        raise ValueError("weight has the wrong length")
    if any(x < 0 for x in q):
        raise ValueError("weights are non-negative")
    if not any(q):
        raise ValueError("the zero weight is not allowed")
    return q


def minimum_index_ratio(f, g: OuterMonomial | None, q) -> Fraction:
    """min_j q.a_j / q.s"""
    f, g = _prepare(f, g)
    q = _check_weight(q, f.d)
    top = min(sum(x * a for x, a in zip(q, c)) for c in f.columns)
    return Fraction(top) / sum(x * s for x, s in zip(q, g.s))


def weighted_blowup_chart(f, q, i: int) -> GeneralPolynomial:
    """Chart i (0-indexed): w_i <- w_i^q_i and w_j <- w_j w_i^q_j.

    A term w^a becomes w_i^(q.a) prod_{j != i} w_j^a_j.
    """
    f = as_general(f)
    q = _check_weight(q, f.d)
    if q[i] <= 0:
        raise ValueError("the chart variable needs a positive weight")
    terms = {}
    for e, c in f.items():
        e2 = list(e)
        e2[i] = sum(x * a for x, a in zip(q, e))
        terms[tuple(e2)] = c
    return GeneralPolynomial(f.d, terms)


def weighted_blowup_outer(g: OuterMonomial, q, i: int) -> OuterMonomial:
    """Outer exponent after chart i, Jacobian included: s_i becomes q.s."""
    q = _check_weight(q, g.d)
    if q[i] <= 0:
        raise ValueError("the chart variable needs a positive weight")
    s = list(g.s)
    s[i] = sum(x * y for x, y in zip(q, g.s))
    return OuterMonomial(tuple(s))


def search_weights(f, g: OuterMonomial | None, cap: int):
    """Brute force max of the minimum index ratio over q in {0..cap}^d."""
    f, g = _prepare(f, g)
    best, best_q = None, None
    for q in itertools.product(range(cap + 1), repeat=f.d):
        if not any(q):
            continue
        v = minimum_index_ratio(f, g, q)
        if best is None or v > best:
            best, best_q = v, q
    return best, best_q


def parameter_upper_bound_check(f, g: OuterMonomial | None = None) -> bool:
    """lambda_smplx <= sum_h s_h / 2."""
    f, g = _prepare(f, g)
    return simplex_upper_bound(f, g).lambda_smplx <= sum(g.s) / 2


# ------------------------------------------------------------ substitutions

def substitute(f, images) -> GeneralPolynomial:
    """f(images[0], ..., images[d-1]) for polynomial images of each variable."""
    f = as_general(f)
    if len(images) != f.d:
        raise ValueError("need one image per variable")
    out_d = images[0].d
    cache: dict = {}

    def power(h, k):
        key = (h, k)
        if key not in cache:
            cache[key] = images[h] ** k if k <= 1 else power(h, k - 1) * images[h]
        return cache[key]

    acc: dict = {}
    for e, c in f.items():
        term = GeneralPolynomial.constant(out_d, c)
        for h, k in enumerate(e):
            if k:
                term = term * power(h, k)
        for e2, c2 in term.items():
            acc[e2] = acc.get(e2, 0) + c2
    return GeneralPolynomial._raw(out_d, {e: c for e, c in acc.items() if c})


def translate(f, p) -> GeneralPolynomial:
    """f(w + p), expanded; exactly cancelled terms disappear."""
    f = as_general(f)
    p = [to_fraction(x) for x in p]
    if len(p) != f.d:
        raise ValueError("translation vector has the wrong length")
    if not any(p):
        return f
    d = f.d
    images = [GeneralPolynomial.variable(d, h) + p[h] for h in range(d)]
    return substitute(f, images)


def determinant(m) -> Fraction:
    a = [[to_fraction(x) for x in row] for row in m]
    n = len(a)
    if any(len(r) != n for r in a):
        raise ValueError("matrix must be square")
    det = Fraction(1)
    for k in range(n):
        piv = next((r for r in range(k, n) if a[r][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = -det
        det *= a[k][k]
        for r in range(k + 1, n):
            factor = a[r][k] / a[k][k]
            if factor:
                for c in range(k, n):
                    a[r][c] -= factor * a[k][c]
    return det


def linear_transform(f, Pinv) -> GeneralPolynomial:
    """f(P^{-1} u): w_h becomes sum_k Pinv[h][k] u_k."""
    f = as_general(f)
    d = f.d
    if len(Pinv) != d or determinant(Pinv) == 0:
        raise ValueError("transform matrix must be d x d and invertible")
    images = []
    for h in range(d):
        img = GeneralPolynomial(d, {})
        for k in range(d):
            coef = to_fraction(Pinv[h][k])
            if coef:
                img = img + GeneralPolynomial.variable(d, k) * coef
        images.append(img)
    return substitute(f, images)
