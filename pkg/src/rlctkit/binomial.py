"""Exact RLCTs of sop binomials.

For a binomial w^c (w^r + w^r') with outer exponent s, write p = c.  The
threshold satisfies 1/lambda = max(max_h p_h/s_h, max_ij pi_ij) where

    pi_ij = (p_i r'_j + r_i p_j + r_i r'_j) / (s_i r'_j + r_i s_j)

for i in I = supp(r) and j in J = supp(r').  On normal crossing inputs
(r or r' is zero) only the first maximum is present.  The same value comes
out of the blow-up tree by taking the worst leaf.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .blowup import (
    DEFAULT_MAX_NODES,
    BlowupNode,
    BlowupTree,
    blowup_between_terms,
    stem_parts,
)
from .poly import (
    OuterMonomial,
    SopPolynomial,
    factorize,
    is_normal_crossing_binomial,
    monomial_support,
)
from .rational import INF, Extended, reciprocal


@dataclass(frozen=True)
class RlctValue:
    lam: Extended
    multiplicity: int | None = None

    def __post_init__(self):
        if self.lam is not INF:
            object.__setattr__(self, "lam", Fraction(self.lam))
            if self.lam <= 0:
                raise ValueError("an RLCT is positive")
        if self.multiplicity is not None and self.multiplicity < 1:
            raise ValueError("multiplicity is a positive integer")


@dataclass(frozen=True)
class IndexRatioSet:
    rho: tuple  # common exponent over s
    nu: tuple   # larger exponent over s


@dataclass(frozen=True)
class PotentialRatioMatrix:
    I: tuple
    J: tuple
    entries: dict  # (i, j) -> Fraction, 0-indexed

    def max(self) -> Fraction:
        return max(self.entries.values())


def _outer(f, g):
    g = OuterMonomial.ones(f.d) if g is None else g
    if g.d != f.d:
        raise ValueError("outer monomial and polynomial have different variable counts")
    return g


def _require_binomial(f):
    if not isinstance(f, SopPolynomial) or f.n != 2:
        raise ValueError("expected a sop binomial")


def index_ratios(f: SopPolynomial, g: OuterMonomial | None = None) -> IndexRatioSet:
    _require_binomial(f)
    g = _outer(f, g)
    a, b = f.columns
    rho = tuple(Fraction(min(x, y)) / s for x, y, s in zip(a, b, g.s))
    nu = tuple(Fraction(max(x, y)) / s for x, y, s in zip(a, b, g.s))
    return IndexRatioSet(rho, nu)


def monomial_rlct(exps, g: OuterMonomial) -> RlctValue:
    """Threshold of w^exps against w^(s-1): min_h s_h / a_h."""
    # a/s = a*s.den/s.num; compare by cross-multiplying to stay in integers
    top_num, top_den, count = 0, 1, 0
    for a, s in zip(exps, g.s):
        num, den = a * s.denominator, s.numerator
        c = num * top_den - top_num * den
        if c > 0:
            top_num, top_den, count = num, den, 1
        elif c == 0 and num:
            count += 1
    if top_num == 0:
        return RlctValue(INF)
    return RlctValue(Fraction(top_den, top_num), count)


def rlct_normal_crossing(f: SopPolynomial, g: OuterMonomial | None = None) -> RlctValue:
    _require_binomial(f)
    if not is_normal_crossing_binomial(f):
        raise ValueError("rlct_normal_crossing needs a normal crossing binomial")
    g = _outer(f, g)
    common, _, _ = factorize(f)
    return monomial_rlct(common, g)


def potential_ratios(f: SopPolynomial, g: OuterMonomial | None = None) -> PotentialRatioMatrix:
    _require_binomial(f)
    if is_normal_crossing_binomial(f):
        raise ValueError("potential ratios are defined for non normal crossing binomials")
    g = _outer(f, g)
    p, r, rp = factorize(f)
    s = g.s
    I = tuple(sorted(monomial_support(r)))
    J = tuple(sorted(monomial_support(rp)))
    entries = {
        (i, j): Fraction(p[i] * rp[j] + r[i] * p[j] + r[i] * rp[j]) / (s[i] * rp[j] + r[i] * s[j])
        for i in I for j in J
    }
    return PotentialRatioMatrix(I, J, entries)


def _require_even(f: SopPolynomial):
    for c in f.columns:
        if any(x % 2 for x in c):
            raise ValueError("a non-negative sop binomial has even exponents only")


def rlct_binomial(f: SopPolynomial, g: OuterMonomial | None = None) -> RlctValue:
    """Closed-form threshold of a non-negative sop binomial."""
    _require_binomial(f)
    _require_even(f)
    g = _outer(f, g)
    if is_normal_crossing_binomial(f):
        return rlct_normal_crossing(f, g)
    top = max(max(index_ratios(f, g).rho), potential_ratios(f, g).max())
    return RlctValue(reciprocal(top))


def closed_form_inverse(f: SopPolynomial, g: OuterMonomial | None = None,
                        opposite_only: bool = True) -> Fraction:
    """1/lambda from mu_h = min/s_h and nu_h = max/s_h.

    The pair term (nu_h nu_h' - mu_h mu_h') / (nu_h + nu_h' - mu_h - mu_h')
    is only valid for pairs whose exponent differences have opposite signs,
    i.e. h lies in the support of one coprime part and h' in the other.
    ``opposite_only=False`` takes every pair with both gaps positive, which
    overestimates on normal crossing inputs; kept for comparison.
    """
    _require_binomial(f)
    g = _outer(f, g)
    a, b = f.columns
    mu = [Fraction(min(x, y)) / s for x, y, s in zip(a, b, g.s)]
    nu = [Fraction(max(x, y)) / s for x, y, s in zip(a, b, g.s)]
    diff = [x - y for x, y in zip(a, b)]
    best = max(mu)
    d = f.d
    for h in range(d):
        for k in range(d):
            if h == k or nu[h] == mu[h] or nu[k] == mu[k]:
                continue
            if opposite_only and not (diff[h] * diff[k] < 0):
                continue
            val = (nu[h] * nu[k] - mu[h] * mu[k]) / (nu[h] + nu[k] - mu[h] - mu[k])
            best = max(best, val)
    return best


def leaf_ratio(node: BlowupNode, sign_aware: bool = False) -> tuple:
    """(lambda, multiplicity) of a normal crossing binomial leaf.

    With ``sign_aware`` a leaf w^c (1 + w^r) whose r has an odd entry also
    vanishes on a smooth hypersurface away from the coordinate planes, which
    contributes threshold 1.  Non-negative inputs never trigger this.
    """
    f, g = node.inner, node.outer
    common, p1, p2 = factorize(f)
    val = monomial_rlct(common, g)
    lam, mult = val.lam, val.multiplicity
    if sign_aware and any(x % 2 for x in p1 + p2):
        if lam > 1:
            lam, mult = Fraction(1), 1
        elif lam == 1:
            mult = None
    return lam, mult


def rlct_from_leaves(tree: BlowupTree, sign_aware: bool = False) -> RlctValue:
    """Worst threshold over the normal crossing leaves of a binomial tree."""
    best: Extended = INF
    mult = None
    for node in tree.leaf_nodes():
        if not is_normal_crossing_binomial(node.inner):
            raise ValueError("every leaf must be normal crossing")
        lam, m = leaf_ratio(node, sign_aware)
        if lam < best:
            best, mult = lam, m
        elif lam == best and lam is not INF and m is not None:
            mult = m if mult is None else max(mult, m)
    if best is INF:
        return RlctValue(INF)
    return RlctValue(best, mult)


def rlct_via_tree(f: SopPolynomial, g: OuterMonomial | None = None,
                  max_nodes: int = DEFAULT_MAX_NODES) -> RlctValue:
    _require_binomial(f)
    _require_even(f)
    tree = blowup_between_terms(f, _outer(f, g), max_nodes)
    return rlct_from_leaves(tree)


def invariant_value(node: BlowupNode, coeffs) -> Fraction:
    """a(p r' + r q + r r') + b(s q - (p + r) t) + c(s r' + r t)."""
    parts = stem_parts(node)
    if parts is None:
        raise ValueError("node is not of the form w1^p w2^q (w1^r + w2^r')")
    p, q, r, rp, s, t = parts
    a, b, c = (Fraction(x) for x in coeffs)
    return a * (p * rp + r * q + r * rp) + b * (s * q - (p + r) * t) + c * (s * rp + r * t)


def stem_start_ratio(node: BlowupNode) -> Fraction:
    """(p r' + r q + r r') / (s r' + r t) evaluated at a stem node."""
    p, q, r, rp, s, t = stem_parts(node)
    return Fraction(p * rp + r * q + r * rp) / (s * rp + r * t)


# ---------------------------------------------------------------- combinators

def check_disjoint(*polys) -> None:
    seen: set = set()
    for f in polys:
        supp = set()
        for c in f.columns:
            supp |= monomial_support(c)
        if seen & supp:
            raise ValueError("polynomials share variables")
        seen |= supp


def rlct_sum(*values: RlctValue) -> RlctValue:
    """Threshold of a sum of non-negative functions in disjoint variables."""
    if not values:
        raise ValueError("need at least one value")
    if any(v.lam is INF for v in values):
        return RlctValue(INF)
    lam = sum(v.lam for v in values)
    ms = [v.multiplicity for v in values]
    mult = None if None in ms else sum(ms) - (len(ms) - 1)
    return RlctValue(lam, mult)


def rlct_product(*values: RlctValue) -> RlctValue:
    """Threshold of a product of functions in disjoint variables."""
    if not values:
        raise ValueError("need at least one value")
    lam = min(v.lam for v in values)
    if lam is INF:
        return RlctValue(INF)
    ms = [v.multiplicity for v in values if v.lam == lam]
    mult = None if None in ms else sum(ms)
    return RlctValue(lam, mult)


def exclusive_sop_rlct(f: SopPolynomial, g: OuterMonomial | None = None) -> RlctValue:
    """Threshold of an exclusive sop by pairing terms into binomials.

    Terms are paired in order (1,2), (3,4), ...; a trailing odd term is a
    monomial.  Each block is solved alone and the results are summed.
    """
    g = _outer(f, g)
    cols = f.columns
    supports = [monomial_support(c) for c in cols]
    for a in range(len(cols)):
        for b in range(a + 1, len(cols)):
            if supports[a] & supports[b]:
                raise ValueError("terms of an exclusive sop share no variables")
    blocks = [SopPolynomial.from_columns(cols[k:k + 2], nonneg=True, d=f.d)
              for k in range(0, len(cols) - 1, 2)]
    values = [rlct_binomial(b, g) for b in blocks]
    if len(cols) % 2:
        values.append(monomial_rlct(cols[-1], g))
    return rlct_sum(*values)
