import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rlctkit.binomial import (
    RlctValue,
    check_disjoint,
    closed_form_inverse,
    exclusive_sop_rlct,
    index_ratios,
    invariant_value,
    potential_ratios,
    rlct_binomial,
    rlct_from_leaves,
    rlct_normal_crossing,
    rlct_product,
    rlct_sum,
    rlct_via_tree,
    stem_start_ratio,
)
from rlctkit.blowup import blowup_between_variables_with_jacobian, stem
from rlctkit.poly import OuterMonomial, SopPolynomial, factorize, is_normal_crossing_binomial
from rlctkit.rational import INF, reciprocal
from rlctkit.simplex import simplex_upper_bound

F = Fraction


def sop(*cols):
    return SopPolynomial.from_columns(cols, nonneg=True)


def brute_lambda(f, g):
    """Enumerate every pair of variables: the region where w_i^r and w_j^r'
    balance contributes the potential ratio; otherwise the common factor
    decides.  Independent restatement of the half-plane decomposition."""
    a, b = f.columns
    best = max(F(min(x, y)) / s for x, y, s in zip(a, b, g.s))
    for i in range(f.d):
        for j in range(f.d):
            if a[i] > b[i] and b[j] > a[j]:
                p = [min(x, y) for x, y in zip(a, b)]
                r, rp = a[i] - b[i], b[j] - a[j]
                val = F(p[i] * rp + r * p[j] + r * rp) / (g.s[i] * rp + r * g.s[j])
                best = max(best, val)
    return reciprocal(best)


# ------------------------------------------------------------ examples

def test_normal_crossing_examples():
    f = SopPolynomial.from_rows([[2, 4], [4, 6]], nonneg=True)
    assert rlct_normal_crossing(f) == RlctValue(F(1, 4), 1)
    assert rlct_normal_crossing(f, OuterMonomial((2, 1))).lam == F(1, 4)
    assert rlct_normal_crossing(sop((0, 0), (2, 4))).lam is INF
    with pytest.raises(ValueError):
        rlct_normal_crossing(sop((2, 0), (0, 4)))


def test_normal_crossing_multiplicity():
    assert rlct_normal_crossing(sop((2, 2), (4, 4))) == RlctValue(F(1, 2), 2)


def test_potential_ratio_examples():
    pr = potential_ratios(sop((2, 0), (0, 4)))
    assert (pr.I, pr.J) == ((0,), (1,))
    assert pr.entries == {(0, 1): F(4, 3)}
    assert potential_ratios(sop((2, 0), (0, 2))).entries == {(0, 1): F(1)}
    pr3 = potential_ratios(sop((2, 0, 2), (0, 4, 0)))
    assert pr3.I == (0, 2) and pr3.J == (1,)
    assert set(pr3.entries.values()) == {F(4, 3)}
    with pytest.raises(ValueError):
        potential_ratios(sop((2, 2), (4, 4)))


def test_index_ratios():
    irs = index_ratios(sop((2, 4), (4, 6)), OuterMonomial((2, 1)))
    assert irs.rho == (F(1), F(4))
    assert irs.nu == (F(2), F(6))


@pytest.mark.parametrize("cols,lam", [
    (((2, 0), (0, 4)), F(3, 4)),
    (((2, 0), (0, 2)), F(1)),
    (((2, 2), (4, 0)), F(1, 2)),
])
def test_rlct_examples(cols, lam):
    f = sop(*cols)
    assert rlct_binomial(f).lam == lam
    assert rlct_via_tree(f).lam == lam


def test_rlct_rejects_odd_exponent():
    f = SopPolynomial.from_columns([(1, 0), (0, 2)])
    with pytest.raises(ValueError):
        rlct_binomial(f)
    with pytest.raises(ValueError):
        rlct_via_tree(f)


def test_non_nc_has_no_multiplicity():
    assert rlct_binomial(sop((2, 0), (0, 4))).multiplicity is None


# ---------------------------------------------------- closed form vs tree

S_VALUES = (F(1), F(1, 2), F(2))


def test_bivariate_sweep_all_methods_agree():
    cols = list(itertools.product(range(0, 9, 2), repeat=2))
    for a, b in itertools.combinations(cols, 2):
        f = sop(a, b)
        for s in itertools.product(S_VALUES, repeat=2):
            g = OuterMonomial(s)
            lam = rlct_binomial(f, g).lam
            assert rlct_via_tree(f, g).lam == lam
            assert lam == brute_lambda(f, g)
            if lam is not INF:
                assert closed_form_inverse(f, g) == 1 / lam


even_binomials = st.integers(2, 4).flatmap(
    lambda d: st.tuples(
        st.lists(st.tuples(*[st.sampled_from(range(0, 9, 2))] * d), min_size=2, max_size=2, unique=True),
        st.tuples(*[st.sampled_from(S_VALUES)] * d),
    )
)


@settings(max_examples=300, deadline=None)
@given(even_binomials)
def test_closed_form_tree_lp_agree(data):
    cols, s = data
    f, g = sop(*cols), OuterMonomial(s)
    val = rlct_binomial(f, g)
    assert rlct_via_tree(f, g).lam == val.lam
    assert brute_lambda(f, g) == val.lam
    assert simplex_upper_bound(f, g).lambda_smplx == val.lam
    if is_normal_crossing_binomial(f):
        assert rlct_via_tree(f, g).multiplicity == val.multiplicity


def test_all_pairs_closed_form_overestimates():
    # pairs whose gaps share a sign are not part of the formula
    for f in (sop((2, 2), (4, 4)), sop((0, 0), (2, 2))):
        lam = rlct_binomial(f).lam
        exact = F(0) if lam is INF else 1 / lam
        assert closed_form_inverse(f) == exact
        assert closed_form_inverse(f, opposite_only=False) > exact


# ------------------------------------------------------------------- stems

def bivariate_stems():
    cols = list(itertools.product(range(0, 9, 2), repeat=2))
    for a, b in itertools.combinations(cols, 2):
        f = sop(a, b)
        if is_normal_crossing_binomial(f):
            continue
        for s in itertools.product(S_VALUES, repeat=2):
            g = OuterMonomial(s)
            tree = blowup_between_variables_with_jacobian(f, g)
            for side in ("left", "right"):
                yield tree, side, [tree.node(k) for k in stem(tree, side).nodes]


def test_invariant_value_examples():
    root = blowup_between_variables_with_jacobian(sop((2, 0), (0, 4))).node(0)
    assert invariant_value(root, (1, 0, 0)) == 8
    assert invariant_value(root, (0, 0, 1)) == 6
    assert invariant_value(root, (0, 0, 0)) == 0
    assert stem_start_ratio(root) == F(4, 3)


def test_invariant_rejects_mixed_node():
    tree = blowup_between_variables_with_jacobian(sop((2, 0), (0, 4)))
    mixed = [n for n in tree.leaf_nodes() if all(x > 0 for x in factorize(n.inner)[2])
             or all(x > 0 for x in factorize(n.inner)[1])]
    assert mixed
    with pytest.raises(ValueError):
        invariant_value(mixed[0], (1, 0, 0))


def leaf_ir(node):
    c, _, _ = factorize(node.inner)
    s, t = node.outer.s
    return {F(c[0]) / s, F(c[1]) / t}


def trend(seq):
    up = all(x <= y for x, y in zip(seq, seq[1:]))
    down = all(x >= y for x, y in zip(seq, seq[1:]))
    return "const" if up and down else "up" if up else "down" if down else "mixed"


def test_stem_invariants():
    count = 0
    for tree, side, nodes in bivariate_stems():
        count += 1
        for basis in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
            assert len({invariant_value(n, basis) for n in nodes}) == 1
        # index ratios seen along the stem are exactly those seen on the leaves
        on_stem = set().union(*(leaf_ir(n) for n in nodes))
        on_leaves = set().union(*(leaf_ir(n) for n in tree.leaf_nodes()))
        assert on_stem == on_leaves
        if side == "left":
            assert stem_start_ratio(nodes[0]) in leaf_ir(nodes[-1])
            assert 1 / rlct_from_leaves(tree).lam == max(on_stem)


def test_stem_monotone_and_regressive():
    opposite = {("up", "up"), ("down", "down")}
    for _, _, nodes in bivariate_stems():
        trunk = [n for n in nodes if not is_normal_crossing_binomial(n.inner)]
        rows = []
        for n in trunk:
            c, p1, p2 = factorize(n.inner)
            s, t = n.outer.s
            r, rp = p1[0] + p2[0], p1[1] + p2[1]
            rows.append((F(c[0]) / s, F(c[1]) / t, F(c[0] + r) / s, F(c[1] + rp) / t))
        rho_l, rho_r, nu_l, nu_r = (trend(list(col)) for col in zip(*rows))
        assert "mixed" not in (rho_l, rho_r, nu_l, nu_r)
        assert (rho_l, nu_r) not in opposite
        assert (rho_r, nu_l) not in opposite
        assert "up" in (rho_l, rho_r) or "const" in (rho_l, rho_r)


# ------------------------------------------------------------- combinators

def test_sum_and_product_rules():
    a, b = RlctValue(F(1, 2), 1), RlctValue(F(1, 4), 2)
    assert rlct_sum(a, b) == RlctValue(F(3, 4), 2)
    assert rlct_product(a, b) == RlctValue(F(1, 4), 2)
    assert rlct_product(a, RlctValue(F(1, 2), 1)) == RlctValue(F(1, 2), 2)
    assert rlct_sum(a, RlctValue(INF)).lam is INF
    assert rlct_product(RlctValue(INF), RlctValue(INF)).lam is INF
    with pytest.raises(ValueError):
        rlct_sum()


def test_sum_rule_matches_closed_form():
    # w1^2 + w2^4 is the sum of two single-variable monomials
    assert rlct_binomial(sop((2, 0), (0, 4))).lam == rlct_sum(RlctValue(F(1, 2)), RlctValue(F(1, 4))).lam


def test_check_disjoint():
    check_disjoint(sop((2, 0, 0), (0, 2, 0)), SopPolynomial.from_columns([(0, 0, 2), (0, 0, 4)]))
    with pytest.raises(ValueError):
        check_disjoint(sop((2, 0), (0, 2)), sop((2, 0), (4, 0)))


def test_exclusive_double_sop():
    # sum_i x_i^m_i y_i^n_i in variables (x1, y1, x2, y2, x3, y3)
    for degrees in itertools.product((2, 4, 6), repeat=6):
        cols = []
        for i in range(3):
            col = [0] * 6
            col[2 * i], col[2 * i + 1] = degrees[2 * i], degrees[2 * i + 1]
            cols.append(tuple(col))
        f = SopPolynomial.from_columns(cols, nonneg=True)
        expected = sum(min(F(1, degrees[2 * i]), F(1, degrees[2 * i + 1])) for i in range(3))
        assert exclusive_sop_rlct(f).lam == expected


def test_exclusive_requires_disjoint_terms():
    with pytest.raises(ValueError):
        exclusive_sop_rlct(SopPolynomial.from_columns([(2, 2), (2, 0)], nonneg=True))
