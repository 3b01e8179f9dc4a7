"""Comparison polynomials with known RLCTs.

Each model yields a GeneralPolynomial vanishing at the origin together with
an exact RLCT formula, so the simplex bound can be compared against the
true threshold.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ParseError, TermCapExceeded
from .poly import GeneralPolynomial
from .rational import Extended, to_fraction

DEFAULT_TERM_CAP = 10**5


class _Vars:
    """Hands out consecutive variable indices for named blocks."""

    def __init__(self):
        self.blocks: dict = {}
        self.d = 0

    def block(self, name, rows, cols):
        base = self.d
        self.blocks[name] = (base, rows, cols)
        self.d += rows * cols
        return [[base + r * cols + c for c in range(cols)] for r in range(rows)]


def _var(d, k):
    return GeneralPolynomial.variable(d, k)


def _sum(polys, d):
    acc: dict = {}
    for p in polys:
        for e, c in p.items():
            acc[e] = acc.get(e, 0) + c
    return GeneralPolynomial._raw(d, {e: c for e, c in acc.items() if c})


# --------------------------------------------------- reduced rank regression

def rrr_polynomial(M: int, N: int, H: int, r: int) -> GeneralPolynomial:
    """|C1|^2 + |C2|^2 + |C3|^2 + |B4 A4|^2 with blocks in that variable order.

    Shapes: C1 r x r, C2 (N-r) x r, C3 r x (M-r), A4 (H-r) x (M-r),
    B4 (N-r) x (H-r).
    """
    if min(M, N, H) < 1 or r < 0 or r > min(M, N, H):
        raise ValueError("need M, N, H >= 1 and 0 <= r <= min(M, N, H)")
    vs = _Vars()
    c1 = vs.block("C1", r, r)
    c2 = vs.block("C2", N - r, r)
    c3 = vs.block("C3", r, M - r)
    a4 = vs.block("A4", H - r, M - r)
    b4 = vs.block("B4", N - r, H - r)
    d = vs.d
    if d == 0:
        raise ValueError("model has no parameters")
    parts = []
    for blk in (c1, c2, c3):
        for row in blk:
            for k in row:
                parts.append(_var(d, k) ** 2)
    for i in range(N - r):
        for k in range(M - r):
            entry = _sum([_var(d, b4[i][j]) * _var(d, a4[j][k]) for j in range(H - r)], d)
            parts.append(entry * entry)
    return _sum(parts, d)


def rrr_rlct(M: int, N: int, H: int, r: int) -> Fraction:
    if r < 0 or r > H:
        raise ValueError("need 0 <= r <= H")
    top = min(M - r, H - r)
    return min(
        Fraction((N + M) * r - r * r + s * (N - r) + (M - r - s) * (H - r - s), 2)
        for s in range(0, top + 1)
    )


# ---------------------------------------------------------- Poisson mixture

@dataclass(frozen=True)
class PoissonSpec:
    """Mixture of H Poisson components in M dimensions, truth with r.

    ``expansion_point`` is (weights a_2..a_H, rates as M rows of H); the
    default puts all mass on component H with rate 1, which is the truth
    when r = 1 with unit rates.
    """

    M: int
    H: int
    r: int = 1
    true_weights: tuple | None = None
    true_rates: tuple | None = None  # r rows of M rates
    expansion_point: tuple | None = None

    def resolved(self):
        if self.M < 1 or self.H < 1 or self.r < 1:
            raise ValueError("need M, H, r >= 1")
        w = self.true_weights
        rates = self.true_rates
        if w is None or rates is None:
            if self.r != 1:
                raise ValueError("true parameters are required when r > 1")
            w = (Fraction(1),)
            rates = ((Fraction(1),) * self.M,)
        w = tuple(to_fraction(x) for x in w)
        rates = tuple(tuple(to_fraction(x) for x in row) for row in rates)
        if len(w) != self.r or sum(w) != 1 or any(x < 0 for x in w):
            raise ValueError("true weights must lie on the simplex")
        if len(rates) != self.r or any(len(row) != self.M or any(x <= 0 for x in row) for row in rates):
            raise ValueError("true rates must be positive, one row of M per component")
        pt = self.expansion_point
        if pt is None:
            a = tuple(Fraction(int(h == self.H)) for h in range(2, self.H + 1))
            b = tuple(tuple(Fraction(int(h == self.H)) for h in range(1, self.H + 1)) for _ in range(self.M))
        else:
            a, b = pt
            a = tuple(to_fraction(x) for x in a)
            b = tuple(tuple(to_fraction(x) for x in row) for row in b)
            if len(a) != self.H - 1 or len(b) != self.M or any(len(row) != self.H for row in b):
                raise ValueError("expansion point has the wrong shape")
        return w, rates, a, b


def poisson_polynomial(spec: PoissonSpec) -> GeneralPolynomial:
    """Sum over x in {0..H+r-1}^M of (sum_h a_h b_h^x - truth(x))^2,
    with a_1 = 1 - sum_{h>=2} a_h, expanded around the expansion point.

    Variables: a_2..a_H, then b_{m,h} for m = 1..M, h = 1..H.
    """
    w, rates, a0, b0 = spec.resolved()
    M, H, r = spec.M, spec.H, spec.r
    d = (H - 1) + M * H
    a_img = [None] * (H + 1)
    for h in range(2, H + 1):
        a_img[h] = _var(d, h - 2) + a0[h - 2]
    a_img[1] = GeneralPolynomial.constant(d, 1) - _sum([a_img[h] for h in range(2, H + 1)], d)
    b_img = [[_var(d, (H - 1) + m * H + (h - 1)) + b0[m][h - 1] for h in range(1, H + 1)]
             for m in range(M)]
    pow_cache: dict = {}

    def bpow(m, h, x):
        key = (m, h, x)
        if key not in pow_cache:
            pow_cache[key] = b_img[m][h] ** x
        return pow_cache[key]

    squares = []
    for x in itertools.product(range(H + r), repeat=M):
        truth = Fraction(0)
        for k in range(r):
            t = w[k]
            for m in range(M):
                t *= rates[k][m] ** x[m]
            truth += t
        terms = []
        for h in range(1, H + 1):
            t = a_img[h]
            for m in range(M):
                if x[m]:
                    t = t * bpow(m, h - 1, x[m])
            terms.append(t)
        inner = _sum(terms, d) - truth
        squares.append(inner * inner)
    f = _sum(squares, d)
    if f.constant_term() != 0:
        raise ValueError("the expansion point does not zero the polynomial")
    return f


def poisson_rlct(M: int, H: int, r: int) -> Fraction:
    if not (H >= r >= 1) or M < 1:
        raise ValueError("need H >= r >= 1 and M >= 1")
    if M == 1:
        return Fraction(3 * r + H - 2, 4)
    return Fraction(M * r + H - 1, 2)


# ----------------------------------------------------- Vandermonde type

def _compositions(total: int, parts: int):
    """All L in N_0^parts with |L| = total."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def vandermonde_exponents(N: int, H: int, Q: int, m: int = 1) -> list:
    out = []
    for n in range(H + 1):
        out.extend(_compositions(Q * n + m, N))
    return out


def vandermonde_polynomial(M: int, N: int, H: int, Q: int, m: int = 1, r: int = 0,
                           term_cap: int = DEFAULT_TERM_CAP) -> GeneralPolynomial:
    """|AB|^2 with A = (a_mh) of size M x H and columns
    B_L = (prod_j b_hj^l_j)_h for |L| = Qn + m, n = 0..H.

    Variables: a_{mh} row-major, then b_{hj} row-major; d = (M + N) H.
    """
    if min(M, N, H, Q) < 1:
        raise ValueError("need M, N, H, Q >= 1")
    if r != 0 or m != 1:
        raise ValueError("only the r = 0, m = 1 regime is supported")
    Ls = vandermonde_exponents(N, H, Q, m)
    estimate = M * len(Ls) * H * (H + 1) // 2
    if estimate > term_cap:
        raise TermCapExceeded(
            f"about {estimate} monomials (N* = {len(Ls)}) exceeds the cap {term_cap}"
        )
    d = (M + N) * H
    a_idx = [[mm * H + h for h in range(H)] for mm in range(M)]
    b_idx = [[M * H + h * N + j for j in range(N)] for h in range(H)]
    acc: dict = {}
    for L in Ls:
        for mm in range(M):
            # entry (AB)_{mm, L} = sum_h a_{mm,h} prod_j b_{hj}^l_j ; all monomials distinct
            monos = []
            for h in range(H):
                e = [0] * d
                e[a_idx[mm][h]] = 1
                for j in range(N):
                    e[b_idx[h][j]] = L[j]
                monos.append(e)
            for u in range(H):
                for v in range(u, H):
                    e = tuple(x + y for x, y in zip(monos[u], monos[v]))
                    acc[e] = acc.get(e, 0) + (1 if u == v else 2)
    return GeneralPolynomial(d, {e: Fraction(c) for e, c in acc.items()})


def vandermonde_rlct(M: int, N: int, H: int, Q: int) -> Fraction:
    """Known thresholds for r = 0, m = 1: cases H <= 4 (any N) and N = 1."""
    F = Fraction
    if N == 1:
        k = 0
        while 2 * H >= M * ((k + 1) * k * Q + 2 * (k + 1)):
            k += 1
        return F(M * Q * k * (k + 1) + 2 * H, 4 * (1 + k * Q))
    if H == 1:
        return min(F(M, 2), F(N, 2))
    if H not in (2, 3, 4):
        raise ValueError("the threshold is known only for H <= 4 or N = 1")
    cands = [F(b * N + (H - b) * M, 2) for b in range(H + 1)]
    if H == 2:
        cands.append(F(2 * N + Q * (N - 1 + M), 2 * Q + 2))
        return min(cands)
    for b in range(2, H + 1):
        for a in range(1, b):
            cands.append(F(b * N + (H - b) * M + Q * (a * (N + a - b) + (H - a) * M), 2 * (Q + 1)))
    if H == 3:
        cands.append(F(3 * N + Q * (3 * N - 3 + 3 * M), 2 * (2 * Q + 1)))
        return min(cands)
    for a in (2, 3, 4):
        cands.append(F(4 * N + Q * (a * N - a - 1 + (8 - a) * M), 2 * (2 * Q + 1)))
    cands.append(F(4 * N + Q * (5 * N - 5 + 3 * M), 2 * (2 * Q + 1)))
    for a in (2, 3):
        cands.append(F(3 * N + M + Q * (a * N - a + (8 - a) * M), 2 * (2 * Q + 1)))
    cands.append(F(4 * N + Q * (6 * N - 6 + 6 * M), 2 * (3 * Q + 1)))
    return min(cands)


# ------------------------------------------------------------- comparisons

@dataclass(frozen=True)
class ModelSpec:
    kind: str  # 'rrr' | 'poisson' | 'vandermonde'
    params: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, obj) -> "ModelSpec":
        if isinstance(obj, str):
            try:
                obj = json.loads(obj)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad model JSON: {exc}") from exc
        if not isinstance(obj, dict) or "model" not in obj:
            raise ParseError("model spec needs a 'model' field")
        kind = str(obj["model"]).lower()
        if kind not in ("rrr", "poisson", "vandermonde"):
            raise ParseError(f"unknown model {kind!r}")
        return cls(kind, {k: v for k, v in obj.items() if k != "model"})

    def with_h(self, H: int) -> "ModelSpec":
        return ModelSpec(self.kind, {**self.params, "H": H})

    def _get(self, key, default=None):
        if key in self.params:
            return self.params[key]
        if default is None:
            raise ParseError(f"model {self.kind} needs parameter {key}")
        return default

    def polynomial(self, term_cap: int = DEFAULT_TERM_CAP) -> GeneralPolynomial:
        g = self._get
        if self.kind == "rrr":
            return rrr_polynomial(g("M"), g("N"), g("H"), g("r"))
        if self.kind == "poisson":
            return poisson_polynomial(PoissonSpec(
                g("M"), g("H"), g("r", 1),
                self.params.get("true_weights"), self.params.get("true_rates"),
                self.params.get("expansion_point"),
            ))
        return vandermonde_polynomial(g("M"), g("N"), g("H"), g("Q"), g("m", 1), g("r", 0), term_cap)

    def rlct(self) -> Fraction:
        g = self._get
        if self.kind == "rrr":
            return rrr_rlct(g("M"), g("N"), g("H"), g("r"))
        if self.kind == "poisson":
            return poisson_rlct(g("M"), g("H"), g("r", 1))
        return vandermonde_rlct(g("M"), g("N"), g("H"), g("Q"))

    def parameter_count(self) -> int:
        """Model dimension d used for the d/2 bound."""
        g = self._get
        if self.kind == "poisson":
            return (g("M") + 1) * g("H") - 1
        return (g("M") + g("N")) * g("H")


@dataclass(frozen=True)
class ComparisonRow:
    H: int
    lambda_rlct: Extended
    lambda_smplx: Extended
    param_bound: Fraction

    @property
    def equal(self) -> bool:
        return self.lambda_rlct == self.lambda_smplx


def compare_model(spec: ModelSpec, term_cap: int = DEFAULT_TERM_CAP,
                  pivot_cap: int | None = None) -> ComparisonRow:
    from .simplex import DEFAULT_PIVOT_CAP, simplex_upper_bound

    f = spec.polynomial(term_cap)
    bound = simplex_upper_bound(f, None, pivot_cap or DEFAULT_PIVOT_CAP)
    return ComparisonRow(spec.params["H"], spec.rlct(), bound.lambda_smplx,
                         Fraction(spec.parameter_count(), 2))
