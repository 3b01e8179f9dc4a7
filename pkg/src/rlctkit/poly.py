"""Multi-index matrices, sop and general polynomials, outer monomials.

A sop (sum-of-products) polynomial has all coefficients 1, so it is fully
described by its d x n exponent matrix A whose j-th column is the exponent
vector of term j.  Blow-ups act linearly on exponents: a substitution
``log w = B log w'`` sends A to B^T A and the outer exponent s to B^T s.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ParseError
from .rational import format_rational, to_fraction

Column = tuple  # tuple[int, ...]


def _check_column(col, d):
    if len(col) != d:
        raise ValueError(f"exponent vector {col} has length {len(col)}, expected {d}")
    for a in col:
        if not isinstance(a, int) or isinstance(a, bool) or a < 0:
            raise ValueError(f"exponents must be non-negative integers, got {a!r}")


@dataclass(frozen=True, slots=True)
class MultiIndexMatrix:
    """Column-major exponent matrix; columns keep input order."""

    d: int
    columns: tuple

    def __post_init__(self):
        cols = tuple(tuple(c) for c in self.columns)
        object.__setattr__(self, "columns", cols)
        if self.d < 1:
            raise ValueError("need at least one variable")
        for c in cols:
            _check_column(c, self.d)
        if len(set(cols)) != len(cols):
            raise ValueError("columns of a multi-index matrix must be pairwise distinct")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "MultiIndexMatrix":
        rows = [tuple(r) for r in rows]
        if not rows or len({len(r) for r in rows}) != 1:
            raise ValueError("rows must be non-empty and of equal length")
        return cls(len(rows), tuple(zip(*rows)))

    @classmethod
    def _trusted(cls, d: int, columns: tuple) -> "MultiIndexMatrix":
        obj = object.__new__(cls)
        object.__setattr__(obj, "d", d)
        object.__setattr__(obj, "columns", columns)
        return obj

    @property
    def n(self) -> int:
        return len(self.columns)

    @property
    def rows(self) -> tuple:
        return tuple(tuple(c[h] for c in self.columns) for h in range(self.d))

    def entry(self, h: int, j: int) -> int:
        return self.columns[j][h]


@dataclass(frozen=True, slots=True)
class SopPolynomial:
    """Sum of monomials with unit coefficients.

    ``nonneg_asserted`` records the caller's claim f >= 0.  It is only
    validated for binomials, where it forces every exponent to be even.
    """

    indexes: MultiIndexMatrix
    nonneg_asserted: bool = False

    def __post_init__(self):
        if self.indexes.n < 2:
            raise ValueError("a sop polynomial needs at least two terms")
        if self.nonneg_asserted and self.indexes.n == 2:
            for c in self.indexes.columns:
                if any(a % 2 for a in c):
                    raise ValueError(
                        "a non-negative sop binomial must have even exponents only"
                    )

    @classmethod
    def _trusted(cls, indexes: MultiIndexMatrix, nonneg: bool) -> "SopPolynomial":
        obj = object.__new__(cls)
        object.__setattr__(obj, "indexes", indexes)
        object.__setattr__(obj, "nonneg_asserted", nonneg)
        return obj

    @classmethod
    def from_columns(cls, columns, nonneg: bool = False, d: int | None = None):
        columns = [tuple(c) for c in columns]
        if d is None:
            if not columns:
                raise ValueError("a sop polynomial needs at least two terms")
            d = len(columns[0])
        return cls(MultiIndexMatrix(d, tuple(columns)), nonneg)

    @classmethod
    def from_rows(cls, rows, nonneg: bool = False):
        return cls(MultiIndexMatrix.from_rows(rows), nonneg)

    @property
    def d(self) -> int:
        return self.indexes.d

    @property
    def n(self) -> int:
        return self.indexes.n

    @property
    def columns(self) -> tuple:
        return self.indexes.columns

    def to_general(self) -> "GeneralPolynomial":
        return GeneralPolynomial(self.d, {c: Fraction(1) for c in self.columns})

    def with_columns(self, columns) -> "SopPolynomial":
        return SopPolynomial(MultiIndexMatrix(self.d, tuple(columns)), self.nonneg_asserted)

    def __str__(self):
        return format_polynomial(self)


class GeneralPolynomial:
    """Polynomial with exact rational coefficients.

    Terms are kept in insertion order in a dict {exponents: coefficient};
    zero coefficients are never stored.  The empty dict is the zero
    polynomial, which arithmetic may produce.  Treat instances as immutable.
    """

    __slots__ = ("d", "_terms")

    def __init__(self, d: int, terms=()):
        if d < 1:
            raise ValueError("need at least one variable")
        self.d = d
        acc: dict = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for key, val in items:
            # accept both (exps, coeff) mappings and (coeff, exps) pairs
            if isinstance(key, tuple):
                exps, coeff = key, val
            else:
                coeff, exps = key, val
            exps = tuple(exps)
            _check_column(exps, d)
            c = to_fraction(coeff)
            acc[exps] = acc.get(exps, Fraction(0)) + c
        self._terms = {e: c for e, c in acc.items() if c != 0}

    @classmethod
    def _raw(cls, d, terms: dict) -> "GeneralPolynomial":
        obj = cls.__new__(cls)
        obj.d = d
        obj._terms = terms
        return obj

    @classmethod
    def constant(cls, d: int, c) -> "GeneralPolynomial":
        c = to_fraction(c)
        return cls._raw(d, {(0,) * d: c} if c else {})

    @classmethod
    def variable(cls, d: int, h: int) -> "GeneralPolynomial":
        e = [0] * d
        e[h] = 1
        return cls._raw(d, {tuple(e): Fraction(1)})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @property
    def columns(self) -> tuple:
        return tuple(self._terms)

    @property
    def n(self) -> int:
        return len(self._terms)

    def coefficient(self, exps) -> Fraction:
        return self._terms.get(tuple(exps), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.d, Fraction(0))

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        if not isinstance(other, GeneralPolynomial):
            return NotImplemented
        return self.d == other.d and self._terms == other._terms

    def __hash__(self):
        return hash((self.d, frozenset(self._terms.items())))

    def __repr__(self):
        return f"GeneralPolynomial({self.d}, {format_polynomial(self)!r})"

    def __str__(self):
        return format_polynomial(self)

    def _coerce(self, other):
        if isinstance(other, GeneralPolynomial):
            if other.d != self.d:
                raise ValueError("variable counts differ")
            return other
        if isinstance(other, SopPolynomial):
            return other.to_general()
        return GeneralPolynomial.constant(self.d, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return GeneralPolynomial._raw(self.d, out)

    __radd__ = __add__

    def __neg__(self):
        return GeneralPolynomial._raw(self.d, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out: dict = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return GeneralPolynomial._raw(self.d, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        result = GeneralPolynomial.constant(self.d, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def to_sop(self, nonneg: bool = False) -> SopPolynomial:
        """Reinterpret as a sop polynomial; every coefficient must be 1."""
        if any(c != 1 for c in self._terms.values()):
            raise ValueError("a sop polynomial has all coefficients equal to 1")
        return SopPolynomial.from_columns(list(self._terms), nonneg=nonneg, d=self.d)


AnyPolynomial = "SopPolynomial | GeneralPolynomial"


def as_general(f) -> GeneralPolynomial:
    if isinstance(f, GeneralPolynomial):
        return f
    if isinstance(f, SopPolynomial):
        return f.to_general()
    raise TypeError(f"not a polynomial: {f!r}")


def exponent_columns(f) -> tuple:
    return f.columns


@dataclass(frozen=True, slots=True)
class OuterMonomial:
    """The prior/Jacobian factor w^(s-1), stored by its exponent s > 0."""

    s: tuple

    def __post_init__(self):
        s = tuple(to_fraction(x) for x in self.s)
        object.__setattr__(self, "s", s)
        if not s:
            raise ValueError("outer monomial needs at least one variable")
        if any(x <= 0 for x in s):
            raise ValueError("every outer exponent s_h must be positive")

    @classmethod
    def _trusted(cls, s: tuple) -> "OuterMonomial":
        obj = object.__new__(cls)
        object.__setattr__(obj, "s", s)
        return obj

    @classmethod
    def ones(cls, d: int) -> "OuterMonomial":
        return cls((Fraction(1),) * d)

    @property
    def d(self) -> int:
        return len(self.s)


def _bareiss_det(rows) -> int:
    m = [list(r) for r in rows]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


@dataclass(frozen=True, slots=True)
class BlowMatrix:
    """Non-negative integer matrix of determinant 1 with log w = B log w'."""

    rows: tuple
    checked: bool = True

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if self.checked:
            d = len(rows)
            if d == 0 or any(len(r) != d for r in rows):
                raise ValueError("blow matrix must be square and non-empty")
            if any((not isinstance(x, int)) or x < 0 for r in rows for x in r):
                raise ValueError("blow matrix entries must be non-negative integers")
            if _bareiss_det(rows) != 1:
                raise ValueError("blow matrix must have determinant 1")

    @property
    def d(self) -> int:
        return len(self.rows)

    @classmethod
    def _trusted(cls, rows: tuple) -> "BlowMatrix":
        obj = object.__new__(cls)
        object.__setattr__(obj, "rows", rows)
        object.__setattr__(obj, "checked", False)
        return obj

    @classmethod
    def identity(cls, d: int) -> "BlowMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(d)) for i in range(d)), False)

    @classmethod
    def elementary(cls, d: int, j: int, i: int) -> "BlowMatrix":
        """R_{ji}: identity plus a 1 at (j, i); encodes w_j <- w_j * w_i."""
        if i == j:
            raise ValueError("elementary blow matrix needs i != j")
        rows = [[int(a == b) for b in range(d)] for a in range(d)]
        rows[j][i] = 1
        return cls(tuple(tuple(r) for r in rows), False)

    def __matmul__(self, other: "BlowMatrix") -> "BlowMatrix":
        d = self.d
        cols = list(zip(*other.rows))
        rows = tuple(
            tuple(sum(a * b for a, b in zip(self.rows[i], cols[j])) for j in range(d))
            for i in range(d)
        )
        return BlowMatrix(rows, False)

    def transpose_apply(self, vec):
        """B^T v for an exponent (or outer) vector v."""
        d = self.d
        return tuple(sum(self.rows[h][k] * vec[h] for h in range(d)) for k in range(d))

    def determinant(self) -> int:
        return _bareiss_det(self.rows)


def apply_blow_matrix(f, g: OuterMonomial, B: BlowMatrix):
    """Substitute log w = B log w' into f and the outer monomial.

    Exponent columns map to B^T a and the outer exponent to B^T s, which
    absorbs the Jacobian of the monomial substitution.
    """
    if f.d != B.d or g.d != B.d:
        raise ValueError("dimension mismatch between polynomial, outer monomial and blow matrix")
    s2 = OuterMonomial(B.transpose_apply(g.s))
    if isinstance(f, SopPolynomial):
        cols = tuple(B.transpose_apply(c) for c in f.columns)
        return SopPolynomial(MultiIndexMatrix(f.d, cols), f.nonneg_asserted), s2
    if isinstance(f, GeneralPolynomial):
        terms = {B.transpose_apply(e): c for e, c in f.items()}
        return GeneralPolynomial._raw(f.d, terms), s2
    raise TypeError(f"not a polynomial: {f!r}")


def leq(u, v) -> bool:
    """Componentwise u <= v."""
    return all(a <= b for a, b in zip(u, v))


def _require_binomial(f):
    if f.n != 2:
        raise ValueError(f"expected a binomial, got {f.n} terms")


def is_normal_crossing_binomial(f) -> bool:
    _require_binomial(f)
    a, b = f.columns
    return leq(a, b) or leq(b, a)


def is_local_normal_crossing(f) -> bool:
    cols = f.columns
    return any(all(leq(c, o) for o in cols) for c in cols)


def d_statistic(f) -> tuple:
    _require_binomial(f)
    a, b = f.columns
    return tuple(x - y for x, y in zip(a, b))


def d_statistic_scalar(f) -> int:
    """Bivariate form (p - q)(r - s) of the rows [[p, q], [r, s]]."""
    _require_binomial(f)
    if f.d != 2:
        raise ValueError("the scalar D-statistic is defined for two variables")
    (p, r), (q, s) = f.columns
    return (p - q) * (r - s)


def factorize(f):
    """Split a binomial into common factor and coprime parts p1, p2."""
    _require_binomial(f)
    a, b = f.columns
    common = tuple(min(x, y) for x, y in zip(a, b))
    p1 = tuple(x - c for x, c in zip(a, common))
    p2 = tuple(y - c for y, c in zip(b, common))
    return common, p1, p2


# ---------------------------------------------------------------- text I/O

_TOKEN = re.compile(
    r"\s*(?:(?P<var>w(?P<idx>\d+)(?:\s*\^\s*(?P<pow>\d+))?)"
    r"|(?P<num>\d+(?:\s*/\s*\d+)?)"
    r"|(?P<op>[+\-*]))"
)


def _tokens(text: str):
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected input at position {pos}: {text[pos:pos + 12]!r}")
        pos = m.end()
        if m.group("var"):
            idx = int(m.group("idx"))
            if idx < 1:
                raise ParseError("variables are 1-indexed (w1, w2, ...)")
            yield ("var", (idx, int(m.group("pow") or 1)))
        elif m.group("num"):
            yield ("num", Fraction(m.group("num").replace(" ", "")))
        else:
            yield ("op", m.group("op"))


def parse_polynomial(text: str, d: int | None = None) -> GeneralPolynomial:
    """Parse 'c * w1^a1 w2^a2 + ...'; '-' separators are accepted too.

    ``d`` defaults to the largest variable index that appears (at least 1).
    Repeated multi-indexes are merged.
    """
    if not text or not text.strip():
        raise ParseError("empty polynomial")
    terms: list = []
    sign = 1
    coeff = None
    factors: dict = {}
    pending_op = True  # at start or after + / -
    last_was_star = False

    def flush():
        nonlocal coeff, factors
        if coeff is None and not factors:
            raise ParseError("empty term")
        terms.append((sign * (coeff if coeff is not None else Fraction(1)), dict(factors)))
        coeff = None
        factors = {}

    for kind, val in _tokens(text):
        if kind == "op" and val in "+-":
            if pending_op:
                if terms or coeff is not None or factors:
                    raise ParseError("two operators in a row")
                sign = -sign if val == "-" else sign
                continue
            if last_was_star:
                raise ParseError("dangling '*'")
            flush()
            sign = -1 if val == "-" else 1
            pending_op = True
            continue
        if kind == "op":  # '*'
            if pending_op or last_was_star:
                raise ParseError("misplaced '*'")
            last_was_star = True
            continue
        last_was_star = False
        if kind == "num":
            if coeff is not None:
                coeff *= val
            else:
                coeff = val
        else:
            idx, p = val
            factors[idx] = factors.get(idx, 0) + p
        pending_op = False
    if pending_op or last_was_star:
        raise ParseError("polynomial ends with an operator")
    flush()
    max_idx = max((i for _, fs in terms for i in fs), default=1)
    if d is None:
        d = max_idx
    elif d < max_idx:
        raise ParseError(f"w{max_idx} appears but d = {d}")
    pairs = []
    for c, fs in terms:
        e = [0] * d
        for i, p in fs.items():
            e[i - 1] = p
        pairs.append((tuple(e), c))
    acc: dict = {}
    for e, c in pairs:
        acc[e] = acc.get(e, Fraction(0)) + c
    return GeneralPolynomial(d, acc)


def _monomial_text(exps) -> str:
    parts = []
    for h, a in enumerate(exps):
        if a == 1:
            parts.append(f"w{h + 1}")
        elif a > 1:
            parts.append(f"w{h + 1}^{a}")
    return "*".join(parts)


def format_polynomial(f) -> str:
    """Inverse of parse_polynomial up to the variable count."""
    items = [(e, Fraction(1)) for e in f.columns] if isinstance(f, SopPolynomial) else list(f.items())
    if not items:
        return "0"
    out = []
    for k, (e, c) in enumerate(items):
        mono = _monomial_text(e)
        neg = c < 0
        mag = -c if neg else c
        if not mono:
            body = format_rational(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{format_rational(mag)}*{mono}"
        if k == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


def polynomial_to_json(f) -> dict:
    g = as_general(f)
    return {
        "d": g.d,
        "terms": [{"coeff": format_rational(c), "exps": list(e)} for e, c in g.items()],
    }


def polynomial_from_json(obj) -> GeneralPolynomial:
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        d = int(obj["d"])
        terms = [(tuple(int(x) for x in t["exps"]), to_fraction(str(t.get("coeff", "1")))) for t in obj["terms"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad polynomial JSON: {exc}") from exc
    acc: dict = {}
    for e, c in terms:
        acc[e] = acc.get(e, Fraction(0)) + c
    try:
        return GeneralPolynomial(d, acc)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def outer_from_json(obj) -> OuterMonomial:
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        return OuterMonomial(tuple(to_fraction(str(x)) for x in obj["s"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad outer monomial JSON: {exc}") from exc


def outer_to_json(g: OuterMonomial) -> dict:
    return {"s": [format_rational(x) for x in g.s]}


def parse_rational_list(text: str) -> tuple:
    try:
        return tuple(to_fraction(x) for x in text.split(","))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational list {text!r}") from exc


def monomial_support(col) -> frozenset:
    return frozenset(h for h, a in enumerate(col) if a)


def support(f) -> frozenset:
    out: set = set()
    for c in f.columns:
        out |= monomial_support(c)
    return frozenset(out)
