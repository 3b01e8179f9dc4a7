"""Blow-up trees for sop polynomials.

Every blow-up here is centred on a coordinate plane {w_i = w_j = 0} and has
two charts: ``w_i <- w_i*w_j`` and ``w_j <- w_i*w_j``.  A chart acts on an
exponent column by adding the entry of the substituted variable to the
other variable's entry, and acts on the outer exponent s the same way (that
is the Jacobian).  Trees are built with FIFO queues and then frozen.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field, replace

from .errors import InvariantViolation, NodeCapExceeded
from .poly import (
    BlowMatrix,
    MultiIndexMatrix,
    OuterMonomial,
    SopPolynomial,
    factorize,
    format_polynomial,
    is_local_normal_crossing,
    is_normal_crossing_binomial,
    leq,
    monomial_support,
)
from .rational import format_rational

DEFAULT_MAX_NODES = 10**6


@dataclass(frozen=True, slots=True)
class Chart:
    """Edge label: blow-up centred on (w_i, w_j), substituting w_var."""

    i: int
    j: int
    var: int

    @property
    def other(self) -> int:
        return self.j if self.var == self.i else self.i

    @property
    def side(self) -> int:
        """0 for the first chart (w_i substituted), 1 for the second."""
        return 0 if self.var == self.i else 1

    def matrix(self, d: int) -> BlowMatrix:
        return BlowMatrix.elementary(d, self.var, self.other)

    def label(self) -> str:
        return f"w{self.var + 1} <- w{self.i + 1}*w{self.j + 1}"

    def to_json(self) -> dict:
        return {"center": [self.i + 1, self.j + 1], "var": self.var + 1, "label": self.label()}


@dataclass(frozen=True, slots=True)
class BlowupNode:
    inner: SopPolynomial
    outer: OuterMonomial
    blow: BlowMatrix
    depth: int
    parent: int | None = None
    chart: Chart | None = None
    counters: tuple | None = None  # (n1, n2), 1-indexed, local-NC algorithm only


@dataclass(frozen=True)
class Round:
    """One between-variables sub-tree grown inside between-terms."""

    root: int
    leaves: tuple
    center: tuple


@dataclass(frozen=True)
class BlowupTree:
    nodes: tuple
    edges: tuple  # (parent, child, Chart)
    algorithm: str
    root: int = 0
    rounds: tuple = ()
    trace: tuple = ()  # (node, n1, n2) per dequeue of the local-NC algorithm
    notes: tuple = ()
    _children: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        kids = [[] for _ in self.nodes]
        for p, c, _ in self.edges:
            kids[p].append(c)
        object.__setattr__(self, "_children", tuple(tuple(k) for k in kids))

    def __len__(self):
        return len(self.nodes)

    def node(self, k: int) -> BlowupNode:
        return self.nodes[k]

    def children(self, k: int) -> tuple:
        return self._children[k]

    def leaves(self) -> tuple:
        return tuple(k for k in range(len(self.nodes)) if not self._children[k])

    def leaf_nodes(self) -> tuple:
        return tuple(self.nodes[k] for k in self.leaves())

    @property
    def depth(self) -> int:
        return max(n.depth for n in self.nodes)

    def path_to(self, k: int) -> tuple:
        out = [k]
        while self.nodes[out[-1]].parent is not None:
            out.append(self.nodes[out[-1]].parent)
        return tuple(reversed(out))

    def summary(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "nodes": len(self.nodes),
            "leaves": len(self.leaves()),
            "depth": self.depth,
            "notes": list(self.notes),
        }

    def to_json(self) -> dict:
        recs = []
        for k, n in enumerate(self.nodes):
            recs.append({
                "id": k,
                "parent": n.parent,
                "depth": n.depth,
                "inner": format_polynomial(n.inner),
                "exponents": [list(c) for c in n.inner.columns],
                "s": [format_rational(x) for x in n.outer.s],
                "blow": [list(r) for r in n.blow.rows],
                "chart": n.chart.to_json() if n.chart else None,
                "counters": list(n.counters) if n.counters else None,
                "leaf": not self._children[k],
            })
        return {
            **self.summary(),
            "nodes": recs,
            "edges": [[p, c, ch.label()] for p, c, ch in self.edges],
        }

    def to_dot(self) -> str:
        def esc(t):
            return t.replace("\\", "\\\\").replace('"', '\\"')

        lines = ["digraph blowup {", "  node [shape=box, fontname=monospace];"]
        for k, n in enumerate(self.nodes):
            s = ",".join(format_rational(x) for x in n.outer.s)
            label = "\\n".join(esc(t) for t in (format_polynomial(n.inner), f"s=({s})", f"depth {n.depth}"))
            lines.append(f'  n{k} [label="{label}"];')
        for p, c, ch in self.edges:
            lines.append(f'  n{p} -> n{c} [label="{esc(ch.label())}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), indent=2)


@dataclass(frozen=True)
class NonHaltingReport:
    """A legacy algorithm reached its node cap."""

    partial: BlowupTree
    max_nodes: int
    message: str


@dataclass(frozen=True)
class StemPath:
    nodes: tuple
    side: str


class _Builder:
    def __init__(self, f: SopPolynomial, g: OuterMonomial | None, max_nodes: int, algorithm: str):
        if g is None:
            g = OuterMonomial.ones(f.d)
        if g.d != f.d:
            raise ValueError("outer monomial and polynomial have different variable counts")
        if max_nodes < 1:
            raise ValueError("node cap must be positive")
        self.d = f.d
        self.max_nodes = max_nodes
        self.algorithm = algorithm
        self.nodes = [BlowupNode(f, g, BlowMatrix.identity(f.d), 0)]
        self.edges: list = []
        self.has_kids = [False]
        self.rounds: list = []
        self.trace: list = []
        self.counters: dict = {}
        self.notes: list = []

    def freeze(self) -> BlowupTree:
        nodes = tuple(
            replace(n, counters=self.counters[k]) if k in self.counters else n
            for k, n in enumerate(self.nodes)
        )
        return BlowupTree(nodes, tuple(self.edges), self.algorithm, 0,
                          tuple(self.rounds), tuple(self.trace), tuple(self.notes))

    def _child(self, k: int, chart: Chart) -> int:
        if len(self.nodes) >= self.max_nodes:
            raise NodeCapExceeded(
                f"{self.algorithm}: node cap {self.max_nodes} reached", self.freeze()
            )
        parent = self.nodes[k]
        v, o = chart.var, chart.other
        cols = tuple(c[:o] + (c[o] + c[v],) + c[o + 1:] for c in parent.inner.columns)
        s = parent.outer.s
        s = s[:o] + (s[o] + s[v],) + s[o + 1:]
        # B @ R_{v,o}: column o gains column v
        rows = tuple(r[:o] + (r[o] + r[v],) + r[o + 1:] for r in parent.blow.rows)
        # children of a valid node are valid, so skip re-validation
        node = BlowupNode(
            SopPolynomial._trusted(MultiIndexMatrix._trusted(self.d, cols),
                                   parent.inner.nonneg_asserted),
            OuterMonomial._trusted(s),
            BlowMatrix._trusted(rows),
            parent.depth + 1,
            k,
            chart,
        )
        self.nodes.append(node)
        self.has_kids.append(False)
        idx = len(self.nodes) - 1
        self.edges.append((k, idx, chart))
        self.has_kids[k] = True
        return idx

    def blow(self, k: int, i: int, j: int) -> tuple:
        return self._child(k, Chart(i, j, i)), self._child(k, Chart(i, j, j))


def _argdeg(p, pick) -> int:
    supp = [h for h, a in enumerate(p) if a > 0]
    if not supp:
        raise InvariantViolation("coprime part has empty support on a non-NC binomial")
    best = pick(p[h] for h in supp)
    return next(h for h in supp if p[h] == best)


def _pair(f: SopPolynomial, cols) -> tuple:
    return f.columns[cols[0]], f.columns[cols[1]]


def _grow_between_variables(b: _Builder, root: int, i: int, j: int, cols) -> list:
    leaves = []
    queue = deque([root])
    while queue:
        k = queue.popleft()
        u, v = _pair(b.nodes[k].inner, cols)
        pu, pv = (u[i], u[j]), (v[i], v[j])
        if leq(pu, pv) or leq(pv, pu):
            leaves.append(k)
            continue
        queue.extend(b.blow(k, i, j))
    return leaves


def _grow_between_terms(b: _Builder, root: int, cols) -> list:
    leaves = []
    queue = deque([root])
    while queue:
        k = queue.popleft()
        u, v = _pair(b.nodes[k].inner, cols)
        if leq(u, v) or leq(v, u):
            leaves.append(k)
            continue
        common = tuple(min(x, y) for x, y in zip(u, v))
        p1 = tuple(x - c for x, c in zip(u, common))
        p2 = tuple(y - c for y, c in zip(v, common))
        s1, s2 = _argdeg(p1, max), _argdeg(p2, max)
        sub = _grow_between_variables(b, k, s1, s2, cols)
        b.rounds.append(Round(k, tuple(sub), (s1, s2)))
        queue.extend(sub)
    return leaves


def _require_binomial(f: SopPolynomial):
    if not isinstance(f, SopPolynomial):
        raise TypeError("blow-up algorithms take a SopPolynomial")
    if f.n != 2:
        raise ValueError(f"expected a binomial, got {f.n} terms")


def blowup_between_variables_with_jacobian(f: SopPolynomial, g: OuterMonomial | None = None,
                                           vars: tuple = (0, 1),
                                           max_nodes: int = DEFAULT_MAX_NODES) -> BlowupTree:
    """Repeated blow-ups centred on {w_i = w_j = 0} until the binomial
    restricted to (w_i, w_j) is normal crossing.  ``vars`` is 0-indexed."""
    _require_binomial(f)
    i, j = vars
    if i == j or not (0 <= i < f.d and 0 <= j < f.d):
        raise ValueError("need two distinct variable indices")
    b = _Builder(f, g, max_nodes, "between-vars")
    _grow_between_variables(b, 0, i, j, (0, 1))
    return b.freeze()


def blowup_between_variables(f: SopPolynomial, max_nodes: int = DEFAULT_MAX_NODES) -> BlowupTree:
    """Bivariate binomial version; the outer monomial starts at s = (1, 1)."""
    _require_binomial(f)
    if f.d != 2:
        raise ValueError("blowup_between_variables is the two-variable algorithm")
    return blowup_between_variables_with_jacobian(f, None, (0, 1), max_nodes)


def blowup_between_terms(f: SopPolynomial, g: OuterMonomial | None = None,
                         max_nodes: int = DEFAULT_MAX_NODES) -> BlowupTree:
    _require_binomial(f)
    b = _Builder(f, g, max_nodes, "between-terms")
    _grow_between_terms(b, 0, (0, 1))
    return b.freeze()


def local_nc_blowup(f: SopPolynomial, g: OuterMonomial | None = None,
                    max_nodes: int = DEFAULT_MAX_NODES) -> BlowupTree:
    """Make some term divide every other term on each leaf.

    Counters (n1, n2) name the pair of terms currently being separated; once
    that pair is normal crossing the larger term is replaced by the next one.
    """
    if not isinstance(f, SopPolynomial):
        raise TypeError("blow-up algorithms take a SopPolynomial")
    b = _Builder(f, g, max_nodes, "local-nc")
    n = f.n
    queue = deque([(0, 0, 1)])
    while queue:
        k, n1, n2 = queue.popleft()
        b.trace.append((k, n1 + 1, n2 + 1))
        b.counters[k] = (n1 + 1, n2 + 1)
        node = b.nodes[k]
        if is_local_normal_crossing(node.inner):
            continue
        if max(n1, n2) >= n:
            raise InvariantViolation("term counters ran past the last term on a non-LNC node")
        before = len(b.nodes)
        sub = _grow_between_terms(b, k, (n1, n2))
        if len(b.nodes) == before:
            sub = [k]
        for leaf in sub:
            cols = b.nodes[leaf].inner.columns
            top = max(n1, n2) + 1
            if leq(cols[n1], cols[n2]):
                queue.append((leaf, n1, top))
            else:
                queue.append((leaf, top, n2))
    return b.freeze()


# ------------------------------------------------------ legacy selective

def triple_exponents(K: SopPolynomial):
    """Return ((m1,n1,l1), (m2,n2,l2)) if K is a two-term triple exclusive
    sop in the layout (x1, y1, z1, x2, y2, z2); otherwise None."""
    if not isinstance(K, SopPolynomial) or K.d != 6 or K.n != 2:
        return None
    a, b = K.columns
    if any(a[3:]) or any(b[:3]):
        if any(a[:3]) or any(b[3:]):
            return None
        a, b = b, a
    return tuple(a[:3]), tuple(b[3:])


def in_family_f(K: SopPolynomial) -> bool:
    """Literal membership test for the odd-allowed family with a term whose
    exponents are all at most 1 and a non-zero total degree."""
    t = triple_exponents(K)
    if t is None:
        return False
    has_small = any(all(0 <= e <= 1 for e in tri) for tri in t)
    return has_small and sum(map(sum, t)) != 0


def in_family_g_prime(K: SopPolynomial) -> bool:
    """Exponents at most 3 with at least one exponent equal to 1."""
    t = triple_exponents(K)
    if t is None:
        return False
    flat = [e for tri in t for e in tri]
    return all(0 <= e <= 3 for e in flat) and 1 in flat


def _selective(K: SopPolynomial, max_nodes: int, pick, name: str, domain_ok: bool):
    _require_binomial(K)
    b = _Builder(K, None, max_nodes, name)
    if not domain_ok:
        b.notes.append("outside proven domain")
    queue = deque([0])
    try:
        while queue:
            k = queue.popleft()
            f = b.nodes[k].inner
            if is_normal_crossing_binomial(f):
                continue
            _, p1, p2 = factorize(f)
            queue.extend(b.blow(k, _argdeg(p1, pick), _argdeg(p2, pick)))
    except NodeCapExceeded as exc:
        return NonHaltingReport(exc.partial, max_nodes, str(exc))
    return b.freeze()


def min_degree_selective(K: SopPolynomial, max_nodes: int = DEFAULT_MAX_NODES):
    """Blow up the lowest-degree variable of each coprime part."""
    return _selective(K, max_nodes, min, "min-deg", in_family_f(K))


def max_degree_selective(K: SopPolynomial, max_nodes: int = DEFAULT_MAX_NODES):
    """Blow up the highest-degree variable of each coprime part."""
    return _selective(K, max_nodes, max, "max-deg",
                      in_family_g_prime(K) and not in_family_f(K))


# ------------------------------------------------------------------ stems

def stem(tree: BlowupTree, side: str = "left") -> StemPath:
    """Root-to-deepest-leaf path; ``side`` picks which chart ends it."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    for k in range(len(tree)):
        if len(tree.children(k)) not in (0, 2):
            raise ValueError("stems are defined for binary blow-up trees")
    if len(tree) == 1:
        return StemPath((tree.root,), side)
    depth = tree.depth
    deepest = [k for k in tree.leaves() if tree.node(k).depth == depth]
    want = 0 if side == "left" else 1
    chosen = [k for k in deepest if tree.node(k).chart.side == want]
    end = (chosen or deepest)[0]
    return StemPath(tree.path_to(end), side)


def stem_parts(node: BlowupNode):
    """Decompose a bivariate node as w1^p w2^q (w1^r + w2^r') with outer
    exponents (s, t).  Returns (p, q, r, r', s, t) or None when one coprime
    part involves both variables."""
    f = node.inner
    if f.d != 2 or f.n != 2:
        return None
    common, p1, p2 = factorize(f)
    for part in (p1, p2):
        if len(monomial_support(part)) > 1:
            return None
    r = p1[0] + p2[0]
    rp = p1[1] + p2[1]
    s, t = node.outer.s
    return common[0], common[1], r, rp, s, t
