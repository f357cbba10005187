"""Coefficient extraction as a circuit transform.

Given a circuit in the variables x̄ ∪ w̄ and a monomial M over the x̄
variables, build a circuit in the remaining variables that computes the
coefficient of M.  Two routes are provided: a depth-preserving transform
for alternating circuits, built by repeatedly splitting off one variable
at a time, and a shape-agnostic transform that tracks truncated
coefficient slots through an arbitrary DAG.  The two are implemented
independently so they can cross-check each other.
"""

from typing import Dict, List, Optional, Tuple

from .circuit import (ADD, CONST, IN, MUL, DEFAULT_NODE_BUDGET, Circuit,
                      CircuitBuilder, normal_form_violations)
from .errors import (BudgetExceeded, DegreeBudgetExceeded, NotNormalForm,
                     Unsupported)
from .poly import Monomial, SparsePoly

DEFAULT_DEGREE_BUDGET = 8

# widest product a single split will expand (2^k terms per node)
_SPLIT_FANIN_CAP = 16


def monomial_coefficient(p: SparsePoly, monomial, x_vars=()) -> SparsePoly:
    """Coefficient of the monomial in an expanded polynomial.

    The variables in x_vars (plus the monomial's own) must match the
    monomial's exponent pattern exactly for a term to contribute; they
    are cleared from surviving terms, so the result is a polynomial in
    the other variables only.  This is the brute-force reference the
    circuit transforms are checked against.
    """
    m = monomial if isinstance(monomial, Monomial) else Monomial(dict(monomial))
    want = dict(m.exponents)
    xset = set(x_vars) | set(want)
    if any(v not in p.vars for v in want):
        return SparsePoly.zero(p.field, p.vars)
    idx = {v: i for i, v in enumerate(p.vars)}
    out: Dict[Tuple[int, ...], int] = {}
    for exps, coeff in p.terms.items():
        if any((exps[idx[v]] if v in idx else 0) != want.get(v, 0)
               for v in xset):
            continue
        cleared = list(exps)
        for v in xset:
            if v in idx:
                cleared[idx[v]] = 0
        out[tuple(cleared)] = coeff
    return SparsePoly(p.field, p.vars, out)


def split_variable(c: Circuit, x: str) -> Tuple[Circuit, Circuit]:
    """Split one variable off an alternating circuit.

    Returns (g, h) with expand(c) == x*expand(g) + expand(h), where h is
    x-free and g has exactly the depth of c.  c must have a + output and
    no same-kind edges; leaves may feed either node kind, which is also
    the shape of g, so splits iterate.

    Per node, the x-free part copies the node, and the x-part of a
    product distributes over the 2^k-1 ways to pick which factors
    contribute their x-part, with a power of x making up for multiply
    picked factors.  Those sums are merged into the + node above, which
    keeps the depth unchanged.
    """
    bad = normal_form_violations(c, allow_leaves_under_mul=True,
                                 require_uniform_depth=False,
                                 require_tree=False)
    if bad:
        raise NotNormalForm(", ".join(bad))
    if x in c.label_vars():
        raise Unsupported(f"{x} appears as an edge label")

    b = CircuitBuilder(c.field)
    depth_of: Dict[int, int] = {}

    def leaf(bid: int) -> int:
        depth_of[bid] = 0
        return bid

    def mk(make, edges: List[Tuple[int, object]]) -> int:
        bid = make(*edges)
        depth_of[bid] = 1 + max((depth_of[e] for e, _ in edges), default=-1)
        return bid

    x_leaf: Optional[int] = None
    power_cache: Dict[int, int] = {}

    def x_ref() -> int:
        nonlocal x_leaf
        if x_leaf is None:
            x_leaf = leaf(b.input(x))
        return x_leaf

    def power_block(e: int) -> int:
        # x^e as + over X, two levels tall, shared across terms
        if e not in power_cache:
            inner = mk(b.mul, [(x_ref(), 1)] * e)
            power_cache[e] = mk(b.add, [(inner, 1)])
        return power_cache[e]

    xpart: Dict[int, Optional[int]] = {}   # None marks a syntactic zero
    rest: Dict[int, int] = {}
    mul_terms: Dict[int, List[int]] = {}
    g_root: Optional[int] = None

    for nid in c.reachable():
        node = c.nodes[nid]
        if node.kind == IN:
            if node.name == x:
                xpart[nid] = leaf(b.const(1))
                rest[nid] = leaf(b.const(0))
            else:
                xpart[nid] = None
                rest[nid] = leaf(b.input(node.name))
        elif node.kind == CONST:
            xpart[nid] = None
            rest[nid] = leaf(b.const(node.value))
        elif node.kind == ADD:
            rest[nid] = mk(b.add, [(rest[cid], lab)
                                   for cid, lab in node.children])
            edges: List[Tuple[int, object]] = []
            for cid, lab in node.children:
                if c.nodes[cid].kind == MUL:
                    edges.extend((tid, lab) for tid in mul_terms[cid])
                elif xpart[cid] is not None:
                    edges.append((xpart[cid], lab))
            if nid == c.output:
                if not edges and node.children:
                    edges = [(leaf(b.const(0)), 1)]
                want = c.depth()
                have = 1 + max((depth_of[e] for e, _ in edges), default=-1)
                assert have <= want, "split made the circuit deeper"
                if have < want:
                    edges.append((_zero_chain(b, mk, leaf, want - 1), 0))
                g_root = mk(b.add, edges)
            else:
                xpart[nid] = mk(b.add, edges) if edges else None
        else:  # MUL
            rest[nid] = mk(b.mul, [(rest[cid], lab)
                                   for cid, lab in node.children])
            kids = node.children
            if len(kids) > _SPLIT_FANIN_CAP:
                raise BudgetExceeded(
                    f"mul fan-in {len(kids)} too wide to split; "
                    "bound the fan-in first")
            tlist: List[int] = []
            for mask in range(1, 1 << len(kids)):
                edges = []
                picked = -1
                dead = False
                for j, (cid, lab) in enumerate(kids):
                    if mask >> j & 1:
                        if xpart[cid] is None:
                            dead = True
                            break
                        edges.append((xpart[cid], lab))
                        picked += 1
                    else:
                        edges.append((rest[cid], lab))
                if dead:
                    continue
                if picked:
                    # picking k factors owes x^(k-1); direct X leaves keep
                    # shallow products shallow, a two-level block keeps
                    # the fan-in at one extra child everywhere else
                    tall = max(depth_of[e] for e, _ in edges) >= 2
                    if picked == 1 or not tall:
                        edges.extend([(x_ref(), 1)] * picked)
                    else:
                        edges.append((power_block(picked), 1))
                tlist.append(mk(b.mul, edges))
            mul_terms[nid] = tlist

    assert g_root is not None
    return b.build(g_root), b.build(rest[c.output])


def _zero_chain(b: CircuitBuilder, mk, leaf, height: int) -> int:
    """A unary alternating chain, mul on top, fed to a + with label 0."""
    kinds = [MUL if i % 2 == 0 else ADD for i in range(height)]
    cur = leaf(b.const(0))
    for kind in reversed(kinds):
        cur = mk(b.mul if kind == MUL else b.add, [(cur, 1)])
    return cur


def _as_monomial(monomial) -> Monomial:
    return monomial if isinstance(monomial, Monomial) \
        else Monomial(dict(monomial))


def _cleared_vars(m: Monomial, x_vars) -> List[str]:
    xs = list(x_vars) if x_vars is not None else []
    for v in sorted(m.exponents):
        if v not in xs:
            xs.append(v)
    return xs


def coeff_extract_bounded(c: Circuit, monomial, x_vars=None,
                          degree_budget: int = DEFAULT_DEGREE_BUDGET,
                          node_budget: int = DEFAULT_NODE_BUDGET) -> Circuit:
    """Coefficient of an x̄-monomial, preserving the circuit's depth.

    c must be alternating with a + output and every leaf edge feeding a
    + node.  One split per unit of degree peels the monomial off, then
    every variable in x_vars (defaulting to the monomial's own) is set
    to 0, so the result is a circuit over the remaining variables with
    depth exactly depth(c).
    """
    m = _as_monomial(monomial)
    bad = normal_form_violations(c, allow_leaves_under_mul=False,
                                 require_uniform_depth=False,
                                 require_tree=False)
    if bad:
        raise NotNormalForm(", ".join(bad))
    if m.degree > degree_budget:
        raise DegreeBudgetExceeded(
            f"monomial degree {m.degree} exceeds budget {degree_budget}")
    g = c
    for v in m.variables():
        g, _ = split_variable(g, v)
        if g.size() > node_budget:
            raise DegreeBudgetExceeded(
                f"{g.size()} nodes after splitting exceed {node_budget}")
    return g.restrict({v: 0 for v in _cleared_vars(m, x_vars)})


def coeff_extract_general(c: Circuit, monomial, x_vars=None,
                          degree_budget: int = DEFAULT_DEGREE_BUDGET,
                          node_budget: int = DEFAULT_NODE_BUDGET) -> Circuit:
    """Coefficient of an x̄-monomial from an arbitrary circuit.

    No shape or depth promises: per variable, every node is replaced by
    a row of slots computing the coefficients of x^0..x^e, added
    slotwise and convolved across products.  Finishes by setting the
    x_vars (plus the monomial's own) to 0.
    """
    m = _as_monomial(monomial)
    if m.degree > degree_budget:
        raise DegreeBudgetExceeded(
            f"monomial degree {m.degree} exceeds budget {degree_budget}")
    g = c
    for v in sorted(m.exponents):
        if v in g.label_vars():
            raise Unsupported(f"{v} appears as an edge label")
        g = _coeff_slots(g, v, m.exponents[v], node_budget)
    return g.restrict({v: 0 for v in _cleared_vars(m, x_vars)})


def _coeff_slots(c: Circuit, x: str, e: int, node_budget: int) -> Circuit:
    """Track the coefficients of x^0..x^e through the DAG; keep slot e."""
    b = CircuitBuilder(c.field)
    slots: Dict[int, List[Optional[int]]] = {}
    for nid in c.reachable():
        node = c.nodes[nid]
        row: List[Optional[int]] = [None] * (e + 1)
        if node.kind == IN:
            if node.name == x:
                row[1] = b.const(1)
            else:
                row[0] = b.input(node.name)
        elif node.kind == CONST:
            row[0] = b.const(node.value)
        elif node.kind == ADD:
            for k in range(e + 1):
                edges = [(slots[cid][k], lab) for cid, lab in node.children
                         if slots[cid][k] is not None]
                if edges:
                    row[k] = b.add(*edges)
        else:  # MUL: convolve children pairwise, truncated past slot e
            acc: List[Optional[int]] = [None] * (e + 1)
            acc[0] = b.const(1)
            for cid, lab in node.children:
                child = slots[cid]
                nxt: List[Optional[int]] = [None] * (e + 1)
                for k in range(e + 1):
                    prods = [b.mul((acc[i], 1), (child[k - i], lab))
                             for i in range(k + 1)
                             if acc[i] is not None
                             and child[k - i] is not None]
                    if prods:
                        nxt[k] = b.add(*[(p, 1) for p in prods])
                acc = nxt
            row = acc
        slots[nid] = row
        if b.node_count() > node_budget:
            raise DegreeBudgetExceeded(
                f"{b.node_count()} nodes while extracting exceed "
                f"{node_budget}")
    top = slots[c.output][e]
    return b.build(b.const(0) if top is None else top)
