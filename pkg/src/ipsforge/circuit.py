"""Algebraic circuit intermediate representation.

A circuit is a DAG of unbounded fan-in add/mul nodes over input and
constant leaves. Every edge carries a label: either a field constant
(the common case, default 1) or the name of a gating variable. An add
node computes the label-weighted sum of its children; a mul node
computes the product of the label-weighted children.

The module also provides the measurements (depth, product depth,
syntactic degree), the brute-force expansion oracle, restriction,
straight-line-program lowering, the normal-depth-form rewrite, and the
canonical text format.
"""

from __future__ import annotations

import re
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from ipsforge import _kernels
from ipsforge.errors import (BudgetExceeded, DepthBudgetExceeded,
                             ExpansionBudgetExceeded, FieldMismatch,
                             FormatError, MissingAssignment, NotNormalForm)
from ipsforge.ffield import FieldElem, FiniteField, ff_new
from ipsforge.poly import DEFAULT_TERM_BUDGET, SparsePoly

Label = Union[int, str]

ADD = "add"
MUL = "mul"
IN = "in"
CONST = "const"

NORMALIZE_DEPTH_LIMIT = 12
DEFAULT_NODE_BUDGET = 200_000

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_GNAME_RE = re.compile(r"g[0-9]+")


class Node:
    """One circuit node; immutable after construction."""

    __slots__ = ("id", "kind", "children", "name", "value")

    def __init__(self, id: int, kind: str,
                 children: Sequence[Tuple[int, Label]] = (),
                 name: Optional[str] = None, value: Optional[int] = None):
        self.id = id
        self.kind = kind
        self.children = tuple(children)
        self.name = name
        self.value = value

    def is_leaf(self) -> bool:
        return self.kind in (IN, CONST)

    def __repr__(self):
        if self.kind == IN:
            return f"Node({self.id}, in:{self.name})"
        if self.kind == CONST:
            return f"Node({self.id}, const:{self.value})"
        return f"Node({self.id}, {self.kind}, {list(self.children)})"


class Circuit:
    """Immutable circuit with a designated output node."""

    def __init__(self, field: FiniteField, nodes: Sequence[Node], output: int):
        self.field = field
        self.nodes: Dict[int, Node] = {}
        for node in nodes:
            if node.id in self.nodes:
                raise FormatError(f"duplicate node id {node.id}")
            for cid, _ in node.children:
                if cid not in self.nodes:
                    raise FormatError(
                        f"node {node.id} references undefined child {cid}")
            self.nodes[node.id] = node
        if output not in self.nodes:
            raise FormatError(f"output node {output} undefined")
        self.output = output
        self._cache: dict = {}

    @property
    def q(self) -> int:
        return self.field.q

    # -- structure ------------------------------------------------------

    def reachable(self) -> List[int]:
        """Ids of nodes reachable from the output, in topological order."""
        if "reachable" not in self._cache:
            seen = {self.output}
            stack = [self.output]
            while stack:
                node = self.nodes[stack.pop()]
                for cid, _ in node.children:
                    if cid not in seen:
                        seen.add(cid)
                        stack.append(cid)
            self._cache["reachable"] = [i for i in self.nodes if i in seen]
        return self._cache["reachable"]

    def size(self) -> int:
        """Node count, leaves included, over the reachable part."""
        return len(self.reachable())

    def inputs(self) -> Tuple[str, ...]:
        """Reachable input-node names, in first-appearance order."""
        names = []
        for nid in self.reachable():
            node = self.nodes[nid]
            if node.kind == IN and node.name not in names:
                names.append(node.name)
        return tuple(names)

    def label_vars(self) -> Tuple[str, ...]:
        """Variable names appearing as edge labels, first-appearance order."""
        names: List[str] = []
        for nid in self.reachable():
            for _, lab in self.nodes[nid].children:
                if isinstance(lab, str) and lab not in names:
                    names.append(lab)
        return tuple(names)

    def all_vars(self) -> Tuple[str, ...]:
        extras = [v for v in self.label_vars() if v not in self.inputs()]
        return self.inputs() + tuple(extras)

    def subcircuit(self, node_id: int) -> "Circuit":
        if node_id not in self.nodes:
            raise FormatError(f"no node {node_id}")
        return Circuit(self.field, list(self.nodes.values()), node_id)

    # -- measurements -----------------------------------------------------

    def depth(self) -> int:
        """Length in edges of the longest output-to-leaf path."""
        if "depth" not in self._cache:
            d: Dict[int, int] = {}
            for nid in self.reachable():
                node = self.nodes[nid]
                d[nid] = 1 + max((d[c] for c, _ in node.children), default=-1)
            self._cache["depth"] = d[self.output]
        return self._cache["depth"]

    def product_depth(self) -> int:
        """Max number of mul nodes on any output-to-leaf path."""
        pd: Dict[int, int] = {}
        for nid in self.reachable():
            node = self.nodes[nid]
            here = 1 if node.kind == MUL else 0
            pd[nid] = here + max((pd[c] for c, _ in node.children), default=0)
        return pd[self.output]

    def syntactic_degree(self) -> int:
        """Formal degree: const 0, input 1, add max, mul sum.

        A variable edge label adds 1 to that child's contribution, since
        it abbreviates a multiplication by an input.
        """
        sd: Dict[int, int] = {}
        for nid in self.reachable():
            node = self.nodes[nid]
            if node.kind == CONST:
                sd[nid] = 0
            elif node.kind == IN:
                sd[nid] = 1
            else:
                contrib = [sd[c] + (1 if isinstance(lab, str) else 0)
                           for c, lab in node.children]
                sd[nid] = max(contrib, default=0) if node.kind == ADD \
                    else sum(contrib)
        return sd[self.output]

    # -- semantics --------------------------------------------------------

    def _flatten(self):
        """Lower to the kernels' flat program form.

        Slots: inputs (all_vars order), then constants, then one slot per
        instruction. Variable edge labels become auxiliary fan-in-2 mul
        instructions. The program's value is the last instruction's slot.
        """
        if "flat" in self._cache:
            return self._cache["flat"]
        names = self.all_vars()
        slot_of_var = {v: i for i, v in enumerate(names)}
        n_in = len(names)
        consts: List[int] = []
        const_slot: Dict[int, int] = {}
        ops: List[int] = []
        starts: List[int] = [0]
        child_slots: List[int] = []
        child_labels: List[int] = []
        next_slot = n_in  # grows as consts/instructions appear
        node_slot: Dict[int, int] = {}
        aux: Dict[Tuple[str, int], int] = {}

        def add_instr(op: int, kids: List[Tuple[int, int]]) -> int:
            nonlocal next_slot
            ops.append(op)
            for s, lab in kids:
                child_slots.append(s)
                child_labels.append(lab)
            starts.append(len(child_slots))
            slot = next_slot
            next_slot += 1
            return slot

        order = self.reachable()
        for nid in order:
            node = self.nodes[nid]
            if node.kind == CONST:
                if node.value not in const_slot:
                    const_slot[node.value] = next_slot
                    consts.append(node.value)
                    next_slot += 1
                node_slot[nid] = const_slot[node.value]
            elif node.kind == IN:
                node_slot[nid] = slot_of_var[node.name]
        # constants claimed slots n_in..; instructions follow
        for nid in order:
            node = self.nodes[nid]
            if node.is_leaf():
                continue
            kids = []
            for cid, lab in node.children:
                cslot = node_slot[cid]
                if isinstance(lab, str):
                    key = (lab, cslot)
                    if key not in aux:
                        aux[key] = add_instr(
                            1, [(slot_of_var[lab], 1), (cslot, 1)])
                    kids.append((aux[key], 1))
                else:
                    kids.append((cslot, lab))
            node_slot[nid] = add_instr(0 if node.kind == ADD else 1, kids)
        out = self.nodes[self.output]
        if out.is_leaf():
            add_instr(0, [(node_slot[self.output], 1)])
        flat = (n_in, names, tuple(consts), tuple(ops), tuple(starts),
                tuple(child_slots), tuple(child_labels))
        self._cache["flat"] = flat
        return flat

    def evaluate(self, assignment) -> FieldElem:
        n_in, names, consts, ops, starts, cs, cl = self._flatten()
        point = []
        for v in names:
            if v not in assignment:
                raise MissingAssignment(f"no value for {v}")
            a = assignment[v]
            if isinstance(a, FieldElem):
                if a.field.q != self.q:
                    raise FieldMismatch(
                        f"value for {v} lives in F{a.field.q}, not F{self.q}")
                point.append(a.value)
            else:
                point.append(int(a) % self.q)
        val = _kernels.prog_eval(n_in, consts, ops, starts, cs, cl,
                                 tuple(point), self.q)
        return self.field.elem(val)

    def expand(self, budget: int = DEFAULT_TERM_BUDGET) -> SparsePoly:
        """Exact polynomial computed by the circuit (ground-truth oracle)."""
        vars = self.all_vars()
        var_poly = {v: SparsePoly.variable(self.field, vars, v) for v in vars}
        polys: Dict[int, SparsePoly] = {}
        for nid in self.reachable():
            node = self.nodes[nid]
            if node.kind == CONST:
                p = SparsePoly.const(self.field, vars, node.value)
            elif node.kind == IN:
                p = var_poly[node.name]
            else:
                parts = []
                for cid, lab in node.children:
                    cp = polys[cid]
                    if isinstance(lab, str):
                        cp = cp.mul(var_poly[lab], budget)
                    elif lab != 1:
                        cp = cp.scale(lab)
                    parts.append(cp)
                if node.kind == ADD:
                    p = SparsePoly.zero(self.field, vars)
                    for cp in parts:
                        p = p + cp
                else:
                    p = SparsePoly.const(self.field, vars, 1)
                    for cp in parts:
                        p = p.mul(cp, budget)
            if len(p.terms) > budget:
                raise ExpansionBudgetExceeded(
                    f"{len(p.terms)} terms at node {nid} exceed {budget}")
            polys[nid] = p
        return polys[self.output]

    def restrict(self, partial: Dict[str, object]) -> "Circuit":
        """Substitute circuits or field constants for named variables.

        Covers both input leaves and variable edge labels; variables not
        mentioned stay free. Substituted circuits are spliced once per
        occurrence, which keeps trees trees.
        """
        b = CircuitBuilder(self.field, dedup=False)
        mapped: Dict[int, int] = {}
        for nid in self.reachable():
            node = self.nodes[nid]
            if node.kind == IN and node.name in partial:
                val = partial[node.name]
                if isinstance(val, Circuit):
                    if val.q != self.q:
                        raise FieldMismatch("substituted circuit field differs")
                    mapped[nid] = b.splice(val)
                else:
                    mapped[nid] = b.const(val)
            elif node.kind == IN:
                mapped[nid] = b.input(node.name)
            elif node.kind == CONST:
                mapped[nid] = b.const(node.value)
            else:
                kids: List[Tuple[int, Label]] = []
                for cid, lab in node.children:
                    tgt = mapped[cid]
                    if isinstance(lab, str) and lab in partial:
                        val = partial[lab]
                        if isinstance(val, Circuit):
                            if val.q != self.q:
                                raise FieldMismatch(
                                    "substituted circuit field differs")
                            tgt = b.mul((b.splice(val), 1), (tgt, 1))
                            lab = 1
                        else:
                            lab = val
                    kids.append((tgt, lab))
                mk = b.add if node.kind == ADD else b.mul
                mapped[nid] = mk(*kids)
        return b.build(mapped[self.output])

    # -- SLP lowering -------------------------------------------------------

    def to_slp(self, as_equation: bool = False) -> "Slp":
        """One equation per internal node, in topological order.

        Edge labels are not part of the straight-line form, so labeled
        edges lower to auxiliary product equations first.
        """
        src = self
        if any(lab != 1 for nid in self.reachable()
               for _, lab in self.nodes[nid].children):
            src = desugar_labels(self, all_labels=True)
        for name in src.inputs():
            if _GNAME_RE.fullmatch(name):
                raise FormatError(
                    f"input name {name} collides with equation names")
        eqs: List[Tuple[str, str, List[Union[str, int]]]] = []
        ref: Dict[int, Union[str, int]] = {}
        counter = 0
        out_ref: Union[str, int, None] = None
        for nid in src.reachable():
            node = src.nodes[nid]
            if node.kind == IN:
                ref[nid] = node.name
            elif node.kind == CONST:
                ref[nid] = node.value
            else:
                counter += 1
                lhs = f"g{counter}"
                op = "+" if node.kind == ADD else "*"
                eqs.append((lhs, op, [ref[c] for c, _ in node.children]))
                ref[nid] = lhs
        out_ref = ref[src.output]
        if not eqs or ref[src.output] != eqs[-1][0]:
            # output is a leaf or an interior node; bind it explicitly
            counter += 1
            eqs.append((f"g{counter}", "+", [out_ref]))
        return Slp(self.field, eqs, as_equation=as_equation)

    # -- text format ----------------------------------------------------------

    def to_text(self) -> str:
        """Canonical form: reachable nodes only, renumbered topologically."""
        order = self.reachable()
        num = {nid: i + 1 for i, nid in enumerate(order)}
        lines = [f"circuit q={self.q} nvars={len(self.inputs())}"]
        for nid in order:
            node = self.nodes[nid]
            if node.kind == IN:
                body = f"in:{node.name}"
            elif node.kind == CONST:
                body = f"const:{node.value}"
            else:
                body = node.kind
            parts = [f"n{num[nid]}", body]
            parts.extend(f"n{num[c]}@{lab}" for c, lab in node.children)
            lines.append(" ".join(parts))
        lines.append(f"out n{num[self.output]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "Circuit":
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if not lines:
            raise FormatError("empty circuit text")
        m = re.fullmatch(r"circuit q=(\d+) nvars=(\d+)", lines[0])
        if not m:
            raise FormatError(f"bad header: {lines[0]!r}")
        field = ff_new(int(m.group(1)))
        declared_nvars = int(m.group(2))
        nodes: List[Node] = []
        by_name: Dict[str, int] = {}
        output: Optional[int] = None
        for lineno, line in enumerate(lines[1:], start=2):
            if line.startswith("out "):
                if output is not None:
                    raise FormatError(f"line {lineno}: second out line")
                mo = re.fullmatch(r"out n(\d+)", line)
                if not mo:
                    raise FormatError(f"line {lineno}: bad out line")
                output = int(mo.group(1))
                continue
            if output is not None:
                raise FormatError(f"line {lineno}: node after out line")
            toks = line.split()
            mo = re.fullmatch(r"n(\d+)", toks[0])
            if not mo or len(toks) < 2:
                raise FormatError(f"line {lineno}: bad node line {line!r}")
            nid = int(mo.group(0)[1:])
            if nid in by_name.values() or any(n.id == nid for n in nodes):
                raise FormatError(f"line {lineno}: duplicate id n{nid}")
            head = toks[1]
            kids: List[Tuple[int, Label]] = []
            for tok in toks[2:]:
                mc = re.fullmatch(r"n(\d+)@(.+)", tok)
                if not mc:
                    raise FormatError(f"line {lineno}: bad child {tok!r}")
                cid = int(mc.group(1))
                if not any(n.id == cid for n in nodes):
                    raise FormatError(
                        f"line {lineno}: forward or unknown reference n{cid}")
                labtok = mc.group(2)
                if labtok.isdigit():
                    lab: Label = int(labtok)
                    if lab >= field.q:
                        raise FormatError(
                            f"line {lineno}: label {lab} outside field")
                elif _NAME_RE.fullmatch(labtok):
                    lab = labtok
                else:
                    raise FormatError(f"line {lineno}: bad label {labtok!r}")
                kids.append((cid, lab))
            if head in (ADD, MUL):
                nodes.append(Node(nid, head, kids))
            elif head.startswith("in:"):
                name = head[3:]
                if not _NAME_RE.fullmatch(name):
                    raise FormatError(f"line {lineno}: bad var name {name!r}")
                if kids:
                    raise FormatError(f"line {lineno}: leaf with children")
                nodes.append(Node(nid, IN, name=name))
            elif head.startswith("const:"):
                try:
                    v = int(head[6:])
                except ValueError:
                    raise FormatError(f"line {lineno}: bad const {head!r}")
                if not 0 <= v < field.q:
                    raise FormatError(
                        f"line {lineno}: const {v} outside field")
                if kids:
                    raise FormatError(f"line {lineno}: leaf with children")
                nodes.append(Node(nid, CONST, value=v))
            else:
                raise FormatError(f"line {lineno}: unknown kind {head!r}")
        if output is None:
            raise FormatError("missing out line")
        c = cls(field, nodes, output)
        if len(c.inputs()) != declared_nvars:
            raise FormatError(
                f"header says nvars={declared_nvars}, found {len(c.inputs())}")
        return c


class Slp:
    """Straight-line program: named equations, optionally closed with = 0."""

    def __init__(self, field: FiniteField,
                 equations: List[Tuple[str, str, List[Union[str, int]]]],
                 as_equation: bool = False):
        self.field = field
        self.equations = equations
        self.as_equation = as_equation

    def out_name(self) -> str:
        return self.equations[-1][0]

    def to_text(self) -> str:
        lines = [f"slp q={self.field.q}"]
        for lhs, op, refs in self.equations:
            rendered = f" {op} ".join(str(r) for r in refs)
            if not refs:
                rendered = "0" if op == "+" else "1"
            lines.append(f"{lhs} = {rendered}")
        if self.as_equation:
            lines.append(f"{self.out_name()} = 0")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "Slp":
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if not lines:
            raise FormatError("empty slp text")
        m = re.fullmatch(r"slp q=(\d+)", lines[0])
        if not m:
            raise FormatError(f"bad header: {lines[0]!r}")
        field = ff_new(int(m.group(1)))
        eqs: List[Tuple[str, str, List[Union[str, int]]]] = []
        as_equation = False
        defined = set()
        for lineno, line in enumerate(lines[1:], start=2):
            lhs, sep, rhs = line.partition("=")
            if not sep:
                raise FormatError(f"line {lineno}: no '='")
            lhs = lhs.strip()
            rhs = rhs.strip()
            if not _GNAME_RE.fullmatch(lhs):
                raise FormatError(f"line {lineno}: bad lhs {lhs!r}")
            if rhs == "0" and lhs in defined:
                if lineno != len(lines):
                    raise FormatError(
                        f"line {lineno}: closing equation must come last")
                as_equation = True
                if lhs != eqs[-1][0]:
                    raise FormatError(
                        f"line {lineno}: closing equation names {lhs}, "
                        f"not the output {eqs[-1][0]}")
                continue
            if "+" in rhs:
                op, refs = "+", [t.strip() for t in rhs.split("+")]
            elif "*" in rhs:
                op, refs = "*", [t.strip() for t in rhs.split("*")]
            else:
                op, refs = "+", [rhs]
            parsed: List[Union[str, int]] = []
            for tok in refs:
                if tok.lstrip("-").isdigit():
                    parsed.append(int(tok) % field.q)
                elif _NAME_RE.fullmatch(tok):
                    if _GNAME_RE.fullmatch(tok) and tok not in defined:
                        raise FormatError(
                            f"line {lineno}: use of undefined {tok}")
                    parsed.append(tok)
                else:
                    raise FormatError(f"line {lineno}: bad term {tok!r}")
            eqs.append((lhs, op, parsed))
            defined.add(lhs)
        if not eqs:
            raise FormatError("no equations")
        return cls(field, eqs, as_equation=as_equation)

    def to_circuit(self) -> Circuit:
        """Rebuild a circuit whose evaluation matches the program."""
        b = CircuitBuilder(self.field)
        ref: Dict[str, int] = {}

        def resolve(tok: Union[str, int]) -> int:
            if isinstance(tok, int):
                return b.const(tok)
            if tok in ref:
                return ref[tok]
            if _GNAME_RE.fullmatch(tok):
                raise FormatError(f"use of undefined {tok}")
            return b.input(tok)

        for lhs, op, refs in self.equations:
            kids = [resolve(t) for t in refs]
            ref[lhs] = b.add(*kids) if op == "+" else b.mul(*kids)
        return b.build(ref[self.equations[-1][0]])


class CircuitBuilder:
    """Incremental constructor; children must exist before their parent."""

    def __init__(self, field, dedup: bool = True):
        self.field = field if isinstance(field, FiniteField) else ff_new(field)
        self.dedup = dedup
        self._nodes: List[Node] = []
        self._inputs: Dict[str, int] = {}
        self._consts: Dict[int, int] = {}

    def _push(self, node: Node) -> int:
        self._nodes.append(node)
        return node.id

    def input(self, name: str) -> int:
        if not _NAME_RE.fullmatch(name):
            raise FormatError(f"bad variable name {name!r}")
        if self.dedup and name in self._inputs:
            return self._inputs[name]
        nid = self._push(Node(len(self._nodes), IN, name=name))
        self._inputs.setdefault(name, nid)
        return nid

    def const(self, value) -> int:
        v = int(value.value if isinstance(value, FieldElem) else value)
        v %= self.field.q
        if self.dedup and v in self._consts:
            return self._consts[v]
        nid = self._push(Node(len(self._nodes), CONST, value=v))
        self._consts.setdefault(v, nid)
        return nid

    def _norm_children(self, children) -> List[Tuple[int, Label]]:
        out: List[Tuple[int, Label]] = []
        for item in children:
            if isinstance(item, tuple):
                cid, lab = item
            else:
                cid, lab = item, 1
            if not isinstance(cid, int) or not 0 <= cid < len(self._nodes):
                raise FormatError(f"unknown child id {cid!r}")
            if isinstance(lab, FieldElem):
                if lab.field.q != self.field.q:
                    raise FieldMismatch("label from a different field")
                lab = lab.value
            if isinstance(lab, int):
                lab %= self.field.q
            elif not (isinstance(lab, str) and _NAME_RE.fullmatch(lab)):
                raise FormatError(f"bad edge label {lab!r}")
            out.append((cid, lab))
        return out

    def add(self, *children) -> int:
        return self._push(
            Node(len(self._nodes), ADD, self._norm_children(children)))

    def mul(self, *children) -> int:
        return self._push(
            Node(len(self._nodes), MUL, self._norm_children(children)))

    def splice(self, other: Circuit) -> int:
        """Copy another circuit's reachable part in; returns its output id."""
        if other.q != self.field.q:
            raise FieldMismatch(
                f"cannot splice F{other.q} circuit into F{self.field.q}")
        mapped: Dict[int, int] = {}
        for nid in other.reachable():
            node = other.nodes[nid]
            if node.kind == IN:
                mapped[nid] = self.input(node.name)
            elif node.kind == CONST:
                mapped[nid] = self.const(node.value)
            else:
                kids = [(mapped[c], lab) for c, lab in node.children]
                mk = self.add if node.kind == ADD else self.mul
                mapped[nid] = mk(*kids)
        return mapped[other.output]

    def node_count(self) -> int:
        return len(self._nodes)

    def build(self, output: int) -> Circuit:
        if not 0 <= output < len(self._nodes):
            raise FormatError(f"unknown output id {output}")
        return Circuit(self.field, list(self._nodes), output)


# ---------------------------------------------------------------------------
# label desugaring


def desugar_labels(c: Circuit, all_labels: bool = False) -> Circuit:
    """Replace labeled edges with explicit multiplications.

    By default only variable labels are lowered (each becomes a fan-in-2
    mul against the gating input); with all_labels set, every non-unit
    constant label is lowered against a constant leaf too.
    """
    b = CircuitBuilder(c.field)
    mapped: Dict[int, int] = {}
    for nid in c.reachable():
        node = c.nodes[nid]
        if node.kind == IN:
            mapped[nid] = b.input(node.name)
        elif node.kind == CONST:
            mapped[nid] = b.const(node.value)
        else:
            kids: List[Tuple[int, Label]] = []
            for cid, lab in node.children:
                tgt = mapped[cid]
                if isinstance(lab, str):
                    tgt = b.mul((b.input(lab), 1), (tgt, 1))
                    lab = 1
                elif all_labels and lab != 1:
                    tgt = b.mul((b.const(lab), 1), (tgt, 1))
                    lab = 1
                kids.append((tgt, lab))
            mk = b.add if node.kind == ADD else b.mul
            mapped[nid] = mk(*kids)
    return b.build(mapped[c.output])


# ---------------------------------------------------------------------------
# fan-in bounding


def bound_mul_fanin(c: Circuit, t: int) -> Circuit:
    """Rebuild so every mul node has fan-in at most t (t >= 2)."""
    if t < 2:
        raise ValueError("fan-in bound must be at least 2")
    b = CircuitBuilder(c.field, dedup=False)
    mapped: Dict[int, int] = {}
    for nid in c.reachable():
        node = c.nodes[nid]
        if node.kind == IN:
            mapped[nid] = b.input(node.name)
        elif node.kind == CONST:
            mapped[nid] = b.const(node.value)
        else:
            kids = [(mapped[cid], lab) for cid, lab in node.children]
            if node.kind == ADD:
                mapped[nid] = b.add(*kids)
            else:
                while len(kids) > t:
                    kids = [(b.mul(*kids[i:i + t]), 1)
                            for i in range(0, len(kids), t)]
                mapped[nid] = b.mul(*kids)
    return b.build(mapped[c.output])


# ---------------------------------------------------------------------------
# constant folding


def fold_constants(c: Circuit) -> Circuit:
    """Equivalent circuit with constant subterms evaluated away.

    Sums drop zero terms and pool constant children into one leaf;
    products collapse to 0 on any zero factor and pool constant factors.
    A child under a variable edge label stays symbolic unless it is the
    constant 0.  Node kinds are preserved where a node survives, but the
    result can shrink to a single leaf, and leaves may end up feeding
    either node kind, so fold after any shape-sensitive transforms.
    """
    b = CircuitBuilder(c.field)
    q = c.q
    mapped: Dict[int, Tuple[str, int]] = {}  # nid -> ("const", v)|("node", id)

    def as_id(tag: str, v: int) -> int:
        return b.const(v) if tag == "const" else v

    for nid in c.reachable():
        node = c.nodes[nid]
        if node.kind == IN:
            mapped[nid] = ("node", b.input(node.name))
        elif node.kind == CONST:
            mapped[nid] = ("const", node.value)
        else:
            sym: List[Tuple[int, Label]] = []
            const_acc = 0 if node.kind == ADD else 1
            dead = False
            for cid, lab in node.children:
                tag, v = mapped[cid]
                if tag == "const" and isinstance(lab, int):
                    term = (v * lab) % q
                    if node.kind == ADD:
                        const_acc = (const_acc + term) % q
                    elif term == 0:
                        dead = True
                        break
                    else:
                        const_acc = (const_acc * term) % q
                elif isinstance(lab, int) and lab == 0:
                    if node.kind == MUL:
                        dead = True
                        break
                elif tag == "const" and v == 0:
                    # 0 * label is 0 whatever the label evaluates to
                    if node.kind == MUL:
                        dead = True
                        break
                else:
                    sym.append((as_id(tag, v), lab))
            if dead:
                mapped[nid] = ("const", 0)
                continue
            if not sym:
                mapped[nid] = ("const", const_acc)
                continue
            if node.kind == ADD:
                if const_acc:
                    sym.append((b.const(const_acc), 1))
                mapped[nid] = ("node", b.add(*sym))
            else:
                if const_acc != 1:
                    sym.append((b.const(const_acc), 1))
                mapped[nid] = ("node", b.mul(*sym))
    tag, v = mapped[c.output]
    return b.build(as_id(tag, v))


# ---------------------------------------------------------------------------
# normal depth form


class _T:
    """Mutable tree node used only inside the normal-form rewrite."""

    __slots__ = ("kind", "children", "name", "value")

    def __init__(self, kind, children=None, name=None, value=None):
        self.kind = kind
        self.children = children if children is not None else []
        self.name = name
        self.value = value


def _tree_from(c: Circuit, budget: int) -> _T:
    count = 0

    def walk(nid: int) -> _T:
        nonlocal count
        count += 1
        if count > budget:
            raise BudgetExceeded(
                f"tree conversion exceeds {budget} nodes")
        node = c.nodes[nid]
        if node.kind == IN:
            return _T(IN, name=node.name)
        if node.kind == CONST:
            return _T(CONST, value=node.value)
        if not node.children:
            # empty sum is 0, empty product is 1
            return _T(CONST, value=0 if node.kind == ADD else 1)
        return _T(node.kind,
                  [[walk(cid), lab] for cid, lab in node.children])

    return walk(c.output)


def _collapse(t: _T, q: int) -> None:
    """Merge same-kind parent/child pairs, folding labels through."""
    if t.kind in (IN, CONST):
        return
    for ch, _ in t.children:
        _collapse(ch, q)
    merged: List[list] = []
    for ch, lab in t.children:
        if ch.kind != t.kind:
            merged.append([ch, lab])
            continue
        inner = ch.children
        if t.kind == ADD:
            merged.extend([g, glab * lab % q] for g, glab in inner)
        else:
            # fold the outer label onto the first inner factor
            for i, (g, glab) in enumerate(inner):
                merged.append([g, glab * lab % q if i == 0 else glab])
    t.children = merged


def _wrap_mul_leaves(t: _T) -> None:
    if t.kind in (IN, CONST):
        return
    for entry in t.children:
        ch, lab = entry
        _wrap_mul_leaves(ch)
        if t.kind == MUL and ch.kind in (IN, CONST):
            entry[0] = _T(ADD, [[ch, lab]])
            entry[1] = 1


def _max_leaf_depth(t: _T, d: int = 0) -> int:
    if t.kind in (IN, CONST):
        return d
    return max(_max_leaf_depth(ch, d + 1) for ch, _ in t.children)


def _pad_leaves(t: _T, depth: int, target: int) -> None:
    for entry in t.children:
        ch, lab = entry
        if ch.kind in (IN, CONST):
            leaf_depth = depth + 1
            if leaf_depth == target:
                continue
            # chain occupies depths leaf_depth..target-1; the original
            # label moves to the final add-to-leaf edge
            chain = _T(ADD, [[ch, lab]])
            for d in range(target - 2, leaf_depth - 1, -1):
                chain = _T(MUL if d % 2 == 1 else ADD, [[chain, 1]])
            entry[0] = chain
            entry[1] = 1
        else:
            _pad_leaves(ch, depth + 1, target)


def _emit_tree(t: _T, b: CircuitBuilder) -> int:
    if t.kind == IN:
        return b.input(t.name)
    if t.kind == CONST:
        return b.const(t.value)
    kids = [(_emit_tree(ch, b), lab) for ch, lab in t.children]
    return b.add(*kids) if t.kind == ADD else b.mul(*kids)


def normalize_depth_form(c: Circuit, target_depth: Optional[int] = None,
                         node_budget: int = DEFAULT_NODE_BUDGET) -> Circuit:
    """Rewrite into an alternating tree with uniform leaf depth.

    The output satisfies: leaves feed add nodes only, the output node is
    an add, kinds alternate along every path, every node has out-degree
    at most 1, and all leaves sit at the same depth. Expansion is
    preserved; size may grow exponentially in the input depth, which is
    why the input depth is capped.
    """
    if c.depth() > NORMALIZE_DEPTH_LIMIT:
        raise DepthBudgetExceeded(
            f"depth {c.depth()} exceeds rewrite cap {NORMALIZE_DEPTH_LIMIT}")
    if c.label_vars():
        c = desugar_labels(c)
    t = _tree_from(c, node_budget)
    _collapse(t, c.q)
    if t.kind != ADD:
        t = _T(ADD, [[t, 1]])
    _wrap_mul_leaves(t)
    _collapse(t, c.q)  # wrapping cannot create same-kind edges; keep tidy
    need = _max_leaf_depth(t)
    if target_depth is None:
        target_depth = need
    if target_depth % 2 == 0:
        raise ValueError("uniform leaf depth must be odd (add-rooted tree)")
    if target_depth < need:
        raise DepthBudgetExceeded(
            f"target depth {target_depth} below required {need}")
    _pad_leaves(t, 0, target_depth)
    b = CircuitBuilder(c.field, dedup=False)
    return b.build(_emit_tree(t, b))


# ---------------------------------------------------------------------------
# normal form validation


def normal_form_violations(c: Circuit,
                           allow_leaves_under_mul: bool = False,
                           require_uniform_depth: bool = True,
                           require_tree: bool = True) -> List[str]:
    """Check each normal-depth-form clause independently; return failures."""
    out: List[str] = []
    order = c.reachable()
    nodes = c.nodes
    if nodes[c.output].kind != ADD:
        out.append("output-not-add")
    indeg = {nid: 0 for nid in order}
    alternation_ok = True
    leaf_rule_ok = True
    for nid in order:
        node = nodes[nid]
        for cid, _ in node.children:
            indeg[cid] += 1
            child = nodes[cid]
            if not child.is_leaf() and child.kind == node.kind:
                alternation_ok = False
            if child.is_leaf() and node.kind == MUL \
                    and not allow_leaves_under_mul:
                leaf_rule_ok = False
    if not alternation_ok:
        out.append("not-alternating")
    if not leaf_rule_ok:
        out.append("leaf-under-mul")
    is_tree = all(d <= 1 for d in indeg.values())
    if require_tree and not is_tree:
        out.append("not-a-tree")
    if require_uniform_depth and is_tree:
        leaf_depths = set()
        stack = [(c.output, 0)]
        while stack:
            nid, d = stack.pop()
            node = nodes[nid]
            if node.is_leaf():
                leaf_depths.add(d)
            for cid, _ in node.children:
                stack.append((cid, d + 1))
        if len(leaf_depths) > 1:
            out.append("leaf-depth-not-uniform")
    return out


def is_normal_depth_form(c: Circuit, **kw) -> bool:
    return not normal_form_violations(c, **kw)


def validate_normal_depth_form(c: Circuit, **kw) -> None:
    bad = normal_form_violations(c, **kw)
    if bad:
        raise NotNormalForm(", ".join(bad))
