"""Bounded-depth universal circuit and witness-producing embedding.

The universal circuit U(x-bar, w-bar) is a fixed alternating layout:
level 1 is a single output add node, even levels are mul nodes in
fan-in groups with hard-wired children, odd levels are s add nodes,
and the last level holds the variable leaves plus a constant-1 leaf.
Every add node is connected to every node one level down through an
edge labeled by a fresh gating variable w; assigning field values to
the w variables carves an arbitrary small circuit out of the layout.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

from ipsforge.circuit import (ADD, CONST, IN, MUL, Circuit, CircuitBuilder,
                              normal_form_violations, normalize_depth_form)
from ipsforge.errors import (BudgetExceeded, DoesNotFit, FieldMismatch,
                             FormatError, NotNormalForm)
from ipsforge.ffield import FieldElem, FiniteField, ff_new

UNIVERSAL_DEPTH_LIMIT = 8
_CHAIN = "chain"


def layer_count(delta: int) -> int:
    """Number of add levels needed to host any depth-delta circuit.

    A depth-delta circuit rewrites to an alternating tree of uniform
    leaf depth at most delta+2 (one add above the output, one between
    each mul and its leaves), rounded up to odd.
    """
    return (delta + 2) // 2 + 1


def mul_level_width(s: int, t: int) -> int:
    return sum(-(-s // j) for j in range(1, t + 1))


def k_edge_vars(s: int, delta: int, t: int, n_vars: int = 1) -> int:
    """Exact number of gating variables in the layout."""
    dp = layer_count(delta)
    w = mul_level_width(s, t)
    return w + (dp - 2) * s * w + s * (n_vars + 1)


class UniversalLayout:
    """Static shape of one universal circuit.

    levels maps level number (1..2*layers) to a kind and a width; mul
    levels also carry the slot table: per slot, its fan-in group and
    the half-open range of add slots one level down that it multiplies.
    """

    def __init__(self, field: FiniteField, var_names: Sequence[str],
                 s: int, delta: int, t: int, edge_prefix: str = "w"):
        self.field = field
        self.var_names = tuple(var_names)
        self.s = s
        self.delta = delta
        self.t = t
        self.edge_prefix = edge_prefix
        self.layers = layer_count(delta)
        self.depth = 2 * self.layers - 1
        self.leaf_level = 2 * self.layers
        self.mul_levels = list(range(2, 2 * self.layers - 1, 2))
        self.plus_levels = [1] + list(range(3, 2 * self.layers, 2))
        # slot table shared by every mul level
        self.mul_slots: List[Tuple[int, int, int]] = []  # (group, lo, hi)
        for j in range(1, t + 1):
            for m in range(-(-s // j)):
                lo = m * j
                hi = min((m + 1) * j, s)
                self.mul_slots.append((j, lo, hi))
        self.k = k_edge_vars(s, delta, t, len(self.var_names))

    def plus_width(self, level: int) -> int:
        return 1 if level == 1 else self.s

    def below_width(self, level: int) -> int:
        """Roster size of the level under a given add level."""
        if level + 1 == self.leaf_level:
            return len(self.var_names) + 1
        return len(self.mul_slots)

    def edge_var(self, level: int, plus: int, child: int) -> str:
        return f"{self.edge_prefix}_{level}_{plus}_{child}"

    def edge_vars(self) -> List[str]:
        out = []
        for level in self.plus_levels:
            for p in range(self.plus_width(level)):
                for c in range(self.below_width(level)):
                    out.append(self.edge_var(level, p, c))
        return out

    def describe(self) -> str:
        lines = [
            f"universal-layout q={self.field.q} nvars={len(self.var_names)} "
            f"s={self.s} delta={self.delta} t={self.t} depth={self.depth} "
            f"K={self.k}"
        ]
        for level in range(1, self.leaf_level + 1):
            if level == self.leaf_level:
                roster = ",".join(self.var_names) + ",const1"
                lines.append(f"level {level} kind=leaf nodes="
                             f"{len(self.var_names) + 1} roster={roster}")
            elif level in self.mul_levels:
                groups = ";".join(f"{j}:{lo}-{hi - 1}"
                                  for j, lo, hi in self.mul_slots)
                lines.append(f"level {level} kind=mul "
                             f"nodes={len(self.mul_slots)} blocks={groups}")
            else:
                lines.append(f"level {level} kind=add "
                             f"nodes={self.plus_width(level)}")
        lines.append(f"edgevars count={self.k} "
                     f"scheme={self.edge_prefix}_<level>_<plus>_<child>")
        return "\n".join(lines) + "\n"


def build_universal(n_vars: int, s: int, delta: int, t: int,
                    q: int = 2, var_names: Optional[Sequence[str]] = None,
                    edge_prefix: str = "w",
                    ) -> Tuple[Circuit, UniversalLayout]:
    """Construct the layout and its circuit over x-bar and w-bar.

    edge_prefix names the gating variables; give nested layouts distinct
    prefixes so their gating variables cannot collide.
    """
    if t < 2:
        raise ValueError("fan-in group bound t must be at least 2")
    if s < 1 or n_vars < 1:
        raise ValueError("s and n_vars must be positive")
    if delta > UNIVERSAL_DEPTH_LIMIT:
        raise BudgetExceeded(
            f"delta {delta} exceeds cap {UNIVERSAL_DEPTH_LIMIT}")
    if var_names is None:
        var_names = [f"x{i + 1}" for i in range(n_vars)]
    elif len(var_names) != n_vars:
        raise ValueError("var_names length must equal n_vars")
    field = ff_new(q)
    layout = UniversalLayout(field, var_names, s, delta, t, edge_prefix)
    gating = set(layout.edge_vars())
    clash = [v for v in var_names if v in gating]
    if clash:
        raise FormatError(
            f"leaf names {clash} collide with the gating variables; "
            f"pick a different edge_prefix")

    b = CircuitBuilder(field)
    leaves = [b.input(v) for v in var_names] + [b.const(1)]
    below = leaves
    # build upward from the deepest add level to the output
    for level in range(layout.leaf_level - 1, 0, -1):
        if level in layout.mul_levels:
            plus_below = below
            below = [b.mul(*[(plus_below[i], 1) for i in range(lo, hi)])
                     for _, lo, hi in layout.mul_slots]
        else:
            width = layout.plus_width(level)
            below = [
                b.add(*[(below[c], layout.edge_var(level, p, c))
                        for c in range(len(below))])
                for p in range(width)
            ]
    circuit = b.build(below[0])
    return circuit, layout


# ---------------------------------------------------------------------------
# embedding


def _levelize(f: Circuit) -> Dict[int, List[int]]:
    """Node ids of the tree f grouped by depth from the root."""
    levels: Dict[int, List[int]] = {}
    stack = [(f.output, 0)]
    while stack:
        nid, d = stack.pop()
        levels.setdefault(d, []).append(nid)
        for cid, _ in reversed(f.nodes[nid].children):
            stack.append((cid, d + 1))
    return levels


def embed(f: Circuit, layout: UniversalLayout) -> Dict[str, FieldElem]:
    """Gating assignment a-bar with U restricted to a-bar computing f.

    Works level by level from the output: mul nodes of f are packed
    into mul slots whose hard-wired block is large enough, extra block
    positions are fed constant-1 chains, and every add-to-child edge
    of f becomes the value of one gating variable. Unused gates stay 0.
    """
    if f.q != layout.field.q:
        raise FieldMismatch(
            f"circuit over F{f.q}, layout over F{layout.field.q}")
    bad = normal_form_violations(f)
    if bad:
        raise NotNormalForm(", ".join(bad))
    unknown = set(f.inputs()) - set(layout.var_names)
    if unknown:
        raise DoesNotFit(f"inputs {sorted(unknown)} not in layout")
    if f.depth() > layout.depth:
        raise DoesNotFit(f"depth {f.depth()} exceeds layout {layout.depth}")
    if f.depth() < layout.depth:
        f = normalize_depth_form(f, target_depth=layout.depth)

    levels = _levelize(f)
    for d, ids in levels.items():
        if d % 2 == 1:  # mul levels of f sit at odd depth
            for nid in ids:
                node = f.nodes[nid]
                if node.kind == MUL and len(node.children) > layout.t:
                    raise DoesNotFit(
                        f"mul fan-in {len(node.children)} exceeds t={layout.t}")
    width_cap = {0: 1}
    for d in range(1, layout.depth):
        width_cap[d] = len(layout.mul_slots) if d % 2 == 1 else layout.s
    for d, ids in levels.items():
        if d < layout.depth and len(ids) > width_cap[d]:
            raise DoesNotFit(
                f"{len(ids)} nodes at depth {d} exceed width {width_cap[d]}")

    # placement state, filled in by the backtracking search
    mul_slot_of: Dict[int, int] = {}      # f mul node id -> slot index
    plus_slot_of: Dict[int, int] = {f.output: 0}
    chain_plus: Dict[int, List[int]] = {}  # add level -> chain slot indices
    chain_feed: Dict[Tuple[int, int], int] = {}  # (level, slot) -> mul slot

    def pack(level_idx: int, chains_in: int) -> bool:
        """Assign slots at mul level layout.mul_levels[level_idx]."""
        if level_idx == len(layout.mul_levels):
            # chains at the deepest add level feed the constant leaf
            bottom = layout.depth
            chain_plus.setdefault(bottom, [])
            return chains_in == len(chain_plus[bottom])
        level = layout.mul_levels[level_idx]
        depth_here = level - 1
        f_nodes = [nid for nid in levels.get(depth_here, [])
                   if f.nodes[nid].kind == MUL]
        f_nodes.sort(key=lambda nid: (-len(f.nodes[nid].children), nid))
        items: List[object] = list(f_nodes) + [_CHAIN] * chains_in
        used_slots: set = set()
        used_plus: set = set()  # add positions below, across all groups
        pending: List[Tuple[object, int]] = []  # (item, slot index)

        def try_items(i: int, min_chain_slot: int) -> bool:
            if i == len(items):
                return commit()
            item = items[i]
            need = 1 if item is _CHAIN else len(f.nodes[item].children)
            floor = min_chain_slot if item is _CHAIN else 0
            cands = []
            for si, (j, lo, hi) in enumerate(layout.mul_slots):
                if si in used_slots or si < floor:
                    continue
                if hi - lo < need:
                    continue
                if any(p in used_plus for p in range(lo, hi)):
                    continue
                cands.append((hi - lo, si))
            cands.sort()
            for _, si in cands:
                _, lo, hi = layout.mul_slots[si]
                used_slots.add(si)
                used_plus.update(range(lo, hi))
                pending.append((item, si))
                nxt = si + 1 if item is _CHAIN else min_chain_slot
                if try_items(i + 1, nxt):
                    return True
                pending.pop()
                used_slots.discard(si)
                used_plus.difference_update(range(lo, hi))
            return False

        def commit() -> bool:
            new_chains = 0
            snapshot = (dict(mul_slot_of), dict(plus_slot_of),
                        {k: list(v) for k, v in chain_plus.items()},
                        dict(chain_feed))
            above_level = level - 1  # add level fed by this mul level
            below_level = level + 1  # add level this mul level multiplies
            chain_plus.setdefault(above_level, [])
            for item, si in pending:
                _, lo, hi = layout.mul_slots[si]
                if item is _CHAIN:
                    # hook one waiting chain slot at the add level above
                    waiting = [p for p in chain_plus[above_level]
                               if (above_level, p) not in chain_feed]
                    chain_feed[(above_level, waiting[0])] = si
                    slack = range(lo, hi)
                else:
                    mul_slot_of[item] = si
                    kids = [cid for cid, _ in f.nodes[item].children]
                    for off, cid in enumerate(kids):
                        plus_slot_of[cid] = lo + off
                    slack = range(lo + len(kids), hi)
                for p in slack:
                    chain_plus.setdefault(below_level, []).append(p)
                    new_chains += 1
            if pack(level_idx + 1, new_chains):
                return True
            ms, ps, cp, cf = snapshot
            mul_slot_of.clear(); mul_slot_of.update(ms)
            plus_slot_of.clear(); plus_slot_of.update(ps)
            chain_plus.clear(); chain_plus.update(cp)
            chain_feed.clear(); chain_feed.update(cf)
            return False

        return try_items(0, 0)

    if not pack(0, 0):
        raise DoesNotFit("mul nodes cannot be packed into the slot groups")

    # read the gating values off the placement
    values: Dict[str, int] = {}
    leaf_index = {v: i for i, v in enumerate(layout.var_names)}
    const_index = len(layout.var_names)
    scale: Dict[int, int] = {f.output: 1}
    q = layout.field.q
    for d in sorted(levels):
        for nid in levels[d]:
            node = f.nodes[nid]
            if node.kind == MUL:
                # block wiring is fixed with unit labels, so each child
                # add node absorbs its incoming edge label
                for cid, lab in node.children:
                    if not isinstance(lab, int):
                        raise DoesNotFit("variable edge label inside f")
                    scale[cid] = lab
                continue
            if node.kind != ADD:
                continue
            level = d + 1
            p = plus_slot_of[nid]
            sigma = scale.get(nid, 1)
            for cid, lab in node.children:
                if not isinstance(lab, int):
                    raise DoesNotFit("variable edge label inside f")
                child = f.nodes[cid]
                if child.kind == MUL:
                    c = mul_slot_of[cid]
                elif child.kind == IN:
                    c = leaf_index[child.name]
                else:
                    c = const_index
                    lab = lab * child.value
                key = layout.edge_var(level, p, c)
                values[key] = (values.get(key, 0) + sigma * lab) % q
    # constant-1 chains: unit edge to the feeding mul slot or the 1 leaf
    for add_level, slots in chain_plus.items():
        for pslot in slots:
            feed = chain_feed.get((add_level, pslot))
            if feed is None:
                # only the deepest add level may hang directly off a leaf
                assert add_level == layout.depth
                key = layout.edge_var(add_level, pslot, const_index)
            else:
                key = layout.edge_var(add_level, pslot, feed)
            values[key] = 1

    elem = layout.field.elem
    out = {name: elem(0) for name in layout.edge_vars()}
    for name, v in values.items():
        out[name] = elem(v)
    return out
