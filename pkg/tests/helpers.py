"""Shared generators for randomized tests."""

from ipsforge.circuit import MUL, CircuitBuilder


def random_circuit(rng, field, n_vars=3, n_internal=8, max_fanin=3,
                   p_mul=0.5, p_label=0.3, var_prefix="x"):
    """Random layered-ish DAG ending at the last internal node built."""
    b = CircuitBuilder(field, dedup=bool(rng.getrandbits(1)))
    pool = [b.input(f"{var_prefix}{i + 1}") for i in range(n_vars)]
    pool.append(b.const(rng.randrange(field.q)))
    for _ in range(n_internal):
        k = rng.randint(1, max_fanin)
        kids = []
        for _ in range(k):
            cid = rng.choice(pool)
            if field.q > 2 and rng.random() < p_label:
                kids.append((cid, rng.randrange(1, field.q)))
            else:
                kids.append(cid)
        nid = b.mul(*kids) if rng.random() < p_mul else b.add(*kids)
        pool.append(nid)
    return b.build(pool[-1])


def random_point(rng, field, names):
    return {v: rng.randrange(field.q) for v in names}


def random_normal_tree(rng, field, n_vars, leaf_depth, max_width,
                       max_mul_fanin, var_prefix="x"):
    """Random tree already in normal depth form.

    Kinds alternate add/mul from the add root; every leaf sits at
    leaf_depth (odd); each add keeps fan-out width manageable and each
    mul takes at most max_mul_fanin children.
    """
    assert leaf_depth % 2 == 1
    b = CircuitBuilder(field, dedup=False)

    def leaf():
        if rng.random() < 0.25:
            return b.const(rng.randrange(field.q))
        return b.input(f"{var_prefix}{rng.randint(1, n_vars)}")

    def label():
        if field.q > 2 and rng.random() < 0.4:
            return rng.randrange(1, field.q)
        return 1

    def grow(depth):
        # node at this depth; add on even depths, mul on odd
        if depth % 2 == 0:
            width = rng.randint(1, max_width)
            kids = []
            for _ in range(width):
                if depth + 1 == leaf_depth:
                    kids.append((leaf(), label()))
                else:
                    kids.append((grow(depth + 1), label()))
            return b.add(*kids)
        width = rng.randint(1, max_mul_fanin)
        kids = [(grow(depth + 1), label()) for _ in range(width)]
        return b.mul(*kids)

    return b.build(grow(0))


def random_exact_fit_tree(rng, layout, field=None):
    """Random normal tree guaranteed to embed into the layout.

    Mul nodes are drawn as pairwise-disjoint slot blocks with fan-in
    equal to the block size, so a packing exists by construction.
    """
    field = field or layout.field
    q = field.q
    b = CircuitBuilder(field, dedup=False)

    def lab():
        if q > 2 and rng.random() < 0.4:
            return rng.randrange(1, q)
        return 1

    def leaf():
        if rng.random() < 0.3:
            return {"kind": "const", "value": rng.randrange(q)}
        return {"kind": "in", "name":
                f"{rng.choice(layout.var_names)}"}

    root = {"kind": "add", "kids": []}
    adds = [root]
    for _ in layout.mul_levels:
        slots = list(layout.mul_slots)
        rng.shuffle(slots)
        taken = set()
        muls = []
        for j, lo, hi in slots:
            if rng.random() < 0.45:
                continue
            if any(p in taken for p in range(lo, hi)):
                continue
            taken.update(range(lo, hi))
            muls.append(hi - lo)
        new_adds = []
        if adds:
            for fanin in muls:
                moms = [a for a in adds]
                mom = rng.choice(moms)
                kids = [{"kind": "add", "kids": []} for _ in range(fanin)]
                mom["kids"].append(
                    ({"kind": "mul",
                      "kids": [(k, lab()) for k in kids]}, lab()))
                new_adds.extend(kids)
        adds = new_adds
    for a in adds:
        for _ in range(rng.randint(1, 3)):
            a["kids"].append((leaf(), lab()))

    def emit(node):
        if node["kind"] == "in":
            return b.input(node["name"])
        if node["kind"] == "const":
            return b.const(node["value"])
        kids = [(emit(ch), l) for ch, l in node["kids"]]
        return b.add(*kids) if node["kind"] == "add" else b.mul(*kids)

    return b.build(emit(root))


def brute_models(n_vars, clauses):
    """All satisfying 0/1 vectors of a clause list, by exhaustion."""
    out = []
    for m in range(1 << n_vars):
        vals = [(m >> i) & 1 for i in range(n_vars)]
        ok = True
        for cl in clauses:
            if not any(vals[abs(l) - 1] == (1 if l > 0 else 0) for l in cl):
                ok = False
                break
        if ok:
            out.append(vals)
    return out
