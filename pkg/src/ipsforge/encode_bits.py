"""Bit-vector CNF encodings of circuit arithmetic over prime fields.

Every field element travels as a little-endian vector of k Boolean
variables with 2^(k-1) < q < 2^k.  Ripple-defined carry bits give an
addition gadget; a two-stage modular gadget folds one extra high bit
back into range using precomputed tables; addition and multiplication
of field values compose these, and whole circuits are chained gate by
gate exactly like the unary encoder but at O(k^3) clauses per binary
step.  The extended form algebraizes the clauses and ties each vector
to a field-valued variable through its binary value.
"""

import itertools
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .circuit import ADD, CONST, IN, Circuit, CircuitBuilder, desugar_labels
from .encode_fixed import CnfFormula, EquationSystem, algebraize_cnf
from .errors import (BudgetExceeded, FieldMismatch, FormatError, Unsupported,
                     WidthMismatch)
from .ffield import is_prime

DEFAULT_CLAUSE_BUDGET = 2_000_000

Bit = Union[str, int]  # a variable name, or a constant 0/1

_RESERVED_INPUT = re.compile(
    r"n\d+.*|val_.*|b_.*|carry_.*|s_.*|u_.*|v_.*|m_.*|w_.*")


def width_for(q: int) -> int:
    """Vector width k with 2^(k-1) < q < 2^k."""
    if q < 3 or not is_prime(q):
        raise Unsupported(f"q={q} is not an odd prime")
    if q >= 1 << 63:
        raise Unsupported(f"q={q} exceeds the 64-bit budget")
    return q.bit_length()


@dataclass(frozen=True)
class BitVec:
    """Little-endian bit vector; entries are var names or 0/1 constants."""

    bits: Tuple[Bit, ...]

    @property
    def width(self) -> int:
        return len(self.bits)

    @classmethod
    def fresh(cls, cnf: CnfFormula, prefix: str, k: int) -> "BitVec":
        names = tuple(f"b_{prefix}_{i}" for i in range(k))
        for n in names:
            cnf.var(n)
        return cls(names)

    @classmethod
    def const(cls, value: int, k: int) -> "BitVec":
        if not 0 <= value < (1 << k):
            raise WidthMismatch(f"{value} does not fit in {k} bits")
        return cls(tuple((value >> i) & 1 for i in range(k)))

    def const_value(self) -> Optional[int]:
        if any(isinstance(b, str) for b in self.bits):
            return None
        return sum(b << i for i, b in enumerate(self.bits))

    def value_in(self, cnf: CnfFormula, model: Sequence[int]) -> int:
        total = 0
        for i, b in enumerate(self.bits):
            v = b if isinstance(b, int) else model[cnf.index_of(b) - 1]
            total += v << i
        return total

    def low(self, k: int) -> "BitVec":
        return BitVec(self.bits[:k])


# ---------------------------------------------------------------------------
# Boolean formulas and arithmetization

BTRUE = ("const", 1)
BFALSE = ("const", 0)


def bvar(name: str):
    return ("var", name)


def bnot(f):
    return ("not", f)


def _fold(tag, fs):
    if not fs:
        raise FormatError(f"{tag} needs at least one operand")
    out = fs[0]
    for g in fs[1:]:
        out = (tag, out, g)
    return out


def band(*fs):
    return _fold("and", fs)


def bor(*fs):
    return _fold("or", fs)


def bxor(f, g):
    return ("xor", f, g)


def beval(f, assignment: Dict[str, int]) -> int:
    tag = f[0]
    if tag == "const":
        return f[1]
    if tag == "var":
        return 1 if assignment[f[1]] else 0
    if tag == "not":
        return 1 - beval(f[1], assignment)
    a, b = beval(f[1], assignment), beval(f[2], assignment)
    if tag == "and":
        return a & b
    if tag == "or":
        return a | b
    if tag == "xor":
        return a ^ b
    raise FormatError(f"unknown connective {tag!r}")


def arit(f, field) -> Circuit:
    """Polynomial agreeing with the Boolean formula on 0-1 points.

    and -> product, or -> 1-(1-a)(1-b), xor -> a+b-2ab, not -> 1-a.
    """
    q = field.q
    b = CircuitBuilder(field)

    def one_minus(nid):
        return b.add((b.const(1), 1), (nid, q - 1))

    def go(e):
        tag = e[0]
        if tag == "const":
            return b.const(e[1])
        if tag == "var":
            return b.input(e[1])
        if tag == "not":
            return one_minus(go(e[1]))
        lhs, rhs = go(e[1]), go(e[2])
        if tag == "and":
            return b.mul((lhs, 1), (rhs, 1))
        if tag == "or":
            return one_minus(b.mul((one_minus(lhs), 1), (one_minus(rhs), 1)))
        if tag == "xor":
            return b.add((lhs, 1), (rhs, 1),
                         (b.mul((lhs, 1), (rhs, 1)), (q - 2) % q))
        raise FormatError(f"unknown connective {tag!r}")

    return b.build(go(f))


# ---------------------------------------------------------------------------
# truth-table defined bits

TableFn = Callable[[Tuple[int, ...]], int]


def _maj3(t):
    return 1 if t[0] + t[1] + t[2] >= 2 else 0


def _xor3(t):
    return (t[0] + t[1] + t[2]) & 1


def _and2(t):
    return t[0] & t[1]


def _define_bit(cnf: CnfFormula, name: str, table: TableFn,
                args: Sequence[Bit]) -> Bit:
    """Constrain a fresh bit to a truth table of (possibly constant) bits.

    One clause per row over the variable arguments; all-constant rows
    fold away, and a table that is constant over its reachable rows
    folds to that constant without spending a variable.
    """
    var_pos = [i for i, a in enumerate(args) if isinstance(a, str)]
    rows = []
    for choice in itertools.product((0, 1), repeat=len(var_pos)):
        full = list(args)
        for p, v in zip(var_pos, choice):
            full[p] = v
        rows.append((choice, table(tuple(full))))
    values = {res for _, res in rows}
    if len(values) == 1:
        return values.pop()
    out = cnf.var(name)
    for choice, res in rows:
        lits = []
        for p, v in zip(var_pos, choice):
            idx = cnf.var(args[p])
            lits.append(-idx if v else idx)
        lits.append(out if res else -out)
        cnf.add_clause(lits)
    return name


def _connect(cnf: CnfFormula, a: BitVec, z: BitVec) -> None:
    """Bitwise equality: two binary clauses per variable pair."""
    if a.width != z.width:
        raise WidthMismatch(f"widths {a.width} and {z.width} differ")
    for p, s in zip(a.bits, z.bits):
        if isinstance(p, int) and isinstance(s, int):
            if p != s:
                cnf.add_contradiction()
        elif isinstance(p, int):
            cnf.add_clause([cnf.var(s) if p else -cnf.var(s)])
        elif isinstance(s, int):
            cnf.add_clause([cnf.var(p) if s else -cnf.var(p)])
        else:
            pi, si = cnf.var(p), cnf.var(s)
            cnf.add_clause([-pi, si])
            cnf.add_clause([pi, -si])


def _le_const(cnf: CnfFormula, x: BitVec, c: int) -> None:
    """Clauses forcing VAL(x) <= c for a constant c."""
    k = x.width
    for i in range(k):
        if (c >> i) & 1:
            continue
        lits = []
        if isinstance(x.bits[i], int):
            if x.bits[i] == 0:
                continue
        else:
            lits.append(-cnf.var(x.bits[i]))
        ok = False
        for j in range(i + 1, k):
            if (c >> j) & 1:
                bj = x.bits[j]
                if isinstance(bj, int):
                    if bj == 0:
                        ok = True
                        break
                else:
                    lits.append(-cnf.var(bj))
        if ok:
            continue
        if lits:
            cnf.add_clause(lits)
        else:
            cnf.add_contradiction()


# ---------------------------------------------------------------------------
# gadgets


def _addition(cnf: CnfFormula, x: BitVec, y: BitVec, ctx: str,
              with_overflow: bool = True, out_prefix: str = "b") -> BitVec:
    if x.width != y.width:
        raise WidthMismatch(f"widths {x.width} and {y.width} differ")
    k = x.width
    carry: Bit = 0
    out: List[Bit] = []
    for i in range(k):
        out.append(_define_bit(cnf, f"{out_prefix}_{ctx}_{i}", _xor3,
                               (x.bits[i], y.bits[i], carry)))
        if i < k - 1 or with_overflow:
            carry = _define_bit(cnf, f"carry_{ctx}_{i + 1}", _maj3,
                                (x.bits[i], y.bits[i], carry))
    if with_overflow:
        out.append(carry)
    return BitVec(tuple(out))


def addition_gadget(x: BitVec, y: BitVec, with_overflow: bool = True,
                    ctx: str = "add") -> Tuple[CnfFormula, BitVec]:
    """Integer sum of two equal-width vectors; one extra bit on top
    unless overflow is dropped."""
    cnf = CnfFormula()
    for b in (*x.bits, *y.bits):
        if isinstance(b, str):
            cnf.var(b)
    return cnf, _addition(cnf, x, y, ctx, with_overflow)


def _ftable(a: int, b: int, c: int) -> TableFn:
    return lambda t: (0, b, a, c)[2 * t[0] + t[1]]


def _modular(cnf: CnfFormula, x: BitVec, xprime: Bit, t: int, q: int,
             ctx: str) -> Tuple[BitVec, BitVec]:
    """Fold bit 2^t into a k-bit vector mod q; returns (output, u-vector).

    Output value is congruent to VAL(x) + 2^t*xprime and stays below
    2^k; the intermediate sum u stays below 2q.
    """
    k = width_for(q)
    if x.width != k:
        raise WidthMismatch(f"vector width {x.width}, field wants {k}")
    if t < k:
        raise FormatError(f"bit position {t} below width {k}")
    abits = BitVec.const(pow(2, t, q), k)
    bbits = BitVec.const(pow(2, k - 1, q), k)
    cbits = BitVec.const((pow(2, t, q) + pow(2, k - 1, q)) % q, k)
    top = x.bits[k - 1]
    m = BitVec(tuple(
        _define_bit(cnf, f"m_{ctx}_{i}",
                    _ftable(abits.bits[i], bbits.bits[i], cbits.bits[i]),
                    (xprime, top))
        for i in range(k)))
    lowx = BitVec(x.bits[:k - 1] + (0,))
    u = _addition(cnf, lowx, m, ctx, out_prefix="u")
    dbits = BitVec.const(pow(2, k, q), k)
    w = BitVec(tuple(
        _define_bit(cnf, f"w_{ctx}_{i}",
                    lambda t_, d=dbits.bits[i]: d if t_[0] else 0,
                    (u.bits[k],))
        for i in range(k)))
    out = _addition(cnf, u.low(k), w, f"{ctx}o", with_overflow=False)
    return out, u


def modular_gadget(x: BitVec, xprime: Bit, t: int, q: int,
                   ctx: str = "mod") -> Tuple[CnfFormula, BitVec]:
    """Reduce VAL(x) + 2^t*xprime into a width-k vector mod q."""
    cnf = CnfFormula()
    for b in (*x.bits, xprime):
        if isinstance(b, str):
            cnf.var(b)
    out, _ = _modular(cnf, x, xprime, t, q, ctx)
    return cnf, out


def _cnf_add(cnf: CnfFormula, x: BitVec, y: BitVec, z: BitVec, q: int,
             ctx: str) -> None:
    k = width_for(q)
    for v in (x, y, z):
        if v.width != k:
            raise WidthMismatch(f"vector width {v.width}, field wants {k}")
    added = _addition(cnf, x, y, f"{ctx}a")
    out, _ = _modular(cnf, added.low(k), added.bits[k], k, q, f"{ctx}m")
    _connect(cnf, out, z)


def _cnf_mult(cnf: CnfFormula, x: BitVec, y: BitVec, z: BitVec, q: int,
              ctx: str) -> None:
    k = width_for(q)
    for v in (x, y, z):
        if v.width != k:
            raise WidthMismatch(f"vector width {v.width}, field wants {k}")
    # partial products: row i holds 2^i * y_i * x, bits s_{i,j} = x_{j-i} y_i
    rows: List[List[Bit]] = []
    for i in range(k):
        row: List[Bit] = [0] * i
        for j in range(i, i + k):
            row.append(_define_bit(cnf, f"s_{ctx}_{i}_{j}", _and2,
                                   (x.bits[j - i], y.bits[i])))
        rows.append(row)
    # fold every bit above position k-1 back into range, one at a time
    reduced: List[BitVec] = [BitVec(tuple(rows[0]))]
    for i in range(1, k):
        cur = BitVec(tuple(rows[i][:k]))
        for j in range(k, i + k):
            cur, _ = _modular(cnf, cur, rows[i][j], j, q, f"{ctx}r{i}t{j}")
        reduced.append(cur)
    # field additions of the reduced rows, then connect the total
    acc = reduced[0]
    for i in range(1, k):
        nxt = BitVec(tuple(f"v_{ctx}_{i}_{j}" for j in range(k)))
        for b in nxt.bits:
            cnf.var(b)
        _cnf_add(cnf, acc, reduced[i], nxt, q, f"{ctx}p{i}")
        acc = nxt
    _connect(cnf, acc, z)


def cnf_add(x: BitVec, y: BitVec, z: BitVec, q: int,
            ctx: str = "e") -> CnfFormula:
    """Clauses forcing VAL(z) to represent VAL(x) + VAL(y) mod q."""
    cnf = CnfFormula()
    for v in (x, y, z):
        for b in v.bits:
            if isinstance(b, str):
                cnf.var(b)
    _cnf_add(cnf, x, y, z, q, ctx)
    return cnf


def cnf_mult(x: BitVec, y: BitVec, z: BitVec, q: int,
             ctx: str = "e") -> CnfFormula:
    """Clauses forcing VAL(z) to represent VAL(x) * VAL(y) mod q."""
    cnf = CnfFormula()
    for v in (x, y, z):
        for b in v.bits:
            if isinstance(b, str):
                cnf.var(b)
    _cnf_mult(cnf, x, y, z, q, ctx)
    return cnf


# ---------------------------------------------------------------------------
# whole circuits


Step = Tuple[str, str, Union[str, int], Union[str, int]]


@dataclass
class BitsEncoding:
    """Bit-vector CNF of a circuit plus per-node bookkeeping."""

    cnf: CnfFormula
    q: int
    k: int
    inputs: Tuple[str, ...]
    node_keys: List[str]
    chain_keys: List[str]
    vec: Dict[str, BitVec]
    key_circuit: Dict[str, Circuit]
    out_vec: BitVec
    steps: List[Step]                  # (key, op, lhs, rhs) per binary step
    out_key: Union[str, int, None]     # key / input name / constant behind
                                       # the output vector
    result_key: Optional[str] = None   # set by the equation encoder


def _bits_encoding(c: Circuit, q: Optional[int], clause_budget: int,
                   key_prefix: str = "",
                   allow_reencode: bool = False) -> BitsEncoding:
    if q is None:
        q = c.q
    elif q != c.q:
        raise FieldMismatch(f"circuit over F{c.q}, encoding asked for F{q}")
    k = width_for(q)
    src = desugar_labels(c, all_labels=True)
    if allow_reencode:
        # inputs that are themselves prior encoding output are fine: the
        # deterministic naming makes bit variables for a shared input the
        # same variables, which is exactly the intended coupling.  Only a
        # clash with this round's fresh gate namespace would capture.
        if not key_prefix:
            raise FormatError("re-encoding needs a fresh key prefix")
        marker = f"{key_prefix}n"
        for name in src.inputs():
            if marker in name:
                raise FormatError(
                    f"input name {name} collides with gate keys {marker}*")
    else:
        reserved = _RESERVED_INPUT if not key_prefix else re.compile(
            rf"{_RESERVED_INPUT.pattern}|{re.escape(key_prefix)}n\d+.*")
        for name in src.inputs():
            if reserved.fullmatch(name):
                raise FormatError(
                    f"input name {name} is reserved for encoding")
    cnf = CnfFormula()
    vec: Dict[str, BitVec] = {}
    key_circuit: Dict[str, Circuit] = {}
    node_keys: List[str] = []
    chain_keys: List[str] = []
    steps: List[Step] = []
    ref: Dict[int, BitVec] = {}
    order = src.reachable()
    pos = {nid: i for i, nid in enumerate(order)}

    def check_budget():
        if len(cnf.clauses) > clause_budget:
            raise BudgetExceeded(
                f"{len(cnf.clauses)} clauses exceed budget {clause_budget}")

    def circuit_of(key_or_const) -> Circuit:
        b = CircuitBuilder(src.field)
        if isinstance(key_or_const, int):
            return b.build(b.const(key_or_const))
        return key_circuit[key_or_const]

    def emit_step(op, xsrc, ysrc, zkey: str) -> BitVec:
        zv = BitVec.fresh(cnf, zkey, k)
        vec[zkey] = zv
        xv = xsrc if isinstance(xsrc, BitVec) else BitVec.const(xsrc, k)
        yv = ysrc if isinstance(ysrc, BitVec) else BitVec.const(ysrc, k)
        if op == ADD:
            _cnf_add(cnf, xv, yv, zv, q, zkey)
        else:
            _cnf_mult(cnf, xv, yv, zv, q, zkey)
        check_budget()
        return zv

    srccache: Dict[int, object] = {}

    def src_of(nid):
        return srccache[nid]

    for nid in order:
        node = src.nodes[nid]
        if node.kind == IN:
            key = node.name
            if key not in vec:
                vec[key] = BitVec.fresh(cnf, key, k)
                _le_const(cnf, vec[key], q - 1)
                b = CircuitBuilder(src.field)
                key_circuit[key] = b.build(b.input(key))
            ref[nid] = vec[key]
            srccache[nid] = key
        elif node.kind == CONST:
            ref[nid] = BitVec.const(node.value, k)
            srccache[nid] = node.value
        else:
            key = f"{key_prefix}n{pos[nid]}"
            node_keys.append(key)
            op = node.kind
            kids = [(ref[cid], src_of(cid)) for cid, _ in node.children]
            ident = 0 if op == ADD else 1

            def mkcirc(zkey, asrc, bsrc):
                steps.append((zkey, op, asrc, bsrc))
                bld = CircuitBuilder(src.field)
                lhs = bld.splice(circuit_of(asrc))
                rhs = bld.splice(circuit_of(bsrc))
                mk = bld.add if op == ADD else bld.mul
                key_circuit[zkey] = bld.build(mk((lhs, 1), (rhs, 1)))

            if not kids:
                ref[nid] = emit_step(op, ident, ident, key)
                mkcirc(key, ident, ident)
            elif len(kids) == 1:
                ref[nid] = emit_step(op, kids[0][0], ident, key)
                mkcirc(key, kids[0][1], ident)
            else:
                acc, accsrc = kids[0]
                for i, (nv, nsrc) in enumerate(kids[1:], start=1):
                    zkey = key if i == len(kids) - 1 else f"{key}v{i}"
                    if zkey != key:
                        chain_keys.append(zkey)
                    if i == 1:
                        acc = emit_step(op, acc, nv, zkey)
                        mkcirc(zkey, accsrc, nsrc)
                    else:
                        acc = emit_step(op, nv, acc, zkey)
                        mkcirc(zkey, nsrc, accsrc)
                    accsrc = zkey
                ref[nid] = acc
            srccache[nid] = key
    return BitsEncoding(cnf=cnf, q=q, k=k, inputs=src.inputs(),
                        node_keys=node_keys, chain_keys=chain_keys,
                        vec=vec, key_circuit=key_circuit,
                        out_vec=ref[src.output], steps=steps,
                        out_key=srccache[src.output])


def bits_circuit_encoding(c: Circuit, q: Optional[int] = None,
                          clause_budget: int = DEFAULT_CLAUSE_BUDGET,
                          key_prefix: str = "",
                          allow_reencode: bool = False) -> BitsEncoding:
    """Encoding of the circuit alone; nothing pins the output value."""
    return _bits_encoding(c, q, clause_budget, key_prefix, allow_reencode)


def cnf_encode_circuit_bits(c: Circuit, q: Optional[int] = None,
                            clause_budget: int = DEFAULT_CLAUSE_BUDGET
                            ) -> CnfFormula:
    """Bit-vector CNF whose models correspond to evaluations of c."""
    return _bits_encoding(c, q, clause_budget).cnf


def bits_equation_encoding(c: Circuit, q: Optional[int] = None,
                           clause_budget: int = DEFAULT_CLAUSE_BUDGET,
                           key_prefix: str = "",
                           allow_reencode: bool = False) -> BitsEncoding:
    """Encoding of c = 0: the circuit clauses, a self-addition of q to
    the output vector, and unit connections pinning the sum to q's own
    representation (the only fixed points are the two residues of 0)."""
    enc = _bits_encoding(c, q, clause_budget, key_prefix, allow_reencode)
    q, k = enc.q, enc.k
    qvec = BitVec.const(q, k)
    cv = enc.out_vec.const_value()
    if cv is not None:
        if cv % q != 0:
            enc.cnf.add_contradiction()
        return enc
    reskey = f"{key_prefix}n{len(enc.node_keys) + len(enc.chain_keys)}z"
    res = BitVec.fresh(enc.cnf, reskey, k)
    enc.vec[reskey] = res
    _cnf_add(enc.cnf, enc.out_vec, qvec, res, q, reskey)
    _connect(enc.cnf, res, qvec)
    if len(enc.cnf.clauses) > clause_budget:
        raise BudgetExceeded(
            f"{len(enc.cnf.clauses)} clauses exceed budget {clause_budget}")
    enc.result_key = reskey
    return enc


def cnf_encode_equation_bits(c: Circuit, q: Optional[int] = None,
                             clause_budget: int = DEFAULT_CLAUSE_BUDGET,
                             key_prefix: str = "") -> CnfFormula:
    """Bit-vector CNF whose models correspond to the roots of c = 0."""
    return bits_equation_encoding(c, q, clause_budget, key_prefix).cnf


def ecnf_from_encoding(enc: BitsEncoding, field,
                       include_boolean: bool = True) -> EquationSystem:
    """Algebraized clauses of an encoding plus binary-value ties.

    Each node vector w gains an equation w_val = sum 2^i w_i (inputs tie
    their own variable); with include_boolean every Boolean variable
    also gets u^2 - u = 0.
    """
    q = field.q
    sys = algebraize_cnf(enc.cnf, field)
    for key, v in enc.vec.items():
        value_var = key if key in enc.inputs else f"val_{key}"
        b = CircuitBuilder(field)
        edges = [(b.input(value_var), 1)]
        const_part = 0
        for i, bit in enumerate(v.bits):
            coeff = (q - pow(2, i, q)) % q
            if isinstance(bit, int):
                const_part = (const_part + coeff * bit) % q
            else:
                edges.append((b.input(bit), coeff))
        if const_part:
            edges.append((b.const(const_part), 1))
        sys.append(b.build(b.add(*edges)))
    if include_boolean:
        for name in enc.cnf.names:
            b = CircuitBuilder(field)
            u = b.input(name)
            sys.append(b.build(b.add((b.mul((u, 1), (u, 1)), 1), (u, q - 1))))
    return sys


def ecnf_encode_equation_bits(c: Circuit, q: Optional[int] = None,
                              clause_budget: int = DEFAULT_CLAUSE_BUDGET,
                              key_prefix: str = "",
                              allow_reencode: bool = False) -> EquationSystem:
    """Algebraized bit-vector clauses of c = 0 plus binary-value ties.

    Each node vector w gains an equation w_val = sum 2^i w_i (inputs tie
    their own variable), and every Boolean variable gets u^2 - u = 0.
    """
    enc = bits_equation_encoding(c, q, clause_budget, key_prefix,
                                 allow_reencode)
    return ecnf_from_encoding(enc, c.field, include_boolean=True)


def ecnf_encode_circuit_bits(c: Circuit, q: Optional[int] = None,
                             clause_budget: int = DEFAULT_CLAUSE_BUDGET,
                             key_prefix: str = "",
                             include_boolean: bool = True) -> EquationSystem:
    """Algebraized circuit clauses plus binary-value ties, with no
    equation asserted on the output."""
    enc = _bits_encoding(c, q, clause_budget, key_prefix)
    return ecnf_from_encoding(enc, c.field, include_boolean)
