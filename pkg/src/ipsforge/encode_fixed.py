"""Propositional encodings of circuit equations over small prime fields.

A circuit equation C(x̄) = 0 over 𝔽_q becomes a CNF by giving every gate
q unary one-hot bits and constraining consecutive gates through the
operation's truth table; the extended form adds, per gate, an algebraic
variable tied to its bits, and the substituted form replaces each bit
with the one-hot indicator polynomial of the gate's subcircuit so only
the original field variables remain.  CNFs travel as DIMACS with a
comment block naming every variable; equation systems reuse the circuit
text format.
"""

import re
from dataclasses import dataclass
from io import StringIO
from typing import Dict, Iterable, List, Optional, Tuple

from .circuit import ADD, CONST, IN, Circuit, CircuitBuilder, desugar_labels
from .errors import FieldTooLargeForUnary, FormatError
from .ffield import FiniteField, ff_new, ubit_circuit

# one-hot encodings spend q variables and ~q^3 clauses per gate
UNARY_FIELD_CAP = 13

_RESERVED_INPUT = re.compile(r"u_.*|val_.*|n\d+(v\d+)?")
_DIMACS_NAME = re.compile(r"c var (\d+) = (\S+)\s*$")


class CnfFormula:
    """Clause list over named variables with 1-based DIMACS indices."""

    def __init__(self):
        self.names: List[str] = []
        self._index: Dict[str, int] = {}
        self.clauses: List[List[int]] = []

    @property
    def n_vars(self) -> int:
        return len(self.names)

    def var(self, name: str) -> int:
        """Index of the named variable, registering it on first use."""
        idx = self._index.get(name)
        if idx is None:
            self.names.append(name)
            idx = len(self.names)
            self._index[name] = idx
        return idx

    def name_of(self, index: int) -> str:
        return self.names[index - 1]

    def index_of(self, name: str) -> int:
        """Index of an already-registered variable."""
        idx = self._index.get(name)
        if idx is None:
            raise FormatError(f"no variable named {name}")
        return idx

    def add_clause(self, lits: Iterable[int]) -> None:
        cl = list(lits)
        if not cl:
            raise FormatError("empty clause; use add_contradiction")
        for lit in cl:
            if lit == 0 or abs(lit) > len(self.names):
                raise FormatError(f"literal {lit} names no variable")
        self.clauses.append(cl)

    def add_contradiction(self) -> None:
        self.clauses.append([])


class EquationSystem:
    """Circuits over one field, each asserted equal to zero."""

    def __init__(self, field, equations: Iterable[Circuit] = ()):
        self.field = field if isinstance(field, FiniteField) else ff_new(field)
        self.equations: List[Circuit] = []
        for eq in equations:
            self.append(eq)

    def append(self, eq: Circuit) -> None:
        if eq.q != self.field.q:
            raise FormatError(
                f"equation over F{eq.q} in a system over F{self.field.q}")
        self.equations.append(eq)

    def __len__(self) -> int:
        return len(self.equations)

    def __iter__(self):
        return iter(self.equations)

    def all_vars(self) -> Tuple[str, ...]:
        names: List[str] = []
        for eq in self.equations:
            for v in eq.all_vars():
                if v not in names:
                    names.append(v)
        return tuple(names)

    def satisfied_by(self, assignment: Dict[str, object]) -> bool:
        return all(eq.evaluate(assignment).value == 0 for eq in self.equations)

    def to_text(self) -> str:
        lines = [f"eqsystem q={self.field.q} neqs={len(self.equations)}"]
        for i, eq in enumerate(self.equations, start=1):
            lines.append(f"eq {i}")
            lines.append(eq.to_text().rstrip("\n"))
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "EquationSystem":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise FormatError("empty equation system")
        m = re.fullmatch(r"eqsystem q=(\d+) neqs=(\d+)", lines[0].strip())
        if not m:
            raise FormatError(f"bad header {lines[0]!r}")
        field = ff_new(int(m.group(1)))
        want = int(m.group(2))
        sys = cls(field)
        block: List[str] = []
        count = 0

        def flush():
            if block:
                sys.append(Circuit.parse("\n".join(block)))
                block.clear()

        for ln in lines[1:]:
            if re.fullmatch(r"eq \d+", ln.strip()):
                flush()
                count += 1
            else:
                block.append(ln)
        flush()
        if count != want or len(sys.equations) != want:
            raise FormatError(
                f"header counts {want} equations, found {len(sys.equations)}")
        return sys


def algebraize_cnf(f: CnfFormula, field) -> EquationSystem:
    """One product equation per clause; satisfying 0-1 points coincide.

    A clause's positive literals contribute (1 - x) factors and its
    negated ones contribute x factors; the product is kept as written,
    not multiplied out.
    """
    field = field if isinstance(field, FiniteField) else ff_new(field)
    eqs: List[Circuit] = []
    for cl in f.clauses:
        b = CircuitBuilder(field)
        factors = []
        for lit in cl:
            x = b.input(f.name_of(abs(lit)))
            if lit > 0:
                factors.append(b.add((b.const(1), 1), (x, field.q - 1)))
            else:
                factors.append(x)
        if not factors:
            root = b.const(1)
        elif len(factors) == 1:
            root = factors[0]
        else:
            root = b.mul(*[(fk, 1) for fk in factors])
        eqs.append(b.build(root))
    return EquationSystem(field, eqs)


# ---------------------------------------------------------------------------
# plain one-hot encoding

Ref = Tuple[str, object]  # ("bits", key) or ("const", value)


@dataclass
class PlainEncoding:
    """One-hot CNF of a circuit plus the bookkeeping other encoders need."""

    cnf: CnfFormula
    q: int
    inputs: Tuple[str, ...]
    node_keys: List[str]        # keys of circuit gates, traversal order
    chain_keys: List[str]       # keys of fan-in chaining steps
    key_circuit: Dict[str, Circuit]   # what each keyed value computes
    out_ref: Ref

    def bit_name(self, key: str, j: int) -> str:
        return f"u_{key}_{j}"

    def bit_owner(self, name: str) -> Tuple[str, int]:
        """Map a bit variable name back to (key, unary index)."""
        if not name.startswith("u_") or "_" not in name[2:]:
            raise FormatError(f"{name} is not a unary-bit name")
        key, _, j = name[2:].rpartition("_")
        return key, int(j)


def plain_encoding(c: Circuit, key_prefix: str = "") -> PlainEncoding:
    """One-hot clauses for a circuit: inputs select a field value, each
    gate is chained into binary steps, and every step's truth table is
    written as implication plus blocking clauses.  Gate one-hot-ness
    then follows from the inputs' explicit one-hot clauses.

    key_prefix prepends every gate key, so encodings of several circuits
    can share one variable namespace without their gate bits colliding.
    """
    q = c.q
    if q > UNARY_FIELD_CAP:
        raise FieldTooLargeForUnary(
            f"q={q} spends {q} unary bits per gate; cap is {UNARY_FIELD_CAP}")
    src = desugar_labels(c, all_labels=True)
    reserved = _RESERVED_INPUT if not key_prefix else re.compile(
        rf"{_RESERVED_INPUT.pattern}|{re.escape(key_prefix)}n\d+(v\d+)?")
    for name in src.inputs():
        if reserved.fullmatch(name):
            raise FormatError(f"input name {name} is reserved for encoding")
    cnf = CnfFormula()
    key_circuit: Dict[str, Circuit] = {}
    node_keys: List[str] = []
    chain_keys: List[str] = []
    ref: Dict[int, Ref] = {}
    order = src.reachable()
    pos = {nid: i for i, nid in enumerate(order)}

    def circuit_of(r: Ref) -> Circuit:
        if r[0] == "const":
            b = CircuitBuilder(src.field)
            return b.build(b.const(r[1]))
        return key_circuit[r[1]]

    def emit_step(op: str, xr: Ref, yr: Ref, zkey: str) -> Ref:
        zbits = [cnf.var(f"u_{zkey}_{j}") for j in range(q)]
        xopts = [(xr[1], [])] if xr[0] == "const" else \
            [(a, [-cnf.var(f"u_{xr[1]}_{a}")]) for a in range(q)]
        yopts = [(yr[1], [])] if yr[0] == "const" else \
            [(b_, [-cnf.var(f"u_{yr[1]}_{b_}")]) for b_ in range(q)]
        for a, alits in xopts:
            for b_, blits in yopts:
                rv = (a + b_) % q if op == ADD else (a * b_) % q
                cnf.add_clause(alits + blits + [zbits[rv]])
                for wrong in range(q):
                    if wrong != rv:
                        cnf.add_clause(alits + blits + [-zbits[wrong]])
        bld = CircuitBuilder(src.field)
        lhs = bld.splice(circuit_of(xr))
        rhs = bld.splice(circuit_of(yr))
        mk = bld.add if op == ADD else bld.mul
        key_circuit[zkey] = bld.build(mk((lhs, 1), (rhs, 1)))
        return ("bits", zkey)

    for nid in order:
        node = src.nodes[nid]
        if node.kind == IN:
            key = node.name
            if key not in key_circuit:
                bits = [cnf.var(f"u_{key}_{j}") for j in range(q)]
                cnf.add_clause(bits)
                for j in range(q):
                    for l in range(j + 1, q):
                        cnf.add_clause([-bits[j], -bits[l]])
                b = CircuitBuilder(src.field)
                key_circuit[key] = b.build(b.input(key))
            ref[nid] = ("bits", key)
        elif node.kind == CONST:
            ref[nid] = ("const", node.value)
        else:
            key = f"{key_prefix}n{pos[nid]}"
            node_keys.append(key)
            op = node.kind
            kids = [ref[cid] for cid, _ in node.children]
            ident: Ref = ("const", 0 if op == ADD else 1)
            if not kids:
                ref[nid] = emit_step(op, ident, ident, key)
            elif len(kids) == 1:
                ref[nid] = emit_step(op, kids[0], ident, key)
            else:
                acc = kids[0]
                for i, nxt in enumerate(kids[1:], start=1):
                    if i == len(kids) - 1:
                        zkey = key
                    else:
                        zkey = f"{key}v{i}"
                        chain_keys.append(zkey)
                    acc = emit_step(op, nxt, acc, zkey) if i > 1 \
                        else emit_step(op, acc, nxt, zkey)
                ref[nid] = acc
    return PlainEncoding(cnf=cnf, q=q, inputs=src.inputs(),
                         node_keys=node_keys, chain_keys=chain_keys,
                         key_circuit=key_circuit, out_ref=ref[src.output])


def cnf_encode_circuit(c: Circuit) -> CnfFormula:
    """One-hot CNF whose models correspond to evaluations of c."""
    return plain_encoding(c).cnf


def _force_zero(enc: PlainEncoding) -> None:
    if enc.out_ref[0] == "const":
        if enc.out_ref[1] != 0:
            enc.cnf.add_contradiction()
        return
    key = enc.out_ref[1]
    enc.cnf.add_clause([enc.cnf.var(f"u_{key}_0")])
    for i in range(1, enc.q):
        enc.cnf.add_clause([-enc.cnf.var(f"u_{key}_{i}")])


def cnf_encode_equation(c: Circuit) -> CnfFormula:
    """One-hot CNF whose models correspond to the roots of c = 0."""
    enc = plain_encoding(c)
    _force_zero(enc)
    return enc.cnf


_SYSTEM_KEY = re.compile(r"e\d+_n\d+(v\d+)?")


def cnf_encode_system_parts(
        sys: EquationSystem) -> Tuple[CnfFormula, List[PlainEncoding]]:
    """One CNF for a whole equation system, plus per-equation encodings.

    Equation i is encoded with gate keys e<i>_n<pos>, so gate bits never
    collide across equations, while input variables keep their own names
    and therefore share one-hot bits.  Clauses repeated verbatim (the
    shared inputs' one-hot blocks) are emitted once.
    """
    for v in sys.all_vars():
        if _SYSTEM_KEY.fullmatch(v):
            raise FormatError(
                f"variable {v} collides with per-equation gate keys")
    out = CnfFormula()
    encs: List[PlainEncoding] = []
    seen: set = set()
    for i, eq in enumerate(sys.equations, start=1):
        enc = plain_encoding(eq, key_prefix=f"e{i}_")
        _force_zero(enc)
        encs.append(enc)
        for cl in enc.cnf.clauses:
            mapped = tuple((1 if lit > 0 else -1)
                           * out.var(enc.cnf.name_of(abs(lit)))
                           for lit in cl)
            if mapped in seen:
                continue
            seen.add(mapped)
            if mapped:
                out.add_clause(list(mapped))
            else:
                out.add_contradiction()
    return out, encs


def cnf_encode_system(sys: EquationSystem) -> CnfFormula:
    """One-hot CNF whose models are the common roots of all equations."""
    return cnf_encode_system_parts(sys)[0]


def ecnf_encode_equation(c: Circuit) -> EquationSystem:
    """Algebraized one-hot clauses, plus per-gate value variables.

    Every clause of cnf(c = 0) becomes a product equation; each circuit
    gate g gains the tie x_g = sum_i i*u_g_i (inputs tie their own
    variable), and every bit gets a Boolean axiom u^2 - u = 0, so models
    over the field match models over {0,1} and gate values are readable
    off any solution.
    """
    enc = plain_encoding(c)
    _force_zero(enc)
    field = c.field
    q = field.q
    sys = algebraize_cnf(enc.cnf, field)
    for key in list(enc.inputs) + enc.node_keys:
        value_var = key if key in enc.inputs else f"val_{key}"
        b = CircuitBuilder(field)
        edges = [(b.input(value_var), 1)]
        edges += [(b.input(f"u_{key}_{i}"), (q - i) % q) for i in range(1, q)]
        sys.append(b.build(b.add(*edges)))
    for name in enc.cnf.names:
        b = CircuitBuilder(field)
        u = b.input(name)
        sys.append(b.build(b.add((b.mul((u, 1), (u, 1)), 1), (u, q - 1))))
    return sys


def scnf_encode_equation(c: Circuit) -> EquationSystem:
    """Substituted one-hot encoding over the original variables only.

    Each unary bit u_g_j in the algebraized clauses of cnf(c = 0) is
    replaced by the one-hot indicator polynomial of j applied to the
    subcircuit that gate g computes; a field axiom x^q - x = 0 joins for
    every original variable.
    """
    enc = plain_encoding(c)
    _force_zero(enc)
    field = c.field
    q = field.q
    indicator: Dict[Tuple[str, int], Circuit] = {}

    def ubit_of(key: str, j: int) -> Circuit:
        if (key, j) not in indicator:
            indicator[(key, j)] = ubit_circuit(j, enc.key_circuit[key])
        return indicator[(key, j)]

    eqs: List[Circuit] = []
    for cl in enc.cnf.clauses:
        b = CircuitBuilder(field)
        factors = []
        for lit in cl:
            key, j = enc.bit_owner(enc.cnf.name_of(abs(lit)))
            ub = b.splice(ubit_of(key, j))
            if lit > 0:
                factors.append(b.add((b.const(1), 1), (ub, q - 1)))
            else:
                factors.append(ub)
        if not factors:
            root = b.const(1)
        elif len(factors) == 1:
            root = factors[0]
        else:
            root = b.mul(*[(fk, 1) for fk in factors])
        eqs.append(b.build(root))
    for name in enc.inputs:
        b = CircuitBuilder(field)
        x = b.input(name)
        power = b.mul(*[(x, 1)] * q)
        eqs.append(b.build(b.add((power, 1), (x, q - 1))))
    return EquationSystem(field, eqs)


# ---------------------------------------------------------------------------
# DIMACS


def emit_dimacs(f: CnfFormula, out) -> None:
    """Write standard DIMACS, with `c var <i> = <name>` for every variable."""
    for i, name in enumerate(f.names, start=1):
        out.write(f"c var {i} = {name}\n")
    out.write(f"p cnf {f.n_vars} {len(f.clauses)}\n")
    for cl in f.clauses:
        if cl:
            out.write(" ".join(str(lit) for lit in cl) + " 0\n")
        else:
            out.write("0\n")


def dimacs_text(f: CnfFormula) -> str:
    buf = StringIO()
    emit_dimacs(f, buf)
    return buf.getvalue()


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS; named comment lines restore the variable registry."""
    f = CnfFormula()
    named: Dict[int, str] = {}
    header: Optional[Tuple[int, int]] = None
    lits: List[int] = []
    clauses: List[List[int]] = []
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln:
            continue
        if ln.startswith("c"):
            m = _DIMACS_NAME.match(ln)
            if m:
                named[int(m.group(1))] = m.group(2)
            continue
        if ln.startswith("p"):
            parts = ln.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise FormatError(f"bad problem line {ln!r}")
            header = (int(parts[2]), int(parts[3]))
            continue
        if header is None:
            raise FormatError("clause before problem line")
        for tok in ln.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(lits)
                lits = []
            else:
                lits.append(lit)
    if lits:
        raise FormatError("unterminated clause")
    if header is None:
        raise FormatError("missing problem line")
    n_vars, n_clauses = header
    for i in range(1, n_vars + 1):
        f.var(named.get(i, f"v{i}"))
    for cl in clauses:
        if cl:
            f.add_clause(cl)
        else:
            f.add_contradiction()
    if len(f.clauses) != n_clauses:
        raise FormatError(
            f"header counts {n_clauses} clauses, found {len(f.clauses)}")
    return f
