"""Constructors for the benchmark formula families.

Two kinds of family live here.  The coefficient-agreement families put a
gated universal layout on one side and a target polynomial on the other:
an assignment to the gating variables satisfies the system exactly when
the layout computes a polynomial whose coefficients match the target on
every monomial up to a degree bound.  Stacking two rounds of that idea
(the second universal layout ranges over candidate refutations of an
encoded version of the first system) yields the diagonal CNF and its
bit-vector variant with extension axioms.  The remaining families are
direct equation systems for matrix-rank, tensor-rank, and iterated
matrix-product principles.

Every constructor is deterministic: same arguments, byte-identical
output text.
"""

import itertools
import math
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .circuit import (DEFAULT_NODE_BUDGET, Circuit, CircuitBuilder,
                      fold_constants, normalize_depth_form)
from .coeffx import coeff_extract_bounded
from .encode_bits import (DEFAULT_CLAUSE_BUDGET, BitsEncoding,
                          bits_circuit_encoding, ecnf_encode_equation_bits,
                          ecnf_from_encoding, width_for)
from .encode_fixed import (CnfFormula, EquationSystem, PlainEncoding,
                           algebraize_cnf, cnf_encode_system_parts,
                           scnf_encode_equation)
from .errors import (BudgetExceeded, DimensionError, FieldMismatch,
                     FormatError, Unsupported)
from .ffield import FiniteField, ff_new
from .poly import (Monomial, SparsePoly, enumerate_monomials, matrix_var,
                   monomial_count, permanent_poly)
from .universal import UniversalLayout, build_universal

DEFAULT_MONOMIAL_BUDGET = 100_000
DEFAULT_EQUATION_BUDGET = 100_000

_PLACEHOLDER = re.compile(r"y\d+|z\d+")

GeneralDepth = Union[int, str, None]  # an int bound, or "general"/None


def degree_schedule(r: int, epsilon: float = 0.5) -> int:
    """Monotone degree bound ceil(r**epsilon) used when l is not given."""
    if r < 1:
        raise FormatError("degree schedule needs a positive size")
    if epsilon == 0.5:
        return 1 if r == 1 else math.isqrt(r - 1) + 1
    if epsilon <= 0:
        raise FormatError("schedule exponent must be positive")
    return math.ceil(r ** epsilon)


@dataclass(frozen=True)
class FormulaFamilyParams:
    """Validated parameter bundle for the diagonal families.

    l defaults to degree_schedule(n*n, epsilon).  The relations between
    t and the built formula size, and between s and n, are advisory:
    report() states them, nothing enforces them.
    """

    n: int
    s: int
    delta: int
    t: int
    delta_refute: int
    q: int
    l: Optional[int] = None
    encoding: str = "scnf"
    epsilon: float = 0.5
    monomial_budget: int = DEFAULT_MONOMIAL_BUDGET

    def __post_init__(self):
        for name in ("n", "s", "delta", "t", "delta_refute"):
            if getattr(self, name) < 1:
                raise FormatError(f"{name} must be positive")
        ff_new(self.q)
        if self.encoding not in ("cnf", "ecnf", "scnf", "bits"):
            raise FormatError(f"unknown encoding {self.encoding!r}")
        if self.l is not None and self.l < 0:
            raise FormatError("degree bound l must be non-negative")

    @property
    def degree_bound(self) -> int:
        if self.l is not None:
            return self.l
        return degree_schedule(self.n * self.n, self.epsilon)

    def monomial_total(self) -> int:
        """N, the number of constrained monomials; budget-enforced."""
        total = monomial_count(self.n * self.n, self.degree_bound)
        if total > self.monomial_budget:
            raise BudgetExceeded(
                f"{total} monomials exceed budget {self.monomial_budget}")
        return total

    def report(self, built_size: Optional[int] = None) -> List[str]:
        lines = [
            f"monomials N = {self.monomial_total()} "
            f"(n^2 = {self.n * self.n}, l = {self.degree_bound})",
        ]
        if self.n > 1:
            lines.append(
                f"advisory: s = n^{math.log(self.s) / math.log(self.n):.3f}")
        else:
            lines.append("advisory: s exponent undefined at n = 1")
        if built_size and built_size > 1:
            lines.append(
                f"advisory: t = size^"
                f"{math.log(self.t) / math.log(built_size):.3f}")
        else:
            lines.append("advisory: t exponent needs the built formula size")
        return lines


# ---------------------------------------------------------------------------
# coefficient-agreement families


@dataclass
class CoeffFamilyParts:
    """A coefficient-agreement system plus everything tests need."""

    system: EquationSystem
    universal: Circuit
    layout: UniversalLayout
    x_vars: Tuple[str, ...]
    monomials: List[Monomial]
    targets: List[int]


def _coeff_equations(u: Circuit, x_vars: Sequence[str], l: int,
                     target_of: Callable[[Monomial], int],
                     clear_vars: Sequence[str],
                     monomial_budget: int,
                     node_budget: int) -> Tuple[List[Circuit],
                                                List[Monomial], List[int]]:
    """One equation per monomial: extracted coefficient minus target.

    Equations are constant-folded, so they mention only the variables
    that actually survive extraction (the gating variables).
    """
    field = u.field
    q = field.q
    monos = enumerate_monomials(x_vars, l, budget=monomial_budget)
    eqs: List[Circuit] = []
    targets: List[int] = []
    for m in monos:
        d = coeff_extract_bounded(u, m, x_vars=clear_vars,
                                  degree_budget=max(l, 1),
                                  node_budget=node_budget)
        bi = target_of(m) % q
        if bi:
            b = CircuitBuilder(field)
            eq = b.build(b.add((b.splice(d), 1), (b.const(q - bi), 1)))
        else:
            eq = d
        eqs.append(fold_constants(eq))
        targets.append(bi)
    return eqs, monos, targets


def vnp_eq_vac0_parts(n: int, s: int, l: int, delta: int, q: int,
                      fanin: Optional[int] = None,
                      monomial_budget: int = DEFAULT_MONOMIAL_BUDGET,
                      node_budget: int = DEFAULT_NODE_BUDGET,
                      ) -> CoeffFamilyParts:
    """Permanent-agreement system with construction artifacts attached.

    Variables of the system are the gating variables of a universal
    layout over the n*n matrix variables; equation i asserts that the
    hosted polynomial's coefficient on the i-th monomial (graded-lex,
    degree <= l) equals the permanent's coefficient there.
    """
    if n < 1:
        raise FormatError("matrix order n must be positive")
    field = ff_new(q)
    x_vars = tuple(matrix_var(i, j)
                   for i in range(1, n + 1) for j in range(1, n + 1))
    if fanin is None:
        fanin = max(2, n)
    u, layout = build_universal(len(x_vars), s, delta, fanin, q=q,
                                var_names=x_vars)
    perm = permanent_poly(n, field)
    eqs, monos, targets = _coeff_equations(
        u, x_vars, l, lambda m: perm.coefficient(m).value, x_vars,
        monomial_budget, node_budget)
    return CoeffFamilyParts(EquationSystem(field, eqs), u, layout,
                            x_vars, monos, targets)


def gen_vnp_eq_vac0(n: int, s: int, l: int, delta: int, q: int,
                    **kw) -> EquationSystem:
    """Equations in the gating variables w-bar of a universal layout
    whose solutions are exactly the gatings that make the layout agree
    with the n-by-n permanent on every monomial of degree at most l."""
    return vnp_eq_vac0_parts(n, s, l, delta, q, **kw).system


def aub_parts(f: SparsePoly, s: int, l: int, delta: GeneralDepth, q: int,
              fanin: int = 2,
              monomial_budget: int = DEFAULT_MONOMIAL_BUDGET,
              node_budget: int = DEFAULT_NODE_BUDGET) -> CoeffFamilyParts:
    """Coefficient agreement against an explicitly given polynomial."""
    if delta is None or delta == "general":
        raise Unsupported(
            "the depth-unbounded layout is outside this artifact; "
            "pass an integer depth bound")
    if q != f.field.q:
        raise FieldMismatch(
            f"polynomial over F{f.field.q}, system asked for F{q}")
    if not f.vars:
        raise FormatError("register at least one variable on f")
    if f.degree() > l:
        raise FormatError(
            f"degree {f.degree()} target cannot agree below bound {l}")
    u, layout = build_universal(len(f.vars), s, delta, fanin, q=q,
                                var_names=f.vars)
    eqs, monos, targets = _coeff_equations(
        u, f.vars, l, lambda m: f.coefficient(m).value, f.vars,
        monomial_budget, node_budget)
    return CoeffFamilyParts(EquationSystem(f.field, eqs), u, layout,
                            f.vars, monos, targets)


def gen_aub(f: SparsePoly, s: int, l: int, delta: GeneralDepth,
            q: int, **kw) -> EquationSystem:
    """Satisfiable exactly when some gating of the universal layout
    matches every degree-<=l coefficient of the given polynomial."""
    return aub_parts(f, s, l, delta, q, **kw).system


# ---------------------------------------------------------------------------
# refutation-existence family


@dataclass
class IpsRefuteParts:
    """Refutation-existence system plus its construction artifacts."""

    system: EquationSystem
    universal: Circuit
    layout: UniversalLayout
    x_vars: Tuple[str, ...]
    placeholders: Tuple[str, ...]       # y<i>, one per axiom
    bool_placeholders: Tuple[str, ...]  # z<i>, one per variable if Boolean
    axioms: EquationSystem
    monomials: List[Monomial]
    zeroed: Circuit                     # layout with placeholders at 0
    substituted: Circuit                # layout with axioms spliced in
    targets: List[int]                  # 0-block then the unit-coefficient
                                        # block, aligned with system order


def _splice_ready(c: Circuit, node_budget: int) -> Circuit:
    """Rewrite an axiom so it can sit under an add node of the layout:
    normalize to an alternating tree, then wrap in a fan-in-1 mul."""
    n = normalize_depth_form(c, node_budget=node_budget)
    b = CircuitBuilder(c.field)
    return b.build(b.mul((b.splice(n), 1)))


def ips_refute_parts(t: int, delta: int, l: int, axioms: EquationSystem,
                     boolean: bool = False, q: Optional[int] = None,
                     fanin: int = 2,
                     monomial_budget: int = DEFAULT_MONOMIAL_BUDGET,
                     node_budget: int = DEFAULT_NODE_BUDGET,
                     ) -> IpsRefuteParts:
    """Refutation-existence system with construction artifacts attached.

    The universal layout hosts width-t, depth-delta circuits over the
    axiom variables x-bar plus one placeholder y<i> per axiom (and one
    z<i> per variable when boolean is set).  The equations, over the
    gating variables only, say: with every placeholder at 0 the hosted
    polynomial's coefficients vanish up to degree l, and with axiom i
    spliced into y<i> (and v^2 - v into z's) they all vanish too except
    the constant term, which is 1.  A solution is a hosted circuit
    turning the axioms into a certified contradiction.
    """
    field = axioms.field
    if q is not None and q != field.q:
        raise FieldMismatch(
            f"axioms over F{field.q}, system asked for F{q}")
    x_vars = axioms.all_vars()
    for v in x_vars:
        if _PLACEHOLDER.fullmatch(v):
            raise FormatError(
                f"axiom variable {v} sits in the placeholder namespace")
    y_names = tuple(f"y{j}" for j in range(1, len(axioms.equations) + 1))
    z_names = tuple(f"z{i}" for i in range(1, len(x_vars) + 1)) \
        if boolean else ()
    pads: Tuple[str, ...] = ()
    if not x_vars and not y_names and not z_names:
        pads = ("xpad0",)   # the layout needs at least one leaf variable
    var_names = x_vars + pads + y_names + z_names
    u, layout = build_universal(len(var_names), t, delta, fanin, q=field.q,
                                var_names=var_names, edge_prefix="wr")

    placeholders = y_names + z_names
    zeroed = u.restrict({p: 0 for p in placeholders})
    subs: Dict[str, Circuit] = {}
    for j, ax in enumerate(axioms.equations, start=1):
        subs[f"y{j}"] = _splice_ready(ax, node_budget)
    if boolean:
        for i, v in enumerate(x_vars, start=1):
            b = CircuitBuilder(field)
            x = b.input(v)
            sq = b.build(b.add((b.mul((x, 1), (x, 1)), 1), (x, field.q - 1)))
            subs[f"z{i}"] = _splice_ready(sq, node_budget)
    substituted = u.restrict(subs) if subs else u

    clear = x_vars + pads
    eqs_zero, monos, _ = _coeff_equations(
        zeroed, x_vars, l, lambda m: 0, clear, monomial_budget, node_budget)
    eqs_subst, _, targets_subst = _coeff_equations(
        substituted, x_vars, l, lambda m: 1 if not m.exponents else 0,
        clear, monomial_budget, node_budget)
    system = EquationSystem(field, eqs_zero + eqs_subst)
    return IpsRefuteParts(system, u, layout, x_vars, y_names, z_names,
                          axioms, monos, zeroed, substituted,
                          [0] * len(monos) + targets_subst)


def gen_ips_refute(t: int, delta: int, l: int, axioms: EquationSystem,
                   boolean: bool = False, q: Optional[int] = None,
                   **kw) -> EquationSystem:
    """Equations in fresh gating variables that are satisfiable exactly
    when some width-t depth-delta circuit maps the axiom polynomials to
    the constant 1 and the all-zero substitution to 0, coefficientwise
    up to degree l."""
    return ips_refute_parts(t, delta, l, axioms, boolean, q, **kw).system


# ---------------------------------------------------------------------------
# diagonal CNF


def _dedupe_equations(field: FiniteField,
                      groups: Sequence[EquationSystem]) -> EquationSystem:
    """Set-union of equation systems, first occurrence order."""
    seen: set = set()
    out = EquationSystem(field)
    for g in groups:
        for eq in g.equations:
            key = eq.to_text()
            if key not in seen:
                seen.add(key)
                out.append(eq)
    return out


@dataclass
class DiagPhiParts:
    """Diagonal CNF plus the intermediate artifacts and a census."""

    inner: CoeffFamilyParts
    axioms: EquationSystem
    refute: IpsRefuteParts
    encodings: List[PlainEncoding]
    cnf: CnfFormula
    stats: Dict[str, int]


def diag_phi_parts(t: int, l: int, delta_refute: int, n: int, s: int,
                   delta: int, q: int,
                   inner_encoding: str = "scnf",
                   fanin: int = 2,
                   inner_fanin: Optional[int] = None,
                   monomial_budget: int = DEFAULT_MONOMIAL_BUDGET,
                   node_budget: int = DEFAULT_NODE_BUDGET) -> DiagPhiParts:
    """Diagonal CNF pipeline with all intermediate stages attached.

    Stage 1 builds the permanent-agreement system at (n, s, l, delta).
    Stage 2 lowers it to polynomial equations over the original gating
    variables: the substituted one-hot encoding with its field axioms
    by default, or the algebraized plain CNF with inner_encoding="cnf".
    Stage 3 asks for a width-t depth-delta_refute refutation of those
    equations, and stage 4 writes that system as a single one-hot CNF.
    """
    inner = vnp_eq_vac0_parts(n, s, l, delta, q, fanin=inner_fanin,
                              monomial_budget=monomial_budget,
                              node_budget=node_budget)
    field = inner.system.field
    if inner_encoding == "scnf":
        axioms = _dedupe_equations(
            field, [scnf_encode_equation(eq) for eq in inner.system])
    elif inner_encoding == "cnf":
        inner_cnf, _ = cnf_encode_system_parts(inner.system)
        axioms = _dedupe_equations(field, [algebraize_cnf(inner_cnf, field)])
    else:
        raise FormatError(
            f"inner encoding must be scnf or cnf, not {inner_encoding!r}")
    refute = ips_refute_parts(t, delta_refute, l, axioms, boolean=False,
                              fanin=fanin, monomial_budget=monomial_budget,
                              node_budget=node_budget)
    cnf, encs = cnf_encode_system_parts(refute.system)
    gate_keys = sum(len(e.node_keys) + len(e.chain_keys) for e in encs)
    shared = len(refute.system.all_vars())
    stats = {
        "q": q,
        "inner_equations": len(inner.system),
        "inner_gating_vars": inner.layout.k,
        "axiom_count": len(axioms),
        "refute_monomials": len(refute.monomials),
        "refute_gating_vars": refute.layout.k,
        "equation_count": len(refute.system),
        "shared_input_vars": shared,
        "gate_keys": gate_keys,
        "cnf_vars": cnf.n_vars,
        "cnf_clauses": len(cnf.clauses),
    }
    return DiagPhiParts(inner, axioms, refute, encs, cnf, stats)


def gen_diag_phi(t: int, l: int, delta_refute: int, n: int, s: int,
                 delta: int, q: int, **kw) -> CnfFormula:
    """CNF that is satisfiable exactly when a width-t refutation exists
    for the encoded permanent-agreement equations at (n, s, l, delta)."""
    return diag_phi_parts(t, l, delta_refute, n, s, delta, q, **kw).cnf


# ---------------------------------------------------------------------------
# bit-vector diagonal system with extension axioms


@dataclass
class PhiStarParts:
    """Extension-axiom system plus per-group inventories."""

    inner: CoeffFamilyParts
    base: EquationSystem            # bit-vector extended CNF of the inner
                                    # system
    refute: IpsRefuteParts
    encodings: List[BitsEncoding]   # one circuit encoding per refutation
                                    # equation
    boolean_group: EquationSystem   # v^2 - v per Boolean variable
    gate_group: EquationSystem      # encodings' clauses + value ties
    slp_group: EquationSystem       # per-gate value equations, outputs
                                    # excluded
    system: EquationSystem
    stats: Dict[str, int]


def phi_star_parts(n: int, s: int, l: int, delta: int, q: int,
                   fanin: int = 2,
                   inner_fanin: Optional[int] = None,
                   monomial_budget: int = DEFAULT_MONOMIAL_BUDGET,
                   node_budget: int = DEFAULT_NODE_BUDGET,
                   clause_budget: int = DEFAULT_CLAUSE_BUDGET
                   ) -> PhiStarParts:
    """Bit-vector diagonal pipeline with all stages attached.

    The base is the bit-vector extended CNF of the permanent-agreement
    system.  On top of it come three groups keyed to the refutation
    system for the base at the same (s, delta, l): Boolean axioms for
    every bit variable of the refutation equations' circuit encodings,
    those encodings' algebraized clauses and value ties (with nothing
    pinning the output gates), and per-gate value equations of the same
    circuits minus the output gates' own equations.  The groups give a
    proof system enough footholds to reason about the refutation
    equations through their encodings.
    """
    width_for(q)
    inner = vnp_eq_vac0_parts(n, s, l, delta, q, fanin=inner_fanin,
                              monomial_budget=monomial_budget,
                              node_budget=node_budget)
    field = inner.system.field
    base = _dedupe_equations(field, [
        ecnf_encode_equation_bits(eq, clause_budget=clause_budget,
                                  key_prefix=f"e{i}_", allow_reencode=True)
        for i, eq in enumerate(inner.system, start=1)])
    refute = ips_refute_parts(s, delta, l, base, boolean=False,
                              fanin=fanin, monomial_budget=monomial_budget,
                              node_budget=node_budget)
    encs = [bits_circuit_encoding(eq, clause_budget=clause_budget,
                                  key_prefix=f"r{j}_", allow_reencode=True)
            for j, eq in enumerate(refute.system, start=1)]

    bool_names: List[str] = []
    seen_names: set = set()
    for enc in encs:
        for name in enc.cnf.names:
            if name not in seen_names:
                seen_names.add(name)
                bool_names.append(name)
    bool_eqs = []
    for v in bool_names:
        b = CircuitBuilder(field)
        x = b.input(v)
        bool_eqs.append(
            b.build(b.add((b.mul((x, 1), (x, 1)), 1), (x, field.q - 1))))
    boolean_group = EquationSystem(field, bool_eqs)

    gate_group = _dedupe_equations(field, [
        ecnf_from_encoding(enc, field, include_boolean=False)
        for enc in encs])

    slp_eqs: List[Circuit] = []
    for enc in encs:
        for zkey, op, lhs, rhs in enc.steps:
            if zkey == enc.out_key:
                continue   # the output gate's own equation stays out
            b = CircuitBuilder(field)

            def operand(src):
                if isinstance(src, int):
                    return b.const(src)
                if src in enc.inputs:
                    return b.input(src)
                return b.input(f"val_{src}")

            mk = b.add if op == "add" else b.mul
            combo = mk((operand(lhs), 1), (operand(rhs), 1))
            slp_eqs.append(b.build(
                b.add((combo, 1), (b.input(f"val_{zkey}"), field.q - 1))))
    slp_group = EquationSystem(field, slp_eqs)

    system = _dedupe_equations(
        field, [base, boolean_group, gate_group, slp_group])
    stats = {
        "q": q,
        "inner_equations": len(inner.system),
        "base_equations": len(base),
        "refute_equations": len(refute.system),
        "boolean_axioms": len(boolean_group),
        "gate_equations": len(gate_group),
        "slp_equations": len(slp_group),
        "total_equations": len(system),
    }
    return PhiStarParts(inner, base, refute, encs, boolean_group,
                        gate_group, slp_group, system, stats)


def gen_phi_star(n: int, s: int, l: int, delta: int, q: int,
                 **kw) -> EquationSystem:
    """Bit-vector extended CNF of the permanent-agreement system, plus
    Boolean, encoding, and per-gate value axioms for its own refutation
    system at the same width, depth, and degree parameters."""
    return phi_star_parts(n, s, l, delta, q, **kw).system


# ---------------------------------------------------------------------------
# rank principles


def _matrix_entry(a, i: int, j: int, m: int, q: int) -> int:
    try:
        v = a[i - 1][j - 1]
    except (IndexError, TypeError):
        raise FormatError(f"matrix needs {m} rows of {m} entries")
    return int(v) % q


def gen_rankp(m: int, n: int, a: Sequence[Sequence[int]],
              q: int) -> EquationSystem:
    """Equations saying the m-by-m matrix a factors through rank n.

    Variables are the entries of an m-by-n matrix (x<i>_<k>) and an
    n-by-m matrix (y<k>_<j>); equation (i, j), in row-major order, is
    sum_k x<i>_<k> * y<k>_<j> - a[i][j].  Unsatisfiable exactly when a
    has rank above n.
    """
    if n < 1 or m <= n:
        raise DimensionError(f"need m > n >= 1, got m={m}, n={n}")
    field = ff_new(q)
    if len(a) != m:
        raise FormatError(f"matrix needs {m} rows of {m} entries")
    eqs: List[Circuit] = []
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            entry = _matrix_entry(a, i, j, m, q)
            b = CircuitBuilder(field)
            edges = [(b.mul((b.input(f"x{i}_{k}"), 1),
                            (b.input(f"y{k}_{j}"), 1)), 1)
                     for k in range(1, n + 1)]
            if entry:
                edges.append((b.const(q - entry), 1))
            eqs.append(b.build(b.add(*edges)))
    return EquationSystem(field, eqs)


def _tensor_entry(a, idx: Tuple[int, ...], m: int, q: int) -> int:
    if a is None:
        return 0
    if isinstance(a, dict):
        return int(a.get(idx, 0)) % q
    v = a
    for i in idx:
        try:
            v = v[i - 1]
        except (IndexError, TypeError):
            raise FormatError(
                f"tensor needs nesting depth {len(idx)} with sides {m}")
    return int(v) % q


def gen_trankp(m: int, n: int, r: int, a, q: int) -> EquationSystem:
    """Equations bounding the tensor rank of an order-r side-m tensor.

    Variables x<j>_<i>_<k> (j in 1..r, i in 1..m, k in 1..n) are forced
    Boolean; entry equation (i_1..i_r), row-major, is
    sum_k prod_j x<j>_<i_j>_<k> - a[i_1]..[i_r].  With r = 2 the entry
    equations are the rank equations under y<k>_<j> = x2_<j>_<k>.

    a may be nested lists (row-major, r <= 3) or a dict from 1-based
    index tuples to entries; None means the zero tensor.
    """
    if n < 1 or m <= n:
        raise DimensionError(f"need m > n >= 1, got m={m}, n={n}")
    if r < 2:
        raise FormatError(f"tensor order r must be at least 2, got {r}")
    if r > 3 and not (a is None or isinstance(a, dict)):
        raise FormatError("pass entries as a sparse dict when r > 3")
    field = ff_new(q)
    eqs: List[Circuit] = []
    for idx in itertools.product(range(1, m + 1), repeat=r):
        entry = _tensor_entry(a, idx, m, q)
        b = CircuitBuilder(field)
        edges = []
        for k in range(1, n + 1):
            factors = [(b.input(f"x{j}_{idx[j - 1]}_{k}"), 1)
                       for j in range(1, r + 1)]
            edges.append((b.mul(*factors), 1))
        if entry:
            edges.append((b.const(q - entry), 1))
        eqs.append(b.build(b.add(*edges)))
    for j in range(1, r + 1):
        for i in range(1, m + 1):
            for k in range(1, n + 1):
                b = CircuitBuilder(field)
                x = b.input(f"x{j}_{i}_{k}")
                eqs.append(b.build(
                    b.add((b.mul((x, 1), (x, 1)), 1), (x, q - 1))))
    return EquationSystem(field, eqs)


def _digit_tag(pi: Tuple[int, ...]) -> str:
    return "".join(f"d{b}" for b in pi)


def gen_irankp(big_l: int, n: int, k: int, tensors=None,
               with_extension: bool = False, q: int = 2,
               equation_budget: int = DEFAULT_EQUATION_BUDGET
               ) -> EquationSystem:
    """Iterated product-consistency equations over digit strings.

    For every string pi of fewer than n digits base big_l there is an
    (big_l*k)-by-k variable matrix X^pi, and one k-by-(big_l*k) matrix
    Y; the consistency equations force X^pi * Y to be the side-by-side
    blocks [X^(pi,0) .. X^(pi,big_l-1)].  For full-length strings the
    product must instead equal the given square matrix tensors[pi]
    (missing or None entries mean zero).  with_extension adds one
    product-naming variable z per term of the consistency family.

    Variable names: x<tag>_<i>_<k> and z<tag>_<i>_<k>_<j> with tag the
    digit string rendered d<digit>..., and y<k>_<j>.
    """
    if big_l < 2 or n < 1 or k < 1:
        raise DimensionError(
            f"need alphabet >= 2 and positive n, k; "
            f"got {big_l}, {n}, {k}")
    side = big_l * k
    total = (big_l ** n) * side * side
    if total > equation_budget:
        raise BudgetExceeded(
            f"{total} entry equations exceed budget {equation_budget}")
    field = ff_new(q)
    if tensors is None:
        tensors = {}
    for pi in tensors:
        if len(pi) != n or any(not 0 <= d < big_l for d in pi):
            raise FormatError(
                f"tensor key {pi} is not an n-digit base-{big_l} string")

    def x_name(pi: Tuple[int, ...], i: int, col: int) -> str:
        return f"x{_digit_tag(pi)}_{i}_{col}"

    eqs: List[Circuit] = []
    short_pis = [pi for length in range(n)
                 for pi in itertools.product(range(big_l), repeat=length)]
    for pi in short_pis:
        for i in range(1, side + 1):
            for j in range(1, side + 1):
                digit = (j - 1) // k
                col = j - digit * k
                b = CircuitBuilder(field)
                edges = [(b.mul((b.input(x_name(pi, i, kk)), 1),
                                (b.input(f"y{kk}_{j}"), 1)), 1)
                         for kk in range(1, k + 1)]
                edges.append((b.input(x_name(pi + (digit,), i, col)), q - 1))
                eqs.append(b.build(b.add(*edges)))
    for pi in itertools.product(range(big_l), repeat=n):
        a = tensors.get(pi)
        for i in range(1, side + 1):
            for j in range(1, side + 1):
                entry = _matrix_entry(a, i, j, side, q) if a is not None \
                    else 0
                b = CircuitBuilder(field)
                edges = [(b.mul((b.input(x_name(pi, i, kk)), 1),
                                (b.input(f"y{kk}_{j}"), 1)), 1)
                         for kk in range(1, k + 1)]
                if entry:
                    edges.append((b.const(q - entry), 1))
                eqs.append(b.build(b.add(*edges)))
    if with_extension:
        for pi in short_pis:
            for i in range(1, side + 1):
                for kk in range(1, k + 1):
                    for j in range(1, side + 1):
                        b = CircuitBuilder(field)
                        z = b.input(f"z{_digit_tag(pi)}_{i}_{kk}_{j}")
                        prod = b.mul((b.input(x_name(pi, i, kk)), 1),
                                     (b.input(f"y{kk}_{j}"), 1))
                        eqs.append(b.build(b.add((z, 1), (prod, q - 1))))
    return EquationSystem(field, eqs)
