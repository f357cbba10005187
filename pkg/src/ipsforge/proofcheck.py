"""Certificate checking for algebraic proof systems, plus oracles.

An ideal-membership certificate is a circuit over the statement
variables x-bar and placeholder variables y-bar (one per axiom; plus
z-bar, one per variable, in Boolean mode).  It is accepted when two
formal identities hold: placeholders at zero give the zero polynomial,
and placeholders at the axioms (with z_i at x_i^2 - x_i) give the
target, which defaults to the constant 1 for refutations.

Line-based proofs (linear combinations and variable multiplications,
with or without twin variables) are re-derived step by step and can be
compiled into certificates.  Everything here is deterministic; the
randomized identity test takes an explicit seed.
"""

import itertools
import random
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

from . import _kernels
from .circuit import ADD, CONST, IN, Circuit, CircuitBuilder
from .encode_fixed import CnfFormula, EquationSystem
from .errors import (ArityMismatch, BadJustification, BudgetExceeded,
                     FieldMismatch, FormatError, IncompleteCaseCover)
from .ffield import FiniteField, ff_new
from .poly import DEFAULT_TERM_BUDGET, SparsePoly

SAT_VAR_LIMIT = 26
FIELDSAT_POINT_LIMIT = 10_000_000

_Y_VAR = re.compile(r"y(\d+)")
_Z_VAR = re.compile(r"z(\d+)")
_PLACEHOLDER = re.compile(r"[yz]\d+")


# ---------------------------------------------------------------------------
# registry-independent polynomial terms

TermKey = Tuple[Tuple[str, int], ...]


def _key_terms(p: SparsePoly) -> Dict[TermKey, int]:
    """Terms keyed by (variable, exponent) pairs, dropping the registry."""
    out: Dict[TermKey, int] = {}
    for exps, coeff in p.terms.items():
        key = tuple(sorted((v, e) for v, e in zip(p.vars, exps) if e))
        out[key] = coeff
    return out


def _poly_equal(a: SparsePoly, b: SparsePoly) -> bool:
    return a.field.q == b.field.q and _key_terms(a) == _key_terms(b)


def poly_to_circuit(p: SparsePoly) -> Circuit:
    """Depth-2 circuit (sum of labeled products) computing p."""
    b = CircuitBuilder(p.field)
    edges = []
    for exps in sorted(p.terms):
        coeff = p.terms[exps]
        factors = []
        for v, e in zip(p.vars, exps):
            factors.extend((b.input(v), 1) for _ in range(e))
        if factors:
            edges.append((b.mul(*factors), coeff))
        else:
            edges.append((b.const(coeff), 1))
    if not edges:
        return b.build(b.const(0))
    return b.build(b.add(*edges))


def _boolean_axiom(field: FiniteField, name: str) -> Circuit:
    b = CircuitBuilder(field)
    x = b.input(name)
    return b.build(b.add((b.mul((x, 1), (x, 1)), 1), (x, field.q - 1)))


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class Verdict:
    """Accept/Reject outcome with a human-readable reason."""

    accepted: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.accepted


@dataclass(frozen=True)
class ProofVerdict(Verdict):
    """Line-proof outcome with the degree and size measures."""

    degree: int = 0
    size: int = 0


# ---------------------------------------------------------------------------
# ideal-membership certificates


@dataclass
class IpsCertificate:
    """Certificate circuit, the axioms it refutes, target, and mode.

    The circuit lives over the axiom variables plus placeholders y<i>
    (one per axiom) and, in boolean mode, z<i> (one per axiom variable,
    in the axiom system's first-appearance order).
    """

    circuit: Circuit
    axioms: EquationSystem
    target: Optional[SparsePoly] = None
    mode: str = "boolean"

    def __post_init__(self):
        if self.mode not in ("boolean", "algebraic"):
            raise FormatError(f"unknown mode {self.mode!r}")
        field = self.axioms.field
        if self.circuit.q != field.q:
            raise FieldMismatch(
                f"certificate over F{self.circuit.q}, axioms over F{field.q}")
        if self.target is None:
            self.target = SparsePoly.const(field, (), 1)
        elif self.target.field.q != field.q:
            raise FieldMismatch("target polynomial over the wrong field")
        for v in self.axioms.all_vars():
            if _PLACEHOLDER.fullmatch(v):
                raise FormatError(
                    f"axiom variable {v} sits in the placeholder namespace")
        m = len(self.axioms.equations)
        n = len(self.axioms.all_vars())
        for v in self.circuit.all_vars():
            ym = _Y_VAR.fullmatch(v)
            if ym and not 1 <= int(ym.group(1)) <= m:
                raise ArityMismatch(
                    f"{v} has no matching axiom (there are {m})")
            zm = _Z_VAR.fullmatch(v)
            if zm:
                if self.mode != "boolean":
                    raise ArityMismatch(
                        f"{v} needs boolean mode")
                if not 1 <= int(zm.group(1)) <= n:
                    raise ArityMismatch(
                        f"{v} has no matching variable (there are {n})")

    # -- the two sides of the contract ---------------------------------

    def placeholder_names(self) -> Tuple[str, ...]:
        return tuple(v for v in self.circuit.all_vars()
                     if _PLACEHOLDER.fullmatch(v))

    def zeroed(self) -> Circuit:
        """Certificate with every placeholder set to 0."""
        return self.circuit.restrict(
            {v: 0 for v in self.placeholder_names()})

    def substituted(self) -> Circuit:
        """Certificate with axioms (and x^2 - x in boolean mode) spliced."""
        field = self.axioms.field
        x_vars = self.axioms.all_vars()
        subs: Dict[str, Circuit] = {}
        for v in self.placeholder_names():
            ym = _Y_VAR.fullmatch(v)
            if ym:
                subs[v] = self.axioms.equations[int(ym.group(1)) - 1]
            else:
                i = int(_Z_VAR.fullmatch(v).group(1))
                subs[v] = _boolean_axiom(field, x_vars[i - 1])
        return self.circuit.restrict(subs)

    def depth_report(self) -> Dict[str, int]:
        """Certificate depth as written and with axioms spliced in."""
        return {"raw": self.circuit.depth(),
                "spliced": self.substituted().depth()}

    # -- text form ------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"ipscert q={self.axioms.field.q} mode={self.mode} "
                 f"naxioms={len(self.axioms.equations)}",
                 f"target: {self.target.to_text()}",
                 self.circuit.to_text().rstrip("\n")]
        for i, ax in enumerate(self.axioms.equations, start=1):
            lines.append(f"axiom {i}")
            lines.append(ax.to_text().rstrip("\n"))
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "IpsCertificate":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("ipscert "):
            raise FormatError("expected an ipscert header")
        head = dict(kv.split("=", 1) for kv in lines[0].split()[1:])
        try:
            q = int(head["q"])
            naxioms = int(head["naxioms"])
            mode = head["mode"]
        except (KeyError, ValueError):
            raise FormatError(f"bad ipscert header {lines[0]!r}")
        field = ff_new(q)
        if len(lines) < 2 or not lines[1].startswith("target: "):
            raise FormatError("expected a target line")
        target = SparsePoly.parse(lines[1][len("target: "):], field)
        blocks: List[List[str]] = [[]]
        marks: List[int] = []
        for ln in lines[2:]:
            m = re.fullmatch(r"axiom (\d+)", ln.strip())
            if m:
                marks.append(int(m.group(1)))
                blocks.append([])
            else:
                blocks[-1].append(ln)
        if marks != list(range(1, naxioms + 1)):
            raise FormatError(
                f"expected axiom markers 1..{naxioms}, got {marks}")
        circuit = Circuit.parse("\n".join(blocks[0]))
        axioms = EquationSystem(
            field, [Circuit.parse("\n".join(b)) for b in blocks[1:]])
        return cls(circuit, axioms, target, mode)


# ---------------------------------------------------------------------------
# extension fields for the randomized identity test


class _ExtField:
    """Arithmetic in F_q[t]/(mod) with elements as coefficient tuples."""

    def __init__(self, q: int, e: int):
        self.q = q
        self.e = e
        self.zero = (0,) * e
        self.one = (1,) + (0,) * (e - 1)
        self.mod = self._irreducible() if e > 1 else ()

    def _irreducible(self) -> Tuple[int, ...]:
        # lowest monic degree-e polynomial with no factor of degree <= e/2
        q, e = self.q, self.e
        lower = [cs + (1,) + (0,) * (e - 1 - d)
                 for d in range(1, e // 2 + 1)
                 for cs in itertools.product(range(q), repeat=d)]

        def divides(d, f):
            # trial division of monic f (degree e) by monic d
            deg_d = max(i for i, c in enumerate(d) if c)
            rem = list(f)
            for top in range(e, deg_d - 1, -1):
                c = rem[top] % q
                if c:
                    for i in range(deg_d + 1):
                        rem[top - deg_d + i] = (
                            rem[top - deg_d + i] - c * d[i]) % q
            return not any(rem[:deg_d])

        for cs in itertools.product(range(q), repeat=e):
            f = cs + (1,)
            if f[0] == 0:
                continue
            if not any(divides(d, f) for d in lower):
                return cs   # coefficients of t^0..t^{e-1}; leading 1 implied
        raise FormatError(f"no irreducible polynomial found for q={q} e={e}")

    def from_int(self, v: int) -> Tuple[int, ...]:
        return (v % self.q,) + (0,) * (self.e - 1)

    def add(self, a, b):
        return tuple((x + y) % self.q for x, y in zip(a, b))

    def mul(self, a, b):
        q, e = self.q, self.e
        if e == 1:
            return ((a[0] * b[0]) % q,)
        prod = [0] * (2 * e - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] = (prod[i + j] + x * y) % q
        for top in range(2 * e - 2, e - 1, -1):
            c = prod[top]
            if c:
                prod[top] = 0
                for i, mc in enumerate(self.mod):
                    prod[top - e + i] = (prod[top - e + i] - c * mc) % q
        return tuple(prod[:e])

    def scale(self, a, c: int):
        c %= self.q
        return tuple((x * c) % self.q for x in a)

    def pow(self, a, n: int):
        out = self.one
        base = a
        while n:
            if n & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            n >>= 1
        return out

    def random(self, rng: random.Random):
        return tuple(rng.randrange(self.q) for _ in range(self.e))


def _eval_circuit_ring(c: Circuit, assign: Dict[str, tuple],
                       ring: _ExtField):
    vals: Dict[int, tuple] = {}
    for nid in c.reachable():
        node = c.nodes[nid]
        if node.kind == IN:
            vals[nid] = assign[node.name]
        elif node.kind == CONST:
            vals[nid] = ring.from_int(node.value)
        else:
            parts = []
            for cid, lab in node.children:
                v = vals[cid]
                if isinstance(lab, str):
                    v = ring.mul(v, assign[lab])
                elif lab != 1:
                    v = ring.scale(v, lab)
                parts.append(v)
            acc = parts[0]
            for v in parts[1:]:
                acc = ring.add(acc, v) if node.kind == ADD \
                    else ring.mul(acc, v)
            vals[nid] = acc
    return vals[c.output]


def _eval_poly_ring(p: SparsePoly, assign: Dict[str, tuple],
                    ring: _ExtField):
    acc = ring.zero
    for exps, coeff in p.terms.items():
        term = ring.from_int(coeff)
        for v, e in zip(p.vars, exps):
            if e:
                term = ring.mul(term, ring.pow(assign[v], e))
        acc = ring.add(acc, term)
    return acc


def _extension_degree(q: int, sdeg: int) -> int:
    e = 1
    while q ** e < 2 * max(sdeg, 1):
        e += 1
    return e


def check_ips(cert: IpsCertificate, method: str = "exact",
              trials: int = 20, extension_degree: Optional[int] = None,
              seed: int = 0,
              term_budget: int = DEFAULT_TERM_BUDGET,
              trace: Optional[Dict[str, object]] = None) -> Verdict:
    """Accept iff both certificate identities hold.

    exact expands both sides (budget-guarded); pit compares evaluations
    at `trials` random points, drawn from an extension field big enough
    for the degree when the base field is too small.  pit rejections
    are definitive; pit acceptance has one-sided error.  A trace dict,
    when given, collects per-trial residuals under pit.
    """
    zeroed = cert.zeroed()
    substituted = cert.substituted()
    if method == "exact":
        z = zeroed.expand(term_budget)
        if not z.is_zero():
            return Verdict(False, "placeholders at zero leave "
                                  f"{len(z.terms)} terms")
        s = substituted.expand(term_budget)
        if not _poly_equal(s, cert.target):
            return Verdict(False, "substituted certificate misses target")
        return Verdict(True, "both identities expand correctly")
    if method != "pit":
        raise FormatError(f"unknown method {method!r}")

    q = cert.axioms.field.q
    sdeg = max(zeroed.syntactic_degree(), substituted.syntactic_degree(),
               cert.target.degree())
    e = extension_degree or _extension_degree(q, sdeg)
    ring = _ExtField(q, e)
    rng = random.Random(seed)
    names = sorted(set(zeroed.all_vars()) | set(substituted.all_vars())
                   | set(cert.target.vars))
    if trace is not None:
        trace["extension_degree"] = e
        trace["residuals"] = []
    for t in range(trials):
        assign = {v: ring.random(rng) for v in names}
        zero_res = _eval_circuit_ring(zeroed, assign, ring)
        got = _eval_circuit_ring(substituted, assign, ring)
        want = _eval_poly_ring(cert.target, assign, ring)
        target_res = ring.add(got, ring.scale(want, q - 1))
        if trace is not None:
            trace["residuals"].append((zero_res, target_res))
        if zero_res != ring.zero:
            return Verdict(False, f"zero identity fails at trial {t + 1}")
        if got != want:
            return Verdict(False, f"target identity fails at trial {t + 1}")
    return Verdict(True, f"{trials} trials over degree-{e} extension agree")


# ---------------------------------------------------------------------------
# line-based proofs


@dataclass(frozen=True)
class Axiom:
    index: int


@dataclass(frozen=True)
class Boolean:
    var: str


@dataclass(frozen=True)
class LinComb:
    j: int
    k: int
    alpha: int
    beta: int


@dataclass(frozen=True)
class MulVar:
    j: int
    var: str


@dataclass(frozen=True)
class PcrTwin:
    var: str


Justification = Union[Axiom, Boolean, LinComb, MulVar, PcrTwin]


def twin_name(var: str) -> str:
    """Name of the twin variable standing for 1 - var."""
    return f"{var}_bar"


@dataclass
class PcProof:
    """Derivation lines with one justification each; last line = target."""

    lines: List[SparsePoly]
    justs: List[Justification]
    kind: str = "pc"

    def __post_init__(self):
        if len(self.lines) != len(self.justs):
            raise FormatError("one justification per line required")

    def to_text(self) -> str:
        if not self.lines:
            raise FormatError("empty proof")
        q = self.lines[0].field.q
        out = [f"pcproof q={q} nlines={len(self.lines)} kind={self.kind}"]
        for i, (p, j) in enumerate(zip(self.lines, self.justs), start=1):
            if isinstance(j, Axiom):
                head = f"axiom {j.index}"
            elif isinstance(j, Boolean):
                head = f"boolean {j.var}"
            elif isinstance(j, LinComb):
                head = f"lincomb {j.j} {j.k} {j.alpha} {j.beta}"
            elif isinstance(j, MulVar):
                head = f"mulvar {j.j} {j.var}"
            elif isinstance(j, PcrTwin):
                head = f"pcrtwin {j.var}"
            else:
                raise FormatError(f"unknown justification {j!r}")
            out.append(f"line {i} {head} : {p.to_text()}")
        return "\n".join(out) + "\n"

    @classmethod
    def parse(cls, text: str) -> "PcProof":
        rows = [ln for ln in text.splitlines() if ln.strip()]
        if not rows or not rows[0].startswith("pcproof "):
            raise FormatError("expected a pcproof header")
        head = dict(kv.split("=", 1) for kv in rows[0].split()[1:])
        try:
            field = ff_new(int(head["q"]))
            nlines = int(head["nlines"])
            kind = head.get("kind", "pc")
        except (KeyError, ValueError):
            raise FormatError(f"bad pcproof header {rows[0]!r}")
        if len(rows) - 1 != nlines:
            raise FormatError(f"expected {nlines} lines, got {len(rows) - 1}")
        lines: List[SparsePoly] = []
        justs: List[Justification] = []
        for i, row in enumerate(rows[1:], start=1):
            head_part, sep, poly_part = row.partition(" : ")
            if not sep:
                raise FormatError(f"line {i} misses the ' : ' separator")
            toks = head_part.split()
            if len(toks) < 3 or toks[0] != "line" or toks[1] != str(i):
                raise FormatError(f"bad line header {head_part!r}")
            tag, args = toks[2], toks[3:]
            try:
                if tag == "axiom":
                    justs.append(Axiom(int(args[0])))
                elif tag == "boolean":
                    justs.append(Boolean(args[0]))
                elif tag == "lincomb":
                    justs.append(LinComb(int(args[0]), int(args[1]),
                                         int(args[2]), int(args[3])))
                elif tag == "mulvar":
                    justs.append(MulVar(int(args[0]), args[1]))
                elif tag == "pcrtwin":
                    justs.append(PcrTwin(args[0]))
                else:
                    raise FormatError(f"unknown justification tag {tag!r}")
            except (IndexError, ValueError):
                raise FormatError(f"bad arguments in {head_part!r}")
            lines.append(SparsePoly.parse(poly_part, field))
        proof = cls(lines, justs, kind=kind)
        return PcrProof(lines, justs) if kind == "pcr" else proof


class PcrProof(PcProof):
    """Line proof that may use twin variables var_bar = 1 - var."""

    def __init__(self, lines, justs, kind="pcr"):
        super().__init__(lines, justs, kind="pcr")


def _axiom_polys(axioms) -> List[SparsePoly]:
    if isinstance(axioms, EquationSystem):
        return [eq.expand() for eq in axioms.equations]
    return list(axioms)


def _derived_terms(just: Justification, i: int, done: List[SparsePoly],
                   axioms: List[SparsePoly], q: int,
                   allow_twins: bool) -> Dict[TermKey, int]:
    """Term dict the justification derives for line i (1-based)."""
    def earlier(j: int) -> SparsePoly:
        if not 1 <= j < i:
            raise BadJustification(
                f"line {i} references line {j}, not an earlier line")
        return done[j - 1]

    if isinstance(just, Axiom):
        if not 1 <= just.index <= len(axioms):
            raise BadJustification(
                f"line {i} references axiom {just.index} of {len(axioms)}")
        return _key_terms(axioms[just.index - 1])
    if isinstance(just, Boolean):
        v = just.var
        return {((v, 2),): 1, ((v, 1),): q - 1}
    if isinstance(just, PcrTwin):
        if not allow_twins:
            raise BadJustification(
                f"line {i} uses a twin axiom outside a pcr proof")
        v = just.var
        return {((v, 1),): 1, ((twin_name(v), 1),): 1, (): q - 1}
    if isinstance(just, LinComb):
        out: Dict[TermKey, int] = {}
        for j, c in ((just.j, just.alpha), (just.k, just.beta)):
            for key, coeff in _key_terms(earlier(j)).items():
                out[key] = (out.get(key, 0) + c * coeff) % q
        return {k: c for k, c in out.items() if c}
    if isinstance(just, MulVar):
        out = {}
        for key, coeff in _key_terms(earlier(just.j)).items():
            exps = dict(key)
            exps[just.var] = exps.get(just.var, 0) + 1
            out[tuple(sorted(exps.items()))] = coeff
        return out
    raise BadJustification(f"unknown justification {just!r}")


def _check_lines(proof: PcProof, axioms, target: int,
                 allow_twins: bool) -> ProofVerdict:
    if not proof.lines:
        raise FormatError("empty proof")
    field = proof.lines[0].field
    q = field.q
    ax = _axiom_polys(axioms)
    if ax and ax[0].field.q != q:
        raise FieldMismatch("axioms and proof lines over different fields")
    degree = 0
    monomials: set = set()
    for i, (line, just) in enumerate(zip(proof.lines, proof.justs), start=1):
        got = _key_terms(line)
        want = _derived_terms(just, i, proof.lines, ax, q, allow_twins)
        if got != want:
            return ProofVerdict(
                False, f"line {i} does not match its justification",
                degree, len(monomials))
        degree = max(degree, line.degree())
        monomials.update(got)
    last = _key_terms(proof.lines[-1])
    expect = {(): target % q} if target % q else {}
    if last != expect:
        return ProofVerdict(False, f"last line is not the constant {target}",
                            degree, len(monomials))
    return ProofVerdict(True, "all lines re-derive", degree, len(monomials))


def check_pc(proof: PcProof, axioms, target: int = 1) -> ProofVerdict:
    """Re-derive every line; report max degree and distinct monomials."""
    return _check_lines(proof, axioms, target, allow_twins=False)


def check_pcr(proof: PcProof, axioms, target: int = 1) -> ProofVerdict:
    """check_pc with the twin axioms var + var_bar - 1 available."""
    return _check_lines(proof, axioms, target, allow_twins=True)


def pc_to_ips(proof: PcProof, axioms, target: int = 1) -> IpsCertificate:
    """Compile an accepted line proof into a certificate circuit.

    Axiom lines become y placeholders, Boolean lines z placeholders,
    linear combinations become labeled + nodes and variable products
    become x nodes, so the certificate mirrors the derivation tree.
    """
    verdict = check_pc(proof, axioms, target)
    if not verdict:
        raise BadJustification(f"proof does not check: {verdict.reason}")
    if isinstance(axioms, EquationSystem):
        sys = axioms
    else:
        sys = EquationSystem(proof.lines[0].field,
                             [poly_to_circuit(p) for p in axioms])
    x_vars = sys.all_vars()
    field = sys.field
    b = CircuitBuilder(field)
    nodes: List[int] = []
    for i, just in enumerate(proof.justs, start=1):
        if isinstance(just, Axiom):
            nodes.append(b.input(f"y{just.index}"))
        elif isinstance(just, Boolean):
            if just.var not in x_vars:
                raise BadJustification(
                    f"line {i}: {just.var} is not an axiom variable")
            nodes.append(b.input(f"z{x_vars.index(just.var) + 1}"))
        elif isinstance(just, LinComb):
            nodes.append(b.add((nodes[just.j - 1], just.alpha % field.q),
                               (nodes[just.k - 1], just.beta % field.q)))
        elif isinstance(just, MulVar):
            nodes.append(b.mul((b.input(just.var), 1),
                               (nodes[just.j - 1], 1)))
        else:
            raise BadJustification(
                "twin axioms have no placeholder; convert pcr lines first")
    circuit = b.build(nodes[-1])
    tgt = SparsePoly.const(field, (), target)
    return IpsCertificate(circuit, sys, tgt, mode="boolean")


# ---------------------------------------------------------------------------
# proof by boolean cases

Case = Tuple[Tuple[int, ...], Sequence[SparsePoly], Sequence[SparsePoly],
             Sequence[SparsePoly]]


def merge_boolean_cases(per_case: Sequence[Case],
                        variables: Sequence[str]
                        ) -> Tuple[List[SparsePoly], List[SparsePoly]]:
    """Eliminate the per-case selector terms from a family of witnesses.

    Each case is (alpha, G, L, Q) certifying, for its 0/1 prefix alpha
    on the first r of `variables`,
        sum G_i F_i + sum L_i (x_i - alpha_i) + sum Q_i (x_i^2 - x_i) = f.
    The cases must cover {0,1}^r exactly once.  Returns (G', Q') with
        sum G'_i F_i + sum Q'_i (x_i^2 - x_i) = f,
    still sums of terms: branches on x_1 combine as (1-x_1) G0 + x_1 G1,
    and the selector coefficients fold into Q'_1.
    """
    if not per_case:
        raise IncompleteCaseCover("no cases given")
    variables = tuple(variables)
    r = len(per_case[0][0])
    n = len(variables)
    if r > n:
        raise ArityMismatch(f"prefix length {r} exceeds {n} variables")
    m = len(per_case[0][1])
    cases: Dict[Tuple[int, ...], Tuple[List[SparsePoly], ...]] = {}
    for alpha, g, l, q in per_case:
        alpha = tuple(alpha)
        if len(alpha) != r or any(a not in (0, 1) for a in alpha):
            raise IncompleteCaseCover(f"bad assignment prefix {alpha}")
        if alpha in cases:
            raise IncompleteCaseCover(f"duplicate case {alpha}")
        if len(g) != m or len(l) != r or len(q) != n:
            raise ArityMismatch(
                f"case {alpha} needs {m} G, {r} L, {n} Q components")
        cases[alpha] = (list(g), list(l), list(q))
    if len(cases) != 1 << r:
        raise IncompleteCaseCover(
            f"{len(cases)} cases cannot cover the {1 << r} prefixes")

    sample = per_case[0][1][0] if m else per_case[0][3][0] if n else None
    if sample is None:
        raise ArityMismatch("cases carry no components at all")
    field, registry = sample.field, sample.vars

    def selector(name: str, value: int) -> SparsePoly:
        # the factor that vanishes when name != value: x or (1 - x)
        x = SparsePoly.variable(field, registry, name)
        return x if value else SparsePoly.const(field, registry, 1) - x

    def recurse(sub: Dict[Tuple[int, ...], tuple], depth: int
                ) -> Tuple[List[SparsePoly], List[SparsePoly]]:
        if not next(iter(sub)):
            g, l, q = sub[()]
            return list(g), list(q)
        x1 = variables[depth]
        branches = []
        for bit in (0, 1):
            picked = {}
            for alpha, (g, l, q) in sub.items():
                if alpha[0] != bit:
                    continue
                # move the selector coefficient in as one extra axiom
                extra = l[0] if bit == 0 else -l[0]
                picked[alpha[1:]] = (list(g) + [extra], l[1:], q)
            branches.append(recurse(picked, depth + 1))
        (g0, q0), (g1, q1) = branches
        keep0, m_extra = g0[:-1], g0[-1]
        keep1, n_extra = g1[:-1], g1[-1]
        lo, hi = selector(x1, 0), selector(x1, 1)
        g_merged = [lo * a + hi * b for a, b in zip(keep0, keep1)]
        q_merged = [lo * a + hi * b for a, b in zip(q0, q1)]
        # (1-x)*M*x and x*N*(1-x) both equal -(x^2-x) times the coefficient
        i1 = variables.index(x1)
        q_merged[i1] = q_merged[i1] - m_extra - n_extra
        return g_merged, q_merged

    return recurse(cases, 0)


# ---------------------------------------------------------------------------
# brute-force oracles


def sat_bruteforce(f: CnfFormula) -> Optional[Dict[str, int]]:
    """First satisfying assignment in variable-index order, or None."""
    if f.n_vars > SAT_VAR_LIMIT:
        raise BudgetExceeded(
            f"{f.n_vars} variables exceed the {SAT_VAR_LIMIT}-var sweep cap")
    model = _kernels.sat_first(f.n_vars,
                               [tuple(cl) for cl in f.clauses], ())
    if model is None:
        return None
    return {name: model[i] for i, name in enumerate(f.names)}


def fieldsat_bruteforce(sys: EquationSystem,
                        q: Optional[int] = None) -> Optional[Dict[str, int]]:
    """First common root in odometer order over all variables, or None."""
    field_q = sys.field.q
    if q is not None and q != field_q:
        raise FieldMismatch(f"system over F{field_q}, sweep asked for F{q}")
    names = sys.all_vars()
    if field_q ** len(names) > FIELDSAT_POINT_LIMIT:
        raise BudgetExceeded(
            f"{field_q}^{len(names)} points exceed the "
            f"{FIELDSAT_POINT_LIMIT}-point sweep cap")
    progs = []
    for eq in sys.equations:
        n_in, eq_names, consts, ops, starts, cs, cl = eq._flatten()
        idx = tuple(names.index(v) for v in eq_names)
        progs.append((n_in, idx, consts, ops, starts, cs, cl))
    for point in itertools.product(range(field_q), repeat=len(names)):
        ok = True
        for n_in, idx, consts, ops, starts, cs, cl in progs:
            sub = tuple(point[i] for i in idx)
            if _kernels.prog_eval(n_in, consts, ops, starts, cs, cl,
                                  sub, field_q):
                ok = False
                break
        if ok:
            return dict(zip(names, point))
    return None
