"""Exact sparse multivariate polynomials over a prime field.

SparsePoly is the ground-truth representation every oracle reduces to:
a map from exponent tuples (one slot per registered variable) to nonzero
coefficients. Term order everywhere is graded lexicographic: lower total
degree first, ties broken by exponent vector with the first registered
variable most significant (so x1^2 precedes x1*x2 precedes x2^2).
"""

from __future__ import annotations

import math
import re
from itertools import permutations, product
from typing import Dict, Iterable, List, Sequence, Tuple

from ipsforge import _kernels
from ipsforge.errors import (ExpansionBudgetExceeded, FieldMismatch,
                             FormatError, MissingAssignment)
from ipsforge.ffield import FieldElem, FiniteField

DEFAULT_TERM_BUDGET = 10 ** 6

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def grlex_key(exps: Tuple[int, ...]) -> tuple:
    """Sort key realizing the graded-lexicographic order described above."""
    return (sum(exps), tuple(-e for e in exps))


class SparsePoly:
    """Polynomial over a fixed field and a fixed variable tuple."""

    __slots__ = ("field", "vars", "terms")

    def __init__(self, field: FiniteField, vars: Sequence[str],
                 terms: Dict[Tuple[int, ...], int]):
        self.field = field
        self.vars = tuple(vars)
        self.terms = terms

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, field: FiniteField, vars: Sequence[str]) -> "SparsePoly":
        return cls(field, vars, {})

    @classmethod
    def const(cls, field: FiniteField, vars: Sequence[str],
              value) -> "SparsePoly":
        v = int(value.value if isinstance(value, FieldElem) else value)
        v %= field.q
        vars = tuple(vars)
        if v == 0:
            return cls(field, vars, {})
        return cls(field, vars, {(0,) * len(vars): v})

    @classmethod
    def variable(cls, field: FiniteField, vars: Sequence[str],
                 name: str) -> "SparsePoly":
        vars = tuple(vars)
        i = vars.index(name)
        e = [0] * len(vars)
        e[i] = 1
        return cls(field, vars, {tuple(e): 1})

    # -- ring operations ----------------------------------------------

    def _check(self, other: "SparsePoly") -> None:
        if self.field.q != other.field.q:
            raise FieldMismatch("polynomials over different fields")
        if self.vars != other.vars:
            raise FieldMismatch(
                f"variable registries differ: {self.vars} vs {other.vars}")

    def _lift(self, other):
        if isinstance(other, SparsePoly):
            return other
        if isinstance(other, (int, FieldElem)):
            return SparsePoly.const(self.field, self.vars, other)
        return None

    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        self._check(other)
        out = dict(self.terms)
        _kernels.poly_addmul(out, other.terms, 1, self.field.q)
        return SparsePoly(self.field, self.vars, out)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        self._check(other)
        out = dict(self.terms)
        _kernels.poly_addmul(out, other.terms, self.field.q - 1, self.field.q)
        return SparsePoly(self.field, self.vars, out)

    def __rsub__(self, other):
        lifted = self._lift(other)
        if lifted is None:
            return NotImplemented
        return lifted - self

    def __neg__(self):
        return SparsePoly(
            self.field, self.vars,
            {e: self.field.q - c for e, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, FieldElem)):
            return self.scale(other)
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.mul(other)

    def __rmul__(self, other):
        if isinstance(other, (int, FieldElem)):
            return self.scale(other)
        return NotImplemented

    def mul(self, other: "SparsePoly",
            budget: int = DEFAULT_TERM_BUDGET) -> "SparsePoly":
        self._check(other)
        if len(self.terms) * len(other.terms) > budget * 8:
            raise ExpansionBudgetExceeded(
                f"product of {len(self.terms)} x {len(other.terms)} terms")
        try:
            out = _kernels.poly_mul(self.terms, other.terms,
                                    self.field.q, budget)
        except MemoryError as exc:
            raise ExpansionBudgetExceeded(str(exc)) from None
        return SparsePoly(self.field, self.vars, out)

    def scale(self, c) -> "SparsePoly":
        v = int(c.value if isinstance(c, FieldElem) else c) % self.field.q
        if v == 0:
            return SparsePoly.zero(self.field, self.vars)
        return SparsePoly(
            self.field, self.vars,
            {e: co * v % self.field.q for e, co in self.terms.items()})

    def __pow__(self, e: int) -> "SparsePoly":
        if e < 0:
            raise ValueError("negative power")
        acc = SparsePoly.const(self.field, self.vars, 1)
        for _ in range(e):
            acc = acc.mul(self)
        return acc

    # -- queries ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Max total degree; 0 for the zero polynomial."""
        if not self.terms:
            return 0
        return max(sum(e) for e in self.terms)

    def coefficient(self, exps) -> FieldElem:
        """Coefficient of a monomial given as Monomial or exponent map."""
        if isinstance(exps, Monomial):
            exps = exps.exponents
        if isinstance(exps, dict):
            key = tuple(exps.get(v, 0) for v in self.vars)
            extra = set(exps) - set(self.vars)
            if any(exps[v] for v in extra):
                return self.field.zero()
        else:
            key = tuple(exps)
        return self.field.elem(self.terms.get(key, 0))

    def evaluate(self, assignment) -> FieldElem:
        point = []
        for v in self.vars:
            if v not in assignment:
                raise MissingAssignment(f"no value for {v}")
            a = assignment[v]
            point.append(a.value if isinstance(a, FieldElem) else a % self.field.q)
        return self.field.elem(
            _kernels.poly_eval(self.terms, tuple(point), self.field.q))

    def sorted_terms(self) -> List[Tuple[Tuple[int, ...], int]]:
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]))

    def extended(self, vars: Sequence[str]) -> "SparsePoly":
        """Re-register over a superset (or reordering) of the variables."""
        vars = tuple(vars)
        pos = []
        for v in self.vars:
            if v not in vars:
                raise FieldMismatch(f"variable {v} missing from new registry")
            pos.append(vars.index(v))
        out: Dict[Tuple[int, ...], int] = {}
        for e, c in self.terms.items():
            ne = [0] * len(vars)
            for p, exp in zip(pos, e):
                ne[p] = exp
            out[tuple(ne)] = c
        return SparsePoly(self.field, vars, out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparsePoly):
            return NotImplemented
        if self.field.q != other.field.q:
            return False
        if self.vars == other.vars:
            return self.terms == other.terms
        merged = tuple(dict.fromkeys(self.vars + other.vars))
        return self.extended(merged).terms == other.extended(merged).terms

    def __hash__(self):
        return hash((self.field.q, self.vars,
                     tuple(sorted(self.terms.items()))))

    def to_text(self) -> str:
        """Render terms in graded-lex order, e.g. "1 + 2*x1*x2^2"."""
        if not self.terms:
            return "0"
        parts = []
        for exps, coeff in self.sorted_terms():
            factors = []
            for v, e in zip(self.vars, exps):
                if e == 1:
                    factors.append(v)
                elif e > 1:
                    factors.append(f"{v}^{e}")
            if not factors:
                parts.append(str(coeff))
            elif coeff == 1:
                parts.append("*".join(factors))
            else:
                parts.append(f"{coeff}*" + "*".join(factors))
        return " + ".join(parts)

    @classmethod
    def parse(cls, text: str, field: FiniteField,
              vars: Sequence[str] | None = None) -> "SparsePoly":
        """Parse the to_text format (sums of integer-coefficient products)."""
        text = text.strip()
        seen: List[str] = []
        term_specs = []
        if text in ("0", ""):
            return cls.zero(field, vars or ())
        for chunk in text.split("+"):
            chunk = chunk.strip()
            if not chunk:
                raise FormatError("empty term")
            coeff = 1
            exps: Dict[str, int] = {}
            for factor in chunk.split("*"):
                factor = factor.strip()
                if not factor:
                    raise FormatError(f"empty factor in {chunk!r}")
                if factor.lstrip("-").isdigit():
                    coeff = coeff * int(factor)
                    continue
                if "^" in factor:
                    name, _, power = factor.partition("^")
                    if not power.isdigit():
                        raise FormatError(f"bad power in {factor!r}")
                    e = int(power)
                else:
                    name, e = factor, 1
                if not _NAME_RE.fullmatch(name):
                    raise FormatError(f"bad variable name {name!r}")
                exps[name] = exps.get(name, 0) + e
                if name not in seen:
                    seen.append(name)
            term_specs.append((coeff, exps))
        registry = tuple(vars) if vars is not None else tuple(seen)
        out = cls.zero(field, registry)
        for coeff, exps in term_specs:
            key = tuple(exps.get(v, 0) for v in registry)
            missing = [v for v, e in exps.items() if e and v not in registry]
            if missing:
                raise FormatError(f"unregistered variables {missing}")
            mono = SparsePoly(field, registry, {key: 1})
            out = out + mono.scale(coeff)
        return out


class Monomial:
    """A product of variables with positive exponents (1 when empty)."""

    __slots__ = ("exponents",)

    def __init__(self, exponents: Dict[str, int]):
        self.exponents = {v: e for v, e in exponents.items() if e}
        if any(e < 0 for e in self.exponents.values()):
            raise ValueError("negative exponent")

    @property
    def degree(self) -> int:
        return sum(self.exponents.values())

    def variables(self) -> List[str]:
        """Variables with multiplicity, e.g. x^2*y -> [x, x, y]."""
        out = []
        for v in sorted(self.exponents):
            out.extend([v] * self.exponents[v])
        return out

    def to_text(self) -> str:
        if not self.exponents:
            return "1"
        parts = []
        for v in sorted(self.exponents):
            e = self.exponents[v]
            parts.append(v if e == 1 else f"{v}^{e}")
        return "*".join(parts)

    @classmethod
    def parse(cls, text: str) -> "Monomial":
        text = text.strip()
        if text == "1":
            return cls({})
        exps: Dict[str, int] = {}
        for factor in text.split("*"):
            factor = factor.strip()
            if "^" in factor:
                name, _, power = factor.partition("^")
                if not power.isdigit():
                    raise FormatError(f"bad power in {factor!r}")
                e = int(power)
            else:
                name, e = factor, 1
            if not _NAME_RE.fullmatch(name):
                raise FormatError(f"bad variable name {name!r}")
            exps[name] = exps.get(name, 0) + e
        return cls(exps)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Monomial) and other.exponents == self.exponents

    def __hash__(self):
        return hash(tuple(sorted(self.exponents.items())))

    def __repr__(self):
        return f"Monomial({self.to_text()})"


def monomial_count(n_vars: int, l: int) -> int:
    """Number of monomials of total degree <= l over n_vars variables."""
    if n_vars == 0:
        return 1   # just the empty monomial
    return sum(math.comb(n_vars + j - 1, j) for j in range(l + 1))


def enumerate_monomials(vars: Sequence[str], l: int,
                        budget: int = DEFAULT_TERM_BUDGET) -> List[Monomial]:
    """All monomials of total degree <= l, in graded-lex order."""
    vars = tuple(vars)
    if monomial_count(len(vars), l) > budget:
        raise ExpansionBudgetExceeded(
            f"{monomial_count(len(vars), l)} monomials exceed budget {budget}")
    out: List[Monomial] = []
    for j in range(l + 1):
        out.extend(Monomial(dict(zip(vars, exps)))
                   for exps in _compositions_desc(len(vars), j))
    return out


def _compositions_desc(n: int, total: int) -> Iterable[Tuple[int, ...]]:
    """Exponent vectors of given total, lexicographically descending."""
    if n == 0:
        if total == 0:
            yield ()
        return
    for first in range(total, -1, -1):
        for rest in _compositions_desc(n - 1, total - first):
            yield (first,) + rest


# ---------------------------------------------------------------------------
# hard polynomial families used by the generators


def matrix_var(i: int, j: int) -> str:
    """Canonical name of the (i, j) matrix entry variable (1-based)."""
    return f"x{i}_{j}"


def permanent_poly(n: int, field: FiniteField) -> SparsePoly:
    """Permanent of the n x n symbolic matrix; n! terms, coefficients 1."""
    if n > 8:
        raise ExpansionBudgetExceeded(f"permanent of dimension {n} (> 8)")
    vars = tuple(matrix_var(i, j)
                 for i in range(1, n + 1) for j in range(1, n + 1))
    terms: Dict[Tuple[int, ...], int] = {}
    for sigma in permutations(range(n)):
        e = [0] * len(vars)
        for i in range(n):
            e[i * n + sigma[i]] += 1
        terms[tuple(e)] = 1
    return SparsePoly(field, vars, terms)


def determinant_poly(n: int, field: FiniteField) -> SparsePoly:
    """Determinant of the n x n symbolic matrix (signs reduced mod q)."""
    if n > 8:
        raise ExpansionBudgetExceeded(f"determinant of dimension {n} (> 8)")
    vars = tuple(matrix_var(i, j)
                 for i in range(1, n + 1) for j in range(1, n + 1))
    terms: Dict[Tuple[int, ...], int] = {}
    for sigma in permutations(range(n)):
        e = [0] * len(vars)
        inversions = sum(1 for a in range(n) for b in range(a + 1, n)
                         if sigma[a] > sigma[b])
        for i in range(n):
            e[i * n + sigma[i]] += 1
        coeff = 1 if inversions % 2 == 0 else field.q - 1
        terms[tuple(e)] = coeff
    if field.q == 2:
        # -1 == 1, so coefficients may merge with nothing to cancel; the
        # loop above already stored canonical residues.
        pass
    return SparsePoly(field, vars, terms)


def imm_var(t: int, i: int, j: int) -> str:
    return f"X{t}_{i}_{j}"


def imm_poly(n: int, d: int, field: FiniteField,
             budget: int = DEFAULT_TERM_BUDGET) -> SparsePoly:
    """(1,1) entry of a product of d symbolic n x n matrices."""
    if n ** max(d - 1, 0) > budget or n * n * d > budget:
        raise ExpansionBudgetExceeded(f"imm({n},{d}) too large")
    vars = tuple(imm_var(t, i, j)
                 for t in range(1, d + 1)
                 for i in range(1, n + 1) for j in range(1, n + 1))
    index = {v: k for k, v in enumerate(vars)}
    terms: Dict[Tuple[int, ...], int] = {}
    for path in product(range(1, n + 1), repeat=d - 1):
        walk = (1,) + path + (1,)
        e = [0] * len(vars)
        for t in range(1, d + 1):
            e[index[imm_var(t, walk[t - 1], walk[t])]] += 1
        key = tuple(e)
        terms[key] = (terms.get(key, 0) + 1) % field.q
    return SparsePoly(field, vars,
                      {k: v for k, v in terms.items() if v})
