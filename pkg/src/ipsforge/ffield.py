"""Exact arithmetic over prime fields and the one-hot selector polynomials.

A FiniteField is just a verified prime modulus; FieldElem wraps a canonical
residue. Selector polynomials (ubit_poly) and their circuit form
(ubit_circuit) evaluate to 1 at one field point and 0 elsewhere.
"""

from __future__ import annotations

from ipsforge.errors import FieldMismatch, IndexOutOfField, NonPrimeModulus

# Deterministic Miller-Rabin witness sets: the first covers every modulus
# below 3.3e14, the second every 64-bit integer.
_MR_BASES_SMALL = (2, 3, 5, 7, 11, 13, 17)
_MR_BASES_WIDE = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic primality check for n < 2**64."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n == p:
            return True
        if n % p == 0:
            return False
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    bases = _MR_BASES_SMALL if n < 330_000_000_000_000 else _MR_BASES_WIDE
    for a in bases:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prime_in_cube_interval(n: int) -> int:
    """Smallest prime q with n**3 < q <= (n + 1)**3.

    The search simply walks upward from n**3 + 1, which doubles as the
    fallback (next prime above n**3) should the interval ever be empty.
    """
    q = n ** 3 + 1
    while not is_prime(q):
        q += 1
    return q


class FiniteField:
    """A prime field F_q with canonical residues in [0, q)."""

    __slots__ = ("q",)

    def __init__(self, q: int):
        if q < 2 or not is_prime(q):
            raise NonPrimeModulus(f"modulus {q} is not prime")
        self.q = q

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FiniteField) and other.q == self.q

    def __hash__(self) -> int:
        return hash(("FiniteField", self.q))

    def __repr__(self) -> str:
        return f"FiniteField({self.q})"

    def elem(self, value: int) -> "FieldElem":
        return FieldElem(self, value)

    def zero(self) -> "FieldElem":
        return FieldElem(self, 0)

    def one(self) -> "FieldElem":
        return FieldElem(self, 1)

    def elements(self):
        """All field points as ints, in order."""
        return range(self.q)


def ff_new(q: int) -> FiniteField:
    """Create a field handle; raises NonPrimeModulus for composite q."""
    return FiniteField(q)


class FieldElem:
    """An element of a FiniteField; supports mixed arithmetic with ints."""

    __slots__ = ("field", "value")

    def __init__(self, field: FiniteField, value: int):
        self.field = field
        self.value = value % field.q

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElem):
            if other.field.q != self.field.q:
                raise FieldMismatch(
                    f"mixing F_{self.field.q} with F_{other.field.q}")
            return other.value
        if isinstance(other, int):
            return other % self.field.q
        return NotImplemented

    def __add__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return FieldElem(self.field, self.value + v)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return FieldElem(self.field, self.value - v)

    def __rsub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return FieldElem(self.field, v - self.value)

    def __mul__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return FieldElem(self.field, self.value * v)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElem(self.field, -self.value)

    def __pow__(self, e: int):
        if e < 0:
            return self.inv() ** (-e)
        return FieldElem(self.field, pow(self.value, e, self.field.q))

    def inv(self) -> "FieldElem":
        if self.value == 0:
            raise ZeroDivisionError("zero has no inverse")
        return FieldElem(self.field,
                         pow(self.value, self.field.q - 2, self.field.q))

    def __truediv__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return self * FieldElem(self.field, v).inv()

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FieldElem):
            return self.field.q == other.field.q and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.field.q
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.field.q, self.value))

    def __repr__(self) -> str:
        return f"{self.value}#F{self.field.q}"

    def is_zero(self) -> bool:
        return self.value == 0


def ubit_poly(j: int, field: FiniteField):
    """Degree-(q-1) univariate selector: 1 at j, 0 at every other point.

    Returns a SparsePoly over the single variable "x".
    """
    from ipsforge.poly import SparsePoly

    q = field.q
    if not 0 <= j < q:
        raise IndexOutOfField(f"point {j} outside [0, {q})")
    acc = SparsePoly.const(field, ("x",), 1)
    x = SparsePoly.variable(field, ("x",), "x")
    denom = 1
    for i in range(q):
        if i == j:
            continue
        acc = acc * (x - i)
        denom = denom * (j - i) % q
    return acc * pow(denom, q - 2, q)


def ubit_circuit(j: int, c):
    """Circuit computing the selector applied to c's value.

    Structure: one product node over (q-1) sum nodes (c - i for i != j),
    with the constant denominator folded into one edge label; depth is
    exactly depth(c) + 2.
    """
    from ipsforge.circuit import CircuitBuilder

    field = c.field
    q = field.q
    if not 0 <= j < q:
        raise IndexOutOfField(f"point {j} outside [0, {q})")
    b = CircuitBuilder(field)
    root = b.splice(c)
    scale = pow(_product_of_differences(j, q), q - 2, q)
    factors = []
    first = True
    for i in range(q):
        if i == j:
            continue
        label = scale if first else 1
        if i == 0:
            factors.append(b.add((root, label)))
        else:
            factors.append(b.add((root, label), (b.const(-i * label), 1)))
        first = False
    return b.build(b.mul(*factors))


def _product_of_differences(j: int, q: int) -> int:
    denom = 1
    for i in range(q):
        if i != j:
            denom = denom * (j - i) % q
    return denom
