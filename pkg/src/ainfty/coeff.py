"""Exact coefficient arithmetic over Q, F_p and the p-local integers Z_(p).

Z_(p) is the subring of Q of fractions with denominator coprime to p. It
stands in for the p-adic integers: the unit/non-unit structure (p-adic
valuation of the numerator) is identical, and that is all the twisting
induction consumes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import NonUnit, RingMismatch

KIND_Q = "Q"
KIND_FP = "Fp"
KIND_ZLOC = "Zloc"

_KINDS = (KIND_Q, KIND_FP, KIND_ZLOC)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class Ring:
    """Ground ring descriptor: Q, F_p or Z_(p)."""

    kind: str
    p: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown ring kind {self.kind!r}")
        if self.kind == KIND_Q:
            if self.p is not None:
                raise ValueError("Q takes no prime")
        else:
            if self.p is None or not _is_prime(self.p):
                raise ValueError(f"{self.kind} needs a prime, got {self.p!r}")

    @staticmethod
    def rationals() -> "Ring":
        return Ring(KIND_Q)

    @staticmethod
    def prime_field(p: int) -> "Ring":
        return Ring(KIND_FP, p)

    @staticmethod
    def p_local(p: int) -> "Ring":
        return Ring(KIND_ZLOC, p)

    def zero(self) -> "Scalar":
        return self.from_int(0)

    def one(self) -> "Scalar":
        return self.from_int(1)

    def from_int(self, n: int) -> "Scalar":
        if self.kind == KIND_FP:
            return Scalar(self, n % self.p)
        return Scalar(self, Fraction(n))

    def from_fraction(self, num: int, den: int) -> "Scalar":
        """Exact element num/den, reduced; checked against the ring's rules."""
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if self.kind == KIND_FP:
            d = den % self.p
            if d == 0:
                raise NonUnit(f"denominator {den} is 0 in F_{self.p}")
            return Scalar(self, (num * pow(d, -1, self.p)) % self.p)
        value = Fraction(num, den)
        if self.kind == KIND_ZLOC and value.denominator % self.p == 0:
            raise NonUnit(
                f"{value} has denominator divisible by {self.p}; not in Z_({self.p})"
            )
        return Scalar(self, value)

    def parse(self, text: str) -> "Scalar":
        """Parse the serialized form: an integer or 'a/b' with b > 0."""
        text = text.strip()
        if "/" in text:
            a, _, b = text.partition("/")
            return self.from_fraction(int(a), int(b))
        return self.from_int(int(text))

    def __str__(self):
        if self.kind == KIND_Q:
            return "Q"
        if self.kind == KIND_FP:
            return f"F_{self.p}"
        return f"Z_({self.p})"


class Scalar:
    """Immutable exact ring element.

    Value is a residue in [0, p) for prime fields, a reduced Fraction
    otherwise. Scalars of different rings never mix.
    """

    __slots__ = ("ring", "value")

    def __init__(self, ring: Ring, value):
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "value", value)

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    def _check(self, other: "Scalar"):
        if not isinstance(other, Scalar):
            raise TypeError(f"expected Scalar, got {type(other).__name__}")
        if other.ring != self.ring:
            raise RingMismatch(f"cannot mix {self.ring} and {other.ring}")

    def __add__(self, other):
        self._check(other)
        v = self.value + other.value
        if self.ring.kind == KIND_FP:
            v %= self.ring.p
        return Scalar(self.ring, v)

    def __sub__(self, other):
        self._check(other)
        v = self.value - other.value
        if self.ring.kind == KIND_FP:
            v %= self.ring.p
        return Scalar(self.ring, v)

    def __mul__(self, other):
        self._check(other)
        v = self.value * other.value
        if self.ring.kind == KIND_FP:
            v %= self.ring.p
        return Scalar(self.ring, v)

    def __neg__(self):
        v = -self.value
        if self.ring.kind == KIND_FP:
            v %= self.ring.p
        return Scalar(self.ring, v)

    def __eq__(self, other):
        return (
            isinstance(other, Scalar)
            and self.ring == other.ring
            and self.value == other.value
        )

    def __hash__(self):
        return hash((self.ring, self.value))

    def __bool__(self):
        return self.value != 0

    def is_zero(self) -> bool:
        return self.value == 0

    def is_unit(self) -> bool:
        """True iff the element is invertible in its ring."""
        if self.value == 0:
            return False
        if self.ring.kind == KIND_ZLOC:
            return self.value.numerator % self.ring.p != 0
        return True

    def inv(self) -> "Scalar":
        if not self.is_unit():
            raise NonUnit(f"{self} is not a unit in {self.ring}")
        if self.ring.kind == KIND_FP:
            return Scalar(self.ring, pow(self.value, -1, self.ring.p))
        return Scalar(self.ring, 1 / self.value)

    def __pow__(self, n: int) -> "Scalar":
        if n < 0:
            return self.inv() ** (-n)
        if self.ring.kind == KIND_FP:
            return Scalar(self.ring, pow(self.value, n, self.ring.p))
        return Scalar(self.ring, self.value**n)

    def valuation(self) -> int:
        """p-adic valuation for Z_(p) elements (math.inf for 0)."""
        if self.ring.kind != KIND_ZLOC:
            raise RingMismatch("valuation only defined over Z_(p)")
        if self.value == 0:
            return 10**9
        n, p, v = self.value.numerator, self.ring.p, 0
        while n % p == 0:
            n //= p
            v += 1
        return v

    def residue_mod_p(self) -> int:
        """Image in F_p of a Z_(p) or F_p element."""
        if self.ring.kind == KIND_FP:
            return self.value
        if self.ring.kind != KIND_ZLOC:
            raise RingMismatch("no residue map from Q")
        p = self.ring.p
        num = self.value.numerator % p
        den = self.value.denominator % p
        return (num * pow(den, -1, p)) % p

    def __str__(self):
        if self.ring.kind == KIND_FP:
            return str(self.value)
        if self.value.denominator == 1:
            return str(self.value.numerator)
        return f"{self.value.numerator}/{self.value.denominator}"

    def __repr__(self):
        return f"Scalar({self.ring}, {self})"


@dataclass(frozen=True)
class UnitRange:
    """Largest n with alpha^k - 1 a unit for all 1 <= k <= n.

    exact=True means alpha^(n+1) - 1 is genuinely not a unit; exact=False
    means every probed k passed and the range is unbounded up to the probe
    limit (possible only over Q).
    """

    n: int
    exact: bool

    @property
    def unbounded_up_to_probe(self) -> bool:
        return not self.exact


def multiplicative_order_mod_p(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise NonUnit(f"{a} is 0 mod {p}")
    t, x = 1, a
    while x != 1:
        x = (x * a) % p
        t += 1
    return t


def unit_range(ring: Ring, alpha: Scalar, probe_limit: int = 64) -> UnitRange:
    """Largest n <= probe_limit with alpha^k - 1 a unit for all k <= n.

    For F_p and Z_(p) the exact answer ord_p(alpha mod p) - 1 is returned
    without probing; over Q the probe limit applies.
    """
    if alpha.ring != ring:
        raise RingMismatch(f"alpha lives in {alpha.ring}, not {ring}")
    if not alpha.is_unit():
        raise NonUnit(f"{alpha} is not a unit in {ring}")
    if ring.kind in (KIND_FP, KIND_ZLOC):
        # alpha^k - 1 is a unit iff alpha^k != 1 mod p.
        order = multiplicative_order_mod_p(alpha.residue_mod_p(), ring.p)
        return UnitRange(order - 1, exact=True)
    one = ring.one()
    power = one
    for k in range(1, probe_limit + 1):
        power = power * alpha
        if not (power - one).is_unit():
            return UnitRange(k - 1, exact=True)
    return UnitRange(probe_limit, exact=False)
