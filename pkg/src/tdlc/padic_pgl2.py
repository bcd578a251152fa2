"""Exact p-adic valuations and 2x2 projective matrices over the rationals.

Reproduces the rank-one example: the double coset ladder K g^n K with
g = diag(p, 1) over K = PGL2(Z_p), the unipotent element contracted by the
powers g^n, and the perturbed representatives h_n = g^n k_n whose
conjugates provably do not return to the identity.  Everything is computed
with fractions.Fraction, so every reported valuation is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

INF = math.inf


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def valuation(x, p: int):
    """Exact p-adic valuation of a rational; infinity at 0."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    x = Fraction(x)
    if x == 0:
        return INF
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


@dataclass(frozen=True)
class PAdicRational:
    """A rational together with the prime defining its valuation."""

    value: Fraction
    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        object.__setattr__(self, "value", Fraction(self.value))

    @property
    def val(self):
        return valuation(self.value, self.p)

    def __add__(self, other: "PAdicRational") -> "PAdicRational":
        self._check(other)
        return PAdicRational(self.value + other.value, self.p)

    def __mul__(self, other: "PAdicRational") -> "PAdicRational":
        self._check(other)
        return PAdicRational(self.value * other.value, self.p)

    def _check(self, other: "PAdicRational") -> None:
        if self.p != other.p:
            raise ValueError("mixed primes")


class ProjMatrix:
    """A nonsingular 2x2 rational matrix modulo scalars, over a fixed prime.

    The canonical representative scales the matrix so the minimal entry
    valuation is 0 and the first p-unit entry (scanning a, b, c, d) equals 1;
    projective equality is then literal equality of canonical entries.
    """

    __slots__ = ("a", "b", "c", "d", "p")

    def __init__(self, entries, p: int, _canonical: bool = False):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        a, b, c, d = (Fraction(x) for x in entries)
        if a * d - b * c == 0:
            raise ValueError("matrix is singular")
        self.p = p
        if _canonical:
            self.a, self.b, self.c, self.d = a, b, c, d
        else:
            self.a, self.b, self.c, self.d = self._canonicalize(a, b, c, d, p)

    @staticmethod
    def _canonicalize(a, b, c, d, p):
        m = min(v for v in (valuation(x, p) for x in (a, b, c, d)) if v is not INF)
        scale = Fraction(p) ** int(-m)
        a, b, c, d = a * scale, b * scale, c * scale, d * scale
        unit = next(x for x in (a, b, c, d) if x != 0 and valuation(x, p) == 0)
        return a / unit, b / unit, c / unit, d / unit

    @property
    def entries(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.a, self.b, self.c, self.d)

    def __eq__(self, other) -> bool:
        return isinstance(other, ProjMatrix) and self.p == other.p and self.entries == other.entries

    def __hash__(self):
        return hash((self.entries, self.p))

    def __repr__(self):
        return f"ProjMatrix([{self.a}, {self.b}; {self.c}, {self.d}], p={self.p})"

    def __mul__(self, other: "ProjMatrix") -> "ProjMatrix":
        if self.p != other.p:
            raise ValueError("mixed primes")
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        return ProjMatrix((a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h), self.p)

    def inverse(self) -> "ProjMatrix":
        a, b, c, d = self.entries
        return ProjMatrix((d, -b, -c, a), self.p)  # adjugate; determinant is a scalar

    def det_valuation(self):
        return valuation(self.a * self.d - self.b * self.c, self.p)

    def is_integral_unit(self) -> bool:
        """Membership in PGL2(Z_p): canonical entries p-integral with unit determinant."""
        vals = [valuation(x, self.p) for x in self.entries if x != 0]
        return all(v >= 0 for v in vals) and self.det_valuation() == 0


def identity_matrix(p: int) -> ProjMatrix:
    return ProjMatrix((1, 0, 0, 1), p)


def cartan_rep(n: int, p: int) -> ProjMatrix:
    """The double coset ladder representative diag(p^n, 1)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return ProjMatrix((Fraction(p) ** n, 0, 0, 1), p)


def perturbed_rep(n: int, p: int) -> ProjMatrix:
    """h_n = g^n k_n with k_n unipotent lower-triangular of depth ceil(n/3)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    q = Fraction(p) ** ((n + 2) // 3)
    return ProjMatrix((Fraction(p) ** n, 0, q, 1), p)


def perturbing_unit(n: int, p: int) -> ProjMatrix:
    return ProjMatrix((1, 0, Fraction(p) ** ((n + 2) // 3), 1), p)


def conjugate(g: ProjMatrix, h: ProjMatrix) -> ProjMatrix:
    """g h g^-1 in canonical form."""
    return g * h * g.inverse()


def perturbed_conjugate_raw(h: ProjMatrix, n: int) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """The literal matrix product h_n h h_n^-1 (true inverse, no projective rescaling).

    Projective canonicalization would absorb the diverging denominators this
    matrix is used to exhibit, so the raw entries are kept.
    """
    p, (a, b, c, d) = h.p, h.entries
    q = Fraction(p) ** ((n + 2) // 3)
    pn = Fraction(p) ** n
    # h_n = [[pn, 0], [q, 1]], h_n^-1 = (1/pn) [[1, 0], [-q, pn]]
    m11, m12 = pn * a, pn * b
    m21, m22 = q * a + c, q * b + d
    return ((m11 - q * m12) / pn, m12,
            (m21 - q * m22) / pn, m22)


def conjugation_formula_check(h: ProjMatrix, n: int) -> bool:
    """Exact entrywise comparison of h_n h h_n^-1 against the closed form.

    The closed form for entries (a b; c d) is
      [[a - b q, b p^n], [(a-d) q p^-n + c p^-n - b q^2 p^-n, b q + d]]
    with q = p^ceil(n/3); equality is exact with zero tolerance.
    """
    p = h.p
    q = Fraction(p) ** ((n + 2) // 3)
    pn = Fraction(p) ** n
    a, b, c, d = h.entries
    expected = (a - b * q, b * pn,
                (a - d) * q / pn + c / pn - b * q * q / pn, b * q + d)
    return perturbed_conjugate_raw(h, n) == expected


def distance_to_identity(m: ProjMatrix):
    """Largest k with m congruent to the identity mod p^k after canonical scaling.

    Computed as the minimum entry valuation of (canonical m) - id; infinity
    means m is projectively the identity.  Can be negative for matrices far
    from the maximal compact.
    """
    diff = (m.a - 1, m.b, m.c, m.d - 1)
    return min(valuation(x, m.p) for x in diff)


def unipotent_element(p: int) -> ProjMatrix:
    return ProjMatrix((1, 1, 0, 1), p)


def unipotent_contraction_check(n_max: int, p: int) -> dict[int, object]:
    """Table n -> distance_to_identity(g^n u g^-n); asserts the value is exactly n."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    u = unipotent_element(p)
    table = {}
    for n in range(n_max + 1):
        dist = distance_to_identity(conjugate(cartan_rep(n, p), u))
        if dist != n:
            raise AssertionError(f"conjugate at n={n} has distance {dist}, expected {n}")
        table[n] = dist
    return table


@dataclass(frozen=True)
class DivergenceReport:
    """Bottom-left valuations of h_n h h_n^-1: divergence evidence for con((h_n)).

    Per-n the valuation equals min(v(a-d) + ceil(n/3) - n, v(c) - n,
    v(b) + 2 ceil(n/3) - n) barring ultrametric ties; the report certifies it
    decreases without bound along every residue class mod 3, so the raw
    distance to the identity diverges to -infinity and the conjugates leave
    every compact neighborhood of the identity.
    """

    prime: int
    bottom_left_valuations: tuple
    raw_distances: tuple
    diverges: bool


def perturbed_triviality_evidence(h: ProjMatrix, n_max: int) -> DivergenceReport:
    if h.b == 0 and h.c == 0 and h.a == h.d:
        raise ValueError("h is projectively the identity; divergence evidence is inapplicable")
    p = h.p
    vals = []
    dists = []
    for n in range(1, n_max + 1):
        a, b, c, d = perturbed_conjugate_raw(h, n)
        vals.append(valuation(c, p))
        dists.append(min(valuation(x, p) for x in (a - 1, b, c, d - 1)))
    diverges = n_max >= 4 and all(vals[i + 3] < vals[i] for i in range(n_max - 3))
    return DivergenceReport(p, tuple(vals), tuple(dists), diverges)


def predicted_bottom_left_valuation(h: ProjMatrix, n: int):
    """The three-term minimum from the closed conjugation formula."""
    p = h.p
    ceil_n3 = (n + 2) // 3
    terms = []
    if h.a != h.d:
        terms.append(valuation(h.a - h.d, p) + ceil_n3 - n)
    if h.c != 0:
        terms.append(valuation(h.c, p) - n)
    if h.b != 0:
        terms.append(valuation(h.b, p) + 2 * ceil_n3 - n)
    return min(terms) if terms else INF


def cartan_exponent(m: ProjMatrix) -> int:
    """The double coset invariant: n with m in K diag(p^n,1) K.

    For a canonical representative (p-integral, some entry a unit) this is
    the valuation of the determinant, i.e. the gap between the two
    elementary divisors.
    """
    v = m.det_valuation()
    if v < 0:
        raise AssertionError("canonical form should be p-integral")
    return int(v)


def random_matrix(rng, p: int, span: int = 40) -> ProjMatrix:
    """Seeded random nonsingular matrix with small numerators and denominators."""
    while True:
        entries = [Fraction(rng.randint(-span, span), rng.randint(1, span)) for _ in range(4)]
        if entries[0] * entries[3] - entries[1] * entries[2] != 0:
            return ProjMatrix(entries, p)
