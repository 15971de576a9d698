"""Positive definite binary quadratic forms and their class groups.

A form ``(a, b, c)`` stands for ``a x^2 + b xy + c y^2`` with discriminant
``b^2 - 4ac < 0``. Classes are compared through their unique reduced
representative, so equality of classes is equality of reduced triples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .abelian import inverse_unimodular, smith_normal_form
from .number_core import factorize, is_probable_prime

__all__ = [
    "QuadForm",
    "ClassGroupStructure",
    "Rank2Certificate",
    "OracleRangeError",
    "DEFAULT_ORACLE_BOUND",
    "reduce",
    "compose",
    "power",
    "inverse",
    "principal_form",
    "is_principal",
    "reduced_forms",
    "form_order",
    "enumerate_class_group",
    "p_rank",
    "verify_rank2",
]

DEFAULT_ORACLE_BOUND = 10**7


class OracleRangeError(ValueError):
    """Discriminant too large for exhaustive class group enumeration."""


@dataclass(frozen=True, order=True)
class QuadForm:
    a: int
    b: int
    c: int

    def __post_init__(self):
        if self.a <= 0 or self.discriminant >= 0:
            raise ValueError(f"{self} is not positive definite")
        if self.discriminant % 4 not in (0, 1):
            raise ValueError(f"{self} has impossible discriminant {self.discriminant}")

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def content(self) -> int:
        return math.gcd(self.a, self.b, self.c)

    @property
    def is_primitive(self) -> bool:
        return self.content == 1

    @property
    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if not (abs(b) <= a <= c):
            return False
        return b >= 0 or (abs(b) != a and a != c)

    def __iter__(self):
        yield self.a
        yield self.b
        yield self.c

    def __mul__(self, other: "QuadForm") -> "QuadForm":
        return compose(self, other)

    def __pow__(self, k: int) -> "QuadForm":
        return power(self, k)

    def __str__(self):
        return f"({self.a}, {self.b}, {self.c})"


def _reduce_triple(a: int, b: int, c: int) -> tuple[int, int, int]:
    while True:
        if not (-a < b <= a):
            r = (a - b) // (2 * a)
            b, c = b + 2 * r * a, a * r * r + b * r + c
        if a > c or (a == c and b < 0):
            a, b, c = c, -b, a
            continue
        return a, b, c


def reduce(f: QuadForm) -> QuadForm:
    """Reduced form equivalent to ``f``: |b| <= a <= c, b >= 0 if |b| = a or a = c."""
    if f.is_reduced:
        return f
    return QuadForm(*_reduce_triple(f.a, f.b, f.c))


def _compose_triples(a1, b1, c1, a2, b2, c2) -> tuple[int, int, int]:
    # Shanks' arrangement of Dirichlet composition (Cohen, Alg. 5.4.7);
    # any Bezout coefficients work, so they come from modular inverses.
    if a1 > a2:
        a1, b1, c1, a2, b2, c2 = a2, b2, c2, a1, b1, c1
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        d = math.gcd(a1, a2)
        y1 = pow(a2 // d, -1, a1 // d)
    if s % d == 0:
        y2, x2, d1 = -1, 0, d
    else:
        d1 = math.gcd(s, d)
        x2 = pow(s // d1, -1, d // d1) if d > d1 else 0
        y2 = -((d1 - x2 * s) // d)
    v1 = a1 // d1
    v2 = a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    c3 = (c2 * d1 + r * (b2 + v2 * r)) // v1
    return _reduce_triple(a3, b3, c3)


def compose(f: QuadForm, g: QuadForm) -> QuadForm:
    """Reduced representative of the product class of two primitive forms."""
    if f.discriminant != g.discriminant:
        raise ValueError(f"discriminants differ: {f.discriminant} vs {g.discriminant}")
    return QuadForm(*_compose_triples(f.a, f.b, f.c, g.a, g.b, g.c))


def principal_form(disc: int) -> QuadForm:
    if disc >= 0 or disc % 4 not in (0, 1):
        raise ValueError(f"{disc} is not a negative discriminant")
    if disc % 4 == 0:
        return QuadForm(1, 0, -disc // 4)
    return QuadForm(1, 1, (1 - disc) // 4)


def inverse(f: QuadForm) -> QuadForm:
    return reduce(QuadForm(f.a, -f.b, f.c))


def power(f: QuadForm, k: int) -> QuadForm:
    if k < 0:
        return power(inverse(f), -k)
    result = principal_form(f.discriminant)
    base = reduce(f)
    while k:
        if k & 1:
            result = compose(result, base)
        k >>= 1
        if k:
            base = compose(base, base)
    return result


def is_principal(f: QuadForm) -> bool:
    return reduce(f) == principal_form(f.discriminant)


def _reduced_triples(disc: int, block: int = 1 << 21) -> list[tuple[int, int, int]]:
    amax = math.isqrt(-disc // 3)
    b_all = np.arange(-amax + 1, amax + 1, dtype=np.int64)
    b_all = b_all[(b_all - disc) % 2 == 0][None, :]
    step = max(1, block // max(b_all.size, 1))
    out = []
    for a0 in range(1, amax + 1, step):
        a = np.arange(a0, min(amax, a0 + step - 1) + 1, dtype=np.int64)[:, None]
        mask = (b_all <= a) & (b_all > -a) & ((b_all * b_all - disc) % (4 * a) == 0)
        ai, bi = np.nonzero(mask)
        A, B = a[ai, 0], b_all[0, bi]
        C = (B * B - disc) // (4 * A)
        keep = ((C > A) | ((C == A) & (B >= 0))) & (np.gcd(np.gcd(A, B), C) == 1)
        out.extend(zip(A[keep].tolist(), B[keep].tolist(), C[keep].tolist()))
    out.sort()
    return out


def reduced_forms(disc: int) -> list[QuadForm]:
    """All reduced primitive forms of discriminant ``disc``, sorted by (a, b)."""
    if disc >= 0 or disc % 4 not in (0, 1):
        raise ValueError(f"{disc} is not a negative discriminant")
    return [QuadForm(*t) for t in _reduced_triples(disc)]


def form_order(f: QuadForm, multiple: int) -> int:
    """Order of the class of ``f`` given any multiple of it (e.g. the class number)."""
    ident = principal_form(f.discriminant)
    order = multiple
    for pr, _ in factorize(multiple).prime_powers:
        while order % pr == 0 and power(f, order // pr) == ident:
            order //= pr
    return order


@dataclass
class ClassGroupStructure:
    """Class group as a product of cyclic groups of orders ``elementary_divisors``.

    ``coordinates`` maps every reduced form to its exponent vector with
    respect to ``generators``.
    """

    discriminant: int
    class_number: int
    elementary_divisors: list[int]
    generators: list[QuadForm]
    coordinates: dict[QuadForm, tuple[int, ...]] = field(default_factory=dict, repr=False)

    @property
    def forms(self) -> list[QuadForm]:
        return list(self.coordinates)

    def order_of(self, f: QuadForm) -> int:
        order = 1
        for d, c in zip(self.elementary_divisors, self.coordinates[reduce(f)]):
            order = math.lcm(order, d // math.gcd(d, c))
        return order

    def element(self, vector) -> QuadForm:
        """Form with the given exponent vector."""
        result = principal_form(self.discriminant)
        for g, e in zip(self.generators, vector):
            result = compose(result, power(g, e))
        return result

    def p_rank(self, p: int) -> int:
        return p_rank(self, p)


def enumerate_class_group(disc: int, oracle_bound: int = DEFAULT_ORACLE_BOUND) -> ClassGroupStructure:
    """Class group of discriminant ``disc`` by listing every reduced form.

    The group is grown one cyclic extension at a time: each reduced form not
    yet reached becomes a new generator, its order modulo the current
    subgroup gives one relation, and the subgroup is extended by all its
    cosets. The relation matrix is then put into Smith normal form.
    """
    if disc >= 0 or disc % 4 not in (0, 1):
        raise ValueError(f"{disc} is not a negative discriminant")
    if -disc > oracle_bound:
        raise OracleRangeError(f"|{disc}| exceeds oracle bound {oracle_bound}")
    triples = _reduced_triples(disc)
    h = len(triples)
    ident = tuple(principal_form(disc))
    coords: dict[tuple, tuple[int, ...]] = {ident: ()}
    gens: list[tuple] = []
    relations: list[list[int]] = []
    for cand in triples:
        if cand in coords:
            continue
        powers = [ident, cand]
        while powers[-1] not in coords:
            powers.append(_compose_triples(*powers[-1], *cand))
        m = len(powers) - 1
        k = len(gens)
        base = coords[powers[-1]]
        relations.append([-c for c in base] + [0] * (k - len(base)) + [m])
        gens.append(cand)
        grown = {}
        for x, v in coords.items():
            v = v + (0,) * (k - len(v))
            grown[x] = v + (0,)
            for j in range(1, m):
                grown[_compose_triples(*x, *powers[j])] = v + (j,)
        coords = grown
    if len(coords) != h:
        raise AssertionError(f"coset extension reached {len(coords)} of {h} forms for {disc}")
    k = len(gens)
    if k == 0:
        return ClassGroupStructure(disc, h, [], [], {QuadForm(*ident): ()})
    relations = [row + [0] * (k - len(row)) for row in relations]
    diag, _, V = smith_normal_form(relations)
    Vinv = inverse_unimodular(V)
    keep = [j for j, d in enumerate(diag) if d != 1]
    divisors = [diag[j] for j in keep]
    gen_forms = []
    for j in keep:
        g = QuadForm(*ident)
        for gi, e in zip(gens, Vinv[j]):
            g = compose(g, power(QuadForm(*gi), e))
        gen_forms.append(g)
    coordinates = {}
    for x, v in coords.items():
        new = [sum(v[i] * V[i][j] for i in range(k)) for j in keep]
        coordinates[QuadForm(*x)] = tuple(c % d for c, d in zip(new, divisors))
    return ClassGroupStructure(disc, h, divisors, gen_forms, coordinates)


def p_rank(structure: ClassGroupStructure, p: int) -> int:
    if not is_probable_prime(p):
        raise ValueError(f"{p} is not prime")
    return sum(1 for d in structure.elementary_divisors if d % p == 0)


@dataclass
class Rank2Certificate:
    """Composition transcript showing two classes span a (Z/p)^2 subgroup.

    Each transcript entry is ``(relation, required, observed)`` where the
    relation is one of ``"nonprincipal F1"``, ``"F1^p principal"``,
    ``"nonprincipal F1*F2^t"`` (t = 0..p-1) and so on.
    """

    p: int
    discriminant: int
    f1: QuadForm
    f2: QuadForm
    transcript: list[tuple[str, bool, bool]]

    @property
    def valid(self) -> bool:
        return all(required == observed for _, required, observed in self.transcript)

    @property
    def first_failure(self) -> str | None:
        for relation, required, observed in self.transcript:
            if required != observed:
                return relation
        return None

    def replay(self) -> "Rank2Certificate":
        return verify_rank2(self.p, self.f1, self.f2)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "discriminant": str(self.discriminant),
            "f1": [str(x) for x in self.f1],
            "f2": [str(x) for x in self.f2],
            "transcript": [[rel, req, obs] for rel, req, obs in self.transcript],
            "valid": self.valid,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Rank2Certificate":
        return cls(
            p=int(d["p"]),
            discriminant=int(d["discriminant"]),
            f1=QuadForm(*map(int, d["f1"])),
            f2=QuadForm(*map(int, d["f2"])),
            transcript=[(rel, bool(req), bool(obs)) for rel, req, obs in d["transcript"]],
        )


def verify_rank2(p: int, f1: QuadForm, f2: QuadForm) -> Rank2Certificate:
    """Check [F1], [F2] have order p and F1 lies outside <F2>.

    Nothing is short-circuited, so the transcript is complete even when an
    early check fails.
    """
    if f1.discriminant != f2.discriminant:
        raise ValueError(f"discriminants differ: {f1.discriminant} vs {f2.discriminant}")
    if not (f1.is_primitive and f2.is_primitive):
        raise ValueError("verify_rank2 needs primitive forms")
    disc = f1.discriminant
    ident = principal_form(disc)
    r1, r2 = reduce(f1), reduce(f2)
    transcript = [
        ("nonprincipal F1", True, r1 != ident),
        ("nonprincipal F2", True, r2 != ident),
        (f"F1^{p} principal", True, power(r1, p) == ident),
        (f"F2^{p} principal", True, power(r2, p) == ident),
    ]
    acc = r1
    for t in range(p):
        transcript.append((f"nonprincipal F1*F2^{t}", True, acc != ident))
        acc = compose(acc, r2)
    return Rank2Certificate(p, disc, f1, f2, transcript)
