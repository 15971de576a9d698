"""Bivariate polynomials over Q, local zero counts and squarefree densities.

``Poly2`` is a sparse map ``(deg_x, deg_y) -> Fraction``. The gcd works in
Z[Y][X]: rational inputs are scaled to integer polynomials, contents over
Z[Y] are split off, and a primitive pseudo-remainder sequence in X handles
the rest.

The local counts ``c_l`` (zeros of F modulo l^2 among all l^4 residue
pairs) feed the Euler product prod_l (1 - c_l / l^4), which predicts the
density of pairs (a, b) with F(a, b) squarefree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .family import eval_f
from .number_core import DEFAULT_EFFORT, DEFAULT_TRIAL_BOUND, Verdict, classify_squarefree, is_probable_prime, primes_up_to

__all__ = [
    "Poly2",
    "X",
    "Y",
    "DensityEstimate",
    "DensityCount",
    "BudgetError",
    "Lemma32Contradiction",
    "family_poly",
    "gcd2",
    "is_squarefree_poly",
    "check_lemma31",
    "count_c_ell",
    "check_lemma32",
    "euler_product",
    "empirical_density",
    "MAX_EXHAUSTIVE_ELL",
]

MAX_EXHAUSTIVE_ELL = 997


class BudgetError(ValueError):
    """Exhaustive counting requested beyond the configured prime cap."""


class Lemma32Contradiction(ArithmeticError):
    """A local factor vanished: l^2 divides F at every residue pair."""


class Poly2:
    __slots__ = ("terms",)

    def __init__(self, terms: dict[tuple[int, int], Fraction | int] | None = None):
        self.terms: dict[tuple[int, int], Fraction] = {}
        for mono, coef in (terms or {}).items():
            if coef:
                self.terms[mono] = Fraction(coef)

    @classmethod
    def const(cls, c) -> "Poly2":
        return cls({(0, 0): c})

    def __eq__(self, other):
        if not isinstance(other, Poly2):
            other = Poly2.const(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        if not self.terms:
            return "Poly2(0)"
        parts = []
        for (i, j), c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(s for s in (f"X^{i}" if i else "", f"Y^{j}" if j else "") if s)
            parts.append(f"({c})" + (f"*{mono}" if mono else ""))
        return "Poly2(" + " + ".join(parts) + ")"

    def _coerce(self, other) -> "Poly2":
        return other if isinstance(other, Poly2) else Poly2.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly2(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly2({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out: dict[tuple[int, int], Fraction] = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                m = (i1 + i2, j1 + j2)
                out[m] = out.get(m, 0) + c1 * c2
        return Poly2(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        result, base = Poly2.const(1), self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    @property
    def total_degree(self) -> int:
        return max((i + j for i, j in self.terms), default=-1)

    def degree(self, var: int) -> int:
        """Degree in X (var=0) or Y (var=1); -1 for the zero polynomial."""
        return max((m[var] for m in self.terms), default=-1)

    @property
    def is_constant(self) -> bool:
        return all(m == (0, 0) for m in self.terms)

    @property
    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.terms.values())

    def __call__(self, x, y):
        if isinstance(x, int) and isinstance(y, int) and self.is_integral:
            return sum(int(c) * x**i * y**j for (i, j), c in self.terms.items())
        return sum(c * x**i * y**j for (i, j), c in self.terms.items())

    def diff(self, var: int) -> "Poly2":
        out = {}
        for (i, j), c in self.terms.items():
            k = (i, j)[var]
            if k:
                out[(i - 1, j) if var == 0 else (i, j - 1)] = c * k
        return Poly2(out)

    def divmod_exact(self, divisor: "Poly2") -> tuple["Poly2", "Poly2"]:
        """Division by ``divisor`` in Q[X, Y] w.r.t. lex order X > Y.

        The remainder is zero exactly when ``divisor`` divides ``self``.
        """
        if not divisor:
            raise ZeroDivisionError("division by zero polynomial")
        lead = max(divisor.terms)
        lc = divisor.terms[lead]
        quo: dict[tuple[int, int], Fraction] = {}
        rem = Poly2(self.terms)
        out_rem: dict[tuple[int, int], Fraction] = {}
        while rem.terms:
            m = max(rem.terms)
            c = rem.terms[m]
            if m[0] >= lead[0] and m[1] >= lead[1]:
                shift = (m[0] - lead[0], m[1] - lead[1])
                k = c / lc
                quo[shift] = quo.get(shift, 0) + k
                rem = rem - Poly2({shift: k}) * divisor
            else:
                out_rem[m] = c
                del rem.terms[m]
        return Poly2(quo), Poly2(out_rem)

    def normalized(self) -> "Poly2":
        """Scale so the lex-leading coefficient (X before Y) is 1."""
        if not self.terms:
            return self
        lc = self.terms[max(self.terms)]
        return Poly2({m: c / lc for m, c in self.terms.items()})


X = Poly2({(1, 0): 1})
Y = Poly2({(0, 1): 1})


# Univariate integer polynomials in Y: tuples of ints, lowest degree first.

def _up_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _up_mul(a, b) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _up_sub(a, b) -> list[int]:
    n = max(len(a), len(b))
    return _up_trim([(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)])


def _up_content(a) -> int:
    g = 0
    for x in a:
        g = math.gcd(g, x)
    return g


def _up_primitive(a) -> list[int]:
    if not a:
        return []
    g = _up_content(a)
    if a[-1] < 0:
        g = -g
    return [x // g for x in a]


def _up_prem(a, b) -> list[int]:
    r = list(a)
    lb = b[-1]
    db = len(b) - 1
    while len(r) - 1 >= db and r:
        lr = r[-1]
        shift = len(r) - 1 - db
        r = [x * lb for x in r]
        for i, y in enumerate(b):
            r[i + shift] -= lr * y
        _up_trim(r)
    return r


def _up_gcd(a, b) -> list[int]:
    """Primitive gcd in Z[Y], positive leading coefficient."""
    a, b = _up_trim(list(a)), _up_trim(list(b))
    if not a or not b:
        a = a or b
        return [-x for x in a] if a and a[-1] < 0 else a
    c = math.gcd(_up_content(a), _up_content(b))
    a, b = _up_primitive(a), _up_primitive(b)
    if len(a) < len(b):
        a, b = b, a
    while b:
        r = _up_prem(a, b)
        a, b = b, _up_primitive(r)
    return [c * x for x in _up_primitive(a)]


def _up_divexact(a, b) -> list[int]:
    a = list(a)
    db = len(b) - 1
    q = [0] * max(len(a) - db, 0)
    for k in range(len(a) - 1 - db, -1, -1):
        coef, rem = divmod(a[k + db], b[-1])
        if rem:
            raise ArithmeticError("inexact division in Z[Y]")
        q[k] = coef
        if coef:
            for i, y in enumerate(b):
                a[k + i] -= coef * y
    if any(a[:db]):
        raise ArithmeticError("inexact division in Z[Y]")
    return _up_trim(q)


# Bivariate integer polynomials as lists over X-degree of Z[Y] coefficients.

def _to_zyx(f: Poly2) -> list[list[int]]:
    den = 1
    for c in f.terms.values():
        den = math.lcm(den, c.denominator)
    dx = f.degree(0)
    out = [[] for _ in range(dx + 1)]
    for (i, j), c in f.terms.items():
        row = out[i]
        if len(row) <= j:
            row.extend([0] * (j + 1 - len(row)))
        row[j] = int(c * den)
    return [_up_trim(r) for r in out]


def _from_zyx(F: list[list[int]]) -> Poly2:
    return Poly2({(i, j): c for i, row in enumerate(F) for j, c in enumerate(row) if c})


def _bp_trim(F):
    while F and not F[-1]:
        F.pop()
    return F


def _bp_content(F) -> list[int]:
    g: list[int] = []
    for row in F:
        if row:
            g = _up_gcd(g, row)
            if len(g) == 1 and abs(g[0]) == 1:
                break
    return g


def _bp_primitive(F):
    F = _bp_trim([list(r) for r in F])
    if not F:
        return F
    c = _bp_content(F)
    if len(c) != 1 or abs(c[0]) != 1:
        F = [_up_divexact(r, c) if r else [] for r in F]
    if F[-1][-1] < 0:
        F = [[-x for x in r] for r in F]
    return F


def _bp_prem(F, G):
    R = [list(r) for r in F]
    lg = G[-1]
    dg = len(G) - 1
    while R and len(R) - 1 >= dg:
        lr = R[-1]
        shift = len(R) - 1 - dg
        R = [_up_mul(r, lg) for r in R]
        for i, row in enumerate(G):
            R[i + shift] = _up_sub(R[i + shift], _up_mul(lr, row))
        _bp_trim(R)
    return R


_MODULUS = (1 << 61) - 1


def _mp_trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _mp_gcd_degree(a: list[int], b: list[int], P: int) -> int:
    """Degree of gcd(a, b) in F_P[X]."""
    a, b = _mp_trim(list(a)), _mp_trim(list(b))
    while b:
        inv = pow(b[-1], -1, P)
        db = len(b) - 1
        while len(a) - 1 >= db and a:
            k = a[-1] * inv % P
            shift = len(a) - 1 - db
            for i, y in enumerate(b):
                a[i + shift] = (a[i + shift] - k * y) % P
            _mp_trim(a)
        a, b = b, a
    return len(a) - 1


def _specialize(F, y0: int, P: int) -> list[int]:
    out = []
    for row in F:
        acc = 0
        for c in reversed(row):
            acc = (acc * y0 + c) % P
        out.append(acc)
    return out


def _coprime_by_specialization(F, G, tries: int = 4) -> bool:
    """True only if the primitive polynomials F, G in Z[Y][X] are coprime.

    If gcd(F, G) had positive X-degree, its image under Y -> y0 (mod P)
    would keep that degree whenever lc_X(F)(y0) is a unit mod P, so a
    trivial specialized gcd rules it out. False means "undecided".
    """
    P = _MODULUS
    for y0 in range(2, 2 + 3 * tries, 3):
        Fs, Gs = _specialize(F, y0, P), _specialize(G, y0, P)
        if Fs[-1] == 0 or Gs[-1] == 0:
            continue
        if _mp_gcd_degree(Fs, Gs, P) == 0:
            return True
    return False


def gcd2(f: Poly2, g: Poly2) -> Poly2:
    """Greatest common divisor in Q[X, Y], normalized by ``Poly2.normalized``."""
    if not f and not g:
        raise ValueError("gcd2 of two zero polynomials")
    if not f:
        return g.normalized()
    if not g:
        return f.normalized()
    F, G = _to_zyx(f), _to_zyx(g)
    cont = _up_gcd(_bp_content(F), _bp_content(G))
    F, G = _bp_primitive(F), _bp_primitive(G)
    if len(F) < len(G):
        F, G = G, F
    if len(G) > 1 and _coprime_by_specialization(F, G):
        G = [[1]]
    while len(G) > 1:
        R = _bp_prem(F, G)
        F, G = G, _bp_primitive(R)
        if not G:
            break
    # G empty: F is the gcd of primitive parts; G constant in X: primitive parts coprime
    pp = F if not G else [[1]]
    result = _from_zyx([_up_mul(r, cont) for r in pp])
    return result.normalized()


def is_squarefree_poly(f: Poly2) -> bool:
    """Squarefree in Q[X, Y] iff gcd(f, df/dX, df/dY) is constant."""
    if not f:
        return False
    common = gcd2(f, f.diff(0))
    if common.is_constant:
        return True
    return gcd2(common, f.diff(1)).is_constant


def family_poly(p: int, q: int) -> Poly2:
    g = sum((X**i * Y ** (p - 1 - i) for i in range(p)), Poly2())
    qp = q**p
    return 2 * (X**p + Y**p) * qp - (X - Y) ** 2 * (qp * qp) - g * g


def check_lemma31(p: int, q: int) -> bool:
    if p < 5 or not is_probable_prime(p):
        raise ValueError(f"p = {p} must be a prime >= 5")
    if q < 5 or not is_probable_prime(q):
        raise ValueError(f"q = {q} must be a prime >= 5")
    return is_squarefree_poly(family_poly(p, q))


def _residue_tables(f: Poly2, m: int) -> list[list[int]]:
    if not f.is_integral:
        raise ValueError("count_c_ell needs integer coefficients")
    dx, dy = f.degree(0), f.degree(1)
    table = [[0] * (dy + 1) for _ in range(dx + 1)]
    for (i, j), c in f.terms.items():
        table[i][j] = int(c) % m
    return table


def _row_values(table: list[list[int]], m: int, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """F(x, y) mod m on the grid ys x xs (Horner in both variables)."""
    coeffs = []
    for row in table:
        acc = np.zeros_like(ys)
        for c in reversed(row):
            acc = (acc * ys + c) % m
        coeffs.append(acc[:, None])
    val = np.zeros((ys.size, xs.size), dtype=np.int64)
    for cx in reversed(coeffs):
        val = (val * xs[None, :] + cx) % m
    return val


def count_c_ell(f: Poly2, ell: int, max_ell: int = MAX_EXHAUSTIVE_ELL, block: int = 1 << 20) -> int:
    """Number of (x, y) in (Z/l^2)^2 with f(x, y) = 0 mod l^2, by exhaustion."""
    if ell > max_ell:
        raise BudgetError(f"l = {ell} exceeds the exhaustive cap {max_ell}")
    m = ell * ell
    table = _residue_tables(f, m)
    xs = np.arange(m, dtype=np.int64)
    rows = max(1, block // m)
    total = 0
    for y0 in range(0, m, rows):
        ys = np.arange(y0, min(m, y0 + rows), dtype=np.int64)
        total += int(np.count_nonzero(_row_values(table, m, ys, xs) == 0))
    return total


def check_lemma32(p: int, q: int, ell: int, block: int = 1 << 16) -> tuple[int, int] | None:
    """First residue pair (a, b) mod l^2 with l^2 not dividing f_q(a, b).

    Returns None only if no such pair exists, which would mean every value
    of f_q is divisible by l^2.
    """
    if q <= p:
        raise ValueError(f"requires q > p, got p = {p}, q = {q}")
    f = family_poly(p, q)
    m = ell * ell
    table = _residue_tables(f, m)
    xs = np.arange(m, dtype=np.int64)
    rows = max(1, block // m)
    for y0 in range(0, m, rows):
        ys = np.arange(y0, min(m, y0 + rows), dtype=np.int64)
        vals = _row_values(table, m, ys, xs)
        hit = np.argwhere(vals != 0)
        if hit.size:
            r, c = hit[0]
            return int(xs[c]), int(ys[r])
    return None


@dataclass(frozen=True)
class DensityEstimate:
    """Truncated Euler product with a heuristic tail factor.

    ``partial_product`` is exact. ``tail_lower`` bounds the primes beyond
    the truncation assuming c_l <= tail_constant * l^2, a constant that is
    estimated, not proven; treat the lower end of the interval accordingly.
    """

    truncation: int
    partial_product: Fraction
    tail_lower: Fraction
    tail_constant: Fraction
    c_values: tuple[tuple[int, int], ...]

    @property
    def interval(self) -> tuple[Fraction, Fraction]:
        return self.partial_product * self.tail_lower, self.partial_product


def _tail_lower(tail_constant: Fraction, L: int) -> Fraction:
    # 1 - sum_{l > L} C/l^2 with the sum over odd n >= m bounded by 1/m^2 + 1/(2(m-1))
    m = L + 1 if L % 2 == 0 else L + 2
    bound = Fraction(1, m * m) + Fraction(1, 2 * (m - 1))
    return min(Fraction(1), max(Fraction(0), 1 - tail_constant * bound))


def euler_product(
    p: int,
    q: int,
    L: int,
    tail_constant: Fraction | None = None,
    *,
    poly: Poly2 | None = None,
) -> DensityEstimate:
    """prod_{l <= L} (1 - c_l / l^4) for f_q (or for ``poly`` when given).

    Without an explicit ``tail_constant`` it is taken as twice the largest
    c_l / l^2 seen up to L.
    """
    if poly is None:
        if q <= p:
            raise ValueError(f"requires q > p, got p = {p}, q = {q}")
        poly = family_poly(p, q)
    c_values = []
    prod = Fraction(1)
    for ell in primes_up_to(L):
        c = count_c_ell(poly, ell)
        if c == ell**4:
            raise Lemma32Contradiction(f"l = {ell}: every residue pair is a zero mod l^2")
        c_values.append((ell, c))
        prod *= 1 - Fraction(c, ell**4)
    if tail_constant is None:
        tail_constant = 2 * max((Fraction(c, ell * ell) for ell, c in c_values), default=Fraction(0))
    tail_constant = Fraction(tail_constant)
    return DensityEstimate(L, prod, _tail_lower(tail_constant, L), tail_constant, tuple(c_values))


@dataclass(frozen=True)
class DensityCount:
    """Tally of squarefree verdicts of |f_q| over a box of (a, b) pairs."""

    total: int
    squarefree: int
    not_squarefree: int
    up_to_bound: int
    residue_excluded: int

    @property
    def exact(self) -> int:
        return self.squarefree + self.not_squarefree

    @property
    def fraction(self) -> Fraction:
        """Squarefree share among points with an exact verdict."""
        return Fraction(self.squarefree, self.exact) if self.exact else Fraction(0)


def _classify_value(v: int, trial_bound: int, effort: int) -> Verdict:
    if v == 0:
        return Verdict.NOT_SQUAREFREE
    return classify_squarefree(abs(v), trial_bound, effort).verdict


def empirical_density(
    p: int,
    q: int,
    box: Iterable[tuple[int, int]] | tuple[range, range],
    trial_bound: int = DEFAULT_TRIAL_BOUND,
    effort: int = DEFAULT_EFFORT,
) -> DensityCount:
    """Share of box points with |f_q(a, b)| squarefree (exact verdicts only).

    ``residue_excluded`` counts points whose value fails -D = 1 mod 4; they
    stay in the denominator because the density concerns all values.
    """
    if isinstance(box, tuple) and len(box) == 2 and all(isinstance(r, range) for r in box):
        points = ((a, b) for a in box[0] for b in box[1])
    else:
        points = box
    counts = {v: 0 for v in Verdict}
    total = excluded = 0
    for a, b in points:
        D = eval_f(p, q, a, b)
        total += 1
        if (-D) % 4 != 1:
            excluded += 1
        counts[_classify_value(D, trial_bound, effort)] += 1
    if total == 0:
        raise ValueError("empty box")
    return DensityCount(
        total,
        counts[Verdict.SQUAREFREE],
        counts[Verdict.NOT_SQUAREFREE],
        counts[Verdict.SQUAREFREE_UP_TO_BOUND],
        excluded,
    )
