"""The two-parameter family of discriminants and its witness forms.

For a prime ``p >= 5``, a prime ``q`` and positive integers ``a, b``::

    g(a, b)   = (a^p - b^p) / (a - b)
    f_q(a, b) = 2 (a^p + b^p) q^p - (a - b)^2 q^(2p) - g(a, b)^2

and with ``X1 = g + (a - b) q^p``, ``Y1 = a q``, ``X2 = g - (a - b) q^p``,
``Y2 = b q`` one has ``Xj^2 - 4 Yj^p = -f_q(a, b)``. The forms
``(Yj, Xj, Yj^(p-1))`` of discriminant ``-f_q(a, b)`` have p-th powers in
the principal class; they are the candidates for a (Z/p)^2 subgroup.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .number_core import (
    DEFAULT_EFFORT,
    DEFAULT_TRIAL_BOUND,
    SquarefreeStatus,
    Verdict,
    classify_squarefree,
)
from .quadforms import QuadForm

__all__ = [
    "Mode",
    "FamilyPoint",
    "HypothesisReport",
    "IdentityViolation",
    "eval_g",
    "eval_f",
    "make_point",
    "window_bounds",
    "in_window",
    "strict_window",
    "check_hypotheses",
    "witness_forms",
    "positive_region_bound",
]


class Mode(str, enum.Enum):
    STRICT = "strict"
    RELAXED = "relaxed"


class IdentityViolation(AssertionError):
    """Xj^2 - 4 Yj^p != -D; only an arithmetic bug can cause this."""


def eval_g(a: int, b: int, p: int) -> int:
    """sum_{i<p} a^i b^(p-1-i); equals p a^(p-1) when a == b."""
    if a == b:
        return p * a ** (p - 1)
    return (a**p - b**p) // (a - b)


def eval_f(p: int, q: int, a: int, b: int) -> int:
    g = eval_g(a, b, p)
    qp = q**p
    return 2 * (a**p + b**p) * qp - (a - b) ** 2 * qp * qp - g * g


@dataclass(frozen=True)
class FamilyPoint:
    p: int
    q: int
    a: int
    b: int
    D: int
    g: int
    X1: int
    Y1: int
    X2: int
    Y2: int

    @property
    def degenerate(self) -> bool:
        """a == b makes both witnesses coincide, so rank 2 cannot be certified."""
        return self.a == self.b


def make_point(p: int, q: int, a: int, b: int) -> FamilyPoint:
    g = eval_g(a, b, p)
    D = eval_f(p, q, a, b)
    shift = (a - b) * q**p
    X1, Y1, X2, Y2 = g + shift, a * q, g - shift, b * q
    for X, Y in ((X1, Y1), (X2, Y2)):
        if X * X - 4 * Y**p != -D:
            raise IdentityViolation(f"X^2 - 4Y^p != -D at (p, q, a, b) = {(p, q, a, b)}")
    return FamilyPoint(p, q, a, b, D, g, X1, Y1, X2, Y2)


def window_bounds(p: int) -> tuple[int, int, int, int]:
    """Integers (lo_num, lo_den, hi_num, hi_den) describing the strict window.

    a lies in the window iff  (lo_den * a)^(p-2) > lo_num^(p-2) * q^p  and
    (hi_den * a)^(p-2) < hi_num^(p-2) * q^p, i.e.
    q^(p/(p-2)) / (2p) < a < (1/(2p) + 1/(2^p p^p)) q^(p/(p-2)).
    """
    return 1, 2 * p, 2 ** (p - 1) * p ** (p - 1) + 1, 2**p * p**p


def in_window(p: int, q: int, a: int) -> bool:
    lo_num, lo_den, hi_num, hi_den = window_bounds(p)
    qp, e = q**p, p - 2
    return (lo_den * a) ** e > lo_num**e * qp and (hi_den * a) ** e < hi_num**e * qp


def _iroot_floor(n: int, k: int) -> int:
    """floor(n^(1/k)) for n >= 0."""
    if n < 2:
        return n
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x**k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def strict_window(p: int, q: int) -> range:
    """All integers a strictly inside the window (often empty for small q)."""
    lo_num, lo_den, hi_num, hi_den = window_bounds(p)
    qp, e = q**p, p - 2
    lo = _iroot_floor(lo_num**e * qp, e) // lo_den + 1
    hi = _iroot_floor(hi_num**e * qp - 1, e) // hi_den + 1
    return range(lo, max(lo, hi))


def positive_region_bound(p: int, q: int) -> int:
    """Every (a, b) with f_q(a, b) > 0 has max(a, b) <= this bound.

    g >= max(a, b)^(p-1) while 2 (a^p + b^p) q^p <= 4 max^p q^p, so a
    positive value forces max^(p-2) < 4 q^p.
    """
    return _iroot_floor(4 * q**p, p - 2) + 1


@dataclass(frozen=True)
class HypothesisReport:
    in_window: bool
    size_ok: bool
    positive: bool
    residue_ok: bool
    coprime_ok: bool
    squarefree: SquarefreeStatus | None
    mode: Mode

    @property
    def accepted(self) -> bool:
        relaxed = (
            self.positive
            and self.residue_ok
            and self.coprime_ok
            and self.squarefree is not None
            and self.squarefree.at_least_probable
        )
        if self.mode is Mode.RELAXED:
            return relaxed
        return relaxed and self.in_window and self.size_ok and self.squarefree.verdict is Verdict.SQUAREFREE

    @property
    def failures(self) -> list[str]:
        names = ["positive", "residue_ok", "coprime_ok"]
        if self.mode is Mode.STRICT:
            names = ["in_window", "size_ok"] + names
        out = [name for name in names if not getattr(self, name)]
        if self.squarefree is None or not self.squarefree.at_least_probable:
            out.append("squarefree")
        elif self.mode is Mode.STRICT and self.squarefree.verdict is not Verdict.SQUAREFREE:
            out.append("squarefree (exact)")
        return out


def check_hypotheses(
    pt: FamilyPoint,
    mode: Mode | str = Mode.RELAXED,
    trial_bound: int = DEFAULT_TRIAL_BOUND,
    effort: int = DEFAULT_EFFORT,
    squarefree: SquarefreeStatus | None = None,
) -> HypothesisReport:
    """Evaluate every hypothesis; ``squarefree`` may carry a cached verdict for D."""
    mode = Mode(mode)
    p, q, a, b, D = pt.p, pt.q, pt.a, pt.b, pt.D
    window = in_window(p, q, a) and in_window(p, q, b)
    size_ok = D >= 4 * a * b ** ((p - 1) // 2) * q ** ((p + 1) // 2)
    positive = D > 0
    residue_ok = (-D) % 4 == 1
    coprime_ok = math.gcd(pt.X1, pt.Y1) == 1 and math.gcd(pt.X2, pt.Y2) == 1
    sf = None
    if positive:
        sf = squarefree if squarefree is not None else classify_squarefree(D, trial_bound, effort)
    return HypothesisReport(window, size_ok, positive, residue_ok, coprime_ok, sf, mode)


def witness_forms(pt: FamilyPoint) -> tuple[QuadForm, QuadForm]:
    """The forms (Yj, Xj, Yj^(p-1)), both of discriminant -D, unreduced."""
    if pt.D <= 0:
        raise ValueError(f"D = {pt.D} is not positive")
    if (-pt.D) % 4 != 1:
        raise ValueError(f"-D = {-pt.D} is not 1 mod 4")
    for j, (X, Y) in enumerate(((pt.X1, pt.Y1), (pt.X2, pt.Y2)), start=1):
        if math.gcd(X, Y) != 1:
            raise ValueError(f"gcd(X{j}, Y{j}) = {math.gcd(X, Y)} is not 1")
    e = pt.p - 1
    return QuadForm(pt.Y1, pt.X1, pt.Y1**e), QuadForm(pt.Y2, pt.X2, pt.Y2**e)
