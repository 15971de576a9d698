"""Independent reference implementations used only by the tests.

Nothing here imports the package's arithmetic; agreement with these is
evidence, not tautology.
"""

from __future__ import annotations

import math

import numpy as np


def squarefree_sieve(limit: int) -> np.ndarray:
    """mu^2(n) for 0 <= n <= limit as a boolean array (index 0 False)."""
    ok = np.ones(limit + 1, dtype=bool)
    ok[0] = False
    k = 2
    while k * k <= limit:
        ok[k * k :: k * k] = False
        k += 1
    return ok


def negative_fundamental_discriminants(limit: int) -> list[int]:
    """All fundamental d < 0 with |d| <= limit, by the textbook definition."""
    sf = squarefree_sieve(limit)
    out = []
    for D in range(3, limit + 1):
        d = -D
        if d % 4 == 1 and sf[D]:
            out.append(d)
        elif D % 4 == 0 and (d // 4) % 4 in (2, 3) and sf[D // 4]:
            out.append(d)
    return out


def kronecker(d: int, n: int) -> int:
    """Kronecker symbol (d/n) for n >= 1."""
    if n == 1:
        return 1
    result = 1
    while n % 2 == 0:
        n //= 2
        if d % 2 == 0:
            return 0
        if d % 8 in (3, 5):
            result = -result
    # Jacobi symbol (d/n), n odd
    a = d % n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def class_number_formula(d: int) -> int:
    """Dirichlet's class number formula for a fundamental discriminant d < 0."""
    if d == -3:
        return 1
    if d == -4:
        return 1
    D = -d
    s = sum(kronecker(d, a) * a for a in range(1, D))
    h, r = divmod(-s, D)
    assert r == 0
    return h


def brute_reduce(a: int, b: int, c: int) -> tuple[int, int, int]:
    """Textbook reduction of a positive definite form."""
    while True:
        if a > c:
            a, b, c = c, -b, a
            continue
        if abs(b) > a:
            # translate b into (-a, a]
            k = (a - b) // (2 * a)
            b2 = b + 2 * a * k
            c = (b2 * b2 - (b * b - 4 * a * c)) // (4 * a)
            b = b2
            continue
        if b == -a or (a == c and b < 0):
            b = -b
        return a, b, c


def brute_class_number(d: int) -> int:
    """Number of reduced primitive forms, by a plain double loop."""
    h = 0
    a = 1
    while 3 * a * a <= -d:
        for b in range(-a + 1, a + 1):
            if (b * b - d) % (4 * a):
                continue
            c = (b * b - d) // (4 * a)
            if c < a or (a == c and b < 0):
                continue
            if math.gcd(math.gcd(a, b), c) == 1:
                h += 1
        a += 1
    return h


def _hnf2(gens: list[tuple[int, int]]) -> tuple[int, int, int]:
    """Basis (x0, 0), (x1, y1) of the Z-lattice spanned by ``gens`` in Z^2."""
    rows = [list(g) for g in gens if g != (0, 0)]
    # gcd on the second coordinate
    while sum(1 for r in rows if r[1]) > 1:
        rows.sort(key=lambda r: (r[1] == 0, abs(r[1])))
        piv = rows[0]
        for r in rows[1:]:
            if r[1]:
                k = r[1] // piv[1]
                r[0] -= k * piv[0]
                r[1] -= k * piv[1]
    lead = next(r for r in rows if r[1])
    if lead[1] < 0:
        lead = [-lead[0], -lead[1]]
    x0 = 0
    for r in rows:
        if r[1] == 0:
            x0 = math.gcd(x0, r[0])
    return x0, lead[0] % x0, lead[1]


def ideal_compose(f, g) -> tuple[int, int, int]:
    """Compose two primitive forms by multiplying their ideals as lattices.

    The form (a, b, c) corresponds to the lattice a Z + (-b + sqrt d)/2 Z;
    elements (x + y sqrt d)/2 are stored as integer pairs (x, y).
    """
    a1, b1, c1 = f
    a2, b2, c2 = g
    d = b1 * b1 - 4 * a1 * c1
    assert d == b2 * b2 - 4 * a2 * c2
    gens = [
        (2 * a1 * a2, 0),
        (-a1 * b2, a1),
        (-a2 * b1, a2),
        ((b1 * b2 + d) // 2, -(b1 + b2) // 2),
    ]
    x0, x1, n = _hnf2(gens)
    # lattice = n * [A, (-B + sqrt d)/2]; in (x, y) coords the basis is (2nA, 0), (-nB, n)
    A = x0 // (2 * n)
    assert x0 % (2 * n) == 0 and x1 % n == 0
    B = (-x1 // n) % (2 * A)
    C = (B * B - d) // (4 * A)
    assert B * B - 4 * A * C == d
    return brute_reduce(A, B, C)
