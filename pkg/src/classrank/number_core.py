"""Exact integer utilities: primality, factoring, squarefree classification.

Everything here works on Python ints of arbitrary size and is free of
shared state, so functions may be called from worker processes freely.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "Verdict",
    "SquarefreeStatus",
    "PartialFactorization",
    "is_probable_prime",
    "next_prime",
    "primes_up_to",
    "pollard_brent",
    "factorize",
    "classify_squarefree",
    "divisor_count",
    "DEFAULT_TRIAL_BOUND",
    "DEFAULT_EFFORT",
]

DEFAULT_TRIAL_BOUND = 10_000
# Iteration cap for each Pollard-Brent attempt on a cofactor.
DEFAULT_EFFORT = 200_000

# Bases 2..41 are a deterministic Miller-Rabin witness set for n < 3.3e24.
_DETERMINISTIC_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_DETERMINISTIC_LIMIT = 3_317_044_064_679_887_385_961_981
_RANDOM_ROUNDS = 64

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


class Verdict(str, enum.Enum):
    SQUAREFREE = "Squarefree"
    NOT_SQUAREFREE = "NotSquarefree"
    SQUAREFREE_UP_TO_BOUND = "SquarefreeUpToBound"


@dataclass(frozen=True)
class PartialFactorization:
    """``n = prod(prime**exp) * cofactor`` with ``cofactor == 1`` when complete."""

    prime_powers: tuple[tuple[int, int], ...]
    cofactor: int = 1

    @property
    def complete(self) -> bool:
        return self.cofactor == 1

    def value(self) -> int:
        n = self.cofactor
        for prime, exp in self.prime_powers:
            n *= prime**exp
        return n


@dataclass(frozen=True)
class SquarefreeStatus:
    verdict: Verdict
    bound: int
    cofactor_checked: bool
    witness: int | None = None
    factorization: PartialFactorization | None = field(default=None, compare=False)

    @property
    def is_squarefree(self) -> bool:
        return self.verdict is Verdict.SQUAREFREE

    @property
    def at_least_probable(self) -> bool:
        return self.verdict is not Verdict.NOT_SQUAREFREE


def _miller_rabin(n: int, base: int, d: int, s: int) -> bool:
    x = pow(base, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin test, deterministic below 3.3e24.

    Above that threshold 64 rounds with bases drawn from a generator seeded
    by ``n`` keep the answer reproducible; composites are never reported
    prime below the threshold and with probability < 2**-128 above it.
    """
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if n < _DETERMINISTIC_LIMIT:
        return all(_miller_rabin(n, a, d, s) for a in _DETERMINISTIC_BASES)
    rng = random.Random(n)
    return all(_miller_rabin(n, rng.randrange(2, n - 1), d, s) for _ in range(_RANDOM_ROUNDS))


def next_prime(n: int | float | Fraction) -> int:
    """Least prime >= ceil(n); 2 for anything below 2."""
    if n < 2:
        return 2
    m = math.ceil(n)
    if m == 2:
        return 2
    if m % 2 == 0:
        m += 1
    while not is_probable_prime(m):
        m += 2
    return m


@lru_cache(maxsize=8)
def primes_up_to(limit: int) -> tuple[int, ...]:
    if limit < 2:
        return ()
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, limit + 1, i)))
    return tuple(i for i, flag in enumerate(sieve) if flag)


@lru_cache(maxsize=8)
def _primorial(limit: int) -> int:
    return math.prod(primes_up_to(limit))


def pollard_brent(n: int, max_iter: int = DEFAULT_EFFORT, seed: int = 1) -> int | None:
    """Return a nontrivial factor of composite odd ``n``, or None if the budget runs out."""
    if n % 2 == 0:
        return 2
    rng = random.Random(seed ^ n)
    m = 128
    spent = 0
    while spent < max_iter:
        y, c = rng.randrange(1, n), rng.randrange(1, n)
        g, r, q = 1, 1, 1
        x = ys = y
        while g == 1 and spent < max_iter:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            spent += r
            r *= 2
        if g == n:
            # Batched gcd overshot; step back one iteration at a time.
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if 1 < g < n:
            return g
    return None


def _split_cofactor(n: int, effort: int) -> tuple[dict[int, int], int]:
    """Factor ``n`` (no small prime factors) as far as the effort budget allows.

    Returns the primes found with exponents and an unresolved composite part.
    """
    found: dict[int, int] = {}
    unresolved = 1
    stack = [n]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_probable_prime(m):
            found[m] = found.get(m, 0) + 1
            continue
        r = math.isqrt(m)
        if r * r == m:
            stack.extend((r, r))
            continue
        d = pollard_brent(m, effort)
        if d is None:
            unresolved *= m
        else:
            stack.extend((d, m // d))
    return found, unresolved


def factorize(n: int, trial_bound: int = DEFAULT_TRIAL_BOUND, effort: int = DEFAULT_EFFORT) -> PartialFactorization:
    """Trial division up to ``trial_bound``, then Pollard-Brent on what remains."""
    if n < 1:
        raise ValueError(f"factorize expects a positive integer, got {n}")
    powers: dict[int, int] = {}
    m = n
    g = math.gcd(m, _primorial(trial_bound))
    if g > 1:
        for prime in primes_up_to(trial_bound):
            if g % prime:
                continue
            e = 0
            while m % prime == 0:
                m //= prime
                e += 1
            powers[prime] = e
            g //= prime
            if g == 1:
                break
    if m > 1:
        if m < trial_bound * trial_bound:
            powers[m] = powers.get(m, 0) + 1
            m = 1
        else:
            found, m = _split_cofactor(m, effort)
            for prime, e in found.items():
                powers[prime] = powers.get(prime, 0) + e
    return PartialFactorization(tuple(sorted(powers.items())), m)


def classify_squarefree(
    n: int, trial_bound: int = DEFAULT_TRIAL_BOUND, effort: int = DEFAULT_EFFORT
) -> SquarefreeStatus:
    """Three-valued squarefree test.

    Squarefree comes with a complete factorization; NotSquarefree with a
    witness ``w`` such that ``w**2`` divides ``n`` (a prime whenever one is
    known); SquarefreeUpToBound means no prime up to ``trial_bound`` has its
    square dividing ``n`` and the leftover cofactor is not a perfect square,
    but the cofactor could not be split within ``effort``.
    """
    if n < 1:
        raise ValueError(f"classify_squarefree expects n >= 1, got {n}")
    if trial_bound < 2:
        raise ValueError("trial_bound must be >= 2")
    g = math.gcd(n, _primorial(trial_bound))
    if g > 1 and math.gcd(n // g, g) > 1:
        h = math.gcd(n // g, g)
        witness = next(prime for prime in primes_up_to(trial_bound) if h % prime == 0)
        return SquarefreeStatus(Verdict.NOT_SQUAREFREE, trial_bound, False, witness)
    fac = factorize(n, trial_bound, effort)
    for prime, e in fac.prime_powers:
        if e > 1:
            return SquarefreeStatus(Verdict.NOT_SQUAREFREE, trial_bound, True, prime, fac)
    if fac.complete:
        return SquarefreeStatus(Verdict.SQUAREFREE, trial_bound, False, None, fac)
    c = fac.cofactor
    r = math.isqrt(c)
    if r * r == c:
        return SquarefreeStatus(Verdict.NOT_SQUAREFREE, trial_bound, True, r, fac)
    return SquarefreeStatus(Verdict.SQUAREFREE_UP_TO_BOUND, trial_bound, True, None, fac)


def divisor_count(fac: PartialFactorization) -> int:
    if not fac.complete:
        raise ValueError("divisor_count needs a complete factorization (cofactor == 1)")
    return math.prod(e + 1 for _, e in fac.prime_powers)
