"""Box scans over the family: multiplicities, Cauchy-Schwarz counting, certificates.

A scan evaluates ``D = f_q(a, b)`` on every cell of a box, groups cells by
``D`` and records

* ``S(D)``, the number of cells giving ``D``;
* ``S1 = sum S(D)`` and ``S2 = sum S(D)^2`` over squarefree ``D``;
* the number of distinct squarefree ``D``, which Cauchy-Schwarz bounds
  below by ``ceil(S1^2 / S2)``;
* one rank-2 certificate attempt per distinct accepted ``D``.

Campaigns repeat scans for a growing bound ``X`` and fit the growth
exponent of the certified count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .family import (
    FamilyPoint,
    Mode,
    check_hypotheses,
    eval_f,
    eval_g,
    make_point,
    positive_region_bound,
    strict_window,
    witness_forms,
)
from .number_core import (
    DEFAULT_EFFORT,
    DEFAULT_TRIAL_BOUND,
    SquarefreeStatus,
    Verdict,
    classify_squarefree,
    next_prime,
    primes_up_to,
)
from .quadforms import Rank2Certificate, verify_rank2

__all__ = [
    "Box",
    "ScanReport",
    "GrowthFit",
    "Campaign",
    "InternalConsistencyError",
    "select_q",
    "cs_lower_bound",
    "collision_quadruples",
    "run_scan",
    "growth_fit",
    "run_campaign",
    "default_workers",
    "strict_window_box",
]


class InternalConsistencyError(AssertionError):
    """An exact identity or inequality failed; indicates a bug, never bad input."""


def default_workers() -> int:
    return max(1, int(os.environ.get("CLASSRANK_WORKERS", "1")))


@dataclass(frozen=True)
class Box:
    """Inclusive rectangle ``[a_lo, a_hi] x [b_lo, b_hi]``, optionally without its diagonal."""

    a_lo: int
    a_hi: int
    b_lo: int
    b_hi: int
    skip_diagonal: bool = False

    @classmethod
    def parse(cls, text: str, skip_diagonal: bool = False) -> "Box":
        """Parse ``"A:B,C:D"`` into ``[A, B] x [C, D]``."""
        try:
            ra, rb = text.split(",")
            a_lo, a_hi = (int(x) for x in ra.split(":"))
            b_lo, b_hi = (int(x) for x in rb.split(":"))
        except ValueError as exc:
            raise ValueError(f"box must look like A:B,C:D, got {text!r}") from exc
        if a_lo > a_hi or b_lo > b_hi or min(a_lo, b_lo) < 1:
            raise ValueError(f"box bounds must be positive and ordered, got {text!r}")
        return cls(a_lo, a_hi, b_lo, b_hi, skip_diagonal)

    @classmethod
    def empty(cls) -> "Box":
        return cls(1, 0, 1, 0)

    def points(self) -> list[tuple[int, int]]:
        return [
            (a, b)
            for a in range(self.a_lo, self.a_hi + 1)
            for b in range(self.b_lo, self.b_hi + 1)
            if not (self.skip_diagonal and a == b)
        ]

    def to_dict(self) -> dict:
        return {
            "a": [self.a_lo, self.a_hi],
            "b": [self.b_lo, self.b_hi],
            "skip_diagonal": self.skip_diagonal,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Box":
        return cls(d["a"][0], d["a"][1], d["b"][0], d["b"][1], d["skip_diagonal"])


def select_q(p: int, X: float, constant: float = 1) -> int:
    """Smallest prime >= constant * X^((p-2)/(2p(p-1)))."""
    if X < 2:
        raise ValueError(f"X must be >= 2, got {X}")
    target = constant * math.exp(math.log(X) * (p - 2) / (2 * p * (p - 1)))
    nearest = round(target)
    if abs(target - nearest) <= 1e-9 * max(1.0, target):
        target = nearest
    return next_prime(target)


def cs_lower_bound(S1: int, S2: int) -> int:
    """ceil(S1^2 / S2): Cauchy-Schwarz lower bound on the number of distinct values."""
    if S2 == 0:
        if S1:
            raise InternalConsistencyError(f"S2 = 0 with S1 = {S1}")
        return 0
    return -(-S1 * S1 // S2)


def _x1(p: int, q: int, a: int, b: int) -> int:
    return eval_g(a, b, p) + (a - b) * q**p


def collision_quadruples(p: int, q: int, groups: dict[int, list[tuple[int, int]]]) -> list[tuple[int, int, int, int]]:
    """All unordered pairs of distinct cells sharing a value, each rechecked.

    The check is 4 q^p (a1^p - a2^p) = X1(a1, b1)^2 - X1(a2, b2)^2, which
    holds exactly when f_q(a1, b1) = f_q(a2, b2).
    """
    out = []
    qp4 = 4 * q**p
    for D in sorted(groups):
        for (a1, b1), (a2, b2) in combinations(groups[D], 2):
            lhs = qp4 * (a1**p - a2**p)
            rhs = _x1(p, q, a1, b1) ** 2 - _x1(p, q, a2, b2) ** 2
            if lhs != rhs:
                raise InternalConsistencyError(f"collision identity fails for {(a1, b1, a2, b2)} at D = {D}")
            out.append((a1, b1, a2, b2))
    return out


def _max_same_a_multiplicity(groups: dict[int, list[tuple[int, int]]]) -> int:
    """max over cells (a1, b1) of #{b2 != b1 : f(a1, b2) = f(a1, b1)}."""
    best = 0
    for cells in groups.values():
        by_a: dict[int, int] = {}
        for a, _ in cells:
            by_a[a] = by_a.get(a, 0) + 1
        best = max(best, max(by_a.values()) - 1)
    return best


@dataclass
class ScanReport:
    p: int
    q: int
    X: float | None
    box: Box
    mode: Mode
    S1: int = 0
    S2: int = 0
    S1_prime: int = 0
    S2_prime: int = 0
    distinct_squarefree: int = 0
    distinct_probable: int = 0
    cs_lower_bound: int = 0
    certified_rank2: int = 0
    collisions: list[tuple[int, int, int, int]] = field(default_factory=list)
    max_same_a_collisions: int = 0
    tallies: dict[str, int] = field(default_factory=dict)
    rows: list[dict] = field(default_factory=list)
    certificates: list[Rank2Certificate] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def certified_discriminants(self) -> list[int]:
        """Positive D (the certificate stores the form discriminant -D)."""
        return sorted(-c.discriminant for c in self.certificates if c.valid)

    def check_invariants(self) -> None:
        if self.distinct_squarefree < self.cs_lower_bound:
            raise InternalConsistencyError(
                f"distinct squarefree D = {self.distinct_squarefree} < Cauchy-Schwarz bound {self.cs_lower_bound}"
            )
        if self.S2 < self.S1 or self.S2_prime < self.S1_prime:
            raise InternalConsistencyError("S2 < S1")
        if self.certified_rank2 > self.distinct_squarefree + self.distinct_probable:
            raise InternalConsistencyError("more certified D than accepted D")

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "X": self.X,
            "box": self.box.to_dict(),
            "mode": self.mode.value,
            "S1": str(self.S1),
            "S2": str(self.S2),
            "S1_prime": str(self.S1_prime),
            "S2_prime": str(self.S2_prime),
            "distinct_squarefree": self.distinct_squarefree,
            "distinct_probable": self.distinct_probable,
            "cs_lower_bound": str(self.cs_lower_bound),
            "certified_rank2": self.certified_rank2,
            "collisions": [[str(x) for x in c] for c in self.collisions],
            "max_same_a_collisions": self.max_same_a_collisions,
            "tallies": dict(self.tallies),
            "rows": [
                {**row, "D": str(row["D"]), "a": str(row["a"]), "b": str(row["b"])} for row in self.rows
            ],
            "certificates": [c.to_dict() for c in self.certificates],
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScanReport":
        return cls(
            p=d["p"],
            q=d["q"],
            X=d["X"],
            box=Box.from_dict(d["box"]),
            mode=Mode(d["mode"]),
            S1=int(d["S1"]),
            S2=int(d["S2"]),
            S1_prime=int(d["S1_prime"]),
            S2_prime=int(d["S2_prime"]),
            distinct_squarefree=d["distinct_squarefree"],
            distinct_probable=d["distinct_probable"],
            cs_lower_bound=int(d["cs_lower_bound"]),
            certified_rank2=d["certified_rank2"],
            collisions=[tuple(int(x) for x in c) for c in d["collisions"]],
            max_same_a_collisions=d["max_same_a_collisions"],
            tallies=dict(d["tallies"]),
            rows=[{**row, "D": int(row["D"]), "a": int(row["a"]), "b": int(row["b"])} for row in d["rows"]],
            certificates=[Rank2Certificate.from_dict(c) for c in d["certificates"]],
            notes=list(d["notes"]),
        )


def _eval_chunk(args):
    p, q, cells = args
    return [eval_f(p, q, a, b) for a, b in cells]


def _classify_chunk(args):
    values, trial_bound, effort = args
    return [classify_squarefree(D, trial_bound, effort) for D in values]


def _certify_chunk(args):
    p, q, cells = args
    out = []
    for a, b in cells:
        f1, f2 = witness_forms(make_point(p, q, a, b))
        out.append(verify_rank2(p, f1, f2))
    return out


def _chunks(seq: list, n: int) -> list[list]:
    size = max(1, -(-len(seq) // n))
    return [seq[i : i + size] for i in range(0, len(seq), size)]


def _parallel(fn, payloads: list, workers: int) -> list:
    """Map ``fn`` over payloads, preserving order; results are concatenated lists."""
    if workers <= 1 or len(payloads) <= 1:
        results = [fn(x) for x in payloads]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, payloads))
    return [item for chunk in results for item in chunk]


def run_scan(
    p: int,
    q: int,
    box: Box,
    mode: Mode | str = Mode.RELAXED,
    trial_bound: int = DEFAULT_TRIAL_BOUND,
    effort: int = DEFAULT_EFFORT,
    workers: int | None = None,
    max_D: int | None = None,
    X: float | None = None,
) -> ScanReport:
    """Sweep every cell of ``box`` and assemble a ScanReport.

    Only positive values (and, if ``max_D`` is set, values up to it) enter
    the grouping. The output does not depend on ``workers``.
    """
    mode = Mode(mode)
    workers = default_workers() if workers is None else workers
    cells = box.points()
    report = ScanReport(p, q, X, box, mode)
    tallies = {"cells": len(cells), "nonpositive": 0, "above_bound": 0}

    values = _parallel(_eval_chunk, [(p, q, c) for c in _chunks(cells, 4 * workers)], workers)
    groups: dict[int, list[tuple[int, int]]] = {}
    for cell, D in zip(cells, values):
        if D <= 0:
            tallies["nonpositive"] += 1
        elif max_D is not None and D > max_D:
            tallies["above_bound"] += 1
        else:
            groups.setdefault(D, []).append(cell)
    distinct = sorted(groups)
    statuses = _parallel(
        _classify_chunk, [(c, trial_bound, effort) for c in _chunks(distinct, 4 * workers)], workers
    )
    verdicts: dict[int, SquarefreeStatus] = dict(zip(distinct, statuses))

    rejected: dict[str, int] = {}
    accepted: dict[int, list[tuple[int, int]]] = {}
    for D in distinct:
        status = verdicts[D]
        S = len(groups[D])
        if status.verdict is Verdict.SQUAREFREE:
            report.S1 += S
            report.S2 += S * S
            report.distinct_squarefree += 1
        elif status.verdict is Verdict.SQUAREFREE_UP_TO_BOUND:
            report.distinct_probable += 1
        if status.at_least_probable:
            report.S1_prime += S
            report.S2_prime += S * S
        for a, b in groups[D]:
            hyp = check_hypotheses(make_point(p, q, a, b), mode, trial_bound, effort, squarefree=status)
            if hyp.accepted:
                accepted.setdefault(D, []).append((a, b))
            else:
                for reason in hyp.failures:
                    rejected[reason] = rejected.get(reason, 0) + 1
    tallies.update({f"rejected_{k}": v for k, v in sorted(rejected.items())})
    tallies["accepted_cells"] = sum(len(v) for v in accepted.values())

    # one witness per accepted D: the smallest non-degenerate cell if there is one
    witnesses = [min(cs, key=lambda c: (c[0] == c[1], c)) for D, cs in sorted(accepted.items())]
    certs = _parallel(_certify_chunk, [(p, q, c) for c in _chunks(witnesses, 4 * workers)], workers)
    report.certificates = certs
    certified = {-c.discriminant for c in certs if c.valid}
    report.certified_rank2 = len(certified)

    report.collisions = collision_quadruples(p, q, groups)
    report.max_same_a_collisions = _max_same_a_multiplicity(groups)
    report.cs_lower_bound = cs_lower_bound(report.S1, report.S2)
    report.tallies = tallies
    witness_of = dict(zip(sorted(accepted), witnesses))
    for D in distinct:
        a, b = witness_of.get(D, groups[D][0])
        report.rows.append(
            {
                "D": D,
                "a": a,
                "b": b,
                "multiplicity": len(groups[D]),
                "squarefree_verdict": verdicts[D].verdict.value,
                "certified": D in certified,
            }
        )
    if mode is Mode.RELAXED and report.distinct_probable:
        report.notes.append(
            "some accepted D are only squarefree up to the trial bound; a certificate then proves a "
            "(Z/p)^2 subgroup of the form class group of discriminant -D, which is the field class "
            "group only if -D is fundamental"
        )
    if not cells:
        report.notes.append("empty box")
    report.check_invariants()
    return report


def strict_window_box(p: int, q: int) -> Box:
    w = strict_window(p, q)
    if not w:
        return Box.empty()
    return Box(w.start, w.stop - 1, w.start, w.stop - 1)


@dataclass
class GrowthFit:
    points: list[tuple[float, int]]
    fitted_exponent: float
    target_exponent: float
    intercept: float = 0.0

    def to_dict(self) -> dict:
        return {
            "points": [[x, c] for x, c in self.points],
            "fitted_exponent": self.fitted_exponent,
            "target_exponent": self.target_exponent,
            "intercept": self.intercept,
        }


def growth_fit(points: list[tuple[float, int]], p: int = 5) -> GrowthFit:
    """Least-squares slope of log(count) against log(X), counts > 0 only."""
    usable = [(x, c) for x, c in points if c > 0]
    if len(usable) < 2 or len({x for x, _ in usable}) < 2:
        raise ValueError("growth_fit needs at least two points with positive counts at distinct X")
    lx = np.log([float(x) for x, _ in usable])
    lc = np.log([float(c) for _, c in usable])
    slope, intercept = np.polyfit(lx, lc, 1)
    return GrowthFit(list(points), float(slope), 1 / (p - 1), float(intercept))


@dataclass
class Campaign:
    """Certified discriminants up to ``X`` over all primes q <= select_q(p, X)."""

    p: int
    X: float
    q_values: list[int]
    reports: list[ScanReport]
    certified: list[int]

    @property
    def count(self) -> int:
        return len(self.certified)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "X": self.X,
            "q_values": self.q_values,
            "count": self.count,
            "certified": [str(D) for D in self.certified],
            "reports": [r.to_dict() for r in self.reports],
        }


def run_campaign(
    p: int,
    X: float,
    constant: float = 1,
    mode: Mode | str = Mode.RELAXED,
    trial_bound: int = DEFAULT_TRIAL_BOUND,
    effort: int = DEFAULT_EFFORT,
    workers: int | None = None,
) -> Campaign:
    """Scan the whole positive region of f_q for every prime q <= select_q(p, X).

    Values above X are dropped, so the certified set only grows with X.
    """
    q_max = select_q(p, X, constant)
    bound = int(X)
    reports = []
    certified: set[int] = set()
    qs = [q for q in primes_up_to(q_max)]
    for q in qs:
        A = positive_region_bound(p, q)
        rep = run_scan(p, q, Box(1, A, 1, A), mode, trial_bound, effort, workers, max_D=bound, X=X)
        reports.append(rep)
        certified.update(rep.certified_discriminants())
    return Campaign(p, X, qs, reports, sorted(certified))
