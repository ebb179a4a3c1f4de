"""An invertible code for (restriction, useful-index-rank) pairs.

Encoding a pair (rho, s): take the s-th reachable rule of the restricted
list, fix the free cells among its term's variables so the term becomes
satisfied, and write one OLD/NEW tag per literal (in ascending variable
order) recording which cells were already fixed.  Because the chosen rule
was reachable, no earlier term becomes satisfied, so decoding can find the
rule again as the first term fully fixed true, erase the NEW cells back to
free, and recover both the restriction and the rank.

The code maps pairs with k free cells into restrictions with k..k-w free
cells crossed with w tags, which is what makes the audited set-size
comparison |U| <= |V| meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Optional

import numpy as np

from .analysis import (
    _stars_by_code,
    _useful_mask_planes,
    useful_indices,
)
from .core import (
    SATISFIED,
    DecisionList,
    DecisionListError,
    EnumerationLimitError,
    ExactStars,
    RandomSource,
    Restriction,
    _check_restriction_sweep,
    restrict,
    restriction_limit,
    sample_restriction,
)

OLD = "OLD"
NEW = "NEW"


class DecodeError(DecisionListError):
    """Raised when an encoded pair is not in the image of encode."""


@dataclass(frozen=True)
class CodePair:
    """A restriction plus a 1-based rank among the reachable rule indices."""

    restriction: Restriction
    rank: int


@dataclass(frozen=True)
class EncodedPair:
    """A further-fixed restriction plus one OLD/NEW tag per literal slot.

    tags has length width(L); entries beyond the selected rule's literal
    count are OLD padding.
    """

    restriction: Restriction
    tags: tuple

    def __post_init__(self):
        if any(t not in (OLD, NEW) for t in self.tags):
            raise DecisionListError(f"tags must be OLD/NEW, got {self.tags!r}")


def encode(L: DecisionList, pair: CodePair) -> EncodedPair:
    """Fix the free cells of the rank-th reachable rule's term to satisfy it;
    tag each literal position OLD (cell was fixed) or NEW (fixed here)."""
    rho, s = pair.restriction, pair.rank
    reachable = sorted(useful_indices(restrict(L, rho)))
    if not 1 <= s <= len(reachable):
        raise DecisionListError(
            f"rank {s} out of range 1..{len(reachable)} for this restriction"
        )
    j = reachable[s - 1]
    cells = list(rho.cells)
    tags = []
    for v, want_positive in L.rules[j - 1].term.literals():
        if cells[v - 1] is not None:
            tags.append(OLD)
        else:
            tags.append(NEW)
            cells[v - 1] = 1 if want_positive else 0
    tags.extend([OLD] * (L.width - len(tags)))
    return EncodedPair(Restriction(tuple(cells)), tuple(tags))


def decode(L: DecisionList, enc: EncodedPair) -> CodePair:
    """Invert encode.  Validates the input and raises DecodeError on pairs
    outside the image rather than returning garbage."""
    if len(enc.tags) != L.width:
        raise DecodeError(f"tag count {len(enc.tags)} != list width {L.width}")
    if len(enc.restriction) != L.n:
        raise DecodeError(f"restriction length {len(enc.restriction)} != n={L.n}")
    statuses = restrict(L, enc.restriction).statuses
    j = next(i for i, st in enumerate(statuses, 1) if st is SATISFIED)
    lits = L.rules[j - 1].term.literals()
    if any(t == NEW for t in enc.tags[len(lits):]):
        raise DecodeError(
            "NEW tag beyond the first fully-fixed rule's literals: "
            "input is outside the image of encode"
        )
    cells = list(enc.restriction.cells)
    for (v, _), tag in zip(lits, enc.tags):
        if tag == NEW:
            if cells[v - 1] is None:
                raise DecodeError(f"NEW tag points at free cell of variable {v}")
            cells[v - 1] = None
    rho = Restriction(tuple(cells))
    reachable = sorted(useful_indices(restrict(L, rho)))
    if j not in reachable:
        raise DecodeError(
            f"rule {j} is not reachable under the reconstructed restriction: "
            "input is outside the image of encode"
        )
    return CodePair(rho, reachable.index(j) + 1)


# ---------------------------------------------------------------------------
# Audits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AuditReport:
    """Outcome of a round-trip audit at one star count."""

    n: int
    k: int
    w: int
    U_size: int
    checked: int
    exhaustive: bool
    failures: tuple
    injective: bool

    @property
    def passed(self) -> bool:
        return not self.failures and self.injective

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "w": self.w,
            "U_size": self.U_size,
            "checked": self.checked,
            "exhaustive": self.exhaustive,
            "failures": [str(f) for f in self.failures],
            "injective": self.injective,
            "pass": self.passed,
        }


def _restrictions_with_stars(n: int, k: int):
    """All restrictions with exactly k free cells, deterministic order."""
    for free in combinations(range(n), k):
        free_set = set(free)
        fixed = [j for j in range(n) if j not in free_set]
        for bits in range(1 << (n - k)):
            cells = [None] * n
            for t, j in enumerate(fixed):
                cells[j] = (bits >> t) & 1
            yield Restriction(tuple(cells))


def roundtrip_audit(
    L: DecisionList,
    k: int,
    exhaustive: bool = True,
    rng: Optional[RandomSource] = None,
    sample_budget: int = 1000,
    max_failures: int = 10,
) -> AuditReport:
    """Check decode(encode(.)) is the identity over pairs with k free cells.

    Exhaustive mode walks every restriction (and every rank); sampled mode
    draws `sample_budget` restrictions.  Also verifies injectivity of the
    encoder by hashing its outputs.
    """
    if not 0 <= k <= L.n:
        raise DecisionListError(f"star count k={k} out of range 0..{L.n}")
    if exhaustive:
        count = comb(L.n, k) << (L.n - k)
        if count > 3 ** restriction_limit():
            raise EnumerationLimitError(
                f"{count} restrictions with k={k} stars exceed the audit limit; "
                "use sampled mode"
            )
        rhos = _restrictions_with_stars(L.n, k)
    else:
        rng = rng or RandomSource()
        rhos = (
            sample_restriction(L.n, ExactStars(k), rng.child(t))
            for t in range(sample_budget)
        )
    failures = []
    seen_outputs = set()
    U_size = 0
    checked = 0
    injective = True
    for rho in rhos:
        reachable = sorted(useful_indices(restrict(L, rho)))
        U_size += len(reachable)
        for s in range(1, len(reachable) + 1):
            enc = encode(L, CodePair(rho, s))
            if enc in seen_outputs:
                injective = False
                failures.append(f"collision: {rho.to_string()} rank {s}")
            seen_outputs.add(enc)
            try:
                out = decode(L, enc)
            except DecodeError as exc:
                out = None
                failures.append(f"decode error on {rho.to_string()} rank {s}: {exc}")
            if out is not None and (out.restriction != rho or out.rank != s):
                failures.append(
                    f"mismatch: {rho.to_string()} rank {s} -> "
                    f"{out.restriction.to_string()} rank {out.rank}"
                )
            checked += 1
            if len(failures) >= max_failures:
                return AuditReport(
                    L.n, k, L.width, U_size, checked, exhaustive,
                    tuple(failures), injective,
                )
    return AuditReport(
        L.n, k, L.width, U_size, checked, exhaustive, tuple(failures), injective
    )


@dataclass(frozen=True)
class CountingRecord:
    """Exact set sizes on both ends of the injection, plus the bound chase."""

    n: int
    k: int
    w: int
    U_size: int
    V_size: int
    expected_usenum: Fraction
    usenum_bound: Optional[Fraction]  # None when k = n (no variable fixed)

    @property
    def passed(self) -> bool:
        return self.U_size <= self.V_size and self.chain_passed

    @property
    def chain_passed(self) -> bool:
        if self.usenum_bound is None:
            return True
        return self.expected_usenum <= self.usenum_bound

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "w": self.w,
            "U_size": self.U_size,
            "V_size": self.V_size,
            "expected_usenum": str(self.expected_usenum),
            "usenum_bound": None if self.usenum_bound is None else str(self.usenum_bound),
            "pass": self.passed,
        }


def counting_bound(L: DecisionList, k: int) -> CountingRecord:
    """Exact |U| vs |V| at star count k, in integer arithmetic.

    |U| sums the reachable-index counts over every restriction with k free
    cells; |V| counts restrictions with k..k-w free cells times the 2^w tag
    strings.  Also records the expected reachable count against its
    closed-form bound (4/(1-k/n))^w.
    """
    if not 0 <= k <= L.n:
        raise DecisionListError(f"star count k={k} out of range 0..{L.n}")
    _check_restriction_sweep(L.n)
    n, w = L.n, L.width
    planes = _useful_mask_planes(L)
    sel = _stars_by_code(n) == k
    U_size = sum(int(np.bitwise_count(p[sel]).sum()) for p in planes)
    V_size = sum(
        comb(n, k - c) << (n - (k - c)) for c in range(w + 1) if k - c >= 0
    ) << w
    denom = comb(n, k) << (n - k)
    e_usenum = Fraction(U_size, denom)
    bound = None if k == n else Fraction(4 * n, n - k) ** w
    return CountingRecord(n, k, w, U_size, V_size, e_usenum, bound)
