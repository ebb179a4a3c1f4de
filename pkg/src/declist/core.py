"""Decision lists as data: terms, rules, restrictions, evaluation, sampling.

Conventions used throughout the package:

* Variables are numbered 1..n.  Assignments are enumerated LSB-first: the
  assignment with integer code g sets x_j = (g >> (j-1)) & 1, so x_1
  toggles fastest.  Nothing downstream depends on this order; it is fixed
  so that outputs are reproducible.
* A restriction cell is 0, 1, or None (free).  The string form uses
  "0", "1", "*", with character i holding the cell of variable i+1.
* The last rule of every decision list carries the empty (always-true)
  term, so evaluation never falls off the end.
* Exhaustive 2^n sweeps are bit-parallel: a set of assignments is a
  Python int with bit g representing assignment g.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

DEFAULT_SEED = 1729

# Exhaustive-enumeration ceilings.  2^n sweeps stay fast (bit-parallel) up
# to n=24; 3^n restriction sweeps are capped lower.  Both can be raised or
# lowered through the environment.
DEFAULT_SWEEP_LIMIT = 24
DEFAULT_RESTRICTION_LIMIT = 13


class DecisionListError(ValueError):
    """Base class for all validation errors raised by this package."""


class ParseError(DecisionListError):
    """Raised when a serialized decision list fails validation."""


class EnumerationLimitError(DecisionListError):
    """Raised when an exact computation would exceed the enumeration limit."""


def sweep_limit() -> int:
    """Largest n for which 2^n full-assignment sweeps are allowed."""
    return int(os.environ.get("DECLIST_MAX_SWEEP_N", DEFAULT_SWEEP_LIMIT))


def restriction_limit() -> int:
    """Largest n for which 3^n all-restriction sweeps are allowed."""
    return int(os.environ.get("DECLIST_MAX_RESTRICTION_N", DEFAULT_RESTRICTION_LIMIT))


def _check_sweep(n: int) -> None:
    if n > sweep_limit():
        raise EnumerationLimitError(
            f"n={n} exceeds the 2^n sweep limit {sweep_limit()} "
            "(set DECLIST_MAX_SWEEP_N to override)"
        )


def _check_restriction_sweep(n: int) -> None:
    if n > restriction_limit():
        raise EnumerationLimitError(
            f"n={n} exceeds the 3^n restriction sweep limit {restriction_limit()} "
            "(set DECLIST_MAX_RESTRICTION_N to override)"
        )


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Term:
    """A conjunction of literals: positive and negated variable indices.

    The empty term is the constant True.  A variable may not appear both
    positively and negatively.
    """

    pos: frozenset[int] = frozenset()
    neg: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "pos", frozenset(self.pos))
        object.__setattr__(self, "neg", frozenset(self.neg))
        dup = self.pos & self.neg
        if dup:
            raise DecisionListError(f"duplicate variable {min(dup)} in term")
        for v in self.pos | self.neg:
            if not isinstance(v, int) or v < 1:
                raise DecisionListError(f"variable index {v!r} must be a positive int")

    @property
    def width(self) -> int:
        return len(self.pos) + len(self.neg)

    @property
    def is_true(self) -> bool:
        return not self.pos and not self.neg

    def variables(self) -> frozenset[int]:
        return self.pos | self.neg

    def literals(self) -> list[tuple[int, bool]]:
        """Literals as (variable, is_positive), in ascending variable order."""
        out = [(v, True) for v in self.pos] + [(v, False) for v in self.neg]
        out.sort()
        return out

    def satisfied_by(self, bits: Sequence[int]) -> bool:
        return all(bits[v - 1] for v in self.pos) and not any(
            bits[v - 1] for v in self.neg
        )


@dataclass(frozen=True)
class Rule:
    term: Term
    value: str


@dataclass(frozen=True)
class DecisionList:
    """An ordered rule list over n variables, ending in a default rule.

    Output on input x is the value of the first rule whose term x
    satisfies; the trailing always-true rule guarantees a match.
    """

    n: int
    rules: tuple[Rule, ...]

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        if self.n < 0:
            raise DecisionListError("variable count must be nonnegative")
        if not self.rules:
            raise DecisionListError("a decision list needs at least the default rule")
        if not self.rules[-1].term.is_true:
            raise DecisionListError("last rule must have the empty (always-true) term")
        for i, rule in enumerate(self.rules, 1):
            bad = [v for v in rule.term.variables() if v > self.n]
            if bad:
                raise DecisionListError(
                    f"rule {i}: variable {min(bad)} out of range 1..{self.n}"
                )

    @property
    def size(self) -> int:
        return len(self.rules)

    @property
    def width(self) -> int:
        return max(rule.term.width for rule in self.rules)

    def variables(self) -> frozenset[int]:
        out: frozenset[int] = frozenset()
        for rule in self.rules:
            out |= rule.term.variables()
        return out

    def values(self) -> tuple[str, ...]:
        return tuple(rule.value for rule in self.rules)

    def index_of(self, x: "Assignment | Sequence[int]") -> int:
        """1-based index of the first rule whose term x satisfies."""
        bits = _bits_of(x, self.n)
        for i, rule in enumerate(self.rules, 1):
            if rule.term.satisfied_by(bits):
                return i
        raise AssertionError("unreachable: default rule always matches")

    def evaluate(self, x: "Assignment | Sequence[int]") -> str:
        return self.rules[self.index_of(x) - 1].value

    def restrict(self, rho: "Restriction") -> "RestrictedList":
        return restrict(self, rho)

    def sublist(self, kept: Iterable[int]) -> "DecisionList":
        """The list reduced to the rule indices in `kept` (ascending order).

        The default index must be kept, otherwise the result would have no
        always-true final rule.
        """
        kept = sorted(set(kept))
        if not kept or kept[0] < 1 or kept[-1] > self.size:
            raise DecisionListError(f"kept indices {kept} out of range 1..{self.size}")
        if self.size not in kept:
            raise DecisionListError("the default rule index must be kept")
        return DecisionList(self.n, tuple(self.rules[i - 1] for i in kept))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "rules": [
                {
                    "pos": sorted(r.term.pos),
                    "neg": sorted(r.term.neg),
                    "value": r.value,
                }
                for r in self.rules
            ],
        }


@dataclass(frozen=True)
class Assignment:
    """A full 0/1 assignment to the n variables."""

    bits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        if any(b not in (0, 1) for b in self.bits):
            raise DecisionListError("assignment bits must be 0 or 1")

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, i: int) -> int:
        return self.bits[i]

    @classmethod
    def from_string(cls, s: str) -> "Assignment":
        if any(c not in "01" for c in s):
            raise DecisionListError(f"assignment string {s!r} must be over 0/1")
        return cls(tuple(int(c) for c in s))

    @classmethod
    def from_index(cls, n: int, g: int) -> "Assignment":
        """Assignment with enumeration code g (x_1 is the low bit)."""
        return cls(tuple((g >> j) & 1 for j in range(n)))

    def to_index(self) -> int:
        return sum(b << j for j, b in enumerate(self.bits))

    def to_string(self) -> str:
        return "".join(str(b) for b in self.bits)


def _bits_of(x: Union[Assignment, Sequence[int]], n: int) -> Sequence[int]:
    bits = x.bits if isinstance(x, Assignment) else x
    if len(bits) != n:
        raise DecisionListError(f"assignment length {len(bits)} != n={n}")
    return bits


@dataclass(frozen=True)
class Restriction:
    """A partial assignment: each cell is 0, 1, or None (free)."""

    cells: tuple

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        if any(c not in (0, 1, None) for c in self.cells):
            raise DecisionListError("restriction cells must be 0, 1, or None")

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def stars(self) -> int:
        return sum(1 for c in self.cells if c is None)

    def star_positions(self) -> tuple[int, ...]:
        """Free variable indices, ascending."""
        return tuple(v for v, c in enumerate(self.cells, 1) if c is None)

    @classmethod
    def all_stars(cls, n: int) -> "Restriction":
        return cls((None,) * n)

    @classmethod
    def from_string(cls, s: str) -> "Restriction":
        table = {"0": 0, "1": 1, "*": None}
        if any(c not in table for c in s):
            raise DecisionListError(f"restriction string {s!r} must be over 0/1/*")
        return cls(tuple(table[c] for c in s))

    def to_string(self) -> str:
        return "".join("*" if c is None else str(c) for c in self.cells)

    def complete(self, free_bits: Sequence[int]) -> Assignment:
        """Fill the free cells with `free_bits` (given in ascending variable order)."""
        free = iter(free_bits)
        bits = tuple(next(free) if c is None else c for c in self.cells)
        return Assignment(bits)


class RuleFate(Enum):
    """Outcome of a rule's term under a restriction, when fully decided."""

    CONTRADICTED = "contradicted"  # some fixed cell falsifies a literal
    SATISFIED = "satisfied"  # every literal fixed true


CONTRADICTED = RuleFate.CONTRADICTED
SATISFIED = RuleFate.SATISFIED


@dataclass(frozen=True)
class RestrictedList:
    """A decision list under a restriction, rule indices kept aligned.

    Each original rule maps to a status: CONTRADICTED, SATISFIED, or a
    simplified Term mentioning only free variables of the restriction.
    """

    base: DecisionList
    restriction: Restriction
    statuses: tuple

    @property
    def free_vars(self) -> tuple[int, ...]:
        return self.restriction.star_positions()

    @property
    def n_free(self) -> int:
        return len(self.free_vars)

    def index_of(self, free_bits: Sequence[int]) -> int:
        """First matching original rule index, on an assignment to the free
        variables (ascending variable order)."""
        if len(free_bits) != self.n_free:
            raise DecisionListError(
                f"free assignment length {len(free_bits)} != star count {self.n_free}"
            )
        slot = {v: j for j, v in enumerate(self.free_vars)}
        for i, status in enumerate(self.statuses, 1):
            if status is CONTRADICTED:
                continue
            if status is SATISFIED:
                return i
            if all(free_bits[slot[v]] for v in status.pos) and not any(
                free_bits[slot[v]] for v in status.neg
            ):
                return i
        raise AssertionError("unreachable: default rule is always satisfied")


def restrict(L: DecisionList, rho: Restriction) -> RestrictedList:
    """Apply a restriction rule by rule.

    A term becomes CONTRADICTED as soon as one literal is fixed false,
    SATISFIED when every literal is fixed true, and otherwise keeps its
    free literals (with original variable indices).
    """
    if len(rho) != L.n:
        raise DecisionListError(f"restriction length {len(rho)} != n={L.n}")
    cells = rho.cells
    statuses = []
    for rule in L.rules:
        term = rule.term
        pos_free, neg_free = [], []
        dead = False
        for v in term.pos:
            c = cells[v - 1]
            if c is None:
                pos_free.append(v)
            elif c == 0:
                dead = True
                break
        if not dead:
            for v in term.neg:
                c = cells[v - 1]
                if c is None:
                    neg_free.append(v)
                elif c == 1:
                    dead = True
                    break
        if dead:
            statuses.append(CONTRADICTED)
        elif not pos_free and not neg_free:
            statuses.append(SATISFIED)
        else:
            statuses.append(Term(frozenset(pos_free), frozenset(neg_free)))
    return RestrictedList(L, rho, tuple(statuses))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def parse_decision_list(text: str) -> DecisionList:
    """Parse the canonical JSON form, validating every invariant.

    Schema: {"n": int, "rules": [{"pos": [...], "neg": [...], "value": str}]}
    with the last rule's pos and neg empty.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    return decision_list_from_dict(obj)


def decision_list_from_dict(obj) -> DecisionList:
    if not isinstance(obj, dict):
        raise ParseError("top level must be an object")
    if not isinstance(obj.get("n"), int) or obj["n"] < 0:
        raise ParseError('"n" must be a nonnegative integer')
    rules_obj = obj.get("rules")
    if not isinstance(rules_obj, list) or not rules_obj:
        raise ParseError('"rules" must be a nonempty array')
    n = obj["n"]
    rules = []
    for i, r in enumerate(rules_obj, 1):
        if not isinstance(r, dict):
            raise ParseError(f"rule {i}: must be an object")
        pos, neg = r.get("pos", []), r.get("neg", [])
        for name, lst in (("pos", pos), ("neg", neg)):
            if not isinstance(lst, list) or any(
                not isinstance(v, int) or isinstance(v, bool) for v in lst
            ):
                raise ParseError(f'rule {i}: "{name}" must be an array of ints')
        seen = {}
        for v in list(pos) + list(neg):
            if v in seen:
                raise ParseError(f"rule {i}: duplicate variable {v} in term")
            seen[v] = True
            if not 1 <= v <= n:
                raise ParseError(f"rule {i}: variable {v} out of range 1..{n}")
        if not isinstance(r.get("value"), str):
            raise ParseError(f'rule {i}: "value" must be a string')
        rules.append(Rule(Term(frozenset(pos), frozenset(neg)), r["value"]))
    if not rules[-1].term.is_true:
        raise ParseError(
            f"rule {len(rules)}: last rule must be the always-true default "
            "(empty pos and neg)"
        )
    return DecisionList(n, tuple(rules))


def serialize_decision_list(L: DecisionList) -> str:
    """Canonical JSON text; parse(serialize(L)) == L."""
    return json.dumps(L.to_dict(), sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# Bit-parallel exhaustive kernels
# ---------------------------------------------------------------------------
#
# A subset of {0,1}^n is one Python int with bit g set iff assignment g is
# in the subset.  Bitwise ops on these ints evaluate all 2^n assignments at
# word-level parallelism.


@lru_cache(maxsize=64)
def _var_mask(n: int, j: int) -> int:
    # Assignments where x_j = 1: period 2^j of 2^(j-1) zeros then ones.
    half = 1 << (j - 1)
    block = ((1 << half) - 1) << half
    length = half << 1
    total = 1 << n
    while length < total:
        block |= block << length
        length <<= 1
    return block


def term_mask(term: Term, n: int) -> int:
    """Bitmask of the assignments satisfying `term`."""
    full = (1 << (1 << n)) - 1
    mask = full
    for v in term.pos:
        mask &= _var_mask(n, v)
    for v in term.neg:
        mask &= full ^ _var_mask(n, v)
    return mask


def fired_masks(L: DecisionList) -> list[int]:
    """Per rule, the bitmask of assignments whose first satisfied term is
    that rule's.  The masks partition the full assignment space."""
    _check_sweep(L.n)
    remaining = (1 << (1 << L.n)) - 1
    out = []
    for rule in L.rules:
        hit = term_mask(rule.term, L.n) & remaining
        remaining ^= hit
        out.append(hit)
    return out


def mask_to_bools(mask: int, n: int) -> np.ndarray:
    """Expand an assignment-set bitmask into a bool array of length 2^n."""
    total = 1 << n
    buf = mask.to_bytes((total + 7) // 8, "little")
    bits = np.unpackbits(np.frombuffer(buf, dtype=np.uint8), bitorder="little")
    return bits[:total].astype(bool)


def batch_index_of(L: DecisionList) -> np.ndarray:
    """First-match rule index for every assignment, in enumeration order.

    Entry g is index_of on the assignment with code g.  Requires n within
    the 2^n sweep limit.
    """
    out = np.zeros(1 << L.n, dtype=np.int32)
    for i, mask in enumerate(fired_masks(L), 1):
        if mask:
            out[mask_to_bools(mask, L.n)] = i
    return out


def fired_counts(L: DecisionList) -> list[int]:
    """Per rule, how many assignments fire it (exact integers)."""
    return [mask.bit_count() for mask in fired_masks(L)]


# ---------------------------------------------------------------------------
# Randomness
# ---------------------------------------------------------------------------

_M64 = (1 << 64) - 1


def _mix64(a: int, b: int) -> int:
    # splitmix64-style finalizer; platform-independent stream derivation.
    x = (a * 0x9E3779B97F4A7C15 + b + 1) & _M64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _M64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class RandomSource:
    """Counter-based random stream: (seed, stream) fully determine all draws.

    Built on Philox, so derived child streams are independent and the same
    (seed, stream) reproduces bit-identical draws on every platform.
    """

    seed: int = DEFAULT_SEED
    stream: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.Generator(
            np.random.Philox(key=np.array([self.seed & _M64, self.stream & _M64],
                                          dtype=np.uint64))
        )

    def child(self, index: int) -> "RandomSource":
        """Derived stream for worker/chunk `index`; independent of the parent."""
        return RandomSource(self.seed, _mix64(self.stream, index))


@dataclass(frozen=True)
class UniformStars:
    """Restriction model: each cell independently free with probability alpha,
    otherwise a fair bit."""

    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DecisionListError(f"alpha={self.alpha} must be in (0,1)")


@dataclass(frozen=True)
class ExactStars:
    """Restriction model: uniform over restrictions with exactly k free cells."""

    k: int

    def __post_init__(self):
        if self.k < 0:
            raise DecisionListError(f"star count k={self.k} must be nonnegative")


RestrictionModel = Union[UniformStars, ExactStars]


def sample_restriction(n: int, model: RestrictionModel, rng: RandomSource) -> Restriction:
    """Draw one restriction from the given model."""
    gen = rng.generator()
    if isinstance(model, UniformStars):
        stars = gen.random(n) < model.alpha
        bits = gen.integers(0, 2, size=n)
        cells = tuple(None if s else int(b) for s, b in zip(stars, bits))
        return Restriction(cells)
    if isinstance(model, ExactStars):
        if model.k > n:
            raise DecisionListError(f"star count k={model.k} exceeds n={n}")
        free = set(gen.choice(n, size=model.k, replace=False).tolist())
        bits = gen.integers(0, 2, size=n)
        cells = tuple(None if j in free else int(bits[j]) for j in range(n))
        return Restriction(cells)
    raise TypeError(f"unknown restriction model {model!r}")


def sample_noisy(x: Union[Assignment, Sequence[int]], beta: float,
                 rng: RandomSource) -> Assignment:
    """Resample x with correlation beta: each bit flips with probability
    (1-beta)/2, independently."""
    if not 0.0 < beta < 1.0:
        raise DecisionListError(f"beta={beta} must be in (0,1)")
    bits = x.bits if isinstance(x, Assignment) else tuple(x)
    gen = rng.generator()
    flips = gen.random(len(bits)) < (1.0 - beta) / 2.0
    return Assignment(tuple(int(b) ^ int(f) for b, f in zip(bits, flips)))
