"""Constructors for the named instance families and for random fuzz corpora."""

from __future__ import annotations

from itertools import combinations
from math import comb
from typing import Sequence

from .core import (
    Assignment,
    DecisionList,
    DecisionListError,
    RandomSource,
    Rule,
    Term,
)


def gen_tribes(t_terms: int, w: int) -> DecisionList:
    """Read-once DNF: t_terms disjoint blocks of w variables, each ANDed.

    Variables of term j are x_{(j-1)w+1} .. x_{jw}; every term outputs "1"
    and the default outputs "0".
    """
    if t_terms < 1 or w < 1:
        raise DecisionListError("tribes needs t_terms >= 1 and w >= 1")
    n = t_terms * w
    rules = [
        Rule(Term(frozenset(range((j - 1) * w + 1, j * w + 1))), "1")
        for j in range(1, t_terms + 1)
    ]
    rules.append(Rule(Term(), "0"))
    return DecisionList(n, tuple(rules))


def gen_threshold_dnf(n: int, w: int) -> DecisionList:
    """All C(n,w) monotone width-w terms, in lexicographic subset order.

    Computes "at least w of the n inputs are 1".
    """
    if not n > w >= 1:
        raise DecisionListError(f"threshold needs n > w >= 1, got n={n}, w={w}")
    rules = [
        Rule(Term(frozenset(subset)), "1")
        for subset in combinations(range(1, n + 1), w)
    ]
    rules.append(Rule(Term(), "0"))
    return DecisionList(n, tuple(rules))


def gen_lv(n: int, w: int, v: Sequence[int]) -> DecisionList:
    """The threshold term family with a caller-chosen 0/1 value per term."""
    base = gen_threshold_dnf(n, w)
    if len(v) != comb(n, w):
        raise DecisionListError(
            f"value vector length {len(v)} != C({n},{w}) = {comb(n, w)}"
        )
    rules = [
        Rule(rule.term, str(int(bit))) for rule, bit in zip(base.rules, v)
    ]
    rules.append(Rule(Term(), "0"))
    return DecisionList(n, tuple(rules))


def gen_from_truth_table(table: Sequence) -> DecisionList:
    """A full-width decision list reproducing an explicit truth table.

    table[g] is the output on the assignment with enumeration code g; its
    length must be a power of two.  One width-w rule per assignment, in
    enumeration order, plus an unreachable default "0".
    """
    size = len(table)
    if size < 1 or size & (size - 1):
        raise DecisionListError(f"truth table length {size} is not a power of two")
    w = size.bit_length() - 1
    if w > 16:
        raise DecisionListError(f"truth table width {w} exceeds the limit 16")
    rules = []
    for g in range(size):
        bits = Assignment.from_index(w, g).bits
        pos = frozenset(j + 1 for j, b in enumerate(bits) if b)
        neg = frozenset(j + 1 for j, b in enumerate(bits) if not b)
        rules.append(Rule(Term(pos, neg), str(table[g])))
    rules.append(Rule(Term(), "0"))
    return DecisionList(w, tuple(rules))


def gen_random_list(
    n: int,
    w: int,
    m: int,
    alphabet_size: int = 2,
    rng: RandomSource = RandomSource(),
) -> DecisionList:
    """Random list for fuzzing: m-1 rules of width uniform in [0, w], then a
    default.  Deterministic in rng."""
    if n < 1 or m < 1 or not 0 <= w <= n or alphabet_size < 1:
        raise DecisionListError(
            f"bad generator parameters n={n}, w={w}, m={m}, alphabet={alphabet_size}"
        )
    gen = rng.generator()
    rules = []
    for _ in range(m - 1):
        width = int(gen.integers(0, w + 1))
        variables = gen.choice(n, size=width, replace=False) + 1
        signs = gen.integers(0, 2, size=width)
        pos = frozenset(int(v) for v, s in zip(variables, signs) if s)
        neg = frozenset(int(v) for v, s in zip(variables, signs) if not s)
        rules.append(Rule(Term(pos, neg), str(int(gen.integers(0, alphabet_size)))))
    rules.append(Rule(Term(), str(int(gen.integers(0, alphabet_size)))))
    return DecisionList(n, tuple(rules))
