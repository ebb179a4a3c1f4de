"""Naive reference implementations used to cross-check the fast engines.

Everything here is written directly from the definitions: plain scans over
assignments, restrictions enumerated as cell vectors, correlated pairs
summed with explicit per-bit probabilities.  Nothing imports the package's
bit-parallel kernels or restriction transforms.
"""

from fractions import Fraction
from itertools import product


def all_assignments(n):
    """All 0/1 tuples in enumeration order (x_1 = low bit of the code)."""
    for g in range(1 << n):
        yield tuple((g >> j) & 1 for j in range(n))


def term_holds(rule_term, bits):
    for v in rule_term.pos:
        if not bits[v - 1]:
            return False
    for v in rule_term.neg:
        if bits[v - 1]:
            return False
    return True


def naive_index_of(L, bits):
    for i, rule in enumerate(L.rules, 1):
        if term_holds(rule.term, bits):
            return i
    raise AssertionError("no rule matched")


def naive_eval(L, bits):
    return L.rules[naive_index_of(L, bits) - 1].value


def naive_hit_distribution(L):
    counts = [0] * L.size
    for bits in all_assignments(L.n):
        counts[naive_index_of(L, bits) - 1] += 1
    return [Fraction(c, 1 << L.n) for c in counts]


def naive_distance(L, L2):
    assert L.n == L2.n
    bad = sum(
        1 for bits in all_assignments(L.n) if naive_eval(L, bits) != naive_eval(L2, bits)
    )
    return Fraction(bad, 1 << L.n)


def all_restriction_cells(n):
    """All 3^n restriction cell vectors over {0, 1, None}."""
    return product((0, 1, None), repeat=n)


def completions(cells):
    """All full assignments consistent with a cell vector."""
    free = [j for j, c in enumerate(cells) if c is None]
    for pattern in product((0, 1), repeat=len(free)):
        bits = list(cells)
        for j, b in zip(free, pattern):
            bits[j] = b
        yield tuple(bits)


def naive_useful_set(L, cells):
    """Indices hit by at least one completion of the cell vector."""
    return {naive_index_of(L, bits) for bits in completions(cells)}


def u_weight(cells, alpha):
    """Probability of this cell vector when cells are independently free
    with probability alpha, else fair bits."""
    w = 1.0
    for c in cells:
        w *= alpha if c is None else (1.0 - alpha) / 2.0
    return w


def naive_useful_probability(L, alpha, i):
    return sum(
        u_weight(cells, alpha)
        for cells in all_restriction_cells(L.n)
        if i in naive_useful_set(L, cells)
    )


def naive_expected_usenum_u(L, alpha):
    return sum(
        u_weight(cells, alpha) * len(naive_useful_set(L, cells))
        for cells in all_restriction_cells(L.n)
    )


def naive_expected_usenum_r(L, k):
    """Exact rational expectation over restrictions with exactly k free cells."""
    total = 0
    count = 0
    for cells in all_restriction_cells(L.n):
        if sum(1 for c in cells if c is None) == k:
            total += len(naive_useful_set(L, cells))
            count += 1
    return Fraction(total, count)


def naive_index_stability(L, beta, i):
    """Direct sum over all (x, y) pairs with per-bit agreement (1+beta)/2."""
    n = L.n
    agree = (1.0 + beta) / 2.0
    disagree = (1.0 - beta) / 2.0
    total = 0.0
    for x in all_assignments(n):
        if naive_index_of(L, x) != i:
            continue
        for y in all_assignments(n):
            if naive_index_of(L, y) != i:
                continue
            w = 1.0
            for xb, yb in zip(x, y):
                w *= agree if xb == yb else disagree
            total += w
    return total / (1 << n)


def naive_stability_of_table(table, beta):
    """Same, for a boolean function given as a truth table."""
    n = (len(table)).bit_length() - 1
    agree = (1.0 + beta) / 2.0
    disagree = (1.0 - beta) / 2.0
    ones = [g for g in range(len(table)) if int(table[g])]
    total = 0.0
    for gx in ones:
        for gy in ones:
            w = 1.0
            for j in range(n):
                w *= agree if ((gx >> j) ^ (gy >> j)) & 1 == 0 else disagree
            total += w
    return total / (1 << n)


def naive_restricted_nonzero_probability(table, alpha):
    """Pr over the independent-star model that the restricted function is
    not identically zero."""
    n = (len(table)).bit_length() - 1
    total = 0.0
    for cells in all_restriction_cells(n):
        alive = any(
            int(table[sum(b << j for j, b in enumerate(bits))])
            for bits in completions(cells)
        )
        if alive:
            total += u_weight(cells, alpha)
    return total
