"""Shrinking a decision list by keeping the most frequently hit rules.

Dropping a set of rules changes the output only on inputs whose first
satisfied term was dropped, so the lost hit mass upper-bounds the true
disagreement probability.  The worst-case size needed for a target error
has a closed form in the width alone; it is astronomically loose at desk
scale, where the greedy keep-the-heaviest order is the binding tool.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .analysis import (
    MC_DEFAULT_SAMPLES,
    IndexDistribution,
    Z95,
    _chunk_sizes,
    _map_chunks,
    hit_distribution,
    index_batch,
    is_dnf_shaped,
)
from .core import (
    DecisionList,
    DecisionListError,
    RandomSource,
    batch_index_of,
)


@dataclass(frozen=True)
class CompressionResult:
    """A kept-rule selection with its exact or estimated quality measures."""

    t: int  # how many top rules were requested
    kept: tuple  # ascending original rule indices, default included
    sublist: DecisionList
    dropped_mass: Union[Fraction, float]
    distance: Union[Fraction, float]
    mode: str
    junta_size: int  # distinct variables mentioned by the kept rules
    distance_ci: Optional[float] = None

    def __post_init__(self):
        if len(self.kept) != self.sublist.size:
            raise DecisionListError("kept indices and sublist size disagree")
        if list(self.kept) != sorted(self.kept):
            raise DecisionListError("kept indices must be ascending")
        tol = 0.0 if self.mode == "exact" else 4.0 * (self.distance_ci or 0.0)
        if self.distance > self.dropped_mass + tol:
            raise DecisionListError(
                f"distance {self.distance} exceeds dropped mass {self.dropped_mass}"
            )

    def to_json_dict(self) -> dict:
        out = {
            "t": self.t,
            "kept": list(self.kept),
            "dropped_mass": float(self.dropped_mass),
            "distance": float(self.distance),
            "mode": self.mode,
            "junta_size": self.junta_size,
            "sublist": self.sublist.to_dict(),
        }
        if isinstance(self.dropped_mass, Fraction):
            out["dropped_mass_exact"] = str(self.dropped_mass)
        if isinstance(self.distance, Fraction):
            out["distance_exact"] = str(self.distance)
        if self.distance_ci is not None:
            out["distance_ci"] = self.distance_ci
        return out


@dataclass(frozen=True)
class SizeBound:
    """Worst-case kept-rule count sufficient for a target error, from the
    width alone: t = ceil(4 * (1/eps)^(4 beta) * (4/beta)^(3w)) with beta
    picked from ell = log2(1/eps)/w."""

    w: int
    epsilon: float
    ell: float
    beta: float
    t: int

    def __post_init__(self):
        if not 0.0 < self.beta <= 0.5:
            raise DecisionListError(f"beta={self.beta} outside (0, 1/2]")
        if self.t < 1:
            raise DecisionListError(f"size bound t={self.t} must be >= 1")


def size_bound_for_error(w: int, epsilon: float) -> SizeBound:
    """Evaluate the closed-form worst-case size for width w and error epsilon."""
    if w < 1:
        raise DecisionListError(f"width w={w} must be >= 1")
    if not 0.0 < epsilon < 1.0:
        raise DecisionListError(f"epsilon={epsilon} must be in (0,1)")
    ell = math.log2(1.0 / epsilon) / w
    beta = 0.5 if ell <= 2.0 else 1.0 / ell
    raw = 4.0 * (1.0 / epsilon) ** (4.0 * beta) * (4.0 / beta) ** (3.0 * w)
    nearest = round(raw)
    # ceil, but don't let float dust bump an exact integer up by one
    t = nearest if math.isclose(raw, nearest, rel_tol=1e-12) else math.ceil(raw)
    return SizeBound(w, epsilon, ell, beta, t)


def rank_by_hit(L: DecisionList, p: IndexDistribution) -> list[int]:
    """Rule indices sorted by descending hit probability; ties keep the
    original order (ascending index)."""
    if len(p) != L.size:
        raise DecisionListError(f"distribution length {len(p)} != size {L.size}")
    return sorted(range(1, L.size + 1), key=lambda i: (-p[i - 1], i))


def take_top(
    L: DecisionList,
    t: int,
    p: Optional[IndexDistribution] = None,
    mode: str = "exact",
    samples: int = MC_DEFAULT_SAMPLES,
    rng: Optional[RandomSource] = None,
) -> CompressionResult:
    """Keep the t most-hit rules plus the default; measure what was lost."""
    if not 1 <= t <= L.size:
        raise DecisionListError(f"t={t} out of range 1..{L.size}")
    if p is None:
        p = hit_distribution(L, mode, samples, rng)
    order = rank_by_hit(L, p)
    kept = sorted(set(order[:t]) | {L.size})
    sub = L.sublist(kept)
    dropped = sum(p[i - 1] for i in range(1, L.size + 1) if i not in set(kept))
    if mode == "exact":
        dist = distance(L, sub, "exact")
        ci = None
    else:
        dist, ci = _distance_mc(L, sub, samples, rng or RandomSource(), 1)
        dropped = float(dropped)
    junta = len(set().union(*[sub.rules[i].term.variables() for i in range(sub.size)]))
    return CompressionResult(t, tuple(kept), sub, dropped, dist, mode, junta, ci)


def min_size_for_error(
    L: DecisionList,
    epsilon: Union[Fraction, float],
    mode: str = "exact",
    samples: int = MC_DEFAULT_SAMPLES,
    rng: Optional[RandomSource] = None,
) -> CompressionResult:
    """Smallest t whose dropped hit mass is at most epsilon.

    The dropped mass is the quantity the keep-order controls; the true
    disagreement is measured as well and can only be smaller.
    """
    if not 0 <= epsilon <= 1:
        raise DecisionListError(f"epsilon={epsilon} must be in [0,1]")
    p = hit_distribution(L, mode, samples, rng)
    order = rank_by_hit(L, p)
    total = sum(p.values)
    kept_mass = p[L.size - 1]  # default always kept
    for t in range(1, L.size + 1):
        i = order[t - 1]
        if i != L.size:
            kept_mass = kept_mass + p[i - 1]
        if total - kept_mass <= epsilon:
            return take_top(L, t, p, mode, samples, rng)
    raise AssertionError("unreachable: t = size drops nothing")


def distance(
    L: DecisionList,
    L2: DecisionList,
    mode: str = "exact",
    samples: int = MC_DEFAULT_SAMPLES,
    rng: Optional[RandomSource] = None,
    workers: int = 1,
) -> Union[Fraction, float]:
    """Probability over uniform inputs that the two lists output different
    values.  Exact mode compares full sweeps and returns a Fraction."""
    if L.n != L2.n:
        raise DecisionListError(f"variable counts differ: {L.n} vs {L2.n}")
    if mode == "exact":
        va = _value_ids(L, L2)
        a = va[0][batch_index_of(L) - 1]
        b = va[1][batch_index_of(L2) - 1]
        return Fraction(int((a != b).sum()), 1 << L.n)
    if mode != "mc":
        raise DecisionListError(f"unknown mode {mode!r}")
    est, _ = _distance_mc(L, L2, samples, rng or RandomSource(), workers)
    return est


def _value_ids(L: DecisionList, L2: DecisionList) -> tuple[np.ndarray, np.ndarray]:
    labels = {v: t for t, v in enumerate(dict.fromkeys(L.values() + L2.values()))}
    return (
        np.array([labels[v] for v in L.values()], dtype=np.int64),
        np.array([labels[v] for v in L2.values()], dtype=np.int64),
    )


def _distance_mc(L, L2, samples, rng, workers) -> tuple[float, float]:
    args = [(L, L2, c, rng.child(j)) for j, c in enumerate(_chunk_sizes(samples))]
    mismatches = sum(_map_chunks(_distance_chunk, args, workers))
    est = mismatches / samples
    return est, Z95 * math.sqrt(est * (1.0 - est) / samples)


def _distance_chunk(args) -> int:
    L, L2, count, rng = args
    bits = rng.generator().integers(0, 2, size=(count, L.n)).astype(bool)
    va, vb = _value_ids(L, L2)
    return int((va[index_batch(L, bits) - 1] != vb[index_batch(L2, bits) - 1]).sum())


def sparsify_dnf(
    f: DecisionList,
    epsilon: Union[Fraction, float],
    mode: str = "exact",
    samples: int = MC_DEFAULT_SAMPLES,
    rng: Optional[RandomSource] = None,
) -> CompressionResult:
    """min_size_for_error specialized to DNF-shaped lists.

    The output keeps a subset of the terms, so as a 0/1 function it is
    pointwise at most the input."""
    if not is_dnf_shaped(f):
        raise DecisionListError(
            'not DNF-shaped: need all values "1" except a "0" default'
        )
    return min_size_for_error(f, epsilon, mode, samples, rng)
