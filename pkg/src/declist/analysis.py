"""Hit probabilities, useful indices, index stability, and inequality checks.

Three quantities are attached to each rule index i of a decision list L:

* hit probability   p(i)        -- Pr over uniform x that the first satisfied
                                   term is rule i's;
* useful probability q(alpha,i) -- Pr over a random restriction rho (each cell
                                   free with probability alpha) that some
                                   completion of rho still hits rule i;
* index stability  stab(beta,i) -- Pr that a correlated pair (x, y), where y
                                   agrees with x per bit with probability
                                   (1+beta)/2, both hit rule i.

Exact computations enumerate restrictions once over all 3^n cell vectors
(ternary codes) with a subcube dynamic program, using the identity that a
correlated pair can be drawn by fixing a common restriction and completing
it twice independently.  Monte Carlo estimators mirror each quantity with
chunked, seeded sampling and normal-approximation confidence intervals.
"""

from __future__ import annotations

import logging
import multiprocessing
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, sqrt
from typing import Optional, Sequence, Union

import numpy as np

from .core import (
    CONTRADICTED,
    SATISFIED,
    DecisionList,
    DecisionListError,
    ExactStars,
    RandomSource,
    Restriction,
    RestrictedList,
    RestrictionModel,
    Term,
    UniformStars,
    _check_restriction_sweep,
    _check_sweep,
    _var_mask,
    fired_counts,
    fired_masks,
    mask_to_bools,
    restrict,
    restriction_limit,
    sample_restriction,
    sweep_limit,
)

logger = logging.getLogger("declist.analysis")

SLACK_TOL = 1e-9  # default tolerance for inequality slacks
SUM_TOL = 1e-12  # float tolerance on mass-balance identities
MC_DEFAULT_SAMPLES = 100_000
MC_CHUNK = 25_000
Z95 = 1.96  # normal-approximation 95% two-sided quantile


# ---------------------------------------------------------------------------
# Result containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IndexDistribution:
    """Per-rule-index nonnegative weights with provenance.

    values[i-1] belongs to rule index i.  Exact values are Fractions where
    the quantity is rational in the inputs (hit probabilities, fixed-star
    models) and floats otherwise; estimated values carry the sample count
    and 95% CI half-widths.
    """

    kind: str  # "hit" | "useful" | "stability"
    values: tuple
    mode: str  # "exact" | "mc"
    samples: Optional[int] = None
    ci_half_widths: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ("hit", "useful", "stability"):
            raise DecisionListError(f"unknown distribution kind {self.kind!r}")
        if self.mode not in ("exact", "mc"):
            raise DecisionListError(f"unknown mode {self.mode!r}")
        for v in self.values:
            if not -1e-9 <= float(v) <= 1.0 + 1e-9:
                raise DecisionListError(f"distribution entry {v} outside [0,1]")
        if self.kind == "hit" and self.mode == "exact":
            if sum(self.values) != 1:
                raise DecisionListError("exact hit distribution must sum to 1")

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int):
        return self.values[i]

    def as_floats(self) -> list[float]:
        return [float(v) for v in self.values]

    def to_json_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "mode": self.mode,
            "values": self.as_floats(),
        }
        if any(isinstance(v, Fraction) for v in self.values):
            out["exact_values"] = [str(v) for v in self.values]
        if self.mode == "mc":
            out["samples"] = self.samples
            out["ci_half_widths"] = list(self.ci_half_widths or ())
        return out


@dataclass(frozen=True)
class InequalityRecord:
    """One checked instance: quantities, bound sides, slacks, verdict.

    Slack sign convention: every slack is (amount by which the inequality
    holds), so passing means slack >= -tolerance.  Equalities are encoded
    as a two-sided bound with lower == upper.
    """

    index: Optional[int] = None
    p: Optional[float] = None
    q: Optional[float] = None
    stab: Optional[float] = None
    lower: Optional[float] = None
    upper: Optional[float] = None
    slack_lo: Optional[float] = None
    slack_hi: Optional[float] = None
    cor_upper: Optional[float] = None
    slack_cor: Optional[float] = None
    passed: bool = True
    note: str = ""

    CSV_COLUMNS = (
        "index", "p", "q", "stab", "lower", "upper",
        "slack_lo", "slack_hi", "pass", "cor_upper", "slack_cor", "note",
    )

    def as_row(self) -> dict:
        return {
            "index": "" if self.index is None else self.index,
            "p": _fmt(self.p),
            "q": _fmt(self.q),
            "stab": _fmt(self.stab),
            "lower": _fmt(self.lower),
            "upper": _fmt(self.upper),
            "slack_lo": _fmt(self.slack_lo),
            "slack_hi": _fmt(self.slack_hi),
            "pass": str(self.passed).lower(),
            "cor_upper": _fmt(self.cor_upper),
            "slack_cor": _fmt(self.slack_cor),
            "note": self.note,
        }


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


@dataclass(frozen=True)
class InequalityReport:
    """A batch of inequality records plus the aggregate verdict."""

    check: str
    records: tuple
    tolerance: float = SLACK_TOL
    params: tuple = ()  # (name, value) pairs, for provenance in outputs

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def min_slack(self) -> Optional[float]:
        slacks = [
            s
            for r in self.records
            for s in (r.slack_lo, r.slack_hi, r.slack_cor)
            if s is not None
        ]
        return min(slacks) if slacks else None

    def to_json_dict(self) -> dict:
        return {
            "check": self.check,
            "params": dict(self.params),
            "tolerance": self.tolerance,
            "pass": self.passed,
            "records": [r.as_row() for r in self.records],
        }

    def to_csv(self) -> str:
        cols = InequalityRecord.CSV_COLUMNS
        lines = [",".join(cols)]
        for r in self.records:
            row = r.as_row()
            lines.append(",".join(str(row[c]) for c in cols))
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Useful indices
# ---------------------------------------------------------------------------


def useful_indices(target: Union[DecisionList, RestrictedList],
                   method: str = "auto") -> frozenset[int]:
    """Rule indices that some assignment still hits.

    A plain DecisionList is treated as its own all-free restriction.
    method: "exhaustive" sweeps all completions bit-parallel, "backtracking"
    searches only the variables occurring in earlier rules, "auto" picks
    exhaustive while the free-variable count is within the sweep limit.
    """
    R = (
        target
        if isinstance(target, RestrictedList)
        else restrict(target, Restriction.all_stars(target.n))
    )
    if method == "auto":
        method = "exhaustive" if R.n_free <= sweep_limit() else "backtracking"
    if method == "exhaustive":
        return _useful_exhaustive(R)
    if method == "backtracking":
        return _useful_backtracking(R)
    raise DecisionListError(f"unknown usefulness method {method!r}")


def usenum(target: Union[DecisionList, RestrictedList], method: str = "auto") -> int:
    """Number of useful indices."""
    return len(useful_indices(target, method))


def _useful_exhaustive(R: RestrictedList) -> frozenset[int]:
    k = R.n_free
    _check_sweep(k)
    full = (1 << (1 << k)) - 1
    slot = {v: j + 1 for j, v in enumerate(R.free_vars)}
    remaining = full
    useful = []
    for i, status in enumerate(R.statuses, 1):
        if status is CONTRADICTED:
            continue
        if status is SATISFIED:
            useful.append(i)
            break  # fires on every remaining completion; later rules are dead
        mask = full
        for v in status.pos:
            mask &= _var_mask(k, slot[v])
        for v in status.neg:
            mask &= full ^ _var_mask(k, slot[v])
        hit = mask & remaining
        if hit:
            useful.append(i)
            remaining ^= hit
            if not remaining:
                break
    return frozenset(useful)


def _useful_backtracking(R: RestrictedList) -> frozenset[int]:
    # Rule i is reachable iff its surviving literals plus the negation of
    # every earlier surviving term are simultaneously satisfiable; only the
    # variables of rules 1..i matter.
    useful = []
    earlier: list[Term] = []
    for i, status in enumerate(R.statuses, 1):
        if status is CONTRADICTED:
            continue
        if status is SATISFIED:
            if _all_falsifiable(earlier, {}, 0):
                useful.append(i)
            break
        assign = {v: True for v in status.pos}
        assign.update({v: False for v in status.neg})
        if _all_falsifiable(earlier, assign, 0):
            useful.append(i)
        earlier.append(status)
    return frozenset(useful)


def _all_falsifiable(terms: list[Term], assign: dict, start: int) -> bool:
    """Can `assign` extend so every term in terms[start:] has a false literal?"""
    for pos_idx in range(start, len(terms)):
        term = terms[pos_idx]
        unassigned = []
        falsified = False
        for v, want in term.literals():
            got = assign.get(v)
            if got is None:
                unassigned.append((v, want))
            elif got != want:
                falsified = True
                break
        if falsified:
            continue
        if not unassigned:
            return False  # fully forced true; this branch cannot avoid it
        return _falsify_term(terms, assign, pos_idx, unassigned, 0)
    return True


def _falsify_term(terms, assign, pos_idx, unassigned, li) -> bool:
    if li == len(unassigned):
        return False  # every literal ended up true
    v, want = unassigned[li]
    assign[v] = not want  # falsify here, move to the next term
    ok = _all_falsifiable(terms, assign, pos_idx + 1)
    if not ok:
        assign[v] = want  # keep it true, falsify via a later literal
        ok = _falsify_term(terms, assign, pos_idx, unassigned, li + 1)
    del assign[v]
    return ok


# ---------------------------------------------------------------------------
# Restriction-space enumeration: ternary codes and subcube transforms
# ---------------------------------------------------------------------------
#
# Restrictions are coded in base 3: digit j in {0, 1, 2} holds the cell of
# variable j+1, with 2 meaning free.  For any set S of assignments, the
# number of completions of rho that land in S is computed for all 3^n codes
# at once: seed an array at the codes of full assignments and replace, per
# digit, the "free" plane by the sum (or OR) of the two fixed planes.


@lru_cache(maxsize=8)
def _assignment_codes(n: int) -> np.ndarray:
    g = np.arange(1 << n, dtype=np.int64)
    code = np.zeros(1 << n, dtype=np.int64)
    pw = 1
    for j in range(n):
        code += ((g >> j) & 1) * pw
        pw *= 3
    code.setflags(write=False)
    return code


@lru_cache(maxsize=8)
def _stars_by_code(n: int) -> np.ndarray:
    codes = np.arange(3**n, dtype=np.int64)
    stars = np.zeros(3**n, dtype=np.int64)
    for j in range(n):
        stars += (codes // 3**j) % 3 == 2
    stars.setflags(write=False)
    return stars


def _sum_transform(A: np.ndarray, n: int) -> None:
    for j in range(n):
        B = A.reshape(-1, 3, 3**j)
        B[:, 2, :] = B[:, 0, :] + B[:, 1, :]


def _or_transform(A: np.ndarray, n: int) -> None:
    for j in range(n):
        B = A.reshape(-1, 3, 3**j)
        B[:, 2, :] = B[:, 0, :] | B[:, 1, :]


def _subcube_counts(member: np.ndarray, n: int) -> np.ndarray:
    """For every restriction code, how many completions lie in `member`."""
    A = np.zeros(3**n, dtype=np.float64)
    A[_assignment_codes(n)] = member
    _sum_transform(A, n)
    return A


def _u_weights(n: int, alpha: float) -> np.ndarray:
    """Probability of each restriction code when cells are independently
    free with probability alpha, else fair bits."""
    stars = _stars_by_code(n).astype(np.float64)
    return alpha**stars * (((1.0 - alpha) / 2.0) ** (n - stars))


@lru_cache(maxsize=16)
def _fired_bools(L: DecisionList) -> tuple:
    out = []
    for mask in fired_masks(L):
        b = mask_to_bools(mask, L.n)
        b.setflags(write=False)
        out.append(b)
    return tuple(out)


@lru_cache(maxsize=16)
def _useful_mask_planes(L: DecisionList) -> tuple:
    """Per restriction code, a bitmask of the rule indices some completion
    still hits; packed 64 indices per uint64 plane."""
    _check_restriction_sweep(L.n)
    fired = _fired_bools(L)
    codes = _assignment_codes(L.n)
    planes = []
    for base in range(0, L.size, 64):
        v = np.zeros(1 << L.n, dtype=np.uint64)
        for off in range(min(64, L.size - base)):
            v |= fired[base + off].astype(np.uint64) << np.uint64(off)
        A = np.zeros(3**L.n, dtype=np.uint64)
        A[codes] = v
        _or_transform(A, L.n)
        A.setflags(write=False)
        planes.append(A)
    return tuple(planes)


def _plane_bit(planes: Sequence[np.ndarray], i: int) -> np.ndarray:
    """0/1 array over codes: is rule index i (1-based) still reachable."""
    plane, off = planes[(i - 1) // 64], np.uint64((i - 1) % 64)
    return ((plane >> off) & np.uint64(1)).astype(np.float64)


# ---------------------------------------------------------------------------
# Distributions
# ---------------------------------------------------------------------------


def hit_distribution(
    L: DecisionList,
    mode: str = "exact",
    samples: int = MC_DEFAULT_SAMPLES,
    rng: Optional[RandomSource] = None,
    workers: int = 1,
) -> IndexDistribution:
    """Per-index probability that a uniform assignment hits that rule.

    Exact mode counts firing assignments bit-parallel and returns exact
    dyadic Fractions; mc mode samples assignments.
    """
    if mode == "exact":
        total = 1 << L.n
        values = tuple(Fraction(c, total) for c in fired_counts(L))
        return IndexDistribution("hit", values, "exact")
    if mode != "mc":
        raise DecisionListError(f"unknown mode {mode!r}")
    rng = rng or RandomSource()
    args = [(L, c, rng.child(j)) for j, c in enumerate(_chunk_sizes(samples))]
    counts = sum(_map_chunks(_hit_chunk, args, workers))
    est = counts / samples
    ci = Z95 * np.sqrt(est * (1.0 - est) / samples)
    return IndexDistribution(
        "hit", tuple(est.tolist()), "mc", samples, tuple(ci.tolist())
    )


def useful_distribution(
    L: DecisionList,
    model: RestrictionModel,
    mode: str = "exact",
    samples: int = MC_DEFAULT_SAMPLES,
    rng: Optional[RandomSource] = None,
    workers: int = 1,
) -> IndexDistribution:
    """Per-index probability that a model-random restriction keeps the index
    reachable.  Fixed-star models are exact rationals; independent-star
    models are floats."""
    if mode == "exact":
        if isinstance(model, UniformStars):
            planes = _useful_mask_planes(L)
            w = _u_weights(L.n, model.alpha)
            values = tuple(
                float(np.dot(_plane_bit(planes, i), w)) for i in range(1, L.size + 1)
            )
            return IndexDistribution("useful", values, "exact")
        if isinstance(model, ExactStars):
            if model.k > L.n:
                raise DecisionListError(f"star count k={model.k} exceeds n={L.n}")
            planes = _useful_mask_planes(L)
            sel = _stars_by_code(L.n) == model.k
            denom = comb(L.n, model.k) << (L.n - model.k)
            values = []
            for i in range(1, L.size + 1):
                plane, off = planes[(i - 1) // 64], np.uint64((i - 1) % 64)
                hits = int(((plane[sel] >> off) & np.uint64(1)).sum())
                values.append(Fraction(hits, denom))
            return IndexDistribution("useful", tuple(values), "exact")
        raise TypeError(f"unknown restriction model {model!r}")
    if mode != "mc":
        raise DecisionListError(f"unknown mode {mode!r}")
    rng = rng or RandomSource()
    args = [(L, model, c, rng.child(j)) for j, c in enumerate(_chunk_sizes(samples))]
    counts = sum(r[0] for r in _map_chunks(_useful_chunk, args, workers))
    est = counts / samples
    ci = Z95 * np.sqrt(est * (1.0 - est) / samples)
    return IndexDistribution(
        "useful", tuple(est.tolist()), "mc", samples, tuple(ci.tolist())
    )


def expected_usenum(
    L: DecisionList,
    model: RestrictionModel,
    mode: str = "exact",
    samples: int = MC_DEFAULT_SAMPLES,
    rng: Optional[RandomSource] = None,
    workers: int = 1,
):
    """Expected number of reachable indices after a model-random restriction.

    Exact fixed-star models return a Fraction; exact independent-star
    models a float (aggregated per restriction, not per index, so it is an
    independent cross-check of the useful_distribution mass).
    """
    if mode == "exact":
        planes = _useful_mask_planes(L)
        if isinstance(model, UniformStars):
            w = _u_weights(L.n, model.alpha)
            return float(
                sum(np.dot(np.bitwise_count(p).astype(np.float64), w) for p in planes)
            )
        if isinstance(model, ExactStars):
            if model.k > L.n:
                raise DecisionListError(f"star count k={model.k} exceeds n={L.n}")
            sel = _stars_by_code(L.n) == model.k
            denom = comb(L.n, model.k) << (L.n - model.k)
            total = sum(int(np.bitwise_count(p[sel]).sum()) for p in planes)
            return Fraction(total, denom)
        raise TypeError(f"unknown restriction model {model!r}")
    if mode != "mc":
        raise DecisionListError(f"unknown mode {mode!r}")
    rng = rng or RandomSource()
    args = [(L, model, c, rng.child(j)) for j, c in enumerate(_chunk_sizes(samples))]
    totals = [r[1] for r in _map_chunks(_useful_chunk, args, workers)]
    return float(sum(totals)) / samples


def index_stability(
    L: DecisionList,
    beta: float,
    i: int,
    mode: str = "exact",
    samples: int = MC_DEFAULT_SAMPLES,
    rng: Optional[RandomSource] = None,
    workers: int = 1,
) -> float:
    """Probability that a beta-correlated pair of assignments both hit rule i."""
    _check_beta(beta)
    if not 1 <= i <= L.size:
        raise DecisionListError(f"index {i} out of range 1..{L.size}")
    if mode == "exact":
        return _stability_all_exact(L, beta)[i - 1]
    if mode != "mc":
        raise DecisionListError(f"unknown mode {mode!r}")
    rng = rng or RandomSource()
    args = [(L, beta, c, rng.child(j)) for j, c in enumerate(_chunk_sizes(samples))]
    counts = sum(_map_chunks(_stability_chunk, args, workers))
    return float(counts[i - 1]) / samples


def _stability_all_exact(L: DecisionList, beta: float) -> list[float]:
    # Correlated pairs decompose over a common restriction with free
    # probability 1-beta; conditioned on the restriction the two hits are
    # independent, so stability is the weighted sum of squared hit rates.
    _check_restriction_sweep(L.n)
    n = L.n
    fired = _fired_bools(L)
    w = _u_weights(n, 1.0 - beta)
    inv2k = 0.5 ** _stars_by_code(n).astype(np.float64)
    out = []
    for i in range(L.size):
        r = _subcube_counts(fired[i], n) * inv2k
        out.append(float(np.dot(w, r * r)))
    return out


# ---------------------------------------------------------------------------
# Inequality checks
# ---------------------------------------------------------------------------


def _check_beta(beta: float) -> None:
    if not 0.0 < beta < 1.0:
        raise DecisionListError(f"beta={beta} must be in (0,1)")


def bridging_check(
    L: DecisionList,
    beta: float,
    mode: str = "exact",
    samples: int = MC_DEFAULT_SAMPLES,
    rng: Optional[RandomSource] = None,
    tolerance: float = SLACK_TOL,
) -> InequalityReport:
    """Per index: p^2/q <= stab <= p^(2/(1+beta)), and p <= q^((1+beta)/(2beta)).

    Indices with p = q = 0 pass the lower bound vacuously (logged, with a
    note on the record).
    """
    _check_beta(beta)
    alpha = 1.0 - beta
    p = hit_distribution(L, mode, samples, rng).as_floats()
    q = useful_distribution(L, UniformStars(alpha), mode, samples, rng).as_floats()
    if mode == "exact":
        stab = _stability_all_exact(L, beta)
    else:
        rng = rng or RandomSource()
        args = [(L, beta, c, rng.child(j)) for j, c in enumerate(_chunk_sizes(samples))]
        counts = sum(_map_chunks(_stability_chunk, args, 1))
        stab = (counts / samples).tolist()
    records = []
    for i in range(1, L.size + 1):
        pi, qi, si = p[i - 1], q[i - 1], stab[i - 1]
        note = ""
        if qi == 0.0:
            lower = 0.0
            note = "vacuous: p=q=0"
            logger.info("index %d has p=q=0; lower bound passes vacuously", i)
        else:
            lower = pi * pi / qi
        upper = pi ** (2.0 / (1.0 + beta))
        cor_upper = qi ** ((1.0 + beta) / (2.0 * beta))
        slack_lo = si - lower
        slack_hi = upper - si
        slack_cor = cor_upper - pi
        records.append(
            InequalityRecord(
                index=i,
                p=pi,
                q=qi,
                stab=si,
                lower=lower,
                upper=upper,
                slack_lo=slack_lo,
                slack_hi=slack_hi,
                cor_upper=cor_upper,
                slack_cor=slack_cor,
                passed=min(slack_lo, slack_hi, slack_cor) >= -tolerance,
                note=note,
            )
        )
    return InequalityReport(
        "bridging", tuple(records), tolerance, (("beta", beta), ("mode", mode))
    )


def hypercontractivity_check(
    L: DecisionList, i: int, beta: float, tolerance: float = SLACK_TOL
) -> InequalityReport:
    """stab(beta, i) <= p(i)^(2/(1+beta)) for the indicator of one index."""
    _check_beta(beta)
    if not 1 <= i <= L.size:
        raise DecisionListError(f"index {i} out of range 1..{L.size}")
    p = float(hit_distribution(L)[i - 1])
    stab = index_stability(L, beta, i)
    upper = p ** (2.0 / (1.0 + beta))
    slack = upper - stab
    rec = InequalityRecord(
        index=i, p=p, stab=stab, upper=upper, slack_hi=slack,
        passed=slack >= -tolerance,
    )
    return InequalityReport(
        "hypercontractivity", (rec,), tolerance, (("beta", beta), ("index", i))
    )


def general_bridging_check(
    table: Sequence, beta: float, tolerance: float = SLACK_TOL
) -> InequalityReport:
    """The index-free form, for any boolean function given as a truth table:
    |g|^2 / Pr[g restricted is not identically 0] <= stab(g) <= |g|^(2/(1+beta)).
    """
    _check_beta(beta)
    member = np.asarray([int(bool(int(v))) for v in table], dtype=np.float64)
    size = len(member)
    if size < 1 or size & (size - 1):
        raise DecisionListError(f"truth table length {size} is not a power of two")
    if not member.any():
        raise DecisionListError("function is identically zero")
    n = size.bit_length() - 1
    _check_restriction_sweep(n)
    acc = float(member.sum()) / size
    w = _u_weights(n, 1.0 - beta)
    counts = _subcube_counts(member, n)
    r = counts * 0.5 ** _stars_by_code(n).astype(np.float64)
    stab = float(np.dot(w, r * r))
    pr_nonzero = float(np.dot(w, (counts > 0).astype(np.float64)))
    lower = acc * acc / pr_nonzero
    upper = acc ** (2.0 / (1.0 + beta))
    rec = InequalityRecord(
        p=acc,
        q=pr_nonzero,
        stab=stab,
        lower=lower,
        upper=upper,
        slack_lo=stab - lower,
        slack_hi=upper - stab,
        passed=min(stab - lower, upper - stab) >= -tolerance,
    )
    return InequalityReport("general-bridging", (rec,), tolerance, (("beta", beta),))


def dnf_useful_terms_check(
    f: DecisionList, beta_fix: float, tolerance: float = SLACK_TOL
) -> InequalityReport:
    """Expected number of surviving terms of a DNF after fixing each variable
    with probability beta_fix, against the closed-form bound (4/beta_fix)^w."""
    if not is_dnf_shaped(f):
        raise DecisionListError(
            'not DNF-shaped: need all values "1" except a "0" default'
        )
    if not 0.0 < beta_fix < 1.0:
        raise DecisionListError(f"beta_fix={beta_fix} must be in (0,1)")
    q = useful_distribution(f, UniformStars(1.0 - beta_fix)).as_floats()
    expected_terms = float(sum(q[:-1]))  # the default rule is not a term
    bound = (4.0 / beta_fix) ** f.width
    slack = bound - expected_terms
    rec = InequalityRecord(
        q=expected_terms, upper=bound, slack_hi=slack,
        passed=slack >= -tolerance, note="expected surviving terms vs bound",
    )
    return InequalityReport(
        "dnf-useful-terms", (rec,), tolerance,
        (("beta_fix", beta_fix), ("w", f.width)),
    )


def sum_identities_check(
    L: DecisionList,
    alphas: Sequence[float] = (0.25, 0.5, 0.75),
    tolerance: float = SUM_TOL,
) -> InequalityReport:
    """Mass-balance identities: exact hit probabilities sum to exactly 1, and
    the useful-probability mass equals the expected reachable count under
    each independent-star model (two aggregation orders of the same sum)."""
    records = []
    total = sum(hit_distribution(L).values)
    records.append(
        InequalityRecord(
            p=float(total), lower=1.0, upper=1.0,
            slack_lo=float(total) - 1.0, slack_hi=1.0 - float(total),
            passed=total == 1, note="hit mass (exact)",
        )
    )
    for alpha in alphas:
        q_sum = sum(useful_distribution(L, UniformStars(alpha)).as_floats())
        e = expected_usenum(L, UniformStars(alpha))
        diff = q_sum - e
        records.append(
            InequalityRecord(
                q=q_sum, lower=e, upper=e, slack_lo=diff, slack_hi=-diff,
                passed=abs(diff) <= tolerance, note=f"useful mass, alpha={alpha}",
            )
        )
    return InequalityReport(
        "sum-identities", tuple(records), tolerance, (("alphas", tuple(alphas)),)
    )


def is_dnf_shaped(L: DecisionList) -> bool:
    """All non-default values "1" and the default "0"."""
    return (
        all(r.value == "1" for r in L.rules[:-1]) and L.rules[-1].value == "0"
    )


# ---------------------------------------------------------------------------
# Monte Carlo plumbing
# ---------------------------------------------------------------------------


def _chunk_sizes(total: int, chunk: int = MC_CHUNK) -> list[int]:
    if total < 1:
        raise DecisionListError(f"sample count {total} must be positive")
    out = [chunk] * (total // chunk)
    if total % chunk:
        out.append(total % chunk)
    return out


def _map_chunks(fn, argslist, workers: int):
    if workers <= 1 or len(argslist) <= 1:
        return [fn(a) for a in argslist]
    with multiprocessing.Pool(min(workers, len(argslist))) as pool:
        return pool.map(fn, argslist)


def index_batch(L: DecisionList, bits: np.ndarray) -> np.ndarray:
    """First-match rule indices for a (samples, n) boolean matrix."""
    S = bits.shape[0]
    out = np.zeros(S, dtype=np.int32)
    undecided = np.ones(S, dtype=bool)
    for i, rule in enumerate(L.rules, 1):
        sat = undecided.copy()
        for v in rule.term.pos:
            sat &= bits[:, v - 1]
        for v in rule.term.neg:
            sat &= ~bits[:, v - 1]
        out[sat] = i
        undecided &= ~sat
        if not undecided.any():
            break
    return out


def _hit_chunk(args) -> np.ndarray:
    L, count, rng = args
    bits = rng.generator().integers(0, 2, size=(count, L.n)).astype(bool)
    idx = index_batch(L, bits)
    return np.bincount(idx, minlength=L.size + 1)[1:]


def _stability_chunk(args) -> np.ndarray:
    L, beta, count, rng = args
    gen = rng.generator()
    x = gen.integers(0, 2, size=(count, L.n)).astype(bool)
    flips = gen.random(size=(count, L.n)) < (1.0 - beta) / 2.0
    ix = index_batch(L, x)
    iy = index_batch(L, x ^ flips)
    both = ix == iy
    return np.bincount(ix[both], minlength=L.size + 1)[1:]


def _useful_chunk(args):
    L, model, count, rng = args
    counts = np.zeros(L.size, dtype=np.int64)
    total = 0
    for s in range(count):
        rho = sample_restriction(L.n, model, rng.child(s))
        found = useful_indices(restrict(L, rho))
        total += len(found)
        for i in found:
            counts[i - 1] += 1
    return counts, total
