"""Golomb rulers and (v,k) modular Golomb rulers.

A (v,k) modular Golomb ruler is a set of k residues mod v whose k(k-1) ordered
differences are distinct and nonzero. It is the same object as a cyclic
symmetric configuration v_k (via its circulant incidence matrix).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import refdata
from .errors import (BadMarks, EmptyRange, InvalidRuler, ModulusBelowGolombBound,
                     ModulusTooSmall, NotADivisor, NotASubset, NotCoprime,
                     OutOfTable)


def _check_marks(marks: Sequence[int], v: int) -> tuple[int, ...]:
    ms = tuple(int(a) for a in marks)
    if v < 1:
        raise BadMarks(f"modulus must be positive, got {v}")
    for i, a in enumerate(ms):
        if not 0 <= a < v:
            raise BadMarks(f"mark {a} outside [0, {v})")
        if i and ms[i - 1] >= a:
            raise BadMarks("marks must be strictly increasing")
    return ms


@dataclass(frozen=True)
class ModularRuler:
    marks: tuple[int, ...]
    v: int

    def __post_init__(self):
        object.__setattr__(self, "marks", _check_marks(self.marks, self.v))

    @classmethod
    def of(cls, marks: Iterable[int], v: int) -> "ModularRuler":
        """Build from any residues: reduces mod v and sorts."""
        ms = sorted({int(a) % v for a in marks})
        return cls(tuple(ms), v)

    @property
    def k(self) -> int:
        return len(self.marks)

    def is_valid(self) -> bool:
        return validate_modular(self.marks, self.v)[0]

    def normalized(self) -> "ModularRuler":
        """Translate so that the first mark is 0."""
        if not self.marks:
            return self
        a0 = self.marks[0]
        return ModularRuler.of((a - a0 for a in self.marks), self.v)

    def to_text(self) -> str:
        return f"{self.v}:{self.k}:" + ",".join(map(str, self.marks))

    @classmethod
    def from_text(cls, s: str) -> "ModularRuler":
        try:
            v, k, body = s.strip().split(":")
            marks = tuple(int(x) for x in body.split(",") if x != "")
            v, k = int(v), int(k)
        except ValueError as e:
            raise BadMarks(f"cannot parse ruler text {s!r}") from e
        if len(marks) != k:
            raise BadMarks(f"declared k={k} but {len(marks)} marks given")
        return cls(marks, v)

    def to_json(self) -> dict:
        return {"v": self.v, "marks": list(self.marks)}

    @classmethod
    def from_json(cls, obj) -> "ModularRuler":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(tuple(obj["marks"]), int(obj["v"]))

    def __str__(self):
        return f"({','.join(map(str, self.marks))}) mod {self.v}"


@dataclass(frozen=True)
class GolombRuler:
    marks: tuple[int, ...]

    def __post_init__(self):
        ms = tuple(int(a) for a in self.marks)
        if not ms or ms[0] != 0:
            raise BadMarks("Golomb ruler marks must start at 0")
        if any(b <= a for a, b in zip(ms, ms[1:])):
            raise BadMarks("marks must be strictly increasing")
        object.__setattr__(self, "marks", ms)

    @property
    def k(self) -> int:
        return len(self.marks)

    @property
    def length(self) -> int:
        return self.marks[-1]

    def is_valid(self) -> bool:
        ds = [b - a for i, a in enumerate(self.marks) for b in self.marks[i + 1:]]
        return len(ds) == len(set(ds))


@dataclass
class DifferenceProfile:
    v: int
    covered: int  # bit d set iff residue d is some ordered difference
    collisions: list[int] = field(default_factory=list)
    uncovered_count: int = 0

    def uncovered(self) -> list[int]:
        return [d for d in range(1, self.v) if not (self.covered >> d) & 1]


def difference_counts(marks: Sequence[int], v: int) -> np.ndarray:
    a = np.asarray(marks, dtype=np.int64)
    d = (a[:, None] - a[None, :]) % v
    return np.bincount(d.ravel(), minlength=v)


def validate_modular(marks: Sequence[int], v: int) -> tuple[bool, DifferenceProfile]:
    ms = _check_marks(marks, v)
    k = len(ms)
    if k < 2:
        return True, DifferenceProfile(v, 0, [], max(v - 1, 0))
    counts = difference_counts(ms, v)
    counts[0] -= k  # the diagonal
    hit = np.flatnonzero(counts[1:]) + 1
    covered = 0
    for d in hit.tolist():
        covered |= 1 << d
    collisions = (np.flatnonzero(counts > 1)).tolist()
    prof = DifferenceProfile(v, covered, collisions, v - 1 - len(hit))
    return not collisions and counts[0] == 0, prof


def is_modular_sidon(marks: Sequence[int], v: int) -> bool:
    """All sums a_i + a_j (i <= j) distinct mod v."""
    sums = [(a + b) % v for i, a in enumerate(marks) for b in marks[i:]]
    return len(sums) == len(set(sums))


def deficiency(r: ModularRuler) -> tuple[int, list[int]]:
    ok, prof = validate_modular(r.marks, r.v)
    if not ok:
        raise InvalidRuler(f"{r} is not a modular Golomb ruler")
    d = r.v - (r.k * r.k - r.k + 1)
    unc = prof.uncovered()
    if len(unc) != d and r.k >= 2:
        raise AssertionError("deficiency does not match uncovered count")
    return d, unc


def affine_map(r: ModularRuler, m: int, b: int = 0) -> ModularRuler:
    if math.gcd(m, r.v) != 1:
        raise NotCoprime(f"gcd({m}, {r.v}) != 1")
    return ModularRuler.of((m * a + b for a in r.marks), r.v)


def delete_marks(r: ModularRuler, subset: Iterable[int]) -> ModularRuler:
    sub = set(int(a) for a in subset)
    if not sub <= set(r.marks):
        raise NotASubset(f"{sorted(sub - set(r.marks))} not among the marks")
    return ModularRuler(tuple(a for a in r.marks if a not in sub), r.v)


def retest_modulus(marks: Sequence[int], v2: int) -> bool:
    if marks and max(marks) >= v2:
        raise ModulusTooSmall(f"mark {max(marks)} does not fit modulus {v2}")
    return validate_modular(sorted(marks), v2)[0]


def _pair_sums(marks: Sequence[int]) -> np.ndarray | None:
    """Sums d + d' (d <= d') of positive differences, or None if two differences coincide."""
    a = np.asarray(sorted(marks), dtype=np.int64)
    iu = np.triu_indices(len(a), 1)
    d = (a[None, :] - a[:, None])[iu]
    if len(np.unique(d)) != len(d):
        return None
    ju = np.triu_indices(len(d))
    return (d[:, None] + d[None, :])[ju]


def delta_scan(marks: Sequence[int], v_low: int, v_high: int) -> list[int]:
    """All v' in [v_low, v_high] for which the marks are a ruler mod v'.

    Marks all below v', so two differences d, d' collide mod v' exactly when
    d == d' or d + d' == v'.
    """
    if v_high < v_low:
        raise EmptyRange(f"empty range [{v_low}, {v_high}]")
    if marks and v_low <= max(marks):
        raise ModulusTooSmall(f"v_low={v_low} must exceed every mark")
    if len(marks) < 2:
        return list(range(v_low, v_high + 1))
    sums = _pair_sums(marks)
    if sums is None:
        return []
    bad = np.zeros(v_high + 1, dtype=bool)
    sums = sums[sums <= v_high]
    bad[sums] = True
    return [v for v in range(v_low, v_high + 1) if not bad[v]]


def modular_from_golomb(g: GolombRuler, v: int) -> ModularRuler:
    if v < 2 * g.length + 1:
        raise ModulusBelowGolombBound(f"v={v} < 2L+1={2 * g.length + 1}")
    r = ModularRuler(g.marks, v)
    if __debug__:
        assert r.is_valid(), "Golomb ruler did not stay valid modulo v"
    return r


def quotient(r: ModularRuler, t: int) -> list[tuple[ModularRuler, int]]:
    """Quotient rulers B_h = {(a - h)/t : a = h mod t}, h = 0..t-1."""
    if t < 1 or r.v % t:
        raise NotADivisor(f"{t} does not divide {r.v}")
    d = r.v // t
    out = []
    for h in range(t):
        bh = tuple((a - h) // t for a in r.marks if a % t == h)
        out.append((ModularRuler(bh, d), len(bh)))
    return out


def canonical_form(r: ModularRuler) -> ModularRuler:
    """Lexicographically least image under translations and unit multipliers
    (reflection is the multiplier -1). Expensive: v * phi(v) images."""
    v = r.v
    best = None
    for m in range(1, v):
        if math.gcd(m, v) != 1:
            continue
        img = sorted(m * a % v for a in r.marks)
        for a0 in img:
            cand = tuple(sorted((x - a0) % v for x in img))
            if best is None or cand < best:
                best = cand
    if best is None:  # v == 1
        best = r.marks
    return ModularRuler(best, v)


def plane_bound(k: int) -> int:
    if k < 1:
        raise ValueError("k must be positive")
    return k * k - k + 1


def golomb_bound(k: int) -> int:
    try:
        return refdata.GOLOMB_BOUND[k]
    except KeyError:
        raise OutOfTable(f"no embedded G(k) for k={k}") from None


# -- exhaustive oracle ---------------------------------------------------------

@dataclass
class OracleResult:
    outcome: str  # "exists" | "not_exists" | "budget_exceeded"
    witness: ModularRuler | None = None
    nodes: int = 0

    @property
    def exists(self) -> bool:
        return self.outcome == "exists"


class _BudgetHit(Exception):
    pass


def oracle_shards(v: int, k: int) -> list[int]:
    """Work units for oracle_exists: the admissible values of the first gap."""
    if k < 2:
        return [0]
    # k distinct cyclic gaps, all > g1 except g1 itself, sum to v
    top = (v - k * (k - 1) // 2) // k
    return list(range(1, max(top, 0) + 1))


def oracle_exists(v: int, k: int, budget: int | None = None,
                  shards: Iterable[int] | None = None) -> OracleResult:
    """Exhaustive backtracking for a (v,k) modular Golomb ruler.

    Canonical candidates: a_1 = 0, the first gap a_2 is the strictly smallest
    cyclic gap, and (k >= 3) the second gap is smaller than the wrap gap
    v - a_k, which removes the reflection. Budget counts search nodes.
    """
    if v < 1 or k < 1:
        raise ValueError("need v >= 1 and k >= 1")
    if k > v:
        return OracleResult("not_exists", None, 0)
    if k == 1:
        return OracleResult("exists", ModularRuler((0,), v), 1)
    if k * (k - 1) > v - 1:
        return OracleResult("not_exists", None, 0)
    budget = budget if budget is not None else float("inf")
    nodes = 0
    full = (1 << v) - 1

    def rot(b, s):
        s %= v
        return ((b << s) | (b >> (v - s))) & full

    found = None

    def dfs(marks, P, N, used, g1):
        nonlocal nodes, found
        nodes += 1
        if nodes > budget:
            raise _BudgetHit
        j = len(marks)
        last = marks[-1]
        if j == k:
            if k >= 3 and marks[2] - marks[1] >= v - last:
                return False
            found = tuple(marks)
            return True
        r = k - j
        xmax = v - (r * g1 + r * (r + 1) // 2)
        for x in range(last + g1 + 1, xmax + 1):
            Q = rot(N, x)       # bits (x - a_i)
            Q2 = rot(P, v - x)  # bits (a_i - x)
            if (Q | Q2) & used or Q & Q2:
                continue
            marks.append(x)
            if dfs(marks, P | (1 << x), N | (1 << ((v - x) % v)), used | Q | Q2, g1):
                return True
            marks.pop()
        return False

    todo = oracle_shards(v, k) if shards is None else sorted(shards)
    try:
        for g1 in todo:
            if 2 * g1 == v:
                continue
            P = 1 | (1 << g1)
            N = 1 | (1 << (v - g1))
            used = (1 << g1) | (1 << (v - g1))
            if k == 2:
                nodes += 1
                if g1 < v - g1:
                    found = (0, g1)
                    break
                continue
            if dfs([0, g1], P, N, used, g1):
                break
    except _BudgetHit:
        return OracleResult("budget_exceeded", None, nodes)
    if found is not None:
        w = ModularRuler(found, v)
        if not w.is_valid():
            raise AssertionError(f"oracle produced invalid witness {w}")
        return OracleResult("exists", w, nodes)
    return OracleResult("not_exists", None, nodes)


def merge_oracle_results(results: Iterable[OracleResult]) -> OracleResult:
    """Combine per-shard results; order independent."""
    results = list(results)
    nodes = sum(r.nodes for r in results)
    wits = [r.witness for r in results if r.exists]
    if wits:
        return OracleResult("exists", min(wits, key=lambda w: w.marks), nodes)
    if any(r.outcome == "budget_exceeded" for r in results):
        return OracleResult("budget_exceeded", None, nodes)
    return OracleResult("not_exists", None, nodes)
