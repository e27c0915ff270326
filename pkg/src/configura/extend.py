"""Extension of configurations v_k -> (v+1)_k through E-aggregates.

An E-aggregate is k-1 pairwise disjoint lines (rows) plus k-1 pairwise
non-collinear points (columns) whose critical submatrix is a permutation.
Applying it appends one row and one column and moves the k-1 critical units
onto them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import gf as gfmod
from .errors import (CapacityExceeded, InvalidAggregate, PreconditionFailed,
                     ShapeTooSmall, WeightsNotBinary)
from .matrix import (BdcMatrix, IncidenceMatrix, _cols, _perfect_matching,
                     block_pattern, is_configuration, remove_permutations,
                     select_blocks, structure_e_check, trim_uniform)


@dataclass(frozen=True)
class EAggregate:
    rows: tuple[int, ...]
    cols: tuple[int, ...]
    pi: tuple[int, ...]  # unit of row rows[u] sits in column cols[pi[u]]

    def units(self):
        return [(self.rows[u], self.cols[self.pi[u]]) for u in range(len(self.rows))]


@dataclass
class ExtensionPlan:
    aggregates: list[EAggregate] = field(default_factory=list)
    complete: bool = False  # True when the plan is known to be maximal or has maxCount entries
    method: str = ""

    def __len__(self):
        return len(self.aggregates)


def _column_bits(M: IncidenceMatrix) -> list[int]:
    cols = [0] * M.n_cols
    for i, r in enumerate(M.rows):
        for c in _cols(r):
            cols[c] |= 1 << i
    return cols


def check_aggregate(M: IncidenceMatrix, k: int, agg: EAggregate, colbits=None) -> str | None:
    """Reason the aggregate is invalid for M, or None when it is fine."""
    n = k - 1
    if len(agg.rows) != n or len(agg.cols) != n or sorted(agg.pi) != list(range(n)):
        return "wrong aggregate size or pi is not a permutation"
    if len(set(agg.rows)) != n or len(set(agg.cols)) != n:
        return "repeated rows or columns"
    if any(not 0 <= r < M.n_rows for r in agg.rows) or any(not 0 <= c < M.n_cols for c in agg.cols):
        return "index out of range"
    colmask = 0
    for c in agg.cols:
        colmask |= 1 << c
    for u, r in enumerate(agg.rows):
        hit = M.rows[r] & colmask
        if hit != 1 << agg.cols[agg.pi[u]]:
            return f"critical submatrix row {u} is not a permutation row"
    for a in range(n):
        for b in range(a + 1, n):
            if M.rows[agg.rows[a]] & M.rows[agg.rows[b]]:
                return f"lines {agg.rows[a]} and {agg.rows[b]} intersect"
    colbits = colbits or _column_bits(M)
    for a in range(n):
        for b in range(a + 1, n):
            if colbits[agg.cols[a]] & colbits[agg.cols[b]]:
                return f"points {agg.cols[a]} and {agg.cols[b]} are collinear"
    return None


def apply_extension(M: IncidenceMatrix, k: int, agg: EAggregate) -> IncidenceMatrix:
    why = check_aggregate(M, k, agg)
    if why:
        raise InvalidAggregate(why)
    v = M.n_rows
    rows = list(M.rows)
    new_col = 1 << v
    new_row = new_col  # b_{v+1,v+1} = 1
    for r, c in agg.units():
        rows[r] = (rows[r] & ~(1 << c)) | new_col
        new_row |= 1 << c
    rows.append(new_row)
    return IncidenceMatrix(v + 1, M.n_cols + 1, rows,
                           provenance=M.provenance + ("extend",))


def structure_e_capacity(t: int, d: int, k: int) -> tuple[int, int]:
    if k < 2 or t < k or d < k - 1:
        raise ShapeTooSmall(f"need k >= 2, t >= k, d >= k-1 (t={t}, d={d}, k={k})")
    theta = t * (d // (k - 1))
    return theta, theta // (k - 1)


def _structure_e_plan(M: IncidenceMatrix, k: int, t: int, d: int, max_count: int) -> list[EAggregate]:
    pat = block_pattern(M, t, d)
    adj = [[j for j in range(t) if pat[i, j]] for i in range(t)]
    match = _perfect_matching(adj, t)
    per_block = d // (k - 1)
    plan = []
    for bi in range(t):
        bj = match[bi]
        for g in range(per_block):
            if len(plan) >= max_count:
                return plan
            rows = tuple(bi * d + g * (k - 1) + u for u in range(k - 1))
            cols = []
            for r in rows:
                hit = [c for c in _cols(M.rows[r]) if bj * d <= c < (bj + 1) * d]
                cols.append(hit[0])
            order = sorted(range(k - 1), key=lambda u: cols[u])
            scols = tuple(cols[u] for u in order)
            pi = tuple(order.index(u) for u in range(k - 1))
            plan.append(EAggregate(rows, scols, pi))
    return plan


def _greedy_plan(M: IncidenceMatrix, k: int, max_count: int, budget: int):
    """Greedy disjoint aggregates with bounded backtracking for each one.
    Returns (plan, exhausted) where exhausted means the last search ran to the end."""
    n = k - 1
    colbits = _column_bits(M)
    used_rows: set[int] = set()
    used_cols: set[int] = set()
    plan: list[EAggregate] = []
    nodes = 0

    class Out(Exception):
        pass

    def search():
        nonlocal nodes
        rows: list[int] = []
        cols: list[int] = []

        def rec(start):
            nonlocal nodes
            nodes += 1
            if nodes > budget:
                raise Out
            if len(rows) == n:
                return True
            for r in range(start, M.n_rows):
                if r in used_rows or any(M.rows[r] & M.rows[x] for x in rows):
                    continue
                for c in _cols(M.rows[r]):
                    if c in used_cols or c in cols:
                        continue
                    # the unit must be alone in its column among chosen rows,
                    # and chosen columns must avoid r
                    if any((M.rows[x] >> c) & 1 for x in rows):
                        continue
                    if any((M.rows[r] >> y) & 1 for y in cols):
                        continue
                    if any(colbits[c] & colbits[y] for y in cols):
                        continue
                    rows.append(r)
                    cols.append(c)
                    if rec(r + 1):
                        return True
                    rows.pop()
                    cols.pop()
            return False

        if rec(0):
            order = sorted(range(n), key=lambda u: cols[u])
            return EAggregate(tuple(rows), tuple(cols[u] for u in order),
                              tuple(order.index(u) for u in range(n)))
        return None

    try:
        while len(plan) < max_count:
            agg = search()
            if agg is None:
                return plan, True
            plan.append(agg)
            used_rows.update(agg.rows)
            used_cols.update(agg.cols)
    except Out:
        return plan, False
    return plan, True


def find_e_aggregates(M: IncidenceMatrix, k: int, max_count: int,
                      block_shape=None, budget: int = 200_000) -> ExtensionPlan:
    if k < 2:
        raise PreconditionFailed("aggregates need k >= 2")
    shape = block_shape or M.block_shape
    if shape:
        t, d = shape
        try:
            if structure_e_check(M, t, d):
                plan = _structure_e_plan(M, k, t, d, max_count)
                cap = structure_e_capacity(t, d, k)[0]
                if len(plan) < min(t, max_count):
                    raise AssertionError("structure E gave fewer than t aggregates")
                return ExtensionPlan(plan, len(plan) == max_count or len(plan) == cap, "structure-e")
        except ShapeTooSmall:
            pass
        except PreconditionFailed:
            pass
    plan, exhausted = _greedy_plan(M, k, max_count, budget)
    return ExtensionPlan(plan, exhausted or len(plan) == max_count, "greedy")


def extend_many(M: IncidenceMatrix, k: int, theta: int, plan: ExtensionPlan | None = None,
                block_shape=None) -> IncidenceMatrix:
    """theta applications of Procedure E; once the plan runs dry, groups of k-1
    freshly added rows and columns are recycled as new aggregates."""
    if theta <= 0:
        return M
    if k == 1:
        rows = list(M.rows)
        v = M.n_rows
        rows += [1 << (v + i) for i in range(theta)]
        return IncidenceMatrix(v + theta, v + theta, rows, provenance=M.provenance + (f"extend x{theta}",))
    if plan is None:
        plan = find_e_aggregates(M, k, theta, block_shape=block_shape)
    cur = M
    pool_rows: list[int] = []
    pool_cols: list[int] = []
    done = 0
    for agg in plan.aggregates[:theta]:
        cur = apply_extension(cur, k, agg)
        pool_rows.append(cur.n_rows - 1)
        pool_cols.append(cur.n_cols - 1)
        done += 1
    while done < theta:
        if len(pool_rows) < k - 1:
            raise CapacityExceeded(f"only {done} extensions available", done)
        rows = tuple(pool_rows[:k - 1])
        cols = tuple(pool_cols[:k - 1])
        del pool_rows[:k - 1]
        del pool_cols[:k - 1]
        pi = []
        colpos = {c: i for i, c in enumerate(cols)}
        for r in rows:
            hit = [c for c in _cols(cur.rows[r]) if c in colpos]
            if len(hit) != 1:
                raise CapacityExceeded(f"recycled rows do not form an aggregate after {done}", done)
            pi.append(colpos[hit[0]])
        cur = apply_extension(cur, k, EAggregate(rows, cols, tuple(pi)))
        pool_rows.append(cur.n_rows - 1)
        pool_cols.append(cur.n_cols - 1)
        done += 1
    return cur.with_provenance(f"extend x{theta}")


def max_extensions(M: IncidenceMatrix, k: int, plan: ExtensionPlan) -> int:
    """How many extensions extend_many can perform from this plan."""
    if k == 1:
        return 10 ** 9
    n = len(plan)
    total, pool = n, n
    while pool >= k - 1:
        pool -= k - 1
        pool += 1
        total += 1
    return total


# -- the affine-plane family ---------------------------------------------------

def ag_block_matrix(q: int, s: int = 0) -> IncidenceMatrix:
    """(q^2 - qs) x (q^2 - qs) matrix of AG(2,q) without the vertical class.
    Block row w = slope class, block column x = abscissa; rows inside a block
    row are intercepts u, columns inside a block column are ordinates y.
    The last s block rows and columns are dropped."""
    F = gfmod.gf(q)
    if not 0 <= s < q:
        raise PreconditionFailed(f"s={s} not in [0, {q})")
    add, mul = F.add_table(), F.mul_table()
    t = q - s
    rows = []
    for w in range(t):
        for u in range(q):
            bits = 0
            for x in range(t):
                y = int(add[mul[w, x], u])
                bits |= 1 << (x * q + y)
            rows.append(bits)
    return IncidenceMatrix(t * q, t * q, rows, block_shape=(t, q),
                           provenance=(f"ag q={q} s={s}",))


def mask_blocks(M: IncidenceMatrix, t: int, d: int, delta: int) -> IncidenceMatrix:
    """Zero block (I, J) whenever (J - I) mod t < delta (the circulant S_delta)."""
    rows = []
    for i, r in enumerate(M.rows):
        I = i // d
        keep = 0
        for J in range(t):
            if (J - I) % t >= delta:
                keep |= ((1 << d) - 1) << (J * d)
        rows.append(r & keep)
    return IncidenceMatrix(M.n_rows, M.n_cols, rows, block_shape=(t, d),
                           provenance=M.provenance + (f"mask delta={delta}",))


def extension_family_ag(q: int, s: int, delta: int, theta: int) -> IncidenceMatrix:
    """Configuration (q^2 - qs + theta)_(q - s - delta)."""
    if not 0 <= s < q:
        raise PreconditionFailed(f"s={s} not in [0, {q})")
    if not 0 <= delta < q - s:
        raise PreconditionFailed(f"delta={delta} not in [0, {q - s})")
    if not 0 <= theta <= q - s + 1:
        raise PreconditionFailed(f"theta={theta} not in [0, {q - s + 1}]")
    t = q - s
    k = t - delta
    M = ag_block_matrix(q, s)
    if delta:
        M = mask_blocks(M, t, q, delta)
    if theta == 0:
        return M
    if k == 1:
        return extend_many(M, k, theta)
    plan = find_e_aggregates(M, k, theta, block_shape=(t, q))
    out = extend_many(M, k, theta, plan)
    return out.with_provenance(f"ag-family q={q} s={s} delta={delta} theta={theta}")


# -- families from 0/1 weight vectors -------------------------------------------

@dataclass(frozen=True)
class FamilyEntry:
    v: int
    k: int
    recipe: tuple  # chain steps applied to the BDC matrix


def family_from_weights(B: BdcMatrix, max_delta: int | None = None) -> list[FamilyEntry]:
    """Parameters reachable from a BDC matrix with weights (0,1,...,1) or
    (1,...,1) up to rotation: pick c block rows, extend theta <= c+1 times,
    then drop delta permutations."""
    w = B.weight_vector()
    if any(x not in (0, 1) for x in w):
        raise WeightsNotBinary(f"weights {w} are not 0/1")
    zeros = [h for h, x in enumerate(w) if x == 0]
    if len(zeros) > 1:
        raise WeightsNotBinary(f"weights {w} have more than one zero")
    j = zeros[0] if zeros else 0
    base = 0 if zeros else 1
    out = []
    for c in range(2, B.t + 1):
        k = c - 1 + base
        if k < 1:
            continue
        top = k - 1 if max_delta is None else min(k - 1, max_delta)
        for theta in range(0, c + 2):
            for delta in range(0, top + 1):
                recipe = ({"op": "select_blocks", "j": j, "c": c}, {"op": "expand"},
                          {"op": "extend", "theta": theta},
                          {"op": "remove_permutations", "delta": delta})
                out.append(FamilyEntry(c * B.d + theta, k - delta, recipe))
    return out


def build_family_entry(B: BdcMatrix, entry: FamilyEntry) -> IncidenceMatrix:
    sel, _, ext, rem = entry.recipe
    S = select_blocks(B, sel["j"], sel["c"])
    M = S.expand()
    k = S.k
    M = extend_many(M, k, ext["theta"], block_shape=(S.t, S.d)) if k >= 2 else extend_many(M, k, ext["theta"])
    return remove_permutations(M, k, rem["delta"])


def baer_binary(B: BdcMatrix) -> BdcMatrix:
    """Trim a (w0, 1, ..., 1) weight vector down to all ones."""
    w = B.weight_vector()
    if any(x != 1 for x in w[1:]):
        raise WeightsNotBinary(f"weights {w} are not of the form (w0, 1, ..., 1)")
    return trim_uniform(B, [w[0] - 1] + [0] * (B.t - 1))
