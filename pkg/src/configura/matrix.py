"""Incidence matrices of configurations and the block double-circulant machinery.

Convention: rows are lines, columns are points. A circulant built from a
ruler has row i = {a + i mod v : a in marks}.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (BadC, BadF, DeltaTooBig, InvalidRuler, MatchingFailed,
                     NotADivisor, NotRegular, PreconditionFailed, ShapeMismatch,
                     TOdd)
from .ruler import ModularRuler, quotient, validate_modular


def _bits(cols: Iterable[int]) -> int:
    x = 0
    for c in cols:
        x |= 1 << int(c)
    return x


def _cols(bits: int) -> list[int]:
    out = []
    while bits:
        low = bits & -bits
        out.append(low.bit_length() - 1)
        bits ^= low
    return out


class IncidenceMatrix:
    """0/1 matrix with one Python int bitset per row."""

    __slots__ = ("n_rows", "n_cols", "rows", "block_shape", "provenance", "_dense")

    def __init__(self, n_rows: int, n_cols: int, rows: Sequence[int],
                 block_shape=None, provenance: Sequence[str] = ()):
        if len(rows) != n_rows:
            raise ShapeMismatch(f"{len(rows)} rows given, expected {n_rows}")
        limit = 1 << n_cols
        for r in rows:
            if r < 0 or r >= limit:
                raise ShapeMismatch("row has bits outside the column range")
        self.n_rows, self.n_cols = n_rows, n_cols
        self.rows = tuple(rows)
        self.block_shape = block_shape
        self.provenance = tuple(provenance)
        self._dense = None

    # -- builders
    @classmethod
    def from_row_sets(cls, row_sets, n_cols: int, **kw) -> "IncidenceMatrix":
        rs = [_bits(s) for s in row_sets]
        return cls(len(rs), n_cols, rs, **kw)

    @classmethod
    def from_dense(cls, a, **kw) -> "IncidenceMatrix":
        a = np.asarray(a, dtype=np.uint8)
        n_rows, n_cols = a.shape
        packed = np.packbits(a, axis=1, bitorder="little")
        rows = [int.from_bytes(packed[i].tobytes(), "little") for i in range(n_rows)]
        m = cls(n_rows, n_cols, rows, **kw)
        m._dense = a.copy()
        m._dense.setflags(write=False)
        return m

    # -- views
    @property
    def is_square(self) -> bool:
        return self.n_rows == self.n_cols

    def to_dense(self) -> np.ndarray:
        if self._dense is None:
            nbytes = max(1, (self.n_cols + 7) // 8)
            buf = b"".join(r.to_bytes(nbytes, "little") for r in self.rows)
            arr = np.frombuffer(buf, dtype=np.uint8).reshape(self.n_rows, nbytes)
            d = np.unpackbits(arr, axis=1, bitorder="little")[:, :self.n_cols]
            d.setflags(write=False)
            self._dense = d
        return self._dense

    def row_sets(self) -> list[list[int]]:
        return [_cols(r) for r in self.rows]

    def get(self, i: int, j: int) -> int:
        return (self.rows[i] >> j) & 1

    def row_weights(self) -> list[int]:
        return [r.bit_count() for r in self.rows]

    def col_weights(self) -> list[int]:
        return self.to_dense().sum(axis=0, dtype=np.int64).tolist()

    def transpose(self) -> "IncidenceMatrix":
        return IncidenceMatrix.from_dense(self.to_dense().T, provenance=self.provenance)

    def with_provenance(self, *steps: str, block_shape=None) -> "IncidenceMatrix":
        m = IncidenceMatrix(self.n_rows, self.n_cols, self.rows,
                            block_shape=block_shape, provenance=self.provenance + steps)
        m._dense = self._dense
        return m

    def __eq__(self, other):
        if not isinstance(other, IncidenceMatrix):
            return NotImplemented
        return (self.n_rows, self.n_cols, self.rows) == (other.n_rows, other.n_cols, other.rows)

    def __hash__(self):
        return hash((self.n_rows, self.n_cols, self.rows))

    def __repr__(self):
        return f"IncidenceMatrix({self.n_rows}x{self.n_cols})"

    # -- export / import
    def to_text(self) -> str:
        d = self.to_dense()
        return "\n".join("".join("1" if x else "0" for x in row) for row in d) + "\n"

    @classmethod
    def from_text(cls, s: str) -> "IncidenceMatrix":
        lines = [ln.strip() for ln in s.splitlines() if ln.strip()]
        if not lines:
            raise ShapeMismatch("empty matrix text")
        n = len(lines[0])
        if any(len(ln) != n or set(ln) - {"0", "1"} for ln in lines):
            raise ShapeMismatch("ragged or non-binary matrix text")
        return cls.from_dense([[c == "1" for c in ln] for ln in lines])

    def to_json(self) -> dict:
        w = self.row_weights()
        obj = {"v": self.n_cols, "k": w[0] if w and len(set(w)) == 1 else None,
               "rows": self.row_sets()}
        if not self.is_square:
            obj["b"] = self.n_rows
        return obj

    @classmethod
    def from_json(cls, obj) -> "IncidenceMatrix":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls.from_row_sets(obj["rows"], int(obj["v"]))

    def to_alist(self) -> str:
        """MacKay alist: N M, max weights, column/row weights, then adjacency (1-based, zero padded)."""
        rows = self.row_sets()
        cols = [[] for _ in range(self.n_cols)]
        for i, r in enumerate(rows):
            for j in r:
                cols[j].append(i)
        mc = max((len(c) for c in cols), default=0)
        mr = max((len(r) for r in rows), default=0)
        out = [f"{self.n_cols} {self.n_rows}", f"{mc} {mr}",
               " ".join(str(len(c)) for c in cols), " ".join(str(len(r)) for r in rows)]
        for c in cols:
            out.append(" ".join(str(i + 1) for i in c + [-1] * (mc - len(c))))
        for r in rows:
            out.append(" ".join(str(j + 1) for j in r + [-1] * (mr - len(r))))
        return "\n".join(out) + "\n"

    @classmethod
    def from_alist(cls, s: str) -> "IncidenceMatrix":
        nums = [list(map(int, ln.split())) for ln in s.splitlines() if ln.strip()]
        n_cols, n_rows = nums[0]
        row_lines = nums[4 + n_cols: 4 + n_cols + n_rows]
        return cls.from_row_sets([[j - 1 for j in ln if j > 0] for ln in row_lines], n_cols)


# -- verification -------------------------------------------------------------

@dataclass
class ConfigCheck:
    ok: bool
    reason: str | None = None

    def __bool__(self):
        return self.ok


def _gram_violation(a: np.ndarray, chunk: int = 1024):
    """First (i, j), i < j, whose rows share two or more columns, else None."""
    f = a.astype(np.float32)
    n = f.shape[0]
    for s in range(0, n, chunk):
        g = f[s:s + chunk] @ f.T
        rows = np.arange(s, min(s + chunk, n))
        g[rows - s, rows] = 0
        g[np.arange(len(rows))[:, None] >= np.arange(n)[None, :] - s] = 0
        bad = np.argwhere(g > 1.5)
        if len(bad):
            i, j = bad[0]
            return int(i + s), int(j)
    return None


def is_configuration(M: IncidenceMatrix, k: int) -> ConfigCheck:
    if not M.is_square:
        return ConfigCheck(False, f"not square: {M.n_rows}x{M.n_cols}")
    rw = M.row_weights()
    for i, w in enumerate(rw):
        if w != k:
            return ConfigCheck(False, f"row {i} has weight {w}, expected {k}")
    for j, w in enumerate(M.col_weights()):
        if w != k:
            return ConfigCheck(False, f"column {j} has weight {w}, expected {k}")
    if M.n_rows <= 400:
        rows = M.rows
        for i in range(len(rows)):
            ri = rows[i]
            for j in range(i + 1, len(rows)):
                if (ri & rows[j]).bit_count() > 1:
                    return ConfigCheck(False, f"rows {i} and {j} share two or more columns")
        return ConfigCheck(True)
    bad = _gram_violation(M.to_dense())
    if bad:
        return ConfigCheck(False, f"rows {bad[0]} and {bad[1]} share two or more columns")
    return ConfigCheck(True)


def is_j2_free(M: IncidenceMatrix) -> bool:
    return _gram_violation(M.to_dense()) is None


# -- circulants and sigma_t ---------------------------------------------------

def _rotate(bits: int, s: int, n: int) -> int:
    s %= n
    full = (1 << n) - 1
    return ((bits << s) | (bits >> (n - s))) & full


def circulant_from_ruler(r: ModularRuler) -> IncidenceMatrix:
    if not validate_modular(r.marks, r.v)[0]:
        raise InvalidRuler(f"{r} is not a modular Golomb ruler")
    return circulant_from_marks(r.marks, r.v, provenance=(f"circulant {r.to_text()}",))


def circulant_from_marks(marks, v, **kw) -> IncidenceMatrix:
    """Circulant with first row `marks`; no validity check."""
    r0 = _bits(marks)
    return IncidenceMatrix(v, v, [_rotate(r0, i, v) for i in range(v)], **kw)


def sigma_t(v: int, t: int) -> np.ndarray:
    """sigma_t(a d + b) = b t + a, 0 <= a < t, 0 <= b < d."""
    if t < 1 or v % t:
        raise NotADivisor(f"{t} does not divide {v}")
    d = v // t
    x = np.arange(v)
    a, b = x // d, x % d
    return b * t + a


def permuted_circulant(r: ModularRuler, perm: Sequence[int]) -> IncidenceMatrix:
    """A_sigma: entry (i, j) is 1 iff perm[j] - perm[i] mod v is a mark."""
    v = r.v
    p = np.asarray(perm)
    ind = np.zeros(v, dtype=np.uint8)
    ind[list(r.marks)] = 1
    return IncidenceMatrix.from_dense(ind[(p[None, :] - p[:, None]) % v])


# -- block double-circulant matrices -------------------------------------------

@dataclass(frozen=True)
class BdcMatrix:
    """t x t grid of d x d circulant blocks, each stored as its first-row set."""
    t: int
    d: int
    blocks: tuple  # t tuples of t frozensets
    provenance: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if len(self.blocks) != self.t or any(len(row) != self.t for row in self.blocks):
            raise ShapeMismatch("block grid is not t x t")
        memo: dict = {}

        def norm(b):
            key = b if isinstance(b, frozenset) else tuple(b)
            out = memo.get(key)
            if out is None:
                out = memo[key] = frozenset(int(x) % self.d for x in b)
            return out

        blocks = tuple(tuple(norm(b) for b in row) for row in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        w = self.weight_vector()
        for i in range(self.t):
            for j in range(self.t):
                if len(blocks[i][j]) != w[(j - i) % self.t]:
                    raise PreconditionFailed(
                        f"block ({i},{j}) weight breaks the circulant weight pattern")

    @classmethod
    def _trusted(cls, t: int, d: int, blocks: tuple, provenance: tuple = ()) -> "BdcMatrix":
        """Skip normalization and the weight-pattern check; for builders whose
        output has that structure by construction."""
        obj = object.__new__(cls)
        for name, val in (("t", t), ("d", d), ("blocks", blocks), ("provenance", provenance)):
            object.__setattr__(obj, name, val)
        return obj

    @property
    def v(self) -> int:
        return self.t * self.d

    @property
    def k(self) -> int:
        return sum(self.weight_vector())

    def weight_vector(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks[0])

    def weight_matrix(self) -> np.ndarray:
        return np.array([[len(b) for b in row] for row in self.blocks], dtype=np.int64)

    def block(self, i: int, j: int) -> frozenset:
        return self.blocks[i][j]

    def expand(self) -> IncidenceMatrix:
        t, d = self.t, self.d
        a = np.zeros((self.v, self.v), dtype=np.uint8)
        units = [(i, j, s) for i, row in enumerate(self.blocks)
                 for j, b in enumerate(row) if b for s in b]
        if units:
            I, J, S = np.array(units, dtype=np.int64).T
            rr = np.arange(d)
            a[I[:, None] * d + rr, J[:, None] * d + (rr + S[:, None]) % d] = 1
        return IncidenceMatrix.from_dense(a, block_shape=(t, d), provenance=self.provenance)

    def is_valid(self) -> bool:
        """Configuration test done on first rows: for every ordered pair of block
        rows and every relative shift, at most one common column."""
        t, d = self.t, self.d
        for i in range(t):
            for i2 in range(i, t):
                cnt = np.zeros(d, dtype=np.int64)
                for j in range(t):
                    a = np.fromiter(self.blocks[i][j], dtype=np.int64)
                    b = np.fromiter(self.blocks[i2][j], dtype=np.int64)
                    if len(a) and len(b):
                        np.add.at(cnt, (a[:, None] - b[None, :]).ravel() % d, 1)
                if i == i2:
                    cnt[0] = 0
                if cnt.max(initial=0) > 1:
                    return False
        return True


def bdc_assemble(r: ModularRuler, t: int) -> BdcMatrix:
    """Block form of the circulant of r under sigma_t: block (i, j) of class
    h = j - i mod t is M_h (first row B_h) when j >= i, else T_h = M_h shifted right."""
    qs = quotient(r, t)
    d = r.v // t
    upper = [frozenset(qr.marks) for qr, _ in qs]
    lower = [frozenset((x + 1) % d for x in qr.marks) for qr, _ in qs]
    blocks = tuple(tuple(upper[(j - i) % t] if j >= i else lower[(j - i) % t] for j in range(t))
                   for i in range(t))
    return BdcMatrix._trusted(t, d, blocks, (f"bdc t={t} of {r.to_text()}",))


def weight_vector(B: BdcMatrix) -> tuple[int, ...]:
    return B.weight_vector()


def weight_matrix(B: BdcMatrix) -> np.ndarray:
    return B.weight_matrix()


def _trim_set(s: frozenset, n: int) -> frozenset:
    return frozenset(sorted(s)[n:])


def trim_uniform(B: BdcMatrix, deltas: Sequence[int]) -> BdcMatrix:
    """Drop delta_h units (lowest residues first) from every block of class h."""
    t = B.t
    if len(deltas) != t:
        raise PreconditionFailed(f"need {t} deltas")
    w = B.weight_vector()
    for h, (dh, wh) in enumerate(zip(deltas, w)):
        if not 0 <= dh <= wh:
            raise DeltaTooBig(f"delta_{h}={dh} not in [0, {wh}]")
    blocks = tuple(tuple(_trim_set(B.blocks[i][j], deltas[(j - i) % t]) for j in range(t))
                   for i in range(t))
    return BdcMatrix(t, B.d, blocks, B.provenance + (f"trim {list(deltas)}",))


def _shift_columns(B: BdcMatrix, j: int) -> BdcMatrix:
    t = B.t
    blocks = tuple(tuple(B.blocks[i][(l + j) % t] for l in range(t)) for i in range(t))
    return BdcMatrix(t, B.d, blocks, B.provenance)


def _crop(B: BdcMatrix, c: int, note: str) -> BdcMatrix:
    blocks = tuple(tuple(B.blocks[i][l] for l in range(c)) for i in range(c))
    return BdcMatrix(c, B.d, blocks, B.provenance + (note,))


def select_blocks(B: BdcMatrix, j: int, c: int) -> BdcMatrix:
    """Shift block rows left by j, trim every other class to the smallest
    off-j weight w_m, keep the top-left c x c grid: v' = c d, k' = w_j + (c-1) w_m."""
    t = B.t
    if not 1 <= c <= t:
        raise BadC(f"c={c} not in [1, {t}]")
    if not 0 <= j < t:
        raise PreconditionFailed(f"j={j} not in [0, {t})")
    w = B.weight_vector()
    others = [h for h in range(t) if h != j]
    wm = min((w[h] for h in others), default=0)
    S = _shift_columns(B, j)
    ws = S.weight_vector()
    deltas = [0] + [ws[h] - wm for h in range(1, t)]
    T = trim_uniform(S, deltas)
    return _crop(T, c, f"select j={j} c={c}")


def select_blocks_alternating(B: BdcMatrix, j: int, f: int,
                              w_od: int | None = None, w_ev: int | None = None) -> BdcMatrix:
    t = B.t
    if t % 2:
        raise TOdd(f"t={t} is odd")
    if not 1 <= f <= t // 2:
        raise BadF(f"f={f} not in [1, {t // 2}]")
    S = _shift_columns(B, j)
    ws = S.weight_vector()
    odd = [ws[h] for h in range(1, t, 2)]
    even = [ws[h] for h in range(2, t, 2)]
    w_od = min(odd) if w_od is None else w_od
    w_ev = min(even, default=0) if w_ev is None else w_ev
    if w_od > min(odd) or (even and w_ev > min(even)):
        raise DeltaTooBig("w_od / w_ev exceed the available class weights")
    deltas = [0] + [ws[h] - (w_od if h % 2 else w_ev) for h in range(1, t)]
    T = trim_uniform(S, deltas)
    return _crop(T, 2 * f, f"select-alt j={j} f={f}")


def select_blocks_k(w: Sequence[int], j: int, c: int) -> int:
    wm = min(x for h, x in enumerate(w) if h != j)
    return w[j] + (c - 1) * wm


def select_blocks_alternating_k(w: Sequence[int], j: int, f: int) -> int:
    t = len(w)
    ws = [w[(h + j) % t] for h in range(t)]
    w_od = min(ws[1::2])
    w_ev = min(ws[2::2], default=0)
    return ws[0] + w_od + (f - 1) * (w_ev + w_od)


# -- permutation decomposition -----------------------------------------------

@dataclass
class PermDecomposition:
    perms: list  # perms[u][i] = column of the unit in row i

    def superpose(self, n: int) -> IncidenceMatrix:
        rows = [0] * n
        for p in self.perms:
            for i, c in enumerate(p):
                rows[i] |= 1 << int(c)
        return IncidenceMatrix(n, n, rows)


def _is_circulant(M: IncidenceMatrix) -> bool:
    r0, n = M.rows[0], M.n_cols
    return all(M.rows[i] == _rotate(r0, i, n) for i in range(M.n_rows))


def _perfect_matching(adj: list[list[int]], n: int) -> list[int]:
    """Kuhn's augmenting paths; rows in index order, lowest free column first."""
    match_col = [-1] * n  # column -> row
    match_row = [-1] * n
    for root in range(n):
        # iterative DFS over alternating paths
        parent_col = {}
        visited = set()
        stack = [(root, iter(adj[root]))]
        found = -1
        while stack and found < 0:
            row, it = stack[-1]
            advanced = False
            for c in it:
                if c in visited:
                    continue
                visited.add(c)
                parent_col[c] = row
                if match_col[c] < 0:
                    found = c
                    break
                stack.append((match_col[c], iter(adj[match_col[c]])))
                advanced = True
                break
            if found >= 0:
                break
            if not advanced:
                stack.pop()
        if found < 0:
            raise MatchingFailed(f"no augmenting path from row {root}")
        c = found
        while True:
            row = parent_col[c]
            prev = match_row[row]
            match_col[c] = row
            match_row[row] = c
            if row == root:
                break
            c = prev
    return match_row


def koenig_decompose(M: IncidenceMatrix, k: int) -> PermDecomposition:
    if not M.is_square:
        raise NotRegular("matrix is not square")
    if any(w != k for w in M.row_weights()) or any(w != k for w in M.col_weights()):
        raise NotRegular(f"matrix is not {k}-regular")
    n = M.n_rows
    if n and _is_circulant(M):
        return PermDecomposition([[(i + a) % n for i in range(n)] for a in _cols(M.rows[0])])
    rows = [_cols(r) for r in M.rows]
    perms = []
    for _ in range(k):
        p = _perfect_matching(rows, n)
        perms.append(p)
        rows = [[c for c in rows[i] if c != p[i]] for i in range(n)]
    return PermDecomposition(perms)


def remove_permutations(M: IncidenceMatrix, k: int, delta: int) -> IncidenceMatrix:
    if not 0 <= delta < k:
        raise PreconditionFailed(f"delta={delta} not in [0, {k})")
    if delta == 0:
        return M
    dec = koenig_decompose(M, k)
    rows = list(M.rows)
    for p in dec.perms[k - delta:]:
        for i, c in enumerate(p):
            rows[i] &= ~(1 << c)
    return IncidenceMatrix(M.n_rows, M.n_cols, rows,
                           provenance=M.provenance + (f"remove {delta} permutations",))


def structure_e_check(M: IncidenceMatrix, t: int, d: int) -> bool:
    """Every d x d block is a permutation matrix or zero."""
    w = M.row_weights()
    k = w[0] if w else 0
    if not M.is_square or M.n_rows != t * d:
        raise ShapeMismatch(f"{M.n_rows}x{M.n_cols} is not {t}*{d} square")
    if t < k or d < k - 1:
        raise ShapeMismatch(f"need t >= k and d >= k-1 (t={t}, d={d}, k={k})")
    a = M.to_dense().reshape(t, d, t, d)
    rs = a.sum(axis=3)  # (t, d, t): per block row-of-block counts
    cs = a.sum(axis=1)  # (t, t, d)
    for i in range(t):
        for j in range(t):
            r, c = rs[i, :, j], cs[i, j, :]
            if (r == 0).all() and (c == 0).all():
                continue
            if not ((r == 1).all() and (c == 1).all()):
                return False
    return True


def block_pattern(M: IncidenceMatrix, t: int, d: int) -> np.ndarray:
    """t x t 0/1 matrix marking nonzero d x d blocks."""
    a = M.to_dense().reshape(t, d, t, d)
    return (a.sum(axis=(1, 3)) > 0).astype(np.uint8)


def weight_multiset(w) -> Counter:
    return Counter(w)
