"""Algebraic rulers (Singer, Bose, Ruzsa), plane incidences and geometric
generators of configurations."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from math import isqrt

import numpy as np

from . import gf as gfmod
from .errors import (BadS, EmptyLineSet, NotConstant, NotPrime, NotPrimePower,
                     NotPrimitiveRoot, PreconditionFailed)
from .matrix import IncidenceMatrix
from .ruler import ModularRuler

MAX_Q = 128


def _check_q(q: int, limit: int = MAX_Q) -> None:
    gfmod.prime_power(q)
    if q > limit:
        raise PreconditionFailed(f"q={q} above the supported limit {limit}")


def _subfield_codes(F: gfmod.FiniteField, q: int) -> list[int]:
    """Codes of GF(q) inside F: zero plus the powers xi^(j (|F|-1)/(q-1))."""
    step = (F.q - 1) // (q - 1)
    return [0] + [int(F.antilog_table[j * step]) for j in range(q - 1)]


@lru_cache(maxsize=None)
def singer_ruler(q: int) -> ModularRuler:
    """Perfect difference set mod q^2+q+1: {0} u {log(xi + a) mod n : a in GF(q)}."""
    _check_q(q)
    p, e = gfmod.prime_power(q)
    F = gfmod.field_new(p, 3 * e)
    n = q * q + q + 1
    xi = p  # code of the polynomial x
    marks = {0}
    for a in _subfield_codes(F, q):
        marks.add(int(F.log_table[F.add_code(xi, a)]) % n)
    if len(marks) != q + 1:
        raise AssertionError("Singer set has the wrong size")
    return ModularRuler(tuple(sorted(marks)), n)


@lru_cache(maxsize=None)
def bose_ruler(q: int) -> ModularRuler:
    """{log(xi + a) : a in GF(q)} mod q^2 - 1 with xi primitive in GF(q^2)."""
    _check_q(q)
    p, e = gfmod.prime_power(q)
    F = gfmod.field_new(p, 2 * e)
    xi = p
    marks = sorted(int(F.log_table[F.add_code(xi, a)]) for a in _subfield_codes(F, q))
    return ModularRuler(tuple(marks), q * q - 1)


def ruzsa_ruler(p: int, g: int | None = None) -> ModularRuler:
    """e_u = p u + (p - 1) g^u mod p^2 - p, u = 1..p-1."""
    if not gfmod.is_prime(p) or p < 3:
        raise NotPrime(f"{p} is not an odd prime")
    if g is None:
        g = gfmod.smallest_primitive_root(p)
    if not gfmod.is_primitive_root(g, p):
        raise NotPrimitiveRoot(f"{g} is not a primitive root mod {p}")
    v = p * p - p
    return ModularRuler.of((p * u + (p - 1) * pow(g, u, p) for u in range(1, p)), v)


# -- planes -------------------------------------------------------------------

@dataclass(frozen=True)
class PlaneIncidence:
    kind: str  # "projective" | "affine" | "starred_affine" | "singer"
    q: int
    points: tuple  # labels: coordinate tuples or Singer exponents
    lines: tuple   # tuples of point indices, sorted
    provenance: str = ""
    _pindex: dict = field(default=None, compare=False, repr=False)

    def point_index(self, label) -> int:
        idx = self._pindex
        if idx is None:
            idx = {p: i for i, p in enumerate(self.points)}
            object.__setattr__(self, "_pindex", idx)
        return idx[label]

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def n_lines(self) -> int:
        return len(self.lines)

    def to_matrix(self) -> IncidenceMatrix:
        return IncidenceMatrix.from_row_sets(self.lines, len(self.points),
                                             provenance=(self.provenance,))

    def lines_through(self, p: int) -> list[int]:
        return [i for i, ln in enumerate(self.lines) if p in ln]


def _normalized_triples(q):
    out = [(0, 0, 1)]
    out += [(0, 1, z) for z in range(q)]
    out += [(1, y, z) for y in range(q) for z in range(q)]
    return out


@lru_cache(maxsize=None)
def pg_incidence(q: int) -> PlaneIncidence:
    """PG(2,q) in homogeneous coordinates (leading nonzero coordinate 1)."""
    _check_q(q, 64)
    F = gfmod.gf(q)
    add, mul = F.add_table(), F.mul_table()
    pts = _normalized_triples(q)
    P = np.array(pts, dtype=np.int64)
    lines = []
    for a, b, c in pts:  # dual coordinates use the same normal form
        val = add[add[mul[a, P[:, 0]], mul[b, P[:, 1]]], mul[c, P[:, 2]]]
        lines.append(tuple(np.flatnonzero(val == 0).tolist()))
    return PlaneIncidence("projective", q, tuple(pts), tuple(lines),
                          f"pg q={q} modulus={F.modulus}")


@lru_cache(maxsize=None)
def ag_incidence(q: int, starred: bool = False) -> PlaneIncidence:
    """AG(2,q): lines y = m x + b and x = c. Starred drops the origin and the
    lines through it."""
    _check_q(q, 64)
    F = gfmod.gf(q)
    add, mul = F.add_table(), F.mul_table()
    pts = [(x, y) for x in range(q) for y in range(q)]
    if starred:
        pts = pts[1:]
    index = {p: i for i, p in enumerate(pts)}
    lines = []
    for m in range(q):
        for b in range(q):
            if starred and b == 0:
                continue
            lines.append(tuple(sorted(index[(x, int(add[mul[m, x], b]))] for x in range(q))))
    for c in range(q):
        if starred and c == 0:
            continue
        lines.append(tuple(sorted(index[(c, y)] for y in range(q))))
    kind = "starred_affine" if starred else "affine"
    return PlaneIncidence(kind, q, tuple(pts), tuple(lines), f"{kind} q={q} modulus={F.modulus}")


@lru_cache(maxsize=None)
def singer_plane(q: int) -> PlaneIncidence:
    """PG(2,q) labelled by Singer exponents: points Z_n, lines D + j."""
    r = singer_ruler(q)
    n = r.v
    lines = tuple(tuple(sorted((a + j) % n for a in r.marks)) for j in range(n))
    return PlaneIncidence("singer", q, tuple(range(n)), lines, f"singer-plane q={q}")


# -- removal family -------------------------------------------------------------

def removal_family(q: int, s: int, point_on_line: bool) -> IncidenceMatrix:
    """Delete from PG(2,q) all lines through the selected points and all points
    on the selected lines. P on l gives (q^2 - qs)_(q-s); P off l gives
    (q^2 - (q-1)s - 1)_(q-s)."""
    if not 0 <= s < q:
        raise BadS(f"s={s} not in [0, {q})")
    plane = pg_incidence(q)
    lines = [set(ln) for ln in plane.lines]
    ell = 0
    on_ell = sorted(lines[ell])
    if point_on_line:
        P = on_ell[0]
        sel_points = [P] + on_ell[1:1 + s]
        through_P = [i for i, ln in enumerate(lines) if P in ln and i != ell]
        sel_lines = [ell] + through_P[:s]
    else:
        P = next(p for p in range(plane.n_points) if p not in lines[ell])
        qs_ = on_ell[:s]
        sel_points = [P] + qs_
        sel_lines = [ell] + [next(i for i, ln in enumerate(lines) if P in ln and Q in ln) for Q in qs_]
    bad_points = set(sel_points)
    for i in sel_lines:
        bad_points |= lines[i]
    bad_lines = set(sel_lines)
    for i, ln in enumerate(lines):
        if ln & set(sel_points):
            bad_lines.add(i)
    keep_pts = [p for p in range(plane.n_points) if p not in bad_points]
    pidx = {p: i for i, p in enumerate(keep_pts)}
    rows = [[pidx[p] for p in sorted(ln) if p in pidx]
            for i, ln in enumerate(lines) if i not in bad_lines]
    tag = "on" if point_on_line else "off"
    return IncidenceMatrix.from_row_sets(rows, len(keep_pts),
                                         provenance=(f"removal q={q} s={s} P-{tag}-line",))


# -- point sets and Construction A ----------------------------------------------

@dataclass(frozen=True)
class PointSet:
    plane: PlaneIncidence
    indices: tuple[int, ...]
    tag: str

    def __post_init__(self):
        if not self.indices:
            raise PreconditionFailed("empty point set")
        if any(not 0 <= i < self.plane.n_points for i in self.indices):
            raise PreconditionFailed("point index out of range")

    def __len__(self):
        return len(self.indices)


@dataclass
class NotSymmetric:
    matrix: IncidenceMatrix
    r: int
    b: int


def construction_a(P: PointSet, k: int):
    """Points of P against the lines meeting P in exactly k points."""
    pts = set(P.indices)
    chosen = [ln for ln in P.plane.lines if len(pts.intersection(ln)) == k]
    if not chosen:
        raise EmptyLineSet(f"no line meets the set in exactly {k} points")
    order = sorted(P.indices)
    pidx = {p: i for i, p in enumerate(order)}
    rows = [[pidx[p] for p in ln if p in pidx] for ln in chosen]
    deg = Counter(i for r in rows for i in r)
    rs = {deg.get(i, 0) for i in range(len(order))}
    if len(rs) != 1:
        raise NotConstant(f"lines per point vary: {sorted(rs)}")
    r = rs.pop()
    M = IncidenceMatrix.from_row_sets(rows, len(order),
                                      provenance=(f"construction-a {P.tag} k={k}",))
    if r == k and len(chosen) == len(order):
        return M
    return NotSymmetric(M, r, len(chosen))


def _conic(q: int):
    if q % 2 == 0:
        raise PreconditionFailed("conic sets need q odd")
    plane = pg_incidence(q)
    F = gfmod.gf(q)
    mul = F.mul_table()
    on = set()
    for i, (x, y, z) in enumerate(plane.points):
        if mul[y, y] == mul[x, z]:
            on.add(i)
    tangents = [ln for ln in plane.lines if len(on.intersection(ln)) == 1]
    tcount = Counter(p for ln in tangents for p in ln)
    ext = tuple(i for i in range(plane.n_points) if i not in on and tcount[i] == 2)
    inn = tuple(i for i in range(plane.n_points) if i not in on and tcount[i] == 0)
    return plane, on, ext, inn


def conic_external(q: int) -> PointSet:
    """Points on two tangents of the conic y^2 = xz; q(q+1)/2 of them."""
    plane, _, ext, _ = _conic(q)
    return PointSet(plane, ext, f"conic-external q={q}")


def conic_internal(q: int) -> PointSet:
    """Points on no tangent of the conic y^2 = xz; q(q-1)/2 of them."""
    plane, _, _, inn = _conic(q)
    return PointSet(plane, inn, f"conic-internal q={q}")


def _sqrt_q(q: int) -> int:
    r = isqrt(q)
    if r * r != q:
        raise PreconditionFailed(f"q={q} is not a square")
    return r


def hermitian_complement(q: int) -> PointSet:
    """Complement of x^(r+1) + y^(r+1) + z^(r+1) = 0, r = sqrt(q)."""
    r = _sqrt_q(q)
    plane = pg_incidence(q)
    F = gfmod.gf(q)
    add = F.add_table()

    def norm(a):
        return 0 if a == 0 else int(F.antilog_table[(int(F.log_table[a]) * (r + 1)) % (q - 1)])

    off = tuple(i for i, (x, y, z) in enumerate(plane.points)
                if add[add[norm(x), norm(y)], norm(z)] != 0)
    return PointSet(plane, off, f"hermitian-complement q={q}")


def singer_suborbit(q: int, t: int, j: int) -> PointSet:
    """Points i = j mod t of the Singer-labelled plane; size (q^2+q+1)/t."""
    plane = singer_plane(q)
    n = plane.n_points
    if t < 1 or n % t:
        raise PreconditionFailed(f"t={t} does not divide {n}")
    return PointSet(plane, tuple(range(j % t, n, t)), f"singer-suborbit q={q} t={t} j={j}")


def baer_partition(q: int) -> list[PointSet]:
    """The q - sqrt(q) + 1 Baer subplanes cut out by the Singer subgroup of
    order q + sqrt(q) + 1."""
    r = _sqrt_q(q)
    t = q - r + 1
    return [singer_suborbit(q, t, j) for j in range(t)]


def point_set_generators(q: int) -> dict:
    """Generators that apply to this q, keyed by name."""
    gens = {"singer_suborbit": lambda t, j: singer_suborbit(q, t, j)}
    if q % 2:
        gens["conic_external"] = lambda: conic_external(q)
        gens["conic_internal"] = lambda: conic_internal(q)
    if isqrt(q) ** 2 == q:
        gens["baer_partition"] = lambda: baer_partition(q)
        gens["hermitian_complement"] = lambda: hermitian_complement(q)
    return gens


# -- orbit weights on an affine line --------------------------------------------

def affine_line_weights(q: int, t: int) -> list[int]:
    """Class sizes of the points of an affine line of the starred plane under the
    Singer-type subgroup of index t.

    Points of AG(2,q) minus the origin are the nonzero elements of GF(q^2);
    the line x = 1 in the basis (1, omega), omega = xi^((q+1)/2) for odd q and
    xi otherwise, is {1 + omega y : y in GF(q)}. w_h counts the points whose
    discrete log is h mod t.
    """
    _check_q(q)
    p, e = gfmod.prime_power(q)
    F = gfmod.field_new(p, 2 * e)
    if (q * q - 1) % t:
        raise PreconditionFailed(f"t={t} does not divide q^2 - 1")
    omega = int(F.antilog_table[(q + 1) // 2]) if q % 2 else p
    one = int(F.antilog_table[0])
    w = [0] * t
    for y in _subfield_codes(F, q):
        z = F.add_code(one, F.mul_code(omega, y))
        if z == 0:
            continue
        w[int(F.log_table[z]) % t] += 1
    return w
