"""Parameter-spectrum searches, witnesses and the known-facts registry.

A witness is a chain of small JSON-able steps that rebuilds a ruler or an
incidence matrix from scratch; replaying it is the only way a value enters
an achieved set on load.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import gcd, isqrt
from pathlib import Path
from typing import Iterable

import numpy as np

from . import construct, extend, matrix, refdata
from . import gf as gfmod
from .errors import (CapacityExceeded, ConfiguraError, NotPopulated, RegistryConflict,
                     ReplayMismatch)
from .matrix import BdcMatrix, IncidenceMatrix
from .ruler import (ModularRuler, affine_map, delete_marks, golomb_bound, oracle_exists,
                    plane_bound, retest_modulus, validate_modular)

log = logging.getLogger(__name__)

NO_CONFIG = "NoConfig"
NO_CYCLIC = "NoCyclicConfig"
SPORADIC = "SporadicExists"


# -- registry -------------------------------------------------------------------

def deficiency_one_nonexistence(k: int) -> bool:
    """True when no (k^2 - k + 2)_k configuration can exist by the
    deficiency-one theorem: 5 <= k <= 10, or neither k nor k-2 is a square."""
    if k < 2:
        raise ValueError(f"k={k} < 2")

    def square(n):
        return n >= 0 and isqrt(n) ** 2 == n

    return 5 <= k <= 10 or not (square(k) or square(k - 2))


@dataclass(frozen=True)
class Fact:
    v: int
    k: int
    status: str
    citation: str


class KnownFacts:
    def __init__(self, facts: Iterable[Fact] = ()):
        self._facts: dict[tuple[int, int], list[Fact]] = {}
        for f in facts:
            self.register(f)

    @classmethod
    def default(cls) -> "KnownFacts":
        kf = cls()
        for v, k, cite in refdata.NO_CONFIG:
            kf.register(Fact(v, k, NO_CONFIG, cite))
        for v, k, cite in refdata.NO_CYCLIC:
            kf.register(Fact(v, k, NO_CYCLIC, cite))
        for v, k, cite in refdata.SPORADIC:
            kf.register(Fact(v, k, SPORADIC, cite))
        for k in range(2, max(refdata.GOLOMB_BOUND) + 1):
            v = k * k - k + 2
            if deficiency_one_nonexistence(k) and NO_CONFIG not in kf.status(v, k):
                kf.register(Fact(v, k, NO_CONFIG, "deficiency-one theorem"))
        return kf

    def register(self, f: Fact) -> None:
        have = self.status(f.v, f.k)
        if (f.status == NO_CONFIG and SPORADIC in have) or \
                (f.status == SPORADIC and NO_CONFIG in have):
            raise RegistryConflict(f"{f.v}_{f.k}: {f.status} contradicts {sorted(have)}")
        self._facts.setdefault((f.v, f.k), []).append(f)

    def status(self, v: int, k: int) -> set[str]:
        return {f.status for f in self._facts.get((v, k), [])}

    def facts(self, k: int | None = None) -> list[Fact]:
        out = [f for fs in self._facts.values() for f in fs]
        if k is not None:
            out = [f for f in out if f.k == k]
        return sorted(out, key=lambda f: (f.k, f.v, f.status))

    def forbidden(self, v: int, k: int, cyclic: bool) -> bool:
        st = self.status(v, k)
        return NO_CONFIG in st or (cyclic and NO_CYCLIC in st)

    def check(self, w: "Witness") -> None:
        if self.forbidden(w.v, w.k, w.cyclic):
            raise RegistryConflict(
                f"witness for {w.v}_{w.k} (cyclic={w.cyclic}) contradicts {sorted(self.status(w.v, w.k))}")


# -- witnesses and replay -------------------------------------------------------

@dataclass(frozen=True)
class Witness:
    v: int
    k: int
    cyclic: bool
    chain: tuple
    payload: str | None = None

    def to_json(self) -> dict:
        return {"v": self.v, "k": self.k, "cyclic": self.cyclic,
                "chain": list(self.chain), "payload": self.payload}

    @classmethod
    def from_json(cls, obj) -> "Witness":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(int(obj["v"]), int(obj["k"]), bool(obj["cyclic"]),
                   tuple(obj["chain"]), obj.get("payload"))

    def key(self):
        return (self.v, self.k, self.cyclic)


def _step_ruler(state, step, i):
    op = step["op"]
    if not isinstance(state, ModularRuler):
        raise ReplayMismatch(i, f"{op} needs a ruler, have {type(state).__name__}")
    if op == "affine":
        return affine_map(state, int(step["m"]), int(step.get("b", 0)))
    if op == "delete":
        return delete_marks(state, step["marks"])
    if op == "retest":
        v2 = int(step["v"])
        if not retest_modulus(state.marks, v2):
            raise ReplayMismatch(i, f"marks are not a ruler mod {v2}")
        return ModularRuler(state.marks, v2)
    if op == "bdc":
        return matrix.bdc_assemble(state, int(step["t"]))
    if op == "circulant":
        return matrix.circulant_from_ruler(state)
    raise ReplayMismatch(i, f"unknown ruler step {op!r}")


def _step_bdc(state, step, i):
    op = step["op"]
    if not isinstance(state, BdcMatrix):
        raise ReplayMismatch(i, f"{op} needs a BDC matrix")
    if op == "select":
        return matrix.select_blocks(state, int(step["j"]), int(step["c"]))
    if op == "select_alt":
        return matrix.select_blocks_alternating(state, int(step["j"]), int(step["f"]))
    if op == "trim":
        return matrix.trim_uniform(state, [int(x) for x in step["deltas"]])
    if op == "baer_binary":
        return extend.baer_binary(state)
    if op == "expand":
        return state.expand()
    raise ReplayMismatch(i, f"unknown BDC step {op!r}")


def _step_matrix(state, step, i, k_hint):
    op = step["op"]
    if not isinstance(state, IncidenceMatrix):
        raise ReplayMismatch(i, f"{op} needs an incidence matrix")
    kk = int(step.get("k", k_hint(state)))
    if op == "extend":
        return extend.extend_many(state, kk, int(step["theta"]),
                                  block_shape=state.block_shape)
    if op == "remove_permutations":
        return matrix.remove_permutations(state, kk, int(step["delta"]))
    raise ReplayMismatch(i, f"unknown matrix step {op!r}")


def _source(step, i):
    op = step["op"]
    if op == "singer":
        return construct.singer_ruler(int(step["q"]))
    if op == "bose":
        return construct.bose_ruler(int(step["q"]))
    if op == "ruzsa":
        return construct.ruzsa_ruler(int(step["p"]), step.get("g"))
    if op == "marks":
        return ModularRuler(tuple(step["marks"]), int(step["v"]))
    if op == "removal":
        return construct.removal_family(int(step["q"]), int(step["s"]), bool(step["on_line"]))
    if op == "ag_family":
        return extend.extension_family_ag(int(step["q"]), int(step["s"]),
                                          int(step["delta"]), int(step["theta"]))
    if op == "construction_a":
        gens = construct.point_set_generators(int(step["q"]))
        P = gens[step["gen"]](*step.get("args", []))
        if isinstance(P, list):
            raise ReplayMismatch(i, "generator returned a partition, not a point set")
        out = construct.construction_a(P, int(step["k"]))
        if not isinstance(out, IncidenceMatrix):
            raise ReplayMismatch(i, "construction A did not give a symmetric configuration")
        return out
    return None


def _row_k(M: IncidenceMatrix) -> int:
    return M.row_weights()[0] if M.n_rows else 0


def replay_witness(w: Witness):
    """Rebuild the structure; raises ReplayMismatch naming the failing step."""
    if not w.chain:
        raise ReplayMismatch(0, "empty chain")
    state = None
    for i, step in enumerate(w.chain):
        try:
            if i == 0:
                state = _source(step, i)
                if state is None:
                    raise ReplayMismatch(i, f"unknown source {step.get('op')!r}")
                continue
            if isinstance(state, ModularRuler):
                state = _step_ruler(state, step, i)
            elif isinstance(state, BdcMatrix):
                state = _step_bdc(state, step, i)
            else:
                state = _step_matrix(state, step, i, _row_k)
        except ReplayMismatch:
            raise
        except (ConfiguraError, KeyError, TypeError, ValueError) as e:
            raise ReplayMismatch(i, f"{step.get('op')}: {e}") from e
    n = len(w.chain)
    if isinstance(state, BdcMatrix):
        state = state.expand()
    if w.cyclic:
        if not isinstance(state, ModularRuler):
            raise ReplayMismatch(n, "cyclic witness must end in a ruler")
        if (state.v, state.k) != (w.v, w.k) or not validate_modular(state.marks, state.v)[0]:
            raise ReplayMismatch(n, f"result {state} is not a ({w.v},{w.k}) ruler")
        return state
    if isinstance(state, ModularRuler):
        state = matrix.circulant_from_ruler(state)
    if (state.n_rows, state.n_cols) != (w.v, w.v):
        raise ReplayMismatch(n, f"result is {state.n_rows}x{state.n_cols}, expected {w.v}x{w.v}")
    chk = matrix.is_configuration(state, w.k)
    if not chk:
        raise ReplayMismatch(n, f"not a configuration: {chk.reason}")
    return state


def verify_witness(w: Witness) -> bool:
    try:
        replay_witness(w)
        return True
    except ReplayMismatch:
        return False


class WitnessDB:
    """JSON-lines witness store; one witness per (v, k, cyclic), shortest chain wins."""

    def __init__(self, path: str | Path | None = None, facts: KnownFacts | None = None):
        self.path = Path(path) if path else None
        self.facts = facts or KnownFacts.default()
        self._w: dict[tuple, Witness] = {}

    def __len__(self):
        return len(self._w)

    def __iter__(self):
        return iter(sorted(self._w.values(), key=lambda w: (w.k, w.v, not w.cyclic)))

    def get(self, v, k, cyclic):
        return self._w.get((v, k, cyclic))

    def add(self, w: Witness, append: bool = False) -> bool:
        self.facts.check(w)
        old = self._w.get(w.key())
        if old is not None and len(old.chain) <= len(w.chain):
            return False
        self._w[w.key()] = w
        if append and self.path:
            with self.path.open("a") as fh:
                fh.write(json.dumps(w.to_json(), sort_keys=True) + "\n")
        return True

    def save(self, path=None) -> None:
        p = Path(path or self.path)
        with p.open("w") as fh:
            for w in self:
                fh.write(json.dumps(w.to_json(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, path, verify: bool = True, facts: KnownFacts | None = None):
        """Returns (db, failures); failures are (line number, reason)."""
        db = cls(path, facts)
        failures = []
        p = Path(path)
        if not p.exists():
            return db, failures
        for ln, line in enumerate(p.read_text().splitlines(), 1):
            if not line.strip():
                continue
            try:
                w = Witness.from_json(line)
                if verify:
                    replay_witness(w)
                db.add(w)
            except ReplayMismatch as e:
                failures.append((ln, f"step {e.step}: {e.reason}"))
            except (ValueError, KeyError) as e:
                failures.append((ln, f"malformed: {e}"))
        return db, failures

    def achieved(self, k: int, cyclic: bool) -> list[int]:
        return sorted(w.v for w in self._w.values()
                      if w.k == k and (w.cyclic or not cyclic))


# -- records -------------------------------------------------------------------

@dataclass
class SpectrumRecord:
    k: int
    P: int
    G: int
    achieved_cyclic: list[int] = field(default_factory=list)
    achieved_any: list[int] = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)   # (v, cyclic) -> Witness
    populated_cyclic: bool = False
    populated_any: bool = False

    @classmethod
    def empty(cls, k: int) -> "SpectrumRecord":
        return cls(k, plane_bound(k), golomb_bound(k))

    def add(self, w: Witness) -> None:
        if not self.P <= w.v < self.G:
            return
        old = self.witnesses.get((w.v, w.cyclic))
        if old is None or len(w.chain) < len(old.chain):
            self.witnesses[(w.v, w.cyclic)] = w
        if w.cyclic and w.v not in self.achieved_cyclic:
            self.achieved_cyclic = sorted(self.achieved_cyclic + [w.v])
        if w.v not in self.achieved_any:
            self.achieved_any = sorted(self.achieved_any + [w.v])

    @property
    def ec_upper(self):
        return _bound(self.achieved_cyclic, self.G)

    @property
    def e_upper(self):
        return _bound(self.achieved_any, self.G)

    @property
    def gaps(self) -> list[int]:
        have = set(self.achieved_any)
        return [v for v in range(self.P, self.G) if v not in have]


def _bound(achieved, G: int) -> int:
    have = set(achieved)
    v0 = G
    while v0 - 1 in have:
        v0 -= 1
    return v0


def ec_upper_bound(record: SpectrumRecord) -> int:
    if not record.populated_cyclic:
        raise NotPopulated(f"cyclic spectrum for k={record.k} not scanned up to G(k)")
    return record.ec_upper


def e_upper(record: SpectrumRecord) -> int:
    if not record.populated_any:
        raise NotPopulated(f"spectrum for k={record.k} not scanned up to G(k)")
    return record.e_upper


# -- scan options and base rulers -----------------------------------------------

@dataclass
class ScanOptions:
    v_max: int | None = None           # exclusive; default G(k)
    max_delete: int = 4                # marks removed from a base ruler
    multiplier_cutoff: int = 5000      # all units below, sampled above
    multiplier_sample: int = 512
    deletion_cap: int = 256            # sampled subsets per base for delta >= 3 (base_rulers only)
    seed: int = 20240101
    oracle_fill: bool = True
    oracle_budget: int = 2_000_000
    oracle_max_k: int = 9
    bdc_max_t: int = 40
    workers: int = 1
    hit_budget: int = 20000


def _prime_powers(lo: int, hi: int):
    return [q for q in range(max(lo, 2), hi + 1) if gfmod.is_prime_power(q)]


def _base_sources(k: int, max_delete: int, q_limit: int = construct.MAX_Q):
    """(step, n marks) for every algebraic ruler with k <= n <= k + max_delete."""
    out = []
    for q in _prime_powers(k - 1, min(k - 1 + max_delete, q_limit)):
        out.append(({"op": "singer", "q": q}, q + 1))
    for q in _prime_powers(k, min(k + max_delete, q_limit)):
        out.append(({"op": "bose", "q": q}, q))
    for p in range(k + 1, k + max_delete + 2):
        if gfmod.is_prime(p):
            out.append(({"op": "ruzsa", "p": p}, p - 1))
    return out


def base_rulers(k: int, q_window: tuple[int, int] | None = None, deletion_cap: int = 256,
                seed: int = 20240101, max_delete: int = 2) -> list[tuple[ModularRuler, tuple]]:
    """Algebraic rulers with at least k marks, each followed by its deletions
    down to exactly k marks (all subsets for delta <= 2, a seeded sample above)."""
    import itertools
    if k < 2:
        raise ValueError(f"k={k} < 2")
    out = []
    rng = random.Random(seed)
    for step, n in _base_sources(k, max_delete):
        size = step.get("q", step.get("p"))
        if q_window and not q_window[0] <= size <= q_window[1]:
            continue
        r = _source(step, 0)
        delta = r.k - k
        if delta == 0:
            out.append((r, (step,)))
            continue
        if delta <= 2:
            subsets = list(itertools.combinations(r.marks, delta))
        else:
            seen = set()
            for _ in range(deletion_cap * 4):
                if len(seen) >= deletion_cap:
                    break
                seen.add(tuple(sorted(rng.sample(r.marks, delta))))
            subsets = sorted(seen)
        for sub in subsets:
            out.append((delete_marks(r, sub), (step, {"op": "delete", "marks": list(sub)})))
    return out


# -- cyclic scan ----------------------------------------------------------------

def _units(v: int, opts: ScanOptions) -> list[int]:
    us = [m for m in range(1, v) if gcd(m, v) == 1]
    if v > opts.multiplier_cutoff and len(us) > opts.multiplier_sample:
        rng = random.Random(opts.seed + v)
        us = sorted(rng.sample(us, opts.multiplier_sample))
        if 1 not in us:
            us = [1] + us[:-1]
    return us


def _cycle_key(marks: list[int], v: int) -> tuple:
    gaps = [(marks[(i + 1) % len(marks)] - marks[i]) % v or v for i in range(len(marks))]
    rots = [tuple(gaps[i:] + gaps[:i]) for i in range(len(gaps))]
    rg = gaps[::-1]
    rots += [tuple(rg[i:] + rg[:i]) for i in range(len(rg))]
    return min(rots)


def _hitting_set(masks: list[int], forced: int, limit: int, budget: list[int]) -> int | None:
    """A set of at most `limit` bits containing `forced` that meets every mask."""
    if bin(forced).count("1") > limit:
        return None
    rem = [m for m in masks if not m & forced]

    def rec(chosen, left, rem):
        budget[0] -= 1
        if budget[0] < 0:
            return None
        if not rem:
            return chosen
        if left == 0:
            return None
        m = min(rem, key=lambda x: bin(x).count("1"))
        while m:
            bit = m & -m
            m ^= bit
            got = rec(chosen | bit, left - 1, [x for x in rem if not x & bit])
            if got is not None:
                return got
        return None

    return rec(forced, limit - bin(forced).count("1"), rem)


def _scan_base(args):
    """Worker: all (v', witness) reachable from one base ruler."""
    step, k, lo, hi, opts = args
    r = _source(step, 0)
    n, v = r.k, r.v
    delta = n - k
    if delta < 0 or n > 62:
        return {}
    found: dict[int, Witness] = {}
    targets = set(range(lo, hi))
    seen_keys = set()
    iu = np.triu_indices(n, 1)
    bit = np.left_shift(np.int64(1), np.arange(n, dtype=np.int64))
    pair_mask = bit[iu[0]] | bit[iu[1]]
    P = len(pair_mask)
    ju = np.triu_indices(P)
    quad_mask = (pair_mask[:, None] | pair_mask[None, :])[ju]
    for m in _units(v, opts):
        if not targets:
            break
        S = sorted((m * a) % v for a in r.marks)
        key = _cycle_key(S, v)
        if key in seen_keys:
            continue
        seen_keys.add(key)
        for a0 in S:
            if not targets:
                break
            x = np.sort((np.asarray(S, dtype=np.int64) - a0) % v)
            d = (x[None, :] - x[:, None])[iu]
            sums = (d[:, None] + d[None, :])[ju]
            sel = (sums >= lo) & (sums < hi)
            s_sel, m_sel = sums[sel], quad_mask[sel]
            order = np.argsort(s_sel, kind="stable")
            s_sel, m_sel = s_sel[order], m_sel[order]
            uniq, starts = np.unique(s_sel, return_index=True)
            ends = np.append(starts[1:], len(s_sel))
            where = {int(u): (int(b), int(e)) for u, b, e in zip(uniq, starts, ends)}
            xs = x.tolist()
            for vv in sorted(targets):
                forced = 0
                for i in range(n - 1, -1, -1):
                    if xs[i] >= vv:
                        forced |= 1 << i
                    else:
                        break
                if bin(forced).count("1") > delta:
                    continue
                if vv in where:
                    b, e = where[vv]
                    masks = sorted(set(m_sel[b:e].tolist()))
                else:
                    masks = []
                H = _hitting_set(masks, forced, delta, [opts.hit_budget])
                if H is None:
                    continue
                i = n - 1
                while bin(H).count("1") < delta:
                    if not H >> i & 1:
                        H |= 1 << i
                    i -= 1
                gone = [xs[i] for i in range(n) if H >> i & 1]
                chain = [step, {"op": "affine", "m": m, "b": (-a0) % v}]
                if gone:
                    chain.append({"op": "delete", "marks": gone})
                if vv != v:
                    chain.append({"op": "retest", "v": vv})
                kept = [xs[i] for i in range(n) if not H >> i & 1]
                found[vv] = Witness(vv, k, True, tuple(chain),
                                    ModularRuler(tuple(kept), vv).to_text())
                targets.discard(vv)
    return found


def _run(tasks, fn, workers):
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, tasks))
    return [fn(t) for t in tasks]


def cyclic_scan(k: int, opts: ScanOptions | None = None,
                facts: KnownFacts | None = None) -> dict[int, Witness]:
    """Multiplier x rotation x deletion rescans of the algebraic rulers.

    Rotations play the role of the additive constant b; for each window the
    deletion subset is found exactly by a small hitting-set search over the
    difference-pair collisions that would break the ruler mod v'.
    """
    opts = opts or ScanOptions()
    facts = facts or KnownFacts.default()
    lo, G = plane_bound(k), golomb_bound(k)
    hi = min(opts.v_max or G, G)
    if k == 2:
        out = {v: Witness(v, 2, True, ({"op": "marks", "marks": [0, 1], "v": v},))
               for v in range(lo, hi)}
    else:
        tasks = [(step, k, lo, hi, opts) for step, _ in _base_sources(k, opts.max_delete)]
        out = {}
        for res in _run(tasks, _scan_base, opts.workers):
            for vv, w in sorted(res.items()):
                if vv not in out:
                    out[vv] = w
    if opts.oracle_fill and k <= opts.oracle_max_k:
        for vv in range(lo, hi):
            if vv in out or facts.forbidden(vv, k, True):
                continue
            res = oracle_exists(vv, k, budget=opts.oracle_budget)
            if res.exists:
                out[vv] = Witness(vv, k, True, ({"op": "marks", "marks": list(res.witness.marks), "v": vv},))
    for w in out.values():
        facts.check(w)
    return dict(sorted(out.items()))


# -- non-cyclic scan ------------------------------------------------------------

def _try_build(chain, v, k, facts, cyclic=False):
    w = Witness(v, k, cyclic, tuple(chain))
    try:
        replay_witness(w)
    except ReplayMismatch as e:
        log.debug("candidate %s_%s failed: %s", v, k, e)
        return None
    facts.check(w)
    return w


def _bdc_candidates(k, lo, hi, opts):
    """(source step, t, d) for Singer and Bose BDC matrices with block size d < hi."""
    for q in _prime_powers(2, construct.MAX_Q):
        for op, n, v in (("singer", q + 1, q * q + q + 1), ("bose", q, q * q - 1)):
            if n < k or v < lo or v > hi * opts.bdc_max_t:
                continue
            if op == "singer" and q > 64:
                continue
            for t in range(2, min(opts.bdc_max_t, v) + 1):
                if v % t == 0 and v // t < hi:
                    yield {"op": op, "q": q}, t, v // t


def noncyclic_scan(k: int, opts: ScanOptions | None = None, facts: KnownFacts | None = None,
                   cyclic: dict[int, Witness] | None = None) -> dict[int, Witness]:
    """Union of the cyclic scan, removal families, the affine extension family,
    construction A, block selection on algebraic BDC matrices and permutation
    removal; every candidate is replayed before it counts."""
    opts = opts or ScanOptions()
    facts = facts or KnownFacts.default()
    lo, G = plane_bound(k), golomb_bound(k)
    hi = min(opts.v_max or G, G)
    cyc = cyclic if cyclic is not None else cyclic_scan(k, opts, facts)
    out: dict[int, Witness] = {v: w for v, w in cyc.items()}

    def want(v):
        return lo <= v < hi and v not in out

    def offer(chain, v):
        if want(v):
            w = _try_build(chain, v, k, facts)
            if w is not None:
                out[v] = w

    # block selection + trimming on Singer/Bose BDC matrices
    for step, t, d in _bdc_candidates(k, lo, hi, opts):
        if not any(want(c * d) for c in range(1, t + 1)):
            continue
        r = _source(step, 0)
        w = [wt for _, wt in _quotient_weights(r, t)]
        for c in range(1, t + 1):
            if not want(c * d):
                continue
            for j in range(t):
                kp = matrix.select_blocks_k(w, j, c)
                if kp < k:
                    continue
                chain = [step, {"op": "bdc", "t": t}, {"op": "select", "j": j, "c": c}]
                if kp > k:
                    chain.append({"op": "trim", "deltas": _spread(kp - k, w, j, c)})
                chain.append({"op": "expand"})
                offer(chain, c * d)
                if not want(c * d):
                    break
        if t % 2 == 0:
            for f in range(1, t // 2 + 1):
                if not want(2 * f * d):
                    continue
                for j in range(t):
                    kp = matrix.select_blocks_alternating_k(w, j, f)
                    if kp < k:
                        continue
                    chain = [step, {"op": "bdc", "t": t}, {"op": "select_alt", "j": j, "f": f}]
                    if kp > k:
                        chain.append({"op": "trim", "deltas": _spread_alt(kp - k, w, j, f)})
                    chain.append({"op": "expand"})
                    offer(chain, 2 * f * d)
                    if not want(2 * f * d):
                        break

    # removal families and the affine extension family, with permutation removal
    for q in _prime_powers(k, 2 * k + opts.max_delete):
        for s in range(0, q - k + 1 + opts.max_delete):
            kk = q - s
            if kk < k or kk > k + opts.max_delete:
                continue
            rm = kk - k
            for on_line, v in ((True, q * q - q * s), (False, q * q - (q - 1) * s - 1)):
                if want(v):
                    chain = [{"op": "removal", "q": q, "s": s, "on_line": on_line}]
                    if rm:
                        chain.append({"op": "remove_permutations", "delta": rm})
                    offer(chain, v)
            for delta in range(0, kk - 1):
                if kk - delta != k:
                    continue
                for theta in range(0, kk + 2):
                    v = q * q - q * s + theta
                    if want(v):
                        offer([{"op": "ag_family", "q": q, "s": s, "delta": delta,
                                "theta": theta}], v)

    # construction A
    for q in _prime_powers(3, 64):
        cands = []
        if q % 2:
            cands.append(("conic_internal", (q + 1) // 2, q * (q - 1) // 2))
            cands.append(("conic_external", (q - 1) // 2, q * (q + 1) // 2))
        r = isqrt(q)
        if r * r == q:
            cands.append(("hermitian_complement", q - r, q * q + q - q * r))
        for gen, kk, v in cands:
            if k <= kk <= k + opts.max_delete and want(v):
                chain = [{"op": "construction_a", "gen": gen, "q": q, "k": kk}]
                if kk > k:
                    chain.append({"op": "remove_permutations", "delta": kk - k})
                offer(chain, v)

    for w in out.values():
        facts.check(w)
    return dict(sorted(out.items()))


def _quotient_weights(r: ModularRuler, t: int):
    from .ruler import quotient
    return quotient(r, t)


def _spread(excess, w, j, c):
    """Trim deltas removing `excess` from the selected weights (w_j, w_m, ...)."""
    others = [h for h in range(len(w)) if h != j]
    wm = min(w[h] for h in others)
    cur = [w[j]] + [wm] * (c - 1)
    deltas = [0] * c
    for h in range(c):
        take = min(excess, cur[h])
        deltas[h] = take
        excess -= take
    return deltas


def _spread_alt(excess, w, j, f):
    t = len(w)
    ws = [w[(h + j) % t] for h in range(t)]
    w_od = min(ws[1::2])
    w_ev = min(ws[2::2], default=0)
    cur = [ws[0]] + [w_od if h % 2 else w_ev for h in range(1, 2 * f)]
    deltas = [0] * (2 * f)
    for h in range(2 * f):
        take = min(excess, cur[h])
        deltas[h] = take
        excess -= take
    return deltas


# -- orchestration --------------------------------------------------------------

def scan(k: int, opts: ScanOptions | None = None, cyclic_only: bool = False,
         facts: KnownFacts | None = None, db: WitnessDB | None = None) -> SpectrumRecord:
    opts = opts or ScanOptions()
    facts = facts or KnownFacts.default()
    rec = SpectrumRecord.empty(k)
    cyc = cyclic_scan(k, opts, facts)
    for w in cyc.values():
        rec.add(w)
    full = (opts.v_max is None or opts.v_max >= rec.G)
    rec.populated_cyclic = full
    if not cyclic_only:
        for w in noncyclic_scan(k, opts, facts, cyclic=cyc).values():
            rec.add(w)
        rec.populated_any = full
    if db is not None:
        for w in rec.witnesses.values():
            db.add(w, append=True)
    return rec


def record_from_db(db: WitnessDB, k: int) -> SpectrumRecord:
    rec = SpectrumRecord.empty(k)
    for w in db:
        if w.k == k:
            rec.add(w)
    return rec


def reference_sets(k: int) -> dict:
    """Embedded reference data for k: cyclic set, any set, bounds (None when absent)."""
    G = golomb_bound(k)
    out = {"cyclic": None, "any": None, "ec": refdata.EC_BOUND.get(k), "e": None}
    if k in refdata.SMALL_K:
        _, ach, _, ec, _ = refdata.SMALL_K[k]
        out["cyclic"] = sorted(set(refdata.parse_intervals(ach)) | set(range(ec, G)))
    elif k in refdata.MEDIUM_K_SETS:
        fam, bold = refdata.MEDIUM_K_SETS[k]
        P = plane_bound(k)
        vals = set(refdata.parse_intervals(fam)) | set(refdata.parse_intervals(bold))
        vals |= set(range(refdata.EC_BOUND[k], G))
        out["cyclic"] = sorted(v for v in vals if P <= v < G)
    if k in refdata.ANY_K:
        s, e = refdata.ANY_K[k]
        out["any"] = sorted(set(refdata.parse_intervals(s)) | set(range(e, G)))
        out["e"] = e
    P = plane_bound(k)
    for key in ("cyclic", "any"):
        if out[key] is not None:
            out[key] = [v for v in out[key] if P <= v < G]
    return out


@dataclass(frozen=True)
class Discrepancy:
    k: int
    v: int | None
    kind: str       # missing-witness, extra-witness, registry-conflict, bound
    detail: str = ""


def compare_reference(records: Iterable[SpectrumRecord],
                      facts: KnownFacts | None = None) -> list[Discrepancy]:
    facts = facts or KnownFacts.default()
    out = []
    for rec in records:
        ref = reference_sets(rec.k)
        for cyclic, have in ((True, rec.achieved_cyclic), (False, rec.achieved_any)):
            for v in have:
                if facts.forbidden(v, rec.k, cyclic):
                    out.append(Discrepancy(rec.k, v, "registry-conflict",
                                           "cyclic" if cyclic else "any"))
        pairs = [("cyclic", rec.achieved_cyclic, rec.populated_cyclic)]
        pairs.append(("any", rec.achieved_any, rec.populated_any))
        for label, have, populated in pairs:
            want = ref[label]
            if want is None or not populated:
                continue
            hs, ws = set(have), set(want)
            out += [Discrepancy(rec.k, v, "missing-witness", label) for v in sorted(ws - hs)]
            out += [Discrepancy(rec.k, v, "extra-witness", label) for v in sorted(hs - ws)]
        if rec.populated_cyclic and ref["ec"] is not None and rec.ec_upper != ref["ec"]:
            out.append(Discrepancy(rec.k, None, "bound",
                                   f"E_c upper {rec.ec_upper} vs reference {ref['ec']}"))
    return out


def _row(rec: SpectrumRecord) -> dict:
    return {"k": rec.k, "P": rec.P,
            "cyclic": refdata.format_intervals(rec.achieved_cyclic),
            "Ec_upper": rec.ec_upper if rec.populated_cyclic else None,
            "any": refdata.format_intervals(rec.achieved_any),
            "E_upper": rec.e_upper if rec.populated_any else None,
            "G": rec.G}


def emit_tables(records: Iterable[SpectrumRecord], fmt: str = "md", path=None) -> str:
    rows = [_row(r) for r in sorted(records, key=lambda r: r.k)]
    if fmt == "json":
        text = json.dumps(rows, indent=2)
    elif fmt == "csv":
        buf = io.StringIO()
        wr = csv.DictWriter(buf, fieldnames=list(_row(SpectrumRecord.empty(3)).keys()), lineterminator="\n")
        wr.writeheader()
        wr.writerows(rows)
        text = buf.getvalue()
    elif fmt in ("md", "markdown"):
        head = "| k | P(k) | cyclic | E_c upper | any | E upper | G(k) |"
        lines = [head, "|---|---|---|---|---|---|---|"]
        for r in rows:
            lines.append("| {k} | {P} | {cyclic} | {Ec_upper} | {any} | {E_upper} | {G} |".format(
                **{kk: ("" if vv is None else vv) for kk, vv in r.items()}))
        text = "\n".join(lines) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path:
        Path(path).write_text(text)
    return text
