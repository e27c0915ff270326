import json

import pytest

from configura.errors import NotPopulated, RegistryConflict, ReplayMismatch
from configura.ruler import golomb_bound, plane_bound
from configura.spectrum import (Fact, KnownFacts, NO_CONFIG, NO_CYCLIC, SPORADIC, ScanOptions,
                                SpectrumRecord, Witness, WitnessDB, base_rulers,
                                compare_reference, cyclic_scan, deficiency_one_nonexistence,
                                e_upper, ec_upper_bound, emit_tables, record_from_db,
                                reference_sets, replay_witness, scan, verify_witness)

import oracles

SHIFT_35 = Witness(35, 6, True, ({"op": "marks", "marks": [0, 1, 4, 10, 12, 17], "v": 31},
                                 {"op": "affine", "m": 19}, {"op": "retest", "v": 35}))
DROP_55 = Witness(55, 7, True, ({"op": "marks", "marks": [0, 4, 5, 17, 19, 25, 28, 35], "v": 57},
                                {"op": "delete", "marks": [35]}, {"op": "retest", "v": 55}))


def test_deficiency_one():
    assert deficiency_one_nonexistence(7)
    assert deficiency_one_nonexistence(5) and deficiency_one_nonexistence(10)
    assert not deficiency_one_nonexistence(11)   # k - 2 = 9
    assert not deficiency_one_nonexistence(4)
    assert deficiency_one_nonexistence(12)


def test_registry_defaults():
    kf = KnownFacts.default()
    assert kf.forbidden(22, 5, False)
    assert kf.forbidden(34, 6, True)
    assert not kf.forbidden(34, 6, False)
    assert SPORADIC in kf.status(34, 6)
    assert NO_CONFIG in kf.status(7 * 7 - 7 + 2, 7)


def test_registry_conflict_on_register():
    kf = KnownFacts([Fact(10, 3, NO_CONFIG, "x")])
    with pytest.raises(RegistryConflict):
        kf.register(Fact(10, 3, SPORADIC, "y"))


def test_registry_rejects_contradicting_witness():
    kf = KnownFacts([Fact(35, 6, NO_CYCLIC, "planted")])
    with pytest.raises(RegistryConflict):
        kf.check(SHIFT_35)
    with pytest.raises(RegistryConflict):
        WitnessDB(facts=kf).add(SHIFT_35)


def test_worked_examples_replay():
    r = replay_witness(SHIFT_35)
    assert r.marks == (0, 4, 11, 13, 14, 19)
    assert oracles.is_modular_ruler(r.marks, 35)
    r = replay_witness(DROP_55)
    assert oracles.is_modular_ruler(r.marks, 55)


def test_tampered_witness_fails():
    bad = Witness(34, 6, True, SHIFT_35.chain[:2] + ({"op": "retest", "v": 34},))
    assert not verify_witness(bad)
    with pytest.raises(ReplayMismatch) as e:
        replay_witness(bad)
    assert e.value.step == 2
    assert not verify_witness(Witness(36, 6, True, SHIFT_35.chain))
    assert not verify_witness(Witness(35, 6, True, ({"op": "nope"},)))


def test_noncyclic_witness_replay():
    w = Witness(31, 5, False, ({"op": "ag_family", "q": 5, "s": 0, "delta": 0, "theta": 6},))
    assert verify_witness(w)
    w = Witness(906, 25, False, ({"op": "singer", "q": 32}, {"op": "bdc", "t": 7},
                                 {"op": "select", "j": 2, "c": 6}))
    assert verify_witness(w)
    assert not verify_witness(Witness(31, 5, True, w.chain))


def test_db_roundtrip_and_dedup(tmp_path):
    p = tmp_path / "w.jsonl"
    db = WitnessDB(p)
    assert db.add(DROP_55, append=True)
    long = Witness(55, 7, True, DROP_55.chain[:2] + ({"op": "affine", "m": 1},) + DROP_55.chain[2:])
    assert verify_witness(long)
    assert not db.add(long)
    db.add(SHIFT_35)
    db.save()
    db2, fails = WitnessDB.load(p)
    assert not fails and len(db2) == 2
    assert db2.get(55, 7, True) == DROP_55
    assert db2.achieved(7, cyclic=True) == [55]


def test_db_load_reports_bad_lines(tmp_path):
    p = tmp_path / "w.jsonl"
    bad = Witness(34, 6, True, SHIFT_35.chain[:2] + ({"op": "retest", "v": 34},))
    p.write_text(json.dumps(SHIFT_35.to_json()) + "\n" + json.dumps(bad.to_json()) + "\n{oops\n")
    db, fails = WitnessDB.load(p)
    assert len(db) == 1 and [ln for ln, _ in fails] == [2, 3]


def test_record_bounds():
    rec = SpectrumRecord.empty(6)
    with pytest.raises(NotPopulated):
        ec_upper_bound(rec)
    with pytest.raises(NotPopulated):
        e_upper(rec)
    rec.populated_cyclic = rec.populated_any = True
    assert ec_upper_bound(rec) == golomb_bound(6)
    rec.add(SHIFT_35)        # 35 = G(6) lies outside [P, G)
    assert rec.achieved_cyclic == []
    rec.add(Witness(31, 6, True, ({"op": "singer", "q": 5},)))
    assert rec.achieved_cyclic == [31] and ec_upper_bound(rec) == 35
    assert rec.gaps == [32, 33, 34]


def test_base_rulers_examples():
    vk = {(r.v, r.k) for r, _ in base_rulers(6)}
    assert (31, 6) in vk and (48, 6) in vk
    vk3 = {(r.v, r.k) for r, _ in base_rulers(3)}
    assert {(7, 3), (8, 3)} <= vk3 and all(k == 3 for _, k in vk3)
    vk16 = {(r.v, r.k) for r, _ in base_rulers(16, max_delete=0)}
    assert (255, 16) in vk16
    for r, chain in base_rulers(5):
        assert oracles.is_modular_ruler(r.marks, r.v) and r.k == 5


def test_cyclic_scan_k6():
    got = cyclic_scan(6, ScanOptions(oracle_fill=True))
    assert set(got) == {31}
    assert not {32, 33, 34} & set(got)
    for w in got.values():
        assert verify_witness(w)


def test_cyclic_scan_k7_and_bounds():
    rec = scan(7, ScanOptions(), cyclic_only=True)
    assert {48, 49, 50} <= set(rec.achieved_cyclic)
    assert ec_upper_bound(rec) == 48
    for w in rec.witnesses.values():
        assert verify_witness(w)
        assert plane_bound(7) <= w.v < golomb_bound(7)


def test_noncyclic_k5():
    kf = KnownFacts.default()
    rec = scan(5, ScanOptions(), facts=kf)
    assert 21 in rec.achieved_any and 22 not in rec.achieved_any
    assert set(rec.achieved_cyclic) <= set(rec.achieved_any)
    assert e_upper(rec) == 23


def test_scan_writes_db(tmp_path):
    db = WitnessDB(tmp_path / "k.jsonl")
    rec = scan(7, ScanOptions(), cyclic_only=True, db=db)
    db2, fails = WitnessDB.load(tmp_path / "k.jsonl")
    assert not fails
    assert record_from_db(db2, 7).achieved_cyclic == rec.achieved_cyclic


def test_compare_reference():
    rec = scan(7, ScanOptions(), cyclic_only=True)
    assert not [d for d in compare_reference([rec]) if d.kind in ("registry-conflict", "bound")]
    planted = SpectrumRecord.empty(5)
    planted.populated_cyclic = True
    planted.add(Witness(22, 5, True, ({"op": "marks", "marks": [0], "v": 22},)))
    kinds = {d.kind for d in compare_reference([planted])}
    assert "registry-conflict" in kinds and "bound" in kinds
    ref = reference_sets(7)
    assert ref["ec"] == 48 and all(43 <= v < 51 for v in ref["cyclic"])


def test_emit_tables(tmp_path):
    rec = scan(6, ScanOptions(), cyclic_only=True)
    md = emit_tables([rec])
    assert "| 6 | 31 | 31 | 35 |" in md
    js = json.loads(emit_tables([rec], "json"))
    assert js[0]["k"] == 6 and js[0]["Ec_upper"] == 35
    out = tmp_path / "t.csv"
    csv_text = emit_tables([rec], "csv", out)
    assert out.read_text() == csv_text and csv_text.startswith("k,P,cyclic")
    with pytest.raises(ValueError):
        emit_tables([rec], "xml")
