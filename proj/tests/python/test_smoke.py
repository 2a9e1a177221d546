# SPDX-License-Identifier: Apache-2.0
import pathlib

import pytest

import dumpscout

ROOT = pathlib.Path(__file__).resolve().parents[2]
PACK = ROOT / "data" / "profiles.json"


def profile(pid):
    return next(p for p in dumpscout.load_profiles(PACK) if p["id"] == pid)


def test_minidump_round_trip():
    regions = [(0x10000, b"alpha" * 10), (0x20000, b"\x00\x01\x02")]
    d = dumpscout.Dump.from_regions(regions, "rt")
    back = dumpscout.Dump.parse_minidump(d.to_minidump(), "rt.dmp")
    assert back.kind == "minidump"
    assert back.regions() == regions
    assert back.total_bytes == 53


def test_bad_magic_has_code():
    with pytest.raises(dumpscout.DumpscoutError) as exc:
        dumpscout.Dump.parse_minidump(b"XXXX" + bytes(60))
    assert exc.value.code == "BadMagic"


def test_scan_carves_candidate():
    data = b"\x00" * 32 + b"pass=" + b"hunter2hunter2" + b"\x00" * 32
    d = dumpscout.Dump.load_raw(data)
    sig = [{"id": "kv", "pattern": "70 61 73 73 3d", "direction": "after", "window_len": 20}]
    findings = dumpscout.scan(d, sig)
    assert len(findings) == 1
    texts = [c["text"] for c in findings[0]["candidates"]]
    assert any("hunter2hunter2" in t for t in texts)
    assert dumpscout.count_occurrences(d, b"hunter2") == 2


def test_decode_and_encode():
    window = dumpscout.encode_text("secretvalue", "utf16le")
    found = dumpscout.decode_candidates(window, ["utf16le"], 4)
    assert ("utf16le", "secretvalue", 0) in found


def test_lab_discovery_report_pipeline():
    prof = profile("leaks-everywhere")
    dumps, truths = [], []
    for seed in (1, 2):
        vault = dumpscout.new_vault(seed, 3)
        data, truth = dumpscout.simulate(prof, "S1", vault, seed)
        dumps.append(dumpscout.Dump.parse_minidump(data, f"{seed}.dmp"))
        truths.append(truth)
    secrets = [t["vault"]["master_password"] for t in truths]
    cands = dumpscout.mine(dumps, secrets, id_prefix="le")
    assert cands, "no candidate mined"
    sigs = [{k: v for k, v in c.items() if k not in ("support", "recall", "precision")} for c in cands]

    runs = []
    for d, t in zip(dumps, truths):
        counts = dumpscout.classify(dumpscout.scan(d, sigs), t["vault"], t.get("focus_entry"))
        assert counts["master"] == 2
        runs.append({"target": "le", "scenario": "S1", "counts": counts})
    matrix = dumpscout.build_matrix(runs, merge=True)
    md = dumpscout.render_matrix(matrix)
    assert "le" in md
    with pytest.raises(dumpscout.DumpscoutError):
        dumpscout.build_matrix(runs, merge=False)
