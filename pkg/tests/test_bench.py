"""Benchmark harness tests: report arithmetic, the expansion law per
cell, workload determinism and the e2e comparison plumbing."""

import json

import pytest

from securecam.bench import main as bench_main
from securecam.bench import run_e2e, run_micro, synthetic_jpeg
from securecam.sealing import CipherMode

ALL_MODES = [CipherMode.ECB, CipherMode.CBC, CipherMode.CTR]


def test_synthetic_frames_deterministic():
    assert synthetic_jpeg(2048, 5) == synthetic_jpeg(2048, 5)
    assert synthetic_jpeg(2048, 5) != synthetic_jpeg(2048, 6)
    buf = synthetic_jpeg(512, 1)
    assert len(buf) == 512
    assert buf[:2] == b"\xff\xd8" and buf[-2:] == b"\xff\xd9"
    with pytest.raises(ValueError):
        synthetic_jpeg(3, 1)


def test_iterations_floor_enforced():
    with pytest.raises(ValueError):
        run_micro([CipherMode.CTR], [128], [2048], 99)


def test_micro_report_properties():
    report = run_micro(ALL_MODES, [128], [2048, 4100, 30000], 100, seed=3)
    assert len(report.cells) == 9
    for cell in report.cells:
        if cell.mode == "ctr":
            assert cell.expansion_bytes == 0
        else:
            assert cell.expansion_bytes == 16 - (cell.frame_bytes % 16)
            assert 1 <= cell.expansion_bytes <= 16
        # report arithmetic: MB/s equals bytes/wall within 1%
        derived = cell.bytes_processed / cell.wall_time_s / 1e6
        assert abs(cell.mb_per_s - derived) <= 0.011 * derived
        assert cell.p50_us <= cell.p95_us <= cell.p99_us
        assert cell.bytes_processed == cell.frame_bytes * cell.iterations


def test_cbc_expansion_for_30000_byte_frames():
    report = run_micro([CipherMode.CBC], [128], [30000], 100)
    assert report.cells[0].expansion_bytes == 16


def test_aes256_not_faster_than_aes128():
    report = run_micro([CipherMode.CTR], [128, 256], [30000], 150, seed=2)
    p50 = {c.key_bits: c.p50_us for c in report.cells}
    assert p50[256] >= p50[128], p50


def test_e2e_zero_duration():
    result = run_e2e(10, 3, 0, encrypted=True)
    assert result["frames_ok"] == 0
    assert result["achieved_fps"] == 0.0


@pytest.mark.parametrize("encrypted", [False, True])
def test_e2e_short_run(encrypted):
    result = run_e2e(20, 1, 1.5, encrypted=encrypted)
    assert result["frames_ok"] >= 10
    assert 0 < result["achieved_fps"] <= 20


def test_cli_micro_json(tmp_path, capsys):
    out = tmp_path / "report.json"
    rc = bench_main(
        ["--suite", "micro", "--modes", "ctr", "--key-bits", "128",
         "--sizes", "2048", "--iters", "100", "--json", str(out)]
    )
    assert rc == 0
    report = json.loads(out.read_text())
    assert report["suite"] == "micro"
    assert report["cells"][0]["mode"] == "ctr"
    assert capsys.readouterr().out.strip()
