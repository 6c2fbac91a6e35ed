"""Relay tests: loopback consumption, reject accounting, sinks, sequence
gaps, and the CLI exit-code contract."""

import http.client
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest
from conftest import running_server

from securecam import jpeg
from securecam.camera import CameraSettings, Frame
from securecam.errors import IoFailure
from securecam.relay import (
    DirSink,
    MjpegSink,
    NullSink,
    _read_part,
    consume_stream,
)
from securecam.relay import main as relay_main
from securecam.sealing import CipherMode, KeyConfig, encode_wire, seal_frame

KEY = bytes(range(16))
CFG = KeyConfig(key_id=0, key=KEY, mode=CipherMode.CTR)


class RecordingSink(NullSink):
    def __init__(self):
        super().__init__()
        self.seqs = []

    def emit(self, seq, data):
        super().emit(seq, data)
        assert jpeg.is_jpeg(data)  # only validated plaintext arrives here
        self.seqs.append(seq)


def test_loopback_all_frames_ok(device_server):
    sink = RecordingSink()
    report = consume_stream(device_server.base_url + "/stream", CFG, sink, count=30)
    assert report.frames_ok == 30
    assert report.frames_rejected == 0
    assert report.seq_gaps == 0
    assert report.parts_consumed == report.frames_ok + report.frames_rejected
    assert sink.seqs == sorted(sink.seqs)  # arrival order preserved
    assert report.decrypt_p50_us > 0
    assert report.throughput_bytes_per_sec > 0


def test_wrong_key_rejects_everything(device_server):
    bad = KeyConfig(key_id=0, key=bytes(range(1, 17)), mode=CipherMode.CTR)
    sink = RecordingSink()
    report = consume_stream(device_server.base_url + "/stream", bad, sink, count=15)
    assert report.frames_ok == 0
    assert report.frames_rejected == 15
    assert sink.count == 0  # zero false accepts
    assert sum(report.rejected_by_cause.values()) == 15
    assert set(report.rejected_by_cause) <= {
        "CorruptImage",
        "InvalidPadding",
        "LengthMismatch",
    }


def test_duration_limit(device_server):
    report = consume_stream(
        device_server.base_url + "/stream", CFG, NullSink(), duration=1.0
    )
    assert report.frames_ok >= 1
    assert report.elapsed_s < 3.0


def test_connect_failure_reports_transport_error():
    report = consume_stream("http://127.0.0.1:9/stream", CFG, NullSink(), count=1)
    assert report.transport_error is not None
    assert report.parts_consumed == 0


def test_dir_sink_writes_by_seq(tmp_path, device_server):
    sink = DirSink(str(tmp_path))
    report = consume_stream(device_server.base_url + "/stream", CFG, sink, count=5)
    assert report.frames_ok == 5
    files = sorted(tmp_path.glob("frame_*.jpg"))
    assert len(files) == 5
    for path in files:
        assert jpeg.is_jpeg(path.read_bytes())


def test_dir_sink_io_failure(tmp_path):
    target = tmp_path / "out"
    sink = DirSink(str(target))
    target.rmdir()
    with pytest.raises(IoFailure):
        sink.emit(1, b"\xff\xd8data\xff\xd9")


class _GapHandler(BaseHTTPRequestHandler):
    """Serves a short fixed stream whose seq numbers jump 1 -> 5."""

    records: list[bytes] = []

    def log_message(self, fmt, *args):
        pass

    def do_GET(self):
        self.send_response(200)
        self.send_header("Content-Type", "multipart/x-mixed-replace; boundary=x")
        self.end_headers()
        for record in self.records:
            self.wfile.write(
                b"--x\r\nContent-Type: application/octet-stream\r\n"
                b"Content-Length: " + str(len(record)).encode() + b"\r\n\r\n"
                + record + b"\r\n"
            )


def _sealed_record(seq):
    frame = Frame(
        seq=seq,
        timestamp_ms=0,
        jpeg=jpeg.SOI + bytes(64) + jpeg.EOI,
        settings=CameraSettings(),
    )
    return encode_wire(seal_frame(frame, CFG))


def test_sequence_gap_counted():
    _GapHandler.records = [_sealed_record(s) for s in (0, 1, 5, 6)]
    httpd = ThreadingHTTPServer(("127.0.0.1", 0), _GapHandler)
    httpd.daemon_threads = True
    threading.Thread(target=httpd.serve_forever, daemon=True).start()
    try:
        url = f"http://127.0.0.1:{httpd.server_address[1]}/stream"
        report = consume_stream(url, CFG, NullSink())
        assert report.frames_ok == 4
        assert report.seq_gaps == 1
        assert report.parts_consumed == 4
    finally:
        httpd.shutdown()
        httpd.server_close()


def test_mjpeg_sink_reserves_plaintext(device_server):
    sink = MjpegSink(0, device_url=device_server.base_url, key_cfg=CFG)
    try:
        conn = http.client.HTTPConnection("127.0.0.1", sink.port, timeout=10)
        conn.request("GET", "/stream")
        resp = conn.getresponse()
        assert resp.status == 200
        assert "multipart/x-mixed-replace" in resp.headers["Content-Type"]

        worker = threading.Thread(
            target=consume_stream,
            args=(device_server.base_url + "/stream", CFG, sink),
            kwargs={"count": 6},
        )
        worker.start()
        # headers of each part advertise image/jpeg; bodies are valid frames
        line = resp.readline()
        assert line.strip() == b"--frame"
        headers = {}
        while True:
            line = resp.readline().strip()
            if not line:
                break
            name, _, value = line.partition(b":")
            headers[name.strip().lower()] = value.strip()
        assert headers[b"content-type"] == b"image/jpeg"
        body = resp.read(int(headers[b"content-length"]))
        assert jpeg.is_jpeg(body)
        worker.join(timeout=20)
        conn.close()
    finally:
        sink.close()


def test_mjpeg_sink_still_proxies_device(device_server):
    import time
    import urllib.error
    import urllib.request

    sink = MjpegSink(0, device_url=device_server.base_url, key_cfg=CFG)
    try:
        with pytest.raises(urllib.error.HTTPError) as err:
            urllib.request.urlopen(sink.base_url + "/still", timeout=10)
        assert err.value.code == 404  # no still captured yet

        urllib.request.urlopen(device_server.base_url + "/capture", timeout=10)
        deadline = time.monotonic() + 5
        body = None
        while time.monotonic() < deadline:
            try:
                r = urllib.request.urlopen(sink.base_url + "/still", timeout=10)
                assert r.headers["Content-Type"] == "image/jpeg"
                body = r.read()
                break
            except urllib.error.HTTPError:
                time.sleep(0.1)
        assert body is not None and jpeg.is_jpeg(body)
    finally:
        sink.close()


# --- CLI ---

def _write_keyfile(tmp_path):
    path = tmp_path / "keys.cfg"
    path.write_text(f"key_id=0 mode=ctr key={KEY.hex()}\n")
    return str(path)


def test_cli_clean_run_exit_zero(tmp_path, device_server):
    report_path = tmp_path / "report.json"
    rc = relay_main(
        [
            "--url", device_server.base_url + "/stream",
            "--key-file", _write_keyfile(tmp_path),
            "--count", "5",
            "--report-json", str(report_path),
        ]
    )
    assert rc == 0
    report = json.loads(report_path.read_text())
    assert report["frames_ok"] == 5
    assert report["frames_rejected"] == 0
    assert report["parts_consumed"] == 5
    assert "p50" in report["decrypt_latency_us"]


def test_cli_wrong_key_exit_one(tmp_path, device_server):
    path = tmp_path / "keys.cfg"
    path.write_text(f"key_id=0 mode=ctr key={bytes(range(1, 17)).hex()}\n")
    rc = relay_main(
        ["--url", device_server.base_url + "/stream", "--key-file", str(path),
         "--count", "3"]
    )
    assert rc == 1


def test_cli_transport_failure_exit_one(tmp_path):
    rc = relay_main(
        ["--url", "http://127.0.0.1:9/stream", "--key-file", _write_keyfile(tmp_path)]
    )
    assert rc == 1


def test_cli_unknown_flag_exit_two(tmp_path):
    with pytest.raises(SystemExit) as err:
        relay_main(["--bogus"])
    assert err.value.code == 2
