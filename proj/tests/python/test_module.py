import pytest

import hdrx

KEY = hdrx.AnonymizerKey(bytes(range(16)))


def test_parse_synthesized_frame():
    cap = hdrx.synthesize_uniform(4, 128, 2)
    out = hdrx.parse(cap.records[0].data)
    assert out["verdict"] == "extracted_pair"
    assert out["l4"] == "tcp"
    assert out["error"] is None
    assert out["header_bytes_consumed"] == 54
    assert out["ipv4"]["total_length"] == 128 - 14


def test_parse_reports_truncation():
    out = hdrx.parse(b"\x00" * 13)
    assert out["verdict"] == "accepted_no_pair"
    assert out["error"] == "truncated"


def test_parse_stream_counts():
    cap = hdrx.synthesize_uniform(10, 64, 3)
    stats = hdrx.parse_stream([r.data for r in cap.records] + [b"\x00" * 60])
    assert (stats.total, stats.ipv4, stats.tcp, stats.non_ip) == (11, 10, 10, 1)
    assert stats.consistent()


def test_aggregator_cadence_and_summary_size():
    agg = hdrx.Aggregator(n_p=150)
    emitted = [agg.push(i, i + 1) for i in range(150)]
    assert all(s is None for s in emitted[:-1])
    full = emitted[-1]
    assert full.count == 150
    assert len(hdrx.encode_summary(full)) == 1215
    assert agg.flush() is None
    with pytest.raises(ValueError):
        hdrx.Aggregator(n_p=0)


def test_summary_round_trip_and_errors():
    s = hdrx.SummaryPacket([(1, 2), (0xFFFFFFFF, 0)])
    wire = hdrx.encode_summary(s)
    assert wire[12:15] == b"\x88\xb5\x02"
    assert hdrx.decode_summary(wire) == s
    with pytest.raises(hdrx.DecodeError):
        hdrx.decode_summary(wire[:14])


def test_drop_rate_model():
    assert hdrx.theoretical_drop_rate(150) == 1 / 151
    r = hdrx.simulate_slot_model(1_500_000, 150)
    assert r["displaced"] == 10_000
    assert r["displaced_fraction"] == 1 / 151


def test_anonymize_frozen_value():
    assert hdrx.anonymize(0x00010203, KEY) == 661751735
    assert "redacted" in repr(KEY)


def test_matrix_export_import():
    m = hdrx.TrafficMatrix()
    m.ingest_summary(hdrx.SummaryPacket([(1, 2)] * 3 + [(5, 6)]), KEY)
    assert m.total == 4 and len(m) == 2
    text = m.export()
    assert hdrx.TrafficMatrix.import_(text) == m
    assert sorted(n for _, _, n in m.entries()) == [1, 3]


def test_capture_round_trip(tmp_path):
    cap = hdrx.synthesize_uniform(20, 256, 4)
    cap.swapped = True
    path = tmp_path / "t.pcap"
    hdrx.write_capture(cap, path)
    back = hdrx.read_capture(path)
    assert back == cap and back.swapped
    rec = hdrx.CaptureRecord(cap.records[0].data[:54], orig_len=256)
    assert len(hdrx.pad_packet(rec)) == 256


def test_run_pipeline_conservation():
    cap = hdrx.synthesize_uniform(15_000, 64, 100)
    r = hdrx.run_pipeline(cap, KEY, n_p=150)
    assert r.summaries_emitted == 100
    assert r.matrix.total == 15_000
    assert r.report.consistent()


def test_compute_rates_and_bench():
    assert hdrx.compute_rates(1_000_000, 64_000_000, 1.0) == (512.0, 1_000_000.0)
    report = hdrx.bench_ladder([64, 128], 5_000)
    assert [row.packet_size for row in report.rows] == [64, 128]
    assert report.table().startswith("Packet Size (Byte) | Data Rate (Mbps) | Packet Rate (pps)")
