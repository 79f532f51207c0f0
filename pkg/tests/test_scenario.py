import csv

import pytest

from tssdnsim.cli import main, resolve_scenario
from tssdnsim.config import ConfigError, load_config, parse_config, parse_time_ns
from tssdnsim.metrics import (FRAME_CSV_HEADER, LatencyRecord, MetricsSink,
                              check_guarantee, summarize)
from tssdnsim.scenario import compare_report, emit_outputs, run_scenario
from tssdnsim.srp import CLASS_A

US = 1_000
MS = 1_000_000


# -- time parsing ---------------------------------------------------------


def test_parse_time_units():
    assert parse_time_ns("0.3ms") == 300 * US
    assert parse_time_ns("25us") == 25 * US
    assert parse_time_ns("1s") == 1_000 * MS
    assert parse_time_ns(42) == 42
    assert parse_time_ns("100") == 100


def test_parse_time_rejects_fractional_ns():
    with pytest.raises(ConfigError):
        parse_time_ns("1.5ns")


def test_parse_time_rejects_garbage():
    for bad in ("fast", "10 minutes", "-3us", None):
        with pytest.raises(ConfigError):
            parse_time_ns(bad)


# -- config validation ----------------------------------------------------


def minimal_raw(**overrides):
    raw = {
        "sdn_enabled": False,
        "run_until": "10ms",
        "clients": ["c0", "c1"],
        "switches": ["s0"],
        "links": [{"a": "c0", "b": "s0"}, {"a": "s0", "b": "c1"}],
    }
    raw.update(overrides)
    return raw


def test_minimal_config_parses():
    cfg = parse_config(minimal_raw())
    assert cfg.run_until_ns == 10 * MS
    assert cfg.idle_setup_ns == 100 * MS  # default
    assert [l.rate_bps for l in cfg.links] == [100_000_000, 100_000_000]


def test_controller_without_sdn_rejected():
    with pytest.raises(ConfigError):
        parse_config(minimal_raw(controller="ctl"))


def test_sdn_without_controller_rejected():
    with pytest.raises(ConfigError):
        parse_config(minimal_raw(sdn_enabled=True))


def test_missing_run_until_rejected():
    raw = minimal_raw()
    del raw["run_until"]
    with pytest.raises(ConfigError):
        parse_config(raw)


def test_link_to_unknown_node_rejected():
    raw = minimal_raw(links=[{"a": "c0", "b": "nowhere"}])
    with pytest.raises(ConfigError):
        parse_config(raw)


def test_disconnected_topology_rejected():
    raw = minimal_raw(links=[{"a": "c0", "b": "s0"}])  # c1 is an island
    with pytest.raises(ConfigError):
        parse_config(raw)


def test_duplicate_node_names_rejected():
    with pytest.raises(ConfigError):
        parse_config(minimal_raw(switches=["c0"]))


def test_unicast_stream_group_rejected():
    raw = minimal_raw(talker={"node": "c0", "dst_group": "02:00:00:00:00:09",
                              "vid": 2})
    with pytest.raises(ConfigError):
        parse_config(raw)


def test_shipped_scenarios_load():
    sdn = load_config(resolve_scenario("case_study_sdn"))
    nosdn = load_config(resolve_scenario("case_study_nosdn"))
    fault = load_config(resolve_scenario("fault_injection"))
    assert sdn.sdn_enabled and not nosdn.sdn_enabled
    assert sdn.talker.interval_ns == 125 * US
    assert sdn.control.one_way_delay_ns == 25 * US
    assert nosdn.controller is None
    assert fault.shaper_enabled is False
    assert fault.cross_traffic.pcp == 6


# -- metrics --------------------------------------------------------------


def recs(flow, latencies, start=0, spacing=100):
    return [LatencyRecord(flow, i, start + i * spacing, start + i * spacing + lat)
            for i, lat in enumerate(latencies)]


def test_summarize_min_mean_max():
    stats = summarize(recs("udp", [100 * US, 200 * US, 300 * US]), 0, 10 * MS)
    st = stats["udp"]
    assert (st.min_ns, st.mean_ns, st.max_ns) == (100 * US, 200 * US, 300 * US)
    assert st.count == 3


def test_summarize_single_record():
    st = summarize(recs("udp", [7]), 0, 10 * MS)["udp"]
    assert st.min_ns == st.max_ns == 7 and st.mean_ns == 7.0


def test_summarize_empty_window_is_explicit_none():
    stats = summarize(recs("udp", [100, 200]), 5 * MS, 10 * MS)
    assert stats["udp"] is None


def test_sink_rejects_nonpositive_latency():
    sink = MetricsSink()
    with pytest.raises(ValueError):
        sink.record("udp", 0, 100, 100)


def test_guarantee_with_no_stream_frames_fails_loudly():
    result = check_guarantee(recs("udp", [1]), CLASS_A, 3)
    assert not result.passed
    assert result.reason == "no stream frames observed"
    assert result.worst is None


def test_guarantee_names_the_worst_frame():
    records = recs("stream-1", [100 * US, 800 * US])
    result = check_guarantee(records, CLASS_A, 3)
    assert not result.passed
    assert result.worst.seq == 1
    assert result.limit_ns == 750 * US


# -- runs and outputs -----------------------------------------------------


def test_run_ending_before_setup_produces_no_records():
    cfg = load_config(resolve_scenario("case_study_nosdn"))
    cfg.run_until_ns = 50 * MS  # before anything is scheduled to start
    result = run_scenario(cfg)
    assert result.records == []
    assert result.stream_start_ns is None
    assert result.check_guarantee().reason == "no stream frames observed"


def test_cross_traffic_disturbs_the_stream_immediately(nosdn_result):
    # with 1000-byte frames contending from the start, even the first stream
    # frame waits behind best-effort traffic somewhere on the path
    first = nosdn_result.stream_records()[0]
    assert first.latency_ns > 100 * US


def test_emitted_frame_csv_layout(tmp_path, nosdn_result):
    paths = emit_outputs(nosdn_result, tmp_path)
    with open(paths["frames"]) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == FRAME_CSV_HEADER
    assert len(rows) == 1 + len(nosdn_result.records)
    flow, seq, send_ns, recv_ns, latency_ns = rows[1]
    assert int(recv_ns) - int(send_ns) == int(latency_ns)
    assert (tmp_path / "report.txt").read_text().startswith("scenario:")


def test_repeated_runs_are_byte_identical(tmp_path):
    cfg = load_config(resolve_scenario("case_study_sdn"))
    first = run_scenario(cfg)
    second = run_scenario(load_config(resolve_scenario("case_study_sdn")))
    emit_outputs(first, tmp_path / "a")
    emit_outputs(second, tmp_path / "b")
    for name in ("frames.csv", "summary.csv", "counters.json", "control_trace.log"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_compare_report_states_the_shift(sdn_result, nosdn_result):
    report = compare_report(sdn_result, nosdn_result)
    assert "stream start delta (SDN - noSDN): 300000 ns" in report
    assert "steady mean delta" in report


# -- command line ---------------------------------------------------------


def test_cli_run_writes_outputs(tmp_path, capsys):
    rc = main(["run", "--scenario", "case_study_nosdn", "--until", "120ms",
               "--out", str(tmp_path / "out")])
    assert rc == 0
    assert (tmp_path / "out" / "frames.csv").exists()
    assert "frames recorded" in capsys.readouterr().out


def test_cli_check_guarantee_pass_and_fail(capsys):
    assert main(["check", "--scenario", "case_study_nosdn", "--until", "120ms",
                 "--guarantee"]) == 0
    assert "guarantee PASS" in capsys.readouterr().out
    assert main(["check", "--scenario", "fault_injection", "--until", "120ms",
                 "--guarantee"]) == 1
    assert "guarantee FAIL" in capsys.readouterr().out


def test_cli_unknown_scenario_is_a_config_error(capsys):
    assert main(["run", "--scenario", "no_such_scenario"]) == 2
    assert "config error" in capsys.readouterr().err


def test_cli_compare_writes_both_runs(tmp_path):
    rc = main(["compare", "--sdn", "case_study_sdn", "--nosdn", "case_study_nosdn",
               "--until", "125ms", "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "sdn" / "frames.csv").exists()
    assert (tmp_path / "nosdn" / "frames.csv").exists()
    assert "comparison" in (tmp_path / "comparison.txt").read_text()
