import ipaddress
import json

import pytest

from mplsagg.dataplane import (
    INFINITE,
    Action,
    FiveTuple,
    LegacySwitch,
    Outcome,
    PeSwitch,
    Switch,
    client_network,
    dump_tables,
    legacy_admit,
)


def flow(dst_node=5, sport=1000, dport=80):
    src = int(client_network(1).network_address) + 7
    dst = int(client_network(dst_node).network_address) + 9
    return FiveTuple(src, dst, sport, dport)


@pytest.fixture
def pe():
    sw = PeSwitch(1, dft_timeout=1.0)
    sw.replace_cft(client_network(5), Action(20, 2))
    return sw


def test_cft_copy_then_dft_hit(pe):
    f = flow()
    d = pe.pe_admit(f, 0.0)
    assert d.outcome is Outcome.CFT_COPIED and d.action == Action(20, 2)
    assert len(pe.dft) == 1
    d2 = pe.pe_admit(f, 0.1)
    assert d2.outcome is Outcome.DFT_HIT and d2.action == Action(20, 2)
    assert len(pe.dft) == 1
    assert pe.packet_in == 0


def test_port_rule_outranks_prefix_rule(pe):
    pe.replace_cft(client_network(5), Action(21, 3), dst_port=443, priority=10)
    assert pe.pe_admit(flow(dport=443), 0).action == Action(21, 3)
    assert pe.pe_admit(flow(dport=80), 0).action == Action(20, 2)


def test_longer_prefix_wins(pe):
    sub = ipaddress.IPv4Network("10.5.0.0/24")
    pe.replace_cft(sub, Action(30, 4))
    assert pe.pe_admit(flow(), 0).action == Action(30, 4)


def test_table_miss_and_no_match(pe):
    assert pe.pe_admit(flow(dst_node=9), 0).outcome is Outcome.NO_MATCH
    pe.set_table_miss()
    pe.set_table_miss()
    assert sum(e.table_miss for e in pe.cft) == 1
    assert pe.pe_admit(flow(dst_node=9), 0).outcome is Outcome.PACKET_IN
    assert pe.packet_in == 1
    # a specific rule still beats the catch-all
    assert pe.pe_admit(flow(), 0).outcome is Outcome.CFT_COPIED


def test_cft_replace_does_not_touch_existing_flows(pe):
    f = flow()
    pe.pe_admit(f, 0)
    pe.replace_cft(client_network(5), Action(22, 3))
    assert pe.pe_admit(f, 0.5).action == Action(20, 2)
    assert pe.pe_admit(flow(sport=2000), 0.5).action == Action(22, 3)


def test_dft_expires_only_after_flow_idle(pe):
    f = flow()
    pe.pe_admit(f, 0.0)
    assert pe.gc_tick(5.0) == []  # active flow keeps the entry alive
    pe.release_flow(f, 5.0)
    assert pe.gc_tick(5.5) == []
    removed = pe.gc_tick(6.5)  # idle 1.5 s with timeout 1 s
    assert [t for t, _ in removed] == ["dft"] and not pe.dft


def test_dft_size_counts_active_tuples(pe):
    for i in range(5):
        pe.pe_admit(flow(sport=1000 + i), 0.0)
    pe.pe_admit(flow(sport=1000), 0.0)
    assert len(pe.dft) == 5


def test_infinite_label_entry_never_expires():
    sw = Switch(7)
    sw.install_label(40, 8, 0.0)
    assert sw.gc_tick(1e6) == []
    assert sw.p_forward(40, 1e6) == 8


def test_unknown_label_is_a_fault():
    sw = Switch(7)
    assert sw.p_forward(99, 0) is None
    assert sw.faults == 1


def test_egress_pop_returns_self():
    sw = Switch(5)
    sw.install_label(40, None, 0.0)
    assert sw.p_forward(40, 0.0) == 5


def test_demoted_entry_forwards_until_expiry():
    sw = Switch(7)
    sw.install_label(40, 8, 0.0)
    sw.attach_label(40, 0.0)
    sw.demote_label(40, 1.0, 2.0)
    assert sw.gc_tick(10.0) == []  # still carrying traffic
    assert sw.p_forward(40, 10.0) == 8
    sw.detach_label(40, 10.0)
    assert sw.gc_tick(10.9) == []
    assert sw.p_forward(40, 10.9) == 8
    assert [e.label for _, e in sw.gc_tick(11.9)] == [40]
    assert sw.p_forward(40, 12.0) is None


def test_idle_demoted_entry_times_out_from_demotion():
    sw = Switch(7)
    sw.install_label(40, 8, 0.0)
    sw.demote_label(40, 1.0, 50.0)
    assert sw.gc_tick(50.5) == []
    assert len(sw.gc_tick(51.0)) == 1


def test_reinstall_with_traffic_is_refused():
    sw = Switch(7)
    sw.install_label(40, 8, 0.0)
    sw.attach_label(40, 0.0)
    with pytest.raises(RuntimeError):
        sw.install_label(40, 9, 1.0)


def test_legacy_packet_in_per_switch():
    switches = {n: LegacySwitch(n) for n in range(6)}
    n = legacy_admit(switches, [0, 1, 2, 5], flow(), 0.0)
    assert n == 4
    assert [switches[i].packet_in for i in range(6)] == [1, 1, 1, 0, 0, 1]
    assert switches[2].flows[flow()].out_node == 5
    assert switches[5].flows[flow()].out_node is None


def test_dump_tables_json_lines(pe):
    pe.pe_admit(flow(), 0.0)
    pe.install_label(20, 2, 0.0)
    rows = [json.loads(l) for l in dump_tables([pe], 3.0).splitlines()]
    assert {r["table"] for r in rows} == {"labels", "cft", "dft"}
    assert all(r["t"] == 3.0 for r in rows)
    assert INFINITE == float("inf")
