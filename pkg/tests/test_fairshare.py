import random

import numpy as np
import pytest

from mplsagg.fairshare import fair_shares, water_fill
from mplsagg.topology import ContractViolation

from helpers import exact_maxmin, random_fairshare_instance


def test_matches_exact_oracle_on_random_instances():
    rng = random.Random(99)
    for _ in range(500):
        flows, capacity = random_fairshare_instance(rng)
        got = fair_shares(flows, capacity)
        want = exact_maxmin(flows, capacity)
        for f in flows:
            assert got[f] == pytest.approx(float(want[f]), rel=1e-9)


def test_every_flow_has_a_bottleneck():
    rng = random.Random(5)
    for _ in range(200):
        flows, capacity = random_fairshare_instance(rng)
        rates = fair_shares(flows, capacity)
        load = {l: sum(rates[f] for f in flows if l in flows[f]) for l in capacity}
        for f, path in flows.items():
            assert any(
                load[l] >= capacity[l] * (1 - 1e-9)
                and all(rates[g] <= rates[f] * (1 + 1e-9) for g in flows if l in flows[g])
                for l in path
            )
        for l in capacity:
            assert load[l] <= capacity[l] * (1 + 1e-12)


def test_two_flows_split_a_link():
    assert fair_shares({"a": [0], "b": [0]}, [100e6]) == {"a": 50e6, "b": 50e6}


def test_parking_lot():
    rates = fair_shares({"A": ["l1", "l2"], "B": ["l1"], "C": ["l2"]},
                        {"l1": 100e6, "l2": 100e6})
    assert rates == {"A": 50e6, "B": 50e6, "C": 50e6}


def test_unequal_bottlenecks():
    rates = fair_shares({"A": [0, 1], "B": [1], "C": [0]}, [30.0, 100.0])
    assert rates["A"] == pytest.approx(15.0)
    assert rates["C"] == pytest.approx(15.0)
    assert rates["B"] == pytest.approx(85.0)


def test_class_kernel_equals_flow_view():
    # 3 identical flows as one class of count 3
    cap = np.array([90.0, 60.0])
    links = np.array([[0, 1], [1, 0]], dtype=np.int64)
    lengths = np.array([2, 1], dtype=np.int64)
    counts = np.array([3.0, 1.0])
    rates, loads = np.zeros(2), np.zeros(2)
    water_fill(cap, counts, links, lengths, rates, loads)
    flows = {0: [0, 1], 1: [0, 1], 2: [0, 1], 3: [1]}
    ref = fair_shares(flows, cap)
    assert rates[0] == pytest.approx(ref[0]) and rates[1] == pytest.approx(ref[3])
    assert loads[1] == pytest.approx(60.0)


def test_empty_classes_are_ignored():
    cap = np.array([10.0])
    rates, loads = np.zeros(2), np.zeros(1)
    water_fill(cap, np.array([0.0, 2.0]), np.zeros((2, 1), dtype=np.int64),
               np.array([1, 1], dtype=np.int64), rates, loads)
    assert rates.tolist() == [0.0, 5.0]


@pytest.mark.parametrize("flows", [{"a": []}, {"a": [7]}, {"a": [0, 0]}])
def test_bad_paths_are_contract_violations(flows):
    with pytest.raises(ContractViolation):
        fair_shares(flows, [1.0])
