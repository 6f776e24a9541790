import subprocess
import sys

import numpy as np
import pytest
from scipy import stats

from dmcdrr.traffic import (
    FlowStream,
    StochasticSource,
    TraceSource,
    TrafficSpec,
    mix64,
    offered_load_bps,
    raw_block,
    stream_key,
)

# published SplitMix64 outputs for state 0
SPLITMIX_SEED0 = [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def scalar_stream(key, count):
    """Plain-integer SplitMix64, stepping the state one output at a time."""
    state, out = key, []
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) % 2**64
        out.append(mix64(state))
    return out


def test_splitmix_reference_vector():
    assert scalar_stream(0, 3) == SPLITMIX_SEED0
    assert [int(x) for x in raw_block(0, 0, 3)] == SPLITMIX_SEED0


@pytest.mark.parametrize("seed, flow", [(1, 1), (42, 7), (2**64 - 1, 25)])
def test_vectorized_block_matches_scalar_stepping(seed, flow):
    key = stream_key(seed, flow)
    expected = scalar_stream(key, 300)
    assert [int(x) for x in raw_block(key, 0, 300)] == expected
    assert [int(x) for x in raw_block(key, 100, 50)] == expected[100:150]


def draws(seed, flow, n):
    stream = FlowStream(TrafficSpec(seed=seed), flow)
    return np.array([stream.next_ns() for _ in range(n)])


@pytest.fixture(scope="module")
def million():
    return draws(7, 3, 10**6)


def test_mean_interframe_48us(million):
    mean = million[:, 0].mean()
    assert abs(mean - 48_000) / 48_000 < 0.01


def test_frame_sizes_in_range_with_mean_791(million):
    sizes = million[:, 1]
    assert sizes.min() >= 64 and sizes.max() <= 1518
    assert abs(sizes.mean() - 791) / 791 < 0.01
    # inclusive bounds are actually reached
    assert sizes.min() == 64 and sizes.max() == 1518


def test_exponential_ks(million):
    gaps = million[:200_000, 0]
    result = stats.kstest(gaps, "expon", args=(0, 48_000))
    assert result.pvalue > 0.01


def test_sizes_uniform_chi_square(million):
    counts = np.bincount(million[:, 1] - 64, minlength=1455)
    result = stats.chisquare(counts)
    assert result.pvalue > 0.01


def test_flows_are_independent():
    a = draws(5, 1, 5000)[:, 0]
    b = draws(5, 2, 5000)[:, 0]
    assert not np.array_equal(a, b)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.05


def test_same_seed_same_draws_across_processes():
    code = ("from dmcdrr.traffic import FlowStream, TrafficSpec\n"
            "s = FlowStream(TrafficSpec(seed=11), 4)\n"
            "print([s.next_ns() for _ in range(100)])\n")
    runs = [subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                           check=True).stdout for _ in range(2)]
    assert runs[0] == runs[1]
    assert runs[0].strip() == str([tuple(x) for x in draws(11, 4, 100).tolist()])


def test_block_boundaries_do_not_matter():
    small = FlowStream(TrafficSpec(seed=3), 2, block=7)
    big = FlowStream(TrafficSpec(seed=3), 2, block=4096)
    assert [small.next_ns() for _ in range(50)] == [big.next_ns() for _ in range(50)]


def test_next_arrival_in_seconds():
    src = StochasticSource(TrafficSpec(seed=9), 3)
    gap, size = src.next_arrival(2)
    ref = FlowStream(TrafficSpec(seed=9), 2).next_ns()
    assert gap == pytest.approx(ref[0] * 1e-9) and size == ref[1]


def test_offered_load_exceeds_two_transmitters():
    load = offered_load_bps(TrafficSpec(), 20)
    assert load == pytest.approx(791 * 8 / 48e-6 * 20)
    assert load == pytest.approx(2.637e9, rel=1e-3)
    assert load > 2e9


@pytest.mark.parametrize("kwargs", [
    dict(mean_interframe=0), dict(size_min=0), dict(size_min=100, size_max=99), dict(seed=-1),
])
def test_traffic_spec_validation(kwargs):
    with pytest.raises(ValueError):
        TrafficSpec(**kwargs)


class TestTrace:
    def test_csv_round_trip(self, tmp_path):
        src = TraceSource([(0, 1, 200), (0, 2, 800), (1500, 1, 64)])
        path = tmp_path / "t.csv"
        src.to_csv(path)
        assert path.read_text().splitlines()[0] == "time_ns,flow_id,size_bytes"
        assert TraceSource.from_csv(path).records == src.records

    def test_times_must_not_decrease(self):
        with pytest.raises(ValueError):
            TraceSource([(10, 1, 64), (5, 1, 64)])

    def test_bad_header(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("t,flow,size\n0,1,64\n")
        with pytest.raises(ValueError):
            TraceSource.from_csv(path)
