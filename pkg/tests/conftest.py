import pytest

from netload import (
    BurstFeature,
    DurationFeature,
    FrameSpec,
    FramesFeature,
    LineRate,
    LoadFraction,
    LoadSpec,
    MacAddress,
    VlanTag,
)

SRC = MacAddress.parse("02:00:00:00:00:01")
DST = MacAddress.parse("02:00:00:00:00:02")


def mk_frame(p=60, vlan=None, **kwargs) -> FrameSpec:
    return FrameSpec(src=SRC, dst=DST, frame_len_p=p, vlan=vlan, **kwargs)


def mk_spec(frame, load_pct, feature, rate=LineRate.MBPS_100, port="loop0") -> LoadSpec:
    return LoadSpec(
        frame=frame,
        rate=rate,
        load=LoadFraction.from_percent(load_pct),
        feature=feature,
        port=port,
    )


@pytest.fixture
def case1_spec():
    """40 long frames at 25% load on Fast Ethernet."""
    return mk_spec(mk_frame(p=1514), 25, FramesFeature(40))


@pytest.fixture
def case2_spec():
    """Short frames at 25% load for a 20 ms window."""
    return mk_spec(mk_frame(p=60), 25, DurationFeature(20_000_000))


@pytest.fixture
def case3_spec():
    """VLAN-tagged 50% load, 20 bursts of 1 s with 1 s sleeps."""
    return mk_spec(
        mk_frame(p=1020, vlan=VlanTag(priority=7, cfi=0, vid=0)),
        50,
        BurstFeature(burst_count=20, burst_interval_ns=10**9, sleep_interval_ns=10**9),
    )
