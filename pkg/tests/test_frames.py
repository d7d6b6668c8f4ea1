import pytest
from hypothesis import given
from hypothesis import strategies as st

from netload.errors import FrameLengthError, TruncatedFrameError, ValidationError
from netload.frames import (
    ConstantFill,
    FrameSpec,
    IncrementFill,
    MacAddress,
    RandomFill,
    RawFill,
    VlanTag,
    build_frame,
    parse_frame,
    parse_frame_header,
    slot_size,
)
from tests.conftest import mk_frame


class TestMacAddress:
    def test_round_trip(self):
        text = "aa:bb:cc:dd:ee:ff"
        assert str(MacAddress.parse(text)) == text

    def test_uppercase_input_renders_lowercase(self):
        assert str(MacAddress.parse("AA:BB:CC:DD:EE:0F")) == "aa:bb:cc:dd:ee:0f"

    @pytest.mark.parametrize("bad", ["", "aa:bb:cc:dd:ee", "aa-bb-cc-dd-ee-ff", "gg:bb:cc:dd:ee:ff"])
    def test_rejects_malformed(self, bad):
        with pytest.raises(ValidationError):
            MacAddress.parse(bad)

    @given(st.binary(min_size=6, max_size=6))
    def test_bytes_round_trip(self, octets):
        mac = MacAddress(octets)
        assert MacAddress.parse(str(mac)) == mac


class TestVlanTag:
    def test_serializes_tpid_and_tci(self):
        # pcp=7, cfi=0, vid=0 packs to 81 00 e0 00
        assert VlanTag(priority=7, cfi=0, vid=0).to_bytes() == bytes([0x81, 0x00, 0xE0, 0x00])

    def test_exhaustive_round_trip(self):
        # every pcp/cfi/vid combination survives the 4-byte encoding
        for pcp in range(8):
            for cfi in range(2):
                for vid in range(4095):
                    tag = VlanTag(pcp, cfi, vid)
                    raw = tag.to_bytes()
                    tci = int.from_bytes(raw[2:], "big")
                    assert VlanTag.from_tci(tci) == tag

    @pytest.mark.parametrize("pcp,cfi,vid", [(8, 0, 0), (-1, 0, 0), (0, 2, 0), (0, 0, 4095)])
    def test_rejects_out_of_range(self, pcp, cfi, vid):
        with pytest.raises(ValidationError):
            VlanTag(pcp, cfi, vid)

    def test_text_form(self):
        assert str(VlanTag.parse("7.0.42")) == "7.0.42"


class TestSlotSize:
    def test_long_frame(self):
        slot = slot_size(mk_frame(p=1514))
        assert (slot.overhead_bytes, slot.slot_bytes) == (24, 1538)

    def test_short_frame(self):
        slot = slot_size(mk_frame(p=60))
        assert (slot.overhead_bytes, slot.slot_bytes) == (24, 84)

    def test_vlan_frame(self):
        slot = slot_size(mk_frame(p=1020, vlan=VlanTag(7, 0, 0)))
        assert (slot.overhead_bytes, slot.slot_bytes) == (28, 1048)

    @pytest.mark.parametrize("p", [59, 1515, 0])
    def test_rejects_bad_length(self, p):
        with pytest.raises(FrameLengthError):
            mk_frame(p=p)

    @given(st.integers(min_value=60, max_value=1514), st.booleans())
    def test_slot_bounds(self, p, tagged):
        slot = slot_size(mk_frame(p=p, vlan=VlanTag(0, 0, 1) if tagged else None))
        assert slot.slot_bytes == p + 24 + (4 if tagged else 0)
        assert 84 <= slot.slot_bytes <= 1542


class TestBuildFrame:
    def test_untagged_layout(self):
        data = build_frame(mk_frame(p=60), seq=0)
        assert len(data) == 60
        assert data[12:14] == bytes([0x88, 0x92])

    def test_tagged_layout(self):
        data = build_frame(mk_frame(p=60, vlan=VlanTag(7, 0, 0)), seq=0)
        assert len(data) == 64
        assert data[12:16] == bytes([0x81, 0x00, 0xE0, 0x00])
        assert data[16:18] == bytes([0x88, 0x92])

    def test_constant_fill_after_sequence(self):
        data = build_frame(mk_frame(p=60), seq=0)
        payload = data[14:]
        assert payload[:4] == b"\x00\x00\x00\x00"
        assert set(payload[4:]) == {0}

    def test_sequence_is_big_endian(self):
        data = build_frame(mk_frame(p=60), seq=0x01020304)
        assert data[14:18] == bytes([1, 2, 3, 4])


macs = st.binary(min_size=6, max_size=6).map(MacAddress)
vlans = st.one_of(
    st.none(),
    st.builds(
        VlanTag,
        priority=st.integers(0, 7),
        cfi=st.integers(0, 1),
        vid=st.integers(0, 4094),
    ),
)
fills = st.one_of(
    st.builds(ConstantFill, value=st.integers(0, 255)),
    st.just(IncrementFill()),
    st.builds(RandomFill, seed=st.integers(0, 2**32 - 1)),
)
frame_specs = st.builds(
    FrameSpec,
    src=macs,
    dst=macs,
    frame_len_p=st.integers(60, 1514),
    ethertype=st.integers(0, 0xFFFF),
    vlan=vlans,
    payload_fill=fills,
)


class TestParseFrame:
    @given(spec=frame_specs, seq=st.integers(0, 2**32 - 1))
    def test_inverts_build(self, spec, seq):
        assert parse_frame(build_frame(spec, seq)) == (spec, seq)

    def test_rejects_runt(self):
        with pytest.raises(TruncatedFrameError):
            parse_frame(bytes(59))

    def test_foreign_tpid_is_untagged(self):
        data = bytearray(build_frame(mk_frame(p=60), seq=1))
        data[12:14] = bytes([0x88, 0xA8])  # Q-in-Q outer tag, not 802.1Q
        spec, _ = parse_frame(bytes(data))
        assert spec.vlan is None
        assert spec.ethertype == 0x88A8

    def test_foreign_payload_comes_back_raw(self):
        data = bytearray(build_frame(mk_frame(p=60), seq=3))
        data[20] ^= 0xFF  # corrupt the fill pattern
        spec, seq = parse_frame(bytes(data))
        assert seq == 3
        assert isinstance(spec.payload_fill, RawFill)
        # raw fill re-serializes to the same bytes
        assert build_frame(spec, seq) == bytes(data)

    def test_header_parse_matches_full_parse(self):
        frame = mk_frame(p=128, vlan=VlanTag(3, 1, 100))
        data = build_frame(frame, seq=9)
        p_len, tagged, seq = parse_frame_header(data)
        assert (p_len, tagged, seq) == (128, True, 9)
