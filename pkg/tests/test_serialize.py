import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldp_hist.protocols import (
    KRandomizedResponse,
    Rappor,
    SubsetSelection,
    base_protocol,
    hadamard_protocol,
    pgr_protocol,
)
from ldp_hist.serialize import (
    decode_message,
    decode_varint,
    encode_message,
    encode_varint,
    protocol_id,
)
from ldp_hist.transform import SplitProtocol


class TestVarints:
    @pytest.mark.parametrize(
        "value,raw",
        [
            (0, b"\x00"),
            (1, b"\x01"),
            (127, b"\x7f"),
            (128, b"\x80\x01"),
            (300, b"\xac\x02"),
            (2**21, b"\x80\x80\x80\x01"),
        ],
    )
    def test_known_encodings(self, value, raw):
        assert encode_varint(value) == raw
        assert decode_varint(raw, 0) == (value, len(raw))

    @given(st.integers(min_value=0, max_value=2**63))
    @settings(max_examples=200, deadline=None)
    def test_round_trip(self, value):
        raw = encode_varint(value)
        assert decode_varint(raw, 0) == (value, len(raw))

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            encode_varint(-1)


class TestProtocolIds:
    def test_ids_are_distinct_and_stable(self):
        protos = [
            KRandomizedResponse(4, 1.0),
            Rappor(4, 1.0),
            SubsetSelection(6, 1.0),
            pgr_protocol(5, 1.0),
            hadamard_protocol(5, 1.0),
            SplitProtocol("krr", 4, 3.0),
        ]
        ids = [protocol_id(p) for p in protos]
        assert ids == [1, 2, 3, 4, 5, 6]


class TestRoundTrips:
    @pytest.mark.parametrize(
        "proto",
        [
            KRandomizedResponse(10, 1.0),
            Rappor(11, 1.0),
            SubsetSelection(9, 1.0),
            pgr_protocol(8, 1.0),
            hadamard_protocol(8, 1.0),
            SplitProtocol("krr", 6, 3.0),
            SplitProtocol("rappor", 5, 2.0),
            SplitProtocol("ss", 7, 2.0),
        ],
        ids=lambda p: p.name,
    )
    def test_every_protocol_round_trips(self, proto):
        rng = np.random.default_rng(13)
        for x in [0, proto.k // 2, proto.k - 1]:
            msg = proto.randomize(x, rng)
            decoded = decode_message(proto, encode_message(proto, msg))
            np.testing.assert_array_equal(np.asarray(decoded), np.asarray(msg))

    def test_symbol_record_layout(self):
        proto = KRandomizedResponse(10, 1.0)
        assert encode_message(proto, 7) == b"\x01\x07"

    def test_bit_packing_is_little_endian(self):
        proto = Rappor(11, 1.0)
        bits = np.zeros(11, dtype=np.uint8)
        bits[[0, 3, 8]] = 1
        # Bit j of symbol j: byte0 holds symbols 0..7 -> 0b00001001, byte1
        # holds symbols 8..10 -> 0b001.
        assert encode_message(proto, bits) == b"\x02\x09\x01"

    def test_subset_record_layout(self):
        proto = SubsetSelection(300, 1.0)
        msg = np.array([2, 5, 130], dtype=np.int64)
        assert encode_message(proto, msg) == b"\x03\x03\x02\x05\x82\x01"


class TestRecordValidation:
    def test_tag_mismatch(self):
        krr = KRandomizedResponse(10, 1.0)
        record = encode_message(krr, 3)
        with pytest.raises(ValueError, match="does not match"):
            decode_message(hadamard_protocol(8, 1.0), record)

    def test_trailing_bytes(self):
        krr = KRandomizedResponse(10, 1.0)
        with pytest.raises(ValueError, match="trailing"):
            decode_message(krr, encode_message(krr, 3) + b"\x00")

    def test_split_round_count_mismatch(self):
        two = SplitProtocol("krr", 6, 2.0)
        three = SplitProtocol("krr", 6, 3.0)
        rng = np.random.default_rng(0)
        record = encode_message(three, three.randomize(1, rng))
        with pytest.raises(ValueError, match="round count|base protocol"):
            decode_message(two, record)

    def test_record_length_matches_reported_bits(self):
        # The payload should stay within a byte of the advertised size.
        for proto in [KRandomizedResponse(16, 1.0), Rappor(16, 1.0), hadamard_protocol(8, 1.0)]:
            rng = np.random.default_rng(1)
            msg = proto.randomize(0, rng)
            payload = len(encode_message(proto, msg)) - 1
            assert payload <= proto.message_bits // 8 + 1
