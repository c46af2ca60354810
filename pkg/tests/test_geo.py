import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from semdns.bits import BitString, b32_decode, b32_encode
from semdns.geo import (
    GeoError,
    GeoIdentifier64,
    GeoPoint,
    LAT_RANGE,
    LNG_RANGE,
    bit_split,
    bits_to_interval,
    coord_to_bits,
    decode_geohash,
    deinterleave,
    encode_geohash,
    geo_identifier_from_label,
    geo_identifier_to_label,
    interleave,
    make_geo_identifier,
)

# length -> (lat bits, lng bits, lat error deg, lng error deg); blank error
# cells computed from the bit counts
PRECISION_TABLE = {
    1: (2, 3, 23, 23),
    2: (5, 5, 2.8, 5.6),
    3: (7, 8, 0.70, 0.70),
    4: (10, 10, 0.087, 0.18),
    5: (12, 13, 0.022, 0.022),
    6: (15, 15, 0.0027, 0.0055),
    7: (17, 18, 0.00068, 0.00068),
    8: (20, 20, 0.000085, 0.00017),
    9: (22, 23, None, None),
    10: (25, 25, None, None),
    11: (27, 28, None, None),
    12: (30, 30, None, None),
}

STATUE_OF_LIBERTY = GeoPoint(40.689167, -74.044444)

points = st.builds(
    GeoPoint,
    st.floats(-90, 90, allow_nan=False),
    st.floats(-180, 180, allow_nan=False),
)


class TestCoordToBits:
    def test_lowest_corner_all_zeros(self):
        assert coord_to_bits(-90, LAT_RANGE, 8) == BitString("00000000")

    def test_single_bit_decodes_to_plus_45(self):
        bits = coord_to_bits(45, LAT_RANGE, 1)
        assert bits == BitString("1")
        lo, hi = bits_to_interval(bits, LAT_RANGE)
        assert (lo + hi) / 2 == 45

    def test_dichotomy_bits_12_and_13(self):
        assert coord_to_bits(42.605, LAT_RANGE, 12) == BitString("101111001001")
        assert coord_to_bits(-5.603, LNG_RANGE, 13) == BitString("0111110000000")

    def test_out_of_range(self):
        with pytest.raises(GeoError):
            coord_to_bits(91, LAT_RANGE, 4)

    def test_midpoint_goes_to_upper_half(self):
        assert coord_to_bits(0, LAT_RANGE, 1) == BitString("1")


class TestInterleave:
    def test_combination_table(self):
        lat = BitString("101111001001")
        lng = BitString("0111110000000")
        assert interleave(lat, lng) == BitString("0110111111110000010000010")

    def test_single_bit(self):
        assert interleave(BitString(""), BitString("1")) == BitString("1")

    def test_length_mismatch(self):
        with pytest.raises(GeoError):
            interleave(BitString("11"), BitString("11111"))

    @given(st.integers(0, 30).flatmap(lambda n: st.tuples(
        st.text("01", min_size=n, max_size=n),
        st.text("01", min_size=n, max_size=n + 1).filter(lambda s: len(s) >= n),
    )))
    def test_inverse(self, pair):
        lat, lng = BitString(pair[0]), BitString(pair[1])
        assert deinterleave(interleave(lat, lng)) == (lat, lng)


class TestEncodeGeohash:
    def test_statue_of_liberty_12(self):
        assert encode_geohash(STATUE_OF_LIBERTY, 12) == "dr5r7p4rx6kz"

    def test_origin_length_1(self):
        assert encode_geohash(GeoPoint(0, 0), 1) == "s"

    def test_prefix_truncation(self):
        assert encode_geohash(STATUE_OF_LIBERTY, 12).startswith(
            encode_geohash(STATUE_OF_LIBERTY, 7)
        )

    def test_bad_length(self):
        with pytest.raises(GeoError):
            encode_geohash(STATUE_OF_LIBERTY, 0)
        with pytest.raises(GeoError):
            encode_geohash(STATUE_OF_LIBERTY, 13)

    def test_longitude_180_wraps(self):
        assert encode_geohash(GeoPoint(0, 180), 3) == encode_geohash(GeoPoint(0, -180), 3)

    @given(points, st.integers(1, 12))
    def test_morton_composition_equivalence(self, p, length):
        # two-path check: dichotomy + interleave + base32 must equal the encoder
        lat_n, lng_n = bit_split(length)
        composed = b32_encode(interleave(
            coord_to_bits(p.latitude, LAT_RANGE, lat_n),
            coord_to_bits(p.longitude, LNG_RANGE, lng_n),
        ))
        assert encode_geohash(p, length) == composed

    @given(points, st.integers(1, 11))
    def test_prefix_property(self, p, length):
        assert encode_geohash(p, length + 1).startswith(encode_geohash(p, length))


class TestDecodeGeohash:
    def test_dr5r7p4_center(self):
        center = decode_geohash("dr5r7p4").center
        assert center.latitude == pytest.approx(40.69, abs=0.005)
        assert center.longitude == pytest.approx(-74.04, abs=0.005)

    def test_ezs42_errors(self):
        cell = decode_geohash("ezs42")
        assert cell.lat_error == pytest.approx(0.022, rel=0.1)
        assert cell.lng_error == pytest.approx(0.022, rel=0.1)

    def test_single_symbol_cell(self):
        cell = decode_geohash("s")
        assert cell.center.latitude == pytest.approx(22.5)
        assert cell.center.longitude == pytest.approx(22.5)
        assert cell.lat_error == pytest.approx(22.5)
        assert cell.lng_error == pytest.approx(22.5)

    def test_bit_splits_match_table(self):
        for length, (lat_n, lng_n, _, _) in PRECISION_TABLE.items():
            assert bit_split(length) == (lat_n, lng_n)

    def test_error_bounds_match_table(self):
        for length, (lat_n, lng_n, lat_err, lng_err) in PRECISION_TABLE.items():
            cell = decode_geohash(encode_geohash(STATUE_OF_LIBERTY, length))
            assert cell.lat_error == 90 * 2.0 ** (-lat_n)
            assert cell.lng_error == 180 * 2.0 ** (-lng_n)
            if lat_err is not None:
                assert cell.lat_error == pytest.approx(lat_err, rel=0.1)
                assert cell.lng_error == pytest.approx(lng_err, rel=0.1)

    @given(st.text("0123456789bcdefghjkmnpqrstuvwxyz", min_size=1, max_size=12))
    def test_fixpoint(self, label):
        assert encode_geohash(decode_geohash(label).center, len(label)) == label

    @given(st.text("0123456789bcdefghjkmnpqrstuvwxyz", min_size=1, max_size=11),
           st.sampled_from("0123456789bcdefghjkmnpqrstuvwxyz"))
    def test_region_nesting(self, label, extra):
        outer = decode_geohash(label)
        inner = decode_geohash(label + extra)
        assert outer.lat_interval[0] <= inner.lat_interval[0]
        assert inner.lat_interval[1] <= outer.lat_interval[1]
        assert outer.lng_interval[0] <= inner.lng_interval[0]
        assert inner.lng_interval[1] <= outer.lng_interval[1]
        assert inner.lat_error < outer.lat_error or inner.lng_error < outer.lng_error


class TestGeoIdentifier:
    def test_total_64_bits(self):
        g = make_geo_identifier(STATUE_OF_LIBERTY)
        assert len(g.bits) == 64
        assert g.context_id == 3
        assert len(g.to_bytes()) == 8

    def test_lowest_corner_zero_coordinate_bits(self):
        g = make_geo_identifier(GeoPoint(-90, -180))
        assert g.coordinate_bits.to_int() == 0

    def test_cell_contains_point_tightly(self):
        g = make_geo_identifier(STATUE_OF_LIBERTY)
        cell = g.cell()
        assert cell.contains(STATUE_OF_LIBERTY)
        assert cell.lng_error <= 180 / 2 ** 30

    def test_label_is_13_symbols(self):
        assert geo_identifier_to_label(make_geo_identifier(STATUE_OF_LIBERTY)) != ""
        assert len(geo_identifier_to_label(make_geo_identifier(GeoPoint(1, 2)))) == 13

    def test_all_zero_label(self):
        g = GeoIdentifier64(0, BitString("0" * 59))
        assert geo_identifier_to_label(g) == "0000000000000"

    def test_nonzero_padding_rejected(self):
        bits = BitString("0" * 64) + BitString("1")
        label = b32_encode(bits)
        with pytest.raises(GeoError):
            geo_identifier_from_label(label)

    def test_coordinate_bits_align_with_geohash(self):
        # the 59 coordinate bits are the first 59 bits of the 12-symbol
        # geohash Morton stream, so the label and geohash agree bitwise
        g = make_geo_identifier(STATUE_OF_LIBERTY)
        morton = b32_decode(encode_geohash(STATUE_OF_LIBERTY, 12))
        assert g.coordinate_bits == morton[:59]

    @given(points)
    def test_label_round_trip(self, p):
        g = make_geo_identifier(p)
        assert geo_identifier_from_label(geo_identifier_to_label(g)) == g

    @given(points)
    def test_decoded_cell_contains_point(self, p):
        cell = make_geo_identifier(p).cell()
        assert cell.contains(GeoPoint(p.latitude, p.longitude))
