import pytest
from hypothesis import given
from hypothesis import strategies as st

from semdns.bits import ALPHABET, BitString, DecodeError, PaddingError, b32_decode, b32_encode


def test_alphabet_constant():
    assert ALPHABET == "0123456789bcdefghjkmnpqrstuvwxyz"
    assert len(set(ALPHABET)) == 32
    for banned in "ailo":
        assert banned not in ALPHABET


def test_encode_golden_ezs42():
    assert b32_encode(BitString("0110111111110000010000010")) == "ezs42"


def test_encode_golden_1d152():
    assert b32_encode(BitString("0000101100000010010100010")) == "1d152"


def test_encode_empty():
    assert b32_encode(BitString("")) == ""


def test_decode_goldens():
    assert b32_decode("ezs42") == BitString("0110111111110000010000010")
    assert b32_decode("z") == BitString("11111")
    assert b32_decode("27mcs") == BitString("0001000111100110101111000")


def test_decode_case_insensitive():
    assert b32_decode("EZS42") == b32_decode("ezs42")


def test_encode_rejects_bad_length():
    with pytest.raises(PaddingError):
        b32_encode(BitString("0110"))


def test_decode_names_offending_character():
    with pytest.raises(DecodeError) as exc:
        b32_decode("ez!42")
    assert exc.value.char == "!"
    assert exc.value.position == 2
    for bad in "ailo":
        with pytest.raises(DecodeError):
            b32_decode(bad)


def test_from_int_msb_first():
    assert BitString.from_int(376, 10) == BitString("0101111000")
    assert BitString.from_int(0, 0) == BitString("")
    with pytest.raises(ValueError):
        BitString.from_int(32, 5)


def test_slicing_and_concat():
    b = BitString("10110")
    assert b[:2] == BitString("10")
    assert b[2:] + b[:2] == BitString("11010")
    assert len(b) == 5


bitstrings = st.integers(0, 50).flatmap(
    lambda n: st.integers(0, 2 ** (5 * n) - 1 if n else 0).map(
        lambda v: BitString.from_int(v, 5 * n)
    )
)


@given(bitstrings)
def test_round_trip_encode_decode(bits):
    assert b32_decode(b32_encode(bits)) == bits


@given(st.text(alphabet=ALPHABET, max_size=30))
def test_round_trip_decode_encode(label):
    assert b32_encode(b32_decode(label)) == label
