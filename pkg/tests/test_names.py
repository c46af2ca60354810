import hashlib
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from semdns._ripemd160 import ripemd160
from semdns.names import (
    NameError_,
    SelfCertName,
    derive_eui64,
    derive_name,
    verify_name,
)

# Official RIPEMD-160 test vectors (Dobbertin, Bosselaers, Preneel) --
# the independent oracle for the hash our pipeline depends on.
RIPEMD_VECTORS = {
    b"": "9c1185a5c5e9fc54612808977ee8f548b2258d31",
    b"a": "0bdc9d2d256b3ee9daae347be6f4dc835a467ffe",
    b"abc": "8eb208f7e05d987a9b044a8e98c6b087f15a0bfc",
    b"message digest": "5d0689ef49d2fae572b881b123a85ffa21595f36",
    b"abcdefghijklmnopqrstuvwxyz": "f71c27109c692c1b56bbdceb5b9d2865b3708dbc",
    b"abcdefghbcdefghicdefghijdefghijkefghijklfghijklmghijklmnhijklmnoijklmnopjklmnopqklmnopqrlmnopqrsmnopqrstnopqrstu":
        "6f3fa39b6b503c384f919a49a7aa5c2c08bdfb45",
}

# Pipeline goldens, frozen from reference-hash computations.
PIPELINE_GOLDENS = [
    (b"abc",
     "bb1be98c142444d7a56aa3981c3942a978e4dc33",
     "rdeym30n4j2eg9cbnfd1sfb2p5wf9r1m",
     "d346e7098d72597d"),
    (b"semdns test key",
     "854977d88ae6648fe258cf5ad374a8469aec00f4",
     "hp4rgq4bwtk8zskstxee6x588uefs07n",
     "18f198dcfcd4831e"),
    (bytes(range(64)),
     "dd21d9434f79e153b82e7d204ea5279200d0d022",
     "vnhxkhugg7hp7f1fgnh4x997k80e1n12",
     "e37e66e7ffd1f222"),
]


def test_ripemd160_reference_vectors():
    for data, digest in RIPEMD_VECTORS.items():
        assert ripemd160(data).hex() == digest
    assert ripemd160(b"a" * 1_000_000).hex() == "52783243c1697bdbe16d37f97f68f08325dc1528"


@pytest.mark.parametrize("key,digest,label,eui", PIPELINE_GOLDENS)
def test_pipeline_goldens(key, digest, label, eui):
    name = derive_name(key)
    assert name.digest.hex() == digest
    assert name.label == label
    assert derive_eui64(name).value.hex() == eui
    # digest and eui64 must agree with independent compositions
    assert name.digest == ripemd160(hashlib.sha256(key).digest())
    assert derive_eui64(name).value == hashlib.sha3_256(name.digest).digest()[:8]


def test_name_is_32_symbols_and_deterministic():
    a, b = derive_name(b"key"), derive_name(b"key")
    assert a == b
    assert len(a.label) == 32


def test_empty_key_rejected():
    with pytest.raises(NameError_):
        derive_name(b"")


def test_verify_roundtrip_and_mismatch():
    key = b"some device key"
    label = derive_name(key).label
    assert verify_name(label, key)
    assert not verify_name(label, key + b"x")


def test_verify_case_insensitive():
    key = b"another key"
    label = derive_name(key).label
    assert verify_name(label.upper(), key)


def test_verify_malformed_label_distinguishable():
    with pytest.raises(NameError_):
        verify_name("tooshort", b"key")
    with pytest.raises(Exception):
        verify_name("a" * 32, b"key")  # 'a' not in the alphabet


def test_no_eui64_collisions_on_random_keys():
    rng = random.Random(20240817)
    seen = set()
    for _ in range(10_000):
        key = rng.randbytes(32)
        seen.add(derive_eui64(derive_name(key)).value)
    assert len(seen) == 10_000


@given(st.binary(min_size=1, max_size=128))
def test_verify_soundness(key):
    assert verify_name(derive_name(key).label, key)


@given(st.binary(min_size=1, max_size=64), st.binary(min_size=1, max_size=64))
def test_verify_completeness(k1, k2):
    if k1 != k2:
        assert not verify_name(derive_name(k1).label, k2)
