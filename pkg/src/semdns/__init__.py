"""semdns: compact semantic IoT identifiers as DNS names.

Encode device metadata (hierarchical properties, logical location,
geographic location, self-certifying identity) into short base32 DNS
labels, serve them from an authoritative DNS zone with DNS-SD style
discovery, zone transfer, and dynamic TXT data updates.
"""

from .bits import ALPHABET, BitString, DecodeError, PaddingError, b32_decode, b32_encode
from .contexts import (
    ContextDescriptor,
    ContextRegistry,
    LogicalLocation,
    SemanticIdentifier,
    SemanticTree,
    covered_set,
    decode_logical,
    default_registry,
    encode_logical,
    encode_tree_path,
    frame_identifier,
    load_registry,
    parse_identifier,
)
from .geo import (
    GeoCell,
    GeoIdentifier64,
    GeoPoint,
    decode_geohash,
    encode_geohash,
    geo_identifier_from_label,
    geo_identifier_to_label,
    make_geo_identifier,
)
from .names import Eui64Id, SelfCertName, derive_eui64, derive_name, verify_name
from .zone import DeviceRegistration, SplitPolicy, Zone, split_labels

__version__ = "0.1.0"
