"""DNS wire format: message framing, name compression, rdata codecs.

Covers exactly what an authoritative IoT-discovery service needs: QUERY
and UPDATE opcodes; A, NS, CNAME, SOA, PTR, TXT and SRV rdata; AXFR/IXFR
qtypes.  Compression pointers are always accepted on input and emitted
for owner names and compressible rdata names on output.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace

from .records import (
    A, CNAME, CLASS_IN, NS, PTR, SOA, SRV, TXT,
    Name, Rdata, RecordError, ResourceRecord,
    TYPE_A, TYPE_CNAME, TYPE_NS, TYPE_PTR, TYPE_SOA, TYPE_SRV, TYPE_TXT,
)

OPCODE_QUERY = 0
OPCODE_UPDATE = 5

RCODE_NOERROR = 0
RCODE_FORMERR = 1
RCODE_SERVFAIL = 2
RCODE_NXDOMAIN = 3
RCODE_NOTIMP = 4
RCODE_REFUSED = 5

RCODE_NAMES = {
    RCODE_NOERROR: "NOERROR",
    RCODE_FORMERR: "FORMERR",
    RCODE_SERVFAIL: "SERVFAIL",
    RCODE_NXDOMAIN: "NXDOMAIN",
    RCODE_NOTIMP: "NOTIMP",
    RCODE_REFUSED: "REFUSED",
}

MAX_NAME_WIRE = 255
MAX_UDP_PAYLOAD = 1460  # amplification guard, .com-style record cap


class WireError(ValueError):
    pass


@dataclass(frozen=True)
class Question:
    qname: Name
    qtype: int
    qclass: int = CLASS_IN


@dataclass(frozen=True)
class Message:
    id: int = 0
    qr: bool = False
    opcode: int = OPCODE_QUERY
    aa: bool = False
    tc: bool = False
    rd: bool = False
    ra: bool = False
    rcode: int = RCODE_NOERROR
    questions: tuple[Question, ...] = ()
    answers: tuple[ResourceRecord, ...] = ()
    authority: tuple[ResourceRecord, ...] = ()
    additional: tuple[ResourceRecord, ...] = ()

    def reply(self, rcode: int = RCODE_NOERROR, **kwargs) -> "Message":
        """Response skeleton: echoes id and question, sets QR and AA."""
        fields = dict(qr=True, aa=True, ra=False, rcode=rcode,
                      answers=(), authority=(), additional=())
        fields.update(kwargs)
        return replace(self, **fields)


# ---------------------------------------------------------------------------
# Encoding


class _Writer:
    def __init__(self):
        self.buf = bytearray()
        self.offsets: dict[Name, int] = {}

    def u8(self, v): self.buf.append(v)
    def u16(self, v): self.buf += struct.pack("!H", v)
    def u32(self, v): self.buf += struct.pack("!I", v)

    def name(self, name: Name, compress: bool = True):
        wire_len = sum(len(l) + 1 for l in name) + 1
        if wire_len > MAX_NAME_WIRE:
            raise WireError(f"name {'.'.join(name)} exceeds 255 wire bytes")
        for i in range(len(name)):
            suffix = name[i:]
            known = self.offsets.get(suffix) if compress else None
            if known is not None:
                self.u16(0xC000 | known)
                return
            if len(self.buf) < 0x3FFF:
                self.offsets[suffix] = len(self.buf)
            label = name[i].encode("ascii")
            self.u8(len(label))
            self.buf += label
        self.u8(0)

    def rdata(self, rdata: Rdata):
        start_pos = len(self.buf)
        self.u16(0)  # rdlength placeholder
        begin = len(self.buf)
        if isinstance(rdata, A):
            self.buf += bytes(int(p) for p in rdata.address.split("."))
        elif isinstance(rdata, (NS, CNAME, PTR)):
            self.name(rdata.target)
        elif isinstance(rdata, TXT):
            for s in rdata.strings:
                data = s.encode("latin-1")
                self.u8(len(data))
                self.buf += data
        elif isinstance(rdata, SRV):
            self.u16(rdata.priority)
            self.u16(rdata.weight)
            self.u16(rdata.port)
            self.name(rdata.target, compress=False)  # RFC 2782: no compression
        elif isinstance(rdata, SOA):
            self.name(rdata.mname)
            self.name(rdata.rname)
            for v in (rdata.serial, rdata.refresh, rdata.retry, rdata.expire, rdata.minimum):
                self.u32(v)
        else:
            raise WireError(f"cannot encode rdata {rdata!r}")
        struct.pack_into("!H", self.buf, start_pos, len(self.buf) - begin)


def encode(msg: Message) -> bytes:
    w = _Writer()
    flags = (
        (int(msg.qr) << 15) | (msg.opcode << 11) | (int(msg.aa) << 10)
        | (int(msg.tc) << 9) | (int(msg.rd) << 8) | (int(msg.ra) << 7)
        | msg.rcode
    )
    w.u16(msg.id)
    w.u16(flags)
    for count in (len(msg.questions), len(msg.answers), len(msg.authority), len(msg.additional)):
        w.u16(count)
    for q in msg.questions:
        w.name(q.qname)
        w.u16(q.qtype)
        w.u16(q.qclass)
    for rr in msg.answers + msg.authority + msg.additional:
        w.name(rr.owner)
        w.u16(rr.rtype)
        w.u16(rr.rclass)
        w.u32(rr.ttl)
        w.rdata(rr.rdata)
    return bytes(w.buf)


# ---------------------------------------------------------------------------
# Decoding


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def need(self, n):
        if self.pos + n > len(self.data):
            raise WireError("truncated message")

    def u8(self):
        self.need(1)
        v = self.data[self.pos]
        self.pos += 1
        return v

    def u16(self):
        self.need(2)
        v = struct.unpack_from("!H", self.data, self.pos)[0]
        self.pos += 2
        return v

    def u32(self):
        self.need(4)
        v = struct.unpack_from("!I", self.data, self.pos)[0]
        self.pos += 4
        return v

    def take(self, n):
        self.need(n)
        v = self.data[self.pos : self.pos + n]
        self.pos += n
        return v

    def name(self) -> Name:
        labels = []
        pos = self.pos
        jumped = False
        seen = set()
        while True:
            if pos in seen:
                raise WireError("compression pointer loop")
            seen.add(pos)
            if pos >= len(self.data):
                raise WireError("truncated name")
            length = self.data[pos]
            if length & 0xC0 == 0xC0:
                if pos + 1 >= len(self.data):
                    raise WireError("truncated compression pointer")
                target = struct.unpack_from("!H", self.data, pos)[0] & 0x3FFF
                if not jumped:
                    self.pos = pos + 2
                jumped = True
                pos = target
            elif length == 0:
                if not jumped:
                    self.pos = pos + 1
                break
            elif length & 0xC0:
                raise WireError(f"bad label length byte {length:#x}")
            else:
                if pos + 1 + length > len(self.data):
                    raise WireError("truncated label")
                labels.append(self.data[pos + 1 : pos + 1 + length].decode("ascii").lower())
                pos += 1 + length
        name = tuple(labels)
        if sum(len(l) + 1 for l in name) + 1 > MAX_NAME_WIRE:
            raise WireError("name exceeds 255 wire bytes")
        return name

    def rdata(self, rtype: int) -> Rdata:
        rdlength = self.u16()
        end = self.pos + rdlength
        self.need(rdlength)
        if rtype == TYPE_A:
            rdata: Rdata = A(".".join(str(b) for b in self.take(4)))
        elif rtype in (TYPE_NS, TYPE_CNAME, TYPE_PTR):
            target = self.name()
            rdata = {TYPE_NS: NS, TYPE_CNAME: CNAME, TYPE_PTR: PTR}[rtype](target)
        elif rtype == TYPE_TXT:
            strings = []
            while self.pos < end:
                strings.append(self.take(self.u8()).decode("latin-1"))
            rdata = TXT(tuple(strings))
        elif rtype == TYPE_SRV:
            rdata = SRV(self.u16(), self.u16(), self.u16(), self.name())
        elif rtype == TYPE_SOA:
            rdata = SOA(self.name(), self.name(), self.u32(), self.u32(),
                        self.u32(), self.u32(), self.u32())
        else:
            raise WireError(f"unsupported rdata type {rtype}")
        if self.pos != end:
            raise WireError(f"rdata length mismatch for type {rtype}")
        return rdata


def decode(data: bytes) -> Message:
    r = _Reader(data)
    msg_id = r.u16()
    flags = r.u16()
    qd, an, ns, ar = r.u16(), r.u16(), r.u16(), r.u16()
    questions = tuple(
        Question(r.name(), r.u16(), r.u16()) for _ in range(qd)
    )

    def section(count):
        out = []
        for _ in range(count):
            owner = r.name()
            rtype = r.u16()
            rclass = r.u16()
            ttl = r.u32()
            out.append(ResourceRecord(owner, ttl, r.rdata(rtype), rclass=rclass))
        return tuple(out)

    answers = section(an)
    authority = section(ns)
    additional = section(ar)
    return Message(
        id=msg_id,
        qr=bool(flags & 0x8000),
        opcode=(flags >> 11) & 0xF,
        aa=bool(flags & 0x0400),
        tc=bool(flags & 0x0200),
        rd=bool(flags & 0x0100),
        ra=bool(flags & 0x0080),
        rcode=flags & 0xF,
        questions=questions,
        answers=answers,
        authority=authority,
        additional=additional,
    )
