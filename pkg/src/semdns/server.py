"""Authoritative DNS service over datagram and stream transports.

Query handling is pure (message in, message out) so it can be tested
without sockets; the transport layer adds the datagram byte cap with TC
fallback, stream framing for zone transfers, and the UPDATE access
policy (source allow-list plus an optional shared-secret token carried
as a ``token=...`` TXT record in the additional section).
"""

from __future__ import annotations

import logging
import socket
import socketserver
import struct
import threading
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from . import wire
from .records import (
    CLASS_IN, CLASS_NONE, CLASS_ANY, Name, PTR, ResourceRecord, TXT,
    TYPE_ANY, TYPE_AXFR, TYPE_CNAME, TYPE_IXFR, TYPE_PTR, TYPE_SOA, TYPE_TXT,
    is_subdomain, name_text,
)
from .wire import (
    Message, OPCODE_QUERY, OPCODE_UPDATE, Question,
    RCODE_FORMERR, RCODE_NOERROR, RCODE_NOTIMP, RCODE_NXDOMAIN, RCODE_REFUSED,
    RCODE_SERVFAIL,
)
from .zone import (
    DeviceRegistration, JournalFile, SizeGuardError, Zone, ZoneError,
    txt_key, txt_pair, txt_value,
)

log = logging.getLogger("semdns.server")

UPDATE_TOKEN_KEY = "token"
#: UPDATE-borne registrations are TXT records at this owner label under
#: the service name; the value packs the DeviceRegistration fields.
REGISTER_LABEL = "_register"


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 5300
    zone_file: Optional[str] = None
    journal_file: Optional[str] = None
    byte_cap: int = wire.MAX_UDP_PAYLOAD
    update_secret: Optional[str] = None
    allowed_sources: Optional[tuple[str, ...]] = None  # None: any source

    def __post_init__(self):
        if not 0 <= self.port < 65536:
            raise ValueError(f"invalid port {self.port}")


# ---------------------------------------------------------------------------
# Pure query handling


def answer_query(msg: Message, zone: Zone) -> Message:
    """Authoritative answer for a standard QUERY message."""
    if msg.opcode != OPCODE_QUERY:
        return msg.reply(rcode=RCODE_NOTIMP)
    if len(msg.questions) != 1:
        return msg.reply(rcode=RCODE_FORMERR)
    q = msg.questions[0]
    if not is_subdomain(q.qname, zone.origin):
        return msg.reply(rcode=RCODE_REFUSED)

    answers: list[ResourceRecord] = []
    target = q.qname
    # chase CNAMEs inside the zone, exposing the chain in the answer
    for _ in range(8):
        aliases = zone.records_at(target, TYPE_CNAME)
        if not aliases:
            break
        answers.append(aliases[0])
        target = aliases[0].rdata.target

    if q.qtype == TYPE_ANY:
        answers += zone.records_at(target)
        if target == zone.origin:
            answers.append(zone.soa_record())
    elif q.qtype == TYPE_PTR:
        discovered = sorted(zone.ptr_discover(target))
        if discovered:
            answers += [
                ResourceRecord(q.qname, zone.default_ttl, PTR(instance))
                for instance in discovered
            ]
        else:
            answers += zone.records_at(target, TYPE_PTR)
    elif q.qtype == TYPE_SOA:
        if target == zone.origin:
            answers.append(zone.soa_record())
    else:
        answers += zone.records_at(target, q.qtype)

    if not answers and not zone.has_owner(target):
        return msg.reply(rcode=RCODE_NXDOMAIN)
    return msg.reply(answers=tuple(answers))


def serve_axfr(msg: Message, zone: Zone, stream: bool) -> Message:
    """Full transfer: whole zone at the apex, the subtree elsewhere."""
    if not stream:
        return msg.reply(rcode=RCODE_REFUSED)
    q = msg.questions[0]
    if q.qname == zone.origin:
        records = zone.axfr_snapshot()
    else:
        subtree = zone.subtree(q.qname)
        if not subtree:
            return msg.reply(rcode=RCODE_NXDOMAIN)
        soa = zone.soa_record()
        records = [soa, *subtree, soa]
    return msg.reply(answers=tuple(records))


def serve_ixfr(msg: Message, zone: Zone, stream: bool) -> Message:
    """Incremental transfer from the serial in the query's authority SOA."""
    q = msg.questions[0]
    client_soas = [r for r in msg.authority if r.rtype == TYPE_SOA]
    if not client_soas:
        return msg.reply(rcode=RCODE_FORMERR)
    from_serial = client_soas[0].rdata.serial
    diff = zone.ixfr_diff(from_serial)
    current = zone.soa_record(diff.to_serial)
    if diff.fallback:
        return serve_axfr(msg, zone, stream=True) if stream else msg.reply(tc=True)
    if not diff.steps:
        return msg.reply(answers=(current,))
    records: list[ResourceRecord] = [current]
    prev = from_serial
    for step in diff.steps:
        records.append(zone.soa_record(prev))
        records.extend(step.deletions)
        records.append(zone.soa_record(step.serial))
        records.extend(step.additions)
        prev = step.serial
    records.append(current)
    reply = msg.reply(answers=tuple(records))
    if not stream and len(wire.encode(reply)) > wire.MAX_UDP_PAYLOAD:
        # datagram IXFR degrades to a single SOA telling the client to retry
        return msg.reply(answers=(current,))
    return reply


# ---------------------------------------------------------------------------
# Dynamic update


def handle_update(
    msg: Message,
    zone: Zone,
    config: ServerConfig,
    source: Optional[str] = None,
) -> Message:
    """Apply a dynamic UPDATE restricted to TXT data records.

    Authorization: the source address must be on the allow-list (when one
    is configured) and, when a shared secret is configured, the additional
    section must carry a TXT record ``token=<secret>``.
    """
    if msg.opcode != OPCODE_UPDATE:
        return msg.reply(rcode=RCODE_NOTIMP)
    if not _authorized(msg, config, source):
        log.warning("refused UPDATE from %s: not authorized", source)
        return msg.reply(rcode=RCODE_REFUSED, additional=())
    if len(msg.questions) != 1 or not is_subdomain(msg.questions[0].qname, zone.origin):
        return msg.reply(rcode=RCODE_REFUSED, additional=())

    # validate first: an update is all-or-nothing
    register_owner = (REGISTER_LABEL,) + zone.service + zone.origin
    ops = []
    for rr in msg.authority:
        if rr.rtype != TYPE_TXT:
            log.warning("refused UPDATE: record type %s not updatable", rr.type_name)
            return msg.reply(rcode=RCODE_REFUSED, additional=())
        key = txt_key(rr.rdata)
        if key is None:
            return msg.reply(rcode=RCODE_REFUSED, additional=())
        ops.append((rr, key))
    status: list[ResourceRecord] = []
    try:
        for rr, key in ops:
            if rr.owner == register_owner:
                reg = _parse_registration(txt_value(rr.rdata))
                changed, owner = zone.register_device(reg)
                status.append(ResourceRecord(
                    owner, 0,
                    txt_pair("status", "registered" if changed else "unchanged"),
                ))
            elif rr.rclass in (CLASS_NONE, CLASS_ANY):
                zone.delete_txt(rr.owner, key)
            else:
                zone.update_txt(rr.owner, key, txt_value(rr.rdata), ttl=rr.ttl)
    except SizeGuardError as exc:
        log.warning("refused UPDATE: %s", exc)
        return msg.reply(rcode=RCODE_REFUSED, additional=())
    except ZoneError as exc:
        log.warning("failed UPDATE: %s", exc)
        return msg.reply(rcode=RCODE_SERVFAIL, additional=())
    return msg.reply(additional=tuple(status))


def pack_registration(reg: DeviceRegistration) -> str:
    """Registration fields packed into one TXT value for the UPDATE wire."""
    parts = [
        f"instance={reg.instance}",
        f"id={reg.identifier}",
        f"port={reg.port}",
        f"target={name_text(reg.target)}",
        f"priority={reg.priority}",
        f"weight={reg.weight}",
    ]
    if reg.ttl is not None:
        parts.append(f"ttl={reg.ttl}")
    for k, v in reg.txt:
        parts.append(f"txt.{k}={v}")
    return ";".join(parts)


def _parse_registration(value: str) -> DeviceRegistration:
    from .records import parse_name
    fields: dict[str, str] = {}
    txt: list[tuple[str, str]] = []
    for part in value.split(";"):
        if "=" not in part:
            raise ZoneError(f"malformed registration field {part!r}")
        k, v = part.split("=", 1)
        if k.startswith("txt."):
            txt.append((k[4:], v))
        else:
            fields[k] = v
    try:
        return DeviceRegistration(
            instance=fields["instance"],
            identifier=fields["id"],
            port=int(fields["port"]),
            target=parse_name(fields["target"]),
            priority=int(fields.get("priority", 10)),
            weight=int(fields.get("weight", 20)),
            txt=tuple(txt),
            ttl=int(fields["ttl"]) if "ttl" in fields else None,
        )
    except (KeyError, ValueError) as exc:
        raise ZoneError(f"malformed registration {value!r}: {exc}") from exc


def _authorized(msg: Message, config: ServerConfig, source: Optional[str]) -> bool:
    if config.allowed_sources is not None and source not in config.allowed_sources:
        return False
    if config.update_secret is not None:
        for rr in msg.additional:
            if rr.rtype == TYPE_TXT and txt_key(rr.rdata) == UPDATE_TOKEN_KEY:
                if txt_value(rr.rdata) == config.update_secret:
                    return True
        return False
    return True


def update_token_record(secret: str, owner: Name = ()) -> ResourceRecord:
    """The additional-section record clients attach to authenticate."""
    from .zone import txt_pair
    return ResourceRecord(owner, 0, txt_pair(UPDATE_TOKEN_KEY, secret))


# ---------------------------------------------------------------------------
# Transport


def dispatch(data: bytes, zone: Zone, config: ServerConfig,
             stream: bool, source: Optional[str]) -> bytes:
    """Decode, route, answer, encode; applies the datagram cap with TC."""
    try:
        msg = wire.decode(data)
    except wire.WireError:
        msg_id = struct.unpack("!H", data[:2])[0] if len(data) >= 2 else 0
        return wire.encode(Message(id=msg_id, qr=True, rcode=RCODE_FORMERR))
    try:
        if msg.opcode == OPCODE_UPDATE:
            reply = handle_update(msg, zone, config, source)
        elif not msg.questions:
            reply = msg.reply(rcode=RCODE_FORMERR)
        elif msg.questions[0].qtype == TYPE_AXFR:
            reply = serve_axfr(msg, zone, stream)
        elif msg.questions[0].qtype == TYPE_IXFR:
            reply = serve_ixfr(msg, zone, stream)
        else:
            reply = answer_query(msg, zone)
    except Exception:
        log.exception("query handling failed")
        reply = msg.reply(rcode=RCODE_SERVFAIL)
    payload = wire.encode(reply)
    if not stream and len(payload) > config.byte_cap:
        # too big for a datagram: empty truncated reply, client retries on stream
        payload = wire.encode(reply.reply(tc=True))
    return payload


class DnsServer:
    """UDP + TCP service around one zone; runs until shutdown()."""

    def __init__(self, zone: Zone, config: ServerConfig):
        self.zone = zone
        self.config = config
        self._journal_file = None
        if config.journal_file:
            self._journal_file = JournalFile(config.journal_file)
            zone.load_journal(self._journal_file.load())
            zone.on_mutate = self._persist
        outer = self

        class _UdpHandler(socketserver.BaseRequestHandler):
            def handle(self):
                data, sock = self.request
                payload = dispatch(
                    data, outer.zone, outer.config, stream=False,
                    source=self.client_address[0],
                )
                sock.sendto(payload, self.client_address)

        class _TcpHandler(socketserver.BaseRequestHandler):
            def handle(self):
                try:
                    header = _recv_exact(self.request, 2)
                    (length,) = struct.unpack("!H", header)
                    data = _recv_exact(self.request, length)
                except ConnectionError:
                    return
                payload = dispatch(
                    data, outer.zone, outer.config, stream=True,
                    source=self.client_address[0],
                )
                self.request.sendall(struct.pack("!H", len(payload)) + payload)

        class _Udp(socketserver.ThreadingUDPServer):
            allow_reuse_address = True

        class _Tcp(socketserver.ThreadingTCPServer):
            allow_reuse_address = True
            daemon_threads = True

        addr = (config.host, config.port)
        self._udp = _Udp(addr, _UdpHandler)
        self._tcp = _Tcp((config.host, self._udp.server_address[1]), _TcpHandler)
        self._threads: list[threading.Thread] = []

    @property
    def port(self) -> int:
        return self._udp.server_address[1]

    def _persist(self, entry):
        self._journal_file.append(entry)

    def start(self) -> None:
        for srv in (self._udp, self._tcp):
            t = threading.Thread(target=srv.serve_forever, daemon=True)
            t.start()
            self._threads.append(t)
        log.info("listening on %s:%d (udp+tcp)", self.config.host, self.port)

    def shutdown(self) -> None:
        for srv in (self._udp, self._tcp):
            srv.shutdown()
            srv.server_close()
        for t in self._threads:
            t.join(timeout=5)

    def serve_forever(self) -> None:
        self.start()
        try:
            threading.Event().wait()
        except KeyboardInterrupt:
            self.shutdown()


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ConnectionError("peer closed mid-message")
        buf += chunk
    return buf


def run(config: ServerConfig, zone: Optional[Zone] = None) -> DnsServer:
    """Build the zone from config paths and start serving."""
    if zone is None:
        if not config.zone_file:
            raise ValueError("config needs a zone file when no zone is given")
        with open(config.zone_file, encoding="utf-8") as fh:
            zone = Zone.from_master_file(fh.read())
    server = DnsServer(zone, config)
    server.start()
    return server
