import pytest

from semdns.records import (
    A, CNAME, NS, PTR, RecordError, ResourceRecord, SOA, SRV, TXT,
    export_master_file, import_master_file, is_subdomain, make_txt,
    name_text, parse_name,
)


class TestNames:
    def test_parse_and_render(self):
        assert parse_name("Temperature.DR56._iot._udp.") == (
            "temperature", "dr56", "_iot", "_udp")
        assert parse_name(".") == ()
        assert name_text(()) == "."
        assert name_text(("a", "b")) == "a.b."

    def test_rejects_bad_labels(self):
        with pytest.raises(RecordError):
            parse_name("a..b")
        with pytest.raises(RecordError):
            parse_name("x" * 64 + ".com")

    def test_is_subdomain(self):
        assert is_subdomain(parse_name("a.b.c"), parse_name("b.c"))
        assert is_subdomain(parse_name("b.c"), parse_name("b.c"))
        assert not is_subdomain(parse_name("b.c"), parse_name("a.b.c"))
        assert is_subdomain(parse_name("anything"), ())


class TestRdata:
    def test_a_validation(self):
        with pytest.raises(RecordError):
            A("256.1.1.1")
        assert A("160.78.28.203").address == "160.78.28.203"

    def test_txt_string_limit(self):
        with pytest.raises(RecordError):
            TXT(("x" * 256,))
        txt = make_txt("x" * 600)
        assert [len(s) for s in txt.strings] == [255, 255, 90]
        assert txt.text == "x" * 600


class TestMasterFile:
    def fixture_records(self):
        return [
            ResourceRecord((), 100, SOA(("ns",), ("hostmaster",), 7, 7200, 900, 86400, 100)),
            ResourceRecord(parse_name("temperature.dr56._iot._udp"), 100,
                           SRV(10, 20, 8080, parse_name("dr56.unipr.it"))),
            ResourceRecord(parse_name("temperature.dr56._iot._udp"), 100,
                           TXT(("temperature=14",))),
            ResourceRecord(parse_name("dr56.unipr.it"), 100, A("160.78.28.203")),
            ResourceRecord(parse_name("dr56._iot._udp"), 100,
                           PTR(parse_name("temperature.dr56._iot._udp"))),
            ResourceRecord(parse_name("a.12._iot._udp"), 100, NS(parse_name("ns.a.example"))),
            ResourceRecord(parse_name("a0.12._iot._udp"), 100,
                           CNAME(parse_name("0.a.12._iot._udp"))),
        ]

    def test_export_contains_transcript_lines(self):
        text = export_master_file((), self.fixture_records())
        assert "temperature.dr56._iot._udp." in text
        assert "SRV\t10 20 8080 dr56.unipr.it." in text
        assert "dr56.unipr.it.\t100\tIN\tA\t160.78.28.203" in text

    def test_round_trip_equal_record_set(self):
        records = self.fixture_records()
        origin, back = import_master_file(export_master_file((), records))
        assert origin == ()
        assert sorted(back, key=str) == sorted(records, key=str)

    def test_export_import_export_is_stable(self):
        text = export_master_file((), self.fixture_records())
        origin, records = import_master_file(text)
        assert export_master_file(origin, records) == text

    def test_txt_quoting_round_trip(self):
        record = ResourceRecord(("d",), 60, TXT(('say "hi"\\now', "b=c")))
        _, back = import_master_file(export_master_file((), [record]))
        assert back == [record]

    def test_rejects_garbage(self):
        with pytest.raises(RecordError):
            import_master_file("not a record line at all\n")

    def test_rejects_unknown_type(self):
        with pytest.raises(RecordError):
            import_master_file("x. 60 IN MX 10 mail.example.\n")
