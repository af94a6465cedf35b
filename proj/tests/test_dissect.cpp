#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"
#include "pcapanon/dissect.hpp"

using namespace pcapanon;
using namespace testutil;

namespace {

PacketView view_of(const PacketRecord& rec) { return dissect_packet(rec, kLinktypeEthernet); }

}  // namespace

TEST_CASE("classification of the common shapes") {
    CHECK(view_of(make_packet({})).transport == Transport::Tcp);

    PacketSpec udp;
    udp.proto = 17;
    CHECK(view_of(make_packet(udp)).transport == Transport::Udp);

    PacketSpec icmp;
    icmp.proto = 1;
    CHECK(view_of(make_packet(icmp)).transport == Transport::Icmp);

    PacketSpec gre;
    gre.proto = 47;
    PacketView v = view_of(make_packet(gre));
    CHECK(v.transport == Transport::Other);
    CHECK(v.has_ip);

    PacketView arp = view_of(make_arp_packet());
    CHECK(!arp.has_ip);
    CHECK(arp.transport == Transport::None);
    CHECK(arp.ethertype == 0x0806);
}

TEST_CASE("vlan tag shifts the ip header by four bytes") {
    PacketSpec s;
    s.vlan = true;
    PacketView v = view_of(make_packet(s));
    CHECK(v.has_ip);
    CHECK(v.ip_header_offset == 18);
    CHECK(v.transport == Transport::Tcp);
    CHECK(v.transport_offset == 38);
    CHECK(v.ethertype == kEthertypeIpv4);
}

TEST_CASE("ip options move the transport header") {
    PacketSpec s;
    s.ihl = 6;
    PacketView v = view_of(make_packet(s));
    CHECK(v.ihl == 6);
    CHECK(v.transport_offset == 14 + 24);
    auto loc = locate_field(v, make_packet(s), FieldId::SrcPort);
    REQUIRE(loc.has_value());
    CHECK(loc->byte_offset == 38);
}

TEST_CASE("non-first fragments expose no transport header") {
    PacketSpec s;
    s.frag_off = 100;
    s.flags3 = 1;  // MF
    PacketRecord rec = make_packet(s);
    PacketView v = view_of(rec);
    CHECK(v.has_ip);
    CHECK(v.transport == Transport::None);
    CHECK(!locate_field(v, rec, FieldId::SrcPort).has_value());
    // IP-level fields stay addressable
    CHECK(locate_field(v, rec, FieldId::Ttl).has_value());
}

TEST_CASE("truncation below the fixed transport header drops it") {
    PacketRecord tcp = make_packet({});
    // keep 14 + 20 + 19 bytes: one short of a full tcp header
    PacketRecord cut = truncate_packet(tcp, 53);
    PacketView v = view_of(cut);
    CHECK(v.has_ip);
    CHECK(v.transport == Transport::None);

    PacketRecord ok = truncate_packet(make_packet({}), 54);
    CHECK(view_of(ok).transport == Transport::Tcp);

    // ip header cut short
    PacketRecord ipcut = truncate_packet(make_packet({}), 30);
    CHECK(!view_of(ipcut).has_ip);

    // version/ihl nonsense
    PacketRecord bad = make_packet({});
    bad.data[14] = 0x60;  // version 6
    CHECK(!view_of(bad).has_ip);
    bad.data[14] = 0x44;  // ihl 4
    CHECK(!view_of(bad).has_ip);
}

TEST_CASE("non-ethernet linktypes are refused") {
    PacketRecord rec = make_packet({});
    CHECK_THROWS_AS(dissect_packet(rec, 101), UnsupportedLinktypeError);  // raw ip
    CHECK_THROWS_AS(dissect_packet(rec, 113), UnsupportedLinktypeError);  // linux sll
}

TEST_CASE("dissection is total over arbitrary bytes") {
    std::mt19937_64 rng(0xD15C);
    std::uniform_int_distribution<size_t> len(0, 120);
    std::uniform_int_distribution<int> byte(0, 255);
    for (int i = 0; i < 5000; ++i) {
        PacketRecord rec;
        rec.data.resize(len(rng));
        for (auto& b : rec.data) b = uint8_t(byte(rng));
        rec.incl_len = uint32_t(rec.data.size());
        rec.orig_len = rec.incl_len;
        PacketView v;
        CHECK_NOTHROW(v = dissect_packet(rec, kLinktypeEthernet));
        for (FieldId f : kAllFields) {
            if (f == FieldId::TimeStamp) continue;
            auto loc = locate_field(v, rec, f);
            if (loc) {
                CHECK(loc->byte_offset + (loc->bit_width + 7) / 8 <= rec.data.size());
                CHECK_NOTHROW(read_field(rec, *loc));
            }
        }
    }
}

TEST_CASE("field locations on a plain tcp packet") {
    PacketSpec s;
    s.tos = 0x5C;
    s.ttl = 61;
    s.seq = 0xDEADBEEF;
    s.window = 4321;
    s.tcp_flags = 0x12;  // SYN|ACK
    s.src_port = 65535;
    s.dst_port = 443;
    PacketRecord rec = make_packet(s);
    PacketView v = view_of(rec);

    struct Expect {
        FieldId f;
        size_t off;
        unsigned width;
        uint64_t value;
    };
    const Expect table[] = {
        {FieldId::TransportProtocol, 23, 8, 6},
        {FieldId::TotalLength, 16, 16, 50},
        {FieldId::Ttl, 22, 8, 61},
        {FieldId::Tos, 15, 8, 0x5C},
        {FieldId::FragFlags, 20, 3, 0},
        {FieldId::SrcPort, 34, 16, 65535},
        {FieldId::DstPort, 36, 16, 443},
        {FieldId::SeqNumber, 38, 32, 0xDEADBEEF},
        {FieldId::WindowSize, 48, 16, 4321},
        {FieldId::TcpFlags, 47, 8, 0x12},
    };
    for (const auto& e : table) {
        auto loc = locate_field(v, rec, e.f);
        REQUIRE(loc.has_value());
        CHECK(loc->byte_offset == e.off);
        CHECK(loc->bit_width == e.width);
        CHECK(read_field(rec, *loc) == e.value);
    }
    CHECK(rec.data[34] == 0xFF);
    CHECK(rec.data[35] == 0xFF);

    CHECK_THROWS_AS(locate_field(v, rec, FieldId::TimeStamp), std::invalid_argument);
}

TEST_CASE("udp exposes ports only; icmp exposes no transport fields") {
    PacketSpec udp;
    udp.proto = 17;
    PacketRecord rec = make_packet(udp);
    PacketView v = view_of(rec);
    CHECK(locate_field(v, rec, FieldId::SrcPort).has_value());
    CHECK(locate_field(v, rec, FieldId::DstPort).has_value());
    CHECK(!locate_field(v, rec, FieldId::SeqNumber).has_value());
    CHECK(!locate_field(v, rec, FieldId::WindowSize).has_value());
    CHECK(!locate_field(v, rec, FieldId::TcpFlags).has_value());

    PacketSpec icmp;
    icmp.proto = 1;
    PacketRecord ir = make_packet(icmp);
    PacketView iv = view_of(ir);
    CHECK(!locate_field(iv, ir, FieldId::SrcPort).has_value());
    CHECK(locate_field(iv, ir, FieldId::Ttl).has_value());
}

TEST_CASE("surgical writes: only the addressed bytes change") {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<uint64_t> any(0, ~0ULL);
    for (int iter = 0; iter < 300; ++iter) {
        PacketRecord rec = make_random_packet(rng);
        PacketView v = view_of(rec);
        for (FieldId f : kAllFields) {
            if (f == FieldId::TimeStamp) continue;
            auto loc = locate_field(v, rec, f);
            if (!loc) continue;
            uint64_t value = any(rng) & width_mask(loc->bit_width);
            PacketRecord before = rec;
            write_field(rec, *loc, value);
            CHECK(read_field(rec, *loc) == value);
            size_t span = (loc->bit_width + 7) / 8;
            for (size_t i = 0; i < rec.data.size(); ++i) {
                if (i >= loc->byte_offset && i < loc->byte_offset + span) continue;
                if (rec.data[i] != before.data[i]) {
                    INFO("field " << field_name(f) << " touched byte " << i);
                    CHECK(rec.data[i] == before.data[i]);
                }
            }
        }
    }
}

TEST_CASE("frag flags writes keep the 13-bit fragment offset intact") {
    PacketSpec s;
    s.flags3 = 0b010;  // DF
    s.frag_off = 0x1ABC;
    s.proto = 47;  // avoid transport parsing of a fragmented claim
    PacketRecord rec = make_packet(s);
    PacketView v = view_of(rec);
    auto loc = locate_field(v, rec, FieldId::FragFlags);
    REQUIRE(loc.has_value());
    CHECK(loc->byte_offset == 20);
    CHECK(read_field(rec, *loc) == 0b010);

    for (uint64_t bits = 0; bits < 8; ++bits) {
        write_field(rec, *loc, bits);
        CHECK(read_field(rec, *loc) == bits);
        uint16_t unit = load_be16(rec.data.data() + 20);
        CHECK((unit & 0x1FFF) == 0x1ABC);
    }
    CHECK_THROWS_AS(write_field(rec, *loc, 8), ValueOverflowError);
}

TEST_CASE("write_field rejects values wider than the field") {
    PacketRecord rec = make_packet({});
    PacketView v = view_of(rec);
    auto ttl = locate_field(v, rec, FieldId::Ttl);
    REQUIRE(ttl.has_value());
    CHECK_THROWS_AS(write_field(rec, *ttl, 256), ValueOverflowError);
    auto port = locate_field(v, rec, FieldId::SrcPort);
    CHECK_THROWS_AS(write_field(rec, *port, 65536), ValueOverflowError);
    CHECK_NOTHROW(write_field(rec, *port, 65535));
}

TEST_CASE("field name and width tables are consistent") {
    CHECK(field_bit_width(FieldId::FragFlags) == 3);
    CHECK(field_bit_width(FieldId::SeqNumber) == 32);
    CHECK(field_bit_width(FieldId::TimeStamp) == 64);
    CHECK(std::string(field_name(FieldId::TransportProtocol)) == "protocol");
    CHECK(std::string(field_name(FieldId::WindowSize)) == "window");
    CHECK(kAllFields.size() == 11);
}
