#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "pcapanon/common.hpp"
#include "pcapanon/pcap.hpp"

namespace pcapanon {

// The anonymizable header fields. TimeStamp lives in the PCAP record header,
// everything else in packet bytes.
enum class FieldId {
    TransportProtocol,
    TotalLength,
    Ttl,
    Tos,
    FragFlags,
    SrcPort,
    DstPort,
    SeqNumber,
    WindowSize,
    TcpFlags,
    TimeStamp,
};

inline constexpr std::array<FieldId, 11> kAllFields = {
    FieldId::TransportProtocol, FieldId::TotalLength, FieldId::Ttl,       FieldId::Tos,
    FieldId::FragFlags,         FieldId::SrcPort,     FieldId::DstPort,   FieldId::SeqNumber,
    FieldId::WindowSize,        FieldId::TcpFlags,    FieldId::TimeStamp,
};

inline unsigned field_bit_width(FieldId f) {
    switch (f) {
        case FieldId::TransportProtocol:
        case FieldId::Ttl:
        case FieldId::Tos:
        case FieldId::TcpFlags: return 8;
        case FieldId::FragFlags: return 3;
        case FieldId::TotalLength:
        case FieldId::SrcPort:
        case FieldId::DstPort:
        case FieldId::WindowSize: return 16;
        case FieldId::SeqNumber: return 32;
        case FieldId::TimeStamp: return 64;  // sec:usec pair
    }
    return 0;
}

inline const char* field_name(FieldId f) {
    switch (f) {
        case FieldId::TransportProtocol: return "protocol";
        case FieldId::TotalLength: return "length";
        case FieldId::Ttl: return "ttl";
        case FieldId::Tos: return "tos";
        case FieldId::FragFlags: return "frag";
        case FieldId::SrcPort: return "src_port";
        case FieldId::DstPort: return "dst_port";
        case FieldId::SeqNumber: return "seq";
        case FieldId::WindowSize: return "window";
        case FieldId::TcpFlags: return "tcpflags";
        case FieldId::TimeStamp: return "timestamp";
    }
    return "?";
}

enum class Transport { Tcp, Udp, Icmp, Other, None };

// Classification of one packet. transport_offset is meaningful only for
// Tcp/Udp/Icmp, and only when the full fixed transport header was captured.
struct PacketView {
    uint16_t ethertype = 0;
    bool has_ip = false;  // IPv4 fixed header present and sane
    size_t ip_header_offset = 0;
    unsigned ihl = 0;  // 32-bit words
    Transport transport = Transport::None;
    size_t transport_offset = 0;
};

struct FieldLocation {
    FieldId field;
    size_t byte_offset;
    unsigned bit_width;  // 3, 8, 16 or 32
};

struct UnsupportedLinktypeError : std::runtime_error {
    explicit UnsupportedLinktypeError(uint32_t linktype)
        : std::runtime_error("unsupported linktype " + std::to_string(linktype) +
                             " (only Ethernet is handled)") {}
};

inline constexpr uint8_t kProtoIcmp = 1;
inline constexpr uint8_t kProtoTcp = 6;
inline constexpr uint8_t kProtoUdp = 17;
inline constexpr uint16_t kEthertypeIpv4 = 0x0800;
inline constexpr uint16_t kEthertypeVlan = 0x8100;

// Total classification: any byte sequence yields a view, malformed layers
// simply stay unresolved. Throws only for non-Ethernet linktypes.
inline PacketView dissect_packet(const PacketRecord& rec, uint32_t linktype) {
    if (linktype != kLinktypeEthernet) throw UnsupportedLinktypeError(linktype);
    PacketView v;
    const auto& d = rec.data;
    const size_t n = d.size();
    if (n < 14) return v;
    uint16_t ethertype = load_be16(d.data() + 12);
    size_t ip_off = 14;
    if (ethertype == kEthertypeVlan) {  // one VLAN tag skipped transparently
        if (n < 18) return v;
        ethertype = load_be16(d.data() + 16);
        ip_off = 18;
    }
    v.ethertype = ethertype;
    if (ethertype != kEthertypeIpv4) return v;
    if (ip_off + 20 > n) return v;
    uint8_t ver_ihl = d[ip_off];
    if ((ver_ihl >> 4) != 4) return v;
    unsigned ihl = ver_ihl & 0x0F;
    if (ihl < 5) return v;
    v.has_ip = true;
    v.ip_header_offset = ip_off;
    v.ihl = ihl;

    uint16_t flags_frag = load_be16(d.data() + ip_off + 6);
    if ((flags_frag & 0x1FFF) != 0) return v;  // non-first fragment: no transport header here
    uint8_t proto = d[ip_off + 9];
    size_t t_off = ip_off + size_t(ihl) * 4;
    auto resolve = [&](Transport t, size_t need) {
        if (t_off + need <= n) {
            v.transport = t;
            v.transport_offset = t_off;
        }
    };
    switch (proto) {
        case kProtoTcp: resolve(Transport::Tcp, 20); break;
        case kProtoUdp: resolve(Transport::Udp, 8); break;
        case kProtoIcmp: resolve(Transport::Icmp, 4); break;
        default: v.transport = Transport::Other; break;
    }
    return v;
}

// Absent (nullopt) when the field does not exist in this packet.
// TimeStamp is addressed on the record header directly, never located here.
inline std::optional<FieldLocation> locate_field(const PacketView& view, const PacketRecord& rec,
                                                 FieldId field) {
    if (field == FieldId::TimeStamp)
        throw std::invalid_argument("TimeStamp has no byte location inside the packet");
    auto at = [&](size_t off, unsigned width) -> std::optional<FieldLocation> {
        size_t span = (width + 7) / 8;
        if (off + span > rec.data.size()) return std::nullopt;
        return FieldLocation{field, off, width};
    };
    const size_t ip = view.ip_header_offset;
    switch (field) {
        case FieldId::TransportProtocol:
            return view.has_ip ? at(ip + 9, 8) : std::nullopt;
        case FieldId::TotalLength:
            return view.has_ip ? at(ip + 2, 16) : std::nullopt;
        case FieldId::Ttl:
            return view.has_ip ? at(ip + 8, 8) : std::nullopt;
        case FieldId::Tos:
            return view.has_ip ? at(ip + 1, 8) : std::nullopt;
        case FieldId::FragFlags:
            return view.has_ip ? at(ip + 6, 3) : std::nullopt;
        case FieldId::SrcPort:
            if (view.transport != Transport::Tcp && view.transport != Transport::Udp)
                return std::nullopt;
            return at(view.transport_offset, 16);
        case FieldId::DstPort:
            if (view.transport != Transport::Tcp && view.transport != Transport::Udp)
                return std::nullopt;
            return at(view.transport_offset + 2, 16);
        case FieldId::SeqNumber:
            if (view.transport != Transport::Tcp) return std::nullopt;
            return at(view.transport_offset + 4, 32);
        case FieldId::WindowSize:
            if (view.transport != Transport::Tcp) return std::nullopt;
            return at(view.transport_offset + 14, 16);
        case FieldId::TcpFlags:
            if (view.transport != Transport::Tcp) return std::nullopt;
            return at(view.transport_offset + 13, 8);
        case FieldId::TimeStamp: break;
    }
    return std::nullopt;
}

inline uint64_t read_field(const PacketRecord& rec, const FieldLocation& loc) {
    const uint8_t* p = rec.data.data() + loc.byte_offset;
    switch (loc.bit_width) {
        case 3: return *p >> 5;  // top 3 bits of the flags/fragment-offset unit
        case 8: return *p;
        case 16: return load_be16(p);
        case 32: return load_be32(p);
    }
    throw std::invalid_argument("bad field width");
}

// Touches only the field's bytes; for FragFlags the 13-bit fragment offset
// sharing the 16-bit unit is preserved.
inline void write_field(PacketRecord& rec, const FieldLocation& loc, uint64_t value) {
    if (value > width_mask(loc.bit_width)) throw ValueOverflowError(value, loc.bit_width);
    uint8_t* p = rec.data.data() + loc.byte_offset;
    switch (loc.bit_width) {
        case 3: *p = uint8_t((*p & 0x1F) | (value << 5)); return;
        case 8: *p = uint8_t(value); return;
        case 16: store_be16(p, uint16_t(value)); return;
        case 32: store_be32(p, uint32_t(value)); return;
    }
    throw std::invalid_argument("bad field width");
}

}  // namespace pcapanon
