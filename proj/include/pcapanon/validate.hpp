#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcapanon/dissect.hpp"
#include "pcapanon/pcap.hpp"

namespace pcapanon {

enum class FindingKind {
    UsecOverflow,          // ts_usec >= 1,000,000
    CaplenExceedsSnaplen,  // incl_len > header snaplen
    UdpLengthMismatch,     // UDP length field != IP total length − IHL·4
};

inline const char* finding_kind_name(FindingKind k) {
    switch (k) {
        case FindingKind::UsecOverflow: return "UsecOverflow";
        case FindingKind::CaplenExceedsSnaplen: return "CaplenExceedsSnaplen";
        case FindingKind::UdpLengthMismatch: return "UdpLengthMismatch";
    }
    return "?";
}

struct Finding {
    FindingKind kind;
    size_t record_index;
    std::string detail;
};

// Diagnostics, never failures: a malformed trace is reported, not rejected.
inline std::vector<Finding> validate_trace(const TraceFile& trace) {
    std::vector<Finding> out;
    const bool ethernet = trace.header.linktype == kLinktypeEthernet;
    for (size_t i = 0; i < trace.records.size(); ++i) {
        const auto& rec = trace.records[i];
        if (rec.ts_usec >= 1000000)
            out.push_back({FindingKind::UsecOverflow, i,
                           "ts_usec " + std::to_string(rec.ts_usec)});
        if (rec.incl_len > trace.header.snaplen)
            out.push_back({FindingKind::CaplenExceedsSnaplen, i,
                           "incl_len " + std::to_string(rec.incl_len) + " > snaplen " +
                               std::to_string(trace.header.snaplen)});
        if (!ethernet) continue;
        PacketView view = dissect_packet(rec, trace.header.linktype);
        if (view.transport != Transport::Udp) continue;
        uint16_t total = load_be16(rec.data.data() + view.ip_header_offset + 2);
        uint16_t hdr = uint16_t(view.ihl) * 4;
        if (total < hdr) continue;  // length pathology, not a UDP-field question
        uint16_t implied = uint16_t(total - hdr);
        uint16_t claimed = load_be16(rec.data.data() + view.transport_offset + 4);
        if (claimed != implied)
            out.push_back({FindingKind::UdpLengthMismatch, i,
                           "UDP length field " + std::to_string(claimed) + ", IP implies " +
                               std::to_string(implied)});
    }
    return out;
}

}  // namespace pcapanon
