#pragma once

#include <cstdint>
#include <optional>

#include "pcapanon/dissect.hpp"
#include "pcapanon/pcap.hpp"

namespace pcapanon {

// One's-complement 16-bit sum, fed byte-wise so pseudo header and segment can
// be accumulated in pieces. Bytes alternate high/low within each word.
class ChecksumAccumulator {
  public:
    void add_byte(uint8_t b) {
        sum_ += high_ ? uint32_t(b) << 8 : uint32_t(b);
        high_ = !high_;
    }

    // Adds len bytes; skip_off (relative to p) marks a 16-bit field treated
    // as zero — the checksum field itself.
    void add(const uint8_t* p, size_t len, size_t skip_off = kNoSkip) {
        for (size_t i = 0; i < len; ++i) {
            bool skipped = skip_off != kNoSkip && (i == skip_off || i == skip_off + 1);
            add_byte(skipped ? 0 : p[i]);
        }
    }

    void add_be16(uint16_t v) {
        add_byte(uint8_t(v >> 8));
        add_byte(uint8_t(v & 0xFF));
    }

    uint16_t finish() const {
        uint32_t s = sum_;
        while (s >> 16) s = (s & 0xFFFF) + (s >> 16);
        return uint16_t(~s & 0xFFFF);
    }

    static constexpr size_t kNoSkip = ~size_t(0);

  private:
    uint32_t sum_ = 0;
    bool high_ = true;
};

// Correct IPv4 header checksum for the packet as it currently stands.
// Absent when the header extends past the captured bytes.
inline std::optional<uint16_t> ipv4_header_checksum(const PacketRecord& rec,
                                                    const PacketView& view) {
    if (!view.has_ip) return std::nullopt;
    size_t hdr_len = size_t(view.ihl) * 4;
    if (view.ip_header_offset + hdr_len > rec.data.size()) return std::nullopt;
    ChecksumAccumulator acc;
    acc.add(rec.data.data() + view.ip_header_offset, hdr_len, /*skip_off=*/10);
    return acc.finish();
}

// Correct TCP/UDP checksum including the IPv4 pseudo header, using the
// packet's current field values. Segment bytes are taken up to the claimed
// length so trailing link-layer padding never leaks into the sum; a capture
// shorter than the claim is summed as far as it goes. Absent for other
// transports or when the claimed length is inconsistent (shorter than the
// IP header for TCP).
inline std::optional<uint16_t> transport_checksum(const PacketRecord& rec,
                                                  const PacketView& view) {
    if (view.transport != Transport::Tcp && view.transport != Transport::Udp)
        return std::nullopt;
    const auto& d = rec.data;
    const size_t ip = view.ip_header_offset;
    const size_t t = view.transport_offset;

    uint32_t seg_len;  // value carried in the pseudo header
    size_t skip_off;
    if (view.transport == Transport::Tcp) {
        uint16_t total = load_be16(d.data() + ip + 2);
        uint16_t hdr = uint16_t(view.ihl) * 4;
        if (total < hdr) return std::nullopt;  // "dgm len < hdr len" pathology
        seg_len = uint32_t(total - hdr);
        skip_off = 16;
    } else {
        seg_len = load_be16(d.data() + t + 4);  // UDP length field, self-describing
        skip_off = 6;
    }

    ChecksumAccumulator acc;
    acc.add(d.data() + ip + 12, 8);               // src + dst address
    acc.add_byte(0);
    acc.add_byte(d[ip + 9]);                      // protocol as it stands now
    acc.add_be16(uint16_t(seg_len & 0xFFFF));
    size_t avail = d.size() - t;
    size_t n = std::min<size_t>(seg_len, avail);
    acc.add(d.data() + t, n, skip_off);
    return acc.finish();
}

}  // namespace pcapanon
