#pragma once

// Shared fixture builders and independent oracles. The checksum oracle here
// is deliberately written from scratch (straight RFC-1071 word loop) so the
// library's accumulator is checked against something it shares no code with.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pcapanon/pcap.hpp"

namespace testutil {

using namespace pcapanon;

// folded 16-bit ones'-complement sum (not complemented); a header with a
// correct checksum folds to 0xFFFF
inline uint16_t oracle_fold(const uint8_t* p, size_t len) {
    uint32_t sum = 0;
    size_t i = 0;
    for (; i + 1 < len; i += 2) sum += (uint32_t(p[i]) << 8) | p[i + 1];
    if (i < len) sum += uint32_t(p[i]) << 8;
    while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
    return uint16_t(sum);
}

inline bool oracle_header_valid(const uint8_t* hdr, size_t len) {
    return oracle_fold(hdr, len) == 0xFFFF;
}

inline uint16_t oracle_checksum(const std::vector<uint8_t>& bytes_with_zeroed_field) {
    return uint16_t(~oracle_fold(bytes_with_zeroed_field.data(), bytes_with_zeroed_field.size()) &
                    0xFFFF);
}

struct PacketSpec {
    uint8_t proto = 6;  // 6 tcp, 17 udp, 1 icmp, anything else "other"
    uint8_t ttl = 64;
    uint8_t tos = 0;
    uint8_t flags3 = 0;     // reserved/DF/MF bits, value 0..7
    uint16_t frag_off = 0;  // 13-bit units
    uint16_t src_port = 1234;
    uint16_t dst_port = 80;
    uint32_t seq = 1000;
    uint16_t window = 8192;
    uint8_t tcp_flags = 0x02;  // SYN
    size_t payload = 10;
    unsigned ihl = 5;
    bool vlan = false;
    uint32_t ts_sec = 1000;
    uint32_t ts_usec = 500;
    std::optional<uint16_t> total_len_override;
    std::optional<uint16_t> udp_len_override;
    bool correct_checksums = true;
};

inline void put16(std::vector<uint8_t>& v, size_t off, uint16_t x) {
    v[off] = uint8_t(x >> 8);
    v[off + 1] = uint8_t(x & 0xFF);
}

inline void put32(std::vector<uint8_t>& v, size_t off, uint32_t x) {
    v[off] = uint8_t(x >> 24);
    v[off + 1] = uint8_t(x >> 16);
    v[off + 2] = uint8_t(x >> 8);
    v[off + 3] = uint8_t(x & 0xFF);
}

inline PacketRecord make_packet(const PacketSpec& s) {
    size_t ip_off = s.vlan ? 18 : 14;
    size_t hdr_len = size_t(s.ihl) * 4;
    size_t t_len = s.proto == 6 ? 20 : (s.proto == 17 ? 8 : (s.proto == 1 ? 8 : 0));
    size_t t_off = ip_off + hdr_len;
    std::vector<uint8_t> d(t_off + t_len + s.payload, 0);

    for (int i = 0; i < 6; ++i) d[i] = uint8_t(0x02 + i);       // dst mac
    for (int i = 0; i < 6; ++i) d[6 + i] = uint8_t(0x12 + i);   // src mac
    if (s.vlan) {
        put16(d, 12, 0x8100);
        put16(d, 14, 0x0001);  // tci
        put16(d, 16, 0x0800);
    } else {
        put16(d, 12, 0x0800);
    }

    uint16_t total = s.total_len_override
                         ? *s.total_len_override
                         : uint16_t(hdr_len + t_len + s.payload);
    d[ip_off] = uint8_t(0x40 | s.ihl);
    d[ip_off + 1] = s.tos;
    put16(d, ip_off + 2, total);
    put16(d, ip_off + 4, 0x1234);  // identification
    put16(d, ip_off + 6, uint16_t((uint16_t(s.flags3) << 13) | (s.frag_off & 0x1FFF)));
    d[ip_off + 8] = s.ttl;
    d[ip_off + 9] = s.proto;
    put32(d, ip_off + 12, 0x0A000001);  // 10.0.0.1
    put32(d, ip_off + 16, 0x0A000002);  // 10.0.0.2

    for (size_t i = 0; i < s.payload; ++i) d[t_off + t_len + i] = uint8_t(0x30 + i % 64);

    size_t cksum_off = 0;
    if (s.proto == 6) {
        put16(d, t_off, s.src_port);
        put16(d, t_off + 2, s.dst_port);
        put32(d, t_off + 4, s.seq);
        put32(d, t_off + 8, 0);       // ack
        d[t_off + 12] = 5 << 4;       // data offset
        d[t_off + 13] = s.tcp_flags;
        put16(d, t_off + 14, s.window);
        cksum_off = t_off + 16;
    } else if (s.proto == 17) {
        put16(d, t_off, s.src_port);
        put16(d, t_off + 2, s.dst_port);
        put16(d, t_off + 4, s.udp_len_override ? *s.udp_len_override : uint16_t(8 + s.payload));
        cksum_off = t_off + 6;
    } else if (s.proto == 1) {
        d[t_off] = 8;  // echo request
        cksum_off = t_off + 2;
    }

    if (s.correct_checksums) {
        std::vector<uint8_t> hdr(d.begin() + ip_off, d.begin() + ip_off + hdr_len);
        hdr[10] = hdr[11] = 0;
        put16(d, ip_off + 10, oracle_checksum(hdr));

        if (s.proto == 6 || s.proto == 17) {
            uint16_t seg_len = s.proto == 6 ? uint16_t(total - hdr_len)
                                            : uint16_t(s.udp_len_override
                                                           ? *s.udp_len_override
                                                           : uint16_t(8 + s.payload));
            std::vector<uint8_t> blob;
            blob.insert(blob.end(), d.begin() + ip_off + 12, d.begin() + ip_off + 20);
            blob.push_back(0);
            blob.push_back(s.proto);
            blob.push_back(uint8_t(seg_len >> 8));
            blob.push_back(uint8_t(seg_len & 0xFF));
            size_t avail = d.size() - t_off;
            size_t n = std::min<size_t>(seg_len, avail);
            blob.insert(blob.end(), d.begin() + t_off, d.begin() + t_off + n);
            size_t rel = cksum_off - t_off + 12;  // pseudo header is 12 bytes
            if (rel + 1 < blob.size()) blob[rel] = blob[rel + 1] = 0;
            put16(d, cksum_off, oracle_checksum(blob));
        } else if (s.proto == 1) {
            std::vector<uint8_t> blob(d.begin() + t_off, d.end());
            blob[2] = blob[3] = 0;
            put16(d, cksum_off, oracle_checksum(blob));
        }
    }

    PacketRecord rec;
    rec.ts_sec = s.ts_sec;
    rec.ts_usec = s.ts_usec;
    rec.data = std::move(d);
    rec.incl_len = uint32_t(rec.data.size());
    rec.orig_len = rec.incl_len;
    return rec;
}

inline PacketRecord make_arp_packet(uint32_t ts_sec = 1000, uint32_t ts_usec = 0) {
    std::vector<uint8_t> d(42, 0);
    for (int i = 0; i < 12; ++i) d[i] = uint8_t(i + 1);
    put16(d, 12, 0x0806);
    put16(d, 14, 1);       // hw type
    put16(d, 16, 0x0800);  // proto type
    d[18] = 6;
    d[19] = 4;
    put16(d, 20, 1);  // request
    PacketRecord rec;
    rec.ts_sec = ts_sec;
    rec.ts_usec = ts_usec;
    rec.data = std::move(d);
    rec.incl_len = uint32_t(rec.data.size());
    rec.orig_len = rec.incl_len;
    return rec;
}

inline PacketRecord truncate_packet(PacketRecord rec, size_t keep) {
    if (keep < rec.data.size()) {
        rec.data.resize(keep);
        rec.incl_len = uint32_t(keep);
    }
    return rec;
}

inline TraceFile make_trace(std::vector<PacketRecord> records,
                            ByteOrder order = ByteOrder::little, uint32_t snaplen = 65535) {
    TraceFile t;
    t.header.order = order;
    t.header.snaplen = snaplen;
    t.header.linktype = kLinktypeEthernet;
    t.records = std::move(records);
    return t;
}

inline std::string trace_to_bytes(const TraceFile& t) {
    std::ostringstream out;
    write_trace(t, out);
    return out.str();
}

inline TraceFile bytes_to_trace(const std::string& bytes) {
    std::istringstream in(bytes);
    return read_trace(in);
}

// randomized, not-necessarily-meaningful records: enough for round-trip
// properties where payload semantics are irrelevant
inline TraceFile make_random_trace(std::mt19937_64& rng, size_t max_records = 8) {
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<size_t> nrec(0, max_records);
    std::uniform_int_distribution<uint32_t> ts(0, 2000000000);
    std::uniform_int_distribution<uint32_t> usec(0, 999999);
    std::uniform_int_distribution<size_t> len(0, 200);
    std::uniform_int_distribution<int> byte(0, 255);
    TraceFile t = make_trace({}, coin(rng) ? ByteOrder::little : ByteOrder::big);
    size_t n = nrec(rng);
    for (size_t i = 0; i < n; ++i) {
        PacketRecord rec;
        rec.ts_sec = ts(rng);
        rec.ts_usec = usec(rng);
        size_t sz = len(rng);
        rec.data.resize(sz);
        for (auto& b : rec.data) b = uint8_t(byte(rng));
        rec.incl_len = uint32_t(sz);
        rec.orig_len = rec.incl_len + (coin(rng) ? 0 : 100);
        t.records.push_back(std::move(rec));
    }
    return t;
}

// randomized structured packet for dissection/rewrite fuzzing
inline PacketRecord make_random_packet(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> byte(0, 255);
    std::uniform_int_distribution<int> pick(0, 9);
    std::uniform_int_distribution<int> coin(0, 1);
    PacketSpec s;
    switch (pick(rng)) {
        case 0: s.proto = 6; break;
        case 1: s.proto = 17; break;
        case 2: s.proto = 1; break;
        case 3: s.proto = 47; break;  // gre: "other"
        default: s.proto = uint8_t(pick(rng) < 6 ? 6 : byte(rng)); break;
    }
    s.ttl = uint8_t(byte(rng));
    s.tos = uint8_t(byte(rng));
    s.flags3 = uint8_t(byte(rng) & 0x07);
    s.frag_off = uint16_t(coin(rng) ? 0 : (byte(rng) & 0x1FFF));
    s.src_port = uint16_t(byte(rng) * 257 % 65536);
    s.dst_port = uint16_t(coin(rng) ? 80 : byte(rng));
    s.seq = uint32_t(byte(rng)) * 16909321u;
    s.window = uint16_t(byte(rng) * 300 % 65536);
    s.tcp_flags = uint8_t(byte(rng));
    s.payload = size_t(byte(rng) % 40);
    s.ihl = coin(rng) ? 5 : 6;
    s.vlan = pick(rng) == 0;
    s.ts_sec = uint32_t(byte(rng)) * 1000;
    s.ts_usec = uint32_t(byte(rng)) * 1000 % 1000000;
    PacketRecord rec = pick(rng) == 1 ? make_arp_packet(s.ts_sec, s.ts_usec) : make_packet(s);
    if (pick(rng) == 2) {  // sometimes snaplen-style truncation
        std::uniform_int_distribution<size_t> cut(10, rec.data.size());
        rec = truncate_packet(std::move(rec), cut(rng));
    }
    return rec;
}

inline std::string test_data_dir() {
    if (const char* env = std::getenv("TEST_DATA_DIR")) return env;
    return "tests/data";
}

struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<int> seq{0};
        path = std::filesystem::temp_directory_path() /
               ("pcapanon_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(seq.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace testutil
