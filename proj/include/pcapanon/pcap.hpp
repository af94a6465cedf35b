#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcapanon/common.hpp"

namespace pcapanon {

inline constexpr uint32_t kPcapMagic = 0xa1b2c3d4;  // classic microsecond capture
inline constexpr uint32_t kLinktypeEthernet = 1;

enum class ByteOrder { little, big };

// 24-byte classic PCAP global header. Only the microsecond magic is accepted;
// nanosecond-magic and pcapng inputs are rejected. `order` remembers how the
// source file was encoded so an unmodified trace writes back byte-identical.
struct GlobalHeader {
    ByteOrder order = ByteOrder::little;
    uint16_t version_major = 2;
    uint16_t version_minor = 4;
    int32_t thiszone = 0;
    uint32_t sigfigs = 0;
    uint32_t snaplen = 65535;
    uint32_t linktype = kLinktypeEthernet;
};

struct PacketRecord {
    uint32_t ts_sec = 0;
    uint32_t ts_usec = 0;
    uint32_t incl_len = 0;  // must equal data.size() when written
    uint32_t orig_len = 0;
    std::vector<uint8_t> data;
};

struct TraceFile {
    GlobalHeader header;
    std::vector<PacketRecord> records;
};

struct BadMagicError : std::runtime_error {
    explicit BadMagicError(uint32_t magic)
        : std::runtime_error("not a classic microsecond pcap stream (magic 0x" + hex32(magic) + ")"),
          magic(magic) {}
    uint32_t magic;

private:
    static std::string hex32(uint32_t v) {
        uint8_t b[4];
        store_be32(b, v);
        return to_hex(b);
    }
};

struct TruncatedRecordError : std::runtime_error {
    TruncatedRecordError(size_t last_complete, const std::string& what)
        : std::runtime_error(what + " (last complete record index: " +
                             (last_complete == 0 ? std::string("none")
                                                 : std::to_string(last_complete - 1)) +
                             ")"),
          complete_records(last_complete) {}
    size_t complete_records;  // records fully read before the cut
};

struct RecordInvariantError : std::runtime_error {
    explicit RecordInvariantError(size_t index)
        : std::runtime_error("record " + std::to_string(index) +
                             ": incl_len does not match data size") {}
};

// Streaming reader: one record in memory at a time.
class PcapReader {
public:
    explicit PcapReader(std::istream& in) : in_(in) {
        uint8_t raw[24];
        in_.read(reinterpret_cast<char*>(raw), 4);
        if (in_.gcount() != 4) throw BadMagicError(0);
        static constexpr uint8_t kBig[4] = {0xa1, 0xb2, 0xc3, 0xd4};
        static constexpr uint8_t kLittle[4] = {0xd4, 0xc3, 0xb2, 0xa1};
        if (std::equal(raw, raw + 4, kBig)) {
            hdr_.order = ByteOrder::big;
        } else if (std::equal(raw, raw + 4, kLittle)) {
            hdr_.order = ByteOrder::little;
        } else {
            throw BadMagicError(load_be32(raw));
        }
        in_.read(reinterpret_cast<char*>(raw + 4), 20);
        if (in_.gcount() != 20) throw TruncatedRecordError(0, "truncated global header");
        hdr_.version_major = rd16(raw + 4);
        hdr_.version_minor = rd16(raw + 6);
        hdr_.thiszone = static_cast<int32_t>(rd32(raw + 8));
        hdr_.sigfigs = rd32(raw + 12);
        hdr_.snaplen = rd32(raw + 16);
        hdr_.linktype = rd32(raw + 20);
    }

    const GlobalHeader& header() const { return hdr_; }
    size_t records_read() const { return count_; }

    // nullopt at a clean end of stream.
    std::optional<PacketRecord> next() {
        uint8_t rh[16];
        in_.read(reinterpret_cast<char*>(rh), 16);
        std::streamsize got = in_.gcount();
        if (got == 0) return std::nullopt;
        if (got != 16) throw TruncatedRecordError(count_, "stream ends inside a record header");
        PacketRecord rec;
        rec.ts_sec = rd32(rh);
        rec.ts_usec = rd32(rh + 4);
        rec.incl_len = rd32(rh + 8);
        rec.orig_len = rd32(rh + 12);
        rec.data.resize(rec.incl_len);
        if (rec.incl_len > 0) {
            in_.read(reinterpret_cast<char*>(rec.data.data()), rec.incl_len);
            if (in_.gcount() != std::streamsize(rec.incl_len))
                throw TruncatedRecordError(count_, "stream ends inside packet data");
        }
        ++count_;
        return rec;
    }

private:
    uint16_t rd16(const uint8_t* p) const {
        return hdr_.order == ByteOrder::big ? load_be16(p)
                                            : uint16_t(uint16_t(p[1]) << 8 | p[0]);
    }
    uint32_t rd32(const uint8_t* p) const {
        return hdr_.order == ByteOrder::big
                   ? load_be32(p)
                   : (uint32_t(p[3]) << 24 | uint32_t(p[2]) << 16 | uint32_t(p[1]) << 8 | p[0]);
    }

    std::istream& in_;
    GlobalHeader hdr_;
    size_t count_ = 0;
};

// Streaming writer; encodes with the byte order recorded in the header.
class PcapWriter {
public:
    PcapWriter(std::ostream& out, const GlobalHeader& hdr) : out_(out), hdr_(hdr) {
        uint8_t raw[24];
        if (hdr_.order == ByteOrder::big) {
            store_be32(raw, kPcapMagic);
        } else {
            raw[0] = 0xd4;
            raw[1] = 0xc3;
            raw[2] = 0xb2;
            raw[3] = 0xa1;
        }
        wr16(raw + 4, hdr_.version_major);
        wr16(raw + 6, hdr_.version_minor);
        wr32(raw + 8, static_cast<uint32_t>(hdr_.thiszone));
        wr32(raw + 12, hdr_.sigfigs);
        wr32(raw + 16, hdr_.snaplen);
        wr32(raw + 20, hdr_.linktype);
        out_.write(reinterpret_cast<const char*>(raw), 24);
        bytes_ = 24;
    }

    void write(const PacketRecord& rec) {
        if (rec.data.size() != rec.incl_len) throw RecordInvariantError(count_);
        uint8_t rh[16];
        wr32(rh, rec.ts_sec);
        wr32(rh + 4, rec.ts_usec);
        wr32(rh + 8, rec.incl_len);
        wr32(rh + 12, rec.orig_len);
        out_.write(reinterpret_cast<const char*>(rh), 16);
        if (!rec.data.empty())
            out_.write(reinterpret_cast<const char*>(rec.data.data()), rec.data.size());
        bytes_ += 16 + rec.data.size();
        ++count_;
    }

    uint64_t bytes_written() const { return bytes_; }

private:
    void wr16(uint8_t* p, uint16_t v) {
        if (hdr_.order == ByteOrder::big) {
            store_be16(p, v);
        } else {
            p[0] = uint8_t(v);
            p[1] = uint8_t(v >> 8);
        }
    }
    void wr32(uint8_t* p, uint32_t v) {
        if (hdr_.order == ByteOrder::big) {
            store_be32(p, v);
        } else {
            p[0] = uint8_t(v);
            p[1] = uint8_t(v >> 8);
            p[2] = uint8_t(v >> 16);
            p[3] = uint8_t(v >> 24);
        }
    }

    std::ostream& out_;
    GlobalHeader hdr_;
    uint64_t bytes_ = 0;
    size_t count_ = 0;
};

inline TraceFile read_trace(std::istream& in) {
    PcapReader reader(in);
    TraceFile t;
    t.header = reader.header();
    while (auto rec = reader.next()) t.records.push_back(std::move(*rec));
    return t;
}

inline uint64_t write_trace(const TraceFile& trace, std::ostream& out) {
    PcapWriter writer(out, trace.header);
    for (const auto& rec : trace.records) writer.write(rec);
    return writer.bytes_written();
}

inline TraceFile read_trace_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open " + path.string());
    return read_trace(in);
}

inline uint64_t write_trace_file(const TraceFile& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
    uint64_t n = write_trace(trace, out);
    out.flush();
    if (!out) throw std::ios_base::failure("write failed: " + path.string());
    return n;
}

}  // namespace pcapanon
