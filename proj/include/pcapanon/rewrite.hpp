#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pcapanon/anon.hpp"
#include "pcapanon/checksum.hpp"
#include "pcapanon/dissect.hpp"
#include "pcapanon/pcap.hpp"
#include "pcapanon/policy.hpp"
#include "pcapanon/validate.hpp"

namespace pcapanon {

struct RewriteConfig {
    bool fix_checksums = true;
    bool normalize_udp_length = false;
    ShiftPolicy shift_underflow = ShiftPolicy::Redraw;
    std::optional<uint64_t> seed;  // fresh entropy when absent
    std::vector<uint8_t> key;      // required by keyed randomization
};

struct RewriteReport {
    uint64_t packets_total = 0;
    uint64_t packets_modified = 0;
    std::array<uint64_t, kAllFields.size()> fields_absent{};
    uint64_t checksums_fixed = 0;
    uint64_t udp_lengths_normalized = 0;
    std::vector<Finding> findings;  // input-trace diagnostics

    uint64_t& absent(FieldId f) { return fields_absent[size_t(f)]; }
    uint64_t absent(FieldId f) const { return fields_absent[size_t(f)]; }
};

namespace detail {

// Value-level dispatch for one non-timestamp entry. Sessions are shared per
// grammar field, so src and dst ports draw from one mapping table.
inline uint64_t apply_value_option(const FieldPolicy& e, uint64_t v,
                                   std::map<std::string, RandSession>& sessions,
                                   const std::vector<uint8_t>& key) {
    const unsigned width = field_bit_width(e.field);
    switch (e.option) {
        case OptionKind::BlackMarker:
            if (e.field == FieldId::TcpFlags && e.flag_mask != 0)
                return clear_bits(v, e.flag_mask);
            return black_marker(v, width, 0);
        case OptionKind::PureRandom:
            return sessions.at(grammar_field_name(e.field)).map(v);
        case OptionKind::KeyedRandom: return keyed_randomize(key, v, width);
        case OptionKind::Bilateral: return bilateral_classify(v, bilateral_for(e.field));
        case OptionKind::Grouping:
            if (e.field == FieldId::TcpFlags) return clear_bits(v, e.flag_mask);
            return group_value(v, grouping_for(e.field));
        default: throw std::logic_error("timestamp option reached value dispatch");
    }
}

}  // namespace detail

// Applies one policy to a whole trace. Scope gates read the original
// protocol value; timestamps transform as one file-ordered series; checksum
// repair runs only where a rewrite actually changed bytes, so an empty
// policy set (with default config) reproduces the input byte for byte.
inline std::pair<TraceFile, RewriteReport> apply_policy(const TraceFile& in, const PolicySet& set,
                                                        const RewriteConfig& cfg = {}) {
    validate_policy(set);
    TraceFile out = in;
    RewriteReport report;
    report.packets_total = in.records.size();
    report.findings = validate_trace(in);

    bool needs_dissect = cfg.normalize_udp_length;
    const FieldPolicy* ts_entry = nullptr;
    bool needs_key = false;
    for (const auto& e : set.entries) {
        if (e.field == FieldId::TimeStamp) ts_entry = &e;
        else needs_dissect = true;
        if (e.option == OptionKind::KeyedRandom) needs_key = true;
    }
    if (set.entries.empty() && !cfg.normalize_udp_length) return {std::move(out), report};
    if (needs_key && cfg.key.empty()) throw EmptyKeyError();

    std::mt19937_64 master(cfg.seed ? *cfg.seed : std::random_device{}());

    // one mapping table per grammar field, created in entry order so a fixed
    // seed yields a fixed run
    std::map<std::string, RandSession> sessions;
    for (const auto& e : set.entries) {
        if (e.field == FieldId::TimeStamp || e.option != OptionKind::PureRandom) continue;
        std::string name = grammar_field_name(e.field);
        if (!sessions.count(name))
            sessions.emplace(name, RandSession(field_bit_width(e.field), master()));
    }

    std::vector<TsPair> new_ts;
    if (ts_entry) {
        std::vector<TsPair> series;
        series.reserve(in.records.size());
        for (const auto& r : in.records) series.push_back({r.ts_sec, r.ts_usec});
        new_ts = ts_transform(ts_entry->ts, series, master, cfg.shift_underflow, cfg.key);
    }

    for (size_t idx = 0; idx < out.records.size(); ++idx) {
        auto& rec = out.records[idx];
        bool changed = false;

        if (ts_entry && (new_ts[idx].sec != rec.ts_sec || new_ts[idx].usec != rec.ts_usec)) {
            rec.ts_sec = new_ts[idx].sec;
            rec.ts_usec = new_ts[idx].usec;
            changed = true;
        }

        if (needs_dissect) {
            PacketView view = dissect_packet(rec, in.header.linktype);
            bool ip_changed = false;
            bool transport_changed = false;
            bool proto_changed = false;
            bool total_len_changed = false;

            for (const auto& e : set.entries) {
                if (e.field == FieldId::TimeStamp) continue;
                auto loc = locate_field(view, rec, e.field);
                if (!loc) {
                    ++report.absent(e.field);
                    continue;
                }
                uint64_t v = read_field(rec, *loc);
                if (e.field == FieldId::TransportProtocol) {
                    // gate on the value before this entry rewrites it
                    if (e.scope.protocol_scope == ProtocolScope::TcpOnly && v != kProtoTcp)
                        continue;
                    if (e.scope.protocol_scope == ProtocolScope::UdpOnly && v != kProtoUdp)
                        continue;
                }
                uint64_t v2 = detail::apply_value_option(e, v, sessions, cfg.key);
                if (v2 == v) continue;
                write_field(rec, *loc, v2);
                changed = true;
                switch (e.field) {
                    case FieldId::TransportProtocol:
                        ip_changed = true;
                        proto_changed = true;
                        break;
                    case FieldId::TotalLength:
                        ip_changed = true;
                        total_len_changed = true;
                        break;
                    case FieldId::Ttl:
                    case FieldId::Tos:
                    case FieldId::FragFlags: ip_changed = true; break;
                    default: transport_changed = true; break;
                }
            }

            if (cfg.normalize_udp_length && view.transport == Transport::Udp) {
                uint16_t total = load_be16(rec.data.data() + view.ip_header_offset + 2);
                uint16_t hdr = uint16_t(view.ihl) * 4;
                if (total >= hdr) {
                    uint16_t implied = uint16_t(total - hdr);
                    uint16_t claimed = load_be16(rec.data.data() + view.transport_offset + 4);
                    if (claimed != implied) {
                        store_be16(rec.data.data() + view.transport_offset + 4, implied);
                        ++report.udp_lengths_normalized;
                        transport_changed = true;
                        changed = true;
                    }
                }
            }

            if (cfg.fix_checksums) {
                if (ip_changed) {
                    if (auto expect = ipv4_header_checksum(rec, view)) {
                        size_t off = view.ip_header_offset + 10;
                        if (load_be16(rec.data.data() + off) != *expect) {
                            store_be16(rec.data.data() + off, *expect);
                            ++report.checksums_fixed;
                            changed = true;
                        }
                    }
                }
                bool pseudo_changed =
                    proto_changed || (total_len_changed && view.transport == Transport::Tcp);
                if ((transport_changed || pseudo_changed) &&
                    (view.transport == Transport::Tcp || view.transport == Transport::Udp)) {
                    size_t off = view.transport_offset + (view.transport == Transport::Tcp ? 16 : 6);
                    uint16_t cur = load_be16(rec.data.data() + off);
                    bool udp_disabled = view.transport == Transport::Udp && cur == 0;
                    if (!udp_disabled) {
                        if (auto expect = transport_checksum(rec, view)) {
                            uint16_t value = *expect;
                            if (view.transport == Transport::Udp && value == 0) value = 0xFFFF;
                            if (value != cur) {
                                store_be16(rec.data.data() + off, value);
                                ++report.checksums_fixed;
                                changed = true;
                            }
                        }
                    }
                }
            }
        }

        if (changed) ++report.packets_modified;
    }
    return {std::move(out), report};
}

}  // namespace pcapanon
