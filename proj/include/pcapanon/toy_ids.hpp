#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pcapanon/dissect.hpp"
#include "pcapanon/pcap.hpp"
#include "pcapanon/policy.hpp"

namespace pcapanon {

// Built-in conjunctive signature matcher: one alert per (rule, packet) pair
// where every predicate holds. Stands in for an external IDS in tests and
// self-contained benchmarks.

struct ToyPredicate {
    enum class Kind {
        ProtocolEq,
        SrcPortEq,
        SrcPortRange,
        DstPortEq,
        DstPortRange,
        TcpFlagSet,
        FragMfSet,
    };
    Kind kind;
    uint64_t a = 0;  // value, range low, or flag bit
    uint64_t b = 0;  // range high
};

struct ToyRule {
    std::string id;
    std::vector<ToyPredicate> predicates;  // conjunction, never empty
};

struct ToyRuleError : std::runtime_error {
    int line;
    ToyRuleError(int line_no, const std::string& reason)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + reason), line(line_no) {}
};

namespace detail {

inline std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline uint64_t toy_number(const std::string& tok, uint64_t max, int line) {
    try {
        size_t pos = 0;
        unsigned long long v = std::stoull(tok, &pos);
        if (pos != tok.size() || v > max) throw std::out_of_range(tok);
        return v;
    } catch (const std::exception&) {
        throw ToyRuleError(line, "expected a number in [0, " + std::to_string(max) + "], got '" +
                                     tok + "'");
    }
}

}  // namespace detail

// Line grammar: `id: predicate [&& predicate ...]`, '#' comments.
// Predicates: protocol == N | src_port == N | src_port in LO-HI |
// dst_port == N | dst_port in LO-HI | tcp_flag NAME | frag_mf set.
inline std::vector<ToyRule> parse_toy_rules(std::string_view text) {
    std::vector<ToyRule> rules;
    std::istringstream stream{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(stream, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::string_view line = detail::trim(raw);
        if (line.empty()) continue;

        size_t colon = line.find(':');
        if (colon == std::string_view::npos)
            throw ToyRuleError(line_no, "expected 'id: predicates'");
        ToyRule rule;
        rule.id = std::string(detail::trim(line.substr(0, colon)));
        if (rule.id.empty()) throw ToyRuleError(line_no, "empty rule id");

        std::string body{line.substr(colon + 1)};
        size_t start = 0;
        while (start <= body.size()) {
            size_t amp = body.find("&&", start);
            std::string_view piece = detail::trim(
                std::string_view(body).substr(start, amp == std::string::npos ? std::string::npos
                                                                              : amp - start));
            auto toks = detail::split_ws(piece);
            if (toks.empty()) throw ToyRuleError(line_no, "empty predicate");
            ToyPredicate pred{};
            if (toks[0] == "protocol") {
                if (toks.size() != 3 || toks[1] != "==")
                    throw ToyRuleError(line_no, "protocol predicate is 'protocol == N'");
                pred.kind = ToyPredicate::Kind::ProtocolEq;
                pred.a = detail::toy_number(toks[2], 255, line_no);
            } else if (toks[0] == "src_port" || toks[0] == "dst_port") {
                bool src = toks[0] == "src_port";
                if (toks.size() == 3 && toks[1] == "==") {
                    pred.kind = src ? ToyPredicate::Kind::SrcPortEq : ToyPredicate::Kind::DstPortEq;
                    pred.a = detail::toy_number(toks[2], 65535, line_no);
                } else if (toks.size() == 3 && toks[1] == "in") {
                    auto dash = toks[2].find('-');
                    if (dash == std::string::npos)
                        throw ToyRuleError(line_no, "range must be LO-HI");
                    pred.kind =
                        src ? ToyPredicate::Kind::SrcPortRange : ToyPredicate::Kind::DstPortRange;
                    pred.a = detail::toy_number(toks[2].substr(0, dash), 65535, line_no);
                    pred.b = detail::toy_number(toks[2].substr(dash + 1), 65535, line_no);
                    if (pred.a > pred.b) throw ToyRuleError(line_no, "empty range");
                } else {
                    throw ToyRuleError(line_no, "port predicate is 'X == N' or 'X in LO-HI'");
                }
            } else if (toks[0] == "tcp_flag") {
                if (toks.size() != 2)
                    throw ToyRuleError(line_no, "flag predicate is 'tcp_flag NAME'");
                pred.kind = ToyPredicate::Kind::TcpFlagSet;
                try {
                    pred.a = detail::flag_bit_from_name(toks[1], line_no);
                } catch (const PolicyError&) {
                    throw ToyRuleError(line_no, "unknown flag '" + toks[1] + "'");
                }
            } else if (toks[0] == "frag_mf") {
                if (toks.size() != 2 || toks[1] != "set")
                    throw ToyRuleError(line_no, "fragment predicate is 'frag_mf set'");
                pred.kind = ToyPredicate::Kind::FragMfSet;
            } else {
                throw ToyRuleError(line_no, "unknown predicate field '" + toks[0] + "'");
            }
            rule.predicates.push_back(pred);
            if (amp == std::string::npos) break;
            start = amp + 2;
        }
        if (rule.predicates.empty()) throw ToyRuleError(line_no, "rule needs a predicate");
        rules.push_back(std::move(rule));
    }
    return rules;
}

inline bool toy_predicate_matches(const ToyPredicate& p, const PacketRecord& rec,
                                  const PacketView& view) {
    auto port = [&](FieldId f) -> std::optional<uint64_t> {
        auto loc = locate_field(view, rec, f);
        if (!loc) return std::nullopt;
        return read_field(rec, *loc);
    };
    switch (p.kind) {
        case ToyPredicate::Kind::ProtocolEq:
            return view.has_ip && rec.data[view.ip_header_offset + 9] == p.a;
        case ToyPredicate::Kind::SrcPortEq: {
            auto v = port(FieldId::SrcPort);
            return v && *v == p.a;
        }
        case ToyPredicate::Kind::SrcPortRange: {
            auto v = port(FieldId::SrcPort);
            return v && *v >= p.a && *v <= p.b;
        }
        case ToyPredicate::Kind::DstPortEq: {
            auto v = port(FieldId::DstPort);
            return v && *v == p.a;
        }
        case ToyPredicate::Kind::DstPortRange: {
            auto v = port(FieldId::DstPort);
            return v && *v >= p.a && *v <= p.b;
        }
        case ToyPredicate::Kind::TcpFlagSet: {
            auto loc = locate_field(view, rec, FieldId::TcpFlags);
            return loc && (read_field(rec, *loc) & p.a) != 0;
        }
        case ToyPredicate::Kind::FragMfSet:
            return view.has_ip && (rec.data[view.ip_header_offset + 6] & 0x20) != 0;
    }
    return false;
}

inline uint64_t toy_count_alarms(const std::vector<ToyRule>& rules, const TraceFile& trace) {
    uint64_t alarms = 0;
    for (const auto& rec : trace.records) {
        PacketView view = dissect_packet(rec, trace.header.linktype);
        for (const auto& rule : rules) {
            bool all = true;
            for (const auto& p : rule.predicates)
                if (!toy_predicate_matches(p, rec, view)) {
                    all = false;
                    break;
                }
            if (all) ++alarms;
        }
    }
    return alarms;
}

}  // namespace pcapanon
