#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pcapanon/anon.hpp"
#include "pcapanon/dissect.hpp"

namespace pcapanon {

// TCP flag bits within the flags byte.
inline constexpr uint8_t kFlagFin = 0x01;
inline constexpr uint8_t kFlagSyn = 0x02;
inline constexpr uint8_t kFlagRst = 0x04;
inline constexpr uint8_t kFlagPsh = 0x08;
inline constexpr uint8_t kFlagAck = 0x10;
inline constexpr uint8_t kFlagUrg = 0x20;
inline constexpr uint8_t kMaskRstSynFin = kFlagRst | kFlagSyn | kFlagFin;
inline constexpr uint8_t kMaskUrgAckPsh = kFlagUrg | kFlagAck | kFlagPsh;

enum class OptionKind {
    BlackMarker,
    PureRandom,
    KeyedRandom,
    Bilateral,
    Grouping,
    Annihilate,
    Truncate,
    Enumerate,
    Shift,
};

enum class ProtocolScope { All, TcpOnly, UdpOnly };
enum class PortScope { Both, SrcOnly, DstOnly };

struct ScopeSelector {
    ProtocolScope protocol_scope = ProtocolScope::All;  // protocol field only
    PortScope port_scope = PortScope::Both;             // port fields only
    bool operator==(const ScopeSelector&) const = default;
};

// One field's anonymization choice with its parameters resolved.
// flag_mask is meaningful only for TcpFlags: a single flag bit selects the
// per-flag black marker, a group mask selects which flags a grouping zeroes,
// 0 means the whole byte. ts carries timestamp parameters.
struct FieldPolicy {
    FieldId field = FieldId::Ttl;
    OptionKind option = OptionKind::BlackMarker;
    ScopeSelector scope;
    uint8_t flag_mask = 0;
    TsOptions ts;
    bool operator==(const FieldPolicy&) const = default;
};

struct PolicySet {
    std::vector<FieldPolicy> entries;
    bool operator==(const PolicySet&) const = default;
};

enum class PolicyErrorKind {
    Syntax,
    UnknownField,
    OptionNotInCatalog,
    BadScope,
    DuplicateField,
};

struct PolicyError : std::runtime_error {
    PolicyErrorKind kind;
    int line;  // 1-based; 0 when not tied to a line

    PolicyError(PolicyErrorKind k, int line_no, const std::string& reason)
        : std::runtime_error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + reason
                                         : reason),
          kind(k),
          line(line_no) {}
};

// Grammar-level field names; src and dst ports share the "ports" row.
inline const char* grammar_field_name(FieldId f) {
    switch (f) {
        case FieldId::TransportProtocol: return "protocol";
        case FieldId::TotalLength: return "length";
        case FieldId::Ttl: return "ttl";
        case FieldId::Tos: return "tos";
        case FieldId::FragFlags: return "frag";
        case FieldId::SrcPort:
        case FieldId::DstPort: return "ports";
        case FieldId::SeqNumber: return "seq";
        case FieldId::WindowSize: return "window";
        case FieldId::TcpFlags: return "tcpflags";
        case FieldId::TimeStamp: return "timestamp";
    }
    return "?";
}

// ---- fixed catalog data ----

namespace detail {
// 253, the well-known-class representative, counts as well-known itself so
// the classification is idempotent (every other spec keeps its representative
// inside its class; here any true member is a real protocol, which the
// representative must not be).
inline bool proto_is_well_known(uint64_t v) {
    return v == kProtoTcp || v == kProtoUdp || v == kProtoIcmp || v == 253;
}
inline bool port_is_low(uint64_t v) { return v < 1024; }
inline bool tos_msb_clear(uint64_t v) { return (v & 0x80) == 0; }
inline bool window_is_low(uint64_t v) { return v < 10000; }
}  // namespace detail

// Representatives are reserved-for-experimentation protocol numbers so no
// real transport parser claims the rewritten packets.
inline const BilateralSpec& bilateral_for(FieldId f) {
    static const BilateralSpec proto{detail::proto_is_well_known, 253, 254};
    static const BilateralSpec ports{detail::port_is_low, 0, 1024};
    static const BilateralSpec tos{detail::tos_msb_clear, 0x00, 0xFF};
    static const BilateralSpec window{detail::window_is_low, 0, 10000};
    switch (f) {
        case FieldId::TransportProtocol: return proto;
        case FieldId::SrcPort:
        case FieldId::DstPort: return ports;
        case FieldId::Tos: return tos;
        case FieldId::WindowSize: return window;
        default: throw std::logic_error("no bilateral classification for this field");
    }
}

// Buckets are inclusive; each representative is the bucket lower bound.
inline const GroupingSpec& grouping_for(FieldId f) {
    static const GroupingSpec length{{{0, 100, 0}, {101, 2000, 101}, {2001, 65535, 2001}}};
    static const GroupingSpec ttl{{{0, 0, 0}, {1, 32, 1}, {33, 64, 33}, {65, 255, 65}}};
    static const GroupingSpec seq{{{0, 1000000, 0},
                                   {1000001, 2000000, 1000001},
                                   {2000001, 3000000, 2000001},
                                   {3000001, 4294967295ULL, 3000001}}};
    static const GroupingSpec window{{{0, 1024, 0},
                                      {1025, 8192, 1025},
                                      {8193, 16384, 8193},
                                      {16385, 32768, 16385},
                                      {32769, 65535, 32769}}};
    switch (f) {
        case FieldId::TotalLength: return length;
        case FieldId::Ttl: return ttl;
        case FieldId::SeqNumber: return seq;
        case FieldId::WindowSize: return window;
        default: throw std::logic_error("no grouping for this field");
    }
}

// Catalog membership for one entry. Throws PolicyError with the offending
// line number (0 when checking an assembled set).
inline void check_catalog_entry(const FieldPolicy& p, int line = 0) {
    auto reject = [&](const std::string& why) {
        throw PolicyError(PolicyErrorKind::OptionNotInCatalog, line, why);
    };
    const std::string fname = grammar_field_name(p.field);
    auto in = [&](std::initializer_list<OptionKind> opts) {
        for (auto o : opts)
            if (p.option == o) return true;
        return false;
    };
    if (p.field != FieldId::TransportProtocol && p.scope.protocol_scope != ProtocolScope::All)
        throw PolicyError(PolicyErrorKind::BadScope, line,
                          "protocol scope attached to field '" + fname + "'");
    if (p.field != FieldId::SrcPort && p.field != FieldId::DstPort &&
        p.scope.port_scope != PortScope::Both)
        throw PolicyError(PolicyErrorKind::BadScope, line,
                          "port scope attached to field '" + fname + "'");
    if (p.field != FieldId::TcpFlags && p.flag_mask != 0)
        reject("flag parameters apply only to tcpflags");
    if (p.field != FieldId::TimeStamp && p.option >= OptionKind::Annihilate)
        reject("option is timestamp-only, not valid for '" + fname + "'");

    switch (p.field) {
        case FieldId::TransportProtocol:
        case FieldId::Tos:
            if (!in({OptionKind::BlackMarker, OptionKind::PureRandom, OptionKind::KeyedRandom,
                     OptionKind::Bilateral}))
                reject("option not in catalog for '" + fname + "'");
            break;
        case FieldId::TotalLength:
        case FieldId::Ttl:
        case FieldId::SeqNumber:
            if (!in({OptionKind::BlackMarker, OptionKind::PureRandom, OptionKind::KeyedRandom,
                     OptionKind::Grouping}))
                reject("option not in catalog for '" + fname + "'");
            break;
        case FieldId::FragFlags:
            if (!in({OptionKind::BlackMarker, OptionKind::PureRandom, OptionKind::KeyedRandom}))
                reject("option not in catalog for 'frag'");
            break;
        case FieldId::SrcPort:
        case FieldId::DstPort:
            if (!in({OptionKind::BlackMarker, OptionKind::Bilateral, OptionKind::PureRandom,
                     OptionKind::KeyedRandom}))
                reject("option not in catalog for 'ports'");
            break;
        case FieldId::WindowSize:
            if (!in({OptionKind::BlackMarker, OptionKind::PureRandom, OptionKind::KeyedRandom,
                     OptionKind::Bilateral, OptionKind::Grouping}))
                reject("option not in catalog for 'window'");
            break;
        case FieldId::TcpFlags:
            switch (p.option) {
                case OptionKind::BlackMarker: {
                    bool single_bit = p.flag_mask != 0 && (p.flag_mask & (p.flag_mask - 1)) == 0;
                    if (p.flag_mask != 0 &&
                        (!single_bit || (p.flag_mask & ~uint8_t(0x3F)) != 0))
                        reject("black_marker flag must be one of urg/ack/psh/rst/syn/fin");
                    break;
                }
                case OptionKind::Grouping:
                    if (p.flag_mask != kMaskRstSynFin && p.flag_mask != kMaskUrgAckPsh)
                        reject("tcpflags grouping requires set=rst_syn_fin or set=urg_ack_psh");
                    break;
                case OptionKind::PureRandom:
                case OptionKind::KeyedRandom:
                    if (p.flag_mask != 0) reject("flag parameters apply only to black_marker");
                    break;
                default: reject("option not in catalog for 'tcpflags'");
            }
            break;
        case FieldId::TimeStamp: {
            TsMode want;
            switch (p.option) {
                case OptionKind::BlackMarker: want = TsMode::BlackMarker; break;
                case OptionKind::PureRandom: want = TsMode::PureRandom; break;
                case OptionKind::KeyedRandom: want = TsMode::KeyedRandom; break;
                case OptionKind::Annihilate:
                    want = p.ts.mode == TsMode::AnnihilateSec ? TsMode::AnnihilateSec
                                                              : TsMode::AnnihilateUsec;
                    if (p.ts.mode != TsMode::AnnihilateSec && p.ts.mode != TsMode::AnnihilateUsec)
                        reject("annihilate requires unit=sec or unit=usec");
                    break;
                case OptionKind::Truncate: want = TsMode::Truncate; break;
                case OptionKind::Enumerate: want = TsMode::Enumerate; break;
                case OptionKind::Shift: want = TsMode::RandomShift; break;
                default:
                    reject("option not in catalog for 'timestamp'");
                    return;
            }
            if (p.ts.mode != want) reject("timestamp parameters inconsistent with option");
            if (p.option == OptionKind::Truncate && p.ts.truncate_gran < 1)
                reject("truncate granularity must be at least 1 second");
            if (p.option == OptionKind::Shift && p.ts.shift_min > p.ts.shift_max)
                reject("shift range is empty (min > max)");
            break;
        }
    }
}

// Duplicate and catalog checks over a whole set. Entry-count limits (the
// single-field default) are a front-end concern, not enforced here.
inline void validate_policy(const PolicySet& set) {
    for (size_t i = 0; i < set.entries.size(); ++i) {
        for (size_t j = i + 1; j < set.entries.size(); ++j)
            if (set.entries[i].field == set.entries[j].field)
                throw PolicyError(PolicyErrorKind::DuplicateField, 0,
                                  std::string("duplicate policy for field '") +
                                      field_name(set.entries[i].field) + "'");
        check_catalog_entry(set.entries[i]);
    }
}

// True when every entry belongs to one Table-row field (src+dst ports count
// as the single "ports" field).
inline bool is_single_field(const PolicySet& set) {
    std::string seen;
    for (const auto& e : set.entries) {
        std::string f = grammar_field_name(e.field);
        if (seen.empty()) seen = f;
        else if (seen != f) return false;
    }
    return true;
}

// ---- policy file parsing ----

namespace detail {

inline std::string_view trim(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct Param {
    std::string key;
    std::string value;
};

inline int64_t parse_int(const std::string& v, int line, const std::string& what) {
    try {
        size_t pos = 0;
        int64_t out = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw PolicyError(PolicyErrorKind::Syntax, line, what + " expects an integer, got '" + v + "'");
    }
}

inline uint8_t flag_bit_from_name(const std::string& name, int line) {
    if (name == "urg") return kFlagUrg;
    if (name == "ack") return kFlagAck;
    if (name == "psh") return kFlagPsh;
    if (name == "rst") return kFlagRst;
    if (name == "syn") return kFlagSyn;
    if (name == "fin") return kFlagFin;
    throw PolicyError(PolicyErrorKind::OptionNotInCatalog, line,
                      "unknown flag '" + name + "' (urg/ack/psh/rst/syn/fin)");
}

}  // namespace detail

// Line grammar: `field[.scope] = option[(key=value,…)]`, '#' starts a
// comment. One line may expand to two entries (ports.both covers src+dst).
inline PolicySet parse_policy(std::string_view text) {
    using detail::trim;
    PolicySet set;
    std::string input(text);
    std::istringstream stream(input);
    std::string raw;
    int line_no = 0;
    while (std::getline(stream, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::string_view line = trim(raw);
        if (line.empty()) continue;

        size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw PolicyError(PolicyErrorKind::Syntax, line_no, "expected 'field = option'");
        std::string lhs{trim(line.substr(0, eq))};
        std::string rhs{trim(line.substr(eq + 1))};
        if (lhs.empty() || rhs.empty())
            throw PolicyError(PolicyErrorKind::Syntax, line_no, "expected 'field = option'");

        // left side: field and optional scope
        std::string fname = lhs, sname;
        if (auto dot = lhs.find('.'); dot != std::string::npos) {
            fname = lhs.substr(0, dot);
            sname = lhs.substr(dot + 1);
        }
        static const struct {
            const char* name;
            FieldId field;
        } kFields[] = {
            {"protocol", FieldId::TransportProtocol}, {"length", FieldId::TotalLength},
            {"ttl", FieldId::Ttl},                    {"tos", FieldId::Tos},
            {"frag", FieldId::FragFlags},             {"ports", FieldId::SrcPort},
            {"seq", FieldId::SeqNumber},              {"window", FieldId::WindowSize},
            {"tcpflags", FieldId::TcpFlags},          {"timestamp", FieldId::TimeStamp},
        };
        std::optional<FieldId> field;
        for (const auto& e : kFields)
            if (fname == e.name) field = e.field;
        if (!field)
            throw PolicyError(PolicyErrorKind::UnknownField, line_no,
                              "unknown field '" + fname + "'");

        ScopeSelector scope;
        bool ports_src = true, ports_dst = true;
        if (!sname.empty()) {
            if (fname == "protocol") {
                if (sname == "all") scope.protocol_scope = ProtocolScope::All;
                else if (sname == "tcp") scope.protocol_scope = ProtocolScope::TcpOnly;
                else if (sname == "udp") scope.protocol_scope = ProtocolScope::UdpOnly;
                else
                    throw PolicyError(PolicyErrorKind::BadScope, line_no,
                                      "protocol scope must be all, tcp or udp");
            } else if (fname == "ports") {
                if (sname == "both") scope.port_scope = PortScope::Both;
                else if (sname == "src") {
                    scope.port_scope = PortScope::SrcOnly;
                    ports_dst = false;
                } else if (sname == "dst") {
                    scope.port_scope = PortScope::DstOnly;
                    ports_src = false;
                } else
                    throw PolicyError(PolicyErrorKind::BadScope, line_no,
                                      "ports scope must be both, src or dst");
            } else {
                throw PolicyError(PolicyErrorKind::BadScope, line_no,
                                  "field '" + fname + "' takes no scope");
            }
        }

        // right side: option name and parameters
        std::string oname = rhs;
        std::vector<detail::Param> params;
        if (auto paren = rhs.find('('); paren != std::string::npos) {
            if (rhs.back() != ')')
                throw PolicyError(PolicyErrorKind::Syntax, line_no, "unterminated parameter list");
            oname = std::string(trim(rhs.substr(0, paren)));
            std::string body = rhs.substr(paren + 1, rhs.size() - paren - 2);
            size_t start = 0;
            while (start <= body.size()) {
                size_t comma = body.find(',', start);
                std::string item{trim(std::string_view(body).substr(
                    start, comma == std::string::npos ? std::string::npos : comma - start))};
                if (!item.empty()) {
                    auto peq = item.find('=');
                    if (peq == std::string::npos)
                        throw PolicyError(PolicyErrorKind::Syntax, line_no,
                                          "parameter must be key=value");
                    params.push_back({std::string(trim(std::string_view(item).substr(0, peq))),
                                      std::string(trim(std::string_view(item).substr(peq + 1)))});
                }
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
        }

        FieldPolicy entry;
        entry.field = *field;
        entry.scope = scope;
        if (oname == "black_marker") entry.option = OptionKind::BlackMarker;
        else if (oname == "pure_rand") entry.option = OptionKind::PureRandom;
        else if (oname == "keyed_rand") entry.option = OptionKind::KeyedRandom;
        else if (oname == "bilateral") entry.option = OptionKind::Bilateral;
        else if (oname == "grouping") entry.option = OptionKind::Grouping;
        else if (oname == "annihilate") entry.option = OptionKind::Annihilate;
        else if (oname == "truncate") entry.option = OptionKind::Truncate;
        else if (oname == "enumerate") entry.option = OptionKind::Enumerate;
        else if (oname == "shift") entry.option = OptionKind::Shift;
        else
            throw PolicyError(PolicyErrorKind::OptionNotInCatalog, line_no,
                              "unknown option '" + oname + "'");

        // ts carries parameters only for the timestamp field; value fields
        // keep it defaulted so equal policies compare equal
        if (entry.field == FieldId::TimeStamp) {
            switch (entry.option) {
                case OptionKind::Annihilate: entry.ts.mode = TsMode::AnnihilateUsec; break;
                case OptionKind::Truncate: entry.ts.mode = TsMode::Truncate; break;
                case OptionKind::Enumerate: entry.ts.mode = TsMode::Enumerate; break;
                case OptionKind::Shift: entry.ts.mode = TsMode::RandomShift; break;
                case OptionKind::PureRandom: entry.ts.mode = TsMode::PureRandom; break;
                case OptionKind::KeyedRandom: entry.ts.mode = TsMode::KeyedRandom; break;
                default: break;
            }
        }

        bool unit_seen = false;
        for (const auto& p : params) {
            if (p.key == "flag" && entry.option == OptionKind::BlackMarker &&
                entry.field == FieldId::TcpFlags) {
                entry.flag_mask = detail::flag_bit_from_name(p.value, line_no);
            } else if (p.key == "set" && entry.option == OptionKind::Grouping &&
                       entry.field == FieldId::TcpFlags) {
                if (p.value == "rst_syn_fin") entry.flag_mask = kMaskRstSynFin;
                else if (p.value == "urg_ack_psh") entry.flag_mask = kMaskUrgAckPsh;
                else
                    throw PolicyError(PolicyErrorKind::OptionNotInCatalog, line_no,
                                      "grouping set must be rst_syn_fin or urg_ack_psh");
            } else if (p.key == "unit" && entry.option == OptionKind::Annihilate) {
                unit_seen = true;
                if (p.value == "sec") entry.ts.mode = TsMode::AnnihilateSec;
                else if (p.value == "usec") entry.ts.mode = TsMode::AnnihilateUsec;
                else
                    throw PolicyError(PolicyErrorKind::OptionNotInCatalog, line_no,
                                      "annihilate unit must be sec or usec");
            } else if (p.key == "gran" && entry.option == OptionKind::Truncate) {
                int64_t g = detail::parse_int(p.value, line_no, "gran");
                if (g < 1 || g > int64_t(UINT32_MAX))
                    throw PolicyError(PolicyErrorKind::Syntax, line_no,
                                      "gran must be in [1, 2^32-1] seconds");
                entry.ts.truncate_gran = uint32_t(g);
            } else if (p.key == "min" && entry.option == OptionKind::Shift) {
                entry.ts.shift_min = detail::parse_int(p.value, line_no, "min");
            } else if (p.key == "max" && entry.option == OptionKind::Shift) {
                entry.ts.shift_max = detail::parse_int(p.value, line_no, "max");
            } else {
                throw PolicyError(PolicyErrorKind::Syntax, line_no,
                                  "unexpected parameter '" + p.key + "' for option '" + oname +
                                      "'");
            }
        }
        if (entry.option == OptionKind::Annihilate && !unit_seen)
            throw PolicyError(PolicyErrorKind::OptionNotInCatalog, line_no,
                              "annihilate requires unit=sec or unit=usec");
        if (entry.option == OptionKind::Shift && entry.ts.shift_min > entry.ts.shift_max)
            throw PolicyError(PolicyErrorKind::Syntax, line_no, "shift range is empty (min > max)");

        auto push = [&](FieldPolicy e) {
            for (const auto& prev : set.entries)
                if (prev.field == e.field)
                    throw PolicyError(PolicyErrorKind::DuplicateField, line_no,
                                      std::string("duplicate policy for field '") +
                                          field_name(e.field) + "'");
            check_catalog_entry(e, line_no);
            set.entries.push_back(e);
        };
        if (entry.field == FieldId::SrcPort) {  // grammar "ports"
            if (ports_src) {
                entry.field = FieldId::SrcPort;
                push(entry);
            }
            if (ports_dst) {
                entry.field = FieldId::DstPort;
                push(entry);
            }
        } else {
            push(entry);
        }
    }
    validate_policy(set);
    return set;
}

// ---- canonical rendering ----

namespace detail {

inline std::string flag_name_from_bit(uint8_t bit) {
    switch (bit) {
        case kFlagUrg: return "urg";
        case kFlagAck: return "ack";
        case kFlagPsh: return "psh";
        case kFlagRst: return "rst";
        case kFlagSyn: return "syn";
        case kFlagFin: return "fin";
    }
    return "?";
}

inline std::string render_option(const FieldPolicy& p) {
    switch (p.option) {
        case OptionKind::BlackMarker:
            if (p.field == FieldId::TcpFlags && p.flag_mask != 0)
                return "black_marker(flag=" + flag_name_from_bit(p.flag_mask) + ")";
            return "black_marker";
        case OptionKind::PureRandom: return "pure_rand";
        case OptionKind::KeyedRandom: return "keyed_rand";
        case OptionKind::Bilateral: return "bilateral";
        case OptionKind::Grouping:
            if (p.field == FieldId::TcpFlags)
                return std::string("grouping(set=") +
                       (p.flag_mask == kMaskRstSynFin ? "rst_syn_fin" : "urg_ack_psh") + ")";
            return "grouping";
        case OptionKind::Annihilate:
            return p.ts.mode == TsMode::AnnihilateSec ? "annihilate(unit=sec)"
                                                      : "annihilate(unit=usec)";
        case OptionKind::Truncate:
            return "truncate(gran=" + std::to_string(p.ts.truncate_gran) + ")";
        case OptionKind::Enumerate: return "enumerate";
        case OptionKind::Shift:
            return "shift(min=" + std::to_string(p.ts.shift_min) +
                   ",max=" + std::to_string(p.ts.shift_max) + ")";
    }
    return "?";
}

}  // namespace detail

// Canonical text form; parse_policy(render_policy(s)) == s for any set that
// groups a both-ports pair as adjacent src,dst entries (as parse emits them).
inline std::string render_policy(const PolicySet& set) {
    std::string out;
    for (size_t i = 0; i < set.entries.size(); ++i) {
        const auto& e = set.entries[i];
        std::string lhs;
        if (e.field == FieldId::TransportProtocol) {
            switch (e.scope.protocol_scope) {
                case ProtocolScope::All: lhs = "protocol.all"; break;
                case ProtocolScope::TcpOnly: lhs = "protocol.tcp"; break;
                case ProtocolScope::UdpOnly: lhs = "protocol.udp"; break;
            }
        } else if (e.field == FieldId::SrcPort || e.field == FieldId::DstPort) {
            if (e.field == FieldId::SrcPort && e.scope.port_scope == PortScope::Both &&
                i + 1 < set.entries.size()) {
                FieldPolicy twin = e;
                twin.field = FieldId::DstPort;
                if (set.entries[i + 1] == twin) {
                    out += "ports.both = " + detail::render_option(e) + "\n";
                    ++i;  // consumed the dst twin
                    continue;
                }
            }
            lhs = e.field == FieldId::SrcPort ? "ports.src" : "ports.dst";
        } else {
            lhs = grammar_field_name(e.field);
        }
        out += lhs + " = " + detail::render_option(e) + "\n";
    }
    return out;
}

// ---- experiment grid ----

struct GridEntry {
    std::string id;  // "field/scope/option[/variant]"
    PolicySet set;
};

// Every legal (field, scope, option, variant) combination the catalog
// defines, in field-row order with scope-major enumeration: 67 experiments.
inline std::vector<GridEntry> generate_grid() {
    std::vector<GridEntry> out;
    auto single = [](FieldPolicy p) {
        PolicySet s;
        s.entries.push_back(p);
        return s;
    };

    // transport protocol: 3 scopes x 4 options
    {
        const std::pair<const char*, ProtocolScope> scopes[] = {
            {"all", ProtocolScope::All},
            {"tcp_only", ProtocolScope::TcpOnly},
            {"udp_only", ProtocolScope::UdpOnly},
        };
        const std::pair<const char*, OptionKind> options[] = {
            {"black_marker", OptionKind::BlackMarker},
            {"pure_randomization", OptionKind::PureRandom},
            {"keyed_randomization", OptionKind::KeyedRandom},
            {"bilateral_classification", OptionKind::Bilateral},
        };
        for (const auto& [sname, sval] : scopes)
            for (const auto& [oname, oval] : options) {
                FieldPolicy p;
                p.field = FieldId::TransportProtocol;
                p.option = oval;
                p.scope.protocol_scope = sval;
                out.push_back({std::string("protocol/") + sname + "/" + oname, single(p)});
            }
    }

    // plain value fields: length, ttl, tos, frag, seq, window
    {
        struct Row {
            const char* name;
            FieldId field;
            std::vector<std::pair<const char*, OptionKind>> options;
        };
        const Row rows[] = {
            {"length",
             FieldId::TotalLength,
             {{"black_marker", OptionKind::BlackMarker},
              {"pure_randomization", OptionKind::PureRandom},
              {"keyed_randomization", OptionKind::KeyedRandom},
              {"grouping", OptionKind::Grouping}}},
            {"ttl",
             FieldId::Ttl,
             {{"black_marker", OptionKind::BlackMarker},
              {"pure_randomization", OptionKind::PureRandom},
              {"keyed_randomization", OptionKind::KeyedRandom},
              {"grouping", OptionKind::Grouping}}},
            {"tos",
             FieldId::Tos,
             {{"black_marker", OptionKind::BlackMarker},
              {"pure_randomization", OptionKind::PureRandom},
              {"keyed_randomization", OptionKind::KeyedRandom},
              {"bilateral_classification", OptionKind::Bilateral}}},
            {"frag",
             FieldId::FragFlags,
             {{"black_marker", OptionKind::BlackMarker},
              {"pure_randomization", OptionKind::PureRandom},
              {"keyed_randomization", OptionKind::KeyedRandom}}},
        };
        for (const auto& row : rows)
            for (const auto& [oname, oval] : row.options) {
                FieldPolicy p;
                p.field = row.field;
                p.option = oval;
                out.push_back({std::string(row.name) + "/all/" + oname, single(p)});
            }
    }

    // ports: 3 scopes x 4 options (bilateral listed second in the catalog)
    {
        const std::pair<const char*, PortScope> scopes[] = {
            {"both", PortScope::Both},
            {"src_only", PortScope::SrcOnly},
            {"dst_only", PortScope::DstOnly},
        };
        const std::pair<const char*, OptionKind> options[] = {
            {"black_marker", OptionKind::BlackMarker},
            {"bilateral_classification", OptionKind::Bilateral},
            {"pure_randomization", OptionKind::PureRandom},
            {"keyed_randomization", OptionKind::KeyedRandom},
        };
        for (const auto& [sname, sval] : scopes)
            for (const auto& [oname, oval] : options) {
                PolicySet s;
                if (sval != PortScope::DstOnly) {
                    FieldPolicy p;
                    p.field = FieldId::SrcPort;
                    p.option = oval;
                    p.scope.port_scope = sval;
                    s.entries.push_back(p);
                }
                if (sval != PortScope::SrcOnly) {
                    FieldPolicy p;
                    p.field = FieldId::DstPort;
                    p.option = oval;
                    p.scope.port_scope = sval;
                    s.entries.push_back(p);
                }
                out.push_back({std::string("ports/") + sname + "/" + oname, std::move(s)});
            }
    }

    // seq and window
    {
        const std::pair<const char*, OptionKind> seq_opts[] = {
            {"black_marker", OptionKind::BlackMarker},
            {"pure_randomization", OptionKind::PureRandom},
            {"keyed_randomization", OptionKind::KeyedRandom},
            {"grouping", OptionKind::Grouping},
        };
        for (const auto& [oname, oval] : seq_opts) {
            FieldPolicy p;
            p.field = FieldId::SeqNumber;
            p.option = oval;
            out.push_back({std::string("seq/all/") + oname, single(p)});
        }
        const std::pair<const char*, OptionKind> win_opts[] = {
            {"black_marker", OptionKind::BlackMarker},
            {"pure_randomization", OptionKind::PureRandom},
            {"keyed_randomization", OptionKind::KeyedRandom},
            {"bilateral_classification", OptionKind::Bilateral},
            {"grouping", OptionKind::Grouping},
        };
        for (const auto& [oname, oval] : win_opts) {
            FieldPolicy p;
            p.field = FieldId::WindowSize;
            p.option = oval;
            out.push_back({std::string("window/all/") + oname, single(p)});
        }
    }

    // tcp flags: whole byte, each flag, two group masks, randomizations
    {
        auto flags_entry = [&](OptionKind opt, uint8_t mask) {
            FieldPolicy p;
            p.field = FieldId::TcpFlags;
            p.option = opt;
            p.flag_mask = mask;
            return p;
        };
        out.push_back({"tcpflags/all/black_marker",
                       single(flags_entry(OptionKind::BlackMarker, 0))});
        const std::pair<const char*, uint8_t> bits[] = {
            {"urg", kFlagUrg}, {"ack", kFlagAck}, {"psh", kFlagPsh},
            {"rst", kFlagRst}, {"syn", kFlagSyn}, {"fin", kFlagFin},
        };
        for (const auto& [bname, bit] : bits)
            out.push_back({std::string("tcpflags/all/black_marker/") + bname,
                           single(flags_entry(OptionKind::BlackMarker, bit))});
        out.push_back({"tcpflags/all/grouping/rst_syn_fin",
                       single(flags_entry(OptionKind::Grouping, kMaskRstSynFin))});
        out.push_back({"tcpflags/all/grouping/urg_ack_psh",
                       single(flags_entry(OptionKind::Grouping, kMaskUrgAckPsh))});
        out.push_back({"tcpflags/all/pure_randomization",
                       single(flags_entry(OptionKind::PureRandom, 0))});
        out.push_back({"tcpflags/all/keyed_randomization",
                       single(flags_entry(OptionKind::KeyedRandom, 0))});
    }

    // timestamp
    {
        auto ts_entry = [&](OptionKind opt, TsMode mode) {
            FieldPolicy p;
            p.field = FieldId::TimeStamp;
            p.option = opt;
            p.ts.mode = mode;
            return p;
        };
        out.push_back({"timestamp/all/black_marker",
                       single(ts_entry(OptionKind::BlackMarker, TsMode::BlackMarker))});
        out.push_back({"timestamp/all/annihilate/sec",
                       single(ts_entry(OptionKind::Annihilate, TsMode::AnnihilateSec))});
        out.push_back({"timestamp/all/annihilate/usec",
                       single(ts_entry(OptionKind::Annihilate, TsMode::AnnihilateUsec))});
        out.push_back({"timestamp/all/truncate",
                       single(ts_entry(OptionKind::Truncate, TsMode::Truncate))});
        out.push_back({"timestamp/all/enumerate",
                       single(ts_entry(OptionKind::Enumerate, TsMode::Enumerate))});
        out.push_back({"timestamp/all/random_shift",
                       single(ts_entry(OptionKind::Shift, TsMode::RandomShift))});
        out.push_back({"timestamp/all/pure_randomization",
                       single(ts_entry(OptionKind::PureRandom, TsMode::PureRandom))});
        out.push_back({"timestamp/all/keyed_randomization",
                       single(ts_entry(OptionKind::KeyedRandom, TsMode::KeyedRandom))});
    }

    return out;
}

}  // namespace pcapanon
