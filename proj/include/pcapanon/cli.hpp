#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "pcapanon/harness.hpp"
#include "pcapanon/pcap.hpp"
#include "pcapanon/policy.hpp"
#include "pcapanon/rewrite.hpp"
#include "pcapanon/toy_ids.hpp"
#include "pcapanon/validate.hpp"

namespace pcapanon {

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Key material is the file's raw bytes, verbatim — no trimming, no decoding.
inline std::vector<uint8_t> load_key_file(const std::string& path) {
    std::string text = read_text_file(path);
    return std::vector<uint8_t>(text.begin(), text.end());
}

// Value distribution of one field over a trace. Keys are (value, 0) for
// packet fields and (sec, usec) for timestamps; absent counts packets
// lacking the field.
struct FieldHistogram {
    std::map<std::pair<uint64_t, uint64_t>, uint64_t> counts;
    uint64_t absent = 0;
};

inline FieldHistogram field_histogram(const TraceFile& trace, FieldId field) {
    FieldHistogram h;
    for (const auto& rec : trace.records) {
        if (field == FieldId::TimeStamp) {
            ++h.counts[{rec.ts_sec, rec.ts_usec}];
            continue;
        }
        PacketView view = dissect_packet(rec, trace.header.linktype);
        auto loc = locate_field(view, rec, field);
        if (!loc) {
            ++h.absent;
            continue;
        }
        ++h.counts[{read_field(rec, *loc), 0}];
    }
    return h;
}

inline std::optional<FieldId> field_id_from_name(const std::string& name) {
    for (FieldId f : kAllFields)
        if (name == field_name(f)) return f;
    return std::nullopt;
}

// "toy:RULES_PATH" | "command:TEMPLATE" | "alertlog:TEMPLATE" (+ pattern)
inline IdsAdapter parse_adapter_spec(const std::string& spec, const std::string& pattern = "") {
    auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("adapter spec must be kind:payload, got '" + spec + "'");
    std::string kind = spec.substr(0, colon);
    std::string payload = spec.substr(colon + 1);
    if (kind == "toy") return make_toy_adapter(read_text_file(payload));
    if (kind == "command") return make_command_adapter(payload);
    if (kind == "alertlog") return make_alertlog_adapter(payload, pattern);
    throw std::invalid_argument("unknown adapter kind '" + kind +
                                "' (expected toy, command or alertlog)");
}

namespace detail {

inline void print_findings(const std::vector<Finding>& findings, std::ostream& out) {
    for (const auto& f : findings)
        out << "finding: " << finding_kind_name(f.kind) << " record " << f.record_index << ": "
            << f.detail << "\n";
    out << "findings: " << findings.size() << "\n";
}

inline void print_report(const RewriteReport& rep, std::ostream& out) {
    out << "packets: " << rep.packets_total << " total, " << rep.packets_modified
        << " modified\n";
    out << "checksums fixed: " << rep.checksums_fixed << "\n";
    if (rep.udp_lengths_normalized)
        out << "udp lengths normalized: " << rep.udp_lengths_normalized << "\n";
    for (FieldId f : kAllFields)
        if (rep.absent(f))
            out << "absent: " << field_name(f) << " on " << rep.absent(f) << " packets\n";
    if (!rep.findings.empty()) print_findings(rep.findings, out);
}

inline std::string render_ts_value(uint64_t sec, uint64_t usec) {
    char buf[32];
    snprintf(buf, sizeof buf, "%llu.%06llu", (unsigned long long)sec, (unsigned long long)usec);
    return buf;
}

// the catalog enumerates 67 experiments; external tallies cite 91 runs whose
// extra composition is not decomposable from the published option lists
inline constexpr const char* kGridNote =
    "note: 67 experiments enumerated; an external tally reports 91 single-field runs, and the "
    "24 beyond this catalog do not decompose into enumerable options";

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const BadMagicError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const TruncatedRecordError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace detail

// All subcommand logic lives here so tests can drive the exact CLI surface
// in-process. Exit codes: 0 success, 1 parse/validation, 2 IO.
inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"multi-level packet-trace field anonymizer and IDS alarm tradeoff harness"};
    app.require_subcommand(1);

    // anonymize
    auto* anon = app.add_subcommand("anonymize", "apply an anonymization policy to a trace");
    std::string an_in, an_out, an_policy, an_key;
    uint64_t an_seed = 0;
    bool an_no_fix = false, an_norm_udp = false, an_clamp = false, an_multi = false;
    anon->add_option("--in", an_in, "input pcap")->required();
    anon->add_option("--out", an_out, "output pcap")->required();
    anon->add_option("--policy", an_policy, "policy file")->required();
    anon->add_option("--key-file", an_key, "key bytes for keyed randomization");
    auto* an_seed_opt = anon->add_option("--seed", an_seed, "fixed seed for reproducible runs");
    anon->add_flag("--no-fix-checksums", an_no_fix, "leave checksums as found");
    anon->add_flag("--normalize-udp-length", an_norm_udp,
                   "recompute UDP length fields from IP total length");
    anon->add_flag("--shift-clamp", an_clamp,
                   "clamp an out-of-range time shift instead of redrawing");
    anon->add_flag("--multi-field", an_multi, "allow policies covering multiple fields");

    // inspect
    auto* inspect = app.add_subcommand("inspect", "show field histograms or trace findings");
    std::string in_in, in_fields;
    inspect->add_option("--in", in_in, "input pcap")->required();
    inspect->add_option("--fields", in_fields, "comma-separated field names");

    // policy-check
    auto* pcheck = app.add_subcommand("policy-check", "parse and validate a policy file");
    std::string pc_policy;
    bool pc_multi = false;
    pcheck->add_option("--policy", pc_policy, "policy file")->required();
    pcheck->add_flag("--multi-field", pc_multi, "allow policies covering multiple fields");

    // grid
    auto* grid = app.add_subcommand("grid", "write one policy file per catalog experiment");
    std::string gr_out;
    grid->add_option("--out", gr_out, "output directory")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "run experiments over a corpus and report");
    std::string be_corpus, be_policy, be_adapter, be_pattern, be_out, be_key;
    bool be_grid = false, be_no_fix = false, be_norm_udp = false, be_clamp = false,
         be_multi = false;
    uint64_t be_seed = 0;
    unsigned be_jobs = 1;
    bench->add_option("--corpus", be_corpus, "directory of .pcap files")->required();
    bench->add_flag("--grid", be_grid, "run every catalog experiment");
    bench->add_option("--policy", be_policy, "run one policy file instead of the grid");
    bench->add_option("--adapter", be_adapter, "toy:RULES | command:TMPL | alertlog:TMPL")
        ->required();
    bench->add_option("--pattern", be_pattern, "alertlog line regex (default: non-empty lines)");
    bench->add_option("--out", be_out, "report directory")->required();
    bench->add_option("--jobs", be_jobs, "parallel files (default 1)");
    auto* be_seed_opt = bench->add_option("--seed", be_seed, "fixed seed for reproducible runs");
    bench->add_option("--key-file", be_key, "key bytes for keyed randomization");
    bench->add_flag("--no-fix-checksums", be_no_fix, "leave checksums as found");
    bench->add_flag("--normalize-udp-length", be_norm_udp,
                    "recompute UDP length fields from IP total length");
    bench->add_flag("--shift-clamp", be_clamp,
                    "clamp an out-of-range time shift instead of redrawing");
    bench->add_flag("--multi-field", be_multi, "allow policies covering multiple fields");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (anon->parsed()) {
        return detail::guarded([&] {
            TraceFile trace = read_trace_file(an_in);
            PolicySet set = parse_policy(read_text_file(an_policy));
            if (!an_multi && !is_single_field(set))
                throw std::invalid_argument(
                    "policy covers multiple fields; pass --multi-field to allow");
            RewriteConfig cfg;
            cfg.fix_checksums = !an_no_fix;
            cfg.normalize_udp_length = an_norm_udp;
            cfg.shift_underflow = an_clamp ? ShiftPolicy::Clamp : ShiftPolicy::Redraw;
            if (an_seed_opt->count() > 0) cfg.seed = an_seed;
            if (!an_key.empty()) cfg.key = load_key_file(an_key);
            auto [out_trace, report] = apply_policy(trace, set, cfg);
            write_trace_file(out_trace, an_out);
            detail::print_report(report, std::cout);
            return 0;
        });
    }

    if (inspect->parsed()) {
        return detail::guarded([&] {
            TraceFile trace = read_trace_file(in_in);
            if (in_fields.empty()) {
                detail::print_findings(validate_trace(trace), std::cout);
                return 0;
            }
            std::istringstream list(in_fields);
            std::string name;
            while (std::getline(list, name, ',')) {
                name = std::string(detail::trim(name));
                auto field = field_id_from_name(name);
                if (!field) throw std::invalid_argument("unknown field '" + name + "'");
                FieldHistogram h = field_histogram(trace, *field);
                std::cout << name << ":\n";
                for (const auto& [key, count] : h.counts) {
                    if (*field == FieldId::TimeStamp)
                        std::cout << "  " << detail::render_ts_value(key.first, key.second);
                    else
                        std::cout << "  " << key.first;
                    std::cout << ": " << count << "\n";
                }
                if (h.absent) std::cout << "  absent: " << h.absent << "\n";
            }
            return 0;
        });
    }

    if (pcheck->parsed()) {
        return detail::guarded([&] {
            PolicySet set = parse_policy(read_text_file(pc_policy));
            if (!pc_multi && !is_single_field(set))
                throw std::invalid_argument(
                    "policy covers multiple fields; pass --multi-field to allow");
            std::cout << "ok: " << set.entries.size() << " entries\n";
            std::cout << render_policy(set);
            return 0;
        });
    }

    if (grid->parsed()) {
        return detail::guarded([&] {
            auto entries = generate_grid();
            std::filesystem::create_directories(gr_out);
            std::ofstream index(gr_out + "/index.txt");
            if (!index) throw std::ios_base::failure("cannot write " + gr_out + "/index.txt");
            for (const auto& entry : entries) {
                std::string path = gr_out + "/" + detail::sanitize_id(entry.id) + ".policy";
                std::ofstream out(path);
                if (!out) throw std::ios_base::failure("cannot write " + path);
                out << "# " << entry.id << "\n" << render_policy(entry.set);
                index << entry.id << "\n";
            }
            std::cout << entries.size() << " experiments written to " << gr_out << "\n";
            std::cout << detail::kGridNote << "\n";
            return 0;
        });
    }

    if (bench->parsed()) {
        return detail::guarded([&] {
            if (be_grid == !be_policy.empty())
                throw std::invalid_argument("pass exactly one of --grid or --policy");
            IdsAdapter adapter = parse_adapter_spec(be_adapter, be_pattern);

            std::vector<std::string> corpus;
            if (!std::filesystem::is_directory(be_corpus))
                throw std::ios_base::failure("corpus directory not found: " + be_corpus);
            for (const auto& e : std::filesystem::directory_iterator(be_corpus))
                if (e.is_regular_file() && e.path().extension() == ".pcap")
                    corpus.push_back(e.path().string());
            std::sort(corpus.begin(), corpus.end());
            if (corpus.empty())
                throw std::invalid_argument("corpus has no .pcap files: " + be_corpus);

            RewriteConfig cfg;
            cfg.fix_checksums = !be_no_fix;
            cfg.normalize_udp_length = be_norm_udp;
            cfg.shift_underflow = be_clamp ? ShiftPolicy::Clamp : ShiftPolicy::Redraw;
            if (be_seed_opt->count() > 0) cfg.seed = be_seed;
            if (!be_key.empty()) cfg.key = load_key_file(be_key);

            std::vector<std::pair<std::string, PolicySet>> experiments;
            if (be_grid) {
                for (auto& g : generate_grid()) experiments.emplace_back(g.id, std::move(g.set));
            } else {
                PolicySet set = parse_policy(read_text_file(be_policy));
                if (!be_multi && !is_single_field(set))
                    throw std::invalid_argument(
                        "policy covers multiple fields; pass --multi-field to allow");
                experiments.emplace_back(std::filesystem::path(be_policy).stem().string(),
                                         std::move(set));
            }

            std::filesystem::create_directories(be_out);
            BenchmarkCache cache;
            std::string cache_path = be_out + "/benchmark_cache.csv";
            cache.load(cache_path);

            std::vector<ExperimentResult> results;
            for (const auto& [id, set] : experiments) {
                ExperimentResult res = run_experiment(id, corpus, set, adapter, cfg, cache,
                                                      be_out + "/tmp", be_jobs);
                for (const auto& fr : res.files)
                    if (fr.status == FileResult::Status::Failed)
                        std::cerr << id << ": " << fr.file << " failed: " << fr.error << "\n";
                std::cout << id << ": n=" << res.stats.n << " excluded=" << res.stats.excluded
                          << " failed=" << res.stats.failed
                          << " mean=" << detail::fmt2(res.stats.mean)
                          << " stdev=" << detail::fmt2(res.stats.stdev)
                          << " min=" << detail::fmt2(res.stats.min)
                          << " max=" << detail::fmt2(res.stats.max) << "\n";
                results.push_back(std::move(res));
            }
            emit_reports(results, be_out);
            cache.save(cache_path);
            if (be_grid) std::cout << detail::kGridNote << "\n";
            return 0;
        });
    }

    return 1;  // unreachable with require_subcommand(1)
}

}  // namespace pcapanon
