#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "pcapanon/pcap.hpp"
#include "pcapanon/policy.hpp"
#include "pcapanon/rewrite.hpp"
#include "pcapanon/sha256.hpp"
#include "pcapanon/toy_ids.hpp"

namespace pcapanon {

struct AdapterFailure : std::runtime_error {
    explicit AdapterFailure(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroBenchmarkError : std::runtime_error {
    ZeroBenchmarkError() : std::runtime_error("benchmark alarm count is zero") {}
};

// Alarm counting seam. Toy runs in-process; Command shells out and reads one
// decimal integer from stdout; AlertLog shells out and counts matching lines
// of the log file the command was told to produce.
struct IdsAdapter {
    enum class Mode { Toy, Command, AlertLog };
    Mode mode = Mode::Toy;
    std::vector<ToyRule> rules;
    std::string rules_text;        // canonical digest input for Toy
    std::string command_template;  // contains {input}; AlertLog also {log}
    std::string pattern;           // AlertLog line regex; empty = any non-empty line

    std::string digest() const {
        std::string blob;
        switch (mode) {
            case Mode::Toy: blob = "toy\n" + rules_text; break;
            case Mode::Command: blob = "command\n" + command_template; break;
            case Mode::AlertLog: blob = "alertlog\n" + command_template + "\n" + pattern; break;
        }
        return sha256_hex(blob);
    }
};

namespace detail {

inline size_t count_occurrences(const std::string& s, const std::string& needle) {
    size_t n = 0;
    for (size_t pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
    return n;
}

inline std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

inline std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    out += "'";
    return out;
}

// stdout text plus exit status of a /bin/sh command line
inline std::pair<std::string, int> run_capture(const std::string& cmd) {
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) throw AdapterFailure("cannot start adapter command: " + cmd);
    std::string out;
    char buf[4096];
    size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
    int status = ::pclose(pipe);
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {out, code};
}

inline std::string temp_file_path(const std::string& stem) {
    static std::atomic<uint64_t> counter{0};
    auto dir = std::filesystem::temp_directory_path();
    return (dir / (stem + "_" + std::to_string(::getpid()) + "_" +
                   std::to_string(counter.fetch_add(1))))
        .string();
}

}  // namespace detail

inline IdsAdapter make_toy_adapter(const std::string& rules_text) {
    IdsAdapter a;
    a.mode = IdsAdapter::Mode::Toy;
    a.rules = parse_toy_rules(rules_text);
    a.rules_text = rules_text;
    return a;
}

inline IdsAdapter make_command_adapter(const std::string& tmpl) {
    if (detail::count_occurrences(tmpl, "{input}") != 1)
        throw std::invalid_argument("command template must contain {input} exactly once");
    IdsAdapter a;
    a.mode = IdsAdapter::Mode::Command;
    a.command_template = tmpl;
    return a;
}

inline IdsAdapter make_alertlog_adapter(const std::string& tmpl, const std::string& pattern = "") {
    if (detail::count_occurrences(tmpl, "{input}") != 1)
        throw std::invalid_argument("alertlog template must contain {input} exactly once");
    if (detail::count_occurrences(tmpl, "{log}") == 0)
        throw std::invalid_argument("alertlog template must contain {log}");
    IdsAdapter a;
    a.mode = IdsAdapter::Mode::AlertLog;
    a.command_template = tmpl;
    a.pattern = pattern;
    return a;
}

inline uint64_t count_alarms(const IdsAdapter& adapter, const std::string& trace_path) {
    switch (adapter.mode) {
        case IdsAdapter::Mode::Toy:
            return toy_count_alarms(adapter.rules, read_trace_file(trace_path));
        case IdsAdapter::Mode::Command: {
            std::string cmd = detail::replace_all(adapter.command_template, "{input}",
                                                  detail::shell_quote(trace_path));
            auto [out, code] = detail::run_capture(cmd);
            if (code != 0)
                throw AdapterFailure("adapter exited with status " + std::to_string(code));
            std::string t{detail::trim(out)};
            if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
                throw AdapterFailure("adapter stdout is not a decimal integer: '" + t + "'");
            return std::stoull(t);
        }
        case IdsAdapter::Mode::AlertLog: {
            std::string log_path = detail::temp_file_path("alerts");
            std::string cmd = detail::replace_all(adapter.command_template, "{input}",
                                                  detail::shell_quote(trace_path));
            cmd = detail::replace_all(cmd, "{log}", detail::shell_quote(log_path));
            auto [out, code] = detail::run_capture(cmd);
            (void)out;
            if (code != 0) {
                std::filesystem::remove(log_path);
                throw AdapterFailure("adapter exited with status " + std::to_string(code));
            }
            std::ifstream log(log_path);
            if (!log) {
                std::filesystem::remove(log_path);
                throw AdapterFailure("adapter produced no log file");
            }
            uint64_t hits = 0;
            std::string line;
            std::optional<std::regex> re;
            if (!adapter.pattern.empty()) re.emplace(adapter.pattern);
            while (std::getline(log, line)) {
                if (re ? std::regex_search(line, *re) : !line.empty()) ++hits;
            }
            log.close();
            std::filesystem::remove(log_path);
            return hits;
        }
    }
    throw std::logic_error("unreachable adapter mode");
}

// The tradeoff metric: percent deviation of the anonymized alarm count from
// the file's own benchmark.
inline double percent_diff(uint64_t benchmark, uint64_t anonymized) {
    if (benchmark == 0) throw ZeroBenchmarkError();
    return 100.0 * (double(anonymized) - double(benchmark)) / double(benchmark);
}

struct AlarmStats {
    size_t n = 0;         // files included
    size_t excluded = 0;  // zero-benchmark files
    size_t failed = 0;    // adapter failures
    std::optional<double> mean;
    std::optional<double> stdev;  // sample (n−1); absent when n < 2
    std::optional<double> min;
    std::optional<double> max;
};

inline AlarmStats aggregate(const std::vector<double>& diffs) {
    AlarmStats s;
    s.n = diffs.size();
    double mean = 0.0, m2 = 0.0;
    size_t k = 0;
    for (double d : diffs) {  // Welford's incremental moments
        ++k;
        double delta = d - mean;
        mean += delta / double(k);
        m2 += delta * (d - mean);
        if (!s.min || d < *s.min) s.min = d;
        if (!s.max || d > *s.max) s.max = d;
    }
    if (k >= 1) s.mean = mean;
    if (k >= 2) s.stdev = std::sqrt(m2 / double(k - 1));
    return s;
}

// Benchmarks are content-addressed: (trace digest, adapter digest) → alarms,
// so a grid of experiments pays the benchmark cost once per file.
class BenchmarkCache {
  public:
    void load(const std::string& path) {
        std::ifstream in(path);
        if (!in) return;  // cold cache
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            std::istringstream row(line);
            std::string fd, ad, n;
            if (!std::getline(row, fd, ',') || !std::getline(row, ad, ',') ||
                !std::getline(row, n, ','))
                continue;
            try {
                std::lock_guard<std::mutex> lk(mu_);
                counts_[fd + ":" + ad] = std::stoull(n);
            } catch (const std::exception&) {
            }
        }
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::ios_base::failure("cannot write benchmark cache: " + path);
        out << "file_digest,adapter_digest,alarms\n";
        std::lock_guard<std::mutex> lk(mu_);
        for (const auto& [key, count] : counts_) {
            auto colon = key.find(':');
            out << key.substr(0, colon) << "," << key.substr(colon + 1) << "," << count << "\n";
        }
    }

    uint64_t get_or_compute(const std::string& file_path, const IdsAdapter& adapter) {
        std::string key = file_digest(file_path) + ":" + adapter.digest();
        {
            std::lock_guard<std::mutex> lk(mu_);
            auto it = counts_.find(key);
            if (it != counts_.end()) return it->second;
        }
        uint64_t count = count_alarms(adapter, file_path);
        std::lock_guard<std::mutex> lk(mu_);
        counts_[key] = count;
        return count;
    }

    size_t size() const {
        std::lock_guard<std::mutex> lk(mu_);
        return counts_.size();
    }

    static std::string file_digest(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::ios_base::failure("cannot read " + path);
        Sha256 h;
        char buf[65536];
        while (in.read(buf, sizeof buf) || in.gcount() > 0)
            h.update(buf, size_t(in.gcount()));
        return to_hex(h.finish());
    }

  private:
    std::map<std::string, uint64_t> counts_;
    mutable std::mutex mu_;
};

struct FileResult {
    enum class Status { Ok, Excluded, Failed };
    std::string file;
    uint64_t benchmark = 0;
    uint64_t alarms = 0;
    std::optional<double> pct;
    Status status = Status::Ok;
    std::string error;
};

struct ExperimentResult {
    std::string id;
    std::vector<FileResult> files;
    AlarmStats stats;
};

inline const char* file_status_name(FileResult::Status s) {
    switch (s) {
        case FileResult::Status::Ok: return "ok";
        case FileResult::Status::Excluded: return "excluded";
        case FileResult::Status::Failed: return "failed";
    }
    return "?";
}

namespace detail {

inline std::string sanitize_id(const std::string& id) {
    std::string out = id;
    for (char& c : out)
        if (c == '/' || c == '\\' || c == ':') c = '_';
    return out;
}

}  // namespace detail

// One experiment over a corpus: per file, anonymize to a scratch trace,
// count alarms, take the percent deviation against that file's benchmark.
// Files are independent replications; jobs > 1 processes them in parallel.
// A per-file failure marks that row failed and the run continues.
inline ExperimentResult run_experiment(const std::string& id,
                                       const std::vector<std::string>& corpus,
                                       const PolicySet& policy, const IdsAdapter& adapter,
                                       const RewriteConfig& cfg, BenchmarkCache& cache,
                                       const std::string& tmp_dir, unsigned jobs = 1) {
    ExperimentResult result;
    result.id = id;
    result.files.resize(corpus.size());
    std::filesystem::create_directories(tmp_dir);

    auto process = [&](size_t i) {
        FileResult& r = result.files[i];
        r.file = corpus[i];
        std::string tmp = tmp_dir + "/" + detail::sanitize_id(id) + "_" + std::to_string(i) +
                          ".pcap";
        try {
            r.benchmark = cache.get_or_compute(corpus[i], adapter);
            TraceFile trace = read_trace_file(corpus[i]);
            RewriteConfig file_cfg = cfg;
            if (cfg.seed)  // distinct stream per file, still reproducible
                file_cfg.seed = *cfg.seed ^ (0x9E3779B97F4A7C15ULL * uint64_t(i + 1));
            auto [anon, rep] = apply_policy(trace, policy, file_cfg);
            (void)rep;
            write_trace_file(anon, tmp);
            r.alarms = count_alarms(adapter, tmp);
            std::filesystem::remove(tmp);
            if (r.benchmark == 0) {
                r.status = FileResult::Status::Excluded;
            } else {
                r.pct = percent_diff(r.benchmark, r.alarms);
                r.status = FileResult::Status::Ok;
            }
        } catch (const std::exception& e) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            r.status = FileResult::Status::Failed;
            r.error = e.what();
        }
    };

    if (jobs <= 1) {
        for (size_t i = 0; i < corpus.size(); ++i) process(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        unsigned width = unsigned(std::min<size_t>(jobs, corpus.size()));
        for (unsigned t = 0; t < width; ++t)
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < corpus.size(); i = next.fetch_add(1))
                    process(i);
            });
        for (auto& t : pool) t.join();
    }

    std::vector<double> diffs;
    size_t excluded = 0, failed = 0;
    for (const auto& r : result.files) {
        switch (r.status) {
            case FileResult::Status::Ok: diffs.push_back(*r.pct); break;
            case FileResult::Status::Excluded: ++excluded; break;
            case FileResult::Status::Failed: ++failed; break;
        }
    }
    result.stats = aggregate(diffs);
    result.stats.excluded = excluded;
    result.stats.failed = failed;
    return result;
}

namespace detail {

inline std::string fmt2(std::optional<double> v) {
    if (!v) return "";
    char buf[64];
    snprintf(buf, sizeof buf, "%.2f", *v);
    return buf;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

}  // namespace detail

// Three report shapes: one aggregate row per experiment, one per-file table
// per experiment, and a flat scatter of (experiment, file, pct) points.
inline void emit_reports(const std::vector<ExperimentResult>& results,
                         const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/per_file");

    std::ofstream agg(out_dir + "/aggregate.csv");
    if (!agg) throw std::ios_base::failure("cannot write " + out_dir + "/aggregate.csv");
    agg << "field,scope,option,variant,n,excluded,mean,stdev,min,max\n";
    for (const auto& res : results) {
        std::string parts[4];
        size_t start = 0;
        for (int p = 0; p < 4; ++p) {
            if (start > res.id.size()) break;
            size_t slash = res.id.find('/', start);
            parts[p] = res.id.substr(start, slash == std::string::npos ? std::string::npos
                                                                       : slash - start);
            if (slash == std::string::npos) break;
            start = slash + 1;
        }
        agg << detail::csv_escape(parts[0]) << "," << detail::csv_escape(parts[1]) << ","
            << detail::csv_escape(parts[2]) << "," << detail::csv_escape(parts[3]) << ","
            << res.stats.n << "," << res.stats.excluded << "," << detail::fmt2(res.stats.mean)
            << "," << detail::fmt2(res.stats.stdev) << "," << detail::fmt2(res.stats.min) << ","
            << detail::fmt2(res.stats.max) << "\n";

        std::string pf_path = out_dir + "/per_file/" + detail::sanitize_id(res.id) + ".csv";
        std::ofstream pf(pf_path);
        if (!pf) throw std::ios_base::failure("cannot write " + pf_path);
        pf << "file,benchmark,alarms,pct_diff,status\n";
        for (const auto& r : res.files)
            pf << detail::csv_escape(r.file) << "," << r.benchmark << "," << r.alarms << ","
               << detail::fmt2(r.pct) << "," << file_status_name(r.status) << "\n";
    }

    std::ofstream scatter(out_dir + "/scatter.csv");
    if (!scatter) throw std::ios_base::failure("cannot write " + out_dir + "/scatter.csv");
    scatter << "experiment,file,pct_diff\n";
    for (const auto& res : results)
        for (const auto& r : res.files)
            if (r.status == FileResult::Status::Ok)
                scatter << detail::csv_escape(res.id) << "," << detail::csv_escape(r.file) << ","
                        << detail::fmt2(r.pct) << "\n";
}

}  // namespace pcapanon
