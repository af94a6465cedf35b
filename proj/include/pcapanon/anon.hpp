#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pcapanon/common.hpp"
#include "pcapanon/sha256.hpp"

namespace pcapanon {

struct EmptyKeyError : std::runtime_error {
    EmptyKeyError() : std::runtime_error("keyed randomization requires a nonempty key") {}
};

// Pigeonhole makes this unreachable through the public API; kept as a guard.
struct OutputSpaceExhaustedError : std::logic_error {
    OutputSpaceExhaustedError() : std::logic_error("randomization output space exhausted") {}
};

struct ShiftUnderflowError : std::runtime_error {
    explicit ShiftUnderflowError(const std::string& what) : std::runtime_error(what) {}
};

// Every value of the field becomes one predefined constant.
inline uint64_t black_marker(uint64_t v, unsigned width, uint64_t constant = 0) {
    if (v > width_mask(width)) throw ValueOverflowError(v, width);
    if (constant > width_mask(width)) throw ValueOverflowError(constant, width);
    return constant;
}

// Per-session random permutation, built lazily: each unseen input gets a
// fresh output drawn uniformly from the outputs not yet assigned, so the
// observed mapping is always injective and stable within the session.
class RandSession {
  public:
    explicit RandSession(unsigned width) : RandSession(width, std::random_device{}()) {}

    RandSession(unsigned width, uint64_t seed) : width_(width), rng_(seed) {}

    uint64_t map(uint64_t v) {
        if (v > width_mask(width_)) throw ValueOverflowError(v, width_);
        auto it = table_.find(v);
        if (it != table_.end()) return it->second;
        const uint64_t mask = width_mask(width_);
        if (width_ < 64 && used_.size() > mask) throw OutputSpaceExhaustedError();
        std::uniform_int_distribution<uint64_t> dist(0, mask);
        uint64_t out;
        do {
            out = dist(rng_);
        } while (used_.count(out));
        used_.insert(out);
        table_.emplace(v, out);
        return out;
    }

    unsigned width() const { return width_; }
    size_t mappings() const { return table_.size(); }

  private:
    unsigned width_;
    std::mt19937_64 rng_;
    std::unordered_map<uint64_t, uint64_t> table_;
    std::unordered_set<uint64_t> used_;
};

// Keyed hash of the value's canonical 8-byte big-endian encoding, truncated
// to the field width. Deterministic across runs and traces for one key;
// collisions possible (not a permutation).
inline uint64_t keyed_randomize(std::span<const uint8_t> key, uint64_t v, unsigned width) {
    if (key.empty()) throw EmptyKeyError();
    if (v > width_mask(width)) throw ValueOverflowError(v, width);
    uint8_t msg[8];
    for (int i = 7; i >= 0; --i) {
        msg[i] = uint8_t(v & 0xFF);
        v >>= 8;
    }
    auto digest = hmac_sha256(key, std::span<const uint8_t>(msg, sizeof msg));
    uint64_t out = 0;
    for (size_t i = digest.size() - 8; i < digest.size(); ++i) out = (out << 8) | digest[i];
    return out & width_mask(width);
}

// Two-class replacement: a predicate splits the domain, each class collapses
// to one representative chosen from inside it (so the map is idempotent).
struct BilateralSpec {
    bool (*is_low)(uint64_t);
    uint64_t low_rep;
    uint64_t high_rep;
};

inline uint64_t bilateral_classify(uint64_t v, const BilateralSpec& spec) {
    return spec.is_low(v) ? spec.low_rep : spec.high_rep;
}

struct Bucket {
    uint64_t lo;  // inclusive
    uint64_t hi;  // inclusive
    uint64_t rep;
};

struct GroupingSpec {
    std::vector<Bucket> buckets;  // disjoint, ascending, covering the domain
};

inline uint64_t group_value(uint64_t v, const GroupingSpec& g) {
    for (const auto& b : g.buckets)
        if (v >= b.lo && v <= b.hi) return b.rep;
    throw std::logic_error("grouping buckets do not cover value " + std::to_string(v));
}

// Catalog sanity helper: buckets ascend without gaps or overlap, cover
// [0, 2^width − 1], and each representative sits inside its bucket.
inline bool grouping_covers(const GroupingSpec& g, unsigned width) {
    if (g.buckets.empty()) return false;
    uint64_t expect = 0;
    for (size_t i = 0; i < g.buckets.size(); ++i) {
        const auto& b = g.buckets[i];
        if (b.lo != expect || b.hi < b.lo) return false;
        if (b.rep < b.lo || b.rep > b.hi) return false;
        if (b.hi == width_mask(width)) return i + 1 == g.buckets.size();
        expect = b.hi + 1;
    }
    return false;
}

// Flag-byte reductions: force the masked bits to zero, leave the rest.
inline uint64_t clear_bits(uint64_t v, uint64_t mask) { return v & ~mask; }

// ---- timestamp series transforms ----

struct TsPair {
    uint32_t sec = 0;
    uint32_t usec = 0;
    bool operator==(const TsPair&) const = default;
};

enum class TsMode {
    BlackMarker,
    AnnihilateSec,   // zero the seconds unit
    AnnihilateUsec,  // zero the microseconds unit
    Truncate,
    Enumerate,
    RandomShift,
    PureRandom,
    KeyedRandom,
};

enum class ShiftPolicy { Redraw, Clamp };

struct TsOptions {
    TsMode mode = TsMode::BlackMarker;
    uint32_t truncate_gran = 60;      // seconds
    int64_t shift_min = -31536000;    // one year, seconds
    int64_t shift_max = 31536000;
    bool operator==(const TsOptions&) const = default;
};

// Applies one transform to a whole file-ordered series. RandomShift draws a
// single whole-second offset per call (per trace); Redraw samples uniformly
// over the offsets that keep every shifted second inside [0, 2^32−1], Clamp
// draws from the configured range and clamps into that feasible band. Pure
// and keyed randomization treat sec‖usec as one 64-bit value, so ordering
// (and microsecond validity) is deliberately destroyed.
inline std::vector<TsPair> ts_transform(const TsOptions& opt, std::span<const TsPair> in,
                                        std::mt19937_64& rng,
                                        ShiftPolicy underflow = ShiftPolicy::Redraw,
                                        std::span<const uint8_t> key = {}) {
    std::vector<TsPair> out;
    out.reserve(in.size());
    switch (opt.mode) {
        case TsMode::BlackMarker:
            out.assign(in.size(), TsPair{0, 0});
            break;
        case TsMode::AnnihilateSec:
            for (auto p : in) out.push_back({0, p.usec});
            break;
        case TsMode::AnnihilateUsec:
            for (auto p : in) out.push_back({p.sec, 0});
            break;
        case TsMode::Truncate: {
            uint32_t g = opt.truncate_gran ? opt.truncate_gran : 1;
            for (auto p : in) out.push_back({p.sec - p.sec % g, 0});
            break;
        }
        case TsMode::Enumerate:
            for (uint64_t i = 0; i < in.size(); ++i)
                out.push_back({uint32_t(i / 1000000), uint32_t(i % 1000000)});
            break;
        case TsMode::RandomShift: {
            if (in.empty()) break;
            uint32_t lo = in[0].sec, hi = in[0].sec;
            for (auto p : in) {
                lo = std::min(lo, p.sec);
                hi = std::max(hi, p.sec);
            }
            // offsets keeping lo+δ ≥ 0 and hi+δ ≤ 2^32−1
            int64_t feas_min = -int64_t(lo);
            int64_t feas_max = int64_t(UINT32_MAX) - int64_t(hi);
            int64_t delta;
            if (underflow == ShiftPolicy::Redraw) {
                // uniform over the intersection of configured and feasible
                int64_t dmin = std::max(opt.shift_min, feas_min);
                int64_t dmax = std::min(opt.shift_max, feas_max);
                if (dmin > dmax)
                    throw ShiftUnderflowError("no shift in [" + std::to_string(opt.shift_min) +
                                              ", " + std::to_string(opt.shift_max) +
                                              "] keeps all timestamps in range");
                delta = std::uniform_int_distribution<int64_t>(dmin, dmax)(rng);
            } else {
                // draw from the configured range, then snap into the feasible
                // band — which is never empty, so clamp mode never throws
                delta = std::uniform_int_distribution<int64_t>(opt.shift_min, opt.shift_max)(rng);
                delta = std::clamp(delta, feas_min, feas_max);
            }
            for (auto p : in) out.push_back({uint32_t(int64_t(p.sec) + delta), p.usec});
            break;
        }
        case TsMode::PureRandom: {
            RandSession session(64, rng());
            for (auto p : in) {
                uint64_t v = session.map((uint64_t(p.sec) << 32) | p.usec);
                out.push_back({uint32_t(v >> 32), uint32_t(v & 0xFFFFFFFF)});
            }
            break;
        }
        case TsMode::KeyedRandom:
            for (auto p : in) {
                uint64_t v = keyed_randomize(key, (uint64_t(p.sec) << 32) | p.usec, 64);
                out.push_back({uint32_t(v >> 32), uint32_t(v & 0xFFFFFFFF)});
            }
            break;
    }
    return out;
}

}  // namespace pcapanon
