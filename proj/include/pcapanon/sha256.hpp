#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>

#include "pcapanon/common.hpp"

namespace pcapanon {

// FIPS 180-4 SHA-256, self-contained so the library stays header-only.
class Sha256 {
public:
    static constexpr size_t kDigestSize = 32;
    static constexpr size_t kBlockSize = 64;

    Sha256() { reset(); }

    void reset() {
        state_ = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                  0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
        total_ = 0;
        buf_len_ = 0;
    }

    void update(std::span<const uint8_t> data) {
        total_ += data.size();
        size_t off = 0;
        if (buf_len_ > 0) {
            size_t take = std::min(kBlockSize - buf_len_, data.size());
            std::memcpy(buf_.data() + buf_len_, data.data(), take);
            buf_len_ += take;
            off = take;
            if (buf_len_ == kBlockSize) {
                compress(buf_.data());
                buf_len_ = 0;
            }
        }
        while (off + kBlockSize <= data.size()) {
            compress(data.data() + off);
            off += kBlockSize;
        }
        if (off < data.size()) {
            buf_len_ = data.size() - off;
            std::memcpy(buf_.data(), data.data() + off, buf_len_);
        }
    }

    void update(const void* data, size_t len) {
        update(std::span<const uint8_t>(static_cast<const uint8_t*>(data), len));
    }

    std::array<uint8_t, kDigestSize> finish() {
        uint64_t bit_len = total_ * 8;
        uint8_t pad[kBlockSize * 2] = {0x80};
        size_t rem = buf_len_;
        size_t pad_len = (rem < 56) ? (56 - rem) : (120 - rem);
        update(pad, pad_len);
        uint8_t len_be[8];
        for (int i = 0; i < 8; ++i) len_be[i] = uint8_t(bit_len >> (56 - 8 * i));
        update(len_be, 8);
        std::array<uint8_t, kDigestSize> out;
        for (int i = 0; i < 8; ++i) store_be32(out.data() + 4 * i, state_[i]);
        reset();
        return out;
    }

    static std::array<uint8_t, kDigestSize> digest(std::span<const uint8_t> data) {
        Sha256 h;
        h.update(data);
        return h.finish();
    }

private:
    static uint32_t rotr(uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

    void compress(const uint8_t* block) {
        static constexpr uint32_t k[64] = {
            0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
            0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
            0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
            0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
            0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
            0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
            0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
            0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
            0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
            0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
            0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};
        uint32_t w[64];
        for (int i = 0; i < 16; ++i) w[i] = load_be32(block + 4 * i);
        for (int i = 16; i < 64; ++i) {
            uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        uint32_t a = state_[0], b = state_[1], c = state_[2], d = state_[3];
        uint32_t e = state_[4], f = state_[5], g = state_[6], h = state_[7];
        for (int i = 0; i < 64; ++i) {
            uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            uint32_t ch = (e & f) ^ (~e & g);
            uint32_t t1 = h + s1 + ch + k[i] + w[i];
            uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            uint32_t t2 = s0 + maj;
            h = g;
            g = f;
            f = e;
            e = d + t1;
            d = c;
            c = b;
            b = a;
            a = t1 + t2;
        }
        state_[0] += a;
        state_[1] += b;
        state_[2] += c;
        state_[3] += d;
        state_[4] += e;
        state_[5] += f;
        state_[6] += g;
        state_[7] += h;
    }

    std::array<uint32_t, 8> state_;
    std::array<uint8_t, kBlockSize> buf_;
    uint64_t total_ = 0;
    size_t buf_len_ = 0;
};

// RFC 2104 HMAC over SHA-256.
inline std::array<uint8_t, Sha256::kDigestSize> hmac_sha256(std::span<const uint8_t> key,
                                                            std::span<const uint8_t> msg) {
    std::array<uint8_t, Sha256::kBlockSize> k = {};
    if (key.size() > Sha256::kBlockSize) {
        auto kd = Sha256::digest(key);
        std::memcpy(k.data(), kd.data(), kd.size());
    } else if (!key.empty()) {
        std::memcpy(k.data(), key.data(), key.size());
    }
    std::array<uint8_t, Sha256::kBlockSize> ipad, opad;
    for (size_t i = 0; i < Sha256::kBlockSize; ++i) {
        ipad[i] = k[i] ^ 0x36;
        opad[i] = k[i] ^ 0x5c;
    }
    Sha256 inner;
    inner.update(ipad);
    inner.update(msg);
    auto inner_digest = inner.finish();
    Sha256 outer;
    outer.update(opad);
    outer.update(inner_digest);
    return outer.finish();
}

inline std::string sha256_hex(std::span<const uint8_t> data) {
    auto d = Sha256::digest(data);
    return to_hex(d);
}

inline std::string sha256_hex(std::string_view s) {
    return sha256_hex(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
}

}  // namespace pcapanon
