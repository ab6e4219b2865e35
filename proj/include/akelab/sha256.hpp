#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include "akelab/bytes.hpp"

namespace akelab {

/// Plain SHA-256. The library needs one fixed, strong, unkeyed compression
/// function for key expansion, mock KEM secrets, the keyed-hash MAC, and the
/// deterministic KDF mode; the C++ standard library offers none, so the
/// compression is implemented here and pinned by the usual test vectors.
class Sha256 {
public:
    Sha256() { reset(); }

    void reset() {
        state_ = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                  0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
        buffer_len_ = 0;
        total_bits_ = 0;
    }

    void update(const uint8_t* data, size_t len) {
        total_bits_ += uint64_t(len) * 8;
        while (len > 0) {
            size_t take = std::min(len, size_t(64) - buffer_len_);
            std::memcpy(buffer_.data() + buffer_len_, data, take);
            buffer_len_ += take;
            data += take;
            len -= take;
            if (buffer_len_ == 64) {
                compress(buffer_.data());
                buffer_len_ = 0;
            }
        }
    }

    void update(const Bytes& data) { update(data.data(), data.size()); }

    Bytes finish() {
        uint64_t bits = total_bits_;
        uint8_t pad = 0x80;
        update(&pad, 1);
        uint8_t zero = 0;
        while (buffer_len_ != 56) update(&zero, 1);
        Bytes len_be = be64(bits);
        total_bits_ = bits; // length field does not count
        update(len_be.data(), 8);
        Bytes out(32);
        for (int i = 0; i < 8; ++i) {
            out[4 * i + 0] = uint8_t(state_[i] >> 24);
            out[4 * i + 1] = uint8_t(state_[i] >> 16);
            out[4 * i + 2] = uint8_t(state_[i] >> 8);
            out[4 * i + 3] = uint8_t(state_[i]);
        }
        return out;
    }

private:
    static uint32_t rotr(uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

    void compress(const uint8_t* block) {
        static constexpr std::array<uint32_t, 64> K = {
            0x428a2f98u, 0x71374491u, 0xb5c0fbcfu, 0xe9b5dba5u, 0x3956c25bu, 0x59f111f1u,
            0x923f82a4u, 0xab1c5ed5u, 0xd807aa98u, 0x12835b01u, 0x243185beu, 0x550c7dc3u,
            0x72be5d74u, 0x80deb1feu, 0x9bdc06a7u, 0xc19bf174u, 0xe49b69c1u, 0xefbe4786u,
            0x0fc19dc6u, 0x240ca1ccu, 0x2de92c6fu, 0x4a7484aau, 0x5cb0a9dcu, 0x76f988dau,
            0x983e5152u, 0xa831c66du, 0xb00327c8u, 0xbf597fc7u, 0xc6e00bf3u, 0xd5a79147u,
            0x06ca6351u, 0x14292967u, 0x27b70a85u, 0x2e1b2138u, 0x4d2c6dfcu, 0x53380d13u,
            0x650a7354u, 0x766a0abbu, 0x81c2c92eu, 0x92722c85u, 0xa2bfe8a1u, 0xa81a664bu,
            0xc24b8b70u, 0xc76c51a3u, 0xd192e819u, 0xd6990624u, 0xf40e3585u, 0x106aa070u,
            0x19a4c116u, 0x1e376c08u, 0x2748774cu, 0x34b0bcb5u, 0x391c0cb3u, 0x4ed8aa4au,
            0x5b9cca4fu, 0x682e6ff3u, 0x748f82eeu, 0x78a5636fu, 0x84c87814u, 0x8cc70208u,
            0x90befffau, 0xa4506cebu, 0xbef9a3f7u, 0xc67178f2u};

        uint32_t w[64];
        for (int i = 0; i < 16; ++i) {
            w[i] = (uint32_t(block[4 * i]) << 24) | (uint32_t(block[4 * i + 1]) << 16) |
                   (uint32_t(block[4 * i + 2]) << 8) | uint32_t(block[4 * i + 3]);
        }
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
            uint32_t t1 = h + s1 + ch + K[i] + w[i];
            uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            uint32_t t2 = s0 + maj;
            h = g; g = f; f = e; e = d + t1;
            d = c; c = b; b = a; a = t1 + t2;
        }
        state_[0] += a; state_[1] += b; state_[2] += c; state_[3] += d;
        state_[4] += e; state_[5] += f; state_[6] += g; state_[7] += h;
    }

    std::array<uint32_t, 8> state_;
    std::array<uint8_t, 64> buffer_;
    size_t buffer_len_ = 0;
    uint64_t total_bits_ = 0;
};

inline Bytes sha256(const Bytes& data) {
    Sha256 h;
    h.update(data);
    return h.finish();
}

/// Domain-separated hash of a tuple of byte strings. Each part is
/// length-prefixed before hashing, so the mapping from (tag, parts) to the
/// digest input is injective.
inline Bytes tagged_hash(const std::string& tag, std::initializer_list<Bytes> parts) {
    Sha256 h;
    Bytes tag_bytes(tag.begin(), tag.end());
    h.update(be32(uint32_t(tag_bytes.size())));
    h.update(tag_bytes);
    for (const Bytes& p : parts) {
        h.update(be32(uint32_t(p.size())));
        h.update(p);
    }
    return h.finish();
}

/// Counter-mode extension of tagged_hash to an arbitrary output length.
inline Bytes tagged_expand(const std::string& tag, std::initializer_list<Bytes> parts,
                           size_t out_len) {
    Bytes out;
    out.reserve(out_len);
    uint32_t counter = 0;
    while (out.size() < out_len) {
        Sha256 h;
        Bytes tag_bytes(tag.begin(), tag.end());
        h.update(be32(uint32_t(tag_bytes.size())));
        h.update(tag_bytes);
        h.update(be32(counter++));
        for (const Bytes& p : parts) {
            h.update(be32(uint32_t(p.size())));
            h.update(p);
        }
        Bytes block = h.finish();
        size_t take = std::min(block.size(), out_len - out.size());
        out.insert(out.end(), block.begin(), block.begin() + long(take));
    }
    return out;
}

} // namespace akelab
