#pragma once

#include <cstdint>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace akelab {

using Bytes = std::vector<uint8_t>;

inline Bytes xor_bytes(const Bytes& a, const Bytes& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("xor_bytes: length mismatch");
    Bytes out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
    return out;
}

inline void append(Bytes& dst, const Bytes& src) {
    dst.insert(dst.end(), src.begin(), src.end());
}

inline Bytes be32(uint32_t v) {
    return Bytes{uint8_t(v >> 24), uint8_t(v >> 16), uint8_t(v >> 8), uint8_t(v)};
}

inline Bytes be64(uint64_t v) {
    Bytes out(8);
    for (int i = 0; i < 8; ++i) out[i] = uint8_t(v >> (56 - 8 * i));
    return out;
}

/// Appends one length-prefixed field: 4-byte big-endian length, then the bytes.
inline void append_field(Bytes& dst, const Bytes& field) {
    append(dst, be32(uint32_t(field.size())));
    append(dst, field);
}

/// Encodes a tuple as the concatenation of its length-prefixed fields.
inline Bytes encode_tuple(std::initializer_list<Bytes> fields) {
    Bytes out;
    for (const Bytes& f : fields) append_field(out, f);
    return out;
}

/// Sequential reader for length-prefixed fields. Returns nullopt on any
/// malformed input; done() must be checked to reject trailing bytes.
class FieldReader {
public:
    explicit FieldReader(const Bytes& data) : data_(data) {}

    std::optional<Bytes> next() {
        if (pos_ + 4 > data_.size()) return std::nullopt;
        uint32_t len = (uint32_t(data_[pos_]) << 24) | (uint32_t(data_[pos_ + 1]) << 16) |
                       (uint32_t(data_[pos_ + 2]) << 8) | uint32_t(data_[pos_ + 3]);
        pos_ += 4;
        if (pos_ + len > data_.size()) return std::nullopt;
        Bytes out(data_.begin() + long(pos_), data_.begin() + long(pos_ + len));
        pos_ += len;
        return out;
    }

    /// Like next(), but also rejects fields whose length differs from `expect`.
    std::optional<Bytes> next_exact(size_t expect) {
        auto f = next();
        if (!f || f->size() != expect) return std::nullopt;
        return f;
    }

    bool done() const { return pos_ == data_.size(); }

private:
    const Bytes& data_;
    size_t pos_ = 0;
};

inline std::string to_hex(const Bytes& data) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(2 * data.size());
    for (uint8_t b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

inline std::optional<Bytes> from_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) return std::nullopt;
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    Bytes out(hex.size() / 2);
    for (size_t i = 0; i < out.size(); ++i) {
        int hi = nibble(hex[2 * i]), lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out[i] = uint8_t((hi << 4) | lo);
    }
    return out;
}

} // namespace akelab
