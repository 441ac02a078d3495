#pragma once

#include <cstdint>
#include <cstring>
#include <iostream>
#include <string>
#include <vector>

#include "wag3d/common.hpp"

// Little-endian binary primitives shared by the W3DG / W3CW / W3TP / W3CK
// container formats. Byte order is written explicitly so files are portable
// across hosts.

namespace wag3d::serial {

inline void put_bytes(std::ostream& os, const void* p, size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void get_bytes(std::istream& is, void* p, size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    require(static_cast<size_t>(is.gcount()) == n, "unexpected end of stream");
}

inline void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    put_bytes(os, b, 4);
}

inline uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    get_bytes(is, b, 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

inline void put_u64(std::ostream& os, uint64_t v) {
    put_u32(os, static_cast<uint32_t>(v));
    put_u32(os, static_cast<uint32_t>(v >> 32));
}

inline uint64_t get_u64(std::istream& is) {
    uint64_t lo = get_u32(is);
    uint64_t hi = get_u32(is);
    return lo | (hi << 32);
}

inline void put_i64(std::ostream& os, int64_t v) { put_u64(os, static_cast<uint64_t>(v)); }
inline int64_t get_i64(std::istream& is) { return static_cast<int64_t>(get_u64(is)); }

inline void put_f32(std::ostream& os, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(os, bits);
}

inline float get_f32(std::istream& is) {
    uint32_t bits = get_u32(is);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

inline void put_f64(std::ostream& os, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(os, bits);
}

inline double get_f64(std::istream& is) {
    uint64_t bits = get_u64(is);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

inline void put_string(std::ostream& os, const std::string& s) {
    put_u32(os, static_cast<uint32_t>(s.size()));
    put_bytes(os, s.data(), s.size());
}

inline std::string get_string(std::istream& is) {
    uint32_t n = get_u32(is);
    std::string s(n, '\0');
    if (n) get_bytes(is, s.data(), n);
    return s;
}

inline void put_magic(std::ostream& os, const char magic[4]) { put_bytes(os, magic, 4); }

inline void expect_magic(std::istream& is, const char magic[4], const char* what) {
    char b[4];
    get_bytes(is, b, 4);
    require(std::memcmp(b, magic, 4) == 0, "bad magic for ", what, " file");
}

// f32 payload block. The host is assumed IEEE-754; values round-trip exactly.
inline void put_f32_array(std::ostream& os, const std::vector<float>& v) {
    for (float x : v) put_f32(os, x);
}

inline void get_f32_array(std::istream& is, std::vector<float>& v, size_t n) {
    v.resize(n);
    for (size_t i = 0; i < n; ++i) v[i] = get_f32(is);
}

} // namespace wag3d::serial
