#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wag3d/tensor.hpp"

namespace wag3d::nn {

// W3CK container: a manifest of named arrays (name, dtype, shape, offset)
// followed by raw little-endian payloads. Entries are written name-sorted, so
// identical contents mean identical bytes.
class Checkpoint {
public:
    enum Dtype : uint8_t { f64 = 0, f32 = 1, u32 = 2, i64 = 3, u8 = 4 };

    struct Entry {
        Dtype dtype;
        std::vector<int64_t> shape;
        std::vector<unsigned char> bytes;
    };

    void put_tensor(const std::string& name, const Tensor& t);
    Tensor get_tensor(const std::string& name) const;

    void put_string(const std::string& name, const std::string& s);
    std::string get_string(const std::string& name) const;

    void put_i64(const std::string& name, int64_t v);
    int64_t get_i64(const std::string& name) const;

    void put_u32_array(const std::string& name, const std::vector<uint32_t>& v);
    std::vector<uint32_t> get_u32_array(const std::string& name) const;

    void put_f64_array(const std::string& name, const std::vector<double>& v);
    std::vector<double> get_f64_array(const std::string& name) const;

    bool contains(const std::string& name) const { return entries_.count(name) > 0; }
    std::vector<std::string> names() const;

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);

    // FNV-1a over the serialized bytes; identifies a checkpoint, not a
    // cryptographic commitment
    static uint64_t file_hash(const std::string& path);

private:
    const Entry& entry(const std::string& name) const;
    std::map<std::string, Entry> entries_;
};

} // namespace wag3d::nn
