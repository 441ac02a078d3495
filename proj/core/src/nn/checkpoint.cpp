#include "wag3d/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "wag3d/common.hpp"
#include "wag3d/serial.hpp"

namespace wag3d::nn {

static const char kCheckpointMagic[4] = {'W', '3', 'C', 'K'};

const Checkpoint::Entry& Checkpoint::entry(const std::string& name) const {
    auto it = entries_.find(name);
    require(it != entries_.end(), "checkpoint has no entry '", name, "'");
    return it->second;
}

void Checkpoint::put_tensor(const std::string& name, const Tensor& t) {
    Entry e;
    e.dtype = f64;
    e.shape = t.shape();
    e.bytes.resize(static_cast<size_t>(t.numel()) * 8);
    std::memcpy(e.bytes.data(), t.data(), e.bytes.size());
    entries_[name] = std::move(e);
}

Tensor Checkpoint::get_tensor(const std::string& name) const {
    const Entry& e = entry(name);
    require(e.dtype == f64, "entry '", name, "' is not f64");
    Tensor t(e.shape);
    require(e.bytes.size() == static_cast<size_t>(t.numel()) * 8, "entry '", name,
            "' payload size mismatch");
    std::memcpy(t.data(), e.bytes.data(), e.bytes.size());
    return t;
}

void Checkpoint::put_string(const std::string& name, const std::string& s) {
    Entry e;
    e.dtype = u8;
    e.shape = {static_cast<int64_t>(s.size())};
    e.bytes.assign(s.begin(), s.end());
    entries_[name] = std::move(e);
}

std::string Checkpoint::get_string(const std::string& name) const {
    const Entry& e = entry(name);
    require(e.dtype == u8, "entry '", name, "' is not u8");
    return std::string(e.bytes.begin(), e.bytes.end());
}

void Checkpoint::put_i64(const std::string& name, int64_t v) {
    Entry e;
    e.dtype = i64;
    e.shape = {1};
    e.bytes.resize(8);
    std::memcpy(e.bytes.data(), &v, 8);
    entries_[name] = std::move(e);
}

int64_t Checkpoint::get_i64(const std::string& name) const {
    const Entry& e = entry(name);
    require(e.dtype == i64 && e.bytes.size() == 8, "entry '", name, "' is not a single i64");
    int64_t v;
    std::memcpy(&v, e.bytes.data(), 8);
    return v;
}

void Checkpoint::put_u32_array(const std::string& name, const std::vector<uint32_t>& v) {
    Entry e;
    e.dtype = u32;
    e.shape = {static_cast<int64_t>(v.size())};
    e.bytes.resize(v.size() * 4);
    std::memcpy(e.bytes.data(), v.data(), e.bytes.size());
    entries_[name] = std::move(e);
}

std::vector<uint32_t> Checkpoint::get_u32_array(const std::string& name) const {
    const Entry& e = entry(name);
    require(e.dtype == u32, "entry '", name, "' is not u32");
    std::vector<uint32_t> v(e.bytes.size() / 4);
    std::memcpy(v.data(), e.bytes.data(), e.bytes.size());
    return v;
}

void Checkpoint::put_f64_array(const std::string& name, const std::vector<double>& v) {
    Entry e;
    e.dtype = f64;
    e.shape = {static_cast<int64_t>(v.size())};
    e.bytes.resize(v.size() * 8);
    std::memcpy(e.bytes.data(), v.data(), e.bytes.size());
    entries_[name] = std::move(e);
}

std::vector<double> Checkpoint::get_f64_array(const std::string& name) const {
    const Entry& e = entry(name);
    require(e.dtype == f64, "entry '", name, "' is not f64");
    std::vector<double> v(e.bytes.size() / 8);
    std::memcpy(v.data(), e.bytes.data(), e.bytes.size());
    return v;
}

std::vector<std::string> Checkpoint::names() const {
    std::vector<std::string> out;
    for (const auto& [name, e] : entries_) {
        (void)e;
        out.push_back(name);
    }
    return out;
}

void Checkpoint::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    require(os.good(), "cannot open ", path, " for writing");
    serial::put_magic(os, kCheckpointMagic);
    serial::put_u32(os, 1);
    serial::put_u64(os, entries_.size());
    uint64_t offset = 0;
    for (const auto& [name, e] : entries_) {
        serial::put_string(os, name);
        os.put(static_cast<char>(e.dtype));
        serial::put_u32(os, static_cast<uint32_t>(e.shape.size()));
        for (int64_t d : e.shape) serial::put_i64(os, d);
        serial::put_u64(os, offset);
        serial::put_u64(os, e.bytes.size());
        offset += e.bytes.size();
    }
    for (const auto& [name, e] : entries_) {
        (void)name;
        serial::put_bytes(os, e.bytes.data(), e.bytes.size());
    }
    require(os.good(), "write failed for ", path);
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), "cannot open ", path);
    serial::expect_magic(is, kCheckpointMagic, "W3CK");
    uint32_t version = serial::get_u32(is);
    require(version == 1, "unsupported W3CK version ", version);
    uint64_t count = serial::get_u64(is);
    struct Pending {
        std::string name;
        Entry e;
        uint64_t offset, size;
    };
    std::vector<Pending> pending;
    for (uint64_t i = 0; i < count; ++i) {
        Pending p;
        p.name = serial::get_string(is);
        int dt = is.get();
        require(dt >= 0 && dt <= 4, "bad dtype in checkpoint manifest");
        p.e.dtype = static_cast<Dtype>(dt);
        uint32_t nd = serial::get_u32(is);
        p.e.shape.resize(nd);
        for (auto& d : p.e.shape) d = serial::get_i64(is);
        p.offset = serial::get_u64(is);
        p.size = serial::get_u64(is);
        pending.push_back(std::move(p));
    }
    Checkpoint ck;
    for (auto& p : pending) {
        p.e.bytes.resize(p.size);
        if (p.size) serial::get_bytes(is, p.e.bytes.data(), p.size);
        ck.entries_[p.name] = std::move(p.e);
    }
    return ck;
}

uint64_t Checkpoint::file_hash(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), "cannot open ", path);
    uint64_t h = 1469598103934665603ull;
    char buf[4096];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        for (std::streamsize i = 0; i < is.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (is.eof()) break;
    }
    return h;
}

} // namespace wag3d::nn
