#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

namespace wag3d {

// Deterministic random stream. mt19937_64 has a standard-mandated output
// sequence and every derived draw below is built from raw 64-bit words only,
// so identical seeds give identical values on any conforming platform.
//
// Independent streams for different purposes are derived from a root seed
// plus a purpose tag (FNV-1a of the tag mixed through splitmix64), so adding
// a consumer never shifts the draws seen by another.
class RngStream {
public:
    explicit RngStream(uint64_t seed) : gen_(seed) {}

    static uint64_t mix(uint64_t seed, std::string_view tag) {
        uint64_t h = 1469598103934665603ull; // FNV-1a 64
        for (char c : tag) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        return splitmix64(seed ^ h);
    }

    static RngStream derive(uint64_t seed, std::string_view tag) {
        return RngStream(mix(seed, tag));
    }

    uint64_t next_u64() { return gen_(); }

    // [0, 1), 53 random bits
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // inclusive range, unbiased via rejection
    int64_t uniform_int(int64_t lo, int64_t hi) {
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<int64_t>(gen_()); // full 64-bit range
        uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        uint64_t r;
        do {
            r = gen_();
        } while (r >= limit);
        return lo + static_cast<int64_t>(r % span);
    }

    // polar Box-Muller with cached spare
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = uniform(-1.0, 1.0);
            v = uniform(-1.0, 1.0);
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // textual engine state (standard-defined decimal dump) plus the spare
    std::string state() const {
        std::ostringstream os;
        os << gen_ << ' ' << has_spare_ << ' ';
        os.precision(17);
        os << spare_;
        return os.str();
    }

    void set_state(const std::string& s) {
        std::istringstream is(s);
        is >> gen_ >> has_spare_ >> spare_;
    }

private:
    static uint64_t splitmix64(uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace wag3d
