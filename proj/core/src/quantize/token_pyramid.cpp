#include "wag3d/quantize/token_pyramid.hpp"

#include <fstream>

#include "wag3d/common.hpp"
#include "wag3d/serial.hpp"

namespace wag3d {

static const char kTokenMagic[4] = {'W', '3', 'T', 'P'};

void TokenMapPyramid::validate() const {
    require(!maps.empty(), "empty token pyramid");
    require(maps.size() == scales.size(), "token pyramid scale bookkeeping mismatch");
    require(vocab >= 2, "token vocabulary must hold at least two codes");
    for (size_t k = 0; k < maps.size(); ++k) {
        int64_t expect = static_cast<int64_t>(scales[k][0]) * scales[k][1] * scales[k][2];
        require(static_cast<int64_t>(maps[k].size()) == expect, "token map ", k + 1,
                " has ", maps[k].size(), " entries, expected ", expect);
        for (int32_t t : maps[k])
            require(t >= 0 && t < vocab, "token index ", t, " outside vocabulary ", vocab);
    }
}

void TokenMapPyramid::validate_against(const ScaleSchedule& schedule) const {
    validate();
    require(static_cast<int>(maps.size()) == schedule.count(), "token pyramid has ",
            maps.size(), " scales, schedule expects ", schedule.count());
    for (int k = 1; k <= schedule.count(); ++k)
        require(scales[static_cast<size_t>(k - 1)] == schedule.at(k),
                "token map ", k, " resolution differs from the schedule");
}

void save_w3tp(const std::string& path, const TokenMapPyramid& pyramid) {
    pyramid.validate();
    std::ofstream os(path, std::ios::binary);
    require(os.good(), "cannot open ", path, " for writing");
    serial::put_magic(os, kTokenMagic);
    serial::put_u32(os, 1);
    serial::put_u32(os, static_cast<uint32_t>(pyramid.maps.size()));
    for (const auto& s : pyramid.scales) {
        serial::put_u32(os, static_cast<uint32_t>(s[0]));
        serial::put_u32(os, static_cast<uint32_t>(s[1]));
        serial::put_u32(os, static_cast<uint32_t>(s[2]));
    }
    serial::put_u32(os, static_cast<uint32_t>(pyramid.vocab));
    for (const auto& map : pyramid.maps)
        for (int32_t t : map) serial::put_u32(os, static_cast<uint32_t>(t));
    require(os.good(), "write failed for ", path);
}

TokenMapPyramid load_w3tp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), "cannot open ", path);
    serial::expect_magic(is, kTokenMagic, "W3TP");
    uint32_t version = serial::get_u32(is);
    require(version == 1, "unsupported W3TP version ", version);
    uint32_t K = serial::get_u32(is);
    TokenMapPyramid pyr;
    pyr.scales.resize(K);
    for (auto& s : pyr.scales) {
        s[0] = static_cast<int>(serial::get_u32(is));
        s[1] = static_cast<int>(serial::get_u32(is));
        s[2] = static_cast<int>(serial::get_u32(is));
    }
    pyr.vocab = serial::get_u32(is);
    pyr.maps.resize(K);
    for (size_t k = 0; k < K; ++k) {
        int64_t count = static_cast<int64_t>(pyr.scales[k][0]) * pyr.scales[k][1] * pyr.scales[k][2];
        pyr.maps[k].resize(static_cast<size_t>(count));
        for (auto& t : pyr.maps[k]) t = static_cast<int32_t>(serial::get_u32(is));
    }
    pyr.validate();
    return pyr;
}

} // namespace wag3d
