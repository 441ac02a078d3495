#include "wag3d/wavelet/packing.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <tuple>

#include "wag3d/common.hpp"
#include "wag3d/serial.hpp"

namespace wag3d {

static const char kVolumeMagic[4] = {'W', '3', 'C', 'W'};

int packed_channels(int levels, int keep_levels) {
    require(keep_levels >= 1 && keep_levels <= levels, "keep_levels ", keep_levels,
            " outside [1, ", levels, "]");
    int c = 1;
    for (int j = levels - keep_levels + 1; j <= levels; ++j) {
        int f = 1 << (levels - j);
        c += 7 * f * f * f;
    }
    return c;
}

void CompactWaveletVolume::validate() const {
    require(channels >= 1 && h >= 1 && w >= 1 && d >= 1, "empty compact volume");
    require(values.size() == static_cast<size_t>(channels) * h * w * d,
            "compact volume payload size mismatch");
    require(static_cast<int>(descriptor.size()) == channels,
            "packing descriptor must cover every channel");
    std::set<int> chans;
    std::set<std::tuple<int, int, int>> sources;
    for (const auto& e : descriptor) {
        require(e.channel >= 0 && e.channel < channels, "descriptor channel out of range");
        require(chans.insert(e.channel).second, "descriptor channel ", e.channel, " repeated");
        require(sources.insert(std::make_tuple(e.level, e.subband, e.offset)).second,
                "descriptor source repeated");
        require(e.subband >= 0 && e.subband <= 7, "descriptor subband out of range");
        require(e.level >= 1 && e.level <= levels, "descriptor level out of range");
    }
    for (float v : values) require(std::isfinite(v), "non-finite packed coefficient");
}

CompactWaveletVolume pack(const WaveletPyramid& pyramid, int keep_levels) {
    pyramid.validate();
    const int J = pyramid.levels;
    require(keep_levels >= 1 && keep_levels <= J, "keep_levels ", keep_levels, " outside [1, ",
            J, "]");

    CompactWaveletVolume vol;
    vol.levels = J;
    vol.keep_levels = keep_levels;
    vol.base_n = pyramid.base_n;
    vol.truncation = pyramid.truncation;
    const int cn = pyramid.coarse_n();
    vol.h = vol.w = vol.d = cn;
    vol.channels = packed_channels(J, keep_levels);
    vol.values.resize(static_cast<size_t>(vol.channels) * cn * cn * cn);

    const size_t plane = static_cast<size_t>(cn) * cn * cn;
    int channel = 0;

    for (size_t i = 0; i < pyramid.coarse.size(); ++i)
        vol.values[i] = static_cast<float>(pyramid.coarse[i]);
    vol.descriptor.push_back({J, 0, 0, channel});
    ++channel;

    for (int j = J; j >= J - keep_levels + 1; --j) {
        const int f = 1 << (J - j);
        const int bn = pyramid.level_n(j); // = cn * f
        for (int mask = 1; mask <= 7; ++mask) {
            const auto& band = pyramid.details[static_cast<size_t>(j - 1)][static_cast<size_t>(mask - 1)];
            for (int oz = 0; oz < f; ++oz)
                for (int oy = 0; oy < f; ++oy)
                    for (int ox = 0; ox < f; ++ox) {
                        float* dst = vol.values.data() + static_cast<size_t>(channel) * plane;
                        size_t o = 0;
                        for (int z = 0; z < cn; ++z)
                            for (int y = 0; y < cn; ++y)
                                for (int x = 0; x < cn; ++x, ++o)
                                    dst[o] = static_cast<float>(
                                        band[static_cast<size_t>(x * f + ox) +
                                             static_cast<size_t>(bn) *
                                                 (static_cast<size_t>(y * f + oy) +
                                                  static_cast<size_t>(bn) * static_cast<size_t>(z * f + oz))]);
                        vol.descriptor.push_back({j, mask, ox + f * (oy + f * oz), channel});
                        ++channel;
                    }
        }
    }
    vol.validate();
    return vol;
}

WaveletPyramid unpack(const CompactWaveletVolume& volume) {
    volume.validate();
    WaveletPyramid pyr;
    pyr.levels = volume.levels;
    pyr.base_n = volume.base_n;
    pyr.truncation = volume.truncation;
    require(pyr.coarse_n() == volume.h && volume.h == volume.w && volume.w == volume.d,
            "compact volume resolution inconsistent with its level bookkeeping");

    const int cn = volume.h;
    const size_t plane = static_cast<size_t>(cn) * cn * cn;
    pyr.details.resize(static_cast<size_t>(pyr.levels));
    for (int j = 1; j <= pyr.levels; ++j) {
        size_t m = static_cast<size_t>(pyr.level_n(j));
        for (auto& band : pyr.details[static_cast<size_t>(j - 1)]) band.assign(m * m * m, 0.0);
    }
    pyr.coarse.assign(plane, 0.0);

    for (const auto& e : volume.descriptor) {
        const float* src = volume.values.data() + static_cast<size_t>(e.channel) * plane;
        if (e.subband == 0) {
            require(e.level == pyr.levels && e.offset == 0, "corrupt descriptor: coarse entry");
            for (size_t i = 0; i < plane; ++i) pyr.coarse[i] = src[i];
            continue;
        }
        const int f = 1 << (pyr.levels - e.level);
        require(e.offset >= 0 && e.offset < f * f * f, "corrupt descriptor: offset ", e.offset);
        const int ox = e.offset % f, oy = (e.offset / f) % f, oz = e.offset / (f * f);
        const int bn = pyr.level_n(e.level);
        auto& band = pyr.details[static_cast<size_t>(e.level - 1)][static_cast<size_t>(e.subband - 1)];
        size_t o = 0;
        for (int z = 0; z < cn; ++z)
            for (int y = 0; y < cn; ++y)
                for (int x = 0; x < cn; ++x, ++o)
                    band[static_cast<size_t>(x * f + ox) +
                         static_cast<size_t>(bn) * (static_cast<size_t>(y * f + oy) +
                                                    static_cast<size_t>(bn) * static_cast<size_t>(z * f + oz))] =
                        static_cast<double>(src[o]);
    }
    return pyr;
}

void save_w3cw(const std::string& path, const CompactWaveletVolume& volume) {
    volume.validate();
    std::ofstream os(path, std::ios::binary);
    require(os.good(), "cannot open ", path, " for writing");
    serial::put_magic(os, kVolumeMagic);
    serial::put_u32(os, 1);
    serial::put_u32(os, static_cast<uint32_t>(volume.channels));
    serial::put_u32(os, static_cast<uint32_t>(volume.h));
    serial::put_u32(os, static_cast<uint32_t>(volume.w));
    serial::put_u32(os, static_cast<uint32_t>(volume.d));
    serial::put_u32(os, static_cast<uint32_t>(volume.levels));
    serial::put_u32(os, static_cast<uint32_t>(volume.keep_levels));
    serial::put_u32(os, static_cast<uint32_t>(volume.base_n));
    serial::put_f32(os, static_cast<float>(volume.truncation));
    serial::put_u32(os, static_cast<uint32_t>(volume.descriptor.size()));
    for (const auto& e : volume.descriptor) {
        serial::put_u32(os, static_cast<uint32_t>(e.level));
        serial::put_u32(os, static_cast<uint32_t>(e.subband));
        serial::put_u32(os, static_cast<uint32_t>(e.offset));
        serial::put_u32(os, static_cast<uint32_t>(e.channel));
    }
    serial::put_f32_array(os, volume.values);
    require(os.good(), "write failed for ", path);
}

CompactWaveletVolume load_w3cw(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), "cannot open ", path);
    serial::expect_magic(is, kVolumeMagic, "W3CW");
    uint32_t version = serial::get_u32(is);
    require(version == 1, "unsupported W3CW version ", version);
    CompactWaveletVolume vol;
    vol.channels = static_cast<int>(serial::get_u32(is));
    vol.h = static_cast<int>(serial::get_u32(is));
    vol.w = static_cast<int>(serial::get_u32(is));
    vol.d = static_cast<int>(serial::get_u32(is));
    vol.levels = static_cast<int>(serial::get_u32(is));
    vol.keep_levels = static_cast<int>(serial::get_u32(is));
    vol.base_n = static_cast<int>(serial::get_u32(is));
    vol.truncation = serial::get_f32(is);
    uint32_t entries = serial::get_u32(is);
    vol.descriptor.resize(entries);
    for (auto& e : vol.descriptor) {
        e.level = static_cast<int>(serial::get_u32(is));
        e.subband = static_cast<int>(serial::get_u32(is));
        e.offset = static_cast<int>(serial::get_u32(is));
        e.channel = static_cast<int>(serial::get_u32(is));
    }
    serial::get_f32_array(is, vol.values, static_cast<size_t>(vol.channels) * vol.h * vol.w * vol.d);
    vol.validate();
    return vol;
}

int64_t conv_mac_count(int64_t c_in, int64_t h, int64_t w, int64_t d, int64_t kernel,
                       int64_t c_out) {
    require(c_in > 0 && h > 0 && w > 0 && d > 0 && kernel > 0 && c_out > 0,
            "conv_mac_count arguments must be positive");
    __int128 macs = static_cast<__int128>(c_in) * kernel * kernel * kernel;
    macs *= h;
    macs *= w;
    macs *= d;
    macs *= c_out;
    require(macs <= static_cast<__int128>(INT64_MAX), "MAC count overflows int64");
    return static_cast<int64_t>(macs);
}

} // namespace wag3d
