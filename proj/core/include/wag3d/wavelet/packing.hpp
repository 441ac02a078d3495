#pragma once

#include <string>
#include <vector>

#include "wag3d/wavelet/dwt.hpp"

namespace wag3d {

// One channel of the compact volume: a subband (or the coarse band) at a
// given level plus a space-to-depth slot when the band is finer than the
// packed resolution. offset = ox + f*(oy + f*oz) with f = 2^(J - level).
struct PackingEntry {
    int level;   // 1..J for details, J for the coarse band
    int subband; // 0 = coarse, 1..7 = detail axis mask
    int offset;
    int channel;
};

// Channel-packed retained wavelet bands at the coarse spatial resolution.
// Channel 0 is the coarse band; detail channels follow coarsest level first,
// subband mask ascending, offset ascending. values are C x h x w x d,
// channel-major, x-fastest within a channel.
struct CompactWaveletVolume {
    int channels = 0;
    int h = 0, w = 0, d = 0;
    std::vector<float> values;
    std::vector<PackingEntry> descriptor;

    // bookkeeping needed to invert the packing
    int levels = 0;
    int keep_levels = 0;
    int base_n = 0;
    double truncation = 0.0;

    void validate() const;
    float* channel_data(int c) { return values.data() + static_cast<size_t>(c) * h * w * d; }
    const float* channel_data(int c) const {
        return values.data() + static_cast<size_t>(c) * h * w * d;
    }
};

// Retains the coarse band plus all detail subbands of the keep_levels
// coarsest levels; finer detail levels are dropped (lossy).
CompactWaveletVolume pack(const WaveletPyramid& pyramid, int keep_levels);

// Exact inverse of pack on the retained bands; dropped bands come back zero.
WaveletPyramid unpack(const CompactWaveletVolume& volume);

// Channel count pack would produce, for configuration checks.
int packed_channels(int levels, int keep_levels);

void save_w3cw(const std::string& path, const CompactWaveletVolume& volume);
CompactWaveletVolume load_w3cw(const std::string& path);

// MACs of one dense 3D convolution (same padding, stride 1):
// c_in * kernel^3 * h * w * d * c_out.
int64_t conv_mac_count(int64_t c_in, int64_t h, int64_t w, int64_t d, int64_t kernel,
                       int64_t c_out);

} // namespace wag3d
