#include "wag3d/wavelet/dwt.hpp"

#include <cmath>
#include <cstring>

#include "wag3d/common.hpp"

namespace wag3d {

const char* subband_name(int mask) {
    static const char* names[8] = {"LLL", "HLL", "LHL", "HHL", "LLH", "HLH", "LHH", "HHH"};
    require(mask >= 0 && mask <= 7, "subband mask out of range");
    return names[mask];
}

int subband_mask(const std::string& name) {
    require(name.size() == 3, "subband name must have three letters");
    int mask = 0;
    for (int ax = 0; ax < 3; ++ax) {
        char c = name[static_cast<size_t>(ax)];
        require(c == 'L' || c == 'H', "subband letters must be L or H");
        if (c == 'H') mask |= 1 << ax;
    }
    return mask;
}

void WaveletPyramid::validate() const {
    require(levels >= 1, "pyramid has no levels");
    require(base_n % (1 << levels) == 0, "base resolution ", base_n, " not divisible by 2^",
            levels);
    require(static_cast<int>(details.size()) == levels, "detail level count mismatch");
    size_t cn = static_cast<size_t>(coarse_n());
    require(coarse.size() == cn * cn * cn, "coarse band size mismatch");
    for (int j = 1; j <= levels; ++j) {
        size_t m = static_cast<size_t>(level_n(j));
        for (const auto& band : details[static_cast<size_t>(j - 1)]) {
            require(band.size() == m * m * m, "detail band size mismatch at level ", j);
            for (double v : band) require(std::isfinite(v), "non-finite wavelet coefficient");
        }
    }
    for (double v : coarse) require(std::isfinite(v), "non-finite coarse coefficient");
}

double WaveletPyramid::energy() const {
    double e = 0.0;
    for (double v : coarse) e += v * v;
    for (const auto& level : details)
        for (const auto& band : level)
                for (double v : band) e += v * v;
    return e;
}

namespace {

// one analysis level along every axis of an m^3 volume held in `buf`;
// afterwards octant (ox, oy, oz) of the buffer holds the subband with
// low/high halves per axis (x-fastest layout throughout)
void analyze_level(const FilterBank& fb, std::vector<double>& buf, int m) {
    const int h = m / 2;
    std::vector<double> line(static_cast<size_t>(m)), lo(static_cast<size_t>(h)),
        hi(static_cast<size_t>(h));
    auto idx = [m](int x, int y, int z) {
        return static_cast<size_t>(x) + static_cast<size_t>(m) * (static_cast<size_t>(y) + static_cast<size_t>(m) * static_cast<size_t>(z));
    };
    // x
    for (int z = 0; z < m; ++z)
        for (int y = 0; y < m; ++y) {
            double* row = &buf[idx(0, y, z)];
            forward_1d(fb, row, m, lo.data(), hi.data());
            std::memcpy(row, lo.data(), sizeof(double) * static_cast<size_t>(h));
            std::memcpy(row + h, hi.data(), sizeof(double) * static_cast<size_t>(h));
        }
    // y
    for (int z = 0; z < m; ++z)
        for (int x = 0; x < m; ++x) {
            for (int y = 0; y < m; ++y) line[static_cast<size_t>(y)] = buf[idx(x, y, z)];
            forward_1d(fb, line.data(), m, lo.data(), hi.data());
            for (int y = 0; y < h; ++y) {
                buf[idx(x, y, z)] = lo[static_cast<size_t>(y)];
                buf[idx(x, y + h, z)] = hi[static_cast<size_t>(y)];
            }
        }
    // z
    for (int y = 0; y < m; ++y)
        for (int x = 0; x < m; ++x) {
            for (int z = 0; z < m; ++z) line[static_cast<size_t>(z)] = buf[idx(x, y, z)];
            forward_1d(fb, line.data(), m, lo.data(), hi.data());
            for (int z = 0; z < h; ++z) {
                buf[idx(x, y, z)] = lo[static_cast<size_t>(z)];
                buf[idx(x, y, z + h)] = hi[static_cast<size_t>(z)];
            }
        }
}

void synthesize_level(const FilterBank& fb, std::vector<double>& buf, int m) {
    const int h = m / 2;
    std::vector<double> line(static_cast<size_t>(m)), lo(static_cast<size_t>(h)),
        hi(static_cast<size_t>(h));
    auto idx = [m](int x, int y, int z) {
        return static_cast<size_t>(x) + static_cast<size_t>(m) * (static_cast<size_t>(y) + static_cast<size_t>(m) * static_cast<size_t>(z));
    };
    // z
    for (int y = 0; y < m; ++y)
        for (int x = 0; x < m; ++x) {
            for (int z = 0; z < h; ++z) {
                lo[static_cast<size_t>(z)] = buf[idx(x, y, z)];
                hi[static_cast<size_t>(z)] = buf[idx(x, y, z + h)];
            }
            inverse_1d(fb, lo.data(), hi.data(), m, line.data());
            for (int z = 0; z < m; ++z) buf[idx(x, y, z)] = line[static_cast<size_t>(z)];
        }
    // y
    for (int z = 0; z < m; ++z)
        for (int x = 0; x < m; ++x) {
            for (int y = 0; y < h; ++y) {
                lo[static_cast<size_t>(y)] = buf[idx(x, y, z)];
                hi[static_cast<size_t>(y)] = buf[idx(x, y + h, z)];
            }
            inverse_1d(fb, lo.data(), hi.data(), m, line.data());
            for (int y = 0; y < m; ++y) buf[idx(x, y, z)] = line[static_cast<size_t>(y)];
        }
    // x
    for (int z = 0; z < m; ++z)
        for (int y = 0; y < m; ++y) {
            double* row = &buf[idx(0, y, z)];
            std::memcpy(lo.data(), row, sizeof(double) * static_cast<size_t>(h));
            std::memcpy(hi.data(), row + h, sizeof(double) * static_cast<size_t>(h));
            inverse_1d(fb, lo.data(), hi.data(), m, line.data());
            std::memcpy(row, line.data(), sizeof(double) * static_cast<size_t>(m));
        }
}

// copy octant (ox, oy, oz) of an m^3 buffer into an h^3 band (or back)
void read_octant(const std::vector<double>& buf, int m, int ox, int oy, int oz,
                 std::vector<double>& band) {
    const int h = m / 2;
    band.resize(static_cast<size_t>(h) * h * h);
    size_t o = 0;
    for (int z = 0; z < h; ++z)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < h; ++x, ++o)
                band[o] =
                    buf[static_cast<size_t>(x + ox * h) +
                        static_cast<size_t>(m) * (static_cast<size_t>(y + oy * h) +
                                                  static_cast<size_t>(m) * static_cast<size_t>(z + oz * h))];
}

void write_octant(std::vector<double>& buf, int m, int ox, int oy, int oz,
                  const std::vector<double>& band) {
    const int h = m / 2;
    size_t o = 0;
    for (int z = 0; z < h; ++z)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < h; ++x, ++o)
                buf[static_cast<size_t>(x + ox * h) +
                    static_cast<size_t>(m) * (static_cast<size_t>(y + oy * h) +
                                              static_cast<size_t>(m) * static_cast<size_t>(z + oz * h))] =
                    band[o];
}

} // namespace

WaveletPyramid dwt3(const DistanceGrid& grid, const FilterBank& filters, int levels) {
    grid.validate();
    filters.validate();
    require(levels >= 1, "levels must be >= 1");
    require(grid.n % (1 << levels) == 0, "resolution ", grid.n, " not divisible by 2^", levels);
    require(grid.n >> levels >= (filters.family == WaveletFamily::haar ? 1 : 2),
            "decomposition too deep for n=", grid.n, " with ", filters.name());

    WaveletPyramid pyr;
    pyr.levels = levels;
    pyr.base_n = grid.n;
    pyr.truncation = grid.truncation;
    pyr.details.resize(static_cast<size_t>(levels));

    int m = grid.n;
    std::vector<double> buf(grid.values.begin(), grid.values.end());
    std::vector<double> next;
    for (int j = 1; j <= levels; ++j) {
        analyze_level(filters, buf, m);
        for (int mask = 1; mask <= 7; ++mask)
            read_octant(buf, m, mask & 1, (mask >> 1) & 1, (mask >> 2) & 1,
                        pyr.details[static_cast<size_t>(j - 1)][static_cast<size_t>(mask - 1)]);
        // continue with the low-low-low octant
        const int h = m / 2;
        next.resize(static_cast<size_t>(h) * h * h);
        size_t o = 0;
        for (int z = 0; z < h; ++z)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < h; ++x, ++o)
                    next[o] = buf[static_cast<size_t>(x) +
                                  static_cast<size_t>(m) * (static_cast<size_t>(y) + static_cast<size_t>(m) * static_cast<size_t>(z))];
        buf.swap(next);
        m = h;
    }
    pyr.coarse = std::move(buf);
    return pyr;
}

DistanceGrid idwt3(const WaveletPyramid& pyramid, const FilterBank& filters) {
    pyramid.validate();
    filters.validate();

    int m = pyramid.coarse_n();
    std::vector<double> buf(pyramid.coarse.begin(), pyramid.coarse.end());
    std::vector<double> grown;
    for (int j = pyramid.levels; j >= 1; --j) {
        const int g = 2 * m;
        grown.assign(static_cast<size_t>(g) * g * g, 0.0);
        // coarse into the low octant
        size_t o = 0;
        for (int z = 0; z < m; ++z)
            for (int y = 0; y < m; ++y)
                for (int x = 0; x < m; ++x, ++o)
                    grown[static_cast<size_t>(x) +
                          static_cast<size_t>(g) * (static_cast<size_t>(y) + static_cast<size_t>(g) * static_cast<size_t>(z))] = buf[o];
        for (int mask = 1; mask <= 7; ++mask)
            write_octant(grown, g, mask & 1, (mask >> 1) & 1, (mask >> 2) & 1,
                         pyramid.details[static_cast<size_t>(j - 1)][static_cast<size_t>(mask - 1)]);
        synthesize_level(filters, grown, g);
        buf.swap(grown);
        m = g;
    }

    DistanceGrid grid(pyramid.base_n, pyramid.truncation);
    for (size_t i = 0; i < buf.size(); ++i) grid.values[i] = static_cast<float>(buf[i]);
    return grid;
}

} // namespace wag3d
