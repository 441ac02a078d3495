#pragma once

// Loop-literal re-implementation of the multi-scale encoding used as the
// independence oracle by the unit and acceptance suites. Kept deliberately
// naive: fresh field type, fresh resample, fresh convolution.

#include <algorithm>
#include <cmath>
#include <vector>

#include "wag3d/quantize/residual_vq.hpp"

namespace wag3d::testing {

struct LiteralField {
    int64_t c, dz, dy, dx;
    std::vector<double> v;
    double at(int64_t ch, int64_t z, int64_t y, int64_t x) const {
        return v[static_cast<size_t>(((ch * dz + z) * dy + y) * dx + x)];
    }
    double& at(int64_t ch, int64_t z, int64_t y, int64_t x) {
        return v[static_cast<size_t>(((ch * dz + z) * dy + y) * dx + x)];
    }
};

LiteralField literal_resample(const LiteralField& src, int64_t tz, int64_t ty, int64_t tx,
                              bool trilinear) {
    LiteralField out{src.c, tz, ty, tx,
                     std::vector<double>(static_cast<size_t>(src.c * tz * ty * tx), 0.0)};
    auto coord = [&](int64_t i, int64_t slen, int64_t tlen, int64_t& i0, int64_t& i1, double& t) {
        double ctr = (i + 0.5) * static_cast<double>(slen) / static_cast<double>(tlen) - 0.5;
        if (!trilinear) {
            i0 = i1 = std::clamp<int64_t>(static_cast<int64_t>(std::floor(ctr + 0.5)), 0, slen - 1);
            t = 0.0;
            return;
        }
        ctr = std::clamp(ctr, 0.0, static_cast<double>(slen - 1));
        i0 = static_cast<int64_t>(std::floor(ctr));
        i1 = std::min(i0 + 1, slen - 1);
        t = ctr - static_cast<double>(i0);
    };
    for (int64_t ch = 0; ch < src.c; ++ch)
        for (int64_t z = 0; z < tz; ++z)
            for (int64_t y = 0; y < ty; ++y)
                for (int64_t x = 0; x < tx; ++x) {
                    int64_t z0, z1, y0, y1, x0, x1;
                    double wz, wy, wx;
                    coord(z, src.dz, tz, z0, z1, wz);
                    coord(y, src.dy, ty, y0, y1, wy);
                    coord(x, src.dx, tx, x0, x1, wx);
                    double v00 = src.at(ch, z0, y0, x0) + wx * (src.at(ch, z0, y0, x1) - src.at(ch, z0, y0, x0));
                    double v01 = src.at(ch, z0, y1, x0) + wx * (src.at(ch, z0, y1, x1) - src.at(ch, z0, y1, x0));
                    double v10 = src.at(ch, z1, y0, x0) + wx * (src.at(ch, z1, y0, x1) - src.at(ch, z1, y0, x0));
                    double v11 = src.at(ch, z1, y1, x0) + wx * (src.at(ch, z1, y1, x1) - src.at(ch, z1, y1, x0));
                    double v0 = v00 + wy * (v01 - v00);
                    double v1 = v10 + wy * (v11 - v10);
                    out.at(ch, z, y, x) = v0 + wz * (v1 - v0);
                }
    return out;
}

LiteralField literal_conv3(const LiteralField& x, const Tensor& w, const Tensor& b) {
    LiteralField out{x.c, x.dz, x.dy, x.dx,
                     std::vector<double>(x.v.size(), 0.0)};
    for (int64_t oc = 0; oc < x.c; ++oc)
        for (int64_t z = 0; z < x.dz; ++z)
            for (int64_t y = 0; y < x.dy; ++y)
                for (int64_t xx = 0; xx < x.dx; ++xx) {
                    double s = b[oc];
                    for (int64_t ic = 0; ic < x.c; ++ic)
                        for (int64_t kz = 0; kz < 3; ++kz)
                            for (int64_t ky = 0; ky < 3; ++ky)
                                for (int64_t kx = 0; kx < 3; ++kx) {
                                    int64_t iz = z + kz - 1, iy = y + ky - 1, ix = xx + kx - 1;
                                    if (iz < 0 || iz >= x.dz || iy < 0 || iy >= x.dy || ix < 0 ||
                                        ix >= x.dx)
                                        continue;
                                    s += w.at(oc, ic, kz, ky, kx) * x.at(ic, iz, iy, ix);
                                }
                    out.at(oc, z, y, xx) = s;
                }
    return out;
}

struct LiteralResult {
    std::vector<std::vector<int32_t>> tokens;
    LiteralField recon;
};

// straight transcription of the encoding loop, kept deliberately naive
LiteralResult literal_encode(const Tensor& z, const Quantizer& q, const ScaleSchedule& sched,
                             const ScaleRefiners& refiners) {
    const int64_t C = z.dim(0);
    const auto& fin = sched.final_scale();
    LiteralField residual{C, fin[2], fin[1], fin[0], z.vec()};
    LiteralField recon{C, fin[2], fin[1], fin[0],
                       std::vector<double>(z.vec().size(), 0.0)};
    LiteralResult out;
    const bool tri = sched.interp == InterpMode::trilinear;
    for (int k = 1; k <= sched.count(); ++k) {
        const auto& s = sched.at(k);
        LiteralField rk = literal_resample(residual, s[2], s[1], s[0], tri);
        const int64_t vox = sched.flat_size(k);
        std::vector<int32_t> tokens(static_cast<size_t>(vox));
        LiteralField ek{C, s[2], s[1], s[0], std::vector<double>(static_cast<size_t>(C * vox), 0.0)};
        std::vector<double> col(static_cast<size_t>(C)), code(static_cast<size_t>(C));
        for (int64_t z2 = 0; z2 < s[2]; ++z2)
            for (int64_t y = 0; y < s[1]; ++y)
                for (int64_t x = 0; x < s[0]; ++x) {
                    for (int64_t c = 0; c < C; ++c) col[static_cast<size_t>(c)] = rk.at(c, z2, y, x);
                    int64_t idx = q.quantize(col.data());
                    tokens[static_cast<size_t>((z2 * s[1] + y) * s[0] + x)] = static_cast<int32_t>(idx);
                    q.lookup(idx, code.data());
                    for (int64_t c = 0; c < C; ++c) ek.at(c, z2, y, x) = code[static_cast<size_t>(c)];
                }
        out.tokens.push_back(tokens);
        LiteralField up = literal_resample(ek, fin[2], fin[1], fin[0], tri);
        LiteralField refined = up;
        if (k < sched.count())
            refined = literal_conv3(up, refiners.weight[static_cast<size_t>(k - 1)],
                                    refiners.bias[static_cast<size_t>(k - 1)]);
        for (size_t i = 0; i < residual.v.size(); ++i) {
            residual.v[i] -= refined.v[i];
            recon.v[i] += refined.v[i];
        }
    }
    out.recon = recon;
    return out;
}


} // namespace wag3d::testing
