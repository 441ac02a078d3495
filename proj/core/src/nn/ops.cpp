#include "wag3d/nn/ops.hpp"

#include <algorithm>
#include <cmath>

#include "wag3d/common.hpp"
#include "wag3d/nn/kernels.hpp"

namespace wag3d::nn {

// ---------------------------------------------------------------- kernels

void conv3d(const double* in, int ci, int d, int h, int w, const double* weight,
            const double* bias, int co, int k, double* out) {
    const int r = k / 2;
    const int64_t plane = static_cast<int64_t>(d) * h * w;
    for (int oc = 0; oc < co; ++oc) {
        double* o = out + oc * plane;
        const double bv = bias ? bias[oc] : 0.0;
        std::fill(o, o + plane, bv);
        for (int ic = 0; ic < ci; ++ic) {
            const double* x = in + ic * plane;
            const double* wt = weight + ((static_cast<int64_t>(oc) * ci + ic) * k * k * k);
            for (int kz = 0; kz < k; ++kz) {
                for (int ky = 0; ky < k; ++ky) {
                    for (int kx = 0; kx < k; ++kx) {
                        const double wv = wt[(kz * k + ky) * k + kx];
                        if (wv == 0.0) continue;
                        const int dz = kz - r, dy = ky - r, dx = kx - r;
                        const int z0 = std::max(0, -dz), z1 = std::min(d, d - dz);
                        const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
                        const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
                        for (int z = z0; z < z1; ++z) {
                            for (int y = y0; y < y1; ++y) {
                                double* orow = o + (static_cast<int64_t>(z) * h + y) * w;
                                const double* xrow =
                                    x + (static_cast<int64_t>(z + dz) * h + (y + dy)) * w + dx;
                                for (int xx = x0; xx < x1; ++xx) orow[xx] += wv * xrow[xx];
                            }
                        }
                    }
                }
            }
        }
    }
}

void conv3d_grad_input(const double* gout, int co, const double* weight, int ci, int d, int h,
                       int w, int k, double* gin) {
    const int r = k / 2;
    const int64_t plane = static_cast<int64_t>(d) * h * w;
    for (int oc = 0; oc < co; ++oc) {
        const double* go = gout + oc * plane;
        for (int ic = 0; ic < ci; ++ic) {
            double* gx = gin + ic * plane;
            const double* wt = weight + ((static_cast<int64_t>(oc) * ci + ic) * k * k * k);
            for (int kz = 0; kz < k; ++kz) {
                for (int ky = 0; ky < k; ++ky) {
                    for (int kx = 0; kx < k; ++kx) {
                        const double wv = wt[(kz * k + ky) * k + kx];
                        if (wv == 0.0) continue;
                        const int dz = kz - r, dy = ky - r, dx = kx - r;
                        const int z0 = std::max(0, -dz), z1 = std::min(d, d - dz);
                        const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
                        const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
                        for (int z = z0; z < z1; ++z) {
                            for (int y = y0; y < y1; ++y) {
                                const double* grow = go + (static_cast<int64_t>(z) * h + y) * w;
                                double* xrow =
                                    gx + (static_cast<int64_t>(z + dz) * h + (y + dy)) * w + dx;
                                for (int xx = x0; xx < x1; ++xx) xrow[xx] += wv * grow[xx];
                            }
                        }
                    }
                }
            }
        }
    }
}

void conv3d_grad_params(const double* gout, int co, const double* in, int ci, int d, int h,
                        int w, int k, double* gweight, double* gbias) {
    const int r = k / 2;
    const int64_t plane = static_cast<int64_t>(d) * h * w;
    for (int oc = 0; oc < co; ++oc) {
        const double* go = gout + oc * plane;
        if (gbias) {
            double s = 0.0;
            for (int64_t i = 0; i < plane; ++i) s += go[i];
            gbias[oc] += s;
        }
        for (int ic = 0; ic < ci; ++ic) {
            const double* x = in + ic * plane;
            double* gw = gweight + ((static_cast<int64_t>(oc) * ci + ic) * k * k * k);
            for (int kz = 0; kz < k; ++kz) {
                for (int ky = 0; ky < k; ++ky) {
                    for (int kx = 0; kx < k; ++kx) {
                        const int dz = kz - r, dy = ky - r, dx = kx - r;
                        const int z0 = std::max(0, -dz), z1 = std::min(d, d - dz);
                        const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
                        const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
                        double s = 0.0;
                        for (int z = z0; z < z1; ++z) {
                            for (int y = y0; y < y1; ++y) {
                                const double* grow = go + (static_cast<int64_t>(z) * h + y) * w;
                                const double* xrow =
                                    x + (static_cast<int64_t>(z + dz) * h + (y + dy)) * w + dx;
                                for (int xx = x0; xx < x1; ++xx) s += grow[xx] * xrow[xx];
                            }
                        }
                        gw[(kz * k + ky) * k + kx] += s;
                    }
                }
            }
        }
    }
}

void conv3d_s2(const double* in, int ci, int d, int h, int w, const double* weight,
               const double* bias, int co, double* out) {
    const int od = d / 2, oh = h / 2, ow = w / 2;
    const int64_t iplane = static_cast<int64_t>(d) * h * w;
    const int64_t oplane = static_cast<int64_t>(od) * oh * ow;
    for (int oc = 0; oc < co; ++oc) {
        double* o = out + oc * oplane;
        for (int64_t i = 0; i < oplane; ++i) o[i] = bias ? bias[oc] : 0.0;
        for (int ic = 0; ic < ci; ++ic) {
            const double* x = in + ic * iplane;
            const double* wt = weight + (static_cast<int64_t>(oc) * ci + ic) * 27;
            for (int z = 0; z < od; ++z) {
                for (int y = 0; y < oh; ++y) {
                    for (int xx = 0; xx < ow; ++xx) {
                        double s = 0.0;
                        for (int kz = 0; kz < 3; ++kz) {
                            int iz = 2 * z + kz - 1;
                            if (iz < 0 || iz >= d) continue;
                            for (int ky = 0; ky < 3; ++ky) {
                                int iy = 2 * y + ky - 1;
                                if (iy < 0 || iy >= h) continue;
                                for (int kx = 0; kx < 3; ++kx) {
                                    int ix = 2 * xx + kx - 1;
                                    if (ix < 0 || ix >= w) continue;
                                    s += wt[(kz * 3 + ky) * 3 + kx] *
                                         x[(static_cast<int64_t>(iz) * h + iy) * w + ix];
                                }
                            }
                        }
                        o[(static_cast<int64_t>(z) * oh + y) * ow + xx] += s;
                    }
                }
            }
        }
    }
}

void conv3d_s2_grad_input(const double* gout, int co, const double* weight, int ci, int d,
                          int h, int w, double* gin) {
    const int od = d / 2, oh = h / 2, ow = w / 2;
    const int64_t iplane = static_cast<int64_t>(d) * h * w;
    const int64_t oplane = static_cast<int64_t>(od) * oh * ow;
    for (int oc = 0; oc < co; ++oc) {
        const double* go = gout + oc * oplane;
        for (int ic = 0; ic < ci; ++ic) {
            double* gx = gin + ic * iplane;
            const double* wt = weight + (static_cast<int64_t>(oc) * ci + ic) * 27;
            for (int z = 0; z < od; ++z)
                for (int y = 0; y < oh; ++y)
                    for (int xx = 0; xx < ow; ++xx) {
                        const double gv = go[(static_cast<int64_t>(z) * oh + y) * ow + xx];
                        if (gv == 0.0) continue;
                        for (int kz = 0; kz < 3; ++kz) {
                            int iz = 2 * z + kz - 1;
                            if (iz < 0 || iz >= d) continue;
                            for (int ky = 0; ky < 3; ++ky) {
                                int iy = 2 * y + ky - 1;
                                if (iy < 0 || iy >= h) continue;
                                for (int kx = 0; kx < 3; ++kx) {
                                    int ix = 2 * xx + kx - 1;
                                    if (ix < 0 || ix >= w) continue;
                                    gx[(static_cast<int64_t>(iz) * h + iy) * w + ix] +=
                                        gv * wt[(kz * 3 + ky) * 3 + kx];
                                }
                            }
                        }
                    }
        }
    }
}

void conv3d_s2_grad_params(const double* gout, int co, const double* in, int ci, int d, int h,
                           int w, double* gweight, double* gbias) {
    const int od = d / 2, oh = h / 2, ow = w / 2;
    const int64_t iplane = static_cast<int64_t>(d) * h * w;
    const int64_t oplane = static_cast<int64_t>(od) * oh * ow;
    for (int oc = 0; oc < co; ++oc) {
        const double* go = gout + oc * oplane;
        if (gbias) {
            double s = 0.0;
            for (int64_t i = 0; i < oplane; ++i) s += go[i];
            gbias[oc] += s;
        }
        for (int ic = 0; ic < ci; ++ic) {
            const double* x = in + ic * iplane;
            double* gw = gweight + (static_cast<int64_t>(oc) * ci + ic) * 27;
            for (int z = 0; z < od; ++z)
                for (int y = 0; y < oh; ++y)
                    for (int xx = 0; xx < ow; ++xx) {
                        const double gv = go[(static_cast<int64_t>(z) * oh + y) * ow + xx];
                        if (gv == 0.0) continue;
                        for (int kz = 0; kz < 3; ++kz) {
                            int iz = 2 * z + kz - 1;
                            if (iz < 0 || iz >= d) continue;
                            for (int ky = 0; ky < 3; ++ky) {
                                int iy = 2 * y + ky - 1;
                                if (iy < 0 || iy >= h) continue;
                                for (int kx = 0; kx < 3; ++kx) {
                                    int ix = 2 * xx + kx - 1;
                                    if (ix < 0 || ix >= w) continue;
                                    gw[(kz * 3 + ky) * 3 + kx] +=
                                        gv * x[(static_cast<int64_t>(iz) * h + iy) * w + ix];
                                }
                            }
                        }
                    }
        }
    }
}

void upsample2x(const double* in, int c, int d, int h, int w, double* out) {
    const int od = 2 * d, oh = 2 * h, ow = 2 * w;
    for (int ic = 0; ic < c; ++ic) {
        const double* x = in + static_cast<int64_t>(ic) * d * h * w;
        double* o = out + static_cast<int64_t>(ic) * od * oh * ow;
        for (int z = 0; z < od; ++z)
            for (int y = 0; y < oh; ++y)
                for (int xx = 0; xx < ow; ++xx)
                    o[(static_cast<int64_t>(z) * oh + y) * ow + xx] =
                        x[(static_cast<int64_t>(z / 2) * h + y / 2) * w + xx / 2];
    }
}

void upsample2x_grad(const double* gout, int c, int d, int h, int w, double* gin) {
    const int od = 2 * d, oh = 2 * h, ow = 2 * w;
    for (int ic = 0; ic < c; ++ic) {
        const double* go = gout + static_cast<int64_t>(ic) * od * oh * ow;
        double* gx = gin + static_cast<int64_t>(ic) * d * h * w;
        for (int z = 0; z < od; ++z)
            for (int y = 0; y < oh; ++y)
                for (int xx = 0; xx < ow; ++xx)
                    gx[(static_cast<int64_t>(z / 2) * h + y / 2) * w + xx / 2] +=
                        go[(static_cast<int64_t>(z) * oh + y) * ow + xx];
    }
}

namespace {

struct LerpAxis {
    int i0, i1;
    double t;
};

// half-pixel-center source coordinate, clamped to the valid range
inline LerpAxis axis_coords(int dst, int src_len, int dst_len, bool trilinear) {
    double c = (dst + 0.5) * static_cast<double>(src_len) / dst_len - 0.5;
    if (!trilinear) {
        int i = std::clamp(static_cast<int>(std::floor(c + 0.5)), 0, src_len - 1);
        return {i, i, 0.0};
    }
    c = std::clamp(c, 0.0, static_cast<double>(src_len - 1));
    int i0 = static_cast<int>(std::floor(c));
    int i1 = std::min(i0 + 1, src_len - 1);
    return {i0, i1, c - i0};
}

} // namespace

void resample3d(const double* in, int c, int sd, int sh, int sw, double* out, int td, int th,
                int tw, bool trilinear) {
    std::vector<LerpAxis> zc(static_cast<size_t>(td)), yc(static_cast<size_t>(th)),
        xc(static_cast<size_t>(tw));
    for (int z = 0; z < td; ++z) zc[static_cast<size_t>(z)] = axis_coords(z, sd, td, trilinear);
    for (int y = 0; y < th; ++y) yc[static_cast<size_t>(y)] = axis_coords(y, sh, th, trilinear);
    for (int x = 0; x < tw; ++x) xc[static_cast<size_t>(x)] = axis_coords(x, sw, tw, trilinear);
    for (int ic = 0; ic < c; ++ic) {
        const double* src = in + static_cast<int64_t>(ic) * sd * sh * sw;
        double* dst = out + static_cast<int64_t>(ic) * td * th * tw;
        for (int z = 0; z < td; ++z) {
            const auto& az = zc[static_cast<size_t>(z)];
            for (int y = 0; y < th; ++y) {
                const auto& ay = yc[static_cast<size_t>(y)];
                for (int x = 0; x < tw; ++x) {
                    const auto& ax = xc[static_cast<size_t>(x)];
                    auto v = [&](int zz, int yy, int xx) {
                        return src[(static_cast<int64_t>(zz) * sh + yy) * sw + xx];
                    };
                    // lerp x, then y, then z
                    double v00 = v(az.i0, ay.i0, ax.i0) + ax.t * (v(az.i0, ay.i0, ax.i1) - v(az.i0, ay.i0, ax.i0));
                    double v01 = v(az.i0, ay.i1, ax.i0) + ax.t * (v(az.i0, ay.i1, ax.i1) - v(az.i0, ay.i1, ax.i0));
                    double v10 = v(az.i1, ay.i0, ax.i0) + ax.t * (v(az.i1, ay.i0, ax.i1) - v(az.i1, ay.i0, ax.i0));
                    double v11 = v(az.i1, ay.i1, ax.i0) + ax.t * (v(az.i1, ay.i1, ax.i1) - v(az.i1, ay.i1, ax.i0));
                    double v0 = v00 + ay.t * (v01 - v00);
                    double v1 = v10 + ay.t * (v11 - v10);
                    dst[(static_cast<int64_t>(z) * th + y) * tw + x] = v0 + az.t * (v1 - v0);
                }
            }
        }
    }
}

void resample3d_grad(const double* gout, int c, int td, int th, int tw, double* gin, int sd,
                     int sh, int sw, bool trilinear) {
    std::vector<LerpAxis> zc(static_cast<size_t>(td)), yc(static_cast<size_t>(th)),
        xc(static_cast<size_t>(tw));
    for (int z = 0; z < td; ++z) zc[static_cast<size_t>(z)] = axis_coords(z, sd, td, trilinear);
    for (int y = 0; y < th; ++y) yc[static_cast<size_t>(y)] = axis_coords(y, sh, th, trilinear);
    for (int x = 0; x < tw; ++x) xc[static_cast<size_t>(x)] = axis_coords(x, sw, tw, trilinear);
    for (int ic = 0; ic < c; ++ic) {
        double* gsrc = gin + static_cast<int64_t>(ic) * sd * sh * sw;
        const double* go = gout + static_cast<int64_t>(ic) * td * th * tw;
        for (int z = 0; z < td; ++z) {
            const auto& az = zc[static_cast<size_t>(z)];
            for (int y = 0; y < th; ++y) {
                const auto& ay = yc[static_cast<size_t>(y)];
                for (int x = 0; x < tw; ++x) {
                    const auto& ax = xc[static_cast<size_t>(x)];
                    const double gv = go[(static_cast<int64_t>(z) * th + y) * tw + x];
                    if (gv == 0.0) continue;
                    auto acc = [&](int zz, int yy, int xx, double wgt) {
                        gsrc[(static_cast<int64_t>(zz) * sh + yy) * sw + xx] += gv * wgt;
                    };
                    double wz[2] = {1.0 - az.t, az.t};
                    double wy[2] = {1.0 - ay.t, ay.t};
                    double wx[2] = {1.0 - ax.t, ax.t};
                    int iz[2] = {az.i0, az.i1}, iy[2] = {ay.i0, ay.i1}, ix[2] = {ax.i0, ax.i1};
                    for (int a = 0; a < 2; ++a)
                        for (int b = 0; b < 2; ++b)
                            for (int d2 = 0; d2 < 2; ++d2) {
                                double wgt = wz[a] * wy[b] * wx[d2];
                                if (wgt != 0.0) acc(iz[a], iy[b], ix[d2], wgt);
                            }
                }
            }
        }
    }
}

void matmul(const double* a, const double* b, double* out, int64_t m, int64_t kk, int64_t n) {
    std::fill(out, out + m * n, 0.0);
    for (int64_t i = 0; i < m; ++i) {
        double* orow = out + i * n;
        const double* arow = a + i * kk;
        for (int64_t k = 0; k < kk; ++k) {
            const double av = arow[k];
            if (av == 0.0) continue;
            const double* brow = b + k * n;
            for (int64_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
}

void matmul_at_b(const double* a, const double* b, double* out, int64_t m, int64_t kk,
                 int64_t n) {
    for (int64_t i = 0; i < m; ++i) {
        const double* arow = a + i * kk;
        const double* brow = b + i * n;
        for (int64_t k = 0; k < kk; ++k) {
            const double av = arow[k];
            if (av == 0.0) continue;
            double* orow = out + k * n;
            for (int64_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
}

void matmul_a_bt(const double* a, const double* b, double* out, int64_t m, int64_t kk,
                 int64_t n) {
    for (int64_t i = 0; i < m; ++i) {
        const double* arow = a + i * n;
        double* orow = out + i * kk;
        for (int64_t k = 0; k < kk; ++k) {
            const double* brow = b + k * n;
            double s = 0.0;
            for (int64_t j = 0; j < n; ++j) s += arow[j] * brow[j];
            orow[k] += s;
        }
    }
}

// ---------------------------------------------------------------- graph ops

namespace {

void accumulate(Node& parent, const Tensor& g) {
    if (!parent.requires_grad) return;
    Tensor& buf = parent.grad_buf();
    for (int64_t i = 0; i < g.numel(); ++i) buf[i] += g[i];
}

} // namespace

NodePtr add(Graph& g, NodePtr a, NodePtr b) {
    require(a->value.same_shape(b->value), "add: shape mismatch");
    Tensor out = a->value;
    for (int64_t i = 0; i < out.numel(); ++i) out[i] += b->value[i];
    return g.make(std::move(out), {a, b}, [](Node& n) {
        accumulate(*n.parents[0], n.grad);
        accumulate(*n.parents[1], n.grad);
    });
}

NodePtr sub(Graph& g, NodePtr a, NodePtr b) {
    require(a->value.same_shape(b->value), "sub: shape mismatch");
    Tensor out = a->value;
    for (int64_t i = 0; i < out.numel(); ++i) out[i] -= b->value[i];
    return g.make(std::move(out), {a, b}, [](Node& n) {
        accumulate(*n.parents[0], n.grad);
        if (n.parents[1]->requires_grad) {
            Tensor& buf = n.parents[1]->grad_buf();
            for (int64_t i = 0; i < n.grad.numel(); ++i) buf[i] -= n.grad[i];
        }
    });
}

NodePtr mul(Graph& g, NodePtr a, NodePtr b) {
    require(a->value.same_shape(b->value), "mul: shape mismatch");
    Tensor out = a->value;
    for (int64_t i = 0; i < out.numel(); ++i) out[i] *= b->value[i];
    return g.make(std::move(out), {a, b}, [](Node& n) {
        Node &pa = *n.parents[0], &pb = *n.parents[1];
        if (pa.requires_grad) {
            Tensor& buf = pa.grad_buf();
            for (int64_t i = 0; i < n.grad.numel(); ++i) buf[i] += n.grad[i] * pb.value[i];
        }
        if (pb.requires_grad) {
            Tensor& buf = pb.grad_buf();
            for (int64_t i = 0; i < n.grad.numel(); ++i) buf[i] += n.grad[i] * pa.value[i];
        }
    });
}

NodePtr scale(Graph& g, NodePtr a, double s) {
    Tensor out = a->value;
    for (int64_t i = 0; i < out.numel(); ++i) out[i] *= s;
    return g.make(std::move(out), {a}, [s](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        Tensor& buf = n.parents[0]->grad_buf();
        for (int64_t i = 0; i < n.grad.numel(); ++i) buf[i] += s * n.grad[i];
    });
}

NodePtr mul_scalar_node(Graph& g, NodePtr a, NodePtr s) {
    require(s->value.numel() == 1, "mul_scalar_node expects a 1-element scaler");
    const double sv = s->value[0];
    Tensor out = a->value;
    for (int64_t i = 0; i < out.numel(); ++i) out[i] *= sv;
    return g.make(std::move(out), {a, s}, [sv](Node& n) {
        Node &pa = *n.parents[0], &ps = *n.parents[1];
        if (pa.requires_grad) {
            Tensor& buf = pa.grad_buf();
            for (int64_t i = 0; i < n.grad.numel(); ++i) buf[i] += sv * n.grad[i];
        }
        if (ps.requires_grad) {
            double acc = 0.0;
            for (int64_t i = 0; i < n.grad.numel(); ++i) acc += n.grad[i] * pa.value[i];
            ps.grad_buf()[0] += acc;
        }
    });
}

NodePtr detach(Graph& g, NodePtr a) { return g.leaf(a->value, false); }

NodePtr silu(Graph& g, NodePtr a) {
    Tensor out = a->value;
    for (int64_t i = 0; i < out.numel(); ++i) {
        double s = 1.0 / (1.0 + std::exp(-out[i]));
        out[i] *= s;
    }
    return g.make(std::move(out), {a}, [](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        Tensor& buf = n.parents[0]->grad_buf();
        const Tensor& x = n.parents[0]->value;
        for (int64_t i = 0; i < n.grad.numel(); ++i) {
            double s = 1.0 / (1.0 + std::exp(-x[i]));
            buf[i] += n.grad[i] * s * (1.0 + x[i] * (1.0 - s));
        }
    });
}

NodePtr gelu(Graph& g, NodePtr a) {
    static const double kInvSqrt2 = 0.70710678118654752440;
    static const double kInvSqrt2Pi = 0.39894228040143267794;
    Tensor out = a->value;
    for (int64_t i = 0; i < out.numel(); ++i)
        out[i] = 0.5 * out[i] * (1.0 + std::erf(out[i] * kInvSqrt2));
    return g.make(std::move(out), {a}, [](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        Tensor& buf = n.parents[0]->grad_buf();
        const Tensor& x = n.parents[0]->value;
        for (int64_t i = 0; i < n.grad.numel(); ++i) {
            double phi = 0.5 * (1.0 + std::erf(x[i] * kInvSqrt2));
            double pdf = kInvSqrt2Pi * std::exp(-0.5 * x[i] * x[i]);
            buf[i] += n.grad[i] * (phi + x[i] * pdf);
        }
    });
}

NodePtr sum_all(Graph& g, NodePtr a) {
    double s = 0.0;
    for (int64_t i = 0; i < a->value.numel(); ++i) s += a->value[i];
    return g.make(Tensor({1}, {s}), {a}, [](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        Tensor& buf = n.parents[0]->grad_buf();
        for (int64_t i = 0; i < buf.numel(); ++i) buf[i] += n.grad[0];
    });
}

NodePtr mean_all(Graph& g, NodePtr a) { return scale(g, sum_all(g, a), 1.0 / a->value.numel()); }

NodePtr l2_norm(Graph& g, NodePtr a) {
    double ss = 0.0;
    for (int64_t i = 0; i < a->value.numel(); ++i) ss += a->value[i] * a->value[i];
    double r = std::sqrt(ss + 1e-24);
    return g.make(Tensor({1}, {r}), {a}, [r](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        Tensor& buf = n.parents[0]->grad_buf();
        const Tensor& x = n.parents[0]->value;
        const double c = n.grad[0] / r;
        for (int64_t i = 0; i < buf.numel(); ++i) buf[i] += c * x[i];
    });
}

NodePtr add_scalars(Graph& g, const std::vector<NodePtr>& xs) {
    require(!xs.empty(), "add_scalars needs at least one input");
    double s = 0.0;
    for (const auto& x : xs) {
        require(x->value.numel() == 1, "add_scalars expects scalars");
        s += x->value[0];
    }
    return g.make(Tensor({1}, {s}), xs, [](Node& n) {
        for (auto& p : n.parents)
            if (p->requires_grad) p->grad_buf()[0] += n.grad[0];
    });
}

NodePtr matmul(Graph& g, NodePtr a, NodePtr b) {
    require(a->value.ndim() == 2 && b->value.ndim() == 2, "matmul expects 2D tensors");
    const int64_t m = a->value.dim(0), kk = a->value.dim(1), n2 = b->value.dim(1);
    require(b->value.dim(0) == kk, "matmul inner dimension mismatch");
    Tensor out({m, n2});
    matmul(a->value.data(), b->value.data(), out.data(), m, kk, n2);
    return g.make(std::move(out), {a, b}, [m, kk, n2](Node& n) {
        Node &pa = *n.parents[0], &pb = *n.parents[1];
        if (pa.requires_grad)
            matmul_a_bt(n.grad.data(), pb.value.data(), pa.grad_buf().data(), m, kk, n2);
        if (pb.requires_grad)
            matmul_at_b(pa.value.data(), n.grad.data(), pb.grad_buf().data(), m, kk, n2);
    });
}

NodePtr add_rowvec(Graph& g, NodePtr x, NodePtr v) {
    require(x->value.ndim() == 2 && v->value.ndim() == 1, "add_rowvec shapes");
    const int64_t rows = x->value.dim(0), cols = x->value.dim(1);
    require(v->value.dim(0) == cols, "add_rowvec width mismatch");
    Tensor out = x->value;
    for (int64_t r = 0; r < rows; ++r)
        for (int64_t c = 0; c < cols; ++c) out[r * cols + c] += v->value[c];
    return g.make(std::move(out), {x, v}, [rows, cols](Node& n) {
        accumulate(*n.parents[0], n.grad);
        if (n.parents[1]->requires_grad) {
            Tensor& buf = n.parents[1]->grad_buf();
            for (int64_t r = 0; r < rows; ++r)
                for (int64_t c = 0; c < cols; ++c) buf[c] += n.grad[r * cols + c];
        }
    });
}

NodePtr mul_rowvec(Graph& g, NodePtr x, NodePtr v) {
    require(x->value.ndim() == 2 && v->value.ndim() == 1, "mul_rowvec shapes");
    const int64_t rows = x->value.dim(0), cols = x->value.dim(1);
    require(v->value.dim(0) == cols, "mul_rowvec width mismatch");
    Tensor out = x->value;
    for (int64_t r = 0; r < rows; ++r)
        for (int64_t c = 0; c < cols; ++c) out[r * cols + c] *= v->value[c];
    return g.make(std::move(out), {x, v}, [rows, cols](Node& n) {
        Node &px = *n.parents[0], &pv = *n.parents[1];
        if (px.requires_grad) {
            Tensor& buf = px.grad_buf();
            for (int64_t r = 0; r < rows; ++r)
                for (int64_t c = 0; c < cols; ++c)
                    buf[r * cols + c] += n.grad[r * cols + c] * pv.value[c];
        }
        if (pv.requires_grad) {
            Tensor& buf = pv.grad_buf();
            for (int64_t r = 0; r < rows; ++r)
                for (int64_t c = 0; c < cols; ++c)
                    buf[c] += n.grad[r * cols + c] * px.value[r * cols + c];
        }
    });
}

NodePtr slice_rows(Graph& g, NodePtr x, int64_t r0, int64_t r1) {
    require(x->value.ndim() == 2, "slice_rows expects 2D");
    const int64_t cols = x->value.dim(1);
    require(0 <= r0 && r0 < r1 && r1 <= x->value.dim(0), "slice_rows range");
    Tensor out({r1 - r0, cols});
    std::copy(x->value.data() + r0 * cols, x->value.data() + r1 * cols, out.data());
    return g.make(std::move(out), {x}, [r0, cols](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        Tensor& buf = n.parents[0]->grad_buf();
        for (int64_t i = 0; i < n.grad.numel(); ++i) buf[r0 * cols + i] += n.grad[i];
    });
}

NodePtr slice_cols(Graph& g, NodePtr x, int64_t c0, int64_t c1) {
    require(x->value.ndim() == 2, "slice_cols expects 2D");
    const int64_t rows = x->value.dim(0), cols = x->value.dim(1);
    require(0 <= c0 && c0 < c1 && c1 <= cols, "slice_cols range");
    Tensor out({rows, c1 - c0});
    for (int64_t r = 0; r < rows; ++r)
        std::copy(x->value.data() + r * cols + c0, x->value.data() + r * cols + c1,
                  out.data() + r * (c1 - c0));
    return g.make(std::move(out), {x}, [c0, c1, cols](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        Tensor& buf = n.parents[0]->grad_buf();
        const int64_t wd = c1 - c0;
        for (int64_t r = 0; r < n.grad.dim(0); ++r)
            for (int64_t c = 0; c < wd; ++c) buf[r * cols + c0 + c] += n.grad[r * wd + c];
    });
}

NodePtr concat_rows(Graph& g, const std::vector<NodePtr>& xs) {
    require(!xs.empty(), "concat_rows needs inputs");
    const int64_t cols = xs[0]->value.dim(1);
    int64_t rows = 0;
    for (const auto& x : xs) {
        require(x->value.ndim() == 2 && x->value.dim(1) == cols, "concat_rows width mismatch");
        rows += x->value.dim(0);
    }
    Tensor out({rows, cols});
    int64_t off = 0;
    for (const auto& x : xs) {
        std::copy(x->value.data(), x->value.data() + x->value.numel(), out.data() + off);
        off += x->value.numel();
    }
    return g.make(std::move(out), xs, [](Node& n) {
        int64_t off = 0;
        for (auto& p : n.parents) {
            if (p->requires_grad) {
                Tensor& buf = p->grad_buf();
                for (int64_t i = 0; i < p->value.numel(); ++i) buf[i] += n.grad[off + i];
            }
            off += p->value.numel();
        }
    });
}

NodePtr concat_cols(Graph& g, const std::vector<NodePtr>& xs) {
    require(!xs.empty(), "concat_cols needs inputs");
    const int64_t rows = xs[0]->value.dim(0);
    int64_t cols = 0;
    for (const auto& x : xs) {
        require(x->value.ndim() == 2 && x->value.dim(0) == rows, "concat_cols height mismatch");
        cols += x->value.dim(1);
    }
    Tensor out({rows, cols});
    int64_t off = 0;
    for (const auto& x : xs) {
        const int64_t wd = x->value.dim(1);
        for (int64_t r = 0; r < rows; ++r)
            std::copy(x->value.data() + r * wd, x->value.data() + (r + 1) * wd,
                      out.data() + r * cols + off);
        off += wd;
    }
    return g.make(std::move(out), xs, [rows, cols](Node& n) {
        int64_t off = 0;
        for (auto& p : n.parents) {
            const int64_t wd = p->value.dim(1);
            if (p->requires_grad) {
                Tensor& buf = p->grad_buf();
                for (int64_t r = 0; r < rows; ++r)
                    for (int64_t c = 0; c < wd; ++c)
                        buf[r * wd + c] += n.grad[r * cols + off + c];
            }
            off += wd;
        }
    });
}

NodePtr transpose2d(Graph& g, NodePtr x) {
    require(x->value.ndim() == 2, "transpose2d expects 2D");
    const int64_t rows = x->value.dim(0), cols = x->value.dim(1);
    Tensor out({cols, rows});
    for (int64_t r = 0; r < rows; ++r)
        for (int64_t c = 0; c < cols; ++c) out[c * rows + r] = x->value[r * cols + c];
    return g.make(std::move(out), {x}, [rows, cols](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        Tensor& buf = n.parents[0]->grad_buf();
        for (int64_t r = 0; r < rows; ++r)
            for (int64_t c = 0; c < cols; ++c) buf[r * cols + c] += n.grad[c * rows + r];
    });
}

NodePtr row_gather(Graph& g, NodePtr table, std::vector<int64_t> rows) {
    require(table->value.ndim() == 2, "row_gather expects a 2D table");
    const int64_t cols = table->value.dim(1);
    Tensor out({static_cast<int64_t>(rows.size()), cols});
    for (size_t i = 0; i < rows.size(); ++i) {
        require(rows[i] >= 0 && rows[i] < table->value.dim(0), "row_gather index out of range");
        std::copy(table->value.data() + rows[i] * cols, table->value.data() + (rows[i] + 1) * cols,
                  out.data() + static_cast<int64_t>(i) * cols);
    }
    return g.make(std::move(out), {table}, [rows = std::move(rows), cols](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        Tensor& buf = n.parents[0]->grad_buf();
        for (size_t i = 0; i < rows.size(); ++i)
            for (int64_t c = 0; c < cols; ++c)
                buf[rows[i] * cols + c] += n.grad[static_cast<int64_t>(i) * cols + c];
    });
}

NodePtr standardize_rows(Graph& g, NodePtr x, double eps) {
    require(x->value.ndim() == 2, "standardize_rows expects 2D");
    const int64_t rows = x->value.dim(0), cols = x->value.dim(1);
    Tensor out({rows, cols});
    Tensor inv_std({rows});
    for (int64_t r = 0; r < rows; ++r) {
        const double* xr = x->value.data() + r * cols;
        double mean = 0.0;
        for (int64_t c = 0; c < cols; ++c) mean += xr[c];
        mean /= cols;
        double var = 0.0;
        for (int64_t c = 0; c < cols; ++c) var += (xr[c] - mean) * (xr[c] - mean);
        var /= cols;
        double is = 1.0 / std::sqrt(var + eps);
        inv_std[r] = is;
        for (int64_t c = 0; c < cols; ++c) out[r * cols + c] = (xr[c] - mean) * is;
    }
    Tensor xhat = out;
    return g.make(std::move(out), {x}, [rows, cols, inv_std, xhat](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        Tensor& buf = n.parents[0]->grad_buf();
        for (int64_t r = 0; r < rows; ++r) {
            const double* gr = n.grad.data() + r * cols;
            const double* xh = xhat.data() + r * cols;
            double gmean = 0.0, gdot = 0.0;
            for (int64_t c = 0; c < cols; ++c) {
                gmean += gr[c];
                gdot += gr[c] * xh[c];
            }
            gmean /= cols;
            gdot /= cols;
            for (int64_t c = 0; c < cols; ++c)
                buf[r * cols + c] += inv_std[r] * (gr[c] - gmean - xh[c] * gdot);
        }
    });
}

NodePtr normalize_rows(Graph& g, NodePtr x) {
    require(x->value.ndim() == 2, "normalize_rows expects 2D");
    const int64_t rows = x->value.dim(0), cols = x->value.dim(1);
    Tensor out({rows, cols});
    Tensor norms({rows});
    for (int64_t r = 0; r < rows; ++r) {
        const double* xr = x->value.data() + r * cols;
        double ss = 1e-24;
        for (int64_t c = 0; c < cols; ++c) ss += xr[c] * xr[c];
        double nr = std::sqrt(ss);
        norms[r] = nr;
        for (int64_t c = 0; c < cols; ++c) out[r * cols + c] = xr[c] / nr;
    }
    return g.make(std::move(out), {x}, [rows, cols, norms](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        Tensor& buf = n.parents[0]->grad_buf();
        const Tensor& x = n.parents[0]->value;
        for (int64_t r = 0; r < rows; ++r) {
            const double* gr = n.grad.data() + r * cols;
            const double* xr = x.data() + r * cols;
            double dotgx = 0.0;
            for (int64_t c = 0; c < cols; ++c) dotgx += gr[c] * xr[c];
            const double nr = norms[r];
            const double inv = 1.0 / nr, inv3 = 1.0 / (nr * nr * nr);
            for (int64_t c = 0; c < cols; ++c)
                buf[r * cols + c] += gr[c] * inv - xr[c] * dotgx * inv3;
        }
    });
}

NodePtr softmax_rows(Graph& g, NodePtr x) {
    require(x->value.ndim() == 2, "softmax_rows expects 2D");
    const int64_t rows = x->value.dim(0), cols = x->value.dim(1);
    Tensor out({rows, cols});
    for (int64_t r = 0; r < rows; ++r) {
        const double* xr = x->value.data() + r * cols;
        double mx = xr[0];
        for (int64_t c = 1; c < cols; ++c) mx = std::max(mx, xr[c]);
        double z = 0.0;
        for (int64_t c = 0; c < cols; ++c) {
            out[r * cols + c] = std::exp(xr[c] - mx);
            z += out[r * cols + c];
        }
        for (int64_t c = 0; c < cols; ++c) out[r * cols + c] /= z;
    }
    Tensor y = out;
    return g.make(std::move(out), {x}, [rows, cols, y](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        Tensor& buf = n.parents[0]->grad_buf();
        for (int64_t r = 0; r < rows; ++r) {
            const double* gr = n.grad.data() + r * cols;
            const double* yr = y.data() + r * cols;
            double dot = 0.0;
            for (int64_t c = 0; c < cols; ++c) dot += gr[c] * yr[c];
            for (int64_t c = 0; c < cols; ++c) buf[r * cols + c] += yr[c] * (gr[c] - dot);
        }
    });
}

NodePtr cross_entropy_mean(Graph& g, NodePtr logits, std::vector<int32_t> targets,
                           std::vector<double>* per_row_ce) {
    require(logits->value.ndim() == 2, "cross_entropy expects 2D logits");
    const int64_t rows = logits->value.dim(0), cols = logits->value.dim(1);
    require(static_cast<int64_t>(targets.size()) == rows, "cross_entropy target count mismatch");
    Tensor probs({rows, cols});
    double total = 0.0;
    for (int64_t r = 0; r < rows; ++r) {
        const double* xr = logits->value.data() + r * cols;
        require(targets[static_cast<size_t>(r)] >= 0 && targets[static_cast<size_t>(r)] < cols,
                "cross_entropy target out of range");
        double mx = xr[0];
        for (int64_t c = 1; c < cols; ++c) mx = std::max(mx, xr[c]);
        double z = 0.0;
        for (int64_t c = 0; c < cols; ++c) {
            probs[r * cols + c] = std::exp(xr[c] - mx);
            z += probs[r * cols + c];
        }
        double lse = mx + std::log(z);
        for (int64_t c = 0; c < cols; ++c) probs[r * cols + c] /= z;
        double ce = lse - xr[targets[static_cast<size_t>(r)]];
        if (per_row_ce) per_row_ce->push_back(ce);
        total += ce;
    }
    total /= static_cast<double>(rows);
    return g.make(Tensor({1}, {total}), {logits},
                  [rows, cols, probs, targets = std::move(targets)](Node& n) {
                      if (!n.parents[0]->requires_grad) return;
                      Tensor& buf = n.parents[0]->grad_buf();
                      const double c0 = n.grad[0] / static_cast<double>(rows);
                      for (int64_t r = 0; r < rows; ++r) {
                          for (int64_t c = 0; c < cols; ++c)
                              buf[r * cols + c] += c0 * probs[r * cols + c];
                          buf[r * cols + targets[static_cast<size_t>(r)]] -= c0;
                      }
                  });
}

NodePtr conv3d_op(Graph& g, NodePtr x, NodePtr w, NodePtr b) {
    require(x->value.ndim() == 4 && w->value.ndim() == 5, "conv3d shapes");
    const int ci = static_cast<int>(x->value.dim(0));
    const int d = static_cast<int>(x->value.dim(1)), h = static_cast<int>(x->value.dim(2)),
              wd = static_cast<int>(x->value.dim(3));
    const int co = static_cast<int>(w->value.dim(0));
    const int k = static_cast<int>(w->value.dim(2));
    require(w->value.dim(1) == ci && w->value.dim(3) == k && w->value.dim(4) == k,
            "conv3d weight shape mismatch");
    require(b->value.numel() == co, "conv3d bias shape mismatch");
    Tensor out({co, d, h, wd});
    conv3d(x->value.data(), ci, d, h, wd, w->value.data(), b->value.data(), co, k, out.data());
    return g.make(std::move(out), {x, w, b}, [ci, d, h, wd, co, k](Node& n) {
        Node &px = *n.parents[0], &pw = *n.parents[1], &pb = *n.parents[2];
        if (px.requires_grad)
            conv3d_grad_input(n.grad.data(), co, pw.value.data(), ci, d, h, wd, k,
                              px.grad_buf().data());
        if (pw.requires_grad || pb.requires_grad)
            conv3d_grad_params(n.grad.data(), co, px.value.data(), ci, d, h, wd, k,
                               pw.grad_buf().data(),
                               pb.requires_grad ? pb.grad_buf().data() : nullptr);
    });
}

NodePtr conv3d_s2_op(Graph& g, NodePtr x, NodePtr w, NodePtr b) {
    require(x->value.ndim() == 4 && w->value.ndim() == 5, "conv3d_s2 shapes");
    const int ci = static_cast<int>(x->value.dim(0));
    const int d = static_cast<int>(x->value.dim(1)), h = static_cast<int>(x->value.dim(2)),
              wd = static_cast<int>(x->value.dim(3));
    require(d % 2 == 0 && h % 2 == 0 && wd % 2 == 0, "conv3d_s2 needs even input sides");
    const int co = static_cast<int>(w->value.dim(0));
    require(w->value.dim(1) == ci && w->value.dim(2) == 3, "conv3d_s2 weight shape mismatch");
    Tensor out({co, d / 2, h / 2, wd / 2});
    conv3d_s2(x->value.data(), ci, d, h, wd, w->value.data(), b->value.data(), co, out.data());
    return g.make(std::move(out), {x, w, b}, [ci, d, h, wd, co](Node& n) {
        Node &px = *n.parents[0], &pw = *n.parents[1], &pb = *n.parents[2];
        if (px.requires_grad)
            conv3d_s2_grad_input(n.grad.data(), co, pw.value.data(), ci, d, h, wd,
                                 px.grad_buf().data());
        if (pw.requires_grad || pb.requires_grad)
            conv3d_s2_grad_params(n.grad.data(), co, px.value.data(), ci, d, h, wd,
                                  pw.grad_buf().data(),
                                  pb.requires_grad ? pb.grad_buf().data() : nullptr);
    });
}

NodePtr upsample2x_op(Graph& g, NodePtr x) {
    require(x->value.ndim() == 4, "upsample2x expects (C,D,H,W)");
    const int c = static_cast<int>(x->value.dim(0));
    const int d = static_cast<int>(x->value.dim(1)), h = static_cast<int>(x->value.dim(2)),
              w = static_cast<int>(x->value.dim(3));
    Tensor out({c, 2 * d, 2 * h, 2 * w});
    upsample2x(x->value.data(), c, d, h, w, out.data());
    return g.make(std::move(out), {x}, [c, d, h, w](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        upsample2x_grad(n.grad.data(), c, d, h, w, n.parents[0]->grad_buf().data());
    });
}

NodePtr resample_op(Graph& g, NodePtr x, std::array<int, 3> target_xyz, bool trilinear) {
    require(x->value.ndim() == 4, "resample expects (C,D,H,W)");
    const int c = static_cast<int>(x->value.dim(0));
    const int sd = static_cast<int>(x->value.dim(1)), sh = static_cast<int>(x->value.dim(2)),
              sw = static_cast<int>(x->value.dim(3));
    const int td = target_xyz[2], th = target_xyz[1], tw = target_xyz[0];
    Tensor out({c, td, th, tw});
    resample3d(x->value.data(), c, sd, sh, sw, out.data(), td, th, tw, trilinear);
    return g.make(std::move(out), {x}, [c, sd, sh, sw, td, th, tw, trilinear](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        resample3d_grad(n.grad.data(), c, td, th, tw, n.parents[0]->grad_buf().data(), sd, sh,
                        sw, trilinear);
    });
}

NodePtr group_norm(Graph& g, NodePtr x, NodePtr gamma, NodePtr beta, int groups, double eps) {
    require(x->value.ndim() == 4, "group_norm expects (C,D,H,W)");
    const int64_t c = x->value.dim(0);
    const int64_t spatial = x->value.numel() / c;
    require(c % groups == 0, "channels ", c, " not divisible by groups ", groups);
    require(gamma->value.numel() == c && beta->value.numel() == c, "group_norm affine shapes");
    const int64_t gc = c / groups; // channels per group
    const int64_t gsize = gc * spatial;

    Tensor xhat(x->value.shape());
    Tensor inv_std({static_cast<int64_t>(groups)});
    for (int64_t grp = 0; grp < groups; ++grp) {
        const double* xg = x->value.data() + grp * gsize;
        double mean = 0.0;
        for (int64_t i = 0; i < gsize; ++i) mean += xg[i];
        mean /= static_cast<double>(gsize);
        double var = 0.0;
        for (int64_t i = 0; i < gsize; ++i) var += (xg[i] - mean) * (xg[i] - mean);
        var /= static_cast<double>(gsize);
        const double is = 1.0 / std::sqrt(var + eps);
        inv_std[grp] = is;
        double* xh = xhat.data() + grp * gsize;
        for (int64_t i = 0; i < gsize; ++i) xh[i] = (xg[i] - mean) * is;
    }
    Tensor out(x->value.shape());
    for (int64_t ch = 0; ch < c; ++ch) {
        const double gam = gamma->value[ch], bet = beta->value[ch];
        const double* xh = xhat.data() + ch * spatial;
        double* o = out.data() + ch * spatial;
        for (int64_t i = 0; i < spatial; ++i) o[i] = gam * xh[i] + bet;
    }
    return g.make(std::move(out), {x, gamma, beta},
                  [c, spatial, groups, gc, gsize, xhat, inv_std](Node& n) {
                      Node &px = *n.parents[0], &pg = *n.parents[1], &pb = *n.parents[2];
                      if (pg.requires_grad || pb.requires_grad) {
                          Tensor& gg = pg.grad_buf();
                          Tensor& gb = pb.grad_buf();
                          for (int64_t ch = 0; ch < c; ++ch) {
                              const double* gr = n.grad.data() + ch * spatial;
                              const double* xh = xhat.data() + ch * spatial;
                              double sg = 0.0, sb = 0.0;
                              for (int64_t i = 0; i < spatial; ++i) {
                                  sg += gr[i] * xh[i];
                                  sb += gr[i];
                              }
                              gg[ch] += sg;
                              gb[ch] += sb;
                          }
                      }
                      if (px.requires_grad) {
                          Tensor& buf = px.grad_buf();
                          const Tensor& gam = pg.value;
                          for (int64_t grp = 0; grp < groups; ++grp) {
                              // u = dL/dy * gamma, then the standard whitened-input backward
                              double umean = 0.0, udot = 0.0;
                              const double* xh = xhat.data() + grp * gsize;
                              for (int64_t j = 0; j < gsize; ++j) {
                                  const int64_t ch = grp * gc + j / spatial;
                                  const double u = n.grad[ch * spatial + (j % spatial)] * gam[ch];
                                  umean += u;
                                  udot += u * xh[j];
                              }
                              umean /= static_cast<double>(gsize);
                              udot /= static_cast<double>(gsize);
                              const double is = inv_std[grp];
                              for (int64_t j = 0; j < gsize; ++j) {
                                  const int64_t ch = grp * gc + j / spatial;
                                  const double u = n.grad[ch * spatial + (j % spatial)] * gam[ch];
                                  buf[grp * gsize + j] += is * (u - umean - xh[j] * udot);
                              }
                          }
                      }
                  });
}

NodePtr reshape(Graph& g, NodePtr x, std::vector<int64_t> shape) {
    Tensor out = x->value.reshaped(shape);
    return g.make(std::move(out), {x}, [](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        Tensor& buf = n.parents[0]->grad_buf();
        for (int64_t i = 0; i < n.grad.numel(); ++i) buf[i] += n.grad[i];
    });
}

NodePtr chw_to_nc(Graph& g, NodePtr x) {
    require(x->value.ndim() == 4, "chw_to_nc expects (C,D,H,W)");
    const int64_t c = x->value.dim(0);
    const int64_t n = x->value.numel() / c;
    Tensor out({n, c});
    for (int64_t ch = 0; ch < c; ++ch)
        for (int64_t p = 0; p < n; ++p) out[p * c + ch] = x->value[ch * n + p];
    return g.make(std::move(out), {x}, [c, n](Node& nd) {
        if (!nd.parents[0]->requires_grad) return;
        Tensor& buf = nd.parents[0]->grad_buf();
        for (int64_t ch = 0; ch < c; ++ch)
            for (int64_t p = 0; p < n; ++p) buf[ch * n + p] += nd.grad[p * c + ch];
    });
}

NodePtr nc_to_chw(Graph& g, NodePtr x, std::array<int64_t, 3> dhw) {
    require(x->value.ndim() == 2, "nc_to_chw expects (N,C)");
    const int64_t n = x->value.dim(0), c = x->value.dim(1);
    require(n == dhw[0] * dhw[1] * dhw[2], "nc_to_chw spatial size mismatch");
    Tensor out({c, dhw[0], dhw[1], dhw[2]});
    for (int64_t ch = 0; ch < c; ++ch)
        for (int64_t p = 0; p < n; ++p) out[ch * n + p] = x->value[p * c + ch];
    return g.make(std::move(out), {x}, [c, n](Node& nd) {
        if (!nd.parents[0]->requires_grad) return;
        Tensor& buf = nd.parents[0]->grad_buf();
        for (int64_t ch = 0; ch < c; ++ch)
            for (int64_t p = 0; p < n; ++p) buf[p * c + ch] += nd.grad[ch * n + p];
    });
}

} // namespace wag3d::nn
