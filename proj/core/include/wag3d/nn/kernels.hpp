#pragma once

#include <cstdint>

namespace wag3d::nn {

// Dense numeric kernels shared by the trainable models and the pure quantizer
// path (both must produce bit-identical forward values). Feature maps are
// (C, D, H, W) row-major with x (W) fastest.

// stride-1 'same' zero-padded convolution with odd kernel k
void conv3d(const double* in, int ci, int d, int h, int w, const double* weight,
            const double* bias, int co, int k, double* out);
// accumulates into gin / gweight / gbias (callers zero them)
void conv3d_grad_input(const double* gout, int co, const double* weight, int ci, int d, int h,
                       int w, int k, double* gin);
void conv3d_grad_params(const double* gout, int co, const double* in, int ci, int d, int h,
                        int w, int k, double* gweight, double* gbias);

// stride-2 kernel-3 convolution (pad 1); output sides are halved (even input)
void conv3d_s2(const double* in, int ci, int d, int h, int w, const double* weight,
               const double* bias, int co, double* out);
void conv3d_s2_grad_input(const double* gout, int co, const double* weight, int ci, int d,
                          int h, int w, double* gin);
void conv3d_s2_grad_params(const double* gout, int co, const double* in, int ci, int d, int h,
                           int w, double* gweight, double* gbias);

// nearest-neighbor 2x upsample
void upsample2x(const double* in, int c, int d, int h, int w, double* out);
void upsample2x_grad(const double* gout, int c, int d, int h, int w, double* gin);

// arbitrary-size resample with half-pixel-center coordinates, edge clamped;
// trilinear lerps x, then y, then z
void resample3d(const double* in, int c, int sd, int sh, int sw, double* out, int td, int th,
                int tw, bool trilinear);
void resample3d_grad(const double* gout, int c, int td, int th, int tw, double* gin, int sd,
                     int sh, int sw, bool trilinear);

// row-major matmul: out[m x n] = a[m x kk] * b[kk x n]
void matmul(const double* a, const double* b, double* out, int64_t m, int64_t kk, int64_t n);
// out += a^T * b and out += a * b^T helpers for the backward pass
void matmul_at_b(const double* a, const double* b, double* out, int64_t m, int64_t kk,
                 int64_t n);
void matmul_a_bt(const double* a, const double* b, double* out, int64_t m, int64_t kk,
                 int64_t n);

} // namespace wag3d::nn
