#include "wag3d/quantize/codebook.hpp"

#include <algorithm>
#include <cmath>

#include "wag3d/common.hpp"

namespace wag3d {

void Codebook::validate() const {
    require(size() >= 2, "codebook needs at least 2 codes, got ", size());
    require(dim() >= 1, "codebook dimension must be positive");
    for (int64_t i = 0; i < vectors.numel(); ++i)
        require(std::isfinite(vectors[i]), "non-finite codebook vector");
    require(static_cast<int64_t>(usage.size()) == size(), "usage size mismatch");
    for (double u : usage) require(u >= 0.0, "negative usage count");
}

Codebook Codebook::init(int64_t size, int64_t dim, RngStream& rng) {
    require(size >= 2 && dim >= 1, "invalid codebook shape ", size, " x ", dim);
    Codebook cb;
    cb.vectors = Tensor({size, dim});
    double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (int64_t i = 0; i < cb.vectors.numel(); ++i) cb.vectors[i] = scale * rng.normal();
    cb.usage.assign(static_cast<size_t>(size), 0.0);
    cb.ema_weight.assign(static_cast<size_t>(size * dim), 0.0);
    for (int64_t j = 0; j < size; ++j)
        for (int64_t c = 0; c < dim; ++c)
            cb.ema_weight[static_cast<size_t>(j * dim + c)] = 0.0;
    cb.idle_steps.assign(static_cast<size_t>(size), 0);
    return cb;
}

int64_t nearest_code(const double* v, const Codebook& cb) {
    const int64_t V = cb.size(), C = cb.dim();
    int64_t best = 0;
    double best_d = 1e300;
    const double* codes = cb.vectors.data();
    for (int64_t j = 0; j < V; ++j) {
        const double* w = codes + j * C;
        double d = 0.0;
        for (int64_t c = 0; c < C; ++c) {
            double t = v[c] - w[c];
            d += t * t;
        }
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

void codebook_update(Codebook& cb, const std::vector<double>& residuals, int64_t count,
                     double decay, int restart_window, RngStream& rng) {
    cb.validate();
    require(decay > 0.0 && decay < 1.0, "decay must lie in (0, 1), got ", decay);
    const int64_t C = cb.dim(), V = cb.size();
    require(static_cast<int64_t>(residuals.size()) == count * C, "residual batch size mismatch");
    require(count > 0, "empty residual batch");

    std::vector<int64_t> assign(static_cast<size_t>(count));
    std::vector<double> err(static_cast<size_t>(count));
    std::vector<double> sum(static_cast<size_t>(V * C), 0.0);
    std::vector<double> cnt(static_cast<size_t>(V), 0.0);
    for (int64_t i = 0; i < count; ++i) {
        const double* v = residuals.data() + i * C;
        int64_t j = nearest_code(v, cb);
        assign[static_cast<size_t>(i)] = j;
        const double* w = cb.code(j);
        double d = 0.0;
        for (int64_t c = 0; c < C; ++c) {
            double t = v[c] - w[c];
            d += t * t;
            sum[static_cast<size_t>(j * C + c)] += v[c];
        }
        err[static_cast<size_t>(i)] = d;
        cnt[static_cast<size_t>(j)] += 1.0;
    }

    const double eps = 1e-12;
    for (int64_t j = 0; j < V; ++j) {
        cb.usage[static_cast<size_t>(j)] =
            decay * cb.usage[static_cast<size_t>(j)] + (1.0 - decay) * cnt[static_cast<size_t>(j)];
        for (int64_t c = 0; c < C; ++c) {
            size_t o = static_cast<size_t>(j * C + c);
            cb.ema_weight[o] = decay * cb.ema_weight[o] + (1.0 - decay) * sum[o];
        }
        if (cnt[static_cast<size_t>(j)] > 0.0) {
            cb.idle_steps[static_cast<size_t>(j)] = 0;
            for (int64_t c = 0; c < C; ++c)
                cb.vectors[j * C + c] =
                    cb.ema_weight[static_cast<size_t>(j * C + c)] / (cb.usage[static_cast<size_t>(j)] + eps);
        } else {
            ++cb.idle_steps[static_cast<size_t>(j)];
        }
    }

    // dead-code restart: re-seed long-idle codes from the residuals this batch
    // quantized worst, largest error first
    std::vector<int64_t> dead;
    for (int64_t j = 0; j < V; ++j)
        if (cb.idle_steps[static_cast<size_t>(j)] >= restart_window) dead.push_back(j);
    if (dead.empty()) return;

    std::vector<int64_t> worst(static_cast<size_t>(count));
    for (int64_t i = 0; i < count; ++i) worst[static_cast<size_t>(i)] = i;
    std::sort(worst.begin(), worst.end(), [&](int64_t l, int64_t r) {
        if (err[static_cast<size_t>(l)] != err[static_cast<size_t>(r)])
            return err[static_cast<size_t>(l)] > err[static_cast<size_t>(r)];
        return l < r;
    });
    for (size_t d = 0; d < dead.size(); ++d) {
        int64_t j = dead[d];
        const double* v = residuals.data() + worst[d % worst.size()] * C;
        double jitter = 1e-4;
        for (int64_t c = 0; c < C; ++c) {
            cb.vectors[j * C + c] = v[c] + jitter * rng.normal();
            cb.ema_weight[static_cast<size_t>(j * C + c)] = cb.vectors[j * C + c];
        }
        cb.usage[static_cast<size_t>(j)] = 1.0;
        cb.idle_steps[static_cast<size_t>(j)] = 0;
    }
}

} // namespace wag3d
