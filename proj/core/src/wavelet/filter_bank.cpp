#include "wag3d/wavelet/filter_bank.hpp"

#include <cmath>
#include <numeric>

#include "wag3d/common.hpp"

namespace wag3d {

static const double kInvSqrt2 = 0.70710678118654752440;

FilterBank FilterBank::make(WaveletFamily family) {
    FilterBank fb;
    fb.family = family;
    switch (family) {
        case WaveletFamily::haar:
            // aligned pairs (2i, 2i+1): no sample ever reaches past the
            // signal for even n, so the extension mode is irrelevant
            fb.extension = ExtensionMode::zero;
            fb.analysis_low = {kInvSqrt2, kInvSqrt2};
            fb.analysis_high = {kInvSqrt2, -kInvSqrt2};
            fb.synthesis_low = {kInvSqrt2, kInvSqrt2};
            fb.synthesis_high = {kInvSqrt2, -kInvSqrt2};
            fb.analysis_low_delay = 0;
            fb.analysis_high_delay = 1;
            break;
        case WaveletFamily::bior5_3:
            fb.extension = ExtensionMode::symmetric;
            fb.analysis_low = {-0.125, 0.25, 0.75, 0.25, -0.125};
            fb.analysis_high = {-0.5, 1.0, -0.5};
            fb.synthesis_low = {0.5, 1.0, 0.5};
            fb.synthesis_high = {-0.125, -0.25, 0.75, -0.25, -0.125};
            fb.analysis_low_delay = 2;
            fb.analysis_high_delay = 1;
            break;
    }
    return fb;
}

FilterBank FilterBank::make(const std::string& family_name) {
    if (family_name == "haar") return make(WaveletFamily::haar);
    if (family_name == "bior5_3" || family_name == "bior") return make(WaveletFamily::bior5_3);
    fail("unknown wavelet family '", family_name, "' (expected haar or bior5_3)");
}

const char* FilterBank::name() const {
    return family == WaveletFamily::haar ? "haar" : "bior5_3";
}

void FilterBank::validate() const {
    double dc = std::accumulate(analysis_high.begin(), analysis_high.end(), 0.0);
    require(std::abs(dc) < 1e-12, "high-pass analysis taps must sum to 0, got ", dc);

    // perfect-reconstruction identity on impulse inputs
    const int n = 16;
    std::vector<double> x(n, 0.0), lo(n / 2), hi(n / 2), back(n);
    for (int j = 0; j < n; ++j) {
        std::fill(x.begin(), x.end(), 0.0);
        x[static_cast<size_t>(j)] = 1.0;
        forward_1d(*this, x.data(), n, lo.data(), hi.data());
        inverse_1d(*this, lo.data(), hi.data(), n, back.data());
        for (int i = 0; i < n; ++i) {
            require(std::abs(back[static_cast<size_t>(i)] - x[static_cast<size_t>(i)]) < 1e-10,
                    name(), ": perfect reconstruction violated at impulse ", j);
        }
    }
}

// whole-point symmetric index fold (period 2(n-1))
static inline int reflect(int i, int n) {
    if (n == 1) return 0;
    int period = 2 * (n - 1);
    i = ((i % period) + period) % period;
    return i < n ? i : period - i;
}

void forward_1d(const FilterBank& fb, const double* x, int n, double* lo, double* hi) {
    require(n >= fb.min_length() && n % 2 == 0, "signal length ", n,
            " too short or odd for ", fb.name());
    const int h = n / 2;
    if (fb.family == WaveletFamily::haar) {
        for (int i = 0; i < h; ++i) {
            lo[i] = (x[2 * i] + x[2 * i + 1]) * kInvSqrt2;
            hi[i] = (x[2 * i] - x[2 * i + 1]) * kInvSqrt2;
        }
        return;
    }
    // CDF 5/3 lifting with whole-point symmetric boundaries; identical to
    // convolving the tap lists against the symmetrically extended signal
    for (int i = 0; i < h; ++i) {
        double right = (2 * i + 2 < n) ? x[2 * i + 2] : x[reflect(2 * i + 2, n)];
        hi[i] = x[2 * i + 1] - 0.5 * (x[2 * i] + right);
    }
    for (int i = 0; i < h; ++i) {
        double left = (i > 0) ? hi[i - 1] : hi[0];
        lo[i] = x[2 * i] + 0.25 * (left + hi[i]);
    }
}

void inverse_1d(const FilterBank& fb, const double* lo, const double* hi, int n, double* x) {
    require(n >= fb.min_length() && n % 2 == 0, "signal length ", n,
            " too short or odd for ", fb.name());
    const int h = n / 2;
    if (fb.family == WaveletFamily::haar) {
        for (int i = 0; i < h; ++i) {
            x[2 * i] = (lo[i] + hi[i]) * kInvSqrt2;
            x[2 * i + 1] = (lo[i] - hi[i]) * kInvSqrt2;
        }
        return;
    }
    for (int i = 0; i < h; ++i) {
        double left = (i > 0) ? hi[i - 1] : hi[0];
        x[2 * i] = lo[i] - 0.25 * (left + hi[i]);
    }
    for (int i = 0; i < h; ++i) {
        double right = (2 * i + 2 < n) ? x[2 * i + 2] : x[reflect(2 * i + 2, n)];
        x[2 * i + 1] = hi[i] + 0.5 * (x[2 * i] + right);
    }
}

} // namespace wag3d
