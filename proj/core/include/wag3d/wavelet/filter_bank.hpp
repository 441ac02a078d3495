#pragma once

#include <string>
#include <vector>

namespace wag3d {

enum class WaveletFamily {
    haar,    // orthonormal, taps 1/sqrt(2); exact energy accounting
    bior5_3, // CDF 5/3 biorthogonal pair (LeGall), linear phase
};

enum class ExtensionMode { symmetric, zero };

// Two-channel analysis/synthesis bank. The per-axis transforms run as
// lifting/butterfly steps; the tap lists and delays below are the equivalent
// convolution form, with
//   lo[i] = sum_t analysis_low[t]  * ext(x)[2i   + t - analysis_low_delay]
//   hi[i] = sum_t analysis_high[t] * ext(x)[2i+1 + t - analysis_high_delay]
// which tests use as the independent reference.
struct FilterBank {
    WaveletFamily family = WaveletFamily::haar;
    ExtensionMode extension = ExtensionMode::zero;
    std::vector<double> analysis_low, analysis_high;
    std::vector<double> synthesis_low, synthesis_high;
    int analysis_low_delay = 0;
    int analysis_high_delay = 0;

    static FilterBank make(WaveletFamily family);
    static FilterBank make(const std::string& family_name);

    // minimum signal length a single analysis level accepts
    int min_length() const { return family == WaveletFamily::haar ? 2 : 4; }

    // invariants: perfect reconstruction on impulses to 1e-10 and a
    // DC-free high-pass analysis filter
    void validate() const;

    const char* name() const;
};

// One analysis / synthesis level on a 1D signal (n even). lo and hi receive
// n/2 coefficients each; inverse_1d reverses exactly.
void forward_1d(const FilterBank& fb, const double* x, int n, double* lo, double* hi);
void inverse_1d(const FilterBank& fb, const double* lo, const double* hi, int n, double* x);

} // namespace wag3d
