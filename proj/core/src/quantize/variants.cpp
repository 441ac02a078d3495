#include "wag3d/quantize/variants.hpp"

#include <cmath>

#include "wag3d/common.hpp"

namespace wag3d {

QuantizerMode quantizer_mode_from_string(const std::string& name) {
    if (name == "nn") return QuantizerMode::nn;
    if (name == "lfq") return QuantizerMode::lfq;
    if (name == "fsq") return QuantizerMode::fsq;
    fail("unknown quantizer mode '", name, "' (expected nn, lfq or fsq)");
}

const char* quantizer_mode_name(QuantizerMode mode) {
    switch (mode) {
        case QuantizerMode::nn: return "nn";
        case QuantizerMode::lfq: return "lfq";
        case QuantizerMode::fsq: return "fsq";
    }
    fail("invalid quantizer mode");
}

void NNQuantizer::lookup(int64_t index, double* out) const {
    require(index >= 0 && index < vocab(), "code index ", index, " outside vocabulary");
    const double* w = codebook->code(index);
    for (int64_t c = 0; c < dim(); ++c) out[c] = w[c];
}

LFQQuantizer::LFQQuantizer(int64_t d) : dims(d) {
    require(d >= 1 && d <= 62, "LFQ dimension must be in [1, 62], got ", d);
}

int64_t LFQQuantizer::quantize(const double* v) const {
    int64_t idx = 0;
    for (int64_t c = 0; c < dims; ++c) {
        idx <<= 1;
        if (v[c] > 0.0) idx |= 1;
    }
    return idx;
}

void LFQQuantizer::lookup(int64_t index, double* out) const {
    require(index >= 0 && index < vocab(), "code index ", index, " outside vocabulary");
    for (int64_t c = 0; c < dims; ++c)
        out[c] = ((index >> (dims - 1 - c)) & 1) ? 1.0 : -1.0;
}

FSQQuantizer::FSQQuantizer(std::vector<int> levels_) : levels(std::move(levels_)) {
    require(!levels.empty(), "FSQ needs at least one dimension");
    for (int l : levels) require(l >= 2, "FSQ levels must be >= 2, got ", l);
}

int64_t FSQQuantizer::vocab() const {
    int64_t v = 1;
    for (int l : levels) {
        v *= l;
        require(v > 0 && v < (int64_t(1) << 62), "FSQ vocabulary overflows");
    }
    return v;
}

int64_t FSQQuantizer::quantize(const double* v) const {
    int64_t idx = 0;
    for (size_t c = 0; c < levels.size(); ++c) {
        int L = levels[c];
        double u = (v[c] + 1.0) * 0.5 * (L - 1);
        int digit = static_cast<int>(std::lround(u));
        digit = std::max(0, std::min(L - 1, digit));
        idx = idx * L + digit;
    }
    return idx;
}

void FSQQuantizer::lookup(int64_t index, double* out) const {
    require(index >= 0 && index < vocab(), "code index ", index, " outside vocabulary");
    for (size_t c = levels.size(); c-- > 0;) {
        int L = levels[c];
        int digit = static_cast<int>(index % L);
        index /= L;
        out[c] = -1.0 + 2.0 * digit / (L - 1);
    }
}

} // namespace wag3d
