#pragma once

#include <memory>
#include <string>
#include <vector>

#include "wag3d/quantize/codebook.hpp"

namespace wag3d {

enum class QuantizerMode { nn, lfq, fsq };

QuantizerMode quantizer_mode_from_string(const std::string& name);
const char* quantizer_mode_name(QuantizerMode mode);

// Per-voxel quantization behind one interface so the variant comparison is
// re-runnable with nothing else changed.
struct Quantizer {
    virtual ~Quantizer() = default;
    virtual int64_t vocab() const = 0;
    virtual int64_t dim() const = 0;
    virtual int64_t quantize(const double* v) const = 0;
    virtual void lookup(int64_t index, double* out) const = 0;
};

// nearest-neighbor lookup in an explicit codebook (the default path)
struct NNQuantizer final : Quantizer {
    const Codebook* codebook;
    explicit NNQuantizer(const Codebook& cb) : codebook(&cb) {}
    int64_t vocab() const override { return codebook->size(); }
    int64_t dim() const override { return codebook->dim(); }
    int64_t quantize(const double* v) const override { return nearest_code(v, *codebook); }
    void lookup(int64_t index, double* out) const override;
};

// sign binarization onto {-1,+1}^d; dimension 0 is the most significant bit,
// strictly positive components map to bit 1
struct LFQQuantizer final : Quantizer {
    int64_t dims;
    explicit LFQQuantizer(int64_t d);
    int64_t vocab() const override { return int64_t(1) << dims; }
    int64_t dim() const override { return dims; }
    int64_t quantize(const double* v) const override;
    void lookup(int64_t index, double* out) const override;
};

// per-dimension rounding onto evenly spaced ladders over [-1, 1]
// (levels = 3 gives {-1, 0, 1}); digits pack mixed-radix, dimension 0 most
// significant; ties round half away from zero
struct FSQQuantizer final : Quantizer {
    std::vector<int> levels;
    explicit FSQQuantizer(std::vector<int> levels_);
    int64_t vocab() const override;
    int64_t dim() const override { return static_cast<int64_t>(levels.size()); }
    int64_t quantize(const double* v) const override;
    void lookup(int64_t index, double* out) const override;
};

} // namespace wag3d
