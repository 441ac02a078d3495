#include "wag3d/prior/layout.hpp"

#include "wag3d/common.hpp"

namespace wag3d {

SequenceLayout SequenceLayout::build(const ScaleSchedule& schedule) {
    schedule.validate();
    SequenceLayout layout;
    layout.schedule = schedule;
    layout.total_len = 1;
    for (int k = 1; k <= schedule.count(); ++k) {
        layout.block_begin.push_back(layout.total_len);
        const auto& s = schedule.at(k);
        for (int z = 0; z < s[2]; ++z)
            for (int y = 0; y < s[1]; ++y)
                for (int x = 0; x < s[0]; ++x) layout.tokens.push_back({k, x, y, z});
        layout.total_len += schedule.flat_size(k);
    }
    return layout;
}

int64_t SequenceLayout::prefix_len(int k) const {
    require(k >= 0 && k <= schedule.count(), "prefix scale out of range");
    int64_t len = 1;
    for (int i = 1; i <= k; ++i) len += schedule.flat_size(i);
    return len;
}

std::vector<uint8_t> build_block_causal_mask(const SequenceLayout& layout, int64_t rows) {
    require(rows >= 1 && rows <= layout.total_len, "mask rows out of range");
    std::vector<uint8_t> allowed(static_cast<size_t>(rows) * rows, 0);
    auto scale_of = [&](int64_t pos) {
        return pos == 0 ? 0 : layout.tokens[static_cast<size_t>(pos - 1)].scale;
    };
    for (int64_t q = 0; q < rows; ++q) {
        const int qs = scale_of(q);
        for (int64_t k = 0; k < rows; ++k) {
            const int ks = scale_of(k);
            bool ok = (k == 0) || (qs > 0 && ks <= qs);
            allowed[static_cast<size_t>(q) * rows + k] = ok ? 1 : 0;
        }
    }
    return allowed;
}

std::vector<uint8_t> build_block_causal_mask(const SequenceLayout& layout) {
    return build_block_causal_mask(layout, layout.total_len);
}

Tensor mask_to_bias(const std::vector<uint8_t>& allowed, int64_t rows) {
    require(static_cast<int64_t>(allowed.size()) == rows * rows, "mask size mismatch");
    Tensor bias({rows, rows});
    for (int64_t i = 0; i < rows * rows; ++i) bias[i] = allowed[static_cast<size_t>(i)] ? 0.0 : -1e30;
    return bias;
}

std::vector<uint8_t> build_token_causal_mask(int64_t rows) {
    std::vector<uint8_t> allowed(static_cast<size_t>(rows) * rows, 0);
    for (int64_t q = 0; q < rows; ++q)
        for (int64_t k = 0; k <= q; ++k) allowed[static_cast<size_t>(q) * rows + k] = 1;
    return allowed;
}

} // namespace wag3d
