#pragma once

#include <cstdint>
#include <vector>

#include "wag3d/quantize/schedule.hpp"
#include "wag3d/tensor.hpp"

namespace wag3d {

// Flattened sequence geometry: position 0 is the start token, followed by
// one block per scale in schedule order, x-fastest within a block.
struct SequenceLayout {
    ScaleSchedule schedule;
    int64_t total_len = 0; // 1 + sum of S_k

    struct TokenPos {
        int scale; // 1-based
        int x, y, z;
    };
    std::vector<TokenPos> tokens;     // entries for positions 1..total_len-1
    std::vector<int64_t> block_begin; // sequence position of each scale's first token

    static SequenceLayout build(const ScaleSchedule& schedule);

    int64_t block_size(int k) const { return schedule.flat_size(k); }
    // sequence length when only scales 1..k are present
    int64_t prefix_len(int k) const;
};

// Block-causal attention mask over the first `rows` positions: a token at
// scale k attends to the start token, every token of scales < k, and every
// token of its own scale; the start token attends to itself only. Returned
// row-major, allowed[q * rows + key].
std::vector<uint8_t> build_block_causal_mask(const SequenceLayout& layout, int64_t rows);
std::vector<uint8_t> build_block_causal_mask(const SequenceLayout& layout);

// additive form: 0 where allowed, -1e30 where masked
Tensor mask_to_bias(const std::vector<uint8_t>& allowed, int64_t rows);

// plain per-token causal triangle (the token-by-token ablation mode)
std::vector<uint8_t> build_token_causal_mask(int64_t rows);

} // namespace wag3d
