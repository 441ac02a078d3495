#pragma once

#include <array>
#include <vector>

#include "wag3d/nn/graph.hpp"

namespace wag3d::nn {

// elementwise
NodePtr add(Graph& g, NodePtr a, NodePtr b);
NodePtr sub(Graph& g, NodePtr a, NodePtr b);
NodePtr mul(Graph& g, NodePtr a, NodePtr b);
NodePtr scale(Graph& g, NodePtr a, double s);
NodePtr mul_scalar_node(Graph& g, NodePtr a, NodePtr s); // s is a 1-element node
NodePtr detach(Graph& g, NodePtr a);
NodePtr silu(Graph& g, NodePtr a);
NodePtr gelu(Graph& g, NodePtr a);

// reductions to scalars
NodePtr sum_all(Graph& g, NodePtr a);
NodePtr mean_all(Graph& g, NodePtr a);
NodePtr l2_norm(Graph& g, NodePtr a); // sqrt(sum of squares + tiny)
NodePtr add_scalars(Graph& g, const std::vector<NodePtr>& xs);

// 2D matrices (rows x cols)
NodePtr matmul(Graph& g, NodePtr a, NodePtr b);
NodePtr add_rowvec(Graph& g, NodePtr x, NodePtr v);
NodePtr mul_rowvec(Graph& g, NodePtr x, NodePtr v);
NodePtr slice_rows(Graph& g, NodePtr x, int64_t r0, int64_t r1);
NodePtr slice_cols(Graph& g, NodePtr x, int64_t c0, int64_t c1);
NodePtr concat_rows(Graph& g, const std::vector<NodePtr>& xs);
NodePtr concat_cols(Graph& g, const std::vector<NodePtr>& xs);
NodePtr transpose2d(Graph& g, NodePtr x);
NodePtr row_gather(Graph& g, NodePtr table, std::vector<int64_t> rows);
NodePtr standardize_rows(Graph& g, NodePtr x, double eps); // zero mean, unit variance
NodePtr normalize_rows(Graph& g, NodePtr x);               // unit L2 norm
NodePtr softmax_rows(Graph& g, NodePtr x);
NodePtr cross_entropy_mean(Graph& g, NodePtr logits, std::vector<int32_t> targets,
                           std::vector<double>* per_row_ce = nullptr);

// volume ops on (C, D, H, W)
NodePtr conv3d_op(Graph& g, NodePtr x, NodePtr w, NodePtr b);
NodePtr conv3d_s2_op(Graph& g, NodePtr x, NodePtr w, NodePtr b);
NodePtr upsample2x_op(Graph& g, NodePtr x);
NodePtr resample_op(Graph& g, NodePtr x, std::array<int, 3> target_xyz, bool trilinear);
NodePtr group_norm(Graph& g, NodePtr x, NodePtr gamma, NodePtr beta, int groups, double eps);
NodePtr reshape(Graph& g, NodePtr x, std::vector<int64_t> shape);
NodePtr chw_to_nc(Graph& g, NodePtr x);                               // (C,D,H,W) -> (N,C)
NodePtr nc_to_chw(Graph& g, NodePtr x, std::array<int64_t, 3> dhw);   // inverse

} // namespace wag3d::nn
