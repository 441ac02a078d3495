#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "wag3d/nn/graph.hpp"
#include "wag3d/rng.hpp"

namespace wag3d::nn {

// A trainable tensor plus its gradient accumulator and Adam moments.
struct Param {
    Tensor value;
    Tensor grad;
    Tensor m, v;
};

// Named parameter registry. Graph leaves are bound per step; after backward,
// collect_grads() folds the node gradients back into the persistent params.
// Iteration is name-sorted everywhere, so update order is deterministic.
class ParamStore {
public:
    Param& ensure(const std::string& name, const std::vector<int64_t>& shape,
                  const std::function<void(Tensor&)>& init);
    Param& at(const std::string& name);
    const Param& at(const std::string& name) const;
    bool contains(const std::string& name) const { return params_.count(name) > 0; }

    // leaf node sharing the parameter's current value (cached per step)
    NodePtr use(Graph& g, const std::string& name);

    void begin_step();     // clears bindings and gradients
    void collect_grads();  // node grads -> param grads

    std::map<std::string, Param>& all() { return params_; }
    const std::map<std::string, Param>& all() const { return params_; }
    int64_t parameter_count() const;

private:
    std::map<std::string, Param> params_;
    std::map<std::string, NodePtr> bound_;
    uint64_t bound_graph_ = 0;
};

// Adam with bias correction; hyperparameters fixed at construction.
struct Adam {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int64_t step_count = 0;

    void step(ParamStore& params);
};

// common initializers
std::function<void(Tensor&)> zeros_init();
std::function<void(Tensor&)> const_init(double v);
std::function<void(Tensor&)> normal_init(RngStream* rng, double stddev);
// delta kernel: centre tap identity for (C, C, k, k, k) conv weights
std::function<void(Tensor&)> identity_conv_init(RngStream* rng, double noise);

} // namespace wag3d::nn
