#include "wag3d/nn/adam.hpp"

#include <cmath>

#include "wag3d/common.hpp"

namespace wag3d::nn {

Param& ParamStore::ensure(const std::string& name, const std::vector<int64_t>& shape,
                          const std::function<void(Tensor&)>& init) {
    auto it = params_.find(name);
    if (it != params_.end()) {
        require(it->second.value.shape() == shape, "parameter ", name, " re-registered with a different shape");
        return it->second;
    }
    Param p;
    p.value = Tensor(shape);
    init(p.value);
    p.grad = Tensor(shape);
    p.m = Tensor(shape);
    p.v = Tensor(shape);
    return params_.emplace(name, std::move(p)).first->second;
}

Param& ParamStore::at(const std::string& name) {
    auto it = params_.find(name);
    require(it != params_.end(), "unknown parameter ", name);
    return it->second;
}

const Param& ParamStore::at(const std::string& name) const {
    auto it = params_.find(name);
    require(it != params_.end(), "unknown parameter ", name);
    return it->second;
}

NodePtr ParamStore::use(Graph& g, const std::string& name) {
    if (bound_graph_ != g.id()) {
        bound_.clear();
        bound_graph_ = g.id();
    }
    auto bound = bound_.find(name);
    if (bound != bound_.end()) return bound->second;
    Param& p = at(name);
    NodePtr node = g.leaf(p.value, true);
    bound_.emplace(name, node);
    return node;
}

void ParamStore::begin_step() {
    bound_.clear();
    bound_graph_ = 0;
    for (auto& [name, p] : params_) {
        (void)name;
        std::fill(p.grad.vec().begin(), p.grad.vec().end(), 0.0);
    }
}

void ParamStore::collect_grads() {
    for (auto& [name, node] : bound_) {
        if (!node->has_grad()) continue;
        Param& p = at(name);
        for (int64_t i = 0; i < p.grad.numel(); ++i) p.grad[i] += node->grad[i];
    }
}

int64_t ParamStore::parameter_count() const {
    int64_t n = 0;
    for (const auto& [name, p] : params_) {
        (void)name;
        n += p.value.numel();
    }
    return n;
}

void Adam::step(ParamStore& params) {
    ++step_count;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
    for (auto& [name, p] : params.all()) {
        (void)name;
        for (int64_t i = 0; i < p.value.numel(); ++i) {
            const double g = p.grad[i];
            require(std::isfinite(g), "non-finite gradient in ", name);
            p.m[i] = beta1 * p.m[i] + (1.0 - beta1) * g;
            p.v[i] = beta2 * p.v[i] + (1.0 - beta2) * g * g;
            const double mhat = p.m[i] / bc1;
            const double vhat = p.v[i] / bc2;
            p.value[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

std::function<void(Tensor&)> zeros_init() {
    return [](Tensor&) {};
}

std::function<void(Tensor&)> const_init(double v) {
    return [v](Tensor& t) {
        for (int64_t i = 0; i < t.numel(); ++i) t[i] = v;
    };
}

std::function<void(Tensor&)> normal_init(RngStream* rng, double stddev) {
    return [rng, stddev](Tensor& t) {
        for (int64_t i = 0; i < t.numel(); ++i) t[i] = stddev * rng->normal();
    };
}

std::function<void(Tensor&)> identity_conv_init(RngStream* rng, double noise) {
    return [rng, noise](Tensor& t) {
        require(t.ndim() == 5 && t.dim(0) == t.dim(1), "identity_conv_init expects (C,C,k,k,k)");
        const int64_t k = t.dim(2);
        for (int64_t c = 0; c < t.dim(0); ++c) t.at(c, c, k / 2, k / 2, k / 2) = 1.0;
        if (noise > 0.0)
            for (int64_t i = 0; i < t.numel(); ++i) t[i] += noise * rng->normal();
    };
}

} // namespace wag3d::nn
