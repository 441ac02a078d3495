#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "wag3d/tensor.hpp"

namespace wag3d::nn {

struct Node;
using NodePtr = std::shared_ptr<Node>;

// One tape entry. `backward` pulls this node's gradient into its parents;
// gradients are lazily allocated, so untouched subgraphs cost nothing on the
// reverse sweep.
struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::vector<NodePtr> parents;
    std::function<void(Node&)> backward;

    bool has_grad() const { return grad.numel() == value.numel() && value.numel() > 0; }
    Tensor& grad_buf() {
        if (!has_grad()) grad = Tensor(value.shape());
        return grad;
    }
};

// Dynamic tape rebuilt every step. Nodes are swept in reverse creation order,
// which is a topological order by construction, so backward passes are
// deterministic.
class Graph {
public:
    Graph() {
        static uint64_t next_id = 0;
        id_ = ++next_id;
    }

    uint64_t id() const { return id_; }

    NodePtr leaf(Tensor value, bool requires_grad = false) {
        auto n = std::make_shared<Node>();
        n->value = std::move(value);
        n->requires_grad = requires_grad;
        tape_.push_back(n);
        return n;
    }

    NodePtr make(Tensor value, std::vector<NodePtr> parents,
                 std::function<void(Node&)> backward) {
        auto n = std::make_shared<Node>();
        n->value = std::move(value);
        n->parents = std::move(parents);
        for (const auto& p : n->parents) {
            if (p->requires_grad) {
                n->requires_grad = true;
                break;
            }
        }
        if (n->requires_grad) n->backward = std::move(backward);
        tape_.push_back(n);
        return n;
    }

    // root must be scalar; fills grads of every node that feeds it
    void backward(const NodePtr& root) {
        require(root->value.numel() == 1, "backward root must be a scalar");
        root->grad_buf()[0] = 1.0;
        for (size_t i = tape_.size(); i-- > 0;) {
            Node& n = *tape_[i];
            if (n.backward && n.has_grad()) n.backward(n);
        }
    }

    size_t size() const { return tape_.size(); }

private:
    std::vector<NodePtr> tape_;
    uint64_t id_ = 0;
};

} // namespace wag3d::nn
