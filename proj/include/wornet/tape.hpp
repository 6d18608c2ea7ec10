#pragma once

#include "wornet/tensor.hpp"

#include <array>
#include <functional>
#include <utility>
#include <vector>

namespace wornet {

/// Records every primitive application in execution order so a single reverse
/// sweep can propagate gradients through any composition of ops. Node inputs
/// always precede the node, so creation order is a topological order.
template <typename S>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int)>;

  struct Node {
    Tensor<S> value;
    std::array<int, 4> parents{};
    int parent_count = 0;
    BackwardFn backward;  // empty for leaves
    Tensor<S> grad;
    bool has_grad = false;
    bool needs_grad = false;
  };

  /// Registers a leaf holding a copy of `t`. Gradients are produced for it
  /// iff t.requires_grad (or the explicit override below).
  int leaf(const Tensor<S>& t) { return leaf(t, t.requires_grad); }

  int leaf(const Tensor<S>& t, bool requires_grad) {
    Node node;
    node.value = t;
    node.needs_grad = requires_grad;
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size()) - 1;
  }

  /// Used by op implementations: appends a computed node.
  int emit(Tensor<S> value, std::initializer_list<int> parents, BackwardFn backward) {
    Node node;
    node.value = std::move(value);
    for (int p : parents) {
      check(p >= 0 && p < static_cast<int>(nodes_.size()), "tape parent out of range");
      node.parents[node.parent_count++] = p;
      node.needs_grad = node.needs_grad || nodes_[p].needs_grad;
    }
    node.backward = std::move(backward);
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size()) - 1;
  }

  int size() const { return static_cast<int>(nodes_.size()); }

  const Tensor<S>& value(int id) const { return node(id).value; }

  int parent(int id, int i) const {
    const Node& n = node(id);
    check(i >= 0 && i < n.parent_count, "tape parent index out of range");
    return n.parents[static_cast<size_t>(i)];
  }

  bool needs_grad(int id) const { return node(id).needs_grad; }

  /// Gradient of the last backward() target w.r.t. node `id`; zeros if the
  /// node does not contribute to it.
  Tensor<S> grad(int id) const {
    const Node& n = node(id);
    if (!n.has_grad) return Tensor<S>::zeros(n.value.shape);
    return n.grad;
  }

  /// Gradient already present on a node, by reference. Valid inside backward
  /// callbacks for the node being processed.
  const Tensor<S>& upstream(int id) const {
    const Node& n = node(id);
    check(n.has_grad, "upstream: node holds no gradient");
    return n.grad;
  }

  /// Accumulation buffer, allocated to zeros on first touch.
  Tensor<S>& grad_buffer(int id) {
    Node& n = node(id);
    if (!n.has_grad) {
      n.grad = Tensor<S>::zeros(n.value.shape);
      n.has_grad = true;
    }
    return n.grad;
  }

  /// Reverse pass from a scalar node. Rejects non-scalar or foreign targets.
  void backward(int loss_id) {
    check(loss_id >= 0 && loss_id < size(), "backward: loss node is not on this tape");
    check(node(loss_id).value.numel() == 1, "backward: loss must be a scalar node");
    grad_buffer(loss_id).data.setConstant(S(1));
    for (int id = loss_id; id >= 0; --id) {
      Node& n = nodes_[id];
      if (n.has_grad && n.backward && n.needs_grad) n.backward(*this, id);
    }
  }

 private:
  Node& node(int id) {
    check(id >= 0 && id < size(), "tape node id out of range");
    return nodes_[static_cast<size_t>(id)];
  }
  const Node& node(int id) const {
    check(id >= 0 && id < size(), "tape node id out of range");
    return nodes_[static_cast<size_t>(id)];
  }

  std::vector<Node> nodes_;
};

}  // namespace wornet
