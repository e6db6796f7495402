#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pacrf/rng.hpp"
#include "pacrf/tensor.hpp"

namespace pacrf {

using NodeId = std::int32_t;
using GradientMap = std::map<std::string, Tensor>;

// Named registry of trainable tensors. Ordered by name so that optimizer
// sweeps and checkpoint writes run in a stable order.
class ParameterStore {
 public:
  Tensor& add(const std::string& name, Tensor init);
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }
  std::size_t size() const { return values_.size(); }

  // Uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
  static Tensor uniform_init(std::size_t rows, std::size_t cols,
                             std::size_t fan_in, Rng& rng);

 private:
  std::map<std::string, Tensor> values_;
};

// Reverse-mode tape over a closed op vocabulary. Operations execute eagerly
// and record a backprop closure; backward() replays them newest-first and
// returns one gradient per registered parameter.
//
// Shapes are validated per op; violations raise InvalidShapeError naming the
// op and the offending shapes. Every output is checked finite (inputs are
// expected inside each op's documented domain: exp wants |x| <= 700, log
// wants x > 0).
class Tape {
 public:
  // Leaves.
  NodeId constant(Tensor value);
  NodeId parameter(const std::string& name, const ParameterStore& store);

  // a(n x k) * b(k x m) -> n x m
  NodeId matmul(NodeId a, NodeId b);
  // Elementwise; either operand may broadcast along a unit dimension.
  NodeId add(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId exp(NodeId a);
  NodeId log(NodeId a);
  NodeId tanh(NodeId a);
  // Row-wise softmax, computed through logsumexp for stability.
  NodeId softmax_rows(NodeId a);
  // n x m -> n x 1, max-subtracted.
  NodeId logsumexp_rows(NodeId a);
  NodeId concat_cols(NodeId a, NodeId b);
  NodeId concat_rows(const std::vector<NodeId>& parts);
  // Gather rows by index; duplicate indices accumulate on backward.
  NodeId select_rows(NodeId a, std::vector<std::size_t> rows);
  // n x m -> 1 x m, arithmetic mean of the rows.
  NodeId mean_rows(NodeId a);
  NodeId scale(NodeId a, double factor);
  NodeId transpose(NodeId a);
  NodeId reshape(NodeId a, std::size_t rows, std::size_t cols);
  // n x m -> 1 x 1.
  NodeId sum_all(NodeId a);
  // Gradient passes only strictly inside [lo, hi].
  NodeId clamp(NodeId a, double lo, double hi);

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  std::size_t node_count() const { return nodes_.size(); }

  // Gradients of `loss` (must be 1x1) for every parameter placed on this
  // tape; parameters the loss does not reach get exact zeros.
  GradientMap backward(NodeId loss);

  void accumulate(NodeId id, const Tensor& grad);

 private:
  struct Node {
    Tensor value;
    std::function<void(Tape&, const Tensor&)> backprop;
    std::string param_name;  // nonempty for parameter leaves
    bool needs_grad = false;
  };

  NodeId push(const char* op, Tensor value, const std::vector<NodeId>& inputs,
              std::function<void(Tape&, const Tensor&)> backprop);
  bool any_needs_grad(const std::vector<NodeId>& inputs) const;

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
};

}  // namespace pacrf
