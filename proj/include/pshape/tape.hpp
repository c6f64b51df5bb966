#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pshape/tensor.hpp"

namespace pshape {

// Learnable tensor plus its gradient accumulator. The accumulator keeps the
// value's shape and is reset between optimizer steps.
struct Parameter {
  std::string name;
  Tensor2 value;
  Tensor2 grad;

  Parameter() = default;
  Parameter(std::string n, Tensor2 v) : name(std::move(n)), value(v), grad(v.rows(), v.cols()) {}

  void zero_grad() { grad.set_zero(); }
};

using NodeId = std::int32_t;

// Reverse-mode differentiation tape. Operations append nodes in evaluation
// order, so the node list is topological by construction; backward() walks
// it once in reverse. All arithmetic is double precision with fixed
// accumulation order: the same tape always yields bit-identical gradients.
class Tape {
 public:
  struct Node {
    Tensor2 value;
    std::vector<NodeId> parents;
    // Distributes this node's gradient to the parents' buffers.
    std::function<void(Tape&, const Node&, const Tensor2& upstream)> backward;
    Parameter* param = nullptr;
  };

  // ---- leaves ----
  NodeId constant(Tensor2 v);  // data input; gradient is still tracked
  NodeId param(Parameter& p);  // one node per Parameter per tape

  // ---- primitive operations ----
  // out[i,j] = sum_k x[i,k] w[k,j] + b[0,j]
  NodeId matmul_bias(NodeId x, NodeId w, NodeId b);
  NodeId matmul_bias(NodeId x, Parameter& w, Parameter& b);
  NodeId relu(NodeId x);
  NodeId tanh_act(NodeId x);
  // Column-wise max over rows (1xF output). Ties route the gradient to the
  // lowest row index.
  NodeId set_maxpool(NodeId h);
  NodeId concat_cols(NodeId a, NodeId b);
  NodeId slice_cols(NodeId x, Index first, Index count);
  NodeId slice_rows(NodeId x, Index first, Index count);
  NodeId reshape(NodeId x, Index rows, Index cols);
  NodeId add(NodeId a, NodeId b);
  NodeId scale(NodeId x, double alpha);
  NodeId sum_all(NodeId x);  // 1x1

  // Escape hatch for composite operations (losses, rotations) defined in
  // higher layers. `backward` receives the upstream gradient and must add
  // into the parents via accumulate().
  NodeId custom(Tensor2 value, std::vector<NodeId> parents,
                std::function<void(Tape&, const Node&, const Tensor2&)> backward);

  // Gradient of the scalar node `loss` w.r.t. every node. Parameter leaves
  // additionally accumulate into Parameter::grad unless
  // `accumulate_into_params` is false (concurrent per-sample tapes read
  // their gradients back via grad(Parameter) instead).
  void backward(NodeId loss, bool accumulate_into_params = true);

  const Tensor2& value(NodeId id) const { return nodes_[id].value; }
  // Valid after backward(); zero tensor if the node was not reached.
  const Tensor2& grad(NodeId id) const;
  // Gradient for a parameter registered on this tape (tape-local, unscaled).
  const Tensor2& grad(const Parameter& p) const;

  Index num_nodes() const { return static_cast<Index>(nodes_.size()); }

  // Adds g into the gradient buffer of node id (used by backward closures).
  void accumulate(NodeId id, const Tensor2& g);

 private:
  NodeId push(Node n);

  std::deque<Node> nodes_;  // stable references while the tape grows
  std::vector<Tensor2> grads_;
  std::vector<char> grad_set_;
  std::unordered_map<const Parameter*, NodeId> param_nodes_;
};

}  // namespace pshape
