#include "pshape/tape.hpp"

#include <cmath>
#include <cstring>

#include "pshape/errors.hpp"

namespace pshape {

namespace {
const Tensor2 kEmpty;
}

NodeId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::constant(Tensor2 v) {
  Node n;
  n.value = std::move(v);
  return push(std::move(n));
}

NodeId Tape::param(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return it->second;
  Node n;
  n.value = p.value;
  n.param = &p;
  const NodeId id = push(std::move(n));
  param_nodes_.emplace(&p, id);
  return id;
}

NodeId Tape::matmul_bias(NodeId x, NodeId w, NodeId b) {
  const Tensor2& xv = nodes_[x].value;
  const Tensor2& wv = nodes_[w].value;
  const Tensor2& bv = nodes_[b].value;
  if (xv.cols() != wv.rows() || bv.rows() != 1 || bv.cols() != wv.cols()) {
    throw DimensionError("matmul_bias shape mismatch: x " + xv.shape_str() + ", w " + wv.shape_str() +
                         ", b " + bv.shape_str());
  }
  Tensor2 out = matmul(xv, wv);
  for (Index i = 0; i < out.rows(); ++i) {
    double* row = out.row(i);
    const double* bias = bv.data();
    for (Index j = 0; j < out.cols(); ++j) row[j] += bias[j];
  }
  Node n;
  n.value = std::move(out);
  n.parents = {x, w, b};
  n.backward = [](Tape& t, const Node& node, const Tensor2& u) {
    const NodeId x_id = node.parents[0], w_id = node.parents[1], b_id = node.parents[2];
    const Tensor2& xv = t.value(x_id);
    const Tensor2& wv = t.value(w_id);
    // dx = u * w^T  (contiguous axpy over the transposed weights)
    Tensor2 wt = transposed(wv);
    t.accumulate(x_id, matmul(u, wt));
    // dw = x^T * u
    Tensor2 dw(wv.rows(), wv.cols());
    for (Index i = 0; i < xv.rows(); ++i) {
      const double* x_row = xv.row(i);
      const double* u_row = u.row(i);
      for (Index k = 0; k < wv.rows(); ++k) {
        const double xk = x_row[k];
        double* dw_row = dw.row(k);
        for (Index j = 0; j < wv.cols(); ++j) dw_row[j] += xk * u_row[j];
      }
    }
    t.accumulate(w_id, dw);
    // db = column sums of u
    Tensor2 db(1, u.cols());
    for (Index i = 0; i < u.rows(); ++i) {
      const double* u_row = u.row(i);
      double* db_row = db.row(0);
      for (Index j = 0; j < u.cols(); ++j) db_row[j] += u_row[j];
    }
    t.accumulate(b_id, db);
  };
  return push(std::move(n));
}

NodeId Tape::matmul_bias(NodeId x, Parameter& w, Parameter& b) {
  return matmul_bias(x, param(w), param(b));
}

NodeId Tape::relu(NodeId x) {
  const Tensor2& xv = nodes_[x].value;
  Tensor2 out = xv;
  double* d = out.data();
  for (Index i = 0; i < out.size(); ++i)
    if (d[i] < 0.0) d[i] = 0.0;
  Node n;
  n.value = std::move(out);
  n.parents = {x};
  n.backward = [](Tape& t, const Node& node, const Tensor2& u) {
    const NodeId x_id = node.parents[0];
    const Tensor2& xv = t.value(x_id);
    Tensor2 g(u.rows(), u.cols());
    const double* xd = xv.data();
    const double* ud = u.data();
    double* gd = g.data();
    for (Index i = 0; i < g.size(); ++i) gd[i] = xd[i] > 0.0 ? ud[i] : 0.0;
    t.accumulate(x_id, g);
  };
  return push(std::move(n));
}

NodeId Tape::tanh_act(NodeId x) {
  const Tensor2& xv = nodes_[x].value;
  Tensor2 out = xv;
  double* d = out.data();
  for (Index i = 0; i < out.size(); ++i) d[i] = std::tanh(d[i]);
  Node n;
  n.value = std::move(out);
  n.parents = {x};
  n.backward = [](Tape& t, const Node& node, const Tensor2& u) {
    const NodeId x_id = node.parents[0];
    const Tensor2& y = node.value;
    Tensor2 g(u.rows(), u.cols());
    const double* yd = y.data();
    const double* ud = u.data();
    double* gd = g.data();
    for (Index i = 0; i < g.size(); ++i) gd[i] = ud[i] * (1.0 - yd[i] * yd[i]);
    t.accumulate(x_id, g);
  };
  return push(std::move(n));
}

NodeId Tape::set_maxpool(NodeId h) {
  const Tensor2& hv = nodes_[h].value;
  if (hv.rows() < 1) throw EmptySetError("set_maxpool over an empty point set");
  Tensor2 out(1, hv.cols());
  std::vector<Index> argmax(static_cast<std::size_t>(hv.cols()), 0);
  for (Index j = 0; j < hv.cols(); ++j) out(0, j) = hv(0, j);
  for (Index i = 1; i < hv.rows(); ++i) {
    const double* row = hv.row(i);
    for (Index j = 0; j < hv.cols(); ++j) {
      if (row[j] > out(0, j)) {  // strict: ties keep the lowest row index
        out(0, j) = row[j];
        argmax[j] = i;
      }
    }
  }
  Node n;
  n.value = std::move(out);
  n.parents = {h};
  n.backward = [argmax = std::move(argmax)](Tape& t, const Node& node, const Tensor2& u) {
    const NodeId h_id = node.parents[0];
    const Tensor2& hv = t.value(h_id);
    Tensor2 g(hv.rows(), hv.cols());
    for (Index j = 0; j < hv.cols(); ++j) g(argmax[j], j) = u(0, j);
    t.accumulate(h_id, g);
  };
  return push(std::move(n));
}

NodeId Tape::concat_cols(NodeId a, NodeId b) {
  const Tensor2& av = nodes_[a].value;
  const Tensor2& bv = nodes_[b].value;
  if (av.rows() != bv.rows()) {
    throw DimensionError("concat_cols row mismatch: " + av.shape_str() + " vs " + bv.shape_str());
  }
  Tensor2 out(av.rows(), av.cols() + bv.cols());
  for (Index i = 0; i < av.rows(); ++i) {
    std::memcpy(out.row(i), av.row(i), sizeof(double) * av.cols());
    std::memcpy(out.row(i) + av.cols(), bv.row(i), sizeof(double) * bv.cols());
  }
  Node n;
  n.value = std::move(out);
  n.parents = {a, b};
  n.backward = [](Tape& t, const Node& node, const Tensor2& u) {
    const NodeId a_id = node.parents[0], b_id = node.parents[1];
    const Tensor2& av = t.value(a_id);
    const Tensor2& bv = t.value(b_id);
    Tensor2 ga(av.rows(), av.cols());
    Tensor2 gb(bv.rows(), bv.cols());
    for (Index i = 0; i < u.rows(); ++i) {
      std::memcpy(ga.row(i), u.row(i), sizeof(double) * av.cols());
      std::memcpy(gb.row(i), u.row(i) + av.cols(), sizeof(double) * bv.cols());
    }
    t.accumulate(a_id, ga);
    t.accumulate(b_id, gb);
  };
  return push(std::move(n));
}

NodeId Tape::slice_cols(NodeId x, Index first, Index count) {
  const Tensor2& xv = nodes_[x].value;
  if (first < 0 || count < 0 || first + count > xv.cols()) {
    throw DimensionError("slice_cols [" + std::to_string(first) + ", +" + std::to_string(count) +
                         ") out of range for " + xv.shape_str());
  }
  Tensor2 out(xv.rows(), count);
  for (Index i = 0; i < xv.rows(); ++i)
    std::memcpy(out.row(i), xv.row(i) + first, sizeof(double) * count);
  Node n;
  n.value = std::move(out);
  n.parents = {x};
  n.backward = [first, count](Tape& t, const Node& node, const Tensor2& u) {
    const NodeId x_id = node.parents[0];
    const Tensor2& xv = t.value(x_id);
    Tensor2 g(xv.rows(), xv.cols());
    for (Index i = 0; i < xv.rows(); ++i)
      std::memcpy(g.row(i) + first, u.row(i), sizeof(double) * count);
    t.accumulate(x_id, g);
  };
  return push(std::move(n));
}

NodeId Tape::slice_rows(NodeId x, Index first, Index count) {
  const Tensor2& xv = nodes_[x].value;
  if (first < 0 || count < 0 || first + count > xv.rows()) {
    throw DimensionError("slice_rows [" + std::to_string(first) + ", +" + std::to_string(count) +
                         ") out of range for " + xv.shape_str());
  }
  Tensor2 out(count, xv.cols());
  std::memcpy(out.data(), xv.row(first), sizeof(double) * count * xv.cols());
  Node n;
  n.value = std::move(out);
  n.parents = {x};
  n.backward = [first, count](Tape& t, const Node& node, const Tensor2& u) {
    const NodeId x_id = node.parents[0];
    const Tensor2& xv = t.value(x_id);
    Tensor2 g(xv.rows(), xv.cols());
    std::memcpy(g.row(first), u.data(), sizeof(double) * count * xv.cols());
    t.accumulate(x_id, g);
  };
  return push(std::move(n));
}

NodeId Tape::reshape(NodeId x, Index rows, Index cols) {
  const Tensor2& xv = nodes_[x].value;
  if (rows * cols != xv.size()) {
    throw DimensionError("reshape " + xv.shape_str() + " -> " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " changes element count");
  }
  Tensor2 out(rows, cols, std::vector<double>(xv.data(), xv.data() + xv.size()));
  Node n;
  n.value = std::move(out);
  n.parents = {x};
  n.backward = [](Tape& t, const Node& node, const Tensor2& u) {
    const NodeId x_id = node.parents[0];
    const Tensor2& xv = t.value(x_id);
    Tensor2 g(xv.rows(), xv.cols(), std::vector<double>(u.data(), u.data() + u.size()));
    t.accumulate(x_id, g);
  };
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor2& av = nodes_[a].value;
  const Tensor2& bv = nodes_[b].value;
  if (!av.same_shape(bv)) {
    throw DimensionError("add shape mismatch: " + av.shape_str() + " vs " + bv.shape_str());
  }
  Tensor2 out = av;
  add_in_place(out, bv);
  Node n;
  n.value = std::move(out);
  n.parents = {a, b};
  n.backward = [](Tape& t, const Node& node, const Tensor2& u) {
    t.accumulate(node.parents[0], u);
    t.accumulate(node.parents[1], u);
  };
  return push(std::move(n));
}

NodeId Tape::scale(NodeId x, double alpha) {
  Tensor2 out = nodes_[x].value;
  scale_in_place(out, alpha);
  Node n;
  n.value = std::move(out);
  n.parents = {x};
  n.backward = [alpha](Tape& t, const Node& node, const Tensor2& u) {
    Tensor2 g = u;
    scale_in_place(g, alpha);
    t.accumulate(node.parents[0], g);
  };
  return push(std::move(n));
}

NodeId Tape::sum_all(NodeId x) {
  const Tensor2& xv = nodes_[x].value;
  double s = 0.0;
  const double* d = xv.data();
  for (Index i = 0; i < xv.size(); ++i) s += d[i];
  Node n;
  n.value = Tensor2(1, 1, {s});
  n.parents = {x};
  n.backward = [](Tape& t, const Node& node, const Tensor2& u) {
    const NodeId x_id = node.parents[0];
    const Tensor2& xv = t.value(x_id);
    Tensor2 g(xv.rows(), xv.cols());
    g.fill(u(0, 0));
    t.accumulate(x_id, g);
  };
  return push(std::move(n));
}

NodeId Tape::custom(Tensor2 value, std::vector<NodeId> parents,
                    std::function<void(Tape&, const Node&, const Tensor2&)> backward) {
  Node n;
  n.value = std::move(value);
  n.parents = std::move(parents);
  n.backward = std::move(backward);
  return push(std::move(n));
}

void Tape::accumulate(NodeId id, const Tensor2& g) {
  if (!grad_set_[id]) {
    grads_[id] = g;
    grad_set_[id] = 1;
  } else {
    add_in_place(grads_[id], g);
  }
}

void Tape::backward(NodeId loss, bool accumulate_into_params) {
  const Tensor2& lv = nodes_[loss].value;
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward requires a scalar loss node, got " + lv.shape_str());
  }
  grads_.assign(nodes_.size(), Tensor2());
  grad_set_.assign(nodes_.size(), 0);
  accumulate(loss, Tensor2(1, 1, {1.0}));
  for (NodeId id = loss; id >= 0; --id) {
    if (!grad_set_[id]) continue;
    const Node& node = nodes_[id];
    if (node.backward) node.backward(*this, node, grads_[id]);
    if (node.param && accumulate_into_params) add_in_place(node.param->grad, grads_[id]);
  }
}

const Tensor2& Tape::grad(NodeId id) const {
  if (grads_.empty()) throw ContractError("grad() before backward()");
  if (!grad_set_[id]) return kEmpty;
  return grads_[id];
}

const Tensor2& Tape::grad(const Parameter& p) const {
  auto it = param_nodes_.find(&p);
  if (it == param_nodes_.end()) throw ContractError("parameter '" + p.name + "' not on this tape");
  return grad(it->second);
}

}  // namespace pshape
