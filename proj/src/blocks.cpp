#include "pshape/blocks.hpp"

#include <cmath>

#include "pshape/errors.hpp"

namespace pshape {

ConditionVector ConditionVector::one_hot(Index index, Index m) {
  if (index < 0 || index >= m) {
    throw LabelError("one-hot index " + std::to_string(index) + " out of range for m=" + std::to_string(m));
  }
  ConditionVector c;
  c.values.assign(static_cast<std::size_t>(m), 0.0);
  c.values[static_cast<std::size_t>(index)] = 1.0;
  return c;
}

ConditionVector ConditionVector::zeros(Index m) {
  ConditionVector c;
  c.values.assign(static_cast<std::size_t>(m), 0.0);
  return c;
}

// ---------------------------------------------------------------------------
// Layers
// ---------------------------------------------------------------------------

LinearLayer::LinearLayer(const std::string& name, Index in, Index out, Rng& rng, bool zero_init)
    : w(name + ".w", Tensor2(in, out)), b(name + ".b", Tensor2(1, out)) {
  if (!zero_init) {
    const double w_bound = std::sqrt(6.0 / static_cast<double>(in));
    for (Index i = 0; i < w.value.size(); ++i) w.value.data()[i] = rng.uniform(-w_bound, w_bound);
    // Nonzero bias keeps pre-activations off the exact ReLU kink even when a
    // whole input row is dead.
    const double b_bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (Index i = 0; i < b.value.size(); ++i) b.value.data()[i] = rng.uniform(-b_bound, b_bound);
  }
}

void LinearLayer::collect(std::vector<Parameter*>& out) {
  out.push_back(&w);
  out.push_back(&b);
}

GsnBlock::GsnBlock(const std::string& name, std::array<Index, 2> hidden, Index f, Rng& rng)
    : l1(name + ".l1", 3, hidden[0], rng),
      l2(name + ".l2", hidden[0], hidden[1], rng),
      l3(name + ".l3", hidden[1], f, rng),
      feature_dim(f) {}

NodeId GsnBlock::forward(Tape& t, NodeId points) {
  NodeId h = t.relu(t.matmul_bias(points, l1.w, l1.b));
  h = t.relu(t.matmul_bias(h, l2.w, l2.b));
  h = t.relu(t.matmul_bias(h, l3.w, l3.b));
  return t.set_maxpool(h);
}

void GsnBlock::collect(std::vector<Parameter*>& out) {
  l1.collect(out);
  l2.collect(out);
  l3.collect(out);
}

NodeId gsn_forward(Tape& t, GsnBlock& gsn, const PointCloud& p) {
  if (p.rows() < 1) throw EmptySetError("gsn_forward on an empty cloud");
  return gsn.forward(t, t.constant(p));
}

// ---------------------------------------------------------------------------
// Rotation
// ---------------------------------------------------------------------------

Tensor2 rotation_matrix(const std::array<double, 3>& theta) {
  const double cx = std::cos(theta[0]), sx = std::sin(theta[0]);
  const double cy = std::cos(theta[1]), sy = std::sin(theta[1]);
  const double cz = std::cos(theta[2]), sz = std::sin(theta[2]);
  const Tensor2 rx = Tensor2::from_rows({{1, 0, 0}, {0, cx, -sx}, {0, sx, cx}});
  const Tensor2 ry = Tensor2::from_rows({{cy, 0, sy}, {0, 1, 0}, {-sy, 0, cy}});
  const Tensor2 rz = Tensor2::from_rows({{cz, -sz, 0}, {sz, cz, 0}, {0, 0, 1}});
  return matmul(rz, matmul(ry, rx));
}

std::array<Tensor2, 3> rotation_matrix_grads(const std::array<double, 3>& theta) {
  const double cx = std::cos(theta[0]), sx = std::sin(theta[0]);
  const double cy = std::cos(theta[1]), sy = std::sin(theta[1]);
  const double cz = std::cos(theta[2]), sz = std::sin(theta[2]);
  const Tensor2 rx = Tensor2::from_rows({{1, 0, 0}, {0, cx, -sx}, {0, sx, cx}});
  const Tensor2 ry = Tensor2::from_rows({{cy, 0, sy}, {0, 1, 0}, {-sy, 0, cy}});
  const Tensor2 rz = Tensor2::from_rows({{cz, -sz, 0}, {sz, cz, 0}, {0, 0, 1}});
  const Tensor2 drx = Tensor2::from_rows({{0, 0, 0}, {0, -sx, -cx}, {0, cx, -sx}});
  const Tensor2 dry = Tensor2::from_rows({{-sy, 0, cy}, {0, 0, 0}, {-cy, 0, -sy}});
  const Tensor2 drz = Tensor2::from_rows({{-sz, -cz, 0}, {cz, -sz, 0}, {0, 0, 0}});
  return {matmul(rz, matmul(ry, drx)), matmul(rz, matmul(dry, rx)), matmul(drz, matmul(ry, rx))};
}

NodeId apply_rotation(Tape& t, NodeId theta, NodeId points) {
  const Tensor2& tv = t.value(theta);
  const Tensor2& pv = t.value(points);
  if (tv.rows() != 1 || tv.cols() != 3) {
    throw DimensionError("rotation angles must be 1x3, got " + tv.shape_str());
  }
  if (pv.cols() != 3) throw DimensionError("points must be Nx3, got " + pv.shape_str());
  const std::array<double, 3> angles{tv(0, 0), tv(0, 1), tv(0, 2)};
  const Tensor2 rot = rotation_matrix(angles);
  Tensor2 aligned = matmul(pv, transposed(rot));
  return t.custom(std::move(aligned), {theta, points},
                  [angles, rot](Tape& tape, const Tape::Node& node, const Tensor2& u) {
                    const NodeId theta_id = node.parents[0], points_id = node.parents[1];
                    const Tensor2& pv = tape.value(points_id);
                    const auto dr = rotation_matrix_grads(angles);
                    Tensor2 dtheta(1, 3);
                    for (int k = 0; k < 3; ++k) {
                      const Tensor2 dp = matmul(pv, transposed(dr[k]));
                      double acc = 0.0;
                      const double* ud = u.data();
                      const double* dd = dp.data();
                      for (Index i = 0; i < u.size(); ++i) acc += ud[i] * dd[i];
                      dtheta(0, k) = acc;
                    }
                    tape.accumulate(theta_id, dtheta);
                    tape.accumulate(points_id, matmul(u, rot));
                  });
}

RotationBlock::RotationBlock(const std::string& name, std::array<Index, 2> gsn_hidden,
                             Index feature_dim, Index head_hidden, Rng& rng)
    : gsn(name + ".gsn", gsn_hidden, feature_dim, rng),
      hidden(name + ".hidden", feature_dim, head_hidden, rng),
      out(name + ".out", head_hidden, 3, rng, /*zero_init=*/true) {}

RotationBlock::Result RotationBlock::forward(Tape& t, NodeId raw_points) {
  NodeId v = gsn.forward(t, raw_points);
  NodeId h = t.relu(t.matmul_bias(v, hidden.w, hidden.b));
  NodeId theta = t.matmul_bias(h, out.w, out.b);
  NodeId aligned = apply_rotation(t, theta, raw_points);
  return {theta, aligned};
}

void RotationBlock::collect(std::vector<Parameter*>& out_params) {
  gsn.collect(out_params);
  hidden.collect(out_params);
  out.collect(out_params);
}

// ---------------------------------------------------------------------------
// Encoder / decoder
// ---------------------------------------------------------------------------

EncoderHead::EncoderHead(const std::string& name, Index in, Index hidden_width, Index k, Rng& rng,
                         bool zero_init_out)
    : hidden(name + ".hidden", in, hidden_width, rng),
      out(name + ".out", hidden_width, 2 * k, rng, zero_init_out),
      latent_dim(k) {}

EncoderHead::Result EncoderHead::forward(Tape& t, NodeId signature) {
  NodeId h = t.relu(t.matmul_bias(signature, hidden.w, hidden.b));
  NodeId stats = t.matmul_bias(h, out.w, out.b);
  return {t.slice_cols(stats, 0, latent_dim), t.slice_cols(stats, latent_dim, latent_dim)};
}

void EncoderHead::collect(std::vector<Parameter*>& out_params) {
  hidden.collect(out_params);
  out.collect(out_params);
}

DecoderBlock::DecoderBlock(const std::string& name, Index latent_dim, Index condition_dim,
                           std::array<Index, 2> hidden, Index n, Index structures_, Rng& rng)
    : l1(name + ".l1", latent_dim + condition_dim, hidden[0], rng),
      l2(name + ".l2", hidden[0], hidden[1], rng),
      l3(name + ".l3", hidden[1], 3 * n * structures_, rng),
      points_per_structure(n),
      structures(structures_) {}

NodeId DecoderBlock::forward(Tape& t, NodeId latent_and_condition) {
  NodeId h = t.relu(t.matmul_bias(latent_and_condition, l1.w, l1.b));
  h = t.relu(t.matmul_bias(h, l2.w, l2.b));
  h = t.tanh_act(t.matmul_bias(h, l3.w, l3.b));
  return t.reshape(h, structures * points_per_structure, 3);
}

void DecoderBlock::collect(std::vector<Parameter*>& out_params) {
  l1.collect(out_params);
  l2.collect(out_params);
  l3.collect(out_params);
}

// ---------------------------------------------------------------------------
// Losses and sampling
// ---------------------------------------------------------------------------

NodeId sample_latent(Tape& t, NodeId mu, NodeId log_var, const Tensor2& eps) {
  const Tensor2& mv = t.value(mu);
  const Tensor2& lv = t.value(log_var);
  if (!mv.same_shape(lv) || !mv.same_shape(eps)) {
    throw DimensionError("sample_latent shapes disagree: mu " + mv.shape_str() + ", log_var " +
                         lv.shape_str() + ", eps " + eps.shape_str());
  }
  Tensor2 z = mv;
  for (Index i = 0; i < z.size(); ++i) {
    z.data()[i] += std::exp(0.5 * lv.data()[i]) * eps.data()[i];
  }
  return t.custom(std::move(z), {mu, log_var},
                  [eps](Tape& tape, const Tape::Node& node, const Tensor2& u) {
                    const NodeId mu_id = node.parents[0], lv_id = node.parents[1];
                    tape.accumulate(mu_id, u);
                    const Tensor2& lv = tape.value(lv_id);
                    Tensor2 g(lv.rows(), lv.cols());
                    for (Index i = 0; i < g.size(); ++i) {
                      g.data()[i] = u.data()[i] * 0.5 * std::exp(0.5 * lv.data()[i]) * eps.data()[i];
                    }
                    tape.accumulate(lv_id, g);
                  });
}

NodeId kl_loss(Tape& t, NodeId mu, NodeId log_var, KlForm form) {
  const Tensor2& mv = t.value(mu);
  const Tensor2& lv = t.value(log_var);
  if (!mv.same_shape(lv)) {
    throw DimensionError("kl_loss shapes disagree: " + mv.shape_str() + " vs " + lv.shape_str());
  }
  double acc = 0.0;
  if (form == KlForm::Standard) {
    for (Index i = 0; i < mv.size(); ++i) {
      const double m = mv.data()[i], l = lv.data()[i];
      acc += 0.5 * (std::exp(l) + m * m - l - 1.0);
    }
  } else {
    for (Index i = 0; i < mv.size(); ++i) {
      const double m = mv.data()[i], sigma = std::exp(0.5 * lv.data()[i]);
      acc += sigma + m - std::log(sigma) - 1.0;
    }
  }
  return t.custom(Tensor2(1, 1, {acc}), {mu, log_var},
                  [form](Tape& tape, const Tape::Node& node, const Tensor2& u) {
                    const NodeId mu_id = node.parents[0], lv_id = node.parents[1];
                    const Tensor2& mv = tape.value(mu_id);
                    const Tensor2& lv = tape.value(lv_id);
                    const double s = u(0, 0);
                    Tensor2 gm(mv.rows(), mv.cols());
                    Tensor2 gl(lv.rows(), lv.cols());
                    for (Index i = 0; i < mv.size(); ++i) {
                      if (form == KlForm::Standard) {
                        gm.data()[i] = s * mv.data()[i];
                        gl.data()[i] = s * 0.5 * (std::exp(lv.data()[i]) - 1.0);
                      } else {
                        gm.data()[i] = s;
                        gl.data()[i] = s * 0.5 * (std::exp(0.5 * lv.data()[i]) - 1.0);
                      }
                    }
                    tape.accumulate(mu_id, gm);
                    tape.accumulate(lv_id, gl);
                  });
}

NodeId emd_loss(Tape& t, NodeId a, NodeId b, GroundMetric metric, const EmdSolverConfig& solver) {
  const Tensor2& av = t.value(a);
  const Tensor2& bv = t.value(b);
  CostMatrix c = cost_matrix(av, bv, metric);
  EmdSolution sol = solve_emd(c, solver);
  const double inv_n = 1.0 / static_cast<double>(c.n);
  const double mean_cost = sol.cost * inv_n;
  return t.custom(
      Tensor2(1, 1, {mean_cost}), {a, b},
      [assignment = std::move(sol.assignment), metric, inv_n](Tape& tape, const Tape::Node& node,
                                                              const Tensor2& u) {
        const NodeId a_id = node.parents[0], b_id = node.parents[1];
        EmdGradient g = emd_gradient(tape.value(a_id), tape.value(b_id), assignment, metric);
        scale_in_place(g.grad_a, u(0, 0) * inv_n);
        scale_in_place(g.grad_b, u(0, 0) * inv_n);
        tape.accumulate(a_id, g.grad_a);
        tape.accumulate(b_id, g.grad_b);
      });
}

NodeId emd_loss(Tape& t, NodeId a, const PointCloud& b, GroundMetric metric,
                const EmdSolverConfig& solver) {
  return emd_loss(t, a, t.constant(b), metric, solver);
}

NodeId alignment_loss(Tape& t, NodeId aligned, const PointCloud& reference, GroundMetric metric,
                      const EmdSolverConfig& solver) {
  return emd_loss(t, aligned, reference, metric, solver);
}

NodeId softmax_cross_entropy(Tape& t, NodeId logits, Index label) {
  const Tensor2& lv = t.value(logits);
  if (lv.rows() != 1) throw DimensionError("logits must be a 1xC row, got " + lv.shape_str());
  if (label < 0 || label >= lv.cols()) {
    throw LabelError("label " + std::to_string(label) + " out of range for " +
                     std::to_string(lv.cols()) + " classes");
  }
  double max_logit = lv(0, 0);
  for (Index j = 1; j < lv.cols(); ++j) max_logit = std::max(max_logit, lv(0, j));
  double lse = 0.0;
  for (Index j = 0; j < lv.cols(); ++j) lse += std::exp(lv(0, j) - max_logit);
  lse = max_logit + std::log(lse);
  const double loss = lse - lv(0, label);
  return t.custom(Tensor2(1, 1, {loss}), {logits},
                  [label, lse](Tape& tape, const Tape::Node& node, const Tensor2& u) {
                    const NodeId logits_id = node.parents[0];
                    const Tensor2& lv = tape.value(logits_id);
                    Tensor2 g(1, lv.cols());
                    for (Index j = 0; j < lv.cols(); ++j) {
                      g(0, j) = u(0, 0) * (std::exp(lv(0, j) - lse) - (j == label ? 1.0 : 0.0));
                    }
                    tape.accumulate(logits_id, g);
                  });
}

NodeId squared_error(Tape& t, NodeId pred, double target) {
  const Tensor2& pv = t.value(pred);
  if (pv.rows() != 1 || pv.cols() != 1) {
    throw DimensionError("squared_error prediction must be 1x1, got " + pv.shape_str());
  }
  const double diff = pv(0, 0) - target;
  return t.custom(Tensor2(1, 1, {diff * diff}), {pred},
                  [target](Tape& tape, const Tape::Node& node, const Tensor2& u) {
                    const NodeId pred_id = node.parents[0];
                    const double diff = tape.value(pred_id)(0, 0) - target;
                    Tensor2 g(1, 1, {2.0 * diff * u(0, 0)});
                    tape.accumulate(pred_id, g);
                  });
}

std::vector<double> softmax(const Tensor2& logits) {
  std::vector<double> p(static_cast<std::size_t>(logits.cols()));
  double max_logit = logits(0, 0);
  for (Index j = 1; j < logits.cols(); ++j) max_logit = std::max(max_logit, logits(0, j));
  double sum = 0.0;
  for (Index j = 0; j < logits.cols(); ++j) {
    p[static_cast<std::size_t>(j)] = std::exp(logits(0, j) - max_logit);
    sum += p[static_cast<std::size_t>(j)];
  }
  for (double& v : p) v /= sum;
  return p;
}

}  // namespace pshape
