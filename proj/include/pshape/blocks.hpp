#pragma once

#include <array>
#include <string>
#include <vector>

#include "pshape/cloud.hpp"
#include "pshape/emd.hpp"
#include "pshape/rng.hpp"
#include "pshape/tape.hpp"

namespace pshape {

// Per-sample Gaussian posterior over the latent space.
struct LatentPosterior {
  std::vector<double> mu;
  std::vector<double> log_var;
};

// Optional side-information vector (one-hot class / diagnosis, or all-zero).
struct ConditionVector {
  std::vector<double> values;

  static ConditionVector one_hot(Index index, Index m);
  static ConditionVector zeros(Index m);
  Index dim() const { return static_cast<Index>(values.size()); }
};

enum class KlForm {
  Standard,      // 1/2 sum(sigma^2 + mu^2 - log sigma^2 - 1)
  PaperPrinted,  // sum(sigma + mu - log sigma - 1)
};

// ---------------------------------------------------------------------------
// Layers and blocks
// ---------------------------------------------------------------------------

struct LinearLayer {
  Parameter w;  // in x out
  Parameter b;  // 1 x out

  LinearLayer() = default;
  LinearLayer(const std::string& name, Index in, Index out, Rng& rng, bool zero_init = false);

  NodeId forward(Tape& t, NodeId x) { return t.matmul_bias(x, w, b); }
  void collect(std::vector<Parameter*>& out);
};

// Shared-weight per-point MLP (3 -> hidden0 -> hidden1 -> F, ReLU throughout)
// followed by column-wise max pooling. Output is the 1xF global signature.
struct GsnBlock {
  LinearLayer l1, l2, l3;
  Index feature_dim = 0;

  GsnBlock() = default;
  GsnBlock(const std::string& name, std::array<Index, 2> hidden, Index feature_dim, Rng& rng);

  // points: Nx3 node. Returns the 1xF signature node.
  NodeId forward(Tape& t, NodeId points);
  void collect(std::vector<Parameter*>& out);
};

// Convenience wrapper matching the block diagram: raw cloud in, signature out.
NodeId gsn_forward(Tape& t, GsnBlock& gsn, const PointCloud& p);

// Intrinsic rotation from Euler angles, composed as Rz(tz) * Ry(ty) * Rx(tx).
Tensor2 rotation_matrix(const std::array<double, 3>& theta);
// Partial derivatives of the rotation matrix w.r.t. each angle.
std::array<Tensor2, 3> rotation_matrix_grads(const std::array<double, 3>& theta);

// points (Nx3 node) rotated by the 1x3 angle node: out = P * T(theta)^T.
// Gradients flow to both the angles and the points.
NodeId apply_rotation(Tape& t, NodeId theta, NodeId points);

// Regresses Euler angles from the global signature and rotates the input
// into alignment. The final layer starts at zero so training begins at the
// identity rotation.
struct RotationBlock {
  GsnBlock gsn;
  LinearLayer hidden, out;

  RotationBlock() = default;
  RotationBlock(const std::string& name, std::array<Index, 2> gsn_hidden, Index feature_dim,
                Index head_hidden, Rng& rng);

  struct Result {
    NodeId theta;    // 1x3
    NodeId aligned;  // Nx3
  };
  Result forward(Tape& t, NodeId raw_points);
  void collect(std::vector<Parameter*>& out);
};

// Posterior head: signature (or concatenated signatures) -> hidden -> 2k,
// split into mean and log-variance.
struct EncoderHead {
  LinearLayer hidden, out;
  Index latent_dim = 0;

  EncoderHead() = default;
  EncoderHead(const std::string& name, Index in, Index hidden_width, Index latent_dim, Rng& rng,
              bool zero_init_out = false);

  struct Result {
    NodeId mu;       // 1xk
    NodeId log_var;  // 1xk
  };
  Result forward(Tape& t, NodeId signature);
  void collect(std::vector<Parameter*>& out);
};

// Three-layer MLP decoder: [z, c] -> hidden -> hidden -> 3N per structure,
// tanh-squashed and reshaped to (structures*N) x 3.
struct DecoderBlock {
  LinearLayer l1, l2, l3;
  Index points_per_structure = 0;
  Index structures = 1;

  DecoderBlock() = default;
  DecoderBlock(const std::string& name, Index latent_dim, Index condition_dim,
               std::array<Index, 2> hidden, Index points_per_structure, Index structures, Rng& rng);

  // latent_and_condition: 1x(k+m) node. Returns (structures*N) x 3 node.
  NodeId forward(Tape& t, NodeId latent_and_condition);
  void collect(std::vector<Parameter*>& out);
};

// ---------------------------------------------------------------------------
// Losses and sampling
// ---------------------------------------------------------------------------

// Reparameterized draw z = mu + exp(log_var / 2) * eps. eps is a 1xk tensor
// of standard-normal draws supplied by the caller.
NodeId sample_latent(Tape& t, NodeId mu, NodeId log_var, const Tensor2& eps);

// KL divergence of the diagonal-Gaussian posterior from the standard normal.
NodeId kl_loss(Tape& t, NodeId mu, NodeId log_var, KlForm form = KlForm::Standard);

// Mean-per-point transport cost between two Nx3 nodes; backward holds the
// optimal bijection fixed. The second operand may be a plain tensor
// (reference template) via the overload.
NodeId emd_loss(Tape& t, NodeId a, NodeId b, GroundMetric metric, const EmdSolverConfig& solver);
NodeId emd_loss(Tape& t, NodeId a, const PointCloud& b, GroundMetric metric,
                const EmdSolverConfig& solver);

// Alignment loss against a reference template (Lalign = EMD, mean per point).
NodeId alignment_loss(Tape& t, NodeId aligned, const PointCloud& reference, GroundMetric metric,
                      const EmdSolverConfig& solver);

// Multinomial cross entropy of a 1xC logits row against a class index.
NodeId softmax_cross_entropy(Tape& t, NodeId logits, Index label);

// Squared error of a 1x1 prediction against a real target.
NodeId squared_error(Tape& t, NodeId pred, double target);

// Softmax probabilities of a logits row (plain math, no tape).
std::vector<double> softmax(const Tensor2& logits);

}  // namespace pshape
