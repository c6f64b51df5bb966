#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pshape/blocks.hpp"
#include "pshape/cloud.hpp"
#include "pshape/emd.hpp"
#include "pshape/tape.hpp"

namespace pshape {

enum class ModelKind { Rotation, Discriminative, Generative };
enum class TaskKind { Classification, Regression };

struct LossWeights {
  double align = 1.0;
  double rec = 1.0;
  double latent = 10.0;
};

// Architecture hyperparameters. Serialized into checkpoints, so loading a
// file reconstructs the exact network.
struct ModelConfig {
  ModelKind kind = ModelKind::Discriminative;
  Index structures = 1;  // K + 1
  Index points = 512;    // N per structure
  TaskKind task = TaskKind::Classification;
  Index classes = 2;
  Index latent_dim = 2;     // k
  Index condition_dim = 0;  // m
  Index rotation_feature_dim = 256;
  Index signature_feature_dim = 1024;  // discriminative GSN
  Index encoder_feature_dim = 256;     // generative GSN
  std::array<Index, 2> gsn_hidden{64, 128};
  Index rotation_head_hidden = 128;
  std::array<Index, 2> head_hidden{512, 128};
  Index posterior_hidden = 512;
  std::array<Index, 2> decoder_hidden{256, 512};
  LossWeights weights;
  KlForm latent_loss_form = KlForm::Standard;
  GroundMetric metric = GroundMetric::L1;
  EmdSolverConfig emd;
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
};

// One training sample: one cloud per structure plus its annotations.
struct Sample {
  std::vector<PointCloud> clouds;
  std::optional<Index> label;
  std::optional<double> target;
  ConditionVector condition;
};

struct LossReport {
  double align = 0.0;
  double rec = 0.0;
  double latent = 0.0;
  double cls = 0.0;
  double total = 0.0;
};

// A discriminative, generative, or rotation-only network with one
// rotation+signature branch per structure.
class Model {
 public:
  explicit Model(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  // All learnable tensors in a stable order (checkpoint blob order).
  const std::vector<Parameter*>& parameters() { return params_; }
  Index parameter_count() const;

  void zero_grads();
  std::vector<Tensor2> parameter_values() const;
  void set_parameter_values(const std::vector<Tensor2>& values);

  // ---- training-time forward passes (tape-managed) ----

  struct Forward {
    NodeId total = -1;
    LossReport report;
    NodeId prediction = -1;                // logits (1xC) or regression value (1x1)
    std::vector<NodeId> aligned;           // per structure
    std::vector<NodeId> reconstructions;   // per structure (generative)
    NodeId mu = -1, log_var = -1;
  };

  // Builds the full loss for one sample. `references` holds one aligned
  // template per structure; pass empty to skip the alignment term (the
  // report then carries align = 0). `eps` supplies the reparameterization
  // draw for generative models (zeros give mean decoding).
  Forward training_loss(Tape& tape, const Sample& sample,
                        const std::vector<PointCloud>& references, const Tensor2* eps = nullptr);

  // ---- inference helpers (build a private tape) ----

  // Logits (classification) or 1x1 prediction (regression).
  Tensor2 predict(const std::vector<PointCloud>& clouds);
  Index predict_class(const std::vector<PointCloud>& clouds);

  LatentPosterior encode(const std::vector<PointCloud>& clouds);

  struct Reconstruction {
    std::vector<PointCloud> aligned;
    std::vector<PointCloud> reconstructed;
    LatentPosterior posterior;
  };
  // Mean (eps = 0) reconstruction of a sample.
  Reconstruction reconstruct(const std::vector<PointCloud>& clouds, const ConditionVector& c);

  // Decode an explicit latent + condition into one cloud per structure.
  std::vector<PointCloud> generate(const std::vector<double>& z, const ConditionVector& c);

  // Per-structure, per-point Euclidean distances between generate(z, c1) and
  // generate(z, c2).
  std::vector<std::vector<double>> deformation_map(const std::vector<double>& z,
                                                   const ConditionVector& c1,
                                                   const ConditionVector& c2);

  // Rotation branch applied to one cloud (any kind has branches).
  PointCloud align(const PointCloud& cloud, Index structure = 0);

 private:
  struct Branch {
    RotationBlock rotation;
    GsnBlock signature;  // unused for rotation-only models
  };

  void check_sample(const Sample& sample) const;
  NodeId concat_all(Tape& tape, const std::vector<NodeId>& parts);

  ModelConfig config_;
  std::vector<Branch> branches_;
  // Discriminative head.
  LinearLayer head1_, head2_, head_out_;
  // Generative posterior + decoder.
  EncoderHead posterior_;
  DecoderBlock decoder_;
  std::vector<Parameter*> params_;
};

const char* to_string(ModelKind kind);
const char* to_string(TaskKind task);

}  // namespace pshape
