#include "pshape/models.hpp"

#include <cmath>
#include <cstring>

#include "pshape/errors.hpp"

namespace pshape {

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Rotation: return "rotation";
    case ModelKind::Discriminative: return "discriminative";
    case ModelKind::Generative: return "generative";
  }
  return "?";
}

const char* to_string(TaskKind task) {
  return task == TaskKind::Classification ? "classification" : "regression";
}

void ModelConfig::validate() const {
  auto positive = [](Index v, const char* what) {
    if (v < 1) throw ConfigError(std::string(what) + " must be >= 1, got " + std::to_string(v));
  };
  positive(structures, "structures");
  positive(points, "points");
  positive(rotation_feature_dim, "rotation_feature_dim");
  if (kind == ModelKind::Discriminative) {
    positive(signature_feature_dim, "signature_feature_dim");
    if (task == TaskKind::Classification) positive(classes, "classes");
  }
  if (kind == ModelKind::Generative) {
    positive(encoder_feature_dim, "encoder_feature_dim");
    positive(latent_dim, "latent_dim");
    if (condition_dim < 0) throw ConfigError("condition_dim must be >= 0");
    if (weights.align < 0 || weights.rec < 0 || weights.latent < 0) {
      throw ConfigError("loss weights must be nonnegative");
    }
  }
  if (emd.epsilon <= 0) throw ConfigError("emd.epsilon must be > 0");
  if (emd.exact_cap < 1) throw ConfigError("emd.exact_cap must be >= 1");
}

Model::Model(const ModelConfig& config) : config_(config) {
  config_.validate();
  Rng rng(Rng::mix(config_.seed, 0x6d6f64656cULL));
  branches_.reserve(static_cast<std::size_t>(config_.structures));
  for (Index s = 0; s < config_.structures; ++s) {
    Branch br;
    const std::string prefix = "s" + std::to_string(s);
    br.rotation = RotationBlock(prefix + ".rot", config_.gsn_hidden, config_.rotation_feature_dim,
                                config_.rotation_head_hidden, rng);
    if (config_.kind == ModelKind::Discriminative) {
      br.signature = GsnBlock(prefix + ".sig", config_.gsn_hidden, config_.signature_feature_dim, rng);
    } else if (config_.kind == ModelKind::Generative) {
      br.signature = GsnBlock(prefix + ".sig", config_.gsn_hidden, config_.encoder_feature_dim, rng);
    }
    branches_.push_back(std::move(br));
  }
  if (config_.kind == ModelKind::Discriminative) {
    const Index concat = config_.structures * config_.signature_feature_dim;
    const Index out_dim = config_.task == TaskKind::Classification ? config_.classes : 1;
    head1_ = LinearLayer("head.l1", concat, config_.head_hidden[0], rng);
    head2_ = LinearLayer("head.l2", config_.head_hidden[0], config_.head_hidden[1], rng);
    head_out_ = LinearLayer("head.out", config_.head_hidden[1], out_dim, rng);
  } else if (config_.kind == ModelKind::Generative) {
    const Index concat = config_.structures * config_.encoder_feature_dim;
    posterior_ = EncoderHead("posterior", concat, config_.posterior_hidden, config_.latent_dim, rng);
    decoder_ = DecoderBlock("decoder", config_.latent_dim, config_.condition_dim,
                            config_.decoder_hidden, config_.points, config_.structures, rng);
  }

  for (auto& br : branches_) {
    br.rotation.collect(params_);
    if (config_.kind != ModelKind::Rotation) br.signature.collect(params_);
  }
  if (config_.kind == ModelKind::Discriminative) {
    head1_.collect(params_);
    head2_.collect(params_);
    head_out_.collect(params_);
  } else if (config_.kind == ModelKind::Generative) {
    posterior_.collect(params_);
    decoder_.collect(params_);
  }
}

Index Model::parameter_count() const {
  Index n = 0;
  for (const auto* p : params_) n += p->value.size();
  return n;
}

void Model::zero_grads() {
  for (auto* p : params_) p->zero_grad();
}

std::vector<Tensor2> Model::parameter_values() const {
  std::vector<Tensor2> out;
  out.reserve(params_.size());
  for (const auto* p : params_) out.push_back(p->value);
  return out;
}

void Model::set_parameter_values(const std::vector<Tensor2>& values) {
  if (values.size() != params_.size()) throw ContractError("parameter snapshot size mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i].same_shape(params_[i]->value)) {
      throw ContractError("parameter snapshot shape mismatch at '" + params_[i]->name + "'");
    }
    params_[i]->value = values[i];
  }
}

void Model::check_sample(const Sample& sample) const {
  if (static_cast<Index>(sample.clouds.size()) != config_.structures) {
    throw ConfigError("sample has " + std::to_string(sample.clouds.size()) + " structures, model expects " +
                      std::to_string(config_.structures));
  }
  for (const auto& cloud : sample.clouds) {
    if (cloud.rows() != config_.points) {
      throw ConfigError("cloud has " + std::to_string(cloud.rows()) + " points, model expects " +
                        std::to_string(config_.points) + "; resample first");
    }
  }
}

NodeId Model::concat_all(Tape& tape, const std::vector<NodeId>& parts) {
  NodeId acc = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) acc = tape.concat_cols(acc, parts[i]);
  return acc;
}

Model::Forward Model::training_loss(Tape& tape, const Sample& sample,
                                    const std::vector<PointCloud>& references, const Tensor2* eps) {
  check_sample(sample);
  const bool with_align = !references.empty();
  if (with_align && static_cast<Index>(references.size()) != config_.structures) {
    throw ConfigError("reference count " + std::to_string(references.size()) + " != structures " +
                      std::to_string(config_.structures));
  }

  Forward fwd;
  std::vector<NodeId> align_losses;
  std::vector<NodeId> signatures;
  for (Index s = 0; s < config_.structures; ++s) {
    NodeId raw = tape.constant(sample.clouds[static_cast<std::size_t>(s)]);
    auto rot = branches_[static_cast<std::size_t>(s)].rotation.forward(tape, raw);
    fwd.aligned.push_back(rot.aligned);
    if (with_align) {
      align_losses.push_back(alignment_loss(tape, rot.aligned, references[static_cast<std::size_t>(s)],
                                            config_.metric, config_.emd));
    }
    if (config_.kind != ModelKind::Rotation) {
      signatures.push_back(branches_[static_cast<std::size_t>(s)].signature.forward(tape, rot.aligned));
    }
  }

  NodeId align_mean = -1;
  if (with_align) {
    NodeId acc = align_losses[0];
    for (std::size_t i = 1; i < align_losses.size(); ++i) acc = tape.add(acc, align_losses[i]);
    align_mean = tape.scale(acc, 1.0 / static_cast<double>(align_losses.size()));
    fwd.report.align = tape.value(align_mean)(0, 0);
  }

  if (config_.kind == ModelKind::Rotation) {
    if (!with_align) throw ContractError("rotation-only models require reference clouds");
    fwd.total = align_mean;
    fwd.report.total = fwd.report.align;
    return fwd;
  }

  if (config_.kind == ModelKind::Discriminative) {
    NodeId concat = concat_all(tape, signatures);
    NodeId h = tape.relu(tape.matmul_bias(concat, head1_.w, head1_.b));
    h = tape.relu(tape.matmul_bias(h, head2_.w, head2_.b));
    fwd.prediction = tape.matmul_bias(h, head_out_.w, head_out_.b);

    NodeId cls = -1;
    if (config_.task == TaskKind::Classification) {
      if (!sample.label) throw LabelError("classification sample is missing a label");
      if (*sample.label < 0 || *sample.label >= config_.classes) {
        throw LabelError("label " + std::to_string(*sample.label) + " out of range for " +
                         std::to_string(config_.classes) + " classes");
      }
      cls = softmax_cross_entropy(tape, fwd.prediction, *sample.label);
    } else {
      if (!sample.target) throw LabelError("regression sample is missing a target");
      cls = squared_error(tape, fwd.prediction, *sample.target);
    }
    fwd.report.cls = tape.value(cls)(0, 0);
    fwd.total = with_align ? tape.add(align_mean, cls) : cls;
    fwd.report.total = tape.value(fwd.total)(0, 0);
    return fwd;
  }

  // Generative path.
  if (static_cast<Index>(sample.condition.dim()) != config_.condition_dim) {
    throw ConfigError("condition has dimension " + std::to_string(sample.condition.dim()) +
                      ", model expects " + std::to_string(config_.condition_dim));
  }
  NodeId concat = concat_all(tape, signatures);
  auto post = posterior_.forward(tape, concat);
  fwd.mu = post.mu;
  fwd.log_var = post.log_var;

  Tensor2 eps_t(1, config_.latent_dim);
  if (eps) {
    if (eps->rows() != 1 || eps->cols() != config_.latent_dim) {
      throw DimensionError("eps must be 1x" + std::to_string(config_.latent_dim) + ", got " +
                           eps->shape_str());
    }
    eps_t = *eps;
  }
  NodeId z = sample_latent(tape, post.mu, post.log_var, eps_t);
  NodeId dec_in = z;
  if (config_.condition_dim > 0) {
    Tensor2 cond(1, config_.condition_dim,
                 std::vector<double>(sample.condition.values.begin(), sample.condition.values.end()));
    dec_in = tape.concat_cols(z, tape.constant(cond));
  }
  NodeId decoded = decoder_.forward(tape, dec_in);

  std::vector<NodeId> rec_losses;
  for (Index s = 0; s < config_.structures; ++s) {
    NodeId rec = tape.slice_rows(decoded, s * config_.points, config_.points);
    fwd.reconstructions.push_back(rec);
    rec_losses.push_back(emd_loss(tape, fwd.aligned[static_cast<std::size_t>(s)], rec, config_.metric,
                                  config_.emd));
  }
  NodeId rec_acc = rec_losses[0];
  for (std::size_t i = 1; i < rec_losses.size(); ++i) rec_acc = tape.add(rec_acc, rec_losses[i]);
  NodeId rec_mean = tape.scale(rec_acc, 1.0 / static_cast<double>(rec_losses.size()));
  NodeId latent = kl_loss(tape, post.mu, post.log_var, config_.latent_loss_form);

  fwd.report.rec = tape.value(rec_mean)(0, 0);
  fwd.report.latent = tape.value(latent)(0, 0);

  NodeId total = tape.scale(rec_mean, config_.weights.rec);
  total = tape.add(total, tape.scale(latent, config_.weights.latent));
  if (with_align) total = tape.add(total, tape.scale(align_mean, config_.weights.align));
  fwd.total = total;
  fwd.report.total = tape.value(total)(0, 0);
  return fwd;
}

Tensor2 Model::predict(const std::vector<PointCloud>& clouds) {
  if (config_.kind != ModelKind::Discriminative) {
    throw ContractError("predict() requires a discriminative model");
  }
  Tape tape;
  Sample sample;
  sample.clouds = clouds;
  sample.label = config_.task == TaskKind::Classification ? std::optional<Index>(0) : std::nullopt;
  sample.target = config_.task == TaskKind::Regression ? std::optional<double>(0.0) : std::nullopt;
  Forward fwd = training_loss(tape, sample, {});
  return tape.value(fwd.prediction);
}

Index Model::predict_class(const std::vector<PointCloud>& clouds) {
  const Tensor2 logits = predict(clouds);
  Index best = 0;
  for (Index j = 1; j < logits.cols(); ++j)
    if (logits(0, j) > logits(0, best)) best = j;
  return best;
}

LatentPosterior Model::encode(const std::vector<PointCloud>& clouds) {
  if (config_.kind != ModelKind::Generative) throw ContractError("encode() requires a generative model");
  Tape tape;
  Sample sample;
  sample.clouds = clouds;
  sample.condition = ConditionVector::zeros(config_.condition_dim);
  Forward fwd = training_loss(tape, sample, {});
  const Tensor2& mu = tape.value(fwd.mu);
  const Tensor2& lv = tape.value(fwd.log_var);
  LatentPosterior post;
  post.mu.assign(mu.data(), mu.data() + mu.size());
  post.log_var.assign(lv.data(), lv.data() + lv.size());
  return post;
}

Model::Reconstruction Model::reconstruct(const std::vector<PointCloud>& clouds,
                                         const ConditionVector& c) {
  if (config_.kind != ModelKind::Generative) {
    throw ContractError("reconstruct() requires a generative model");
  }
  Tape tape;
  Sample sample;
  sample.clouds = clouds;
  sample.condition = c;
  Forward fwd = training_loss(tape, sample, {});
  Reconstruction out;
  for (Index s = 0; s < config_.structures; ++s) {
    out.aligned.push_back(tape.value(fwd.aligned[static_cast<std::size_t>(s)]));
    out.reconstructed.push_back(tape.value(fwd.reconstructions[static_cast<std::size_t>(s)]));
  }
  const Tensor2& mu = tape.value(fwd.mu);
  const Tensor2& lv = tape.value(fwd.log_var);
  out.posterior.mu.assign(mu.data(), mu.data() + mu.size());
  out.posterior.log_var.assign(lv.data(), lv.data() + lv.size());
  return out;
}

std::vector<PointCloud> Model::generate(const std::vector<double>& z, const ConditionVector& c) {
  if (config_.kind != ModelKind::Generative) throw ContractError("generate() requires a generative model");
  if (static_cast<Index>(z.size()) != config_.latent_dim) {
    throw ConfigError("latent has dimension " + std::to_string(z.size()) + ", model expects " +
                      std::to_string(config_.latent_dim));
  }
  if (c.dim() != config_.condition_dim) {
    throw ConfigError("condition has dimension " + std::to_string(c.dim()) + ", model expects " +
                      std::to_string(config_.condition_dim));
  }
  Tape tape;
  NodeId in = tape.constant(Tensor2(1, config_.latent_dim, std::vector<double>(z)));
  if (config_.condition_dim > 0) {
    Tensor2 cond(1, config_.condition_dim, std::vector<double>(c.values));
    in = tape.concat_cols(in, tape.constant(cond));
  }
  NodeId decoded = decoder_.forward(tape, in);
  const Tensor2& all = tape.value(decoded);
  std::vector<PointCloud> out;
  for (Index s = 0; s < config_.structures; ++s) {
    PointCloud cloud(config_.points, 3);
    std::memcpy(cloud.data(), all.row(s * config_.points),
                sizeof(double) * static_cast<std::size_t>(config_.points) * 3);
    out.push_back(std::move(cloud));
  }
  return out;
}

std::vector<std::vector<double>> Model::deformation_map(const std::vector<double>& z,
                                                        const ConditionVector& c1,
                                                        const ConditionVector& c2) {
  const auto a = generate(z, c1);
  const auto b = generate(z, c2);
  std::vector<std::vector<double>> out;
  out.reserve(a.size());
  for (std::size_t s = 0; s < a.size(); ++s) {
    std::vector<double> dists(static_cast<std::size_t>(a[s].rows()));
    for (Index i = 0; i < a[s].rows(); ++i) {
      const double* pa = a[s].row(i);
      const double* pb = b[s].row(i);
      const double dx = pa[0] - pb[0], dy = pa[1] - pb[1], dz = pa[2] - pb[2];
      dists[static_cast<std::size_t>(i)] = std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    out.push_back(std::move(dists));
  }
  return out;
}

PointCloud Model::align(const PointCloud& cloud, Index structure) {
  if (structure < 0 || structure >= config_.structures) {
    throw ConfigError("structure index " + std::to_string(structure) + " out of range");
  }
  Tape tape;
  NodeId raw = tape.constant(cloud);
  auto rot = branches_[static_cast<std::size_t>(structure)].rotation.forward(tape, raw);
  return tape.value(rot.aligned);
}

}  // namespace pshape
