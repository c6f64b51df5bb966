#pragma once

#include <functional>
#include <vector>

#include "pshape/config.hpp"
#include "pshape/models.hpp"

namespace pshape {

struct EpochLog {
  int epoch = 0;
  LossReport train;
  double val_total = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val = 0.0;
  int completed_epochs = 0;
  bool diverged = false;
};

// Seeded deterministic training: shuffled batches, per-sample gradients
// evaluated (possibly concurrently) and reduced in a fixed order, one
// adaptive-moment step per batch, early stopping on validation total loss.
// The model is left holding the best-validation parameters. `references`
// holds one aligned template cloud per structure; pass empty to train
// without the alignment term.
TrainResult train_model(Model& model, const std::vector<Sample>& train_set,
                        const std::vector<Sample>& val_set,
                        const std::vector<PointCloud>& references, const TrainConfig& config,
                        int start_epoch = 0,
                        const std::function<void(const EpochLog&)>& on_epoch = {});

// Mean composite loss of a sample set under the current parameters
// (eps = 0 for generative models).
LossReport evaluate_loss(Model& model, const std::vector<Sample>& samples,
                         const std::vector<PointCloud>& references);

// Writes the per-epoch loss log as CSV with header
// epoch,align,rec,latent,cls,total,val_total.
void write_loss_log(const std::vector<EpochLog>& log, const std::string& path);

}  // namespace pshape
