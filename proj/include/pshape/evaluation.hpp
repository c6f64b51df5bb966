#pragma once

#include <string>
#include <vector>

#include "pshape/config.hpp"
#include "pshape/dataio.hpp"
#include "pshape/models.hpp"

namespace pshape {

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct ClassificationReport {
  double precision = 0.0;  // macro-averaged
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  std::vector<std::vector<Index>> confusion;  // [label][prediction]
};

ClassificationReport classify_metrics(const std::vector<Index>& predictions,
                                      const std::vector<Index>& labels);

double regression_mae(const std::vector<double>& predictions, const std::vector<double>& targets);

// ---------------------------------------------------------------------------
// Reconstruction measurements
// ---------------------------------------------------------------------------

// Mean-per-point EMD between a sample's aligned inputs and its mean (eps = 0)
// reconstructions, averaged over structures.
double sample_reconstruction_emd(Model& model, const Sample& sample);

// Averaged over a sample set.
double mean_reconstruction_emd(Model& model, const std::vector<Sample>& samples);

// ---------------------------------------------------------------------------
// Experiment drivers
// ---------------------------------------------------------------------------

enum class Scenario { Single, SingleConditional, Multi, MultiConditional };
const char* to_string(Scenario s);

struct CurvePoint {
  Scenario scenario;
  Index k_per_structure = 0;
  double mean_emd = 0.0;
};

// Trains one generative model per (scenario, k) cell on the given splits and
// measures mean test reconstruction EMD. Single-structure scenarios train an
// independent model per structure and average the errors; multi-structure
// scenarios allocate k_per_structure * structures total latent dimensions.
struct ReconCurveJob {
  DatasetManifest train, val, test;
  ModelConfig base;        // kind/structures/latent_dim are overridden per cell
  TrainConfig train_cfg;
  DataConfig data;
  std::vector<Index> ks{1, 2, 3, 4, 5};
  std::vector<Scenario> scenarios{Scenario::Single, Scenario::SingleConditional, Scenario::Multi,
                                  Scenario::MultiConditional};
};
std::vector<CurvePoint> reconstruction_curve(const ReconCurveJob& job,
                                             const std::string& csv_path = {});

// Trains fresh discriminative models purely on clouds sampled from a trained
// conditional generative model, at each requested synthetic-set size, and
// scores them on the real test split. Accuracy per size is the median over
// `seeds` runs.
struct SynthCurveJob {
  std::vector<Index> sizes{50, 100, 200, 400, 600, 1000};
  int seeds = 5;
  ModelConfig classifier;  // structures/points must match the generator
  TrainConfig train_cfg;
};
struct SynthCurvePoint {
  Index size = 0;
  double median_accuracy = 0.0;
  std::vector<double> per_seed;
};
std::vector<SynthCurvePoint> synth_then_classify(Model& generator,
                                                 const std::vector<Sample>& real_test,
                                                 const std::vector<Index>& test_labels,
                                                 const SynthCurveJob& job,
                                                 const std::string& csv_path = {});

void write_metrics_csv(const ClassificationReport& report, const std::string& path);

}  // namespace pshape
