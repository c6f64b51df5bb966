#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "pshape/errors.hpp"
#include "pshape/evaluation.hpp"

using namespace pshape;
using namespace pshape::testing;

TEST_CASE("classify_metrics: all correct gives ones") {
  const auto r = classify_metrics({0, 1, 1, 0}, {0, 1, 1, 0});
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.f1 == 1.0);
  CHECK(r.accuracy == 1.0);
}

TEST_CASE("classify_metrics: binary example against the hand confusion matrix") {
  // predictions (1,1,0,0) vs labels (1,0,0,0):
  //   confusion [label][pred] = [[2,1],[0,1]]
  //   class 0: precision 2/2 = 1,  recall 2/3
  //   class 1: precision 1/2,      recall 1
  //   macro precision 0.75, macro recall 5/6, accuracy 3/4
  const auto r = classify_metrics({1, 1, 0, 0}, {1, 0, 0, 0});
  CHECK(r.confusion[0][0] == 2);
  CHECK(r.confusion[0][1] == 1);
  CHECK(r.confusion[1][0] == 0);
  CHECK(r.confusion[1][1] == 1);
  CHECK(r.precision == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(r.recall == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(r.accuracy == doctest::Approx(0.75).epsilon(1e-12));
  // Per-class F1 before macro averaging: f0 = 2*1*(2/3)/(1+2/3) = 0.8,
  // f1 = 2*(1/2)*1/(3/2) = 2/3.
  CHECK(r.f1 == doctest::Approx(0.5 * (0.8 + 2.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("classify_metrics: confusion row sums equal per-class counts") {
  Rng rng(7);
  std::vector<Index> labels, preds;
  std::vector<Index> class_counts(3, 0);
  for (int i = 0; i < 200; ++i) {
    const Index label = static_cast<Index>(rng.uniform_index(3));
    labels.push_back(label);
    preds.push_back(static_cast<Index>(rng.uniform_index(3)));
    class_counts[static_cast<std::size_t>(label)]++;
  }
  const auto r = classify_metrics(preds, labels);
  for (Index c = 0; c < 3; ++c) {
    Index row = 0;
    for (Index k = 0; k < 3; ++k) row += r.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
    CHECK(row == class_counts[static_cast<std::size_t>(c)]);
  }
}

TEST_CASE("classify_metrics is invariant to pair order") {
  Rng rng(9);
  std::vector<Index> labels, preds;
  for (int i = 0; i < 50; ++i) {
    labels.push_back(static_cast<Index>(rng.uniform_index(2)));
    preds.push_back(static_cast<Index>(rng.uniform_index(2)));
  }
  const auto base = classify_metrics(preds, labels);

  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
  std::vector<Index> labels2, preds2;
  for (std::size_t i : order) {
    labels2.push_back(labels[i]);
    preds2.push_back(preds[i]);
  }
  const auto shuffled = classify_metrics(preds2, labels2);
  CHECK(base.precision == shuffled.precision);
  CHECK(base.recall == shuffled.recall);
  CHECK(base.f1 == shuffled.f1);
}

TEST_CASE("classify_metrics rejects empty input") {
  CHECK_THROWS_AS(classify_metrics({}, {}), DataError);
  CHECK_THROWS_AS(classify_metrics({1}, {1, 0}), DataError);
}

TEST_CASE("regression_mae basics") {
  CHECK(regression_mae({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(regression_mae({1, 2}, {2, 4}) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK_THROWS_AS(regression_mae({}, {}), DataError);
}

TEST_CASE("constant-mean predictor MAE equals the mean absolute deviation") {
  Rng rng(13);
  std::vector<double> targets;
  double mean = 0.0;
  for (int i = 0; i < 100; ++i) {
    targets.push_back(rng.uniform(0.0, 1.0));
    mean += targets.back();
  }
  mean /= 100.0;
  std::vector<double> constant(100, mean);
  double mad = 0.0;
  for (double t : targets) mad += std::fabs(t - mean);
  mad /= 100.0;
  CHECK(regression_mae(constant, targets) == doctest::Approx(mad).epsilon(1e-12));
}

TEST_CASE("reconstruction EMD measurement agrees with a direct recompute") {
  ModelConfig cfg;
  cfg.kind = ModelKind::Generative;
  cfg.structures = 1;
  cfg.points = 12;
  cfg.latent_dim = 2;
  cfg.condition_dim = 0;
  cfg.rotation_feature_dim = 8;
  cfg.encoder_feature_dim = 8;
  cfg.gsn_hidden = {4, 6};
  cfg.rotation_head_hidden = 5;
  cfg.posterior_hidden = 10;
  cfg.decoder_hidden = {10, 12};
  Model model(cfg);

  Rng rng(17);
  Sample s;
  s.clouds.push_back(random_normalized_cloud(rng, 12));
  const double measured = sample_reconstruction_emd(model, s);

  auto rec = model.reconstruct(s.clouds, s.condition);
  const CostMatrix c = cost_matrix(rec.aligned[0], rec.reconstructed[0], cfg.metric);
  CHECK(measured == doctest::Approx(emd_exact(c).cost / 12.0).epsilon(1e-12));
}

TEST_CASE("metrics CSV is written with a stable header") {
  const auto r = classify_metrics({1, 0}, {1, 1});
  const std::string path =
      (std::filesystem::temp_directory_path() / "pshape_metrics.csv").string();
  write_metrics_csv(r, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "precision,recall,f1,accuracy");
}
