#include "pshape/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "pshape/errors.hpp"
#include "pshape/parallel.hpp"
#include "pshape/rng.hpp"
#include "pshape/train.hpp"

namespace pshape {

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::Single: return "single";
    case Scenario::SingleConditional: return "single-cond";
    case Scenario::Multi: return "multi";
    case Scenario::MultiConditional: return "multi-cond";
  }
  return "?";
}

ClassificationReport classify_metrics(const std::vector<Index>& predictions,
                                      const std::vector<Index>& labels) {
  if (predictions.empty() || predictions.size() != labels.size()) {
    throw DataError("classify_metrics needs equal-length, nonempty prediction and label lists");
  }
  Index classes = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || predictions[i] < 0) throw LabelError("negative class index");
    classes = std::max({classes, labels[i] + 1, predictions[i] + 1});
  }

  ClassificationReport report;
  report.confusion.assign(static_cast<std::size_t>(classes),
                          std::vector<Index>(static_cast<std::size_t>(classes), 0));
  Index correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    report.confusion[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(predictions[i])] += 1;
    if (labels[i] == predictions[i]) ++correct;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());

  double p_sum = 0.0, r_sum = 0.0, f_sum = 0.0;
  for (Index c = 0; c < classes; ++c) {
    Index tp = report.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
    Index row = 0, col = 0;
    for (Index k = 0; k < classes; ++k) {
      row += report.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
      col += report.confusion[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
    }
    const double precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    const double recall = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    const double f1 = precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    p_sum += precision;
    r_sum += recall;
    f_sum += f1;
  }
  report.precision = p_sum / static_cast<double>(classes);
  report.recall = r_sum / static_cast<double>(classes);
  report.f1 = f_sum / static_cast<double>(classes);
  return report;
}

double regression_mae(const std::vector<double>& predictions, const std::vector<double>& targets) {
  if (predictions.empty() || predictions.size() != targets.size()) {
    throw DataError("regression_mae needs equal-length, nonempty prediction and target lists");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) acc += std::fabs(predictions[i] - targets[i]);
  return acc / static_cast<double>(predictions.size());
}

double sample_reconstruction_emd(Model& model, const Sample& sample) {
  auto rec = model.reconstruct(sample.clouds, sample.condition);
  double acc = 0.0;
  for (std::size_t s = 0; s < rec.aligned.size(); ++s) {
    CostMatrix c = cost_matrix(rec.aligned[s], rec.reconstructed[s], model.config().metric);
    EmdSolution sol = solve_emd(c, model.config().emd);
    acc += sol.cost / static_cast<double>(c.n);
  }
  return acc / static_cast<double>(rec.aligned.size());
}

double mean_reconstruction_emd(Model& model, const std::vector<Sample>& samples) {
  if (samples.empty()) throw DataError("mean_reconstruction_emd on an empty sample set");
  std::vector<double> per_sample(samples.size());
  parallel_for(static_cast<int>(samples.size()), [&](int i) {
    per_sample[static_cast<std::size_t>(i)] =
        sample_reconstruction_emd(model, samples[static_cast<std::size_t>(i)]);
  });
  double acc = 0.0;
  for (double v : per_sample) acc += v;
  return acc / static_cast<double>(samples.size());
}

namespace {

// Keeps only one structure of every sample (for independent single-structure
// models on multi-structure datasets).
std::vector<Sample> restrict_to_structure(const std::vector<Sample>& samples, std::size_t st) {
  std::vector<Sample> out = samples;
  for (auto& s : out) {
    PointCloud cloud = s.clouds.at(st);
    s.clouds.clear();
    s.clouds.push_back(std::move(cloud));
  }
  return out;
}

double train_and_measure(const ModelConfig& cfg, const TrainConfig& tcfg,
                         const std::vector<Sample>& train_s, const std::vector<Sample>& val_s,
                         const std::vector<Sample>& test_s) {
  Model model(cfg);
  std::vector<PointCloud> refs = train_s.front().clouds;
  train_model(model, train_s, val_s, refs, tcfg);
  return mean_reconstruction_emd(model, test_s);
}

}  // namespace

std::vector<CurvePoint> reconstruction_curve(const ReconCurveJob& job, const std::string& csv_path) {
  const Index structures = static_cast<Index>(job.train.structures.size());
  std::vector<CurvePoint> points;

  for (Scenario scenario : job.scenarios) {
    const bool conditional =
        scenario == Scenario::SingleConditional || scenario == Scenario::MultiConditional;
    const bool multi = scenario == Scenario::Multi || scenario == Scenario::MultiConditional;
    const Index condition_dim = conditional ? job.base.classes : 0;

    MaterializeOptions opts;
    opts.points = job.base.points;
    opts.normalize = true;
    opts.condition_dim = condition_dim;
    opts.seed = job.base.seed;
    const auto train_s = materialize(job.train, opts);
    const auto val_s = materialize(job.val, opts);
    const auto test_s = materialize(job.test, opts);

    for (Index k : job.ks) {
      double mean_emd = 0.0;
      ModelConfig cfg = job.base;
      cfg.kind = ModelKind::Generative;
      cfg.condition_dim = condition_dim;
      if (multi) {
        cfg.structures = structures;
        cfg.latent_dim = k * structures;
        cfg.seed = Rng::mix(job.base.seed, Rng::mix(static_cast<std::uint64_t>(scenario),
                                                    static_cast<std::uint64_t>(k)));
        mean_emd = train_and_measure(cfg, job.train_cfg, train_s, val_s, test_s);
      } else {
        cfg.structures = 1;
        cfg.latent_dim = k;
        for (Index st = 0; st < structures; ++st) {
          cfg.seed = Rng::mix(job.base.seed,
                              Rng::mix(static_cast<std::uint64_t>(scenario),
                                       Rng::mix(static_cast<std::uint64_t>(k),
                                                static_cast<std::uint64_t>(st))));
          mean_emd += train_and_measure(cfg, job.train_cfg,
                                        restrict_to_structure(train_s, static_cast<std::size_t>(st)),
                                        restrict_to_structure(val_s, static_cast<std::size_t>(st)),
                                        restrict_to_structure(test_s, static_cast<std::size_t>(st)));
        }
        mean_emd /= static_cast<double>(structures);
      }
      points.push_back({scenario, k, mean_emd});
    }
  }

  if (!csv_path.empty()) {
    std::ofstream out(csv_path, std::ios::trunc);
    if (!out) throw DataError("cannot open '" + csv_path + "' for writing");
    out << "scenario,k_per_structure,mean_emd\n";
    char buf[128];
    for (const auto& p : points) {
      std::snprintf(buf, sizeof(buf), "%s,%lld,%.17g\n", to_string(p.scenario),
                    static_cast<long long>(p.k_per_structure), p.mean_emd);
      out << buf;
    }
  }
  return points;
}

std::vector<SynthCurvePoint> synth_then_classify(Model& generator,
                                                 const std::vector<Sample>& real_test,
                                                 const std::vector<Index>& test_labels,
                                                 const SynthCurveJob& job,
                                                 const std::string& csv_path) {
  const ModelConfig& gen_cfg = generator.config();
  if (gen_cfg.kind != ModelKind::Generative || gen_cfg.condition_dim < 2) {
    throw ConfigError("synth_then_classify needs a conditional generative model");
  }
  if (job.classifier.points != gen_cfg.points || job.classifier.structures != gen_cfg.structures) {
    throw ConfigError("classifier geometry must match the generator (points/structures)");
  }
  if (real_test.size() != test_labels.size()) {
    throw DataError("real test set and label list differ in length");
  }
  const Index classes = gen_cfg.condition_dim;

  std::vector<SynthCurvePoint> curve;
  for (Index size : job.sizes) {
    SynthCurvePoint point;
    point.size = size;
    for (int seed_i = 0; seed_i < job.seeds; ++seed_i) {
      // Sample a labeled synthetic dataset; labels equal the conditioning
      // one-hot by construction.
      Rng rng(Rng::mix(Rng::mix(gen_cfg.seed, 0x73796e7468ULL),
                       Rng::mix(static_cast<std::uint64_t>(size), static_cast<std::uint64_t>(seed_i))));
      std::vector<Sample> synth(static_cast<std::size_t>(size));
      for (Index i = 0; i < size; ++i) {
        const Index cls = i % classes;
        std::vector<double> z(static_cast<std::size_t>(gen_cfg.latent_dim));
        for (double& v : z) v = rng.normal();
        const ConditionVector cond = ConditionVector::one_hot(cls, classes);
        Sample s;
        for (auto& cloud : generator.generate(z, cond)) s.clouds.push_back(normalize(cloud));
        s.label = cls;
        synth[static_cast<std::size_t>(i)] = std::move(s);
      }
      // Hold out a slice of the synthetic data for early stopping.
      const std::size_t val_n = std::max<std::size_t>(1, synth.size() / 8);
      std::vector<Sample> val_s(synth.end() - static_cast<std::ptrdiff_t>(val_n), synth.end());
      synth.resize(synth.size() - val_n);

      ModelConfig cls_cfg = job.classifier;
      cls_cfg.kind = ModelKind::Discriminative;
      cls_cfg.task = TaskKind::Classification;
      cls_cfg.classes = classes;
      cls_cfg.seed = Rng::mix(job.classifier.seed,
                              Rng::mix(static_cast<std::uint64_t>(size),
                                       static_cast<std::uint64_t>(seed_i)));
      Model classifier(cls_cfg);
      std::vector<PointCloud> refs = synth.front().clouds;
      train_model(classifier, synth, val_s, refs, job.train_cfg);

      std::vector<Index> preds(real_test.size());
      parallel_for(static_cast<int>(real_test.size()), [&](int i) {
        preds[static_cast<std::size_t>(i)] =
            classifier.predict_class(real_test[static_cast<std::size_t>(i)].clouds);
      });
      point.per_seed.push_back(classify_metrics(preds, test_labels).accuracy);
    }
    std::vector<double> sorted = point.per_seed;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    point.median_accuracy = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    curve.push_back(std::move(point));
  }

  if (!csv_path.empty()) {
    std::ofstream out(csv_path, std::ios::trunc);
    if (!out) throw DataError("cannot open '" + csv_path + "' for writing");
    out << "size,accuracy\n";
    char buf[64];
    for (const auto& p : curve) {
      std::snprintf(buf, sizeof(buf), "%lld,%.17g\n", static_cast<long long>(p.size),
                    p.median_accuracy);
      out << buf;
    }
  }
  return curve;
}

void write_metrics_csv(const ClassificationReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << "precision,recall,f1,accuracy\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", report.precision, report.recall,
                report.f1, report.accuracy);
  out << buf;
}

}  // namespace pshape
