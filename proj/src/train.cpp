#include "pshape/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "pshape/errors.hpp"
#include "pshape/optimizer.hpp"
#include "pshape/parallel.hpp"
#include "pshape/rng.hpp"

namespace pshape {

namespace {

constexpr std::uint64_t kEpsStreamTag = 0x657073ULL;
constexpr std::uint64_t kShuffleStreamTag = 0x73687566ULL;

Tensor2 draw_eps(const Model& model, std::uint64_t seed, int epoch, std::size_t sample_index) {
  Tensor2 eps(1, model.config().latent_dim);
  if (model.config().kind == ModelKind::Generative) {
    Rng rng(Rng::mix(Rng::mix(seed, kEpsStreamTag),
                     Rng::mix(static_cast<std::uint64_t>(epoch), sample_index)));
    for (Index i = 0; i < eps.cols(); ++i) eps(0, i) = rng.normal();
  }
  return eps;
}

struct SampleEval {
  LossReport report;
  std::vector<Tensor2> grads;  // parallel to model.parameters()
};

}  // namespace

LossReport evaluate_loss(Model& model, const std::vector<Sample>& samples,
                         const std::vector<PointCloud>& references) {
  if (samples.empty()) throw DataError("evaluate_loss on an empty sample set");
  std::vector<LossReport> reports(samples.size());
  parallel_for(static_cast<int>(samples.size()), [&](int i) {
    Tape tape;
    const Tensor2 eps(1, model.config().latent_dim);  // zero draw: mean decoding
    auto fwd = model.training_loss(tape, samples[static_cast<std::size_t>(i)], references,
                                   model.config().kind == ModelKind::Generative ? &eps : nullptr);
    reports[static_cast<std::size_t>(i)] = fwd.report;
  });
  LossReport mean;
  for (const auto& r : reports) {
    mean.align += r.align;
    mean.rec += r.rec;
    mean.latent += r.latent;
    mean.cls += r.cls;
    mean.total += r.total;
  }
  const double inv = 1.0 / static_cast<double>(reports.size());
  mean.align *= inv;
  mean.rec *= inv;
  mean.latent *= inv;
  mean.cls *= inv;
  mean.total *= inv;
  return mean;
}

TrainResult train_model(Model& model, const std::vector<Sample>& train_set,
                        const std::vector<Sample>& val_set,
                        const std::vector<PointCloud>& references, const TrainConfig& config,
                        int start_epoch, const std::function<void(const EpochLog&)>& on_epoch) {
  config.validate();
  if (train_set.empty()) throw DataError("training split is empty");
  if (val_set.empty()) throw DataError("validation split is empty");

  auto& params = model.parameters();
  AdamOptimizer optimizer(params, {config.learning_rate, config.beta1, config.beta2, config.eps_hat});

  TrainResult result;
  result.best_val = std::numeric_limits<double>::infinity();
  std::vector<Tensor2> best_values = model.parameter_values();
  result.best_epoch = start_epoch;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = start_epoch + 1; epoch <= start_epoch + config.epochs; ++epoch) {
    // Seeded per-epoch shuffle.
    Rng shuffle_rng(Rng::mix(Rng::mix(config.seed, kShuffleStreamTag),
                             static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = shuffle_rng.uniform_index(i);
      std::swap(order[i - 1], order[j]);
    }

    LossReport epoch_mean;
    bool numeric_failure = false;
    std::string failure_what;

    for (std::size_t batch_start = 0; batch_start < order.size() && !numeric_failure;
         batch_start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t batch_end =
          std::min(order.size(), batch_start + static_cast<std::size_t>(config.batch_size));
      const int batch_n = static_cast<int>(batch_end - batch_start);

      std::vector<SampleEval> evals(static_cast<std::size_t>(batch_n));
      parallel_for(batch_n, [&](int bi) {
        const std::size_t idx = order[batch_start + static_cast<std::size_t>(bi)];
        Tape tape;
        const Tensor2 eps = draw_eps(model, config.seed, epoch, idx);
        auto fwd = model.training_loss(tape, train_set[idx], references,
                                       model.config().kind == ModelKind::Generative ? &eps : nullptr);
        tape.backward(fwd.total, /*accumulate_into_params=*/false);
        SampleEval& eval = evals[static_cast<std::size_t>(bi)];
        eval.report = fwd.report;
        eval.grads.reserve(params.size());
        for (auto* p : params) {
          const Tensor2& g = tape.grad(*p);
          eval.grads.push_back(g.empty() ? Tensor2(p->value.rows(), p->value.cols()) : g);
        }
      });

      // Fixed-order reduction keeps results independent of the thread schedule.
      model.zero_grads();
      const double inv_batch = 1.0 / static_cast<double>(batch_n);
      for (const auto& eval : evals) {
        if (!std::isfinite(eval.report.total)) {
          numeric_failure = true;
          failure_what = "non-finite training loss";
          break;
        }
        for (std::size_t pi = 0; pi < params.size(); ++pi) {
          axpy(params[pi]->grad, inv_batch, eval.grads[pi]);
        }
        epoch_mean.align += eval.report.align;
        epoch_mean.rec += eval.report.rec;
        epoch_mean.latent += eval.report.latent;
        epoch_mean.cls += eval.report.cls;
        epoch_mean.total += eval.report.total;
      }
      if (numeric_failure) break;
      try {
        optimizer.step();
      } catch (const NumericError& e) {
        numeric_failure = true;
        failure_what = e.what();
      }
    }

    if (numeric_failure) {
      // Divergence: keep the best parameters seen so far and stop.
      model.set_parameter_values(best_values);
      result.diverged = true;
      result.completed_epochs = epoch - 1 - start_epoch;
      return result;
    }

    const double inv_n = 1.0 / static_cast<double>(train_set.size());
    epoch_mean.align *= inv_n;
    epoch_mean.rec *= inv_n;
    epoch_mean.latent *= inv_n;
    epoch_mean.cls *= inv_n;
    epoch_mean.total *= inv_n;

    const LossReport val = evaluate_loss(model, val_set, references);

    EpochLog row;
    row.epoch = epoch;
    row.train = epoch_mean;
    row.val_total = val.total;
    result.log.push_back(row);
    result.completed_epochs = epoch - start_epoch;
    if (on_epoch) on_epoch(row);

    if (val.total < result.best_val) {
      result.best_val = val.total;
      result.best_epoch = epoch;
      best_values = model.parameter_values();
    } else if (epoch - result.best_epoch >= config.patience) {
      break;
    }
  }

  model.set_parameter_values(best_values);
  return result;
}

void write_loss_log(const std::vector<EpochLog>& log, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open loss log '" + path + "' for writing");
  out << "epoch,align,rec,latent,cls,total,val_total\n";
  char buf[512];
  for (const auto& row : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", row.epoch,
                  row.train.align, row.train.rec, row.train.latent, row.train.cls, row.train.total,
                  row.val_total);
    out << buf;
  }
}

}  // namespace pshape
