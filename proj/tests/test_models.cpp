#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "pshape/errors.hpp"
#include "pshape/models.hpp"

using namespace pshape;
using namespace pshape::testing;

namespace {

ModelConfig tiny_disc(Index structures = 1) {
  ModelConfig c;
  c.kind = ModelKind::Discriminative;
  c.structures = structures;
  c.points = 16;
  c.classes = 2;
  c.rotation_feature_dim = 8;
  c.signature_feature_dim = 12;
  c.gsn_hidden = {4, 6};
  c.rotation_head_hidden = 5;
  c.head_hidden = {10, 6};
  c.seed = 7;
  return c;
}

ModelConfig tiny_gen(Index structures = 1, Index k = 2, Index m = 2) {
  ModelConfig c;
  c.kind = ModelKind::Generative;
  c.structures = structures;
  c.points = 16;
  c.latent_dim = k;
  c.condition_dim = m;
  c.rotation_feature_dim = 8;
  c.encoder_feature_dim = 10;
  c.gsn_hidden = {4, 6};
  c.rotation_head_hidden = 5;
  c.posterior_hidden = 12;
  c.decoder_hidden = {12, 16};
  c.seed = 11;
  return c;
}

Sample make_sample(Rng& rng, const ModelConfig& c, Index label = 0) {
  Sample s;
  for (Index st = 0; st < c.structures; ++st) s.clouds.push_back(random_normalized_cloud(rng, c.points));
  s.label = label;
  s.target = 0.4;
  if (c.condition_dim > 0) s.condition = ConditionVector::one_hot(label, c.condition_dim);
  return s;
}

}  // namespace

TEST_CASE("multi-structure concatenated signature length is structures * F") {
  for (Index s : {Index{1}, Index{3}}) {
    Model model(tiny_disc(s));
    bool found = false;
    for (auto* p : model.parameters()) {
      if (p->name == "head.l1.w") {
        CHECK(p->value.rows() == s * 12);
        found = true;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("single-structure is the degenerate multi-structure path") {
  Model model(tiny_disc(1));
  Rng rng(5);
  Sample s = make_sample(rng, model.config());
  Tape t;
  auto fwd = model.training_loss(t, s, s.clouds);
  CHECK(t.value(fwd.prediction).cols() == 2);
  CHECK(fwd.aligned.size() == 1);
  CHECK(fwd.report.total == doctest::Approx(fwd.report.align + fwd.report.cls).epsilon(1e-12));
}

TEST_CASE("discriminative prediction is bit-identical under within-structure permutations") {
  Model model(tiny_disc(2));
  Rng rng(9);
  Sample s = make_sample(rng, model.config());
  const Tensor2 base = model.predict(s.clouds);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<PointCloud> shuffled;
    for (const auto& cloud : s.clouds) shuffled.push_back(permuted(cloud, rng));
    CHECK(model.predict(shuffled) == base);
  }
}

TEST_CASE("wrong branch or point count raises a configuration error") {
  Model model(tiny_disc(2));
  Rng rng(13);
  Sample wrong_branches = make_sample(rng, tiny_disc(1));
  CHECK_THROWS_AS((void)model.predict(wrong_branches.clouds), ConfigError);

  Sample s = make_sample(rng, model.config());
  s.clouds[0] = random_normalized_cloud(rng, 8);  // wrong N
  CHECK_THROWS_AS((void)model.predict(s.clouds), ConfigError);
}

TEST_CASE("discriminative loss: Eq-style total, multi-structure alignment average") {
  Model model(tiny_disc(2));
  Rng rng(21);
  Sample s = make_sample(rng, model.config(), 1);
  Tape t;
  auto fwd = model.training_loss(t, s, s.clouds);
  double align_sum = 0.0;
  for (std::size_t st = 0; st < s.clouds.size(); ++st) {
    const CostMatrix c = cost_matrix(t.value(fwd.aligned[st]), s.clouds[st], model.config().metric);
    align_sum += emd_exact(c).cost / static_cast<double>(c.n);
  }
  CHECK(fwd.report.align == doctest::Approx(align_sum / 2.0).epsilon(1e-12));
  CHECK(fwd.report.total == doctest::Approx(fwd.report.align + fwd.report.cls).epsilon(1e-12));
}

TEST_CASE("regression task uses the squared error") {
  ModelConfig cfg = tiny_disc(1);
  cfg.task = TaskKind::Regression;
  Model model(cfg);
  Rng rng(31);
  Sample s = make_sample(rng, cfg);
  s.target = 72.0;
  Tape t;
  auto fwd = model.training_loss(t, s, {});
  const double pred = t.value(fwd.prediction)(0, 0);
  CHECK(fwd.report.cls == doctest::Approx((pred - 72.0) * (pred - 72.0)).epsilon(1e-12));
}

TEST_CASE("missing or out-of-range labels are reported") {
  Model model(tiny_disc(1));
  Rng rng(3);
  Sample s = make_sample(rng, model.config());
  s.label.reset();
  Tape t;
  CHECK_THROWS_AS(model.training_loss(t, s, {}), LabelError);

  Sample bad = make_sample(rng, model.config());
  bad.label = 7;
  Tape t2;
  CHECK_THROWS_AS(model.training_loss(t2, bad, {}), LabelError);
}

TEST_CASE("generative forward: eps=0 reconstruction is deterministic") {
  Model model(tiny_gen());
  Rng rng(41);
  Sample s = make_sample(rng, model.config(), 1);
  auto r1 = model.reconstruct(s.clouds, s.condition);
  auto r2 = model.reconstruct(s.clouds, s.condition);
  CHECK(r1.reconstructed[0] == r2.reconstructed[0]);
  CHECK(r1.posterior.mu == r2.posterior.mu);
}

TEST_CASE("generative loss components obey the weighted sum and structure averaging") {
  ModelConfig cfg = tiny_gen(2, 3, 2);
  cfg.weights = {1.0, 1.0, 10.0};
  Model model(cfg);
  Rng rng(43);
  Sample s = make_sample(rng, cfg, 0);
  Tape t;
  auto fwd = model.training_loss(t, s, s.clouds);

  double rec_sum = 0.0;
  for (Index st = 0; st < cfg.structures; ++st) {
    const CostMatrix c =
        cost_matrix(t.value(fwd.aligned[static_cast<std::size_t>(st)]),
                    t.value(fwd.reconstructions[static_cast<std::size_t>(st)]), cfg.metric);
    rec_sum += emd_exact(c).cost / static_cast<double>(c.n);
  }
  CHECK(fwd.report.rec == doctest::Approx(rec_sum / 2.0).epsilon(1e-12));
  CHECK(fwd.report.total ==
        doctest::Approx(1.0 * fwd.report.align + 1.0 * fwd.report.rec + 10.0 * fwd.report.latent)
            .epsilon(1e-12));
}

TEST_CASE("K=0, m=0 reduces to a plain variational autoencoder") {
  Model model(tiny_gen(1, 2, 0));
  Rng rng(47);
  Sample s;
  s.clouds.push_back(random_normalized_cloud(rng, 16));
  Tape t;
  auto fwd = model.training_loss(t, s, {});
  CHECK(fwd.reconstructions.size() == 1);
  CHECK(fwd.report.total ==
        doctest::Approx(fwd.report.rec + 10.0 * fwd.report.latent).epsilon(1e-12));
}

TEST_CASE("3D-MNIST style configuration: k=2 with a 10-class one-hot condition") {
  ModelConfig cfg = tiny_gen(1, 2, 10);
  Model model(cfg);
  Rng rng(53);
  Sample s = make_sample(rng, cfg, 7);
  Tape t;
  auto fwd = model.training_loss(t, s, {});
  CHECK(t.value(fwd.mu).cols() == 2);
  CHECK(t.value(fwd.reconstructions[0]).rows() == 16);
}

TEST_CASE("generate: deterministic, condition-sensitive, dimension-checked") {
  Model model(tiny_gen(1, 2, 2));
  const std::vector<double> z{0.3, -0.1};
  const auto ad = ConditionVector::one_hot(0, 2);  // AD encoded [1,0]
  const auto hc = ConditionVector::one_hot(1, 2);  // HC encoded [0,1]
  CHECK(ad.values == std::vector<double>{1.0, 0.0});
  CHECK(hc.values == std::vector<double>{0.0, 1.0});

  const auto a1 = model.generate(z, ad);
  const auto a2 = model.generate(z, ad);
  CHECK(a1[0] == a2[0]);

  const auto h1 = model.generate(z, hc);
  CHECK(!(a1[0] == h1[0]));

  CHECK_THROWS_AS(model.generate({0.1}, ad), ConfigError);
  CHECK_THROWS_AS(model.generate(z, ConditionVector::zeros(5)), ConfigError);
}

TEST_CASE("deformation map: zero for equal conditions, nonnegative, index-matched") {
  Model model(tiny_gen(2, 2, 2));
  const std::vector<double> z{0.5, 0.2};
  const auto c1 = ConditionVector::one_hot(0, 2);
  const auto c2 = ConditionVector::one_hot(1, 2);

  const auto same = model.deformation_map(z, c1, c1);
  for (const auto& structure : same)
    for (double d : structure) CHECK(d == 0.0);

  const auto diff = model.deformation_map(z, c1, c2);
  CHECK(diff.size() == 2);
  double total = 0.0;
  for (const auto& structure : diff) {
    CHECK(structure.size() == 16);
    for (double d : structure) {
      CHECK(d >= 0.0);
      total += d;
    }
  }
  CHECK(total > 0.0);

  const auto ga = model.generate(z, c1);
  const auto gb = model.generate(z, c2);
  for (std::size_t st = 0; st < ga.size(); ++st) {
    for (Index i = 0; i < ga[st].rows(); ++i) {
      double acc = 0.0;
      for (Index d = 0; d < 3; ++d) {
        const double delta = ga[st](i, d) - gb[st](i, d);
        acc += delta * delta;
      }
      CHECK(diff[st][static_cast<std::size_t>(i)] ==
            doctest::Approx(std::sqrt(acc)).epsilon(1e-12));
    }
  }
}

TEST_CASE("rotation-only models train on the alignment objective alone") {
  ModelConfig cfg;
  cfg.kind = ModelKind::Rotation;
  cfg.structures = 1;
  cfg.points = 16;
  cfg.rotation_feature_dim = 8;
  cfg.gsn_hidden = {4, 6};
  cfg.rotation_head_hidden = 5;
  Model model(cfg);
  Rng rng(61);
  Sample s;
  s.clouds.push_back(random_normalized_cloud(rng, 16));
  Tape t;
  auto fwd = model.training_loss(t, s, s.clouds);
  CHECK(fwd.report.total == fwd.report.align);
  CHECK(fwd.report.cls == 0.0);

  Tape t2;
  CHECK_THROWS_AS(model.training_loss(t2, s, {}), ContractError);
}
