#include "pshape/config.hpp"

#include <fstream>
#include <set>

#include "pshape/errors.hpp"

namespace pshape {

using nlohmann::json;

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (learning_rate <= 0) throw ConfigError("train.learning_rate must be > 0");
  if (beta1 <= 0 || beta1 >= 1 || beta2 <= 0 || beta2 >= 1) {
    throw ConfigError("train.beta1/beta2 must lie in (0, 1)");
  }
  if (patience < 1) throw ConfigError("train.patience must be >= 1");
}

namespace {

ModelKind kind_from_string(const std::string& s) {
  if (s == "rotation") return ModelKind::Rotation;
  if (s == "discriminative") return ModelKind::Discriminative;
  if (s == "generative") return ModelKind::Generative;
  throw ConfigError("unknown model kind '" + s + "'");
}

TaskKind task_from_string(const std::string& s) {
  if (s == "classification") return TaskKind::Classification;
  if (s == "regression") return TaskKind::Regression;
  throw ConfigError("unknown task '" + s + "'");
}

GroundMetric metric_from_string(const std::string& s) {
  if (s == "l1") return GroundMetric::L1;
  if (s == "l2") return GroundMetric::L2;
  throw ConfigError("unknown ground metric '" + s + "' (expected l1 or l2)");
}

EmdSolverConfig::Kind solver_from_string(const std::string& s) {
  if (s == "auto") return EmdSolverConfig::Kind::Auto;
  if (s == "exact") return EmdSolverConfig::Kind::Exact;
  if (s == "approx") return EmdSolverConfig::Kind::Approx;
  throw ConfigError("unknown emd solver '" + s + "' (expected auto, exact, or approx)");
}

const char* solver_to_string(EmdSolverConfig::Kind k) {
  switch (k) {
    case EmdSolverConfig::Kind::Auto: return "auto";
    case EmdSolverConfig::Kind::Exact: return "exact";
    case EmdSolverConfig::Kind::Approx: return "approx";
  }
  return "?";
}

void reject_unknown_keys(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      throw ConfigError("unknown configuration key '" + (where.empty() ? it.key() : where + "." + it.key()) + "'");
    }
  }
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json to_json(const ModelConfig& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["structures"] = c.structures;
  j["points"] = c.points;
  j["task"] = to_string(c.task);
  j["classes"] = c.classes;
  j["latent_dim"] = c.latent_dim;
  j["condition_dim"] = c.condition_dim;
  j["rotation_feature_dim"] = c.rotation_feature_dim;
  j["signature_feature_dim"] = c.signature_feature_dim;
  j["encoder_feature_dim"] = c.encoder_feature_dim;
  j["gsn_hidden"] = {c.gsn_hidden[0], c.gsn_hidden[1]};
  j["rotation_head_hidden"] = c.rotation_head_hidden;
  j["head_hidden"] = {c.head_hidden[0], c.head_hidden[1]};
  j["posterior_hidden"] = c.posterior_hidden;
  j["decoder_hidden"] = {c.decoder_hidden[0], c.decoder_hidden[1]};
  j["loss_weights"] = {{"align", c.weights.align}, {"rec", c.weights.rec}, {"latent", c.weights.latent}};
  j["latent_loss_form"] = c.latent_loss_form == KlForm::Standard ? "standard" : "paper-printed";
  j["ground_metric"] = c.metric == GroundMetric::L1 ? "l1" : "l2";
  j["emd"] = {{"solver", solver_to_string(c.emd.kind)},
              {"exact_cap", c.emd.exact_cap},
              {"epsilon", c.emd.epsilon},
              {"max_iters", c.emd.max_iters}};
  j["seed"] = c.seed;
  return j;
}

ModelConfig model_config_from_json(const json& j) {
  static const std::set<std::string> known = {
      "kind", "structures", "points", "task", "classes", "latent_dim", "condition_dim",
      "rotation_feature_dim", "signature_feature_dim", "encoder_feature_dim", "gsn_hidden",
      "rotation_head_hidden", "head_hidden", "posterior_hidden", "decoder_hidden", "loss_weights",
      "latent_loss_form", "ground_metric", "emd", "seed"};
  reject_unknown_keys(j, known, "model");

  ModelConfig c;
  if (j.contains("kind")) c.kind = kind_from_string(j.at("kind").get<std::string>());
  read_if(j, "structures", c.structures);
  read_if(j, "points", c.points);
  if (j.contains("task")) c.task = task_from_string(j.at("task").get<std::string>());
  read_if(j, "classes", c.classes);
  read_if(j, "latent_dim", c.latent_dim);
  read_if(j, "condition_dim", c.condition_dim);
  read_if(j, "rotation_feature_dim", c.rotation_feature_dim);
  read_if(j, "signature_feature_dim", c.signature_feature_dim);
  read_if(j, "encoder_feature_dim", c.encoder_feature_dim);
  if (j.contains("gsn_hidden")) {
    auto v = j.at("gsn_hidden").get<std::vector<Index>>();
    if (v.size() != 2) throw ConfigError("gsn_hidden must have exactly two widths");
    c.gsn_hidden = {v[0], v[1]};
  }
  read_if(j, "rotation_head_hidden", c.rotation_head_hidden);
  if (j.contains("head_hidden")) {
    auto v = j.at("head_hidden").get<std::vector<Index>>();
    if (v.size() != 2) throw ConfigError("head_hidden must have exactly two widths");
    c.head_hidden = {v[0], v[1]};
  }
  read_if(j, "posterior_hidden", c.posterior_hidden);
  if (j.contains("decoder_hidden")) {
    auto v = j.at("decoder_hidden").get<std::vector<Index>>();
    if (v.size() != 2) throw ConfigError("decoder_hidden must have exactly two widths");
    c.decoder_hidden = {v[0], v[1]};
  }
  if (j.contains("loss_weights")) {
    const json& w = j.at("loss_weights");
    reject_unknown_keys(w, {"align", "rec", "latent"}, "model.loss_weights");
    read_if(w, "align", c.weights.align);
    read_if(w, "rec", c.weights.rec);
    read_if(w, "latent", c.weights.latent);
  }
  if (j.contains("latent_loss_form")) {
    const auto s = j.at("latent_loss_form").get<std::string>();
    if (s == "standard") {
      c.latent_loss_form = KlForm::Standard;
    } else if (s == "paper-printed") {
      c.latent_loss_form = KlForm::PaperPrinted;
    } else {
      throw ConfigError("unknown latent_loss_form '" + s + "'");
    }
  }
  if (j.contains("ground_metric")) c.metric = metric_from_string(j.at("ground_metric").get<std::string>());
  if (j.contains("emd")) {
    const json& e = j.at("emd");
    reject_unknown_keys(e, {"solver", "exact_cap", "epsilon", "max_iters"}, "model.emd");
    if (e.contains("solver")) c.emd.kind = solver_from_string(e.at("solver").get<std::string>());
    read_if(e, "exact_cap", c.emd.exact_cap);
    read_if(e, "epsilon", c.emd.epsilon);
    read_if(e, "max_iters", c.emd.max_iters);
  }
  read_if(j, "seed", c.seed);
  c.validate();
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  j["model"] = to_json(c.model);
  j["train"] = {{"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},
                {"learning_rate", c.train.learning_rate},
                {"beta1", c.train.beta1},
                {"beta2", c.train.beta2},
                {"eps_hat", c.train.eps_hat},
                {"seed", c.train.seed},
                {"patience", c.train.patience}};
  j["data"] = {{"normalize_inputs", c.data.normalize_inputs},
               {"split_ratios", {c.data.split_ratios[0], c.data.split_ratios[1], c.data.split_ratios[2]}},
               {"split_seed", c.data.split_seed},
               {"reference_cloud", c.data.reference_cloud}};
  return j;
}

RunConfig run_config_from_json(const json& j) {
  reject_unknown_keys(j, {"model", "train", "data"}, "");
  RunConfig c;
  if (j.contains("model")) c.model = model_config_from_json(j.at("model"));
  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown_keys(t, {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "eps_hat",
                            "seed", "patience"},
                        "train");
    read_if(t, "epochs", c.train.epochs);
    read_if(t, "batch_size", c.train.batch_size);
    read_if(t, "learning_rate", c.train.learning_rate);
    read_if(t, "beta1", c.train.beta1);
    read_if(t, "beta2", c.train.beta2);
    read_if(t, "eps_hat", c.train.eps_hat);
    read_if(t, "seed", c.train.seed);
    read_if(t, "patience", c.train.patience);
  }
  if (j.contains("data")) {
    const json& d = j.at("data");
    reject_unknown_keys(d, {"normalize_inputs", "split_ratios", "split_seed", "reference_cloud"}, "data");
    read_if(d, "normalize_inputs", c.data.normalize_inputs);
    if (d.contains("split_ratios")) {
      auto v = d.at("split_ratios").get<std::vector<double>>();
      if (v.size() != 3) throw ConfigError("data.split_ratios must have three entries");
      c.data.split_ratios = {v[0], v[1], v[2]};
    }
    read_if(d, "split_seed", c.data.split_seed);
    read_if(d, "reference_cloud", c.data.reference_cloud);
  }
  c.train.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "' must look like key.path=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;  // bare word: treat as string
  }
  json* cursor = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("override path '" + path + "' has an empty segment");
    if (dot == std::string::npos) {
      (*cursor)[key] = value;
      break;
    }
    cursor = &(*cursor)[key];
    start = dot + 1;
  }
}

bool same_architecture(const ModelConfig& a, const ModelConfig& b) {
  json ja = to_json(a);
  json jb = to_json(b);
  // Seeds and solver settings do not change the parameter layout.
  for (auto* j : {&ja, &jb}) {
    j->erase("seed");
    j->erase("emd");
  }
  return ja == jb;
}

}  // namespace pshape
