#include "pshape/optimizer.hpp"

#include <cmath>

#include "pshape/errors.hpp"

namespace pshape {

AdamOptimizer::AdamOptimizer(const std::vector<Parameter*>& params, const AdamConfig& config)
    : params_(params), config_(config) {
  if (config_.learning_rate <= 0) throw ConfigError("learning_rate must be > 0");
  if (config_.beta1 <= 0 || config_.beta1 >= 1 || config_.beta2 <= 0 || config_.beta2 >= 1) {
    throw ConfigError("adam betas must lie in (0, 1)");
  }
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto* p : params_) {
    m_.emplace_back(p->value.rows(), p->value.cols());
    v_.emplace_back(p->value.rows(), p->value.cols());
  }
}

void AdamOptimizer::step() {
  for (const auto* p : params_) {
    if (!all_finite(p->grad)) {
      throw NumericError("non-finite gradient for parameter '" + p->name + "'; step aborted");
    }
  }
  ++step_;
  const double bc1 = 1.0 - std::pow(config_.beta1, step_);
  const double bc2 = 1.0 - std::pow(config_.beta2, step_);
  for (std::size_t idx = 0; idx < params_.size(); ++idx) {
    Parameter& p = *params_[idx];
    double* value = p.value.data();
    const double* grad = p.grad.data();
    double* m = m_[idx].data();
    double* v = v_[idx].data();
    const Index n = p.value.size();
    for (Index i = 0; i < n; ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * grad[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      value[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.eps_hat);
    }
  }
}

}  // namespace pshape
