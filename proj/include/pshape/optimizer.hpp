#pragma once

#include <vector>

#include "pshape/tape.hpp"

namespace pshape {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
};

// Adaptive-moment optimizer with bias correction. Deterministic: the update
// is a pure function of (parameters, gradients, state).
class AdamOptimizer {
 public:
  AdamOptimizer(const std::vector<Parameter*>& params, const AdamConfig& config);

  // Applies one update using the gradients currently stored in the
  // parameters. Throws NumericError (naming the parameter) on non-finite
  // gradients; the step is then not applied.
  void step();

  int steps_taken() const { return step_; }

 private:
  std::vector<Parameter*> params_;
  AdamConfig config_;
  std::vector<Tensor2> m_, v_;
  int step_ = 0;
};

}  // namespace pshape
