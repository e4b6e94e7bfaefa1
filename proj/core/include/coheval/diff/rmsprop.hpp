#pragma once

#include <cstddef>
#include <vector>

#include "coheval/diff/tape.hpp"

namespace coheval::diff {

// RMSProp with optional global-norm gradient clipping. Accumulators are
// lazily shaped to the parameter set on the first step.
//
// Update per entry:
//   acc   <- decay * acc + (1 - decay) * g^2
//   value <- value - lr * g / sqrt(acc + epsilon)
// Gradients are zeroed after the step.
class RmsProp {
 public:
  struct Options {
    double learning_rate = 0.001;
    double decay = 0.9;
    double epsilon = 1e-6;
    double clip_norm = 10.0;  // <= 0 disables clipping
  };

  explicit RmsProp(Options opts) : opts_(opts) {}

  const Options& options() const { return opts_; }

  // Applies one update over the given parameters. The set (sizes and order)
  // must be stable across calls.
  void step(const std::vector<Parameter*>& params);

 private:
  Options opts_;
  std::vector<Tensor> accumulators_;
};

}  // namespace coheval::diff
