#pragma once

#include <functional>
#include <vector>

#include "coheval/diff/tape.hpp"

namespace coheval::diff {

// Verifies analytic gradients against central finite differences.
//
// `forward` must build a scalar computation on the given tape from the
// current parameter values, deterministically (dropout off). Every entry of
// every parameter is perturbed by +/- step and the analytic gradient is
// compared to the central difference. Returns the maximum of
//   |analytic - numeric| / max(1, |analytic|, |numeric|)
// over all entries. Throws if any analytic gradient is non-finite.
double gradient_check(const std::function<Var(Tape&)>& forward,
                      const std::vector<Parameter*>& params,
                      double step = 1e-5);

}  // namespace coheval::diff
