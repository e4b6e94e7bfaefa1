#include "coheval/diff/rmsprop.hpp"

#include <cmath>
#include <stdexcept>

namespace coheval::diff {

void RmsProp::step(const std::vector<Parameter*>& params) {
  if (accumulators_.empty()) {
    accumulators_.reserve(params.size());
    for (const Parameter* p : params) {
      accumulators_.emplace_back(p->value.shape());
    }
  }
  if (accumulators_.size() != params.size()) {
    throw std::logic_error("RmsProp::step: parameter set changed size");
  }

  double clip_scale = 1.0;
  if (opts_.clip_norm > 0.0) {
    double sq = 0.0;
    for (const Parameter* p : params) sq += p->grad.squared_norm();
    const double norm = std::sqrt(sq);
    if (norm > opts_.clip_norm) clip_scale = opts_.clip_norm / norm;
  }

  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    Tensor& acc = accumulators_[k];
    if (!acc.same_shape(p.value)) {
      throw std::logic_error("RmsProp::step: parameter shape changed");
    }
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i] * clip_scale;
      acc[i] = opts_.decay * acc[i] + (1.0 - opts_.decay) * g * g;
      p.value[i] -= opts_.learning_rate * g / std::sqrt(acc[i] + opts_.epsilon);
    }
    p.zero_grad();
  }
}

}  // namespace coheval::diff
