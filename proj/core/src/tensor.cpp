#include "coheval/diff/tensor.hpp"

#include <cmath>

namespace coheval::diff {

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double Tensor::squared_norm() const {
  double acc = 0.0;
  for (double v : data_) acc += v * v;
  return acc;
}

}  // namespace coheval::diff
