#pragma once

#include <vector>

#include "coheval/models/aes.hpp"
#include "coheval/models/lc.hpp"

namespace coheval::models {

// [essay representation ; max-aggregated clique representation], extracted
// from two frozen checkpoints.
struct FeatureVector {
  std::vector<double> values;  // length d_lstm + d_cnn
};

FeatureVector concat_features(const text::Essay& essay, AesModel& aes,
                              LcModel& lc);

// exp(-gamma * ||x - y||^2); symmetric, k(x, x) = 1.
double rbf_kernel(const std::vector<double>& x, const std::vector<double>& y,
                  double gamma);

// Dual-form kernel ridge regression with an RBF kernel. Fitting solves
// (K + alpha I) c = y with a dense Cholesky factorization; the system is
// symmetric positive definite for alpha > 0.
class KernelRidgeModel {
 public:
  KernelRidgeModel() = default;
  KernelRidgeModel(std::vector<FeatureVector> features,
                   std::vector<double> dual_coefficients, double alpha,
                   double gamma);

  static KernelRidgeModel fit(std::vector<FeatureVector> features,
                              const std::vector<double>& targets_scaled,
                              double alpha = 0.1, double gamma = 0.1);

  // sum_i c_i k(x_i, x), clipped to [0,1].
  double predict(const FeatureVector& x) const;
  double predict_unclipped(const FeatureVector& x) const;

  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }
  const std::vector<FeatureVector>& training_features() const {
    return features_;
  }
  const std::vector<double>& dual_coefficients() const { return dual_; }

 private:
  std::vector<FeatureVector> features_;
  std::vector<double> dual_;
  double alpha_ = 0.1;
  double gamma_ = 0.1;
};

// Solves A x = b for a symmetric positive definite A (row-major, n x n).
// Exposed for reuse; throws if the factorization breaks down.
std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b);

}  // namespace coheval::models
