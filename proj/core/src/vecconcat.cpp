#include "coheval/models/vecconcat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coheval::models {

FeatureVector concat_features(const text::Essay& essay, AesModel& aes,
                              LcModel& lc) {
  FeatureVector f;
  f.values = aes.essay_repr_values(essay);
  const auto clique = lc.clique_vector_max(essay);
  f.values.insert(f.values.end(), clique.begin(), clique.end());
  return f;
}

double rbf_kernel(const std::vector<double>& x, const std::vector<double>& y,
                  double gamma) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("rbf_kernel: length mismatch");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sq += d * d;
  }
  return std::exp(-gamma * sq);
}

std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  if (a.size() != n * n) {
    throw std::invalid_argument("solve_spd: dimension mismatch");
  }
  // In-place Cholesky: A = L L^T, L stored in the lower triangle.
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
    if (diag <= 0.0) {
      throw std::runtime_error("solve_spd: matrix is not positive definite");
    }
    const double ljj = std::sqrt(diag);
    a[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = v / ljj;
    }
  }
  // Forward substitution L z = b.
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= a[i * n + k] * z[k];
    z[i] = v / a[i * n + i];
  }
  // Back substitution L^T x = z.
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double v = z[i];
    for (std::size_t k = i + 1; k < n; ++k) v -= a[k * n + i] * x[k];
    x[i] = v / a[i * n + i];
  }
  return x;
}

KernelRidgeModel::KernelRidgeModel(std::vector<FeatureVector> features,
                                   std::vector<double> dual_coefficients,
                                   double alpha, double gamma)
    : features_(std::move(features)),
      dual_(std::move(dual_coefficients)),
      alpha_(alpha),
      gamma_(gamma) {
  if (features_.size() != dual_.size()) {
    throw std::invalid_argument("KernelRidgeModel: coefficient count");
  }
}

KernelRidgeModel KernelRidgeModel::fit(std::vector<FeatureVector> features,
                                       const std::vector<double>& targets,
                                       double alpha, double gamma) {
  const std::size_t n = features.size();
  if (n == 0 || targets.size() != n) {
    throw std::invalid_argument("KernelRidgeModel::fit: bad training set");
  }
  std::vector<double> gram(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double k = rbf_kernel(features[i].values, features[j].values,
                                  gamma);
      gram[i * n + j] = k;
      gram[j * n + i] = k;
    }
    gram[i * n + i] += alpha;
  }
  auto dual = solve_spd(std::move(gram), targets);
  KernelRidgeModel model;
  model.features_ = std::move(features);
  model.dual_ = std::move(dual);
  model.alpha_ = alpha;
  model.gamma_ = gamma;
  return model;
}

double KernelRidgeModel::predict_unclipped(const FeatureVector& x) const {
  if (features_.empty()) {
    throw std::logic_error("KernelRidgeModel::predict: model not fitted");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    acc += dual_[i] * rbf_kernel(features_[i].values, x.values, gamma_);
  }
  return acc;
}

double KernelRidgeModel::predict(const FeatureVector& x) const {
  return std::clamp(predict_unclipped(x), 0.0, 1.0);
}

}  // namespace coheval::models
