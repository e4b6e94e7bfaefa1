#include "coheval/eval/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace coheval::eval {

int discretize_rating(double value, int min_score, int max_score) {
  const double rounded =
      value >= 0.0 ? std::floor(value + 0.5) : std::ceil(value - 0.5);
  const int r = static_cast<int>(rounded);
  if (r < min_score || r > max_score) {
    throw std::out_of_range("discretize_rating: " + std::to_string(value) +
                            " outside [" + std::to_string(min_score) + ", " +
                            std::to_string(max_score) + "]");
  }
  return r;
}

double qwk(const RatingPairSet& pairs) {
  const std::size_t n = pairs.gold.size();
  if (n == 0 || pairs.predicted.size() != n) {
    throw std::invalid_argument("qwk: rating lists empty or unequal");
  }
  if (pairs.min_score > pairs.max_score) {
    throw std::invalid_argument("qwk: invalid score range");
  }
  const int k = pairs.max_score - pairs.min_score + 1;

  std::vector<std::vector<double>> observed(k, std::vector<double>(k, 0.0));
  std::vector<double> gold_hist(k, 0.0), pred_hist(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int g = pairs.gold[i] - pairs.min_score;
    const int p = pairs.predicted[i] - pairs.min_score;
    if (g < 0 || g >= k || p < 0 || p >= k) {
      throw std::out_of_range("qwk: rating outside score range");
    }
    observed[g][p] += 1.0;
    gold_hist[g] += 1.0;
    pred_hist[p] += 1.0;
  }

  const double denom_scale = k > 1 ? static_cast<double>(k - 1) : 1.0;
  auto weight = [denom_scale](int i, int j) {
    const double d = static_cast<double>(i - j) / denom_scale;
    return d * d;
  };

  double num = 0.0, den = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double w = weight(i, j);
      num += w * observed[i][j];
      den += w * gold_hist[i] * pred_hist[j] / static_cast<double>(n);
    }
  }
  if (den == 0.0) {
    // Both marginals are point masses on the same value; observed agreement
    // is then purely diagonal and the agreement is perfect.
    if (num == 0.0) return 1.0;
    throw std::domain_error("qwk: degenerate expected matrix");
  }
  return 1.0 - num / den;
}

namespace {

double ranking_accuracy(const RankedPool& pool, bool cross_pairs) {
  std::size_t total = 0, correct = 0;
  for (const auto& [perm_id, entry] : pool.permutations) {
    if (cross_pairs) {
      for (const auto& [orig_id, orig_score] : pool.originals) {
        ++total;
        if (orig_score > entry.score) ++correct;
      }
    } else {
      auto it = pool.originals.find(entry.origin_id);
      if (it == pool.originals.end()) continue;
      ++total;
      if (it->second > entry.score) ++correct;
    }
  }
  if (total == 0) {
    throw std::invalid_argument("ranking_accuracy: no comparable pairs");
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

double pra(const RankedPool& pool) { return ranking_accuracy(pool, false); }

double tpra(const RankedPool& pool) { return ranking_accuracy(pool, true); }

void MetricReport::finalize() {
  double qwk_sum = 0.0, pra_sum = 0.0, tpra_sum = 0.0;
  std::size_t qwk_n = 0, rank_n = 0;
  for (const auto& [prompt, m] : per_prompt) {
    if (m.has_qwk) {
      qwk_sum += m.qwk;
      ++qwk_n;
    }
    if (m.has_ranking) {
      pra_sum += m.pra;
      tpra_sum += m.tpra;
      ++rank_n;
    }
  }
  macro = PromptMetrics{};
  if (qwk_n > 0) {
    macro.qwk = qwk_sum / static_cast<double>(qwk_n);
    macro.has_qwk = true;
  }
  if (rank_n > 0) {
    macro.pra = pra_sum / static_cast<double>(rank_n);
    macro.tpra = tpra_sum / static_cast<double>(rank_n);
    macro.has_ranking = true;
  }
}

}  // namespace coheval::eval
