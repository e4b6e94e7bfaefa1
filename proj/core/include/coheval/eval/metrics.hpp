#pragma once

#include <map>
#include <string>
#include <vector>

namespace coheval::eval {

// Integer rating pairs within a closed score range.
struct RatingPairSet {
  std::vector<int> gold;
  std::vector<int> predicted;
  int min_score = 0;
  int max_score = 0;
};

// Quadratic Weighted Kappa:
//   1 - sum(w . O) / sum(w . E),  w_ij = (i-j)^2 / (K-1)^2
// with O the observed count matrix and E the outer product of the marginal
// histograms rescaled to O's total. If both raters are constant and equal
// (zero denominator with a purely diagonal O) the agreement is perfect and
// the value is 1.0; a zero denominator with off-diagonal mass is an error.
double qwk(const RatingPairSet& pairs);

// Rounds half away from zero and checks range, for callers holding
// real-valued predictions.
int discretize_rating(double value, int min_score, int max_score);

// Scores for a pool of original essays and their permuted counterparts,
// used by the two ranking metrics.
struct RankedPool {
  std::map<std::string, double> originals;  // id -> score
  struct PermutationScore {
    std::string origin_id;
    double score;
  };
  std::map<std::string, PermutationScore> permutations;  // id -> entry
};

// Fraction of (original, own permutation) pairs where the original strictly
// outscores the permutation. Ties count as incorrect. Pairs whose origin is
// missing from the pool are skipped; an empty pair set is an error.
double pra(const RankedPool& pool);

// Same but over every (original, any permutation) cross pair in the pool.
double tpra(const RankedPool& pool);

// Per-prompt metric values plus macro averages, serializable to the report
// JSON emitted by the evaluation command.
struct MetricReport {
  struct PromptMetrics {
    double qwk = 0.0;
    double pra = 0.0;
    double tpra = 0.0;
    bool has_qwk = false;
    bool has_ranking = false;
  };
  std::map<int, PromptMetrics> per_prompt;
  PromptMetrics macro;

  void finalize();  // fills macro averages over prompts that carry a value
};

}  // namespace coheval::eval
