#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace coheval::harness {

struct GradCheckCase {
  std::string name;
  double max_rel_error = 0.0;
};

// Verifies analytic gradients of the coherence, scoring and joint
// computations against central finite differences on `configs` random small
// configurations each (dropout off). Every reported error should sit well
// below 1e-4.
std::vector<GradCheckCase> run_gradcheck_suite(std::size_t configs,
                                               std::uint64_t seed);

}  // namespace coheval::harness
