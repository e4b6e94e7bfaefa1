#pragma once

#include <stdexcept>
#include <vector>

#include "coheval/diff/tape.hpp"

namespace coheval::diff {

// Elementwise arithmetic mean over a non-empty sequence of equally-shaped
// states; each input receives 1/n of the upstream gradient.
inline Var mean_over_time(Tape& tape, const std::vector<Var>& states) {
  if (states.empty()) {
    throw std::invalid_argument("mean_over_time: empty sequence");
  }
  return tape.mean_stack(states);
}

// sigmoid(h . v + b) as a scalar in (0,1).
inline Var affine_sigmoid(Tape& tape, Var h, Var v, Var bias) {
  return tape.sigmoid(tape.add(tape.dot(h, v), bias));
}

inline Var affine_sigmoid(Tape& tape, Var h, Var v, double bias = 0.0) {
  return affine_sigmoid(tape, h, v, tape.scalar(bias));
}

}  // namespace coheval::diff
