#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "coheval/diff/rng.hpp"
#include "coheval/diff/tape.hpp"

namespace coheval::diff {

// Weights for one LSTM layer. Rows of the two weight matrices are packed in
// gate order [input, forget, output, candidate], each block hidden_dim rows.
// Weights are initialized uniformly in [-init_scale, init_scale); biases
// start at zero.
struct LstmParams {
  LstmParams(const std::string& prefix, std::size_t input_dim,
             std::size_t hidden_dim, Rng& rng, double init_scale);

  std::size_t input_dim;
  std::size_t hidden_dim;
  Parameter w_input;      // (4*hidden_dim, input_dim)
  Parameter w_recurrent;  // (4*hidden_dim, hidden_dim)
  Parameter bias;         // (4*hidden_dim)

  std::vector<Parameter*> parameters();
};

// Bindings of an LstmParams onto a tape, plus running state. Construct once
// per tape, then call step() per token.
class LstmCell {
 public:
  LstmCell(Tape& tape, LstmParams& params);

  // Consumes one input vector, returns the new hidden state. State starts at
  // zero and can be reset between sentences with reset_state().
  Var step(Var x);
  void reset_state();

  Var hidden() const { return h_; }

 private:
  Tape& tape_;
  std::size_t hidden_dim_;
  Var w_input_;
  Var w_recurrent_;
  Var bias_;
  Var h_;
  Var c_;
};

// Single functional step, used by the step-chaining oracles in tests and by
// callers that manage state explicitly.
Tape::LstmStep lstm_step(Tape& tape, Var x, Var h_prev, Var c_prev,
                         LstmParams& params);

}  // namespace coheval::diff
