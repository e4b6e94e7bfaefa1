#include "coheval/diff/lstm.hpp"

namespace coheval::diff {

namespace {

Tensor uniform_matrix(std::size_t rows, std::size_t cols, Rng& rng,
                      double scale) {
  Tensor t({rows, cols});
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = rng.uniform_symmetric(scale);
  }
  return t;
}

}  // namespace

LstmParams::LstmParams(const std::string& prefix, std::size_t input_dim,
                       std::size_t hidden_dim, Rng& rng, double init_scale)
    : input_dim(input_dim),
      hidden_dim(hidden_dim),
      w_input(prefix + ".w_input",
              uniform_matrix(4 * hidden_dim, input_dim, rng, init_scale)),
      w_recurrent(prefix + ".w_recurrent",
                  uniform_matrix(4 * hidden_dim, hidden_dim, rng, init_scale)),
      bias(prefix + ".bias", Tensor({4 * hidden_dim})) {}

std::vector<Parameter*> LstmParams::parameters() {
  return {&w_input, &w_recurrent, &bias};
}

LstmCell::LstmCell(Tape& tape, LstmParams& params)
    : tape_(tape),
      hidden_dim_(params.hidden_dim),
      w_input_(tape.param(params.w_input)),
      w_recurrent_(tape.param(params.w_recurrent)),
      bias_(tape.param(params.bias)) {
  reset_state();
}

Var LstmCell::step(Var x) {
  auto out = tape_.lstm_cell(x, h_, c_, w_input_, w_recurrent_, bias_);
  h_ = out.h;
  c_ = out.c;
  return h_;
}

void LstmCell::reset_state() {
  h_ = tape_.constant(Tensor({hidden_dim_}));
  c_ = tape_.constant(Tensor({hidden_dim_}));
}

Tape::LstmStep lstm_step(Tape& tape, Var x, Var h_prev, Var c_prev,
                         LstmParams& params) {
  return tape.lstm_cell(x, h_prev, c_prev, tape.param(params.w_input),
                        tape.param(params.w_recurrent),
                        tape.param(params.bias));
}

}  // namespace coheval::diff
