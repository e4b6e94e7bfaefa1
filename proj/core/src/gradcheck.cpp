#include "coheval/diff/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace coheval::diff {

namespace {

double evaluate(const std::function<Var(Tape&)>& forward) {
  Tape tape;
  Var root = forward(tape);
  return tape.value(root).item();
}

}  // namespace

double gradient_check(const std::function<Var(Tape&)>& forward,
                      const std::vector<Parameter*>& params, double step) {
  for (Parameter* p : params) p->zero_grad();

  {
    Tape tape;
    Var root = forward(tape);
    tape.backward(root);
  }

  double worst = 0.0;
  for (Parameter* p : params) {
    if (!p->grad.all_finite()) {
      throw std::runtime_error("gradient_check: non-finite gradient for " +
                               p->name);
    }
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + step;
      const double f_plus = evaluate(forward);
      p->value[i] = saved - step;
      const double f_minus = evaluate(forward);
      p->value[i] = saved;

      const double numeric = (f_plus - f_minus) / (2.0 * step);
      const double analytic = p->grad[i];
      const double scale =
          std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
      worst = std::max(worst, std::fabs(analytic - numeric) / scale);
    }
    p->zero_grad();
  }
  return worst;
}

}  // namespace coheval::diff
