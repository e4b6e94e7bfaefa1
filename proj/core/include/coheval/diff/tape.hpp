#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "coheval/diff/rng.hpp"
#include "coheval/diff/tensor.hpp"

namespace coheval::diff {

// A named trainable tensor together with its accumulated gradient. Gradients
// persist across tapes so that a batch of essays can accumulate before an
// optimizer step; the optimizer zeroes them after applying the update.
class Parameter {
 public:
  Parameter(std::string name, Tensor value)
      : name(std::move(name)),
        value(std::move(value)),
        grad(this->value.shape()) {}

  void zero_grad() { grad.fill(0.0); }

  std::string name;
  Tensor value;
  Tensor grad;
};

// Handle to a node on a Tape.
struct Var {
  std::uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
};

// Reverse-mode tape. Forward calls append nodes in topological order;
// backward(root) seeds d(root)=1 and replays the tape in reverse, adding
// into node gradients and, for leaves bound to a Parameter, into the
// parameter's persistent gradient.
//
// The op set is exactly what the models in this repository need: an LSTM
// cell, dense affine maps, concatenation, sigmoid/tanh, dot products,
// stack-wise mean/max, scalar products, the two losses, and dropout.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void reset();
  std::size_t node_count() const { return nodes_.size(); }

  // ---- leaves ----
  Var constant(Tensor v);
  Var scalar(double v) { return constant(Tensor::scalar(v)); }
  // Binds a parameter; backward accumulates into p.grad. The node reads the
  // parameter value by reference, so p must outlive the tape.
  Var param(Parameter& p);
  // Row lookup into a (rows, dim) parameter table; backward adds into the
  // corresponding gradient row only.
  Var embed(Parameter& table, std::size_t row);

  // ---- elementwise / linear ----
  Var add(Var a, Var b);
  Var sigmoid(Var x);
  Var tanh_act(Var x);
  // y = W x with W of shape (r, c) and x of length c.
  Var matvec(Var w, Var x);
  // y = W[:, :len(x)] x for x shorter than (or equal to) W's column count.
  // Gradient flows only into the used leading columns.
  Var matvec_prefix(Var w, Var x);
  Var concat(const std::vector<Var>& parts);
  Var dot(Var a, Var b);

  // ---- reductions over equally-shaped nodes ----
  Var mean_stack(const std::vector<Var>& xs);
  Var max_stack(const std::vector<Var>& xs);
  // Product of scalar nodes.
  Var product_scalars(const std::vector<Var>& xs);

  // ---- losses / combinations (scalar nodes) ----
  // -[y log x + (1-y) log(1-x)] for a scalar x in (0,1).
  Var bce(Var x, double gold);
  Var squared_error(Var x, double gold);
  Var weighted_sum(double wa, Var a, double wb, Var b);

  // Inverted dropout: in training mode keeps each entry with probability
  // 1-p and scales by 1/(1-p); outside training it is the identity.
  Var dropout(Var x, double p, Rng& rng, bool training);

  // ---- LSTM cell (fused) ----
  // Gate packing order inside the 4*hidden rows: input, forget, output,
  // candidate. Standard formulation with a forget gate and no peepholes:
  //   z = W_x x + W_h h_prev + b
  //   c = sigmoid(z_f) * c_prev + sigmoid(z_i) * tanh(z_g)
  //   h = sigmoid(z_o) * tanh(c)
  struct LstmStep {
    Var h;
    Var c;
  };
  LstmStep lstm_cell(Var x, Var h_prev, Var c_prev, Var w_input,
                     Var w_recurrent, Var bias);

  // ---- execution ----
  void backward(Var root);
  const Tensor& value(Var v) const { return node_value(v.id); }
  const Tensor& grad(Var v) const { return nodes_[v.id].grad; }

 private:
  struct Node {
    Tensor owned_value;
    const Tensor* external_value = nullptr;  // set for param leaves
    Tensor grad;
    Parameter* bound = nullptr;
    std::size_t bound_row_offset = 0;  // for embedding rows
    bool bound_is_row = false;
    std::function<void(Tape&)> backprop;  // empty for leaves
  };

  const Tensor& node_value(std::uint32_t id) const {
    const Node& n = nodes_[id];
    return n.external_value ? *n.external_value : n.owned_value;
  }

  Var push_value(Tensor v) {
    Node n;
    n.owned_value = std::move(v);
    nodes_.push_back(std::move(n));
    return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
  }

  void check(Var v, const char* op) const;

  std::vector<Node> nodes_;
};

}  // namespace coheval::diff
