#include "coheval/diff/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coheval::diff {

namespace {

// Sigmoid clamped away from exactly 0 and 1 so that downstream logs stay
// finite even for extreme pre-activations.
double stable_sigmoid(double z) {
  double s;
  if (z >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    s = e / (1.0 + e);
  }
  constexpr double lo = 1e-300;
  constexpr double hi = 1.0 - 1e-16;
  return std::min(hi, std::max(lo, s));
}

}  // namespace

void Tape::reset() { nodes_.clear(); }

void Tape::check(Var v, const char* op) const {
  if (!v.valid() || v.id >= nodes_.size()) {
    throw std::logic_error(std::string("Tape::") + op + ": invalid node");
  }
}

Var Tape::constant(Tensor v) { return push_value(std::move(v)); }

Var Tape::param(Parameter& p) {
  Node n;
  n.external_value = &p.value;
  n.bound = &p;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::embed(Parameter& table, std::size_t row) {
  if (table.value.rank() != 2) {
    throw std::invalid_argument("Tape::embed: table must be a matrix");
  }
  const std::size_t dim = table.value.cols();
  if (row >= table.value.rows()) {
    throw std::out_of_range("Tape::embed: row " + std::to_string(row) +
                            " out of range");
  }
  Tensor v({dim});
  const double* src = table.value.data().data() + row * dim;
  std::copy(src, src + dim, v.data().begin());
  Node n;
  n.owned_value = std::move(v);
  n.bound = &table;
  n.bound_is_row = true;
  n.bound_row_offset = row * dim;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::add(Var a, Var b) {
  check(a, "add");
  check(b, "add");
  const Tensor& ta = node_value(a.id);
  const Tensor& tb = node_value(b.id);
  if (!ta.same_shape(tb)) {
    throw std::invalid_argument("Tape::add: shape mismatch");
  }
  Tensor out(ta.shape());
  for (std::size_t i = 0; i < ta.size(); ++i) out[i] = ta[i] + tb[i];
  Var y = push_value(std::move(out));
  nodes_[y.id].backprop = [a, b, y](Tape& t) {
    const Tensor& g = t.nodes_[y.id].grad;
    Tensor& ga = t.nodes_[a.id].grad;
    Tensor& gb = t.nodes_[b.id].grad;
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i];
      gb[i] += g[i];
    }
  };
  return y;
}

Var Tape::sigmoid(Var x) {
  check(x, "sigmoid");
  const Tensor& tx = node_value(x.id);
  Tensor out(tx.shape());
  for (std::size_t i = 0; i < tx.size(); ++i) out[i] = stable_sigmoid(tx[i]);
  Var y = push_value(std::move(out));
  nodes_[y.id].backprop = [x, y](Tape& t) {
    const Tensor& g = t.nodes_[y.id].grad;
    const Tensor& s = t.node_value(y.id);
    Tensor& gx = t.nodes_[x.id].grad;
    for (std::size_t i = 0; i < g.size(); ++i) {
      gx[i] += g[i] * s[i] * (1.0 - s[i]);
    }
  };
  return y;
}

Var Tape::tanh_act(Var x) {
  check(x, "tanh");
  const Tensor& tx = node_value(x.id);
  Tensor out(tx.shape());
  for (std::size_t i = 0; i < tx.size(); ++i) out[i] = std::tanh(tx[i]);
  Var y = push_value(std::move(out));
  nodes_[y.id].backprop = [x, y](Tape& t) {
    const Tensor& g = t.nodes_[y.id].grad;
    const Tensor& v = t.node_value(y.id);
    Tensor& gx = t.nodes_[x.id].grad;
    for (std::size_t i = 0; i < g.size(); ++i) {
      gx[i] += g[i] * (1.0 - v[i] * v[i]);
    }
  };
  return y;
}

Var Tape::matvec(Var w, Var x) {
  check(w, "matvec");
  check(x, "matvec");
  const Tensor& tw = node_value(w.id);
  const Tensor& tx = node_value(x.id);
  if (tw.rank() != 2 || tx.rank() != 1 || tw.cols() != tx.size()) {
    throw std::invalid_argument("Tape::matvec: shape mismatch");
  }
  return matvec_prefix(w, x);
}

Var Tape::matvec_prefix(Var w, Var x) {
  check(w, "matvec_prefix");
  check(x, "matvec_prefix");
  const Tensor& tw = node_value(w.id);
  const Tensor& tx = node_value(x.id);
  if (tw.rank() != 2 || tx.rank() != 1 || tx.size() > tw.cols()) {
    throw std::invalid_argument("Tape::matvec_prefix: shape mismatch");
  }
  const std::size_t rows = tw.rows();
  const std::size_t cols = tw.cols();
  const std::size_t used = tx.size();
  Tensor out({rows});
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = tw.data().data() + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < used; ++c) acc += wr[c] * tx[c];
    out[r] = acc;
  }
  Var y = push_value(std::move(out));
  nodes_[y.id].backprop = [w, x, y, rows, cols, used](Tape& t) {
    const Tensor& g = t.nodes_[y.id].grad;
    const Tensor& tw2 = t.node_value(w.id);
    const Tensor& tx2 = t.node_value(x.id);
    Tensor& gw = t.nodes_[w.id].grad;
    Tensor& gx = t.nodes_[x.id].grad;
    for (std::size_t r = 0; r < rows; ++r) {
      const double gr = g[r];
      if (gr == 0.0) continue;
      const double* wr = tw2.data().data() + r * cols;
      double* gwr = gw.data().data() + r * cols;
      for (std::size_t c = 0; c < used; ++c) {
        gwr[c] += gr * tx2[c];
        gx[c] += gr * wr[c];
      }
    }
  };
  return y;
}

Var Tape::concat(const std::vector<Var>& parts) {
  if (parts.empty()) {
    throw std::invalid_argument("Tape::concat: empty input");
  }
  std::size_t total = 0;
  for (Var p : parts) {
    check(p, "concat");
    total += node_value(p.id).size();
  }
  Tensor out({total});
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor& tp = node_value(p.id);
    std::copy(tp.data().begin(), tp.data().end(), out.data().begin() + off);
    off += tp.size();
  }
  Var y = push_value(std::move(out));
  std::vector<Var> held = parts;
  nodes_[y.id].backprop = [held, y](Tape& t) {
    const Tensor& g = t.nodes_[y.id].grad;
    std::size_t off2 = 0;
    for (Var p : held) {
      Tensor& gp = t.nodes_[p.id].grad;
      for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[off2 + i];
      off2 += gp.size();
    }
  };
  return y;
}

Var Tape::dot(Var a, Var b) {
  check(a, "dot");
  check(b, "dot");
  const Tensor& ta = node_value(a.id);
  const Tensor& tb = node_value(b.id);
  if (ta.size() != tb.size()) {
    throw std::invalid_argument("Tape::dot: length mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < ta.size(); ++i) acc += ta[i] * tb[i];
  Var y = push_value(Tensor::scalar(acc));
  nodes_[y.id].backprop = [a, b, y](Tape& t) {
    const double g = t.nodes_[y.id].grad[0];
    const Tensor& ta2 = t.node_value(a.id);
    const Tensor& tb2 = t.node_value(b.id);
    Tensor& ga = t.nodes_[a.id].grad;
    Tensor& gb = t.nodes_[b.id].grad;
    for (std::size_t i = 0; i < ta2.size(); ++i) {
      ga[i] += g * tb2[i];
      gb[i] += g * ta2[i];
    }
  };
  return y;
}

Var Tape::mean_stack(const std::vector<Var>& xs) {
  if (xs.empty()) {
    throw std::invalid_argument("Tape::mean_stack: empty input");
  }
  const Tensor& first = node_value(xs[0].id);
  Tensor out(first.shape());
  for (Var x : xs) {
    check(x, "mean_stack");
    const Tensor& tx = node_value(x.id);
    if (!tx.same_shape(first)) {
      throw std::invalid_argument("Tape::mean_stack: shape mismatch");
    }
    for (std::size_t i = 0; i < tx.size(); ++i) out[i] += tx[i];
  }
  const double inv = 1.0 / static_cast<double>(xs.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= inv;
  Var y = push_value(std::move(out));
  std::vector<Var> held = xs;
  nodes_[y.id].backprop = [held, y, inv](Tape& t) {
    const Tensor& g = t.nodes_[y.id].grad;
    for (Var x : held) {
      Tensor& gx = t.nodes_[x.id].grad;
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i] * inv;
    }
  };
  return y;
}

Var Tape::max_stack(const std::vector<Var>& xs) {
  if (xs.empty()) {
    throw std::invalid_argument("Tape::max_stack: empty input");
  }
  const Tensor& first = node_value(xs[0].id);
  Tensor out = first;
  std::vector<std::uint32_t> argmax(first.size(), xs[0].id);
  for (std::size_t k = 1; k < xs.size(); ++k) {
    check(xs[k], "max_stack");
    const Tensor& tx = node_value(xs[k].id);
    if (!tx.same_shape(first)) {
      throw std::invalid_argument("Tape::max_stack: shape mismatch");
    }
    for (std::size_t i = 0; i < tx.size(); ++i) {
      if (tx[i] > out[i]) {
        out[i] = tx[i];
        argmax[i] = xs[k].id;
      }
    }
  }
  Var y = push_value(std::move(out));
  nodes_[y.id].backprop = [argmax, y](Tape& t) {
    // Subgradient: route each entry's gradient to the first maximizer.
    const Tensor& g = t.nodes_[y.id].grad;
    for (std::size_t i = 0; i < g.size(); ++i) {
      t.nodes_[argmax[i]].grad[i] += g[i];
    }
  };
  return y;
}

Var Tape::product_scalars(const std::vector<Var>& xs) {
  if (xs.empty()) {
    throw std::invalid_argument("Tape::product_scalars: empty input");
  }
  double prod = 1.0;
  for (Var x : xs) {
    check(x, "product_scalars");
    prod *= node_value(x.id).item();
  }
  Var y = push_value(Tensor::scalar(prod));
  std::vector<Var> held = xs;
  nodes_[y.id].backprop = [held, y](Tape& t) {
    const double g = t.nodes_[y.id].grad[0];
    for (std::size_t k = 0; k < held.size(); ++k) {
      double rest = 1.0;
      for (std::size_t j = 0; j < held.size(); ++j) {
        if (j != k) rest *= t.node_value(held[j].id).item();
      }
      t.nodes_[held[k].id].grad[0] += g * rest;
    }
  };
  return y;
}

Var Tape::bce(Var x, double gold) {
  check(x, "bce");
  const double p = node_value(x.id).item();
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("Tape::bce: prediction outside (0,1)");
  }
  if (gold < 0.0 || gold > 1.0) {
    throw std::invalid_argument("Tape::bce: gold outside [0,1]");
  }
  const double loss = -(gold * std::log(p) + (1.0 - gold) * std::log(1.0 - p));
  Var y = push_value(Tensor::scalar(loss));
  nodes_[y.id].backprop = [x, y, gold](Tape& t) {
    const double g = t.nodes_[y.id].grad[0];
    const double p2 = t.node_value(x.id).item();
    t.nodes_[x.id].grad[0] += g * (-gold / p2 + (1.0 - gold) / (1.0 - p2));
  };
  return y;
}

Var Tape::squared_error(Var x, double gold) {
  check(x, "squared_error");
  const double p = node_value(x.id).item();
  const double d = p - gold;
  Var y = push_value(Tensor::scalar(d * d));
  nodes_[y.id].backprop = [x, y, gold](Tape& t) {
    const double g = t.nodes_[y.id].grad[0];
    const double p2 = t.node_value(x.id).item();
    t.nodes_[x.id].grad[0] += g * 2.0 * (p2 - gold);
  };
  return y;
}

Var Tape::weighted_sum(double wa, Var a, double wb, Var b) {
  check(a, "weighted_sum");
  check(b, "weighted_sum");
  const double va = node_value(a.id).item();
  const double vb = node_value(b.id).item();
  Var y = push_value(Tensor::scalar(wa * va + wb * vb));
  nodes_[y.id].backprop = [a, b, y, wa, wb](Tape& t) {
    const double g = t.nodes_[y.id].grad[0];
    t.nodes_[a.id].grad[0] += g * wa;
    t.nodes_[b.id].grad[0] += g * wb;
  };
  return y;
}

Var Tape::dropout(Var x, double p, Rng& rng, bool training) {
  check(x, "dropout");
  if (p < 0.0 || p >= 1.0) {
    throw std::invalid_argument("Tape::dropout: p must be in [0,1)");
  }
  if (!training || p == 0.0) return x;
  const Tensor& tx = node_value(x.id);
  const double scale = 1.0 / (1.0 - p);
  std::vector<double> mask(tx.size());
  Tensor out(tx.shape());
  for (std::size_t i = 0; i < tx.size(); ++i) {
    mask[i] = rng.uniform01() < p ? 0.0 : scale;
    out[i] = tx[i] * mask[i];
  }
  Var y = push_value(std::move(out));
  nodes_[y.id].backprop = [x, y, mask = std::move(mask)](Tape& t) {
    const Tensor& g = t.nodes_[y.id].grad;
    Tensor& gx = t.nodes_[x.id].grad;
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
  };
  return y;
}

Tape::LstmStep Tape::lstm_cell(Var x, Var h_prev, Var c_prev, Var w_input,
                               Var w_recurrent, Var bias) {
  check(x, "lstm_cell");
  check(h_prev, "lstm_cell");
  check(c_prev, "lstm_cell");
  check(w_input, "lstm_cell");
  check(w_recurrent, "lstm_cell");
  check(bias, "lstm_cell");

  const Tensor& tx = node_value(x.id);
  const Tensor& th = node_value(h_prev.id);
  const Tensor& tc = node_value(c_prev.id);
  const Tensor& wx = node_value(w_input.id);
  const Tensor& wh = node_value(w_recurrent.id);
  const Tensor& tb = node_value(bias.id);

  const std::size_t in_dim = tx.size();
  const std::size_t hid = th.size();
  if (wx.rank() != 2 || wh.rank() != 2 || wx.rows() != 4 * hid ||
      wx.cols() != in_dim || wh.rows() != 4 * hid || wh.cols() != hid ||
      tb.size() != 4 * hid || tc.size() != hid) {
    throw std::invalid_argument("Tape::lstm_cell: shape mismatch");
  }

  // z = W_x x + W_h h_prev + b, gate blocks [input, forget, output, cand].
  std::vector<double> z(4 * hid);
  for (std::size_t r = 0; r < 4 * hid; ++r) {
    double acc = tb[r];
    const double* wxr = wx.data().data() + r * in_dim;
    for (std::size_t c = 0; c < in_dim; ++c) acc += wxr[c] * tx[c];
    const double* whr = wh.data().data() + r * hid;
    for (std::size_t c = 0; c < hid; ++c) acc += whr[c] * th[c];
    z[r] = acc;
  }

  std::vector<double> gi(hid), gf(hid), go(hid), gg(hid), tanh_c(hid);
  Tensor c_new({hid});
  Tensor h_new({hid});
  for (std::size_t u = 0; u < hid; ++u) {
    gi[u] = stable_sigmoid(z[u]);
    gf[u] = stable_sigmoid(z[hid + u]);
    go[u] = stable_sigmoid(z[2 * hid + u]);
    gg[u] = std::tanh(z[3 * hid + u]);
    c_new[u] = gf[u] * tc[u] + gi[u] * gg[u];
    tanh_c[u] = std::tanh(c_new[u]);
    h_new[u] = go[u] * tanh_c[u];
  }

  Var c_node = push_value(std::move(c_new));
  Var h_node = push_value(std::move(h_new));

  // The h node owns the joint backward for both outputs; the c node only
  // collects incoming gradient. The h node is emitted after c, so it runs
  // first in the reverse sweep and can fold c's upstream gradient in.
  nodes_[h_node.id].backprop = [x, h_prev, c_prev, w_input, w_recurrent, bias,
                                c_node, h_node, in_dim, hid,
                                gi = std::move(gi), gf = std::move(gf),
                                go = std::move(go), gg = std::move(gg),
                                tanh_c = std::move(tanh_c)](Tape& t) {
    const Tensor& dh = t.nodes_[h_node.id].grad;
    const Tensor& dc_up = t.nodes_[c_node.id].grad;
    const Tensor& tx2 = t.node_value(x.id);
    const Tensor& th2 = t.node_value(h_prev.id);
    const Tensor& tc2 = t.node_value(c_prev.id);
    const Tensor& wx2 = t.node_value(w_input.id);
    const Tensor& wh2 = t.node_value(w_recurrent.id);

    std::vector<double> dz(4 * hid);
    Tensor& gc_prev = t.nodes_[c_prev.id].grad;
    for (std::size_t u = 0; u < hid; ++u) {
      const double do_ = dh[u] * tanh_c[u];
      const double dc = dh[u] * go[u] * (1.0 - tanh_c[u] * tanh_c[u]) +
                        dc_up[u];
      const double di = dc * gg[u];
      const double df = dc * tc2[u];
      const double dg = dc * gi[u];
      gc_prev[u] += dc * gf[u];
      dz[u] = di * gi[u] * (1.0 - gi[u]);
      dz[hid + u] = df * gf[u] * (1.0 - gf[u]);
      dz[2 * hid + u] = do_ * go[u] * (1.0 - go[u]);
      dz[3 * hid + u] = dg * (1.0 - gg[u] * gg[u]);
    }

    Tensor& gwx = t.nodes_[w_input.id].grad;
    Tensor& gwh = t.nodes_[w_recurrent.id].grad;
    Tensor& gb = t.nodes_[bias.id].grad;
    Tensor& gx = t.nodes_[x.id].grad;
    Tensor& gh_prev = t.nodes_[h_prev.id].grad;
    for (std::size_t r = 0; r < 4 * hid; ++r) {
      const double d = dz[r];
      if (d == 0.0) continue;
      gb[r] += d;
      double* gwxr = gwx.data().data() + r * in_dim;
      const double* wxr = wx2.data().data() + r * in_dim;
      for (std::size_t c = 0; c < in_dim; ++c) {
        gwxr[c] += d * tx2[c];
        gx[c] += d * wxr[c];
      }
      double* gwhr = gwh.data().data() + r * hid;
      const double* whr = wh2.data().data() + r * hid;
      for (std::size_t c = 0; c < hid; ++c) {
        gwhr[c] += d * th2[c];
        gh_prev[c] += d * whr[c];
      }
    }
  };

  return LstmStep{h_node, c_node};
}

void Tape::backward(Var root) {
  check(root, "backward");
  if (node_value(root.id).size() != 1) {
    throw std::invalid_argument("Tape::backward: root must be scalar");
  }
  for (std::uint32_t id = 0; id <= root.id; ++id) {
    Node& n = nodes_[id];
    const Tensor& v = node_value(id);
    if (!n.grad.same_shape(v) || n.grad.size() != v.size()) {
      n.grad = Tensor(v.shape());
    } else {
      n.grad.fill(0.0);
    }
  }
  nodes_[root.id].grad[0] = 1.0;
  for (std::uint32_t id = root.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.backprop) n.backprop(*this);
    if (n.bound) {
      if (!n.grad.all_finite()) {
        throw std::runtime_error("Tape::backward: non-finite gradient for " +
                                 n.bound->name);
      }
      if (n.bound_is_row) {
        double* dst = n.bound->grad.data().data() + n.bound_row_offset;
        for (std::size_t i = 0; i < n.grad.size(); ++i) dst[i] += n.grad[i];
      } else {
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
          n.bound->grad[i] += n.grad[i];
        }
      }
    }
  }
}

}  // namespace coheval::diff
