// memvoice/autodiff.cpp
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#include "memvoice/autodiff.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace memvoice {

namespace {

void require_same_tape(Var a, Var b, const char* op) {
  if (!a.valid() || !b.valid() || a.tape != b.tape) {
    throw std::invalid_argument(std::string(op) + ": vars on different tapes");
  }
}

[[noreturn]] void dim_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " +
                              a.shape_str() + " and " + b.shape_str());
}

}  // namespace

struct VarOps {
  static Tape::Node& node(Var v) { return v.tape->node(v); }
  static const Tensor& val(Var v) { return v.tape->val(v); }
  static Tensor& grad(Var v) { return v.tape->grad_ref(v); }
};

Tape::Node& Tape::node(Var v) { return nodes_[static_cast<std::size_t>(v.id)]; }
const Tape::Node& Tape::node(Var v) const {
  return nodes_[static_cast<std::size_t>(v.id)];
}

Var Tape::make(Tensor value, std::function<void(Tape&, int)> backward_fn) {
  Node n;
  n.value = std::move(value);
  n.grad = Tensor(n.value.shape());
  n.backward = std::move(backward_fn);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Tensor t) { return make(std::move(t), {}); }

Var Tape::param(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Var{this, it->second};
  Var v = make(p.value, {});
  node(v).bound = &p;
  param_nodes_.emplace(&p, v.id);
  return v;
}

const Tensor& Tape::val(Var v) const { return node(v).value; }
Tensor& Tape::grad_ref(Var v) { return node(v).grad; }

void Tape::backward(Var loss) {
  if (!loss.valid() || loss.tape != this) {
    throw std::invalid_argument("backward: var not on this tape");
  }
  if (backward_done_) {
    throw std::logic_error("backward: tape already swept");
  }
  Node& ln = node(loss);
  if (ln.value.size() != 1) {
    throw std::invalid_argument("backward: loss must be scalar, got " +
                                ln.value.shape_str());
  }
  backward_done_ = true;
  ln.grad[0] = 1.0;
  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.backward) n.backward(*this, i);
  }
  for (auto& [p, id] : param_nodes_) {
    const Tensor& g = nodes_[static_cast<std::size_t>(id)].grad;
    Parameter* param = const_cast<Parameter*>(p);
    for (std::size_t k = 0; k < g.size(); ++k) param->grad[k] += g[k];
  }
}

// ---------------------------------------------------------------------------

namespace {

using BackFn = std::function<void(Tape&, int)>;

Var unary(Var a, Tensor out, std::function<void(const Tensor&, Tensor&, const Tensor&)> back) {
  // back(node_grad, input_grad, node_value)
  int aid = a.id;
  return a.tape->make(std::move(out), [aid, back = std::move(back)](Tape& t, int self) {
    Var sv{&t, self}, av{&t, aid};
    back(VarOps::grad(sv), VarOps::grad(av), VarOps::val(sv));
  });
}

}  // namespace

Var add(Var a, Var b) {
  require_same_tape(a, b, "add");
  const Tensor& x = VarOps::val(a);
  const Tensor& y = VarOps::val(b);
  if (!x.same_shape(y)) dim_error("add", x, y);
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += y[i];
  int aid = a.id, bid = b.id;
  return a.tape->make(std::move(out), [aid, bid](Tape& t, int self) {
    const Tensor& g = VarOps::grad(Var{&t, self});
    Tensor& ga = VarOps::grad(Var{&t, aid});
    Tensor& gb = VarOps::grad(Var{&t, bid});
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i];
      gb[i] += g[i];
    }
  });
}

Var sub(Var a, Var b) {
  require_same_tape(a, b, "sub");
  const Tensor& x = VarOps::val(a);
  const Tensor& y = VarOps::val(b);
  if (!x.same_shape(y)) dim_error("sub", x, y);
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= y[i];
  int aid = a.id, bid = b.id;
  return a.tape->make(std::move(out), [aid, bid](Tape& t, int self) {
    const Tensor& g = VarOps::grad(Var{&t, self});
    Tensor& ga = VarOps::grad(Var{&t, aid});
    Tensor& gb = VarOps::grad(Var{&t, bid});
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i];
      gb[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_tape(a, b, "mul");
  const Tensor& x = VarOps::val(a);
  const Tensor& y = VarOps::val(b);
  if (!x.same_shape(y)) dim_error("mul", x, y);
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= y[i];
  int aid = a.id, bid = b.id;
  return a.tape->make(std::move(out), [aid, bid](Tape& t, int self) {
    const Tensor& g = VarOps::grad(Var{&t, self});
    const Tensor& x = VarOps::val(Var{&t, aid});
    const Tensor& y = VarOps::val(Var{&t, bid});
    Tensor& ga = VarOps::grad(Var{&t, aid});
    Tensor& gb = VarOps::grad(Var{&t, bid});
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * y[i];
      gb[i] += g[i] * x[i];
    }
  });
}

Var scale(Var a, double s) {
  Tensor out = VarOps::val(a);
  for (double& v : out.values()) v *= s;
  int aid = a.id;
  return a.tape->make(std::move(out), [aid, s](Tape& t, int self) {
    const Tensor& g = VarOps::grad(Var{&t, self});
    Tensor& ga = VarOps::grad(Var{&t, aid});
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
  });
}

Var neg(Var a) { return scale(a, -1.0); }

Var one_minus(Var a) {
  Tensor out = VarOps::val(a);
  for (double& v : out.values()) v = 1.0 - v;
  int aid = a.id;
  return a.tape->make(std::move(out), [aid](Tape& t, int self) {
    const Tensor& g = VarOps::grad(Var{&t, self});
    Tensor& ga = VarOps::grad(Var{&t, aid});
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] -= g[i];
  });
}

Var vtanh(Var a) {
  Tensor out = VarOps::val(a);
  for (double& v : out.values()) v = std::tanh(v);
  return unary(a, std::move(out), [](const Tensor& g, Tensor& ga, const Tensor& y) {
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var vsigmoid(Var a) {
  Tensor out = VarOps::val(a);
  for (double& v : out.values()) v = 1.0 / (1.0 + std::exp(-v));
  return unary(a, std::move(out), [](const Tensor& g, Tensor& ga, const Tensor& y) {
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var affine(Var x, Var w, Var b) {
  require_same_tape(x, w, "affine");
  require_same_tape(x, b, "affine");
  const Tensor& xv = VarOps::val(x);
  const Tensor& wv = VarOps::val(w);
  const Tensor& bv = VarOps::val(b);
  if (wv.ndim() != 2) dim_error("affine: weight must be a matrix", wv, xv);
  const int out_dim = wv.rows(), in_dim = wv.cols();
  if (bv.ndim() != 1 || bv.dim(0) != out_dim) dim_error("affine: bias", bv, wv);

  const bool seq = xv.ndim() == 2;
  if ((seq ? xv.cols() : (xv.ndim() == 1 ? xv.dim(0) : -1)) != in_dim) {
    dim_error("affine", wv, xv);
  }
  const int T = seq ? xv.rows() : 1;

  Tensor out = seq ? Tensor({T, out_dim}) : Tensor({out_dim});
  for (int t = 0; t < T; ++t) {
    const double* xr = xv.data() + static_cast<std::size_t>(t) * in_dim;
    double* yr = out.data() + static_cast<std::size_t>(t) * out_dim;
    for (int o = 0; o < out_dim; ++o) {
      const double* wr = wv.data() + static_cast<std::size_t>(o) * in_dim;
      double acc = bv[static_cast<std::size_t>(o)];
      for (int i = 0; i < in_dim; ++i) acc += wr[i] * xr[i];
      yr[o] = acc;
    }
  }
  int xid = x.id, wid = w.id, bid = b.id;
  return x.tape->make(std::move(out), [xid, wid, bid, T, in_dim, out_dim](Tape& t, int self) {
    const Tensor& g = VarOps::grad(Var{&t, self});
    const Tensor& xv = VarOps::val(Var{&t, xid});
    const Tensor& wv = VarOps::val(Var{&t, wid});
    Tensor& gx = VarOps::grad(Var{&t, xid});
    Tensor& gw = VarOps::grad(Var{&t, wid});
    Tensor& gb = VarOps::grad(Var{&t, bid});
    for (int step = 0; step < T; ++step) {
      const double* gr = g.data() + static_cast<std::size_t>(step) * out_dim;
      const double* xr = xv.data() + static_cast<std::size_t>(step) * in_dim;
      double* gxr = gx.data() + static_cast<std::size_t>(step) * in_dim;
      for (int o = 0; o < out_dim; ++o) {
        const double go = gr[o];
        const double* wr = wv.data() + static_cast<std::size_t>(o) * in_dim;
        double* gwr = gw.data() + static_cast<std::size_t>(o) * in_dim;
        gb[static_cast<std::size_t>(o)] += go;
        for (int i = 0; i < in_dim; ++i) {
          gxr[i] += go * wr[i];
          gwr[i] += go * xr[i];
        }
      }
    }
  });
}

Var matvec(Var w, Var x) {
  require_same_tape(w, x, "matvec");
  const Tensor& wv = VarOps::val(w);
  const Tensor& xv = VarOps::val(x);
  if (wv.ndim() != 2 || xv.ndim() != 1 || wv.cols() != xv.dim(0)) {
    dim_error("matvec", wv, xv);
  }
  const int out_dim = wv.rows(), in_dim = wv.cols();
  Tensor out({out_dim});
  for (int o = 0; o < out_dim; ++o) {
    const double* wr = wv.data() + static_cast<std::size_t>(o) * in_dim;
    double acc = 0.0;
    for (int i = 0; i < in_dim; ++i) acc += wr[i] * xv[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(o)] = acc;
  }
  int wid = w.id, xid = x.id;
  return w.tape->make(std::move(out), [wid, xid, out_dim, in_dim](Tape& t, int self) {
    const Tensor& g = VarOps::grad(Var{&t, self});
    const Tensor& wv = VarOps::val(Var{&t, wid});
    const Tensor& xv = VarOps::val(Var{&t, xid});
    Tensor& gw = VarOps::grad(Var{&t, wid});
    Tensor& gx = VarOps::grad(Var{&t, xid});
    for (int o = 0; o < out_dim; ++o) {
      const double go = g[static_cast<std::size_t>(o)];
      const double* wr = wv.data() + static_cast<std::size_t>(o) * in_dim;
      double* gwr = gw.data() + static_cast<std::size_t>(o) * in_dim;
      for (int i = 0; i < in_dim; ++i) {
        gx[static_cast<std::size_t>(i)] += go * wr[i];
        gwr[i] += go * xv[static_cast<std::size_t>(i)];
      }
    }
  });
}

Var concat(Var a, Var b) {
  require_same_tape(a, b, "concat");
  const Tensor& x = VarOps::val(a);
  const Tensor& y = VarOps::val(b);
  if (x.ndim() != 1 || y.ndim() != 1) dim_error("concat", x, y);
  std::vector<double> out = x.values();
  out.insert(out.end(), y.values().begin(), y.values().end());
  int aid = a.id, bid = b.id;
  const std::size_t na = x.size();
  return a.tape->make(Tensor::vector(std::move(out)), [aid, bid, na](Tape& t, int self) {
    const Tensor& g = VarOps::grad(Var{&t, self});
    Tensor& ga = VarOps::grad(Var{&t, aid});
    Tensor& gb = VarOps::grad(Var{&t, bid});
    for (std::size_t i = 0; i < na; ++i) ga[i] += g[i];
    for (std::size_t i = na; i < g.size(); ++i) gb[i - na] += g[i];
  });
}

Var row(Var m, int r) {
  const Tensor& mv = VarOps::val(m);
  if (mv.ndim() != 2 || r < 0 || r >= mv.rows()) {
    throw std::invalid_argument("row: index " + std::to_string(r) + " out of range for " +
                                mv.shape_str());
  }
  const int c = mv.cols();
  std::vector<double> out(mv.data() + static_cast<std::size_t>(r) * c,
                          mv.data() + static_cast<std::size_t>(r + 1) * c);
  int mid = m.id;
  return m.tape->make(Tensor::vector(std::move(out)), [mid, r, c](Tape& t, int self) {
    const Tensor& g = VarOps::grad(Var{&t, self});
    Tensor& gm = VarOps::grad(Var{&t, mid});
    double* gr = gm.data() + static_cast<std::size_t>(r) * c;
    for (int i = 0; i < c; ++i) gr[i] += g[static_cast<std::size_t>(i)];
  });
}

Var stack_rows(const std::vector<Var>& rows) {
  if (rows.empty()) throw std::invalid_argument("stack_rows: empty input");
  Tape* tape = rows[0].tape;
  const int c = VarOps::val(rows[0]).ndim() == 1
                    ? VarOps::val(rows[0]).dim(0)
                    : throw std::invalid_argument("stack_rows: rows must be vectors");
  const int T = static_cast<int>(rows.size());
  Tensor out({T, c});
  std::vector<int> ids(rows.size());
  for (int t = 0; t < T; ++t) {
    require_same_tape(rows[0], rows[static_cast<std::size_t>(t)], "stack_rows");
    const Tensor& rv = VarOps::val(rows[static_cast<std::size_t>(t)]);
    if (rv.ndim() != 1 || rv.dim(0) != c) dim_error("stack_rows", VarOps::val(rows[0]), rv);
    std::copy(rv.data(), rv.data() + c, out.data() + static_cast<std::size_t>(t) * c);
    ids[static_cast<std::size_t>(t)] = rows[static_cast<std::size_t>(t)].id;
  }
  return tape->make(std::move(out), [ids, c](Tape& t, int self) {
    const Tensor& g = VarOps::grad(Var{&t, self});
    for (std::size_t r = 0; r < ids.size(); ++r) {
      Tensor& gr = VarOps::grad(Var{&t, ids[r]});
      const double* src = g.data() + r * static_cast<std::size_t>(c);
      for (int i = 0; i < c; ++i) gr[static_cast<std::size_t>(i)] += src[i];
    }
  });
}

Var stack_scalars(const std::vector<Var>& xs) {
  if (xs.empty()) throw std::invalid_argument("stack_scalars: empty input");
  Tape* tape = xs[0].tape;
  std::vector<double> out(xs.size());
  std::vector<int> ids(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require_same_tape(xs[0], xs[i], "stack_scalars");
    const Tensor& v = VarOps::val(xs[i]);
    if (v.size() != 1) {
      throw std::invalid_argument("stack_scalars: entry " + std::to_string(i) +
                                  " is not scalar: " + v.shape_str());
    }
    out[i] = v[0];
    ids[i] = xs[i].id;
  }
  return tape->make(Tensor::vector(std::move(out)), [ids](Tape& t, int self) {
    const Tensor& g = VarOps::grad(Var{&t, self});
    for (std::size_t i = 0; i < ids.size(); ++i) {
      VarOps::grad(Var{&t, ids[i]})[0] += g[i];
    }
  });
}

Var softmax(Var z) {
  const Tensor& zv = VarOps::val(z);
  if (zv.ndim() != 1 || zv.size() == 0) {
    throw std::invalid_argument("softmax: need non-empty vector, got " + zv.shape_str());
  }
  double mx = zv[0];
  for (double v : zv.values()) mx = std::max(mx, v);
  Tensor out = zv;
  double sum = 0.0;
  for (double& v : out.values()) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : out.values()) v /= sum;
  return unary(z, std::move(out), [](const Tensor& g, Tensor& gz, const Tensor& y) {
    double gy = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) gy += g[i] * y[i];
    for (std::size_t i = 0; i < g.size(); ++i) gz[i] += y[i] * (g[i] - gy);
  });
}

Var log_softmax(Var z) {
  const Tensor& zv = VarOps::val(z);
  if (zv.ndim() != 1 || zv.size() == 0) {
    throw std::invalid_argument("log_softmax: need non-empty vector, got " + zv.shape_str());
  }
  double mx = zv[0];
  for (double v : zv.values()) mx = std::max(mx, v);
  double sum = 0.0;
  for (double v : zv.values()) sum += std::exp(v - mx);
  const double lse = mx + std::log(sum);
  Tensor out = zv;
  for (double& v : out.values()) v -= lse;
  return unary(z, std::move(out), [](const Tensor& g, Tensor& gz, const Tensor& y) {
    double gsum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) gsum += g[i];
    for (std::size_t i = 0; i < g.size(); ++i) gz[i] += g[i] - std::exp(y[i]) * gsum;
  });
}

Var pick(Var v, int i) {
  const Tensor& vv = VarOps::val(v);
  if (vv.ndim() != 1 || i < 0 || i >= vv.dim(0)) {
    throw std::invalid_argument("pick: index " + std::to_string(i) + " out of range for " +
                                vv.shape_str());
  }
  int vid = v.id;
  return v.tape->make(Tensor::scalar(vv[static_cast<std::size_t>(i)]),
                      [vid, i](Tape& t, int self) {
                        const Tensor& g = VarOps::grad(Var{&t, self});
                        VarOps::grad(Var{&t, vid})[static_cast<std::size_t>(i)] += g[0];
                      });
}

Var vsum(Var v) {
  const Tensor& vv = VarOps::val(v);
  double s = 0.0;
  for (double x : vv.values()) s += x;
  int vid = v.id;
  return v.tape->make(Tensor::scalar(s), [vid](Tape& t, int self) {
    const Tensor& g = VarOps::grad(Var{&t, self});
    Tensor& gv = VarOps::grad(Var{&t, vid});
    for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += g[0];
  });
}

Var dot(Var a, Var b) {
  require_same_tape(a, b, "dot");
  const Tensor& x = VarOps::val(a);
  const Tensor& y = VarOps::val(b);
  if (!x.same_shape(y) || x.ndim() != 1) dim_error("dot", x, y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  int aid = a.id, bid = b.id;
  return a.tape->make(Tensor::scalar(s), [aid, bid](Tape& t, int self) {
    const double g = VarOps::grad(Var{&t, self})[0];
    const Tensor& x = VarOps::val(Var{&t, aid});
    const Tensor& y = VarOps::val(Var{&t, bid});
    Tensor& ga = VarOps::grad(Var{&t, aid});
    Tensor& gb = VarOps::grad(Var{&t, bid});
    for (std::size_t i = 0; i < x.size(); ++i) {
      ga[i] += g * y[i];
      gb[i] += g * x[i];
    }
  });
}

Var weighted_rowsum(Var m, Var w) {
  const Tensor& mv = VarOps::val(m);
  const Tensor& wv = VarOps::val(w);
  if (mv.ndim() != 2 || wv.ndim() != 1 || mv.dim(0) != wv.dim(0)) {
    dim_error("weighted_rowsum", mv, wv);
  }
  const int T = mv.rows(), H = mv.cols();
  Tensor out({H});
  for (int t = 0; t < T; ++t) {
    const double wt = wv[static_cast<std::size_t>(t)];
    for (int h = 0; h < H; ++h) out[static_cast<std::size_t>(h)] += wt * mv.at(t, h);
  }
  int mid = m.id, wid = w.id;
  return m.tape->make(std::move(out), [mid, wid, T, H](Tape& t, int self) {
    const Tensor& g = VarOps::grad(Var{&t, self});
    const Tensor& mv2 = VarOps::val(Var{&t, mid});
    const Tensor& wv2 = VarOps::val(Var{&t, wid});
    Tensor& gm = VarOps::grad(Var{&t, mid});
    Tensor& gw = VarOps::grad(Var{&t, wid});
    for (int r = 0; r < T; ++r) {
      const double wt = wv2[static_cast<std::size_t>(r)];
      double acc = 0.0;
      for (int h = 0; h < H; ++h) {
        const double gh = g[static_cast<std::size_t>(h)];
        gm.at(r, h) += gh * wt;
        acc += gh * mv2.at(r, h);
      }
      gw[static_cast<std::size_t>(r)] += acc;
    }
  });
}

Var const_matvec(const Tensor& m, Var w) {
  const Tensor& wv = VarOps::val(w);
  if (m.ndim() != 2 || wv.ndim() != 1 || m.cols() != wv.dim(0)) {
    dim_error("const_matvec", m, wv);
  }
  const int D = m.rows(), N = m.cols();
  Tensor out({D});
  for (int d = 0; d < D; ++d) {
    const double* mr = m.data() + static_cast<std::size_t>(d) * N;
    double acc = 0.0;
    for (int n = 0; n < N; ++n) acc += mr[n] * wv[static_cast<std::size_t>(n)];
    out[static_cast<std::size_t>(d)] = acc;
  }
  int wid = w.id;
  return w.tape->make(std::move(out), [m, wid, D, N](Tape& t, int self) {
    const Tensor& g = VarOps::grad(Var{&t, self});
    Tensor& gw = VarOps::grad(Var{&t, wid});
    for (int d = 0; d < D; ++d) {
      const double* mr = m.data() + static_cast<std::size_t>(d) * N;
      const double gd = g[static_cast<std::size_t>(d)];
      for (int n = 0; n < N; ++n) gw[static_cast<std::size_t>(n)] += gd * mr[n];
    }
  });
}

}  // namespace memvoice
