// memvoice/autodiff.h
//
// Copyright 2026 memvoice authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <deque>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "memvoice/tensor.h"

namespace memvoice {

// A trainable tensor with an accumulated gradient of the same shape.
struct Parameter {
  Tensor value;
  Tensor grad;
  std::string name;

  Parameter() = default;
  Parameter(std::string param_name, Tensor t)
      : value(std::move(t)), grad(value.shape()), name(std::move(param_name)) {}

  void reset_grad() { grad.fill(0.0); }
};

class Tape;

// Handle to a node on a Tape. Cheap to copy; invalid when default-constructed.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
  bool valid() const { return tape != nullptr && id >= 0; }
};

// Reverse-mode autodiff over a recorded trace. Nodes are created in
// topological order, so the backward sweep is a reverse iteration. Each op
// registers a closure that propagates the node's gradient to its inputs.
// A Tape is single-threaded and intended for one forward/backward pass.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Constant input; receives a gradient but it is discarded.
  Var leaf(Tensor t);

  // Binds a Parameter: its current value is copied onto the tape and after
  // backward() the node's gradient is added into p.grad. Repeated calls with
  // the same Parameter return the same node.
  Var param(Parameter& p);

  const Tensor& val(Var v) const;
  Tensor& grad_ref(Var v);

  // Seeds d(loss)/d(loss)=1, runs the reverse sweep, then flushes gradients
  // of bound parameters. loss must be scalar. Call at most once per tape.
  void backward(Var loss);

  std::size_t node_count() const { return nodes_.size(); }

  // Op implementation hook: allocates a node. backward_fn may be empty.
  Var make(Tensor value, std::function<void(Tape&, int)> backward_fn);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void(Tape&, int)> backward;
    Parameter* bound = nullptr;
  };

  Node& node(Var v);
  const Node& node(Var v) const;

  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_nodes_;
  bool backward_done_ = false;

  friend struct VarOps;
};

// -- Primitive differentiable ops ------------------------------------------
// All take and return Vars on the same tape. Shape violations throw
// std::invalid_argument with both shapes in the message.

Var add(Var a, Var b);        // elementwise, same shape
Var sub(Var a, Var b);
Var mul(Var a, Var b);        // elementwise (Hadamard)
Var scale(Var a, double s);
Var neg(Var a);
Var one_minus(Var a);         // 1 - x elementwise
Var vtanh(Var a);
Var vsigmoid(Var a);

// y = W x + b with W:[out x in], b:[out]; x may be [in] or a sequence
// [T x in] (the affine map is applied to every row).
Var affine(Var x, Var w, Var b);
// y = W x without bias, W:[out x in], x:[in].
Var matvec(Var w, Var x);

Var concat(Var a, Var b);       // vectors [A],[B] -> [A+B]
Var row(Var m, int r);          // matrix row as a vector (differentiable)
Var stack_rows(const std::vector<Var>& rows);     // T vectors -> [T x H]
Var stack_scalars(const std::vector<Var>& xs);    // K scalars -> [K]

Var softmax(Var z);        // vector; max-subtracted
Var log_softmax(Var z);
Var pick(Var v, int i);    // scalar v[i]
Var vsum(Var v);           // scalar sum of all entries
Var dot(Var a, Var b);     // scalar

// y = M w for a constant matrix M:[D x N], w:[N]; gradient flows to w only.
Var const_matvec(const Tensor& m, Var w);

// y = sum_t w[t] * m[t,:] for m:[T x H], w:[T]; gradients to both.
Var weighted_rowsum(Var m, Var w);

}  // namespace memvoice
