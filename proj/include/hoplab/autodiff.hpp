// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0
//
// Reverse-mode differentiation over a linear tape.
//
// Every op appends one node holding its forward value and a closure that, given
// the node's output gradient, accumulates into the gradients of its inputs. A
// sweep walks the nodes in reverse execution order, so accumulation at fan-out
// happens in a fixed order and results are bit-reproducible.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hoplab/tensor.hpp"

namespace hoplab::num {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t index = 0;
};

class TapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class Tape {
 public:
  using Grads = std::vector<Tensor>;
  // Adds d(loss)/d(node) contributions into grads of the node's inputs.
  using Backward = std::function<void(const Tensor& grad_out, Grads& grads)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Differentiable leaf.
  Var variable(Tensor value);
  // Leaf that never receives a gradient.
  Var constant(Tensor value);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  const Tensor& value_at(std::uint32_t index) const { return nodes_[index].value; }
  bool requires_grad_at(std::uint32_t index) const { return nodes_[index].requires_grad; }
  std::size_t size() const { return nodes_.size(); }
  // Drops every node recorded after the first `mark` nodes. Vars pointing past
  // the mark become invalid.
  void rewind(std::size_t mark);

  // One reverse sweep from a 1-element loss. Returns one gradient per entry of
  // wrt (zeros for leaves the loss does not reach).
  std::vector<Tensor> grad(Var loss, std::span<const Var> wrt) const;

  // Used by ops. `inputs` lists the nodes the closure may write gradients to.
  Var record(std::string_view op, Tensor value, std::vector<std::uint32_t> inputs,
             Backward backward);

  // Zero-initialised on first touch.
  static Tensor& grad_slot(Grads& grads, const Tape& tape, std::uint32_t index);

 private:
  struct Node {
    Tensor value;
    std::vector<std::uint32_t> inputs;
    Backward backward;
    bool requires_grad = false;
  };

  void check_owned(Var v, std::string_view what) const;

  std::vector<Node> nodes_;
};

// Primitive differentiable ops. Shape violations raise ShapeError naming the
// op; non-finite results raise OverflowError.
Var matmul(Var a, Var b);
Var transpose(Var a);
// Same-shape sum, or bias-row addition when b is [n] / [1,n] and a is [m,n].
Var add(Var a, Var b);
Var scale(Var a, double c);
Var row_softmax(Var a);
Var layer_norm(Var a, Var gain, Var bias, double eps = 1e-5);
Var gelu(Var a);
Var embedding_gather(Var table, std::span<const std::uint32_t> ids);
// Mean softmax cross-entropy over rows; returns a 1-element tensor.
Var cross_entropy(Var logits, std::span<const int> labels);

// Structural helpers used by the attention classifier.
Var sum(Var a);
Var slice_cols(Var a, std::size_t start, std::size_t width);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);

// Central-difference oracle: (loss(θ+ε) − loss(θ−ε)) / 2ε for every scalar of
// every tensor in params. params is restored before returning.
std::vector<Tensor> finite_diff_grad(
    const std::function<double(const std::vector<Tensor>&)>& loss_fn,
    std::vector<Tensor>& params, double epsilon);

}  // namespace hoplab::num
