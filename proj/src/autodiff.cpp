// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0

#include "hoplab/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hoplab/kernels.hpp"

namespace hoplab::num {

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

Var Tape::variable(Tensor value) {
  if (!value.all_finite()) throw OverflowError("variable: non-finite leaf value");
  nodes_.push_back(Node{std::move(value), {}, nullptr, true});
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, false});
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

void Tape::check_owned(Var v, std::string_view what) const {
  if (v.tape != this || v.index >= nodes_.size()) {
    throw TapeError(std::string(what) + " is not a node of this tape");
  }
}

void Tape::rewind(std::size_t mark) {
  if (mark < nodes_.size()) nodes_.resize(mark);
}

const Tensor& Tape::value(Var v) const {
  check_owned(v, "value");
  return nodes_[v.index].value;
}

bool Tape::requires_grad(Var v) const {
  check_owned(v, "requires_grad");
  return nodes_[v.index].requires_grad;
}

Var Tape::record(std::string_view op, Tensor value, std::vector<std::uint32_t> inputs,
                 Backward backward) {
  if (!value.all_finite()) {
    throw OverflowError(std::string(op) + ": non-finite output of shape " +
                        shape_str(value.shape()));
  }
  const bool needs = std::any_of(inputs.begin(), inputs.end(), [&](std::uint32_t i) {
    return nodes_[i].requires_grad;
  });
  nodes_.push_back(Node{std::move(value), std::move(inputs),
                        needs ? std::move(backward) : nullptr, needs});
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tensor& Tape::grad_slot(Grads& grads, const Tape& tape, std::uint32_t index) {
  if (grads[index].empty()) grads[index] = Tensor(tape.value_at(index).shape(), 0.0);
  return grads[index];
}

std::vector<Tensor> Tape::grad(Var loss, std::span<const Var> wrt) const {
  check_owned(loss, "loss");
  const Tensor& loss_value = nodes_[loss.index].value;
  if (loss_value.size() != 1) {
    throw ShapeError("grad: loss must hold one element, got shape " +
                     shape_str(loss_value.shape()));
  }
  for (Var w : wrt) check_owned(w, "grad target");

  Grads grads(loss.index + 1);
  grads[loss.index] = Tensor(loss_value.shape(), 1.0);
  for (std::uint32_t i = loss.index + 1; i-- > 0;) {
    const Node& node = nodes_[i];
    if (grads[i].empty() || !node.backward) continue;
    node.backward(grads[i], grads);
  }

  std::vector<Tensor> out;
  out.reserve(wrt.size());
  for (Var w : wrt) {
    if (w.index < grads.size() && !grads[w.index].empty()) {
      out.push_back(grads[w.index]);
    } else {
      out.emplace_back(nodes_[w.index].value.shape(), 0.0);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ops
// ---------------------------------------------------------------------------

namespace {

Tape& common_tape(std::string_view op, std::initializer_list<Var> vars) {
  Tape* tape = vars.begin()->tape;
  for (Var v : vars) {
    if (v.tape == nullptr || v.tape != tape) {
      throw TapeError(std::string(op) + ": operands live on different tapes");
    }
  }
  return *tape;
}

[[noreturn]] void shape_fail(std::string_view op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) +
                   " and " + shape_str(b.shape()));
}

[[noreturn]] void shape_fail(std::string_view op, const Tensor& a, std::string_view why) {
  throw ShapeError(std::string(op) + ": shape " + shape_str(a.shape()) + " " +
                   std::string(why));
}

const kernels::KernelTable& K() { return kernels::active(); }

// grads[i] += src
void accumulate(Tape::Grads& grads, const Tape& tape, std::uint32_t index,
                const Tensor& src) {
  Tensor& slot = Tape::grad_slot(grads, tape, index);
  K().add(slot.size(), slot.data().data(), src.data().data(), slot.data().data());
}

bool is_row_vector(const Tensor& t, std::size_t n) {
  return t.cols() == n && t.size() == n && t.rank() <= 2;
}

Tensor transposed(const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  Tensor out({n, m});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.at(j, i) = a.at(i, j);
  }
  return out;
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = common_tape("matmul", {a, b});
  const Tensor& A = tape.value(a);
  const Tensor& B = tape.value(b);
  if (A.rank() != 2 || B.rank() != 2 || A.cols() != B.rows()) shape_fail("matmul", A, B);
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();

  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) K().axpy(n, A.at(i, p), B.row(p), out.row(i));
  }

  const Tape* tp = &tape;
  return tape.record(
      "matmul", std::move(out), {a.index, b.index},
      [tp, ai = a.index, bi = b.index, m, k, n](const Tensor& g, Tape::Grads& grads) {
        const Tensor& A = tp->value_at(ai);
        const Tensor& B = tp->value_at(bi);
        if (tp->requires_grad_at(ai)) {
          // dA = g · Bᵀ
          const Tensor Bt = transposed(B);
          Tensor& dA = Tape::grad_slot(grads, *tp, ai);
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) K().axpy(k, g.at(i, j), Bt.row(j), dA.row(i));
          }
        }
        if (tp->requires_grad_at(bi)) {
          // dB = Aᵀ · g
          Tensor& dB = Tape::grad_slot(grads, *tp, bi);
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t p = 0; p < k; ++p) K().axpy(n, A.at(i, p), g.row(i), dB.row(p));
          }
        }
      });
}

Var transpose(Var a) {
  Tape& tape = common_tape("transpose", {a});
  const Tensor& A = tape.value(a);
  if (A.rank() != 2) shape_fail("transpose", A, "is not a matrix");
  const Tape* tp = &tape;
  return tape.record("transpose", transposed(A), {a.index},
                     [tp, ai = a.index](const Tensor& g, Tape::Grads& grads) {
                       accumulate(grads, *tp, ai, transposed(g));
                     });
}

Var add(Var a, Var b) {
  Tape& tape = common_tape("add", {a, b});
  const Tensor& A = tape.value(a);
  const Tensor& B = tape.value(b);
  const Tape* tp = &tape;

  if (A.shape() == B.shape()) {
    Tensor out(A.shape());
    K().add(out.size(), A.data().data(), B.data().data(), out.data().data());
    return tape.record("add", std::move(out), {a.index, b.index},
                       [tp, ai = a.index, bi = b.index](const Tensor& g, Tape::Grads& grads) {
                         if (tp->requires_grad_at(ai)) accumulate(grads, *tp, ai, g);
                         if (tp->requires_grad_at(bi)) accumulate(grads, *tp, bi, g);
                       });
  }

  if (A.rank() != 2 || !is_row_vector(B, A.cols())) shape_fail("add", A, B);
  const std::size_t m = A.rows(), n = A.cols();
  Tensor out(A.shape());
  for (std::size_t i = 0; i < m; ++i) K().add(n, A.row(i), B.data().data(), out.row(i));
  return tape.record("add", std::move(out), {a.index, b.index},
                     [tp, ai = a.index, bi = b.index, m, n](const Tensor& g, Tape::Grads& grads) {
                       if (tp->requires_grad_at(ai)) accumulate(grads, *tp, ai, g);
                       if (tp->requires_grad_at(bi)) {
                         Tensor& dB = Tape::grad_slot(grads, *tp, bi);
                         for (std::size_t i = 0; i < m; ++i) {
                           K().add(n, dB.data().data(), g.row(i), dB.data().data());
                         }
                       }
                     });
}

Var scale(Var a, double c) {
  Tape& tape = common_tape("scale", {a});
  const Tensor& A = tape.value(a);
  Tensor out(A.shape());
  K().scale(out.size(), c, A.data().data(), out.data().data());
  const Tape* tp = &tape;
  return tape.record("scale", std::move(out), {a.index},
                     [tp, ai = a.index, c](const Tensor& g, Tape::Grads& grads) {
                       Tensor& dA = Tape::grad_slot(grads, *tp, ai);
                       K().axpy(dA.size(), c, g.data().data(), dA.data().data());
                     });
}

Var row_softmax(Var a) {
  Tape& tape = common_tape("row_softmax", {a});
  const Tensor& A = tape.value(a);
  const std::size_t m = A.rows(), n = A.cols();
  Tensor out(A.shape());
  for (std::size_t i = 0; i < m; ++i) {
    const double* x = A.row(i);
    double* y = out.row(i);
    const double peak = *std::max_element(x, x + n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      y[j] = std::exp(x[j] - peak);
      total += y[j];
    }
    for (std::size_t j = 0; j < n; ++j) y[j] /= total;
  }
  const Tape* tp = &tape;
  const std::uint32_t self = static_cast<std::uint32_t>(tape.size());
  return tape.record("row_softmax", std::move(out), {a.index},
                     [tp, ai = a.index, self, m, n](const Tensor& g, Tape::Grads& grads) {
                       const Tensor& Y = tp->value_at(self);
                       Tensor& dA = Tape::grad_slot(grads, *tp, ai);
                       for (std::size_t i = 0; i < m; ++i) {
                         const double* y = Y.row(i);
                         const double* gy = g.row(i);
                         double dot = 0.0;
                         for (std::size_t j = 0; j < n; ++j) dot += gy[j] * y[j];
                         double* dx = dA.row(i);
                         for (std::size_t j = 0; j < n; ++j) dx[j] += y[j] * (gy[j] - dot);
                       }
                     });
}

Var layer_norm(Var a, Var gain, Var bias, double eps) {
  Tape& tape = common_tape("layer_norm", {a, gain, bias});
  const Tensor& A = tape.value(a);
  const Tensor& G = tape.value(gain);
  const Tensor& Bv = tape.value(bias);
  const std::size_t m = A.rows(), n = A.cols();
  if (!is_row_vector(G, n)) shape_fail("layer_norm", A, G);
  if (!is_row_vector(Bv, n)) shape_fail("layer_norm", A, Bv);

  Tensor out(A.shape());
  Tensor xhat(A.shape());
  std::vector<double> rstd(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double* x = A.row(i);
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += x[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (x[j] - mean) * (x[j] - mean);
    var /= static_cast<double>(n);
    rstd[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) {
      xhat.at(i, j) = (x[j] - mean) * rstd[i];
      out.at(i, j) = xhat.at(i, j) * G[j] + Bv[j];
    }
  }

  const Tape* tp = &tape;
  return tape.record(
      "layer_norm", std::move(out), {a.index, gain.index, bias.index},
      [tp, ai = a.index, gi = gain.index, bi = bias.index, m, n, xhat = std::move(xhat),
       rstd = std::move(rstd)](const Tensor& g, Tape::Grads& grads) {
        const Tensor& G = tp->value_at(gi);
        if (tp->requires_grad_at(gi)) {
          Tensor& dG = Tape::grad_slot(grads, *tp, gi);
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) dG[j] += g.at(i, j) * xhat.at(i, j);
          }
        }
        if (tp->requires_grad_at(bi)) {
          Tensor& dB = Tape::grad_slot(grads, *tp, bi);
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) dB[j] += g.at(i, j);
          }
        }
        if (tp->requires_grad_at(ai)) {
          Tensor& dA = Tape::grad_slot(grads, *tp, ai);
          const double inv_n = 1.0 / static_cast<double>(n);
          std::vector<double> dxhat(n);
          for (std::size_t i = 0; i < m; ++i) {
            double mean_d = 0.0, mean_dx = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
              dxhat[j] = g.at(i, j) * G[j];
              mean_d += dxhat[j];
              mean_dx += dxhat[j] * xhat.at(i, j);
            }
            mean_d *= inv_n;
            mean_dx *= inv_n;
            for (std::size_t j = 0; j < n; ++j) {
              dA.at(i, j) += rstd[i] * (dxhat[j] - mean_d - xhat.at(i, j) * mean_dx);
            }
          }
        }
      });
}

Var gelu(Var a) {
  Tape& tape = common_tape("gelu", {a});
  const Tensor& A = tape.value(a);
  Tensor out(A.shape());
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  for (std::size_t i = 0; i < A.size(); ++i) {
    out[i] = 0.5 * A[i] * (1.0 + std::erf(A[i] * inv_sqrt2));
  }
  const Tape* tp = &tape;
  return tape.record("gelu", std::move(out), {a.index},
                     [tp, ai = a.index, inv_sqrt2](const Tensor& g, Tape::Grads& grads) {
                       const Tensor& A = tp->value_at(ai);
                       Tensor& dA = Tape::grad_slot(grads, *tp, ai);
                       const double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
                       for (std::size_t i = 0; i < A.size(); ++i) {
                         const double x = A[i];
                         const double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
                         const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x * x);
                         dA[i] += g[i] * (cdf + x * pdf);
                       }
                     });
}

Var embedding_gather(Var table, std::span<const std::uint32_t> ids) {
  Tape& tape = common_tape("embedding_gather", {table});
  const Tensor& T = tape.value(table);
  if (T.rank() != 2) shape_fail("embedding_gather", T, "is not a matrix");
  if (ids.empty()) throw ShapeError("embedding_gather: empty id list");
  const std::size_t vocab = T.rows(), d = T.cols();
  Tensor out({ids.size(), d});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= vocab) {
      throw std::out_of_range("embedding_gather: token id " + std::to_string(ids[r]) +
                              " outside vocabulary of " + std::to_string(vocab));
    }
    std::copy_n(T.row(ids[r]), d, out.row(r));
  }
  const Tape* tp = &tape;
  return tape.record("embedding_gather", std::move(out), {table.index},
                     [tp, ti = table.index, ids = std::vector<std::uint32_t>(ids.begin(), ids.end()),
                      d](const Tensor& g, Tape::Grads& grads) {
                       Tensor& dT = Tape::grad_slot(grads, *tp, ti);
                       for (std::size_t r = 0; r < ids.size(); ++r) {
                         K().add(d, dT.row(ids[r]), g.row(r), dT.row(ids[r]));
                       }
                     });
}

Var cross_entropy(Var logits, std::span<const int> labels) {
  Tape& tape = common_tape("cross_entropy", {logits});
  const Tensor& L = tape.value(logits);
  const std::size_t m = L.rows(), n = L.cols();
  if (L.rank() != 2 || labels.size() != m) {
    throw ShapeError("cross_entropy: logits " + shape_str(L.shape()) + " vs " +
                     std::to_string(labels.size()) + " labels");
  }
  Tensor probs(L.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= n) {
      throw std::out_of_range("cross_entropy: label " + std::to_string(labels[i]) +
                              " outside [0, " + std::to_string(n) + ")");
    }
    const double* x = L.row(i);
    const double peak = *std::max_element(x, x + n);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      probs.at(i, j) = std::exp(x[j] - peak);
      z += probs.at(i, j);
    }
    for (std::size_t j = 0; j < n; ++j) probs.at(i, j) /= z;
    total += peak + std::log(z) - x[labels[i]];
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  const Tape* tp = &tape;
  return tape.record("cross_entropy", Tensor::scalar(total * inv_m), {logits.index},
                     [tp, li = logits.index, probs = std::move(probs),
                      labels = std::vector<int>(labels.begin(), labels.end()), m, n,
                      inv_m](const Tensor& g, Tape::Grads& grads) {
                       Tensor& dL = Tape::grad_slot(grads, *tp, li);
                       const double scale = g[0] * inv_m;
                       for (std::size_t i = 0; i < m; ++i) {
                         for (std::size_t j = 0; j < n; ++j) {
                           const double onehot = static_cast<int>(j) == labels[i] ? 1.0 : 0.0;
                           dL.at(i, j) += scale * (probs.at(i, j) - onehot);
                         }
                       }
                     });
}

Var sum(Var a) {
  Tape& tape = common_tape("sum", {a});
  const Tensor& A = tape.value(a);
  double total = 0.0;
  for (double v : A.data()) total += v;
  const Tape* tp = &tape;
  return tape.record("sum", Tensor::scalar(total), {a.index},
                     [tp, ai = a.index](const Tensor& g, Tape::Grads& grads) {
                       Tensor& dA = Tape::grad_slot(grads, *tp, ai);
                       for (double& v : dA.data()) v += g[0];
                     });
}

Var slice_cols(Var a, std::size_t start, std::size_t width) {
  Tape& tape = common_tape("slice_cols", {a});
  const Tensor& A = tape.value(a);
  if (A.rank() != 2 || width == 0 || start + width > A.cols()) {
    shape_fail("slice_cols", A, "cannot supply columns [" + std::to_string(start) + ", " +
                                    std::to_string(start + width) + ")");
  }
  const std::size_t m = A.rows();
  Tensor out({m, width});
  for (std::size_t i = 0; i < m; ++i) std::copy_n(A.row(i) + start, width, out.row(i));
  const Tape* tp = &tape;
  return tape.record("slice_cols", std::move(out), {a.index},
                     [tp, ai = a.index, start, width, m](const Tensor& g, Tape::Grads& grads) {
                       Tensor& dA = Tape::grad_slot(grads, *tp, ai);
                       for (std::size_t i = 0; i < m; ++i) {
                         K().add(width, dA.row(i) + start, g.row(i), dA.row(i) + start);
                       }
                     });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no operands");
  Tape& tape = *parts.front().tape;
  std::vector<std::uint32_t> inputs;
  std::vector<std::size_t> widths;
  const std::size_t m = tape.value(parts.front()).rows();
  std::size_t total = 0;
  for (Var p : parts) {
    if (p.tape != &tape) throw TapeError("concat_cols: operands live on different tapes");
    const Tensor& P = tape.value(p);
    if (P.rows() != m) shape_fail("concat_cols", tape.value(parts.front()), P);
    inputs.push_back(p.index);
    widths.push_back(P.cols());
    total += P.cols();
  }
  Tensor out({m, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& P = tape.value(parts[k]);
    for (std::size_t i = 0; i < m; ++i) std::copy_n(P.row(i), widths[k], out.row(i) + offset);
    offset += widths[k];
  }
  const Tape* tp = &tape;
  return tape.record("concat_cols", std::move(out), inputs,
                     [tp, inputs, widths, m](const Tensor& g, Tape::Grads& grads) {
                       std::size_t offset = 0;
                       for (std::size_t k = 0; k < inputs.size(); ++k) {
                         if (tp->requires_grad_at(inputs[k])) {
                           Tensor& dP = Tape::grad_slot(grads, *tp, inputs[k]);
                           for (std::size_t i = 0; i < m; ++i) {
                             K().add(widths[k], dP.row(i), g.row(i) + offset, dP.row(i));
                           }
                         }
                         offset += widths[k];
                       }
                     });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no operands");
  Tape& tape = *parts.front().tape;
  std::vector<std::uint32_t> inputs;
  std::vector<std::size_t> heights;
  const std::size_t n = tape.value(parts.front()).cols();
  std::size_t total = 0;
  for (Var p : parts) {
    if (p.tape != &tape) throw TapeError("concat_rows: operands live on different tapes");
    const Tensor& P = tape.value(p);
    if (P.cols() != n) shape_fail("concat_rows", tape.value(parts.front()), P);
    inputs.push_back(p.index);
    heights.push_back(P.rows());
    total += P.rows();
  }
  Tensor out({total, n});
  std::size_t offset = 0;
  for (Var p : parts) {
    const Tensor& P = tape.value(p);
    std::copy(P.data().begin(), P.data().end(), out.row(offset));
    offset += P.rows();
  }
  const Tape* tp = &tape;
  return tape.record("concat_rows", std::move(out), inputs,
                     [tp, inputs, heights, n](const Tensor& g, Tape::Grads& grads) {
                       std::size_t offset = 0;
                       for (std::size_t k = 0; k < inputs.size(); ++k) {
                         if (tp->requires_grad_at(inputs[k])) {
                           Tensor& dP = Tape::grad_slot(grads, *tp, inputs[k]);
                           K().add(heights[k] * n, dP.data().data(), g.row(offset),
                                   dP.data().data());
                         }
                         offset += heights[k];
                       }
                     });
}

std::vector<Tensor> finite_diff_grad(
    const std::function<double(const std::vector<Tensor>&)>& loss_fn,
    std::vector<Tensor>& params, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("finite_diff_grad: epsilon must be > 0");
  std::vector<Tensor> grads;
  grads.reserve(params.size());
  for (Tensor& p : params) {
    Tensor g(p.shape());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double original = p[i];
      p[i] = original + epsilon;
      const double up = loss_fn(params);
      p[i] = original - epsilon;
      const double down = loss_fn(params);
      p[i] = original;
      g[i] = (up - down) / (2.0 * epsilon);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

}  // namespace hoplab::num
