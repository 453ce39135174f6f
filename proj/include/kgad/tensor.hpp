/*
 * Copyright 2026 The kgad Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace kgad {

/// Dense row-major matrix of scalars.
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Every differentiable value is a rank-2 tensor of doubles; vectors are 1 x n rows.
using Tensor = MatrixX<double>;
using Index = Eigen::Index;

inline std::vector<Index> shape_of(const Tensor& t) { return {t.rows(), t.cols()}; }
std::string shape_string(const Tensor& t);

class ParamStore;
class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid as long as its tape lives.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  /// Value of a 1 x 1 node.
  double scalar() const;
};

/// Linear record of executed operations for reverse-mode differentiation.
///
/// Nodes are appended in execution order; `backward` walks them in exact
/// reverse, so every node's gradient is complete before it propagates.
/// Parameter leaves created with `param` flush their gradient into the
/// ParamStore accumulator at the end of `backward`.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::uint32_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);
  Var param(ParamStore& store, const std::string& name);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  /// Gradient of the last backward pass (zeros when none reached the node).
  Tensor grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Seeds d(loss)/d(loss) = 1 and propagates. `loss` must be 1 x 1.
  void backward(Var loss);

  /// Appends an op node. The value is checked for NaN/Inf.
  Var record(std::string_view op, Tensor value, std::initializer_list<Var> inputs,
             BackwardFn backward);
  Var record(std::string_view op, Tensor value, std::span<const Var> inputs, BackwardFn backward);

  // Used by op backward functions.
  const Tensor& value(std::uint32_t id) const { return nodes_[id].value; }
  const Tensor& out_grad(std::uint32_t id) const { return nodes_[id].grad; }
  bool needs_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }
  /// Adds `g` to the gradient of node `id` (allocating it on first use).
  template <typename Derived>
  void accumulate(std::uint32_t id, const Eigen::MatrixBase<Derived>& g);
  /// Mutable gradient buffer of `id`, zero-initialised on first use.
  Tensor& grad_buffer(std::uint32_t id);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn backward;
    ParamStore* store = nullptr;
    std::string param_name;
  };
  std::vector<Node> nodes_;
};

template <typename Derived>
void Tape::accumulate(std::uint32_t id, const Eigen::MatrixBase<Derived>& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
  } else {
    n.grad += g;
  }
}

// ---------------------------------------------------------------------------
// Differentiable operations. Binary elementwise ops accept a right operand of
// the same shape, a 1 x c row (broadcast over rows), an r x 1 column
// (broadcast over columns) or a 1 x 1 scalar.
// ---------------------------------------------------------------------------

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);

Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(Var a, Index start, Index count);
Var slice_rows(Var a, Index start, Index count);
/// Row i of the result is row `rows[i]` of `a`.
Var gather_rows(Var a, std::span<const Index> rows);

/// One operand of gather_concat_cols: `rows` selects source rows (empty
/// means every row, in order).
struct GatherPart {
  Var source;
  std::span<const Index> rows;
};
/// Column-wise concatenation of row gathers, in one pass.
Var gather_concat_cols(std::span<const GatherPart> parts);

Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var exp(Var a);
Var log(Var a);

/// axis 0: each column is normalised; axis 1: each row is normalised.
Var softmax(Var a, int axis);
/// Row-wise Euclidean norm, r x 1.
Var l2_norm(Var a);
/// Row-wise dot product of equal-shape operands, r x 1.
Var dot(Var a, Var b);
Var sum(Var a);
Var mean(Var a);

/// LSTM cell state from gate pre-activations `pre` = [i f g o] (rows x 4h):
/// sigmoid(i) * tanh(g) + sigmoid(f) * c_prev, the forget term dropped when
/// there is no previous state.
Var lstm_cell_state(Var pre, std::optional<Var> c_prev);
/// LSTM hidden state sigmoid(o) * tanh(c).
Var lstm_hidden(Var pre, Var c);
/// Hidden state of an LSTM step whose row i has pre-activation
/// x[x_rows[i]] + r[r_rows[i]] and previous cell state c_prev[r_rows[i]].
/// The cell state is not returned.
Var lstm_gathered_step(Var x, std::span<const Index> x_rows, Var r, Var c_prev,
                       std::span<const Index> r_rows);

/// Dot-product attention over fixed-width neighbor lists.
///
/// For anchor row b the neighbors are rows `neighbor_rows[b*m .. b*m+m)` of
/// `table`; scores are a_b . v_j, weights softmax over j, and the output row
/// is sum_j w_bj v_j. When `weights_out` is given it receives the B x m
/// attention weights.
Var attend(Var anchors, Var table, std::span<const Index> neighbor_rows, Index m,
           Tensor* weights_out = nullptr);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator*(double s, Var a) { return scale(a, s); }
inline Var operator*(Var a, double s) { return scale(a, s); }
inline Var operator+(Var a, double s) { return add_scalar(a, s); }

namespace testing {

/// While alive, sigmoid backward multiplies its gradient by `factor`.
/// Exists only to prove the gradient checker catches a broken gate derivative.
class ScopedSigmoidGradientFault {
 public:
  explicit ScopedSigmoidGradientFault(double factor);
  ~ScopedSigmoidGradientFault();
  ScopedSigmoidGradientFault(const ScopedSigmoidGradientFault&) = delete;
  ScopedSigmoidGradientFault& operator=(const ScopedSigmoidGradientFault&) = delete;

 private:
  double previous_;
};

}  // namespace testing

/// Keeps freed tape buffers in the heap instead of returning them to the
/// kernel. Large tapes otherwise spend much of their time in mmap/munmap.
void tune_allocator();

}  // namespace kgad
