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

#include "kgad/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "kgad/error.hpp"
#include "kgad/params.hpp"

namespace kgad {

namespace {

thread_local double sigmoid_grad_factor = 1.0;

using ArrayR = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_same_tape(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape) throw Error("operands live on different tapes");
}

std::string shape_pair(const Tensor& a, const Tensor& b) {
  return shape_string(a) + " and " + shape_string(b);
}

enum class Broadcast { kSame, kRow, kCol, kScalar };

Broadcast broadcast_kind(std::string_view op, const Tensor& a, const Tensor& b) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return Broadcast::kSame;
  if (b.rows() == 1 && b.cols() == 1) return Broadcast::kScalar;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::kRow;
  if (b.cols() == 1 && b.rows() == a.rows()) return Broadcast::kCol;
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_pair(a, b));
}

// Reduces a full-shape gradient back to b's broadcast shape.
Tensor reduce(const Tensor& g, Broadcast kind) {
  switch (kind) {
    case Broadcast::kSame:
      return g;
    case Broadcast::kScalar:
      return Tensor::Constant(1, 1, g.sum());
    case Broadcast::kRow:
      return g.colwise().sum();
    case Broadcast::kCol:
      return g.rowwise().sum();
  }
  return g;
}

}  // namespace

std::string shape_string(const Tensor& t) {
  return "[" + std::to_string(t.rows()) + ", " + std::to_string(t.cols()) + "]";
}

const Tensor& Var::value() const { return tape->value(*this); }

double Var::scalar() const {
  const Tensor& v = value();
  if (v.size() != 1) throw ShapeError("scalar() on tensor of shape " + shape_string(v));
  return v(0, 0);
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::variable(Tensor value) {
  Var v = constant(std::move(value));
  nodes_.back().requires_grad = true;
  return v;
}

Var Tape::param(ParamStore& store, const std::string& name) {
  Var v = variable(store.at(name).value);
  nodes_.back().store = &store;
  nodes_.back().param_name = name;
  return v;
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (!n.has_grad) return Tensor::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Tensor& Tape::grad_buffer(std::uint32_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor::Zero(n.value.rows(), n.value.cols());
    n.has_grad = true;
  }
  return n.grad;
}

Var Tape::record(std::string_view op, Tensor value, std::initializer_list<Var> inputs,
                 BackwardFn backward) {
  return record(op, std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(backward));
}

Var Tape::record(std::string_view op, Tensor value, std::span<const Var> inputs,
                 BackwardFn backward) {
  // Any NaN or infinity propagates into the sum.
  if (!std::isfinite(value.sum())) {
    throw NonFiniteError(std::string(op) + " produced a non-finite value");
  }
  Node n;
  n.value = std::move(value);
  for (Var in : inputs) {
    if (in.tape != this) throw Error(std::string(op) + ": input from another tape");
    n.requires_grad = n.requires_grad || nodes_[in.id].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw Error("backward: loss belongs to another tape");
  const Tensor& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ShapeError("backward: loss must be scalar, got shape " + shape_string(lv));
  }
  for (Node& n : nodes_) {
    n.has_grad = false;
    n.grad.resize(0, 0);
  }
  if (!nodes_[loss.id].requires_grad) return;
  accumulate(loss.id, Tensor::Ones(1, 1));
  for (std::uint32_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.has_grad && n.backward) n.backward(*this, id);
  }
  for (Node& n : nodes_) {
    if (n.store != nullptr && n.has_grad) n.store->at(n.param_name).grad += n.grad;
  }
}

// ---------------------------------------------------------------------------

Var matmul(Var a, Var b) {
  check_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) throw ShapeError("matmul: incompatible shapes " + shape_pair(av, bv));
  Tensor out;
  out.noalias() = av * bv;
  return a.tape->record("matmul", std::move(out), {a, b}, [ai = a.id, bi = b.id](Tape& t, std::uint32_t self) {
    const Tensor& g = t.out_grad(self);
    if (t.needs_grad(ai)) t.accumulate(ai, g * t.value(bi).transpose());
    if (t.needs_grad(bi)) t.accumulate(bi, t.value(ai).transpose() * g);
  });
}

namespace {

enum class BinaryOp { kAdd, kSub, kMul };

// out = a (op) b with b broadcast to a's shape.
Tensor apply_binary(BinaryOp op, const Tensor& a, const Tensor& b, Broadcast kind) {
  Tensor out = a;
  auto combine = [op](auto&& lhs, auto&& rhs) {
    switch (op) {
      case BinaryOp::kAdd: lhs += rhs; break;
      case BinaryOp::kSub: lhs -= rhs; break;
      case BinaryOp::kMul: lhs *= rhs; break;
    }
  };
  switch (kind) {
    case Broadcast::kSame:
      combine(out.array(), b.array());
      break;
    case Broadcast::kScalar:
      combine(out.array(), b(0, 0));
      break;
    case Broadcast::kRow:
      combine(out.array().rowwise(), b.array().row(0));
      break;
    case Broadcast::kCol:
      combine(out.array().colwise(), b.array().col(0));
      break;
  }
  return out;
}

Var binary(std::string_view name, BinaryOp op, Var a, Var b) {
  check_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const Broadcast kind = broadcast_kind(name, av, bv);
  Tensor out = apply_binary(op, av, bv, kind);
  return a.tape->record(name, std::move(out), {a, b}, [ai = a.id, bi = b.id, kind, op](Tape& t, std::uint32_t self) {
    const Tensor& g = t.out_grad(self);
    if (op != BinaryOp::kMul) {
      t.accumulate(ai, g);
      if (!t.needs_grad(bi)) return;
      if (op == BinaryOp::kAdd) {
        t.accumulate(bi, reduce(g, kind));
      } else {
        t.accumulate(bi, -reduce(g, kind));
      }
      return;
    }
    const Tensor& av = t.value(ai);
    const Tensor& bv = t.value(bi);
    if (t.needs_grad(ai)) t.accumulate(ai, apply_binary(BinaryOp::kMul, g, bv, kind));
    if (t.needs_grad(bi)) t.accumulate(bi, reduce(g.cwiseProduct(av), kind));
  });
}

}  // namespace

Var add(Var a, Var b) { return binary("add", BinaryOp::kAdd, a, b); }

Var sub(Var a, Var b) { return binary("sub", BinaryOp::kSub, a, b); }

Var mul(Var a, Var b) { return binary("mul", BinaryOp::kMul, a, b); }

Var scale(Var a, double factor) {
  Tensor out = a.value() * factor;
  return a.tape->record("scale", std::move(out), {a}, [ai = a.id, factor](Tape& t, std::uint32_t self) {
    t.accumulate(ai, t.out_grad(self) * factor);
  });
}

Var add_scalar(Var a, double offset) {
  Tensor out = a.value().array() + offset;
  return a.tape->record("add_scalar", std::move(out), {a}, [ai = a.id](Tape& t, std::uint32_t self) {
    t.accumulate(ai, t.out_grad(self));
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no operands");
  Tape* tape = parts.front().tape;
  const Index rows = parts.front().rows();
  Index cols = 0;
  for (Var p : parts) {
    check_same_tape(parts.front(), p);
    if (p.rows() != rows) {
      throw ShapeError("concat_cols: row mismatch " + shape_pair(parts.front().value(), p.value()));
    }
    cols += p.cols();
  }
  Tensor out(rows, cols);
  std::vector<std::uint32_t> ids;
  std::vector<Index> offsets;
  Index c = 0;
  for (Var p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    ids.push_back(p.id);
    offsets.push_back(c);
    c += p.cols();
  }
  return tape->record("concat_cols", std::move(out), parts, [ids, offsets](Tape& t, std::uint32_t self) {
    const Tensor& g = t.out_grad(self);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (t.needs_grad(ids[i])) t.accumulate(ids[i], g.middleCols(offsets[i], t.value(ids[i]).cols()));
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no operands");
  Tape* tape = parts.front().tape;
  const Index cols = parts.front().cols();
  Index rows = 0;
  for (Var p : parts) {
    check_same_tape(parts.front(), p);
    if (p.cols() != cols) {
      throw ShapeError("concat_rows: column mismatch " + shape_pair(parts.front().value(), p.value()));
    }
    rows += p.rows();
  }
  Tensor out(rows, cols);
  std::vector<std::uint32_t> ids;
  std::vector<Index> offsets;
  Index r = 0;
  for (Var p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    ids.push_back(p.id);
    offsets.push_back(r);
    r += p.rows();
  }
  return tape->record("concat_rows", std::move(out), parts, [ids, offsets](Tape& t, std::uint32_t self) {
    const Tensor& g = t.out_grad(self);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (t.needs_grad(ids[i])) t.accumulate(ids[i], g.middleRows(offsets[i], t.value(ids[i]).rows()));
    }
  });
}

Var slice_cols(Var a, Index start, Index count) {
  const Tensor& av = a.value();
  if (start < 0 || count < 0 || start + count > av.cols()) {
    throw ShapeError("slice_cols: [" + std::to_string(start) + ", +" + std::to_string(count) +
                     ") out of range for " + shape_string(av));
  }
  Tensor out = av.middleCols(start, count);
  return a.tape->record("slice_cols", std::move(out), {a}, [ai = a.id, start, count](Tape& t, std::uint32_t self) {
    t.grad_buffer(ai).middleCols(start, count) += t.out_grad(self);
  });
}

Var slice_rows(Var a, Index start, Index count) {
  const Tensor& av = a.value();
  if (start < 0 || count < 0 || start + count > av.rows()) {
    throw ShapeError("slice_rows: [" + std::to_string(start) + ", +" + std::to_string(count) +
                     ") out of range for " + shape_string(av));
  }
  Tensor out = av.middleRows(start, count);
  return a.tape->record("slice_rows", std::move(out), {a}, [ai = a.id, start, count](Tape& t, std::uint32_t self) {
    t.grad_buffer(ai).middleRows(start, count) += t.out_grad(self);
  });
}

Var gather_rows(Var a, std::span<const Index> rows) {
  const Tensor& av = a.value();
  Tensor out(static_cast<Index>(rows.size()), av.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= av.rows()) {
      throw ShapeError("gather_rows: row " + std::to_string(rows[i]) + " out of range for " +
                       shape_string(av));
    }
    out.row(static_cast<Index>(i)) = av.row(rows[i]);
  }
  std::vector<Index> idx(rows.begin(), rows.end());
  return a.tape->record("gather_rows", std::move(out), {a}, [ai = a.id, idx = std::move(idx)](Tape& t, std::uint32_t self) {
    if (!t.needs_grad(ai)) return;
    const Tensor& g = t.out_grad(self);
    Tensor& ga = t.grad_buffer(ai);
    for (std::size_t i = 0; i < idx.size(); ++i) ga.row(idx[i]) += g.row(static_cast<Index>(i));
  });
}

Var gather_concat_cols(std::span<const GatherPart> parts) {
  if (parts.empty()) throw ShapeError("gather_concat_cols: no operands");
  Tape* tape = parts.front().source.tape;
  auto part_rows = [](const GatherPart& p) {
    return p.rows.empty() ? p.source.rows() : static_cast<Index>(p.rows.size());
  };
  const Index rows = part_rows(parts.front());
  Index cols = 0;
  std::vector<Var> inputs;
  for (const GatherPart& p : parts) {
    check_same_tape(parts.front().source, p.source);
    if (part_rows(p) != rows) throw ShapeError("gather_concat_cols: parts disagree on the row count");
    for (Index r : p.rows) {
      if (r < 0 || r >= p.source.rows()) throw ShapeError("gather_concat_cols: row out of range");
    }
    cols += p.source.cols();
    inputs.push_back(p.source);
  }
  struct Piece {
    std::uint32_t id;
    Index offset, width;
    std::vector<Index> rows;
  };
  std::vector<Piece> pieces;
  Tensor out(rows, cols);
  Index c = 0;
  for (const GatherPart& p : parts) {
    const Tensor& v = p.source.value();
    if (p.rows.empty()) {
      out.middleCols(c, v.cols()) = v;
    } else {
      for (Index i = 0; i < rows; ++i) out.row(i).segment(c, v.cols()) = v.row(p.rows[static_cast<std::size_t>(i)]);
    }
    pieces.push_back({p.source.id, c, v.cols(), std::vector<Index>(p.rows.begin(), p.rows.end())});
    c += v.cols();
  }
  return tape->record("gather_concat_cols", std::move(out), inputs, [pieces = std::move(pieces)](Tape& t, std::uint32_t self) {
    const Tensor& g = t.out_grad(self);
    for (const Piece& p : pieces) {
      if (!t.needs_grad(p.id)) continue;
      if (p.rows.empty()) {
        t.accumulate(p.id, g.middleCols(p.offset, p.width));
        continue;
      }
      Tensor& ga = t.grad_buffer(p.id);
      for (std::size_t i = 0; i < p.rows.size(); ++i) {
        ga.row(p.rows[i]) += g.row(static_cast<Index>(i)).segment(p.offset, p.width);
      }
    }
  });
}

Var sigmoid(Var a) {
  Tensor out = (1.0 + (-a.value().array()).exp()).inverse().matrix();
  return a.tape->record("sigmoid", std::move(out), {a}, [ai = a.id](Tape& t, std::uint32_t self) {
    const auto y = t.value(self).array();
    const Tensor g = (t.out_grad(self).array() * y * (1.0 - y)).matrix() * sigmoid_grad_factor;
    t.accumulate(ai, g);
  });
}

Var tanh(Var a) {
  Tensor out = a.value().array().tanh().matrix();
  return a.tape->record("tanh", std::move(out), {a}, [ai = a.id](Tape& t, std::uint32_t self) {
    const auto y = t.value(self).array();
    t.accumulate(ai, (t.out_grad(self).array() * (1.0 - y.square())).matrix());
  });
}

Var relu(Var a) {
  Tensor out = a.value().cwiseMax(0.0);
  return a.tape->record("relu", std::move(out), {a}, [ai = a.id](Tape& t, std::uint32_t self) {
    const auto x = t.value(ai).array();
    t.accumulate(ai, (x > 0.0).select(t.out_grad(self).array(), 0.0).matrix());
  });
}

Var exp(Var a) {
  Tensor out = a.value().array().exp().matrix();
  return a.tape->record("exp", std::move(out), {a}, [ai = a.id](Tape& t, std::uint32_t self) {
    t.accumulate(ai, t.out_grad(self).cwiseProduct(t.value(self)));
  });
}

Var log(Var a) {
  if ((a.value().array() <= 0.0).any()) throw NonFiniteError("log of a non-positive value");
  Tensor out = a.value().array().log().matrix();
  return a.tape->record("log", std::move(out), {a}, [ai = a.id](Tape& t, std::uint32_t self) {
    t.accumulate(ai, t.out_grad(self).cwiseQuotient(t.value(ai)));
  });
}

Var softmax(Var a, int axis) {
  if (axis != 0 && axis != 1) throw ShapeError("softmax: axis must be 0 or 1");
  const Tensor& av = a.value();
  Tensor out(av.rows(), av.cols());
  if (axis == 1) {
    for (Index r = 0; r < av.rows(); ++r) {
      const ArrayR e = (av.row(r).array() - av.row(r).maxCoeff()).exp();
      out.row(r) = (e / e.sum()).matrix();
    }
  } else {
    for (Index c = 0; c < av.cols(); ++c) {
      const ArrayR e = (av.col(c).array() - av.col(c).maxCoeff()).exp();
      out.col(c) = (e / e.sum()).matrix();
    }
  }
  return a.tape->record("softmax", std::move(out), {a}, [ai = a.id, axis](Tape& t, std::uint32_t self) {
    const Tensor& y = t.value(self);
    const Tensor& g = t.out_grad(self);
    Tensor gy = g.cwiseProduct(y);
    Tensor dx(y.rows(), y.cols());
    if (axis == 1) {
      Eigen::VectorXd s = gy.rowwise().sum();
      dx = gy - (y.array().colwise() * s.array()).matrix();
    } else {
      Eigen::RowVectorXd s = gy.colwise().sum();
      dx = gy - (y.array().rowwise() * s.array()).matrix();
    }
    t.accumulate(ai, dx);
  });
}

Var l2_norm(Var a) {
  Tensor out = a.value().rowwise().norm();
  return a.tape->record("l2_norm", std::move(out), {a}, [ai = a.id](Tape& t, std::uint32_t self) {
    const Tensor& x = t.value(ai);
    const Tensor& n = t.value(self);
    const Tensor& g = t.out_grad(self);
    Tensor dx(x.rows(), x.cols());
    for (Index r = 0; r < x.rows(); ++r) {
      // The norm is not differentiable at 0; the subgradient 0 is used there.
      dx.row(r) = n(r, 0) > 0.0 ? Eigen::RowVectorXd(x.row(r) * (g(r, 0) / n(r, 0)))
                                : Eigen::RowVectorXd::Zero(x.cols());
    }
    t.accumulate(ai, dx);
  });
}

Var dot(Var a, Var b) {
  check_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) {
    throw ShapeError("dot: shape mismatch " + shape_pair(av, bv));
  }
  Tensor out = av.cwiseProduct(bv).rowwise().sum();
  return a.tape->record("dot", std::move(out), {a, b}, [ai = a.id, bi = b.id](Tape& t, std::uint32_t self) {
    const Tensor& g = t.out_grad(self);
    if (t.needs_grad(ai)) t.accumulate(ai, (t.value(bi).array().colwise() * g.col(0).array()).matrix());
    if (t.needs_grad(bi)) t.accumulate(bi, (t.value(ai).array().colwise() * g.col(0).array()).matrix());
  });
}

Var sum(Var a) {
  Tensor out = Tensor::Constant(1, 1, a.value().sum());
  return a.tape->record("sum", std::move(out), {a}, [ai = a.id](Tape& t, std::uint32_t self) {
    const Tensor& x = t.value(ai);
    t.accumulate(ai, Tensor::Constant(x.rows(), x.cols(), t.out_grad(self)(0, 0)));
  });
}

Var mean(Var a) {
  const Tensor& av = a.value();
  if (av.size() == 0) throw ShapeError("mean of an empty tensor");
  Tensor out = Tensor::Constant(1, 1, av.mean());
  return a.tape->record("mean", std::move(out), {a}, [ai = a.id](Tape& t, std::uint32_t self) {
    const Tensor& x = t.value(ai);
    const double g = t.out_grad(self)(0, 0) / static_cast<double>(x.size());
    t.accumulate(ai, Tensor::Constant(x.rows(), x.cols(), g));
  });
}

namespace {

// Logistic and hyperbolic tangent through the vectorised exp.
template <typename Derived>
ArrayR sigmoid_of(const Eigen::ArrayBase<Derived>& x) {
  return (1.0 + (-x).exp()).inverse();
}

template <typename Derived>
ArrayR tanh_of(const Eigen::ArrayBase<Derived>& x) {
  return 2.0 * (1.0 + (-2.0 * x).exp()).inverse() - 1.0;
}

void check_gates(std::string_view op, const Tensor& pre, const Tensor& state) {
  if (pre.cols() % 4 != 0 || pre.cols() / 4 != state.cols() || pre.rows() != state.rows()) {
    throw ShapeError(std::string(op) + ": incompatible shapes " + shape_pair(pre, state));
  }
}

}  // namespace

Var lstm_cell_state(Var pre, std::optional<Var> c_prev) {
  const Tensor& pv = pre.value();
  if (pv.cols() % 4 != 0) throw ShapeError("lstm_cell_state: gate width " + shape_string(pv));
  const Index h = pv.cols() / 4;
  const ArrayR si = sigmoid_of(pv.middleCols(0, h).array());
  const ArrayR tg = tanh_of(pv.middleCols(2 * h, h).array());
  ArrayR c = si * tg;
  std::vector<Var> inputs = {pre};
  if (c_prev) {
    check_same_tape(pre, *c_prev);
    check_gates("lstm_cell_state", pv, c_prev->value());
    c += sigmoid_of(pv.middleCols(h, h).array()) * c_prev->value().array();
    inputs.push_back(*c_prev);
  }
  const std::uint32_t ci = c_prev ? c_prev->id : 0;
  const bool has_prev = c_prev.has_value();
  return pre.tape->record("lstm_cell_state", Tensor(c.matrix()), inputs,
                          [pi = pre.id, ci, has_prev, h](Tape& t, std::uint32_t self) {
    const auto g = t.out_grad(self).array();
    const Tensor& pv = t.value(pi);
    const ArrayR si = sigmoid_of(pv.middleCols(0, h).array());
    const ArrayR tg = tanh_of(pv.middleCols(2 * h, h).array());
    if (t.needs_grad(pi)) {
      Tensor& gp = t.grad_buffer(pi);
      gp.middleCols(0, h).array() += g * tg * si * (1.0 - si) * sigmoid_grad_factor;
      gp.middleCols(2 * h, h).array() += g * si * (1.0 - tg.square());
      if (has_prev) {
        const ArrayR sf = sigmoid_of(pv.middleCols(h, h).array());
        gp.middleCols(h, h).array() += g * t.value(ci).array() * sf * (1.0 - sf) * sigmoid_grad_factor;
      }
    }
    if (has_prev && t.needs_grad(ci)) {
      t.accumulate(ci, (g * sigmoid_of(pv.middleCols(h, h).array())).matrix());
    }
  });
}

Var lstm_hidden(Var pre, Var c) {
  check_same_tape(pre, c);
  const Tensor& pv = pre.value();
  check_gates("lstm_hidden", pv, c.value());
  const Index h = c.cols();
  Tensor out = (sigmoid_of(pv.middleCols(3 * h, h).array()) * tanh_of(c.value().array())).matrix();
  return pre.tape->record("lstm_hidden", std::move(out), {pre, c}, [pi = pre.id, ci = c.id, h](Tape& t, std::uint32_t self) {
    const auto g = t.out_grad(self).array();
    const ArrayR so = sigmoid_of(t.value(pi).middleCols(3 * h, h).array());
    const ArrayR tc = tanh_of(t.value(ci).array());
    if (t.needs_grad(pi)) {
      t.grad_buffer(pi).middleCols(3 * h, h).array() += g * tc * so * (1.0 - so) * sigmoid_grad_factor;
    }
    if (t.needs_grad(ci)) t.accumulate(ci, (g * so * (1.0 - tc.square())).matrix());
  });
}

Var lstm_gathered_step(Var x, std::span<const Index> x_rows, Var r, Var c_prev,
                       std::span<const Index> r_rows) {
  check_same_tape(x, r);
  check_same_tape(x, c_prev);
  const Tensor& xv = x.value();
  const Tensor& rv = r.value();
  const Tensor& cv = c_prev.value();
  if (xv.cols() != rv.cols() || xv.cols() % 4 != 0) {
    throw ShapeError("lstm_gathered_step: gate widths " + shape_pair(xv, rv));
  }
  check_gates("lstm_gathered_step", rv, cv);
  if (x_rows.size() != r_rows.size()) throw ShapeError("lstm_gathered_step: index lists differ in length");
  for (std::size_t i = 0; i < x_rows.size(); ++i) {
    if (x_rows[i] < 0 || x_rows[i] >= xv.rows() || r_rows[i] < 0 || r_rows[i] >= rv.rows()) {
      throw ShapeError("lstm_gathered_step: row out of range");
    }
  }
  const Index h = cv.cols();
  const auto n = static_cast<Index>(x_rows.size());

  // Gates of rows [start, start + len), recomputed in the backward pass.
  struct Gates {
    ArrayR i, f, g, o, c_prev, tanh_c;
  };
  auto gates = [h](const Tensor& xv, const Tensor& rv, const Tensor& cv, const Index* xr, const Index* rr,
                   Index len) {
    ArrayR pre(len, 4 * h), cp(len, h);
    for (Index k = 0; k < len; ++k) {
      pre.row(k) = xv.row(xr[k]).array() + rv.row(rr[k]).array();
      cp.row(k) = cv.row(rr[k]).array();
    }
    Gates gt;
    gt.i = sigmoid_of(pre.leftCols(h));
    gt.f = sigmoid_of(pre.middleCols(h, h));
    gt.g = tanh_of(pre.middleCols(2 * h, h));
    gt.o = sigmoid_of(pre.rightCols(h));
    gt.tanh_c = tanh_of(gt.i * gt.g + gt.f * cp);
    gt.c_prev = std::move(cp);
    return gt;
  };

  static constexpr Index kBlock = 256;
  Tensor out(n, h);
  for (Index s = 0; s < n; s += kBlock) {
    const Index len = std::min(kBlock, n - s);
    const Gates gt = gates(xv, rv, cv, x_rows.data() + s, r_rows.data() + s, len);
    out.middleRows(s, len) = (gt.o * gt.tanh_c).matrix();
  }

  std::vector<Index> xr(x_rows.begin(), x_rows.end()), rr(r_rows.begin(), r_rows.end());
  return x.tape->record("lstm_gathered_step", std::move(out), {x, r, c_prev},
                        [xi = x.id, ri = r.id, ci = c_prev.id, xr = std::move(xr), rr = std::move(rr), h, gates](
                            Tape& t, std::uint32_t self) {
    const Tensor& gh = t.out_grad(self);
    const Tensor& xv = t.value(xi);
    const Tensor& rv = t.value(ri);
    const Tensor& cv = t.value(ci);
    Tensor* gx = t.needs_grad(xi) ? &t.grad_buffer(xi) : nullptr;
    Tensor* gr = t.needs_grad(ri) ? &t.grad_buffer(ri) : nullptr;
    Tensor* gc = t.needs_grad(ci) ? &t.grad_buffer(ci) : nullptr;
    const auto n = static_cast<Index>(xr.size());
    const double fault = sigmoid_grad_factor;
    for (Index s = 0; s < n; s += kBlock) {
      const Index len = std::min(kBlock, n - s);
      const Gates gt = gates(xv, rv, cv, xr.data() + s, rr.data() + s, len);
      const auto g = gh.middleRows(s, len).array();
      const ArrayR dc = g * gt.o * (1.0 - gt.tanh_c.square());
      ArrayR dpre(len, 4 * h);
      dpre.leftCols(h) = dc * gt.g * gt.i * (1.0 - gt.i) * fault;
      dpre.middleCols(h, h) = dc * gt.c_prev * gt.f * (1.0 - gt.f) * fault;
      dpre.middleCols(2 * h, h) = dc * gt.i * (1.0 - gt.g.square());
      dpre.rightCols(h) = g * gt.tanh_c * gt.o * (1.0 - gt.o) * fault;
      for (Index k = 0; k < len; ++k) {
        const auto xrow = xr[static_cast<std::size_t>(s + k)];
        const auto rrow = rr[static_cast<std::size_t>(s + k)];
        if (gx != nullptr) gx->row(xrow).array() += dpre.row(k);
        if (gr != nullptr) gr->row(rrow).array() += dpre.row(k);
        if (gc != nullptr) gc->row(rrow).array() += dc.row(k) * gt.f.row(k);
      }
    }
  });
}

Var attend(Var anchors, Var table, std::span<const Index> neighbor_rows, Index m, Tensor* weights_out) {
  check_same_tape(anchors, table);
  const Tensor& av = anchors.value();
  const Tensor& tv = table.value();
  if (m < 1) throw ShapeError("attend: neighbor count must be at least 1");
  if (av.cols() != tv.cols()) throw ShapeError("attend: width mismatch " + shape_pair(av, tv));
  const Index batch = av.rows();
  if (static_cast<Index>(neighbor_rows.size()) != batch * m) {
    throw ShapeError("attend: expected " + std::to_string(batch * m) + " neighbor rows, got " +
                     std::to_string(neighbor_rows.size()));
  }
  for (Index r : neighbor_rows) {
    if (r < 0 || r >= tv.rows()) throw ShapeError("attend: neighbor row out of range");
  }

  Tensor weights(batch, m);
  Tensor out(batch, av.cols());
  for (Index b = 0; b < batch; ++b) {
    const Index* nb = neighbor_rows.data() + b * m;
    for (Index j = 0; j < m; ++j) weights(b, j) = av.row(b).dot(tv.row(nb[j]));
    const double top = weights.row(b).maxCoeff();
    weights.row(b) = (weights.row(b).array() - top).exp().matrix();
    weights.row(b) /= weights.row(b).sum();
    out.row(b).setZero();
    for (Index j = 0; j < m; ++j) out.row(b) += weights(b, j) * tv.row(nb[j]);
  }
  if (weights_out != nullptr) *weights_out = weights;

  std::vector<Index> idx(neighbor_rows.begin(), neighbor_rows.end());
  return anchors.tape->record(
      "attend", std::move(out), {anchors, table},
      [ai = anchors.id, ti = table.id, idx = std::move(idx), weights = std::move(weights), m](Tape& t, std::uint32_t self) {
        const Tensor& g = t.out_grad(self);
        const Tensor& av = t.value(ai);
        const Tensor& tv = t.value(ti);
        const Index batch = av.rows();
        const bool need_a = t.needs_grad(ai);
        const bool need_t = t.needs_grad(ti);
        Tensor da = Tensor::Zero(batch, av.cols());
        Tensor* dt = need_t ? &t.grad_buffer(ti) : nullptr;
        Eigen::RowVectorXd dw(m);
        for (Index b = 0; b < batch; ++b) {
          const Index* nb = idx.data() + b * m;
          for (Index j = 0; j < m; ++j) dw(j) = g.row(b).dot(tv.row(nb[j]));
          const double centre = weights.row(b).dot(dw);
          for (Index j = 0; j < m; ++j) {
            const double w = weights(b, j);
            const double ds = w * (dw(j) - centre);
            if (need_a) da.row(b) += ds * tv.row(nb[j]);
            if (dt != nullptr) dt->row(nb[j]) += w * g.row(b) + ds * av.row(b);
          }
        }
        if (need_a) t.accumulate(ai, da);
      });
}

namespace testing {

ScopedSigmoidGradientFault::ScopedSigmoidGradientFault(double factor) : previous_(sigmoid_grad_factor) {
  sigmoid_grad_factor = factor;
}

ScopedSigmoidGradientFault::~ScopedSigmoidGradientFault() { sigmoid_grad_factor = previous_; }

}  // namespace testing

void tune_allocator() {
#ifdef __GLIBC__
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

}  // namespace kgad
