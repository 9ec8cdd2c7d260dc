// Copyright 2026 The twoblock Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "twoblock/cells.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "twoblock/error.hpp"

namespace twoblock
{

namespace
{

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

// Forward LSTM arithmetic shared by lstm_step and the tape. `x` may be null for D = 0.
void lstm_forward(
  const ParameterStore & store, const LstmParams & p, const Vec * x, const Vec & h, const Vec & c,
  Vec & gates, Vec & c_out, Vec & tanh_c, Vec & h_out)
{
  const Eigen::Index H = p.hidden_dim;
  if (h.size() != H || c.size() != H) {
    throw ShapeError(
      "lstm_step: state has h " + std::to_string(h.size()) + ", c " + std::to_string(c.size()) +
      ", layer hidden " + std::to_string(H));
  }
  const Mat & wh = store[p.w_hidden].value;
  gates = store[p.bias].value.col(0);
  gates.noalias() += wh * h;
  if (p.input_dim > 0) {
    if (x == nullptr || x->size() != p.input_dim) {
      throw ShapeError(
        "lstm_step: input has " + std::to_string(x ? x->size() : 0) + " entries, layer expects " +
        std::to_string(p.input_dim));
    }
    gates.noalias() += store[p.w_input].value * (*x);
  } else if (x != nullptr && x->size() != 0) {
    throw ShapeError("lstm_step: hidden-only layer given a non-empty input");
  }
  for (Eigen::Index k = 0; k < H; ++k) {
    gates[k] = sigmoid(gates[k]);
    gates[H + k] = sigmoid(gates[H + k]);
    gates[2 * H + k] = std::tanh(gates[2 * H + k]);
    gates[3 * H + k] = sigmoid(gates[3 * H + k]);
  }
  c_out = gates.segment(H, H).cwiseProduct(c) + gates.head(H).cwiseProduct(gates.segment(2 * H, H));
  tanh_c = c_out.array().tanh();
  h_out = gates.tail(H).cwiseProduct(tanh_c);
}

}  // namespace

LstmParams LstmParams::create(
  ParameterStore & store, const std::string & prefix, Eigen::Index input_dim,
  Eigen::Index hidden_dim)
{
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.w_input = store.add(prefix + ".w_input", 4 * hidden_dim, input_dim);
  p.w_hidden = store.add(prefix + ".w_hidden", 4 * hidden_dim, hidden_dim);
  p.bias = store.add(prefix + ".bias", 4 * hidden_dim, 1);
  return p;
}

void LstmParams::init(ParameterStore & store, Rng & rng) const
{
  const Eigen::Index fan_in = input_dim + hidden_dim;
  init_uniform(store[w_input].value, fan_in, rng);
  init_uniform(store[w_hidden].value, fan_in, rng);
  Mat & b = store[bias].value;
  b.setZero();
  b.block(hidden_dim, 0, hidden_dim, 1).setOnes();
}

LstmState LstmState::zeros(Eigen::Index hidden_dim)
{
  return LstmState{Vec::Zero(hidden_dim), Vec::Zero(hidden_dim)};
}

LstmState lstm_step(
  const ParameterStore & store, const LstmParams & p, const Vec & x, const LstmState & s)
{
  LstmState next;
  Vec gates;
  Vec tanh_c;
  lstm_forward(store, p, &x, s.h, s.c, gates, next.c, tanh_c, next.h);
  return next;
}

AffineParams AffineParams::create(
  ParameterStore & store, const std::string & prefix, Eigen::Index input_dim,
  Eigen::Index output_dim)
{
  AffineParams p;
  p.input_dim = input_dim;
  p.output_dim = output_dim;
  p.weight = store.add(prefix + ".weight", output_dim, input_dim);
  p.bias = store.add(prefix + ".bias", output_dim, 1);
  return p;
}

void AffineParams::init(ParameterStore & store, Rng & rng) const
{
  init_uniform(store[weight].value, input_dim, rng);
  store[bias].value.setZero();
}

Vec affine_apply(const ParameterStore & store, const AffineParams & p, const Vec & x)
{
  return linear_map(store[p.weight].value, x, store[p.bias].value.col(0), store[p.weight].name);
}

MlpParams MlpParams::create(
  ParameterStore & store, const std::string & prefix, Eigen::Index input_dim,
  Eigen::Index hidden_dim, Eigen::Index output_dim)
{
  MlpParams p;
  if (hidden_dim == 0) {
    p.layers.push_back(AffineParams::create(store, prefix + ".0", input_dim, output_dim));
  } else {
    p.layers.push_back(AffineParams::create(store, prefix + ".0", input_dim, hidden_dim));
    p.layers.push_back(AffineParams::create(store, prefix + ".1", hidden_dim, output_dim));
  }
  return p;
}

void MlpParams::init(ParameterStore & store, Rng & rng) const
{
  for (const auto & layer : layers) {
    layer.init(store, rng);
  }
}

Vec mlp_apply(const ParameterStore & store, const MlpParams & p, const Vec & x)
{
  Vec y = affine_apply(store, p.layers.front(), x);
  for (std::size_t i = 1; i < p.layers.size(); ++i) {
    y = affine_apply(store, p.layers[i], y.array().tanh().matrix());
  }
  return y;
}

Tape::Node Tape::push(Vec value)
{
  values_.push_back(std::move(value));
  grads_.emplace_back();
  return values_.size() - 1;
}

Tape::Node Tape::leaf(Vec value) { return push(std::move(value)); }

std::pair<Tape::Node, Tape::Node> Tape::lstm(
  const LstmParams & p, std::optional<Node> x, Node h, Node c)
{
  LstmOp op{p, x, h, c, 0, 0, Vec(), Vec()};
  Vec c_out;
  Vec h_out;
  lstm_forward(
    *params_, p, x ? &values_.at(*x) : nullptr, values_.at(h), values_.at(c), op.gates, c_out,
    op.tanh_c, h_out);
  op.h_out = push(std::move(h_out));
  op.c_out = push(std::move(c_out));
  const auto result = std::make_pair(op.h_out, op.c_out);
  ops_.emplace_back(std::move(op));
  return result;
}

Tape::Node Tape::affine(const AffineParams & p, Node x)
{
  const Node out = push(affine_apply(*params_, p, values_.at(x)));
  ops_.emplace_back(AffineOp{p, x, out});
  return out;
}

Tape::Node Tape::mlp(const MlpParams & p, Node x)
{
  Node y = affine(p.layers.front(), x);
  for (std::size_t i = 1; i < p.layers.size(); ++i) {
    const Node act = push(values_[y].array().tanh().matrix());
    ops_.emplace_back(TanhOp{y, act});
    y = affine(p.layers[i], act);
  }
  return y;
}

Tape::Node Tape::concat(Node a, Node b)
{
  Vec v(values_.at(a).size() + values_.at(b).size());
  v << values_[a], values_[b];
  const Node out = push(std::move(v));
  ops_.emplace_back(ConcatOp{a, b, out});
  return out;
}

Vec & Tape::grad_slot(Node n)
{
  Vec & g = grads_.at(n);
  if (g.size() != values_[n].size()) {
    g = Vec::Zero(values_[n].size());
  }
  return g;
}

void Tape::add_grad(Node n, const Vec & g)
{
  if (g.size() != values_.at(n).size()) {
    throw ShapeError("Tape::add_grad: adjoint size does not match node");
  }
  grad_slot(n) += g;
}

Vec Tape::grad(Node n) const
{
  const Vec & g = grads_.at(n);
  return g.size() == values_[n].size() ? g : Vec::Zero(values_[n].size());
}

void Tape::backward(ParameterStore & params)
{
  if (&params != params_) {
    throw UsageError("Tape::backward: store differs from the one used in the forward pass");
  }
  if (ops_.empty()) {
    throw UsageError("Tape::backward: no forward operations were recorded");
  }
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
    if (auto * op = std::get_if<AffineOp>(&*it)) {
      if (grads_[op->out].size() == 0) {
        continue;
      }
      const Vec dy = grads_[op->out];
      params[op->p.weight].grad.noalias() += dy * values_[op->in].transpose();
      params[op->p.bias].grad.col(0) += dy;
      grad_slot(op->in).noalias() += params[op->p.weight].value.transpose() * dy;
    } else if (auto * op = std::get_if<TanhOp>(&*it)) {
      if (grads_[op->out].size() == 0) {
        continue;
      }
      const Vec & y = values_[op->out];
      const Vec dx = grads_[op->out].cwiseProduct((1.0 - y.array().square()).matrix());
      grad_slot(op->in) += dx;
    } else if (auto * op = std::get_if<ConcatOp>(&*it)) {
      if (grads_[op->out].size() == 0) {
        continue;
      }
      const Vec dy = grads_[op->out];
      const Eigen::Index na = values_[op->a].size();
      grad_slot(op->a) += dy.head(na);
      grad_slot(op->b) += dy.tail(dy.size() - na);
    } else {
      auto & l = std::get<LstmOp>(*it);
      if (grads_[l.h_out].size() == 0 && grads_[l.c_out].size() == 0) {
        continue;
      }
      const Eigen::Index H = l.p.hidden_dim;
      const Vec dh = grad(l.h_out);
      const Vec & gates = l.gates;
      const auto i = gates.head(H).array();
      const auto f = gates.segment(H, H).array();
      const auto g = gates.segment(2 * H, H).array();
      const auto o = gates.tail(H).array();
      const auto tc = l.tanh_c.array();
      const Vec dc = grad(l.c_out) + (dh.array() * o * (1.0 - tc.square())).matrix();

      Vec da(4 * H);
      da.head(H) = (dc.array() * g * i * (1.0 - i)).matrix();
      da.segment(H, H) = (dc.array() * values_[l.c_in].array() * f * (1.0 - f)).matrix();
      da.segment(2 * H, H) = (dc.array() * i * (1.0 - g.square())).matrix();
      da.tail(H) = (dh.array() * tc * o * (1.0 - o)).matrix();

      params[l.p.bias].grad.col(0) += da;
      params[l.p.w_hidden].grad.noalias() += da * values_[l.h_in].transpose();
      grad_slot(l.h_in).noalias() += params[l.p.w_hidden].value.transpose() * da;
      grad_slot(l.c_in) += (dc.array() * f).matrix();
      if (l.x) {
        params[l.p.w_input].grad.noalias() += da * values_[*l.x].transpose();
        grad_slot(*l.x).noalias() += params[l.p.w_input].value.transpose() * da;
      }
    }
  }
}

void write_tensors(std::ostream & out, const ParameterStore & store)
{
  char buf[40];
  for (const auto & t : store) {
    out << "tensor " << t.name << ' ' << t.value.rows() << ' ' << t.value.cols() << '\n';
    for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.value.cols(); ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", t.value(r, c));
        out << (c == 0 ? "" : " ") << buf;
      }
      out << '\n';
    }
  }
}

void read_tensors(std::istream & in, ParameterStore & store, const std::string & source)
{
  for (std::size_t i = 0; i < store.size(); ++i) {
    Tensor & t = store[i];
    std::string tag;
    std::string name;
    Eigen::Index rows = -1;
    Eigen::Index cols = -1;
    if (!(in >> tag >> name >> rows >> cols) || tag != "tensor") {
      throw ParseError(source, 0, "expected tensor header for '" + t.name + "'");
    }
    if (name != t.name || rows != t.value.rows() || cols != t.value.cols()) {
      throw CompatibilityError(
        source + ": tensor '" + name + "' " + std::to_string(rows) + "x" + std::to_string(cols) +
        " does not match expected '" + t.name + "' " + std::to_string(t.value.rows()) + "x" +
        std::to_string(t.value.cols()));
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        std::string token;
        if (!(in >> token)) {
          throw ParseError(source, 0, "truncated values for '" + name + "'");
        }
        char * end = nullptr;
        const double v = std::strtod(token.c_str(), &end);
        if (end == token.c_str() || *end != '\0' || !std::isfinite(v)) {
          throw ParseError(source, 0, "bad value '" + token + "' in '" + name + "'");
        }
        t.value(r, c) = v;
      }
    }
  }
}

}  // namespace twoblock
