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

#ifndef TWOBLOCK__CELLS_HPP_
#define TWOBLOCK__CELLS_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "twoblock/numkit.hpp"

namespace twoblock
{

/// LSTM layer parameters, held by index in a ParameterStore.
///
/// Gate rows are stacked in the order (input, forget, candidate, output), each block H rows:
///   a = W_input * x + W_hidden * h + bias
///   i = sigmoid(a[0:H]), f = sigmoid(a[H:2H]), g = tanh(a[2H:3H]), o = sigmoid(a[3H:4H])
///   c' = f * c + i * g,  h' = o * tanh(c')
/// An input dimension of 0 gives a hidden-only recurrence driven by W_hidden and bias.
struct LstmParams
{
  std::size_t w_input = 0;   // 4H x D
  std::size_t w_hidden = 0;  // 4H x H
  std::size_t bias = 0;      // 4H x 1
  Eigen::Index input_dim = 0;
  Eigen::Index hidden_dim = 0;

  static LstmParams create(ParameterStore & store, const std::string & prefix,
                           Eigen::Index input_dim, Eigen::Index hidden_dim);
  // Uniform(+-1/sqrt(D + H)) weights, zero bias except forget gate = 1.
  void init(ParameterStore & store, Rng & rng) const;
};

struct LstmState
{
  Vec h;
  Vec c;

  static LstmState zeros(Eigen::Index hidden_dim);
};

LstmState lstm_step(const ParameterStore & store, const LstmParams & p, const Vec & x,
                    const LstmState & s);

struct AffineParams
{
  std::size_t weight = 0;  // out x in
  std::size_t bias = 0;    // out x 1
  Eigen::Index input_dim = 0;
  Eigen::Index output_dim = 0;

  static AffineParams create(ParameterStore & store, const std::string & prefix,
                             Eigen::Index input_dim, Eigen::Index output_dim);
  void init(ParameterStore & store, Rng & rng) const;
};

Vec affine_apply(const ParameterStore & store, const AffineParams & p, const Vec & x);

/// Affine -> tanh -> affine, or a single affine layer when hidden_dim is 0.
struct MlpParams
{
  std::vector<AffineParams> layers;

  static MlpParams create(ParameterStore & store, const std::string & prefix,
                          Eigen::Index input_dim, Eigen::Index hidden_dim,
                          Eigen::Index output_dim);
  void init(ParameterStore & store, Rng & rng) const;
  Eigen::Index input_dim() const { return layers.front().input_dim; }
  Eigen::Index output_dim() const { return layers.back().output_dim; }
};

Vec mlp_apply(const ParameterStore & store, const MlpParams & p, const Vec & x);

/// Eager reverse-mode tape over lstm/affine/mlp/concat operations.
///
/// Values are computed when an operation is recorded. After seeding output adjoints with
/// add_grad(), backward() accumulates parameter gradients into the store's gradient slots and
/// makes the adjoint of every node available through grad().
class Tape
{
public:
  using Node = std::size_t;

  explicit Tape(const ParameterStore & params) : params_(&params) {}

  Node leaf(Vec value);
  // x is omitted for hidden-only layers.
  std::pair<Node, Node> lstm(const LstmParams & p, std::optional<Node> x, Node h, Node c);
  Node affine(const AffineParams & p, Node x);
  Node mlp(const MlpParams & p, Node x);
  Node concat(Node a, Node b);

  const Vec & value(Node n) const { return values_.at(n); }
  void add_grad(Node n, const Vec & g);
  // Adjoint of a node after backward(); zero if nothing flowed into it.
  Vec grad(Node n) const;

  void backward(ParameterStore & params);
  std::size_t op_count() const { return ops_.size(); }

private:
  struct LstmOp
  {
    LstmParams p;
    std::optional<Node> x;
    Node h_in, c_in, h_out, c_out;
    Vec gates;   // post-activation (i, f, g, o)
    Vec tanh_c;
  };
  struct AffineOp
  {
    AffineParams p;
    Node in, out;
  };
  struct TanhOp
  {
    Node in, out;
  };
  struct ConcatOp
  {
    Node a, b, out;
  };
  using Op = std::variant<LstmOp, AffineOp, TanhOp, ConcatOp>;

  Node push(Vec value);
  Vec & grad_slot(Node n);

  const ParameterStore * params_;
  std::vector<Vec> values_;
  std::vector<Vec> grads_;
  std::vector<Op> ops_;
};

// Weight serialization: a sequence of blocks
//   tensor <name> <rows> <cols>
//   <rows lines of cols values, row-major, %.17g>
void write_tensors(std::ostream & out, const ParameterStore & store);
// Reads exactly store.size() blocks into tensors of matching name and shape.
void read_tensors(std::istream & in, ParameterStore & store, const std::string & source);

}  // namespace twoblock

#endif  // TWOBLOCK__CELLS_HPP_
