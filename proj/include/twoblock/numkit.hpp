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

#ifndef TWOBLOCK__NUMKIT_HPP_
#define TWOBLOCK__NUMKIT_HPP_

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace twoblock
{

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Returns W * x + b. Throws ShapeError naming `what` when dimensions disagree.
Vec linear_map(const Mat & W, const Vec & x, const Vec & b, std::string_view what = "linear_map");

bool all_finite(const Mat & m);

/// Deterministic pseudo-random stream.
///
/// xoshiro256** seeded through splitmix64. Every derived quantity (uniform reals, normals,
/// bounded integers) is computed with explicit integer and IEEE arithmetic; streams are
/// identical on every platform. std::*_distribution output is implementation defined and is
/// not used.
class Rng
{
public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller (one value per call, no cached pair).
  double normal();
  // Uniform integer on [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  // Independent stream keyed by a label, derived from this generator's seed only.
  Rng fork(std::string_view label) const;
  std::uint64_t seed() const { return seed_; }

private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
};

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// A named tensor with its gradient slot. Vectors are stored as n x 1 matrices.
struct Tensor
{
  std::string name;
  Mat value;
  Mat grad;
};

/// Flat, ordered collection of named parameters with paired gradients.
class ParameterStore
{
public:
  // Adds a zero-initialized tensor and returns its index. Names must be unique.
  std::size_t add(const std::string & name, Eigen::Index rows, Eigen::Index cols);

  Tensor & operator[](std::size_t i) { return tensors_[i]; }
  const Tensor & operator[](std::size_t i) const { return tensors_[i]; }
  std::optional<std::size_t> find(std::string_view name) const;

  std::size_t size() const { return tensors_.size(); }
  std::size_t scalar_count() const;
  void zero_grad();

  auto begin() { return tensors_.begin(); }
  auto end() { return tensors_.end(); }
  auto begin() const { return tensors_.begin(); }
  auto end() const { return tensors_.end(); }

private:
  std::vector<Tensor> tensors_;
};

// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
void init_uniform(Mat & m, Eigen::Index fan_in, Rng & rng);

struct AdamConfig
{
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState
{
  AdamState() = default;
  AdamState(const ParameterStore & params, AdamConfig config);

  AdamConfig config;
  std::vector<Mat> first_moment;
  std::vector<Mat> second_moment;
  std::int64_t step = 0;
};

// One bias-corrected Adam step using the gradients held in `params`. Tensors whose gradient is
// entirely zero are left untouched (moments included); the step counter always advances.
void adam_step(ParameterStore & params, AdamState & state);

// Computes the loss and writes the analytic gradient into the store's gradient slots.
using Objective = std::function<double(ParameterStore &)>;

struct GradCheckResult
{
  double max_rel_error = 0.0;
  std::string worst_tensor;
  Eigen::Index worst_index = 0;
  std::size_t coordinates = 0;
};

// Compares analytic gradients with central finite differences over every coordinate.
// The relative error of a coordinate is |ga - gfd| / max(1, |ga|, |gfd|).
GradCheckResult grad_check(const Objective & f, ParameterStore & params, double h = 1e-5);

}  // namespace twoblock

#endif  // TWOBLOCK__NUMKIT_HPP_
