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

#include "twoblock/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "twoblock/error.hpp"

namespace twoblock
{

namespace
{

std::uint64_t splitmix64(std::uint64_t & x)
{
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::string dims(const Mat & m)
{
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Vec linear_map(const Mat & W, const Vec & x, const Vec & b, std::string_view what)
{
  if (W.cols() != x.size() || W.rows() != b.size()) {
    throw ShapeError(
      std::string(what) + ": W is " + dims(W) + ", x has " + std::to_string(x.size()) +
      " entries, b has " + std::to_string(b.size()));
  }
  Vec y = b;
  y.noalias() += W * x;
  return y;
}

bool all_finite(const Mat & m) { return m.allFinite(); }

Rng::Rng(std::uint64_t seed) : seed_(seed)
{
  std::uint64_t x = seed;
  for (auto & s : s_) {
    s = splitmix64(x);
  }
}

std::uint64_t Rng::next_u64()
{
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal()
{
  // 1 - u lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n)
{
  if (n == 0) {
    throw UsageError("Rng::below requires n > 0");
  }
  // Rejection sampling on the top of the range keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t r = next_u64();
  while (r >= limit) {
    r = next_u64();
  }
  return r % n;
}

Rng Rng::fork(std::string_view label) const
{
  std::uint64_t x = seed_ ^ fnv1a64(label);
  return Rng(splitmix64(x));
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis)
{
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t ParameterStore::add(const std::string & name, Eigen::Index rows, Eigen::Index cols)
{
  if (find(name)) {
    throw UsageError("duplicate parameter name '" + name + "'");
  }
  tensors_.push_back(Tensor{name, Mat::Zero(rows, cols), Mat::Zero(rows, cols)});
  return tensors_.size() - 1;
}

std::optional<std::size_t> ParameterStore::find(std::string_view name) const
{
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (tensors_[i].name == name) {
      return i;
    }
  }
  return std::nullopt;
}

std::size_t ParameterStore::scalar_count() const
{
  std::size_t n = 0;
  for (const auto & t : tensors_) {
    n += static_cast<std::size_t>(t.value.size());
  }
  return n;
}

void ParameterStore::zero_grad()
{
  for (auto & t : tensors_) {
    t.grad.setZero();
  }
}

void init_uniform(Mat & m, Eigen::Index fan_in, Rng & rng)
{
  const double k = fan_in > 0 ? 1.0 / std::sqrt(static_cast<double>(fan_in)) : 0.0;
  // Row-major fill order so the stream maps onto serialized layout.
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = rng.uniform(-k, k);
    }
  }
}

AdamState::AdamState(const ParameterStore & params, AdamConfig cfg) : config(cfg)
{
  for (const auto & t : params) {
    first_moment.push_back(Mat::Zero(t.value.rows(), t.value.cols()));
    second_moment.push_back(Mat::Zero(t.value.rows(), t.value.cols()));
  }
}

void adam_step(ParameterStore & params, AdamState & state)
{
  if (state.first_moment.size() != params.size()) {
    throw ShapeError(
      "adam_step: optimizer tracks " + std::to_string(state.first_moment.size()) +
      " tensors, store has " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor & t = params[i];
    if (
      t.grad.rows() != t.value.rows() || t.grad.cols() != t.value.cols() ||
      state.first_moment[i].rows() != t.value.rows() ||
      state.first_moment[i].cols() != t.value.cols()) {
      throw ShapeError("adam_step: shape mismatch for '" + t.name + "'");
    }
    if (!t.grad.allFinite()) {
      throw TrainingError("non-finite gradient for parameter '" + t.name + "'");
    }
  }

  ++state.step;
  const auto & c = state.config;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor & p = params[i];
    if (p.grad.isZero(0.0)) {
      continue;
    }
    Mat & m = state.first_moment[i];
    Mat & v = state.second_moment[i];
    m = c.beta1 * m + (1.0 - c.beta1) * p.grad;
    v = c.beta2 * v + (1.0 - c.beta2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -=
      c.lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + c.epsilon);
  }
}

GradCheckResult grad_check(const Objective & f, ParameterStore & params, double h)
{
  if (!(h > 0.0)) {
    throw UsageError("grad_check step must be positive");
  }
  params.zero_grad();
  f(params);
  std::vector<Mat> analytic;
  analytic.reserve(params.size());
  for (const auto & t : params) {
    analytic.push_back(t.grad);
  }

  GradCheckResult result;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Mat & value = params[i].value;
    for (Eigen::Index k = 0; k < value.size(); ++k) {
      const double saved = value.data()[k];
      value.data()[k] = saved + h;
      const double up = f(params);
      value.data()[k] = saved - h;
      const double down = f(params);
      value.data()[k] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw CheckError(
          "objective not finite at '" + params[i].name + "'[" + std::to_string(k) + "]");
      }
      const double fd = (up - down) / (2.0 * h);
      const double ga = analytic[i].data()[k];
      const double rel = std::abs(ga - fd) / std::max({1.0, std::abs(ga), std::abs(fd)});
      ++result.coordinates;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_tensor = params[i].name;
        result.worst_index = k;
      }
    }
  }
  // Leave the store holding the analytic gradient at the unperturbed point.
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i].grad = analytic[i];
  }
  return result;
}

}  // namespace twoblock
