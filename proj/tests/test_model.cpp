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

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "twoblock/datasets.hpp"
#include "twoblock/error.hpp"
#include "twoblock/model.hpp"

using namespace twoblock;
namespace fs = std::filesystem;

namespace
{

const double kNaN = std::numeric_limits<double>::quiet_NaN();

NormStats test_norm()
{
  NormStats s;
  s.mean = Point(1.5, -0.5);
  s.std = Point(2.0, 0.8);
  s.source = "test";
  return s;
}

ModelConfig tiny(ModelKind kind, Eigen::Index H = 2)
{
  ModelConfig c = ModelConfig::defaults(kind);
  c.encoder_hidden = H;
  c.decoder_hidden = 3;
  c.noise_dim = 2;
  c.obs_len = 4;
  return c;
}

MaskedTrajectory window(std::initializer_list<std::pair<double, double>> obs, std::size_t future = 2)
{
  MaskedTrajectory t;
  for (const auto & [x, y] : obs) {
    t.observations.emplace_back(x, y);
    t.observed.push_back(!std::isnan(x));
  }
  for (std::size_t k = 0; k < future; ++k) {
    t.future.emplace_back(0.1 * static_cast<double>(k), -0.2);
  }
  return t;
}

bool same_state(const LstmState & a, const LstmState & b)
{
  return a.h == b.h && a.c == b.c;
}

// Randomizes every parameter so hand transcripts see non-trivial values.
void scramble(Model & m, std::uint64_t seed, double scale = 0.5)
{
  Rng rng(seed);
  for (auto & t : m.params()) {
    for (Eigen::Index i = 0; i < t.value.size(); ++i) {
      t.value.data()[i] = scale * rng.normal();
    }
  }
}

}  // namespace

TEST_CASE("model tags")
{
  CHECK(parse_model_kind("twoblock") == ModelKind::kTwoBlock);
  CHECK(parse_model_kind("linner") == ModelKind::kLinear);
  CHECK(to_string(ModelKind::kZero) == "zero");
  try {
    parse_model_kind("bogus");
    FAIL("expected UsageError");
  } catch (const UsageError & e) {
    const std::string what = e.what();
    for (const char * tag : {"twoblock", "last", "zero", "linear"}) {
      CHECK(what.find(tag) != std::string::npos);
    }
  }
  CHECK(ModelConfig::defaults(ModelKind::kTwoBlock).encoder_hidden == 16);
  CHECK(ModelConfig::defaults(ModelKind::kLast).encoder_hidden == 32);
  CHECK(ModelConfig::defaults(ModelKind::kLinear).decoder_hidden == 32);
}

TEST_CASE("two-block parameter layout")
{
  const Model m(ModelConfig::defaults(ModelKind::kTwoBlock), test_norm(), 1);
  const auto & p = m.params();
  CHECK(p[*p.find("g_c.w_input")].value.rows() == 64);
  CHECK(p[*p.find("g_c.w_input")].value.cols() == 2);
  CHECK(p[*p.find("g_i.w_input")].value.cols() == 0);
  CHECK(p[*p.find("g_i.w_hidden")].value.cols() == 16);
  CHECK(p[*p.find("g_p.w_hidden")].value.cols() == 32);
  CHECK(p[*p.find("h_p.0.weight")].value.rows() == 2);
  const Model b(ModelConfig::defaults(ModelKind::kZero), test_norm(), 1);
  CHECK_FALSE(b.gap_encoder().has_value());
  CHECK(b.params().find("encoder.w_hidden").has_value());
}

TEST_CASE("routing counter")
{
  const Model m(tiny(ModelKind::kTwoBlock), test_norm(), 3);
  CHECK(encode_twoblock(m, window({{0, 0}, {1, 1}, {2, 2}, {3, 3}})).gap_steps == 0);
  CHECK(encode_twoblock(m, window({{0, 0}, {1, 1}, {kNaN, kNaN}, {3, 3}})).gap_steps == 1);
}

TEST_CASE("a single miss invokes g_i exactly at that step")
{
  Model m(tiny(ModelKind::kTwoBlock), test_norm(), 3);
  scramble(m, 5);
  const auto traj = window({{0, 0}, {1, 1}, {kNaN, kNaN}, {3, 3}});
  LstmState s = LstmState::zeros(2);
  s = lstm_step(m.params(), m.encoder(), traj.observations[0], s);
  s = lstm_step(m.params(), m.encoder(), traj.observations[1], s);
  s = lstm_step(m.params(), *m.gap_encoder(), Vec(), s);
  s = lstm_step(m.params(), m.encoder(), traj.observations[3], s);
  const Encoding e = encode_twoblock(m, traj);
  CHECK(same_state(e.state, s));
}

TEST_CASE("two-block encoder matches a scalar transcript")
{
  Model m(tiny(ModelKind::kTwoBlock), test_norm(), 3);
  scramble(m, 9);
  const auto & P = m.params();
  const auto traj = window({{0.3, -0.1}, {kNaN, kNaN}, {0.5, 0.2}, {0.7, 0.4}});
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  double h[2] = {0, 0};
  double c[2] = {0, 0};
  for (std::size_t t = 0; t < 4; ++t) {
    const bool obs = traj.observed[t];
    const LstmParams & cell = obs ? m.encoder() : *m.gap_encoder();
    const Mat & Wx = P[cell.w_input].value;
    const Mat & Wh = P[cell.w_hidden].value;
    const Mat & b = P[cell.bias].value;
    double nh[2];
    double nc[2];
    for (int k = 0; k < 2; ++k) {
      double pre[4];
      for (int g = 0; g < 4; ++g) {
        const int r = g * 2 + k;
        pre[g] = b(r, 0) + Wh(r, 0) * h[0] + Wh(r, 1) * h[1];
        if (obs) {
          pre[g] += Wx(r, 0) * traj.observations[t].x() + Wx(r, 1) * traj.observations[t].y();
        }
      }
      nc[k] = sig(pre[1]) * c[k] + sig(pre[0]) * std::tanh(pre[2]);
      nh[k] = sig(pre[3]) * std::tanh(nc[k]);
    }
    for (int k = 0; k < 2; ++k) {
      h[k] = nh[k];
      c[k] = nc[k];
    }
  }
  const Encoding e = encode_twoblock(m, traj);
  CHECK(e.gap_steps == 1);
  for (int k = 0; k < 2; ++k) {
    CHECK(e.state.h(k) == doctest::Approx(h[k]).epsilon(1e-14));
    CHECK(e.state.c(k) == doctest::Approx(c[k]).epsilon(1e-14));
  }
}

TEST_CASE("property: g_c + g_i steps cover the window and g_i counts the misses")
{
  Model m(tiny(ModelKind::kTwoBlock, 3), test_norm(), 4);
  Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    MaskedTrajectory t;
    const std::size_t T = 2 + rng.below(10);
    for (std::size_t i = 0; i < T; ++i) {
      t.observations.emplace_back(rng.normal(), rng.normal());
    }
    t.observed.assign(T, true);
    const auto draw = gen_mask(T, rng);
    const auto masked = apply_mask(t, draw.observed);
    Tape tape(m.params());
    const auto e = encode_twoblock(m, tape, masked);
    REQUIRE(e.gap_steps == masked.missing_count());
    REQUIRE(tape.op_count() == T);
  }
}

TEST_CASE("baselines agree on complete data")
{
  const auto traj = window({{0.1, 0.2}, {0.3, 0.1}, {0.5, 0.0}, {0.7, -0.1}});
  const Encoding a = encode_baseline(Model(tiny(ModelKind::kLast), test_norm(), 6), traj);
  const Encoding b = encode_baseline(Model(tiny(ModelKind::kZero), test_norm(), 6), traj);
  const Encoding c = encode_baseline(Model(tiny(ModelKind::kLinear), test_norm(), 6), traj);
  CHECK(same_state(a.state, b.state));
  CHECK(same_state(a.state, c.state));
  CHECK(a.gap_steps == 0);
}

TEST_CASE("zero-fill baseline consumes zeros in normalized space")
{
  Model m(tiny(ModelKind::kZero), test_norm(), 6);
  scramble(m, 2);
  const auto traj = window({{0.4, 0.4}, {kNaN, kNaN}, {0.2, -0.3}, {0.1, 0.0}});
  LstmState s = LstmState::zeros(2);
  for (const Point & z : {Point(0.4, 0.4), Point(0, 0), Point(0.2, -0.3), Point(0.1, 0.0)}) {
    s = lstm_step(m.params(), m.encoder(), z, s);
  }
  CHECK(same_state(encode_baseline(m, traj).state, s));

  ModelConfig raw = tiny(ModelKind::kZero);
  raw.zero_fill_raw = true;
  Model r(raw, test_norm(), 6);
  scramble(r, 2);
  const Track filled = fill_for(r, traj);
  CHECK(r.norm().invert(filled[1]).norm() < 1e-15);
}

TEST_CASE("linear-fill baseline matches a transcript")
{
  Model m(tiny(ModelKind::kLinear), test_norm(), 6);
  scramble(m, 3);
  const auto traj = window({{kNaN, kNaN}, {0.2, 0.0}, {kNaN, kNaN}, {0.6, 0.4}});
  LstmState s = LstmState::zeros(2);
  for (const Point & z : {Point(0.0, -0.2), Point(0.2, 0.0), Point(0.4, 0.2), Point(0.6, 0.4)}) {
    s = lstm_step(m.params(), m.encoder(), z, s);
  }
  const Encoding e = encode_baseline(m, traj);
  CHECK((e.state.h - s.h).norm() < 1e-15);
  CHECK((e.state.c - s.c).norm() < 1e-15);
}

TEST_CASE("constant readout predicts the de-normalized bias")
{
  Model m(tiny(ModelKind::kTwoBlock), test_norm(), 7);
  const auto & head = m.readout().layers.back();
  m.params()[head.weight].value.setZero();
  m.params()[head.bias].value << 0.5, -1.0;
  const Point want = m.norm().invert(Point(0.5, -1.0));
  Rng rng(1);
  const auto set = decode(m, LstmState::zeros(2), 5, 3, &rng);
  REQUIRE(set.samples.size() == 3);
  for (const auto & s : set.samples) {
    REQUIRE(s.size() == 5);
    for (const auto & p : s) {
      CHECK(p == want);
    }
  }
}

TEST_CASE("single-sample decoding is deterministic and noise-free")
{
  Model m(tiny(ModelKind::kTwoBlock), test_norm(), 7);
  const auto traj = window({{0.1, 0.2}, {kNaN, kNaN}, {0.5, 0.0}, {0.7, -0.1}});
  const auto a = predict(m, traj, 6);
  const auto b = predict(m, traj, 6);
  REQUIRE(a.samples.size() == 1);
  CHECK(a.samples[0] == b.samples[0]);
  CHECK(a.noises[0].isZero());
  CHECK_THROWS_AS(decode(m, LstmState::zeros(2), 0, 1), UsageError);
  CHECK_THROWS_AS(decode(m, LstmState::zeros(2), 3, 2), UsageError);

  Rng r1(4);
  Rng r2(4);
  const auto k1 = predict(m, traj, 3, 4, &r1);
  const auto k2 = predict(m, traj, 3, 4, &r2);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(k1.samples[i] == k2.samples[i]);
  }
  CHECK(k1.samples[0] != k1.samples[1]);
}

TEST_CASE("decoder matches a transcript of the g_p / h_p recursion")
{
  Model m(tiny(ModelKind::kLast), test_norm(), 8);
  scramble(m, 12);
  const auto & P = m.params();
  LstmState enc{Vec(2), Vec(2)};
  enc.h << 0.3, -0.6;
  enc.c << 0.1, 0.2;
  Vec ctx(4);
  ctx << 0.3, -0.6, 0.0, 0.0;
  LstmState s{affine_apply(P, m.context(), ctx), Vec::Zero(3)};
  Vec z = mlp_apply(P, m.readout(), s.h);
  Track want;
  for (int k = 0; k < 2; ++k) {
    s = lstm_step(P, m.decoder(), z, s);
    z = mlp_apply(P, m.readout(), s.h);
    want.push_back(m.norm().invert(Point(z)));
  }
  const auto got = decode(m, enc, 2, 1);
  for (int k = 0; k < 2; ++k) {
    CHECK((got.samples[0][k] - want[k]).norm() < 1e-14);
  }
}

TEST_CASE("loss_l2 examples")
{
  const Track gt{Point(1, 1), Point(2, 3)};
  CHECK(loss_l2(gt, gt) == 0.0);
  CHECK(loss_l2(Track{Point(4, 5), Point(5, 7)}, gt) == 25.0);
  CHECK_THROWS_AS(loss_l2(Track{Point(1, 1)}, gt), ShapeError);
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    Track p;
    Track g;
    const std::size_t n = 1 + rng.below(10);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p.emplace_back(rng.normal(), rng.normal());
      g.emplace_back(rng.normal(), rng.normal());
      sum += std::pow(p[i].x() - g[i].x(), 2) + std::pow(p[i].y() - g[i].y(), 2);
    }
    CHECK(loss_l2(p, g) == doctest::Approx(sum / n).epsilon(1e-14));
  }
}

TEST_CASE("loss_variety examples")
{
  const Track gt{Point(1, 1), Point(2, 3)};
  const Track off{Point(4, 5), Point(5, 7)};
  CHECK(loss_variety({off}, gt).value == loss_l2(off, gt));
  const auto v = loss_variety({off, gt, off}, gt);
  CHECK(v.value == 0.0);
  CHECK(v.best == 1);
  CHECK_THROWS_AS(loss_variety({}, gt), UsageError);
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Track> s(3);
    for (auto & t : s) {
      t = {Point(rng.normal(), rng.normal()), Point(rng.normal(), rng.normal())};
    }
    const double want = std::min({loss_l2(s[0], gt), loss_l2(s[1], gt), loss_l2(s[2], gt)});
    CHECK(loss_variety(s, gt).value == want);
  }
}

TEST_CASE("end-to-end gradient check through encoder, decoder and variety loss")
{
  Rng rng(21);
  for (ModelKind kind : {ModelKind::kTwoBlock, ModelKind::kLinear}) {
    ModelConfig c = tiny(kind, 4);
    c.obs_len = 6;
    c.readout_hidden = 3;
    Model m(c, test_norm(), 10);
    MaskedTrajectory t;
    for (int i = 0; i < 6; ++i) {
      t.observations.emplace_back(0.2 * i + 0.05 * rng.normal(), -0.1 * i + 0.05 * rng.normal());
    }
    t.observed.assign(6, true);
    for (int i = 0; i < 4; ++i) {
      t.future.emplace_back(1.2 + 0.2 * i, -0.6 - 0.1 * i);
    }
    const auto masked = apply_mask(t, {true, false, true, false, false, true});
    const Rng noise(77);
    Objective f = [&](ParameterStore &) {
      Rng r = noise;
      return window_loss(m, masked, 3, r);
    };
    const auto res = grad_check(f, m.params());
    INFO(to_string(kind) << " worst " << res.worst_tensor << "[" << res.worst_index << "]");
    CHECK(res.max_rel_error < 1e-4);
  }
}

TEST_CASE("property: complete data leaves g_i gradients at exactly zero")
{
  Model m(tiny(ModelKind::kTwoBlock, 3), test_norm(), 2);
  auto traj = window({{0.1, 0.2}, {0.3, 0.1}, {0.5, 0.0}, {0.7, -0.1}}, 3);
  Rng noise(1);
  m.params().zero_grad();
  window_loss(m, traj, 2, noise);
  const auto & gi = *m.gap_encoder();
  CHECK(m.params()[gi.w_hidden].grad.isZero());
  CHECK(m.params()[gi.bias].grad.isZero());
  CHECK_FALSE(m.params()[m.encoder().w_input].grad.isZero());

  traj.observed[2] = false;
  traj.observations[2] = Point(kNaN, kNaN);
  m.params().zero_grad();
  window_loss(m, traj, 2, noise);
  CHECK_FALSE(m.params()[gi.w_hidden].grad.isZero());
}

TEST_CASE("property: normalization round trip")
{
  const NormStats s = test_norm();
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Point p(rng.uniform(-30, 30), rng.uniform(-30, 30));
    REQUIRE((s.invert(s.apply(p)) - p).norm() <= 1e-12 * std::max(1.0, p.norm()));
  }
}

namespace
{

std::vector<MaskedTrajectory> cv_windows(std::size_t n, std::uint64_t seed)
{
  SyntheticSpec spec;
  spec.count = n;
  spec.obs_len = 4;
  spec.pred_len = 3;
  Rng rng(seed);
  return gen_synthetic_cv(spec, rng);
}

}  // namespace

TEST_CASE("training with zero epochs changes nothing")
{
  Model m(tiny(ModelKind::kTwoBlock), test_norm(), 1);
  const Mat before = m.params()[0].value;
  TrainConfig tc;
  tc.epochs = 0;
  const auto r = train(m, cv_windows(4, 1), tc);
  CHECK(r.loss_curve.empty());
  CHECK(m.params()[0].value == before);
}

TEST_CASE("training descends on a single constant-velocity trajectory")
{
  Model m(tiny(ModelKind::kTwoBlock, 4), test_norm(), 1);
  TrainConfig tc;
  tc.epochs = 250;
  tc.batch = 1;
  tc.seed = 3;
  tc.miss_ratio = 0.25;
  tc.adam.lr = 1e-2;
  const auto r = train(m, cv_windows(1, 2), tc);
  REQUIRE(r.loss_curve.size() == 250);
  CHECK(r.loss_curve.back() < 0.1 * r.loss_curve.front());
}

TEST_CASE("training is deterministic")
{
  const auto data = cv_windows(20, 5);
  auto run = [&]() {
    Model m(tiny(ModelKind::kTwoBlock, 3), test_norm(), 4);
    TrainConfig tc;
    tc.epochs = 5;
    tc.batch = 6;
    tc.seed = 11;
    tc.samples = 2;
    tc.resample_masks = true;
    const auto r = train(m, data, tc);
    return std::make_pair(r.loss_curve, m.params()[0].value);
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("non-finite data aborts training with its location")
{
  auto data = cv_windows(3, 5);
  data[1].future[0].x() = std::numeric_limits<double>::infinity();
  Model m(tiny(ModelKind::kLast), test_norm(), 4);
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch = 3;
  try {
    train(m, data, tc);
    FAIL("expected TrainingError");
  } catch (const TrainingError & e) {
    CHECK(std::string(e.what()).find("epoch 0, batch 0") != std::string::npos);
  }
}

TEST_CASE("model files round-trip and reject tampering")
{
  const fs::path dir = fs::temp_directory_path() / "twoblock_test_model";
  fs::create_directories(dir);
  ModelConfig c = tiny(ModelKind::kTwoBlock);
  c.held_out_scene = "zara2";
  Model m(c, test_norm(), 13);
  scramble(m, 1);
  save_model(dir / "m.weights", m);
  const Model back = load_model(dir / "m.weights");
  CHECK(back.config().fingerprint() == c.fingerprint());
  CHECK(back.norm().mean == m.norm().mean);
  CHECK(back.norm().std == m.norm().std);
  CHECK(back.norm().source == "test");
  for (std::size_t i = 0; i < m.params().size(); ++i) {
    CHECK(back.params()[i].value == m.params()[i].value);
  }

  std::ifstream in(dir / "m.weights");
  std::stringstream text;
  text << in.rdbuf();
  std::string s = text.str();
  s.replace(s.find("held_out zara2"), 14, "held_out zara1");
  std::ofstream(dir / "bad.weights") << s;
  CHECK_THROWS_AS(load_model(dir / "bad.weights"), CompatibilityError);
  CHECK_THROWS_AS(load_model(dir / "absent.weights"), IoError);
  fs::remove_all(dir);
}
