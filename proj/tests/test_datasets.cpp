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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "twoblock/datasets.hpp"
#include "twoblock/error.hpp"

using namespace twoblock;
namespace fs = std::filesystem;

namespace
{

SceneTable parse_text(const std::string & text)
{
  std::istringstream in(text);
  return parse_scene(in, "probe", "probe.txt");
}

// One pedestrian present at steps [first, first + len).
void add_track(SceneTable & t, double ped, std::size_t first, std::size_t len)
{
  for (std::size_t s = first; s < first + len; ++s) {
    t.rows.push_back(SceneRow{10.0 * static_cast<double>(s), ped, static_cast<double>(s), ped});
  }
  std::sort(t.rows.begin(), t.rows.end(), [](const SceneRow & a, const SceneRow & b) {
    return a.frame != b.frame ? a.frame < b.frame : a.pedestrian < b.pedestrian;
  });
}

fs::path scratch(const std::string & name)
{
  const fs::path dir = fs::temp_directory_path() / ("twoblock_test_datasets_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("parse a two-row scene")
{
  const SceneTable t = parse_text("0 1 0.0 0.0\n10 1 1.0 0.0\n");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1].frame == 10.0);
  CHECK(t.rows[1].x == 1.0);
  CHECK(t.rows[0].pedestrian == t.rows[1].pedestrian);
}

TEST_CASE("empty input gives an empty table and no windows")
{
  const SceneTable t = parse_text("");
  CHECK(t.rows.empty());
  CHECK(make_windows(t, WindowSpec{}).empty());
}

TEST_CASE("malformed line reports its number")
{
  try {
    parse_text("0 1 0.0 0.0\n10 1 abc 0.0\n");
    FAIL("expected ParseError");
  } catch (const ParseError & e) {
    CHECK(e.line() == 2);
    CHECK(e.code() == ExitCode::kData);
  }
  CHECK_THROWS_AS(parse_text("0 1 0.0\n"), ParseError);
  CHECK_THROWS_AS(parse_text("0 1 0.0 0.0 9\n"), ParseError);
  CHECK_THROWS_AS(parse_text("0 1 nan 0.0\n"), ParseError);
}

TEST_CASE("comments, tabs and float ids are accepted; rows sort; duplicates rejected")
{
  const SceneTable t = parse_text("# header\n20.0\t2.0\t1\t1\n\n10 1 0.5 0.5\n10 2 0 0\n");
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0].frame == 10.0);
  CHECK(t.rows[0].pedestrian == 1.0);
  CHECK(t.rows[2].frame == 20.0);
  CHECK_THROWS_AS(parse_text("0 1 0 0\n0 1 1 1\n"), DataError);
}

TEST_CASE("scene files round-trip and directories list scenes")
{
  const fs::path dir = scratch("io");
  SceneTable t{"eth", {}};
  add_track(t, 1, 0, 5);
  add_track(t, 2, 3, 4);
  t.rows[0].x = 0.1 + 1e-13;
  save_scene(dir / "ETH.txt", t);
  fs::create_directories(dir / "hotel");
  save_scene(dir / "hotel" / "part_a.txt", t);
  save_scene(dir / "hotel" / "part_b.txt", t);
  std::ofstream(dir / "notes.md") << "ignored\n";

  CHECK(list_scenes(dir) == std::vector<std::string>{"eth", "hotel"});
  const auto eth = load_scene_set(dir, "ETH");
  REQUIRE(eth.size() == 1);
  CHECK(eth[0].scene == "eth");
  REQUIRE(eth[0].rows.size() == t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(eth[0].rows[i].x == t.rows[i].x);
    CHECK(eth[0].rows[i].frame == t.rows[i].frame);
  }
  CHECK(load_scene_set(dir, "hotel").size() == 2);
  CHECK_THROWS_AS(load_scene_set(dir, "zara1"), IoError);
  CHECK_THROWS_AS(list_scenes(dir / "missing"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("window counting")
{
  WindowSpec spec;
  spec.obs_len = 8;
  spec.pred_len = 12;
  SceneTable one{"s", {}};
  add_track(one, 1, 0, 20);
  const auto w = make_windows(one, spec);
  REQUIRE(w.size() == 1);
  CHECK(w[0].observations.size() == 8);
  CHECK(w[0].future.size() == 12);
  CHECK(w[0].observed_count() == 8);
  CHECK(w[0].observations[3].x() == 3.0);
  CHECK(w[0].future[0].x() == 8.0);
  CHECK(w[0].scene == "s");

  SceneTable short_track{"s", {}};
  add_track(short_track, 1, 0, 19);
  CHECK(make_windows(short_track, spec).empty());

  SceneTable two{"s", {}};
  add_track(two, 1, 0, 20);
  add_track(two, 2, 5, 20);
  CHECK(make_windows(two, spec).size() == 2);
}

TEST_CASE("a gap in presence breaks windows")
{
  SceneTable t{"s", {}};
  add_track(t, 1, 0, 10);
  add_track(t, 1, 11, 10);
  add_track(t, 2, 0, 30);  // keeps frame 10 on the axis
  WindowSpec spec;
  spec.obs_len = 4;
  spec.pred_len = 4;
  std::size_t ped1 = 0;
  for (const auto & w : make_windows(t, spec)) {
    ped1 += w.agent_id == 1;
  }
  CHECK(ped1 == 3 + 3);
}

TEST_CASE("property: doubling the stride never yields more windows")
{
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    SceneTable t{"s", {}};
    for (int p = 1; p <= 6; ++p) {
      add_track(t, p, rng.below(20), 5 + rng.below(40));
    }
    WindowSpec spec;
    spec.obs_len = 3;
    spec.pred_len = 2;
    for (std::size_t s = 1; s <= 8; ++s) {
      spec.stride = s;
      const auto a = make_windows(t, spec).size();
      spec.stride = 2 * s;
      REQUIRE(make_windows(t, spec).size() <= a);
    }
  }
}

TEST_CASE("window spec validation")
{
  WindowSpec spec;
  spec.obs_len = 1;
  CHECK_THROWS_AS(spec.validate(), UsageError);
  spec.obs_len = 2;
  spec.pred_len = 0;
  CHECK_THROWS_AS(spec.validate(), UsageError);
  spec.pred_len = 1;
  spec.stride = 0;
  CHECK_THROWS_AS(spec.validate(), UsageError);
}

TEST_CASE("gen_mask examples")
{
  Rng rng(10);
  for (std::size_t T : {2u, 5u, 8u, 12u}) {
    const auto m = gen_mask(T, rng, 0.0);
    CHECK(std::count(m.observed.begin(), m.observed.end(), false) == 0);
  }
  const auto m = gen_mask(8, rng, 0.8);
  CHECK(std::count(m.observed.begin(), m.observed.end(), false) == 6);
  // 0.5625 * 8 = 4.5 rounds away from zero.
  const auto half = gen_mask(8, rng, 0.5625);
  CHECK(std::count(half.observed.begin(), half.observed.end(), false) == 5);

  Rng a(77);
  Rng b(77);
  for (int i = 0; i < 100; ++i) {
    CHECK(gen_mask(8, a).observed == gen_mask(8, b).observed);
  }
  CHECK_THROWS_AS(gen_mask(8, rng, 1.5), UsageError);
}

TEST_CASE("all-missing draws keep one observed step and are flagged")
{
  Rng rng(3);
  const auto m = gen_mask(8, rng, 1.0);
  CHECK(m.regenerated);
  CHECK(std::count(m.observed.begin(), m.observed.end(), true) == 1);
  const auto tiny = gen_mask(2, rng, 0.8);
  CHECK(tiny.regenerated);
  CHECK(std::count(tiny.observed.begin(), tiny.observed.end(), true) == 1);
}

TEST_CASE("property: n_miss is exact and never all missing")
{
  Rng rng(55);
  std::size_t uniform_hits[9] = {};
  for (int trial = 0; trial < 20000; ++trial) {
    const std::size_t T = 2 + rng.below(15);
    const double ratio = rng.uniform();
    const auto m = gen_mask(T, rng, ratio);
    const auto miss = static_cast<std::size_t>(std::count(m.observed.begin(), m.observed.end(), false));
    const auto want = std::min<std::size_t>(static_cast<std::size_t>(std::round(ratio * T)), T - 1);
    REQUIRE(miss == want);
    const auto u = gen_mask(8, rng);
    REQUIRE(u.ratio >= 0.2);
    REQUIRE(u.ratio < 0.8);
    ++uniform_hits[std::count(u.observed.begin(), u.observed.end(), false)];
  }
  // Uniform(0.2, 0.8) * 8 spans [1.6, 6.4): 2..6 missing only.
  CHECK(uniform_hits[0] + uniform_hits[1] + uniform_hits[7] + uniform_hits[8] == 0);
  for (int k = 2; k <= 6; ++k) {
    CHECK(uniform_hits[k] > 0);
  }
}

TEST_CASE("normalization two-point case and round trip")
{
  const NormStats s = fit_norm({Point(0, 0), Point(2, 2)}, "two");
  CHECK(s.mean == Point(1, 1));
  CHECK(s.std == Point(1, 1));
  CHECK(s.apply(Point(0, 0)) == Point(-1, -1));
  CHECK(s.apply(Point(2, 2)) == Point(1, 1));
  CHECK_THROWS_AS(fit_norm({Point(0, 1), Point(2, 1)}, "flat"), DataError);
  CHECK_THROWS_AS(fit_norm(std::vector<Point>{}, "none"), DataError);

  Rng rng(8);
  NormStats r;
  r.mean = Point(3.2, -7.5);
  r.std = Point(2.1, 0.37);
  for (int i = 0; i < 1000; ++i) {
    const Point x(rng.uniform(-50, 50), rng.uniform(-50, 50));
    const Point back = r.invert(r.apply(x));
    REQUIRE((back - x).norm() <= 1e-12 * std::max(1.0, x.norm()));
  }
}

TEST_CASE("normalization matches a single-pass statistics oracle")
{
  Rng rng(12);
  SyntheticSpec spec;
  spec.count = 40;
  spec.measurement_std = 0.2;
  spec.process_intensity = 0.1;
  std::vector<SceneTable> train;
  for (const char * name : {"eth", "hotel", "univ", "zara1"}) {
    train.push_back(synthetic_scene(spec, 25, name, rng));
  }
  // Welford's recurrence over the same rows.
  double n = 0, mx = 0, my = 0, m2x = 0, m2y = 0;
  for (const auto & t : train) {
    for (const auto & r : t.rows) {
      n += 1;
      const double dx = r.x - mx;
      const double dy = r.y - my;
      mx += dx / n;
      my += dy / n;
      m2x += dx * (r.x - mx);
      m2y += dy * (r.y - my);
    }
  }
  const NormStats s = fit_norm(train);
  CHECK(s.mean.x() == doctest::Approx(mx).epsilon(1e-12));
  CHECK(s.mean.y() == doctest::Approx(my).epsilon(1e-12));
  CHECK(s.std.x() == doctest::Approx(std::sqrt(m2x / n)).epsilon(1e-12));
  CHECK(s.std.y() == doctest::Approx(std::sqrt(m2y / n)).epsilon(1e-12));
  CHECK(s.source == "eth+hotel+univ+zara1");
}

TEST_CASE("synthetic constant velocity without noise")
{
  SyntheticSpec spec;
  spec.count = 50;
  spec.speed_min = 1.0;
  spec.speed_max = 1.0;
  Rng rng(1);
  for (const auto & t : gen_synthetic_cv(spec, rng)) {
    Track all = t.observations;
    all.insert(all.end(), t.future.begin(), t.future.end());
    REQUIRE(all.size() == 16);
    const Point step = all[1] - all[0];
    CHECK(step.norm() == doctest::Approx(0.4).epsilon(1e-12));
    for (std::size_t i = 1; i < all.size(); ++i) {
      CHECK((all[i] - all[i - 1] - step).norm() < 1e-12);
    }
  }
}

TEST_CASE("synthetic sets are reproducible")
{
  SyntheticSpec spec;
  spec.count = 20;
  spec.measurement_std = 0.1;
  spec.process_intensity = 0.05;
  Rng a(42);
  Rng b(42);
  const auto x = gen_synthetic_cv(spec, a);
  const auto y = gen_synthetic_cv(spec, b);
  REQUIRE(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(x[i].observations == y[i].observations);
    CHECK(x[i].future == y[i].future);
  }
}

TEST_CASE("Monte-Carlo mean speed matches the configured range")
{
  SyntheticSpec spec;
  spec.count = 10000;
  spec.obs_len = 2;
  spec.pred_len = 1;
  Rng rng(2025);
  double sum = 0.0;
  for (const auto & t : gen_synthetic_cv(spec, rng)) {
    sum += (t.observations[1] - t.observations[0]).norm() / spec.step_seconds;
  }
  const double mean = sum / static_cast<double>(spec.count);
  CHECK(std::abs(mean - 0.5 * (spec.speed_min + spec.speed_max)) < 0.01);
}

TEST_CASE("synthetic scene feeds the window builder")
{
  SyntheticSpec spec;
  spec.count = 5;
  Rng rng(9);
  const SceneTable t = synthetic_scene(spec, 20, "synth", rng);
  CHECK(t.rows.size() == 100);
  WindowSpec w;
  w.obs_len = 8;
  w.pred_len = 8;
  CHECK(make_windows(t, w).size() == 5 * 5);
}
