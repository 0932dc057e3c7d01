/*
 *   Copyright 2026 The mlkakeya Authors
 *
 *   Licensed under the Apache License, Version 2.0 (the "License");
 *   you may not use this file except in compliance with the License.
 *   You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *   Unless required by applicable law or agreed to in writing, software
 *   distributed under the License is distributed on an "AS IS" BASIS,
 *   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *   See the License for the specific language governing permissions and
 *   limitations under the License.
 */

#include <doctest.h>

#include <cmath>
#include <set>

#include "mlk/error.hpp"
#include "mlk/geomcore.hpp"
#include "mlk/random.hpp"

using namespace mlk;

namespace {
Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}
}  // namespace

TEST_CASE("wedge volume") {
  CHECK(wedge_volume({vec({1, 0, 0}), vec({0, 1, 0})}) == doctest::Approx(1.0));
  CHECK(wedge_volume({vec({0.6, 0.8}), vec({0.6, 0.8})}) == 0.0);
  CHECK(wedge_volume({vec({1, 0}), vec({1, 1}) / std::sqrt(2.0)}) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS(wedge_volume({vec({1, 0}), vec({0, 1}), vec({1, 1})}), Error);

  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    std::vector<Eigen::VectorXd> vs;
    for (int j = 0; j < 3; ++j) vs.push_back(uniform_on_sphere(rng, 4));
    const double w = wedge_volume(vs);
    CHECK(w <= 1.0 + 1e-12);
    std::swap(vs[0], vs[2]);
    CHECK(wedge_volume(vs) == doctest::Approx(w).epsilon(1e-10));
  }
}

TEST_CASE("tube indicator and expansion") {
  Tube t = make_tube(vec({0, 0}), vec({1, 0}));
  CHECK(tube_indicator(t, vec({5, 0})));
  CHECK_FALSE(tube_indicator(t, vec({0, 2})));
  CHECK(tube_indicator(t, vec({3, 1 - 1e-9})));
  CHECK(tube_indicator(expand_tube(t, 2.0), vec({0, 1.5})));
  CHECK_THROWS_AS(expand_tube(t, 0.5), Error);
  CHECK_THROWS_AS(make_tube(vec({0, 0}), vec({1, 1})), Error);

  Rng rng(1);
  Tube s = make_tube(vec({0.3, -0.2, 0.1}), uniform_on_sphere(rng, 3));
  Tube big = expand_tube(s, 1.7);
  for (int i = 0; i < 10000; ++i) {
    Eigen::VectorXd x = gaussian_vector(rng, 3) * 1.5;
    if (tube_indicator(s, x)) CHECK(tube_indicator(big, x));
  }
}

TEST_CASE("tube/cube incidence") {
  Cube q{{0, 0}};
  CHECK(tube_cube_incidence(make_tube(vec({0.5, 0.5}), vec({0.6, 0.8})), q));
  CHECK_FALSE(tube_cube_incidence(make_tube(vec({0, 4}), vec({1, 0})), q));
  // Axis y = 2 is at distance exactly 1 from the top face y = 1.
  CHECK(tube_cube_incidence(make_tube(vec({0, 2}), vec({1, 0})), q));
  CHECK_FALSE(tube_cube_incidence(make_tube(vec({0, 2.0000001}), vec({1, 0})), q));
  // Diagonal grazing a corner: line x + y = 2 + sqrt(2) is at distance 1 from (1,1).
  Eigen::VectorXd d = vec({1, -1}) / std::sqrt(2.0);
  CHECK(tube_cube_incidence(make_tube(vec({1 + 1 / std::sqrt(2.0), 1 + 1 / std::sqrt(2.0)}) , d), q));

  // Brute force: sample the cube and test the indicator.
  Rng rng(12);
  int agree = 0, total = 0;
  for (int inst = 0; inst < 40; ++inst) {
    Tube t = make_tube(gaussian_vector(rng, 3) * 1.5, uniform_on_sphere(rng, 3));
    Cube c{{0, 0, 0}};
    bool hit = false;
    for (int s = 0; s < 100000 && !hit; ++s) {
      Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(3, [&] { return uniform01(rng); });
      hit = tube_indicator(t, x);
    }
    const double dist = line_box_distance(t.anchor, t.direction, Box::of(c));
    // Sampling can only miss contact in a thin shell near distance 1.
    if (std::abs(dist - 1.0) > 0.02) {
      ++total;
      agree += hit == tube_cube_incidence(t, c);
    }
  }
  CHECK(agree == total);
}

TEST_CASE("lattice cubes") {
  CHECK(lattice_cubes({vec({0, 0, 0}), vec({1, 1, 1})}).size() == 1);
  CHECK(lattice_cubes({vec({0, 0}), vec({2, 2})}).size() == 4);
  auto cs = lattice_cubes({vec({-0.5, -0.5}), vec({1.5, 1.5})});
  CHECK(cs.size() == 9);
  CHECK(cs.front().corner == std::vector<long>{-1, -1});
  CHECK(std::set<Cube>(cs.begin(), cs.end()).size() == cs.size());
}

TEST_CASE("half-open cubes partition space") {
  Rng rng(2);
  for (int i = 0; i < 2000; ++i) {
    Eigen::VectorXd x = gaussian_vector(rng, 2) * 3.0;
    if (i % 3 == 0) x = x.array().round();  // integer points sit on faces
    Cube q = cube_of(x);
    CHECK(q.contains(x));
    int hits = 0;
    for (long a = -1; a <= 1; ++a)
      for (long b = -1; b <= 1; ++b) hits += Cube{{q.corner[0] + a, q.corner[1] + b}}.contains(x);
    CHECK(hits == 1);
  }
}

TEST_CASE("tube file format") {
  auto j = nlohmann::json::parse(R"({"n":2,"d":2,"tubes":[
    {"anchor":[0,0],"direction":[1.0000001,0],"weight":2.0,"family":1},
    {"anchor":[0,0],"direction":[0,1],"family":2}]})");
  TubeFile f = tubes_from_json(j);
  REQUIRE(f.tubes.size() == 2);
  CHECK(f.tubes[0].direction.norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f.tubes[0].family == 0);
  CHECK(f.tubes[1].weight == 1.0);
  CHECK(tubes_from_json(to_json(f)).tubes[1].family == 1);
  j["tubes"][0]["direction"] = {1.1, 0};
  CHECK_THROWS_AS(tubes_from_json(j), Error);
}
