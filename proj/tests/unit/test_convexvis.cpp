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
#include <numbers>

#include "mlk/convexvis.hpp"
#include "mlk/error.hpp"
#include "mlk/random.hpp"

using namespace mlk;

namespace {

Polynomial sheets(int n, int k) {
  // prod_j (x_n - (j + 0.5)/k): k parallel sheets across the unit cube.
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  a[n - 1] = 1.0;
  Polynomial p = affine(make_space(n, 1), a, -0.5 / k);
  for (int j = 1; j < k; ++j) p = multiply(p, affine(make_space(n, 1), a, -(j + 0.5) / k), make_space(n, j + 1));
  return normalize(p);
}

// Area of {|u| <= 1, |u_2| <= t}.
double disc_slab_area(double t) { return 2.0 * (std::asin(t) + t * std::sqrt(1.0 - t * t)); }

}  // namespace

TEST_CASE("direction nets are unit and distinct") {
  for (int n : {2, 3, 4}) {
    const auto d = direction_net(n, 64, 1);
    CHECK(d.size() == 64);
    for (const auto& v : d) CHECK(v.norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("ball and scaled ball volumes") {
  CHECK(body_volume(GaugeBody::ball(2), 20000, 1).value == doctest::Approx(std::numbers::pi).epsilon(1e-12));
  for (int n : {2, 3}) {
    const VolumeEstimate v = body_volume(GaugeBody::ball(n, 0.5), 20000, 2);
    CHECK(v.value == doctest::Approx(std::pow(0.5, n) * unit_ball_volume(n)).epsilon(0.02));
  }
  // Box gauge: exact area 4ab is reproduced within MC error.
  const VolumeEstimate box = body_volume(GaugeBody::box(Eigen::Vector2d(0.8, 0.3)), 200000, 3);
  CHECK(std::abs(box.value - 0.96) < 4 * box.std_error + 1e-3);
}

TEST_CASE("surface gauges: flat graph, empty set, sheets") {
  for (int n : {2, 3}) {
    Region q = Region::of(Cube{std::vector<long>(n, 0)});
    const double h = n == 2 ? 0.01 : 0.05;
    GaugeBody flat = build_gauge(sheets(n, 1), q, std::nullopt, h);
    for (std::size_t i = 0; i < flat.directions().size(); i += 7) CHECK(flat.net_gauge()[i] == doctest::Approx(1.0).epsilon(1e-3));
    const double base = std::pow(unit_ball_volume(n), -1.0 / n);
    CHECK(visibility(flat, 20000, 4) == doctest::Approx(base).epsilon(2e-3));
    auto s = make_space(n, 2);
    std::vector<int> sq(n, 0);
    sq[0] = 2;
    Polynomial pos = normalize(from_terms(s, {{sq, 1.0}, {std::vector<int>(n, 0), 1.0}}));
    CHECK(visibility(pos, q, std::nullopt, h, 20000, 4) == doctest::Approx(base));
  }
  Region q = Region::of(Cube{{0, 0}});
  for (int k : {2, 4, 8}) {
    GaugeBody body = build_gauge(sheets(2, k), q, std::nullopt, 0.005);
    const double v = body_volume(body, 200000, 5).value;
    CHECK(v == doctest::Approx(disc_slab_area(1.0 / k)).epsilon(0.02));
  }
}

TEST_CASE("gauge convexity, symmetry, homogeneity, domination") {
  Rng rng(11);
  for (int t = 0; t < 6; ++t) {
    const int n = 2 + t % 2;
    Polynomial p = random_polynomial(make_space(n, 3), 40 + t);
    GaugeBody k = build_gauge(p, Region::of(Cube{std::vector<long>(n, 0)}), std::nullopt, n == 2 ? 0.01 : 0.05);
    for (int i = 0; i < 1000; ++i) {
      Eigen::VectorXd u = gaussian_vector(rng, n), v = gaussian_vector(rng, n);
      CHECK(k.gauge(u + v) <= k.gauge(u) + k.gauge(v) + 1e-9);
      CHECK(k.gauge(-u) == k.gauge(u));
      CHECK(k.gauge(2.5 * u) == doctest::Approx(2.5 * k.gauge(u)));
      CHECK(k.gauge(u) >= u.norm() - 1e-12);
    }
    CHECK(body_volume(k, 5000, 1).value <= unit_ball_volume(n) + 1e-12);
  }
  // Pointwise larger gauge, smaller volume.
  GaugeBody a = GaugeBody::ball(2);
  GaugeBody b(2, 1.0, {Eigen::Vector2d(0.0, 3.0)}, 0);
  CHECK(body_volume(b, 5000, 9).value <= body_volume(a, 5000, 9).value);
}

TEST_CASE("John ellipsoid") {
  const JohnResult ball = john_ellipsoid(GaugeBody::ball(2));
  CHECK(ball.ellipsoid.lengths()[0] == doctest::Approx(1.0).epsilon(0.01));
  CHECK(ball.ellipsoid.lengths()[1] == doctest::Approx(1.0).epsilon(0.01));
  const JohnResult box = john_ellipsoid(GaugeBody::box(Eigen::Vector2d(0.3, 0.8)));
  CHECK(box.ellipsoid.lengths()[0] == doctest::Approx(0.8).epsilon(0.02));
  CHECK(box.ellipsoid.lengths()[1] == doctest::Approx(0.3).epsilon(0.02));
  CHECK(std::abs(box.ellipsoid.axes()(1, 0)) == doctest::Approx(1.0).epsilon(1e-3));
  const JohnResult box3 = john_ellipsoid(GaugeBody::box(Eigen::Vector3d(0.5, 0.4, 0.2)));
  CHECK(box3.ellipsoid.lengths()[0] == doctest::Approx(0.5).epsilon(0.02));
  CHECK(box3.ellipsoid.lengths()[2] == doctest::Approx(0.2).epsilon(0.02));
  for (int t = 0; t < 6; ++t) {
    const int n = 2 + t % 2;
    Polynomial p = random_polynomial(make_space(n, 4), 70 + t);
    GaugeBody k = build_gauge(p, Region::of(Cube{std::vector<long>(n, 0)}), std::nullopt, n == 2 ? 0.01 : 0.05);
    const JohnResult j = john_ellipsoid(k);
    CHECK(j.certified);
    CHECK(j.inner_gauge <= 1.0 + 1e-12);
    CHECK(j.outer_gauge <= std::sqrt(n) * 1.05);
    // Independent check: random boundary points of E are inside K.
    Rng rng(t);
    const Eigen::MatrixXd l = j.ellipsoid.shape_map();
    for (int i = 0; i < 200; ++i) CHECK(k.gauge(l * uniform_on_sphere(rng, n)) <= 1.0 + 1e-9);
  }
}

TEST_CASE("Banach-Mazur distance") {
  const Ellipsoid b = Ellipsoid::ball(2);
  for (double nn : {2.0, 8.0, 32.0}) {
    const Ellipsoid e = Ellipsoid::from_axes(Eigen::Vector2d(nn, 1.0), Eigen::Matrix2d::Identity());
    CHECK(std::abs(banach_mazur(b, e) - std::log(nn)) < 1e-9);
  }
  CHECK(banach_mazur(b, b) == 0.0);
  CHECK(banach_mazur(b, Ellipsoid::ball(2, 3.0)) == doctest::Approx(std::log(3.0)));
  CHECK_THROWS_AS(Ellipsoid(Eigen::Matrix2d::Identity() * -1.0), Error);
  NetParams np;
  np.n = 3;
  np.v_min = 0.1;
  np.v_max = 4.0;
  Rng rng(3);
  for (int t = 0; t < 300; ++t) {
    const Ellipsoid x = random_slab_ellipsoid(np, rng), y = random_slab_ellipsoid(np, rng),
                    z = random_slab_ellipsoid(np, rng);
    CHECK(banach_mazur(x, y) == banach_mazur(y, x));
    CHECK(banach_mazur(x, z) <= banach_mazur(x, y) + banach_mazur(y, z) + 1e-9);
    CHECK(banach_mazur(x, x) == 0.0);
  }
}

TEST_CASE("colored nets") {
  NetParams single;
  single.n = 2;
  single.v_min = single.v_max = std::numbers::pi;
  single.axis_ratio_cap = 1.0;
  single.pool = 200;
  const ColoredNet one = build_net(single);
  CHECK(one.elements.size() == 1);
  CHECK(one.color_count == 1);

  NetParams np;
  np.n = 2;
  np.rho = 1.0;
  np.gamma = 4.0;
  np.v_min = std::numbers::pi / 64;
  np.v_max = std::numbers::pi;
  np.axis_ratio_cap = 16.0;
  np.seed = 2;
  const ColoredNet net = build_net(np);
  const NetCheck chk = check_net(net, 1000, 17);
  CHECK(chk.ok);
  CHECK(chk.min_separation >= 1.0);
  CHECK(chk.min_color_separation >= 4.0);
  CHECK(chk.max_cover_distance <= 1.0);
  MESSAGE("net size " << net.elements.size() << ", colors " << net.color_count);
  CHECK(2 * std::log(net.alpha()) < np.gamma * np.rho);

  const ColoredNet back = net_from_json(to_json(net));
  CHECK(back.elements.size() == net.elements.size());
  CHECK(back.colors == net.colors);
  CHECK(banach_mazur(back.elements[3], net.elements[3]) < 1e-12);
  CHECK_THROWS_AS(net_from_json(nlohmann::json::parse(R"({"params":{}})")), Error);
  CHECK_THROWS_AS(build_net(NetParams{2, 1.0, 0.5, 1.0, 2.0}), Error);

  // A net containing B maps the ball body to B's color.
  ColoredNet with_ball = net;
  with_ball.elements.push_back(Ellipsoid::ball(2));
  with_ball.colors.push_back(with_ball.color_count);
  const ClosestColored cc = closest_colored(GaugeBody::ball(2), with_ball, with_ball.alpha());
  CHECK(cc.by_color.at(with_ball.color_count) == static_cast<int>(with_ball.elements.size()) - 1);
  CHECK(cc.violations.empty());
  // Slightly distorted net element is found under its color.
  const Ellipsoid& target = net.elements[5];
  const Eigen::MatrixXd linv = target.shape_map().inverse();
  std::vector<Eigen::VectorXd> sup;
  for (const auto& d : direction_net(2, 256)) sup.push_back(1.01 * linv * d);
  const GaugeBody near(2, 0.0, sup, 0);
  const ClosestColored cn = closest_colored(near, net, net.alpha());
  CHECK(cn.by_color.at(net.colors[5]) == 5);
  CHECK_THROWS_AS(closest_colored(GaugeBody::ball(2, 1e-4), net, net.alpha()), Error);
}

TEST_CASE("visibility lemma reports") {
  Region q = Region::of(Cube{{0, 0}});
  VisOptions opt;
  opt.h = 0.01;
  const BoundReport flat = vis_degree_bound(sheets(2, 1), q, opt);
  CHECK(flat.applicable);
  CHECK(flat.ratio == doctest::Approx(1.0 / std::numbers::pi).epsilon(0.01));
  // Sheets: vis^2 = 1/area of the disc-slab body, about k/2 for large k.
  const BoundReport s8 = vis_degree_bound(sheets(2, 8), q, opt);
  CHECK(s8.ratio == doctest::Approx(1.0 / (8 * disc_slab_area(1.0 / 8))).epsilon(0.03));
  // Degenerate wedge.
  Region big = Region::of(Box::cube_centered(2, 0.5));
  auto s = make_space(2, 2);
  Polynomial circ = normalize(from_terms(s, {{{2, 0}, 1.0}, {{0, 2}, 1.0}, {{0, 0}, -0.16}}));
  const BoundReport deg =
      geometric_mean_bound(circ, big, opt, {Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 0)}, 10.0);
  CHECK(deg.applicable);
  CHECK(deg.lhs == 0.0);
  const BoundReport john =
      geometric_mean_bound(circ, big, opt, {Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)}, 10.0);
  CHECK(john.ratio > 0.0);
  CHECK(!geometric_mean_bound(sheets(2, 1), q, opt, {Eigen::Vector2d(1, 0)}, 10.0).applicable);
}
