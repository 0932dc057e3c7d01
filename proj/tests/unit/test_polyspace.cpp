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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mlk/error.hpp"
#include "mlk/polyspace.hpp"
#include "mlk/random.hpp"

using namespace mlk;

namespace {

// Term-by-term summation with std::pow, independent of the power tables.
double naive_eval(const Polynomial& p, const Eigen::VectorXd& x) {
  double s = 0.0;
  const auto& basis = p.space()->basis();
  for (std::size_t t = 0; t < basis.size(); ++t) {
    double m = p.coeffs()[static_cast<Eigen::Index>(t)];
    for (std::size_t i = 0; i < basis[t].size(); ++i) m *= std::pow(x[static_cast<Eigen::Index>(i)], basis[t][i]);
    s += m;
  }
  return s;
}

long binom(long n, long k) {
  long r = 1;
  for (long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

}  // namespace

TEST_CASE("space dimensions match monomial enumeration") {
  CHECK(make_space(1, 3)->dim() == 4);
  CHECK(make_space(2, 0)->dim() == 1);
  auto s22 = make_space(2, 2);
  REQUIRE(s22->dim() == 6);
  const std::vector<std::vector<int>> expect{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  CHECK(s22->basis() == expect);
  for (int n = 1; n <= 4; ++n) {
    std::size_t prev = 0;
    for (int k = 0; k <= 6; ++k) {
      const std::size_t dim = make_space(n, k)->dim();
      CHECK(dim == static_cast<std::size_t>(binom(n + k, k)));
      CHECK(dim > prev);
      prev = dim;
    }
  }
  CHECK_THROWS_AS(make_space(0, 2), Error);
}

TEST_CASE("evaluation") {
  auto s = make_space(2, 2);
  Eigen::VectorXd x(2);
  x << 0.5, 0.3;
  CHECK(from_terms(s, {{{1, 0}, 1.0}}).eval(x) == doctest::Approx(0.5));
  x << 1.0, 0.0;
  CHECK(from_terms(s, {{{2, 0}, 1.0}, {{0, 2}, 1.0}, {{0, 0}, -1.0}}).eval(x) == 0.0);

  for (int trial = 0; trial < 50; ++trial) {
    auto sp = make_space(1 + trial % 3, trial % 7);
    Polynomial p = random_polynomial(sp, trial);
    Rng rng(trial);
    Eigen::VectorXd y = gaussian_vector(rng, sp->n());
    CHECK(std::abs(p.eval(y) - naive_eval(p, y)) <= 1e-12 * (1.0 + std::abs(naive_eval(p, y))));
  }
}

TEST_CASE("gradient") {
  auto s = make_space(2, 2);
  Eigen::VectorXd x(2);
  x << 2.0, 3.0;
  Eigen::VectorXd g = from_terms(s, {{{1, 1}, 1.0}}).gradient(x);
  CHECK(g[0] == doctest::Approx(3.0));
  CHECK(g[1] == doctest::Approx(2.0));
  CHECK(from_terms(s, {{{0, 0}, 7.0}}).gradient(x).norm() == 0.0);

  for (int trial = 0; trial < 20; ++trial) {
    auto sp = make_space(2 + trial % 2, 1 + trial % 5);
    Polynomial p = random_polynomial(sp, 100 + trial);
    Rng rng(trial);
    Eigen::VectorXd y = gaussian_vector(rng, sp->n()) * 0.7;
    Eigen::VectorXd fd(sp->n());
    for (int i = 0; i < sp->n(); ++i) {
      Eigen::VectorXd a = y, b = y;
      a[i] += 1e-5;
      b[i] -= 1e-5;
      fd[i] = (p.eval(a) - p.eval(b)) / 2e-5;
    }
    CHECK((p.gradient(y) - fd).norm() <= 1e-6 * std::max(1.0, fd.norm()));
  }
}

TEST_CASE("framed spaces evaluate in local coordinates") {
  Frame f;
  f.center = Eigen::Vector2d(2.0, -1.0);
  f.scale = 4.0;
  auto s = make_space(2, 3, f);
  Eigen::VectorXd a(2);
  a << 1.0, 2.0;
  Polynomial l = affine(s, a, -0.5);
  Eigen::VectorXd x(2);
  x << 0.3, 0.7;
  CHECK(l.eval(x) == doctest::Approx(a.dot(x) - 0.5));
  CHECK((l.gradient(x) - a).norm() < 1e-12);
}

TEST_CASE("normalize") {
  auto s = make_space(1, 1);
  Eigen::VectorXd c(2);
  c << 3.0, 4.0;
  Polynomial p = normalize(Polynomial(s, c));
  CHECK(p.coeffs()[0] == doctest::Approx(0.6));
  CHECK(p.coeffs()[1] == doctest::Approx(0.8));
  CHECK(normalize(p).coeffs() == p.coeffs());
  CHECK_THROWS_AS(normalize(Polynomial(s, Eigen::VectorXd::Zero(2))), Error);

  auto s3 = make_space(3, 3);
  Polynomial q = random_polynomial(s3, 5).scaled(17.0);
  Polynomial qn = normalize(q);
  CHECK(std::abs(qn.coeffs().norm() - 1.0) < 1e-12);
  CHECK(normalize(qn).coeffs() == qn.coeffs());
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd x = gaussian_vector(rng, 3);
    CHECK((q.eval(x) > 0) == (qn.eval(x) > 0));
  }
}

TEST_CASE("perturb_in_cap") {
  auto s = make_space(2, 3);
  Polynomial p = random_polynomial(s, 11);
  CHECK_THROWS_AS(perturb_in_cap(p, 1.0, 0), Error);
  CHECK(perturb_in_cap(p, 0.1, 42).coeffs() == perturb_in_cap(p, 0.1, 42).coeffs());
  CHECK(sphere_distance(p, perturb_in_cap(p, 1e-9, 3)) < 1e-8);
  CHECK(perturb_in_cap(-p, 0.2, 8).coeffs() == -perturb_in_cap(p, 0.2, 8).coeffs());
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Polynomial q = perturb_in_cap(p, 0.3, seed);
    CHECK(sphere_distance(p, q) <= 0.3 + 1e-12);
    CHECK(std::abs(q.coeffs().norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("cap draws follow the uniform cap law") {
  // Oracle: uniform sphere points (normalized Gaussians) kept when inside the cap.
  auto s = make_space(1, 2);  // S^2
  Polynomial p = random_polynomial(s, 3);
  const double eps = 0.8;
  std::vector<double> drawn, oracle;
  for (std::uint64_t seed = 0; seed < 10000; ++seed)
    drawn.push_back(sphere_distance(p, perturb_in_cap(p, eps, seed)));
  Rng rng(77);
  while (oracle.size() < 10000) {
    Polynomial q(s, uniform_on_sphere(rng, 3));
    const double d = sphere_distance(p, q);
    if (d <= eps) oracle.push_back(d);
  }
  // 0.1% critical value for two samples of 10^4 is about 0.0276.
  CHECK(ks_statistic(drawn, oracle) < 0.0276);
}

TEST_CASE("json round trip") {
  Frame f;
  f.center = Eigen::Vector2d(1.5, 0.5);
  f.scale = 2.0;
  Polynomial p = random_polynomial(make_space(2, 4, f), 21);
  Polynomial q = polynomial_from_json(to_json(p));
  CHECK((q.coeffs() - p.coeffs()).norm() < 1e-15);
  Eigen::VectorXd x(2);
  x << 0.1, 0.9;
  CHECK(q.eval(x) == doctest::Approx(p.eval(x)));
  CHECK_THROWS_AS(polynomial_from_json(nlohmann::json{{"n", 2}}), Error);
  CHECK_THROWS_AS(polynomial_from_json(nlohmann::json::parse(R"({"n":2,"k":1,"terms":[{"exps":[2,0],"coef":1}]})")), Error);
}
