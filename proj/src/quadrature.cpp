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

#include "mlk/quadrature.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "mlk/error.hpp"

namespace mlk {

double unit_ball_volume(int n) {
  return std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

double unit_sphere_area(int n) { return n * unit_ball_volume(n); }

Ellipsoid::Ellipsoid(Eigen::MatrixXd form) : form_(std::move(form)) {
  require(form_.rows() == form_.cols() && form_.rows() >= 1, "ellipsoid form must be square");
  require((form_ - form_.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + form_.cwiseAbs().maxCoeff()),
          "ellipsoid form must be symmetric");
  form_ = 0.5 * (form_ + form_.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(form_);
  const Eigen::VectorXd ev = es.eigenvalues();  // ascending
  if (!(ev.minCoeff() > 0.0)) fail(ErrorKind::InvalidArgument, "ellipsoid form must be positive definite");
  const Eigen::Index n = ev.size();
  lengths_.resize(n);
  axes_.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    lengths_[j] = 1.0 / std::sqrt(ev[j]);  // ascending eigenvalue -> descending length
    axes_.col(j) = es.eigenvectors().col(j);
  }
}

Ellipsoid Ellipsoid::ball(int n, double radius) {
  return Ellipsoid(Eigen::MatrixXd::Identity(n, n) / (radius * radius));
}

Ellipsoid Ellipsoid::from_axes(const Eigen::VectorXd& lengths, const Eigen::MatrixXd& dirs) {
  Eigen::VectorXd inv = lengths.array().square().inverse();
  Eigen::MatrixXd a = dirs * inv.asDiagonal() * dirs.transpose();
  return Ellipsoid(0.5 * (a + a.transpose()));
}

double Ellipsoid::volume() const { return unit_ball_volume(n()) * lengths_.prod(); }

Eigen::MatrixXd Ellipsoid::shape_map() const {
  return axes_ * lengths_.asDiagonal() * axes_.transpose();
}

Ellipsoid Ellipsoid::scaled(double s) const { return Ellipsoid(form_ / (s * s)); }

double cell_volume(const Cell& c) {
  if (const auto* b = std::get_if<Box>(&c)) return b->volume();
  return std::get<EllipsoidCell>(c).shape.volume();
}

double cell_diameter(const Cell& c) {
  if (const auto* b = std::get_if<Box>(&c)) return (b->hi - b->lo).norm();
  return 2.0 * std::get<EllipsoidCell>(c).shape.lengths()[0];
}

Box cell_bounds(const Cell& c) {
  if (const auto* b = std::get_if<Box>(&c)) return *b;
  const auto& e = std::get<EllipsoidCell>(c);
  // Half-width along axis i is sqrt((A^{-1})_ii).
  const Eigen::MatrixXd inv = e.shape.form().inverse();
  Eigen::VectorXd half = inv.diagonal().array().sqrt();
  return {e.center - half, e.center + half};
}

bool cell_contains(const Cell& c, const Eigen::VectorXd& x) {
  if (const auto* b = std::get_if<Box>(&c)) return b->contains(x);
  const auto& e = std::get<EllipsoidCell>(c);
  return e.shape.gauge(x - e.center) <= 1.0;
}

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

double radical_inverse(std::size_t i, int base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

const std::vector<Eigen::VectorXd>& unit_ball_nodes(int n, std::size_t count) {
  thread_local std::map<std::pair<int, std::size_t>, std::vector<Eigen::VectorXd>> cache;
  auto key = std::make_pair(n, count);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(count);
  for (std::size_t i = 1; pts.size() < count; ++i) {
    Eigen::VectorXd y = 2.0 * halton(n, i).array() - 1.0;
    if (y.squaredNorm() <= 1.0) pts.push_back(std::move(y));
  }
  return cache.emplace(key, std::move(pts)).first->second;
}

}  // namespace

Eigen::VectorXd halton(int n, std::size_t i) {
  require(n >= 1 && n <= 16, "halton supports 1..16 dimensions");
  Eigen::VectorXd h(n);
  for (int d = 0; d < n; ++d) h[d] = radical_inverse(i, kPrimes[d]);
  return h;
}

std::vector<Eigen::VectorXd> cell_nodes(const Cell& c, std::size_t count) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  if (const auto* b = std::get_if<Box>(&c)) {
    const Eigen::VectorXd span = b->hi - b->lo;
    for (std::size_t i = 1; i <= count; ++i)
      out.push_back(b->lo + span.cwiseProduct(halton(b->n(), i)));
    return out;
  }
  const auto& e = std::get<EllipsoidCell>(c);
  const Eigen::MatrixXd L = e.shape.shape_map();
  for (const auto& y : unit_ball_nodes(e.shape.n(), count)) out.push_back(e.center + L * y);
  return out;
}

}  // namespace mlk
