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

#pragma once

#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mlk/geomcore.hpp"

namespace mlk {

/// Volume of the unit ball in R^n.
double unit_ball_volume(int n);
/// (n-1)-dimensional area of the unit sphere in R^n.
double unit_sphere_area(int n);

/// Centered ellipsoid {x : x^T A x <= 1}, A symmetric positive definite.
/// Semiaxes are sorted descending; axes()[:, j] is the direction of lengths()[j].
class Ellipsoid {
 public:
  explicit Ellipsoid(Eigen::MatrixXd form);
  static Ellipsoid ball(int n, double radius = 1.0);
  /// Columns of `dirs` are orthonormal principal directions.
  static Ellipsoid from_axes(const Eigen::VectorXd& lengths, const Eigen::MatrixXd& dirs);

  int n() const { return static_cast<int>(form_.rows()); }
  const Eigen::MatrixXd& form() const { return form_; }
  const Eigen::VectorXd& lengths() const { return lengths_; }
  const Eigen::MatrixXd& axes() const { return axes_; }
  double volume() const;
  /// Linear map L with E = L(B): L = sum_j l_j e_j e_j^T.
  Eigen::MatrixXd shape_map() const;
  Ellipsoid scaled(double s) const;
  /// sqrt(x^T A x); the ellipsoid's own gauge.
  double gauge(const Eigen::VectorXd& x) const { return std::sqrt(x.dot(form_ * x)); }

 private:
  Eigen::MatrixXd form_;
  Eigen::VectorXd lengths_;
  Eigen::MatrixXd axes_;
};

/// Translate of an ellipsoid.
struct EllipsoidCell {
  Ellipsoid shape;
  Eigen::VectorXd center;
};

using Cell = std::variant<Box, EllipsoidCell>;

double cell_volume(const Cell& c);
double cell_diameter(const Cell& c);
Box cell_bounds(const Cell& c);
bool cell_contains(const Cell& c, const Eigen::VectorXd& x);

/// Halton sequence point i >= 1 in [0,1)^n.
Eigen::VectorXd halton(int n, std::size_t i);

/// Deterministic quasi-random nodes filling the cell (count exact); equal weights.
std::vector<Eigen::VectorXd> cell_nodes(const Cell& c, std::size_t count);

}  // namespace mlk
