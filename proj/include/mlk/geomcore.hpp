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

#include <compare>
#include <map>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace mlk {

/// Unit lattice cube prod_i (corner_i, corner_i + 1]. Lower faces are open and
/// upper faces closed, so the cubes tile R^n without overlap.
struct Cube {
  std::vector<long> corner;

  int n() const { return static_cast<int>(corner.size()); }
  Eigen::VectorXd lower() const;
  Eigen::VectorXd upper() const;
  Eigen::VectorXd center() const;
  bool contains(const Eigen::VectorXd& x) const;

  auto operator<=>(const Cube&) const = default;
};

Cube cube_of(const Eigen::VectorXd& x);

/// Axis-aligned box [lo, hi].
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  int n() const { return static_cast<int>(lo.size()); }
  double volume() const { return (hi - lo).prod(); }
  bool contains(const Eigen::VectorXd& x) const;
  static Box of(const Cube& q) { return {q.lower(), q.upper()}; }
  static Box cube_centered(int n, double half) {
    return {Eigen::VectorXd::Constant(n, -half), Eigen::VectorXd::Constant(n, half)};
  }
};

/// Neighbourhood of radius `radius` (1 for a 1-tube) about the line
/// anchor + t * direction.
struct Tube {
  Eigen::VectorXd anchor;
  Eigen::VectorXd direction;
  double weight = 1.0;
  int family = 0;  // 0-based in memory
  double radius = 1.0;

  int n() const { return static_cast<int>(anchor.size()); }
};

/// Validates |direction| = 1 (within 1e-12) and weight >= 0.
Tube make_tube(Eigen::VectorXd anchor, Eigen::VectorXd direction, double weight = 1.0,
               int family = 0);

struct TubeFamily {
  int index = 0;
  std::vector<Tube> tubes;
};

/// sqrt(det Gram(v_1..v_d)), tiny negative determinants clamped to zero.
double wedge_volume(const std::vector<Eigen::VectorXd>& vs);

double axis_distance(const Tube& t, const Eigen::VectorXd& x);
bool tube_indicator(const Tube& t, const Eigen::VectorXd& x);

/// Exact Euclidean distance between a line and a closed box.
double line_box_distance(const Eigen::VectorXd& anchor, const Eigen::VectorXd& dir,
                         const Box& box);

/// Closed tube meets the cube (distance exactly `radius` counts).
bool tube_cube_incidence(const Tube& t, const Cube& q);

Tube expand_tube(const Tube& t, double factor);

/// Every lattice cube meeting the half-open region prod_i (lo_i, hi_i], once,
/// in lexicographic corner order.
std::vector<Cube> lattice_cubes(const Box& region);

/// Finitely supported nonnegative function on lattice cubes.
struct WeightFunction {
  int n = 0;
  std::map<Cube, double> entries;

  double at(const Cube& q) const;
  /// Cubes with a positive value, in lattice order.
  std::vector<Cube> support() const;
  /// sum_Q M(Q)^n
  double power_sum() const;
  double max_value() const;
  double min_positive() const;
};

struct TubeFile {
  int n = 0;
  int d = 0;
  std::vector<Tube> tubes;
};

/// {"n","d","tubes":[{"anchor","direction","weight","family"}]}; directions
/// off unit length by < 1e-6 are renormalized, larger errors are rejected.
TubeFile tubes_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TubeFile& f);

}  // namespace mlk
