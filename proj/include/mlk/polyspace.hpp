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

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace mlk {

/// Affine chart for the monomial basis: monomials are taken in the local
/// coordinates y = (x - center) / scale. The identity chart is the default.
/// A chart does not change the polynomial class, only the coefficient sphere.
struct Frame {
  Eigen::VectorXd center;  // empty means origin
  double scale = 1.0;
};

/// Dense space of real polynomials of total degree <= k in n variables,
/// basis in graded-lexicographic order (degree ascending, then exponent
/// tuples descending lexicographically: 1, x1, x2, x1^2, x1x2, x2^2, ...).
class PolySpace {
 public:
  PolySpace(int n, int k, Frame frame = {});

  int n() const noexcept { return n_; }
  int k() const noexcept { return k_; }
  std::size_t dim() const noexcept { return basis_.size(); }
  /// N such that the unit coefficient sphere is S^N.
  std::size_t sphere_dim() const noexcept { return dim() - 1; }
  const std::vector<std::vector<int>>& basis() const noexcept { return basis_; }
  const Frame& frame() const noexcept { return frame_; }

  std::optional<std::size_t> index_of(const std::vector<int>& exps) const;

  Eigen::VectorXd to_local(const Eigen::VectorXd& x) const;

  /// Values of all basis monomials at x.
  void monomials(const Eigen::VectorXd& x, Eigen::VectorXd& out) const;

 private:
  friend class Polynomial;
  void fill_powers(const Eigen::VectorXd& y, std::vector<double>& pw) const;

  int n_;
  int k_;
  Frame frame_;
  std::vector<std::vector<int>> basis_;
  std::vector<int> flat_;  // dim * n exponents, row-major
};

using SpacePtr = std::shared_ptr<const PolySpace>;

SpacePtr make_space(int n, int k, Frame frame = {});

class Polynomial {
 public:
  Polynomial(SpacePtr space, Eigen::VectorXd coeffs, bool normalized = false);

  const SpacePtr& space() const noexcept { return space_; }
  const Eigen::VectorXd& coeffs() const noexcept { return coeffs_; }
  bool is_normalized() const noexcept { return normalized_; }
  int n() const noexcept { return space_->n(); }
  /// Highest total degree carrying a nonzero coefficient (0 for constants).
  int degree() const;

  double eval(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  double eval_with_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const;

  Polynomial operator-() const;
  Polynomial scaled(double s) const;

 private:
  SpacePtr space_;
  Eigen::VectorXd coeffs_;
  bool normalized_;
};

Polynomial normalize(const Polynomial& p);

/// Geodesic distance between the normalized coefficient vectors.
double sphere_distance(const Polynomial& a, const Polynomial& b);

/// Uniform draw from the geodesic cap of radius eps about p on the unit
/// coefficient sphere. Deterministic in seed, and odd-equivariant:
/// perturb_in_cap(-p, eps, s) == -perturb_in_cap(p, eps, s).
Polynomial perturb_in_cap(const Polynomial& p, double eps, std::uint64_t seed);

/// Gaussian coefficients, normalized.
Polynomial random_polynomial(SpacePtr space, std::uint64_t seed);

Polynomial from_terms(SpacePtr space,
                      const std::vector<std::pair<std::vector<int>, double>>& terms);

/// Product a*b expressed in `target` (same frame, enough degree).
Polynomial multiply(const Polynomial& a, const Polynomial& b, SpacePtr target);

/// Affine form a.x + b in global coordinates, expressed in `space`.
Polynomial affine(SpacePtr space, const Eigen::VectorXd& a, double b);

/// {"n","k","terms":[{"exps":[...],"coef":c}],"center"?,"scale"?}
nlohmann::json to_json(const Polynomial& p);
Polynomial polynomial_from_json(const nlohmann::json& j, bool normalize_on_load = true);

}  // namespace mlk
