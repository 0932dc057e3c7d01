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
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mlk/geomcore.hpp"
#include "mlk/polyspace.hpp"
#include "mlk/quadrature.hpp"

namespace mlk {

/// Odd map F : S^N -> R^J on the unit sphere of R^{N+1}.
class OddMap {
 public:
  virtual ~OddMap() = default;
  virtual std::size_t domain_dim() const = 0;  ///< N + 1
  virtual std::size_t target_dim() const = 0;  ///< J
  /// Exact residual vector.
  virtual Eigen::VectorXd eval(const Eigen::VectorXd& x) const = 0;
  /// Differentiable surrogate with smoothing level sigma (relative) and its Jacobian.
  virtual Eigen::VectorXd smooth(const Eigen::VectorXd& x, double sigma, Eigen::MatrixXd& jac) const = 0;
  virtual std::optional<Polynomial> as_polynomial(const Eigen::VectorXd&) const { return std::nullopt; }
};

/// F(x) = A x.
class LinearOddMap final : public OddMap {
 public:
  explicit LinearOddMap(Eigen::MatrixXd a) : a_(std::move(a)) {}
  std::size_t domain_dim() const override { return a_.cols(); }
  std::size_t target_dim() const override { return a_.rows(); }
  Eigen::VectorXd eval(const Eigen::VectorXd& x) const override { return a_ * x; }
  Eigen::VectorXd smooth(const Eigen::VectorXd& x, double, Eigen::MatrixXd& jac) const override {
    jac = a_;
    return a_ * x;
  }

 private:
  Eigen::MatrixXd a_;
};

/// F(p)_i = signed_volume_gap(p, cell_i) / vol(cell_i) on the coefficient
/// sphere of a polynomial space. Smoothing replaces sign(p) by tanh(p / s_i)
/// with s_i = sigma * rms of p over cell i.
class GapOddMap final : public OddMap {
 public:
  GapOddMap(SpacePtr space, std::vector<Cell> cells, std::size_t nodes = 4096);
  std::size_t domain_dim() const override { return space_->dim(); }
  std::size_t target_dim() const override { return cells_.size(); }
  Eigen::VectorXd eval(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd smooth(const Eigen::VectorXd& x, double sigma, Eigen::MatrixXd& jac) const override;
  std::optional<Polynomial> as_polynomial(const Eigen::VectorXd& x) const override;

  const SpacePtr& space() const { return space_; }
  const std::vector<Cell>& cells() const { return cells_; }

 private:
  SpacePtr space_;
  std::vector<Cell> cells_;
  std::vector<Eigen::MatrixXd> phi_;  // per cell: nodes x dim monomial values
};

struct ZeroOptions {
  double tol = 0.05;
  int restarts = 32;
  std::uint64_t seed = 0;
  int max_iter = 60;  ///< LM iterations per smoothing level
};

struct ZeroResult {
  Eigen::VectorXd x;
  std::optional<Polynomial> p;
  Eigen::VectorXd residuals;
  double max_residual = 0.0;
  int restarts_used = 0;
  bool converged = false;
};

/// Multi-start Levenberg-Marquardt on the sphere with a smoothing
/// continuation. Non-convergence is reported, not thrown. Throws when J > N.
ZeroResult find_odd_zero(const OddMap& f, const ZeroOptions& opt);

struct WarmupOptions {
  double c_deg = 1.0;
  ZeroOptions zero;
  double h = 0.01;  ///< extraction step for the area check
  std::size_t nodes = 4096;
};

struct WarmupReport {
  int k = 0;
  std::size_t cells = 0;  ///< J
  ZeroResult zero;
  std::vector<Cube> cubes;
  std::vector<double> weights;  ///< M(Q)
  std::vector<double> areas;    ///< H_{n-1}(Z ∩ Q)
  double fitted_c = 0.0;        ///< min_Q area / M(Q)
};

/// Smallest k with dim P_k - 1 >= target.
int degree_for(int n, double target);

/// Subdivides every support cube into ceil(M(Q))^n subcubes and bisects all
/// of them with one polynomial.
WarmupReport warmup_bisector(const WeightFunction& m, const WarmupOptions& opt);

nlohmann::json to_json(const ZeroResult& r);

}  // namespace mlk
