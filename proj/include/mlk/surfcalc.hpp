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
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mlk/geomcore.hpp"
#include "mlk/polyspace.hpp"
#include "mlk/quadrature.hpp"

namespace mlk {

/// Clipping region U for surface extraction: a bounding box intersected with
/// an optional (possibly truncated) tube and an optional ellipsoid.
struct Region {
  Box box;
  std::optional<Tube> tube;
  std::optional<double> half_length;  // tube truncation, measured from the anchor
  std::optional<EllipsoidCell> ellipsoid;

  static Region of(const Box& b) { return Region{b, {}, {}, {}}; }
  static Region of(const Cube& q) { return of(Box::of(q)); }
  static Region of(const EllipsoidCell& e);
  static Region truncated_tube(const Tube& t, double half_length);
  /// Tube restricted to a box (no truncation beyond the box).
  static Region tube_in_box(const Tube& t, const Box& b);

  int n() const { return box.n(); }
  bool contains(const Eigen::VectorXd& x) const;
  /// Conservative: false only if the box certainly misses the region.
  bool may_meet(const Box& b) const;
};

/// Point/normal/area-weight samples of Z_p within a region, stored flat.
class SurfaceSampleSet {
 public:
  explicit SurfaceSampleSet(int n = 0) : n_(n) {}

  int n() const { return n_; }
  std::size_t size() const { return weights_.size(); }
  bool empty() const { return weights_.empty(); }
  Eigen::Map<const Eigen::VectorXd> point(std::size_t i) const {
    return Eigen::Map<const Eigen::VectorXd>(points_.data() + i * n_, n_);
  }
  Eigen::Map<const Eigen::VectorXd> normal(std::size_t i) const {
    return Eigen::Map<const Eigen::VectorXd>(normals_.data() + i * n_, n_);
  }
  double weight(std::size_t i) const { return weights_[i]; }

  void add(const Eigen::VectorXd& x, const Eigen::VectorXd& unit_normal, double w);
  /// Appends every sample of `other` with weights multiplied by `scale`.
  void merge(const SurfaceSampleSet& other, double scale);

  double total_weight() const;
  /// sum_i w_i |e . n_i|
  double directional(const Eigen::VectorXd& e) const;

  // Degenerate-locus bookkeeping: pieces dropped because |grad p| < 1e-9.
  double dropped_weight = 0.0;
  std::size_t dropped_count = 0;
  double dropped_fraction() const;
  double resolution = 0.0;

 private:
  int n_;
  std::vector<double> points_;
  std::vector<double> normals_;
  std::vector<double> weights_;
};

struct ExtractOptions {
  double h = 1e-2;
  std::size_t mc_samples = 200000;  // n >= 4 only
  std::uint64_t seed = 0;           // n >= 4 only
};

/// Z_p within the region: marching squares (n = 2), marching tetrahedra
/// (n = 3), smoothed co-area Monte Carlo (n >= 4).
SurfaceSampleSet extract_surface(const Polynomial& p, const Region& region,
                                 const ExtractOptions& opt);
SurfaceSampleSet extract_surface(const Polynomial& p, const Region& region, double h);

double directional_area(const Polynomial& p, const Region& region, const Eigen::VectorXd& e,
                        double h);
double hausdorff_area(const Polynomial& p, const Region& region, double h);

struct MollifierConfig {
  double eps = 1e-3;
  int m = 32;
  std::uint64_t seed = 0;
};

void validate(const MollifierConfig& cfg);

/// The m cap draws used for averaging; draw i uses derive_seed(seed, i).
std::vector<Polynomial> mollifier_draws(const Polynomial& p, const MollifierConfig& cfg);

/// Union of the draws' sample sets with weights 1/m, so every linear
/// functional of it is the average over draws.
SurfaceSampleSet extract_mollified(const Polynomial& p, const Region& region,
                                   const MollifierConfig& cfg, const ExtractOptions& opt);

double directional_area_mollified(const Polynomial& p, const Region& region,
                                  const Eigen::VectorXd& e, const MollifierConfig& cfg, double h);

inline constexpr std::size_t kDefaultGapNodes = std::size_t{1} << 14;

struct SignVolumes {
  double positive = 0.0;  // vol({p > 0} ∩ cell)
  double negative = 0.0;  // vol({p < 0} ∩ cell)
  double volume = 0.0;    // vol(cell)
};

SignVolumes sign_volumes(const Polynomial& p, const Cell& cell,
                         std::size_t nodes = kDefaultGapNodes);

/// vol({p>0} ∩ cell) - vol({p<0} ∩ cell); exactly odd in p.
double signed_volume_gap(const Polynomial& p, const Cell& cell,
                         std::size_t nodes = kDefaultGapNodes);

enum class BisectLabel { PositiveHeavy, NegativeHeavy, Bisected };

const char* to_string(BisectLabel l);

BisectLabel bisects(const Polynomial& p, const Cell& cell, double threshold = 0.40,
                    std::size_t nodes = kDefaultGapNodes);

/// surf_{e(T)}(Z ∩ T_L) / (deg p * omega_{n-1}), where T_L is the tube cut to
/// |(x - anchor).e| <= half_length. The line-counting ceiling is 1.
double cylinder_ratio(const Polynomial& p, const Tube& t, double half_length, double h);

/// Rows x_1..x_n, n_1..n_n, weight.
void write_surface_csv(std::ostream& os, const SurfaceSampleSet& s);

}  // namespace mlk
