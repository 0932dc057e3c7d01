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
#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mlk/convexvis.hpp"
#include "mlk/geomcore.hpp"
#include "mlk/oddzero.hpp"
#include "mlk/polyspace.hpp"
#include "mlk/quadrature.hpp"
#include "mlk/surfcalc.hpp"

namespace mlk {

struct KakeyaInstance {
  int n = 0;
  int d = 0;
  std::vector<TubeFamily> families;
  Box box;  ///< working box

  std::size_t tube_count() const;
};

struct InstanceParams {
  int n = 2;
  int d = 2;
  int tubes_per_family = 1;
  double spread = 0.1;  ///< angular radius about e_j
  std::uint64_t seed = 0;
  double anchor_half_width = 2.0;
  /// Non-transverse mode: base directions are random unit vectors and the
  /// spread is unrestricted.
  bool transverse = true;
};

KakeyaInstance gen_instance(const InstanceParams& params);

/// Smallest box containing every pairwise intersection of tubes from
/// distinct families (a bound: |x - c| <= 2/sin(angle) + radius about the
/// closest point c). Throws Certification for parallel cross-family pairs.
Box required_box(const std::vector<TubeFamily>& families);

/// Instance from explicit families with the working box from required_box.
KakeyaInstance make_instance(int n, int d, std::vector<TubeFamily> families);
KakeyaInstance instance_from_file(const TubeFile& f);
TubeFile to_tube_file(const KakeyaInstance& inst);

/// x -> a x + shift applied to every tube line (directions renormalized).
KakeyaInstance transformed(const KakeyaInstance& inst, const Eigen::MatrixXd& a,
                           const Eigen::VectorXd& shift);

/// Tubes of one family incident to q, as indices into the family.
std::vector<int> incident_tubes(const TubeFamily& f, const Cube& q);

/// F(Q): sum over incident d-tuples of prod a_T times the wedge of directions.
double cube_weight(const KakeyaInstance& inst, const Cube& q);

/// F on every lattice cube of the working box with F > 0.
WeightFunction cube_weights(const KakeyaInstance& inst);

/// M(Q) = F(Q)^{1/(n(d-1))}, rescaled so that sum M^n = 1.
WeightFunction derive_M(const WeightFunction& f, int d);
WeightFunction derive_M(const KakeyaInstance& inst);

/// max(10, max over the support of M(Q)^{-n}).
double choose_lambda(const WeightFunction& m);

struct PipelineOptions {
  WarmupOptions warmup;
  MollifierConfig mollifier;
  double h = 0.01;
  int vis_samples = 20000;
  bool measure_visibility = true;
};

struct PipelineResult {
  double lambda = 0.0;
  WarmupReport warmup;
  std::vector<Cube> cubes;
  std::vector<double> vis;        ///< vis_eps(Z_p ∩ Q)
  std::vector<double> vis_ratio;  ///< vis / (lambda M(Q))
  double fitted_vis_constant = 0.0;
  double k_over_lambda = 0.0;
};

/// Warm-up bisection of lambda M as the polynomial for the reduction.
PipelineResult pipeline_polynomial(const WeightFunction& m, double lambda, const PipelineOptions& opt);

struct SjKey {
  int family = 0;
  Cube cube;
  int tube = 0;
  auto operator<=>(const SjKey&) const = default;
};

struct SjTable {
  double lambda = 1.0;
  MollifierConfig mollifier;
  std::map<SjKey, double> entries;
};

/// S_j(Q, T) = lambda^{-1} surf_{e(T), eps}(Z_p ∩ Q ∩ box) on incident pairs.
SjTable build_Sj(const KakeyaInstance& inst, const Polynomial& p, const MollifierConfig& cfg,
                 double lambda, double h);

struct MarginReport {
  std::vector<double> values;
  double max = 0.0;
  double median = 0.0;
  std::size_t hard_violations = 0;
  double budget = 0.0;
  bool pass = false;
};

/// Smallest C with wedge M(Q)^n <= C prod_j S_j(Q, T_j) per incident tuple.
MarginReport check_need1(const SjTable& s, const KakeyaInstance& inst, const WeightFunction& m,
                         double budget);
/// Per-tube sums of S_j over incident cubes.
MarginReport check_need2(const SjTable& s, const KakeyaInstance& inst, double budget);

struct RatioReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  std::size_t points = 0;
};

/// Midpoint-grid quadrature of the multilinear Kakeya integrand against
/// (prod_j sum a_T)^{1/(d-1)}.
RatioReport theorem_ratio(const KakeyaInstance& inst, double grid_h);

enum class SignLabel { Plus, Minus, Undecided, Bisected };
const char* to_string(SignLabel s);

struct Translate {
  Eigen::VectorXd center;
  BisectLabel label = BisectLabel::Bisected;
  SignLabel sign = SignLabel::Bisected;
  double gap = 0.0;  ///< signed volume gap over the translate volume
};

struct ColorClass {
  int color = 0;
  int element = 0;
  Ellipsoid ellipsoid;
  std::vector<Translate> translates;
  std::size_t bisected() const;
};

struct VisibilityClass {
  Cube cube;
  double m = 0.0;  ///< M(Q)
  double vis = 0.0;
  int r = 0;
  double eta = 0.0;
  std::vector<ColorClass> colors;
};

struct ClassifyOptions {
  MollifierConfig mollifier;
  double h = 0.01;
  int vis_samples = 20000;
  double c = 0.5;          ///< translate layout constant
  std::size_t nodes = 1024;
  double threshold = 0.40;
  double noise_floor = 0.01;  ///< |gap| / vol below this is UNDECIDED
};

/// r = ceil(log2(M / vis)) - 1 clamped to [0, ceil(log2 m_max)].
int visibility_class_index(double m, double vis, double m_max);

/// Centers x_Q + eta sum_j m_j l_j e_j, m_j in 2Z, |m_j| <= c / (eta l_j), inside Q.
std::vector<Eigen::VectorXd> translate_centers(const Cube& q, const Ellipsoid& e, double eta, double c);

VisibilityClass classify(const Polynomial& p, const Cube& q, double m, double m_max, const ColoredNet& net,
                         double eta, const ClassifyOptions& opt);

/// Bisected translates over all translates of the class (every colour).
double bisection_fraction(const VisibilityClass& vc);

/// Largest per-colour share; a single colour can reach 1 when a loose match
/// aligns its layout with the zero set.
double max_color_fraction(const VisibilityClass& vc);

struct AppendixReport {
  double a = 0.0;
  double b = 0.0;
  double area = 0.0;   ///< area of the image in the unit ball
  double bound = 0.0;
  double margin = 0.0;
};

/// Bisection area bound on a ball or ellipsoid, measured after the affine
/// map to the unit ball.
AppendixReport appendix_check(const Polynomial& p, const EllipsoidCell& cell, double h,
                              std::size_t samples = kDefaultGapNodes);

}  // namespace mlk
