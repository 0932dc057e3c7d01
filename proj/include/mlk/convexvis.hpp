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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mlk/polyspace.hpp"
#include "mlk/quadrature.hpp"
#include "mlk/random.hpp"
#include "mlk/surfcalc.hpp"

namespace mlk {

/// Quasi-uniform unit directions covering the sphere up to sign.
std::vector<Eigen::VectorXd> direction_net(int n, int count, std::uint64_t seed = 0);

/// Default direction count: 512 for n = 2, 2048 otherwise.
int default_direction_count(int n);

/// Symmetric convex body given by its gauge
///   g(u) = max(ball_scale |u|, max_i |u . s_i|).
/// Surface bodies use ball_scale = 1 and one supporting vector per net
/// direction, so g is exact on the net and a lower bound elsewhere.
class GaugeBody {
 public:
  GaugeBody(int n, double ball_scale, std::vector<Eigen::VectorXd> supports, int directions);

  static GaugeBody ball(int n, double radius = 1.0, int directions = 0);
  /// Box {|u_j| <= half_widths_j} with no ball term.
  static GaugeBody box(const Eigen::VectorXd& half_widths, int directions = 0);
  /// Gauge max(|u|, sum_i w_i |u . n_i|) of a surface sample set.
  static GaugeBody from_surface(const SurfaceSampleSet& s, int directions = 0);

  int n() const { return n_; }
  double gauge(const Eigen::VectorXd& u) const;
  double radial(const Eigen::VectorXd& unit_dir) const { return 1.0 / gauge(unit_dir); }
  bool contains(const Eigen::VectorXd& u) const { return gauge(u) <= 1.0; }

  const std::vector<Eigen::VectorXd>& directions() const { return dirs_; }
  const std::vector<double>& net_gauge() const { return net_gauge_; }
  double ball_scale() const { return ball_scale_; }
  const std::vector<Eigen::VectorXd>& supports() const { return supports_; }

 private:
  int n_;
  double ball_scale_;
  std::vector<Eigen::VectorXd> supports_;
  std::vector<Eigen::VectorXd> dirs_;
  std::vector<double> net_gauge_;
};

GaugeBody build_gauge(const Polynomial& p, const Region& q, const std::optional<MollifierConfig>& cfg,
                      double h, int directions = 0);

struct VolumeEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo volume by the radial formula vol(B) E[g(theta)^{-n}].
VolumeEstimate body_volume(const GaugeBody& k, int samples, std::uint64_t seed);

double visibility(const GaugeBody& k, int samples, std::uint64_t seed);
double visibility(const Polynomial& p, const Region& q, const std::optional<MollifierConfig>& cfg,
                  double h, int samples, std::uint64_t seed);

struct JohnResult {
  Ellipsoid ellipsoid;
  /// max over the certificate points of g on the boundary of E (<= 1 after rescale).
  double inner_gauge = 0.0;
  /// max over net boundary points of K of the E-gauge.
  double outer_gauge = 0.0;
  bool certified = false;
};

/// Inscribed ellipsoid of the net-induced polytope, rescaled into K.
/// Throws Certification when the containment cannot be certified within tol.
JohnResult john_ellipsoid(const GaugeBody& k, double tol = 0.05);

/// log inf{a >= 1 : a^{-1} E1 in E2 in a E1}.
double banach_mazur(const Ellipsoid& e1, const Ellipsoid& e2);

/// Max over unit directions of |log(r_K / r_E)|, sampled on the body's net.
double radial_distance(const GaugeBody& k, const Ellipsoid& e);

struct NetParams {
  int n = 2;
  double rho = 1.0;
  double gamma = 4.0;
  double v_min = 0.0;
  double v_max = 0.0;
  double axis_ratio_cap = 64.0;
  int pool = 20000;
  std::uint64_t seed = 0;
};

struct ColoredNet {
  NetParams params;
  std::vector<Ellipsoid> elements;
  std::vector<int> colors;
  int color_count = 0;
  /// Closeness factor alpha_n = sqrt(n) * 1.1 * e^rho.
  double alpha() const;
};

double default_alpha(int n, double rho);

/// Uniform sample from the net's parameter slab.
Ellipsoid random_slab_ellipsoid(const NetParams& params, Rng& rng);

ColoredNet build_net(const NetParams& params);

struct NetCheck {
  double min_separation = 0.0;
  double min_color_separation = 0.0;
  double max_cover_distance = 0.0;
  bool ok = false;
};
/// Exhaustive pairwise check plus covering test on `cover_trials` fresh slab samples.
NetCheck check_net(const ColoredNet& net, int cover_trials, std::uint64_t seed);

struct ClosestColored {
  std::map<int, int> by_color;  ///< color -> element index
  std::vector<int> violations;  ///< colors with two or more close elements
  int close_count = 0;
};

/// Net elements E with alpha^{-1} K in E in alpha K, grouped by color.
/// Throws Certification when nothing is close.
ClosestColored closest_colored(const GaugeBody& k, const ColoredNet& net, double alpha);

nlohmann::json to_json(const ColoredNet& net);
ColoredNet net_from_json(const nlohmann::json& j);

struct BoundReport {
  bool applicable = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

struct VisOptions {
  std::optional<MollifierConfig> mollifier;
  double h = 0.01;
  int directions = 0;
  int samples = 20000;
  std::uint64_t seed = 0;
};

/// wedge^{1/n} vis against D^{(n-d)/n} (prod surf_{v_j})^{1/n}.
BoundReport geometric_mean_bound(const Polynomial& p, const Region& q, const VisOptions& opt,
                                 const std::vector<Eigen::VectorXd>& vs, double d_bound);

/// vis^{n/(n-1)} against deg p.
BoundReport vis_degree_bound(const Polynomial& p, const Region& q, const VisOptions& opt);

}  // namespace mlk
