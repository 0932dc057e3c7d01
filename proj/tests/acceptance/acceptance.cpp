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

// Acceptance suite: one PASS/FAIL line per criterion, with the measured
// statistics that decided it. Exit status is non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "mlk/convexvis.hpp"
#include "mlk/error.hpp"
#include "mlk/kakeya.hpp"
#include "mlk/oddzero.hpp"
#include "mlk/random.hpp"
#include "mlk/surfcalc.hpp"

using namespace mlk;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void need(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[violated: " << what << "] ";
    }
  }
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Random polynomial of degree k through a random point of the unit cube at
/// `corner`, so its zero set meets the cube.
Polynomial random_through_cube(int n, int k, const Cube& q, Rng& rng) {
  const Polynomial p0 = random_polynomial(make_space(n, k), rng());
  Eigen::VectorXd x = q.lower();
  for (int i = 0; i < n; ++i) x[i] += uniform01(rng);
  Eigen::VectorXd c = p0.coeffs();
  c[0] -= p0.eval(x);  // basis starts with the constant monomial
  return normalize(Polynomial(p0.space(), c));
}

const ColoredNet& plane_net() {
  static const ColoredNet net = [] {
    NetParams np;
    np.n = 2;
    np.v_min = kPi / 64;
    np.v_max = kPi;
    np.axis_ratio_cap = 16.0;
    np.seed = 2024;
    return build_net(np);
  }();
  return net;
}

// ------------------------------------------------------------------------

void c1(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int n : {2, 3}) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(n, n - 1);
    const Polynomial p = affine(make_space(n, 1), e, -0.5);
    const double a = directional_area(p, Region::of(Cube{std::vector<long>(n, 0)}), e, 1e-3);
    v.detail << "flat n=" << n << ": " << a << "; ";
    v.need(std::abs(a - 1.0) <= 1e-3, "flat graph area 1 +- 1e-3");
  }
  const double r = 0.25;
  const Polynomial circle = from_terms(make_space(2, 2), {{{2, 0}, 1.0}, {{0, 2}, 1.0}, {{1, 0}, -1.0},
                                                          {{0, 1}, -1.0}, {{0, 0}, 0.5 - r * r}});
  const SurfaceSampleSet s = extract_surface(circle, Region::of(Cube{{0, 0}}), 1e-3);
  const double e1 = s.directional(Eigen::Vector2d(1, 0)), len = s.total_weight();
  v.detail << "circle surf_e1/4r = " << e1 / (4 * r) << ", perimeter/2pi r = " << len / (2 * kPi * r) << "; ";
  v.need(std::abs(e1 / (4 * r) - 1.0) <= 0.01, "circle surf_e1 = 4r +- 1%");
  v.need(std::abs(len / (2 * kPi * r) - 1.0) <= 0.01, "circle perimeter 2 pi r +- 1%");
  const double dt = seconds_since(t0);
  v.detail << "runtime " << dt << " s";
  v.need(dt < 10.0, "runtime < 10 s");
}

void c2(Verdict& v) {
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Rng rng(derive_seed(2, t));
    const int n = 2 + t % 3;
    const int k = 1 + static_cast<int>(rng() % 6);
    const Polynomial p = random_polynomial(make_space(n, k), rng());
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = 2.0 * uniform01(rng) - 1.0;
    const Eigen::VectorXd g = p.gradient(x);
    const double h = 1e-5;
    Eigen::VectorXd fd(n);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd e = Eigen::VectorXd::Unit(n, i) * h;
      fd[i] = (p.eval(x + e) - p.eval(x - e)) / (2 * h);
    }
    worst = std::max(worst, (g - fd).norm() / std::max(g.norm(), 1e-300));
  }
  v.detail << "max relative error " << worst << " over 100 (p, x)";
  v.need(worst < 1e-6, "relative error < 1e-6");
}

void c3(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = std::numeric_limits<double>::infinity();
  int with_zeros = 0, errors = 0;
  for (int t = 0; t < 200; ++t) {
    Rng rng(derive_seed(3, t));
    const int n = 2 + t % 2;
    const int k = 1 + static_cast<int>(rng() % 4);
    const Polynomial p = random_polynomial(make_space(n, k), rng());
    try {
      const AppendixReport r =
          appendix_check(p, EllipsoidCell{Ellipsoid::ball(n), Eigen::VectorXd::Zero(n)}, n == 2 ? 0.01 : 0.02);
      worst = std::min(worst, r.margin);
      with_zeros += r.area > 0.0;
    } catch (const Error&) {
      ++errors;
    }
  }
  const double dt = seconds_since(t0);
  v.detail << "min margin " << worst << " (" << with_zeros << "/200 meet the ball, " << errors
           << " extraction errors), runtime " << dt << " s";
  v.need(errors == 0, "every trial evaluated");
  v.need(worst >= -1e-2, "margin >= -1e-2");
  v.need(dt < 300.0, "runtime < 5 min");
}

void c4(Verdict& v) {
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Rng rng(derive_seed(4, t));
    const int n = 2 + t % 2;
    const int k = 1 + static_cast<int>(rng() % 6);
    const Polynomial p = random_polynomial(make_space(n, k), rng());
    const Tube tube = make_tube(0.5 * gaussian_vector(rng, n), uniform_on_sphere(rng, n));
    worst = std::max(worst, cylinder_ratio(p, tube, 2.0, n == 2 ? 0.01 : 0.03));
  }
  double sharp = std::numeric_limits<double>::infinity();
  for (int n : {2, 3}) {
    // Three sheets orthogonal to the tube axis, all inside the truncated tube.
    const Eigen::VectorXd e = Eigen::VectorXd::Unit(n, 0);
    Polynomial p = affine(make_space(n, 1), e, 1.0);
    p = multiply(p, affine(make_space(n, 1), e, -0.3), make_space(n, 2));
    p = multiply(p, affine(make_space(n, 1), e, -1.2), make_space(n, 3));
    const Tube tube = make_tube(Eigen::VectorXd::Zero(n), e);
    sharp = std::min(sharp, cylinder_ratio(normalize(p), tube, 2.0, n == 2 ? 0.01 : 0.03));
  }
  v.detail << "max ratio " << worst << " over 100 random p; parallel-sheets ratio " << sharp;
  v.need(worst <= 1.05, "cylinder ratio <= 1.05");
  v.need(sharp >= 0.95, "parallel sheets ratio >= 0.95");
}

void c5(Verdict& v) {
  int violations = 0, low_vis = 0, uncertified = 0;
  double min_vis_ratio = std::numeric_limits<double>::infinity(), max_outer = 0.0;
  for (int b = 0; b < 50; ++b) {
    Rng rng(derive_seed(5, b));
    const int n = b < 35 ? 2 : 3;
    const int k = 1 + b % 5;
    const Cube q{std::vector<long>(n, 0)};
    const Polynomial p = random_through_cube(n, k, q, rng);
    const GaugeBody body =
        build_gauge(p, Region::of(q), MollifierConfig{1e-3, 4, rng()}, n == 2 ? 0.01 : 0.03);
    for (int t = 0; t < 1000; ++t) {
      const Eigen::VectorXd x = gaussian_vector(rng, n), y = gaussian_vector(rng, n);
      const double s = 4.0 * uniform01(rng) - 2.0;
      const double gx = body.gauge(x), gy = body.gauge(y);
      const double tol = 1e-9 * (1.0 + gx + gy);
      violations += body.gauge(x + y) > gx + gy + tol;
      violations += std::abs(body.gauge(-x) - gx) > tol;
      violations += std::abs(body.gauge(s * x) - std::abs(s) * gx) > tol * (1.0 + std::abs(s));
    }
    const VolumeEstimate vol = body_volume(body, 20000, rng());
    const double vis = std::pow(vol.value, -1.0 / n);
    const double base = std::pow(unit_ball_volume(n), -1.0 / n);
    min_vis_ratio = std::min(min_vis_ratio, vis / base);
    low_vis += vis < base * 0.98;
    try {
      const JohnResult j = john_ellipsoid(body, 0.05);
      uncertified += !(j.certified && j.inner_gauge <= 1.0 + 1e-9 && j.outer_gauge <= std::sqrt(n) * 1.05);
      max_outer = std::max(max_outer, j.outer_gauge / std::sqrt(n));
    } catch (const Error&) {
      ++uncertified;
    }
  }
  v.detail << "convexity violations " << violations << ", min vis/ball " << min_vis_ratio << ", John failures "
           << uncertified << " (max outer/sqrt n " << max_outer << ") on 50 bodies";
  v.need(violations == 0, "no convexity violations");
  v.need(low_vis == 0, "visibility >= ball value - 2%");
  v.need(uncertified == 0, "John certificate on every body");
}

void c6(Verdict& v) {
  double bm_err = 0.0;
  for (double N : {2.0, 8.0, 32.0}) {
    const Ellipsoid e = Ellipsoid::from_axes(Eigen::Vector2d(1.0, N), Eigen::Matrix2d::Identity());
    bm_err = std::max(bm_err, std::abs(banach_mazur(Ellipsoid::ball(2), e) - std::log(N)));
  }
  v.detail << "BM error " << bm_err << "; ";
  v.need(bm_err <= 1e-9, "d(B, ellipse(1, N)) = log N +- 1e-9");

  const ColoredNet& net = plane_net();
  const NetCheck chk = check_net(net, 1000, 6);
  v.detail << "net " << net.elements.size() << " elements / " << net.color_count << " colors, min sep "
           << chk.min_separation << ", min color sep " << chk.min_color_separation << ", max cover "
           << chk.max_cover_distance << "; ";
  v.need(chk.ok, "net separation, color separation and covering");

  int multiple = 0, matched = 0;
  for (int t = 0; t < 1000; ++t) {
    Rng rng(derive_seed(6, t));
    std::vector<Eigen::VectorXd> sup;
    const int m = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < m; ++i) sup.push_back(uniform_on_sphere(rng, 2) * std::exp(std::log(8.0) * uniform01(rng)));
    const GaugeBody body(2, 1.0, sup, 0);
    try {
      const ClosestColored cc = closest_colored(body, net, net.alpha());
      multiple += !cc.violations.empty();
      ++matched;
    } catch (const Error&) {
    }
  }
  v.detail << "closeness multiplicity >= 2 on " << multiple << " of 1000 bodies (" << matched << " matched)";
  v.need(multiple == 0, "at most one close element per color");
}

void c7(Verdict& v) {
  double res = 0.0, dir = 0.0;
  for (int t = 0; t < 10; ++t) {
    Rng rng(derive_seed(7, t));
    const int cols = 4 + t;
    Eigen::MatrixXd a(cols - 1, cols);
    for (int j = 0; j < cols; ++j) a.col(j) = gaussian_vector(rng, cols - 1);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const Eigen::VectorXd kernel = svd.matrixV().col(cols - 1);
    ZeroOptions zo;
    zo.tol = 1e-10;
    zo.seed = static_cast<std::uint64_t>(t);
    const ZeroResult z = find_odd_zero(LinearOddMap(a), zo);
    res = std::max(res, (a * z.x).norm());
    dir = std::max(dir, std::min((z.x - kernel).norm(), (z.x + kernel).norm()));
  }
  v.detail << "linear: max residual " << res << ", kernel error " << dir << "; ";
  v.need(res < 1e-8, "linear residual < 1e-8");
  v.need(dir <= 1e-4, "kernel recovered to 1e-4");

  int ok = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    WarmupOptions wo;
    wo.zero.seed = s;
    ok += warmup_bisector(WeightFunction{2, {{Cube{{0, 0}}, 2.0}}}, wo).zero.converged;
  }
  v.detail << "4-subcell fixture converged " << ok << "/10; ";
  v.need(ok >= 7, "warm-up fixture converges in >= 7 of 10 seeds");

  std::vector<double> cs;
  bool all_conv = true;
  for (std::uint64_t s = 0; s < 10; ++s) {
    WeightFunction m{2, {}};
    for (long i = 0; i < 4; ++i) m.entries[Cube{{i, 0}}] = 2.0;
    WarmupOptions wo;
    wo.zero.seed = s;
    const WarmupReport r = warmup_bisector(m, wo);
    all_conv = all_conv && r.zero.converged;
    cs.push_back(r.fitted_c);
  }
  double mean = 0.0, var = 0.0;
  for (double c : cs) mean += c / cs.size();
  for (double c : cs) var += (c - mean) * (c - mean) / (cs.size() - 1);
  const double cv = std::sqrt(var) / mean;
  v.detail << "4-cube fitted c min " << *std::min_element(cs.begin(), cs.end()) << ", mean " << mean << ", CV " << cv;
  v.need(all_conv, "4-cube fixtures converge");
  v.need(*std::min_element(cs.begin(), cs.end()) > 0.0, "fitted c > 0");
  v.need(cv < 0.5, "coefficient of variation < 50%");
}

void c8(Verdict& v) {
  std::vector<double> n2;
  double n1max = 0.0;
  std::size_t hard = 0, nonconv = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    InstanceParams ip;
    ip.tubes_per_family = 1;
    ip.spread = 0.1;
    ip.anchor_half_width = 0.5;
    ip.seed = derive_seed(8, s);
    const KakeyaInstance inst = gen_instance(ip);
    const WeightFunction m = derive_M(inst);
    const double lambda = choose_lambda(m);
    PipelineOptions po;
    po.warmup.zero.seed = ip.seed;
    po.warmup.h = 0.02;
    po.warmup.nodes = 512;
    po.measure_visibility = false;
    const PipelineResult pr = pipeline_polynomial(m, lambda, po);
    if (!pr.warmup.zero.converged) {
      ++nonconv;
      continue;
    }
    const SjTable tab = build_Sj(inst, *pr.warmup.zero.p, MollifierConfig{1e-6, 8, ip.seed}, lambda, 0.02);
    const MarginReport r1 = check_need1(tab, inst, m, std::numeric_limits<double>::infinity());
    const MarginReport r2 = check_need2(tab, inst, std::numeric_limits<double>::infinity());
    hard += r1.hard_violations;
    n1max = std::max(n1max, r1.max);
    n2.push_back(r2.max);
  }
  const double mx = n2.empty() ? 0.0 : *std::max_element(n2.begin(), n2.end());
  const double med = n2.empty() ? 0.0 : median(n2);
  v.detail << "need1 fitted C " << n1max << ", hard violations " << hard << "; need2 max " << mx << ", median "
           << med << " over " << n2.size() << " converged seeds";
  v.need(nonconv == 0, "pipeline converges on every seed");
  v.need(std::isfinite(n1max) && hard == 0, "need1 finite with no hard violations");
  v.need(!n2.empty() && mx <= 2.0 * med, "need2 max <= 2 x median");
}

void c9(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  const KakeyaInstance fx = make_instance(
      2, 2, {TubeFamily{0, {make_tube(Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 0))}},
             TubeFamily{1, {make_tube(Eigen::Vector2d::Zero(), Eigen::Vector2d(0, 1), 1.0, 1)}}});
  const double r0 = theorem_ratio(fx, 0.01).ratio;
  v.detail << "orthogonal ratio " << r0 << "; ";
  v.need(std::abs(r0 - 4.0) <= 0.2, "orthogonal fixture ratio 4 +- 5%");

  const double shear = 0.5;
  for (int n : {2, 3}) {
    const int count = n == 2 ? 50 : 10;
    const double h = n == 2 ? 0.01 : 0.05;
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
    a(0, n - 1) = shear;
    std::vector<double> ratios;
    double dev = 0.0;
    KakeyaInstance worst;
    for (int t = 0; t < count; ++t) {
      InstanceParams ip;
      ip.n = n;
      ip.d = n;
      ip.tubes_per_family = n == 2 ? 3 : 2;
      ip.spread = 0.3;
      ip.anchor_half_width = 1.0;
      ip.seed = derive_seed(90 + n, t);
      const KakeyaInstance inst = gen_instance(ip);
      ratios.push_back(theorem_ratio(inst, h).ratio);
      const double sheared = theorem_ratio(transformed(inst, a, Eigen::VectorXd::Zero(n)), h).ratio;
      const double d = std::abs(sheared / ratios.back() - 1.0);
      if (d >= dev) {
        dev = d;
        worst = inst;
      }
    }
    const double mx = *std::max_element(ratios.begin(), ratios.end()), med = median(ratios);
    v.detail << "n=d=" << n << ": max " << mx << " / median " << med << " = " << mx / med << ", max shear deviation "
             << dev;
    if (n == 3) {
      // Halving the grid step separates quadrature error from the intrinsic
      // change: sheared round tubes are not images of round tubes.
      const double fine = theorem_ratio(transformed(worst, a, Eigen::VectorXd::Zero(n)), h / 2).ratio /
                          theorem_ratio(worst, h / 2).ratio - 1.0;
      v.detail << " (" << std::abs(fine) << " at h/2)";
    }
    v.detail << "; ";
    v.need(mx <= 2.0 * med, "max ratio <= 2 x median (n = " + std::to_string(n) + ")");
    v.need(dev <= 0.05, "shear invariance within 5% (n = " + std::to_string(n) + ")");
  }
  const double dt = seconds_since(t0);
  v.detail << "runtime " << dt << " s";
  v.need(dt < 1800.0, "runtime < 30 min");
}

bool mirrored(const VisibilityClass& a, const VisibilityClass& b) {
  if (a.r != b.r || a.colors.size() != b.colors.size()) return false;
  for (std::size_t i = 0; i < a.colors.size(); ++i) {
    const auto& x = a.colors[i];
    const auto& y = b.colors[i];
    if (x.color != y.color || x.element != y.element || x.translates.size() != y.translates.size()) return false;
    for (std::size_t j = 0; j < x.translates.size(); ++j) {
      const Translate& s = x.translates[j];
      const Translate& t = y.translates[j];
      if ((s.label == BisectLabel::Bisected) != (t.label == BisectLabel::Bisected) || s.gap != -t.gap) return false;
      const bool swapped = (s.sign == SignLabel::Plus && t.sign == SignLabel::Minus) ||
                           (s.sign == SignLabel::Minus && t.sign == SignLabel::Plus) ||
                           (s.sign == t.sign && s.sign != SignLabel::Plus && s.sign != SignLabel::Minus);
      if (!swapped) return false;
    }
  }
  return true;
}

void c10(Verdict& v) {
  const ColoredNet& net = plane_net();
  ClassifyOptions opt;
  opt.mollifier = MollifierConfig{1e-3, 4, 10};
  opt.vis_samples = 5000;
  int mirror_ok = 0, below_one = 0, monotone = 0, classified = 0;
  const Cube q{{0, 0}};
  for (int t = 0; t < 50; ++t) {
    Rng rng(derive_seed(10, t));
    const int k = 1 + static_cast<int>(rng() % 3);
    const Polynomial p = random_through_cube(2, k, q, rng);
    const double m = 1.0 + 3.0 * uniform01(rng);
    try {
      const VisibilityClass a = classify(p, q, m, 4.0, net, 0.1, opt);
      const VisibilityClass b = classify(-p, q, m, 4.0, net, 0.1, opt);
      const double f1 = bisection_fraction(a);
      const double f2 = bisection_fraction(classify(p, q, m, 4.0, net, 0.2, opt));
      const double f4 = bisection_fraction(classify(p, q, m, 4.0, net, 0.4, opt));
      ++classified;
      mirror_ok += mirrored(a, b);
      below_one += f1 < 1.0;
      monotone += f4 >= f2 && f2 >= f1;
    } catch (const Error&) {
    }
  }
  v.detail << classified << "/50 classified; mirror exact " << mirror_ok << ", fraction < 1 at eta 0.1: " << below_one
           << ", monotone over eta 0.4/0.2/0.1: " << monotone;
  v.need(classified == 50, "every instance classified");
  v.need(mirror_ok == classified, "classify(-p) mirrors classify(p)");
  v.need(below_one == classified, "bisection fraction < 1 at eta = 0.1");
  v.need(monotone >= 0.9 * classified, "monotone in >= 90% of trials");
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<bool> selected(10, argc <= 1);
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k >= 1 && k <= 10) selected[static_cast<std::size_t>(k - 1)] = true;
  }
  const std::vector<std::pair<const char*, std::function<void(Verdict&)>>> criteria{
      {"surface engine exactness", c1},
      {"gradient correctness", c2},
      {"sphere-cap area lemma", c3},
      {"cylinder estimate", c4},
      {"gauge and visibility", c5},
      {"Banach-Mazur distance and colored net", c6},
      {"odd-map zero search", c7},
      {"reduction checks", c8},
      {"multilinear Kakeya ratio", c9},
      {"classification machinery", c10},
  };
  int failed = 0, ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    ++ran;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "[exception: " << e.what() << "]";
    }
    failed += !v.pass;
    std::printf("%s criterion %zu (%s): %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                v.detail.str().c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
