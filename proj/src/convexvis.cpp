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

#include "mlk/convexvis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mlk/error.hpp"
#include "mlk/geomcore.hpp"
#include "mlk/random.hpp"

namespace mlk {

std::vector<Eigen::VectorXd> direction_net(int n, int count, std::uint64_t seed) {
  require(n >= 1 && count >= 1, "direction_net needs n >= 1 and count >= 1");
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  if (n == 1) {
    out.push_back(Eigen::VectorXd::Ones(1));
    return out;
  }
  if (n == 2) {
    for (int i = 0; i < count; ++i) {
      const double t = std::numbers::pi * (i + 0.5) / count;
      out.push_back(Eigen::Vector2d(std::cos(t), std::sin(t)));
    }
    return out;
  }
  if (n == 3) {
    // Fibonacci points on the upper hemisphere.
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = (i + 0.5) / count;
      const double r = std::sqrt(1.0 - z * z);
      const double phi = golden * i;
      out.push_back(Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), z));
    }
    return out;
  }
  Rng rng(derive_seed(seed, 0xd1e));
  for (int i = 0; i < count; ++i) out.push_back(uniform_on_sphere(rng, n));
  return out;
}

int default_direction_count(int n) { return n == 2 ? 512 : 2048; }

GaugeBody::GaugeBody(int n, double ball_scale, std::vector<Eigen::VectorXd> supports, int directions)
    : n_(n), ball_scale_(ball_scale), supports_(std::move(supports)) {
  require(n >= 1, "gauge body needs n >= 1");
  require(ball_scale >= 0.0, "ball scale must be nonnegative");
  require(ball_scale > 0.0 || !supports_.empty(), "gauge body must be bounded");
  for (const auto& s : supports_) require(s.size() == n, "support vector dimension mismatch");
  dirs_ = direction_net(n, directions > 0 ? directions : default_direction_count(n));
  net_gauge_.reserve(dirs_.size());
  for (const auto& d : dirs_) net_gauge_.push_back(gauge(d));
}

GaugeBody GaugeBody::ball(int n, double radius, int directions) {
  require(radius > 0.0, "ball radius must be positive");
  return GaugeBody(n, 1.0 / radius, {}, directions);
}

GaugeBody GaugeBody::box(const Eigen::VectorXd& half_widths, int directions) {
  const int n = static_cast<int>(half_widths.size());
  std::vector<Eigen::VectorXd> s;
  for (int j = 0; j < n; ++j) {
    require(half_widths[j] > 0.0, "box half widths must be positive");
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    f[j] = 1.0 / half_widths[j];
    s.push_back(f);
  }
  return GaugeBody(n, 0.0, std::move(s), directions);
}

GaugeBody GaugeBody::from_surface(const SurfaceSampleSet& s, int directions) {
  const int n = s.n();
  const auto dirs = direction_net(n, directions > 0 ? directions : default_direction_count(n));
  std::vector<Eigen::VectorXd> supports;
  supports.reserve(dirs.size());
  for (const auto& d : dirs) {
    // Subgradient of u -> sum w |u.n| at d.
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto nv = s.normal(i);
      const double t = d.dot(nv);
      if (t > 0.0) {
        acc += s.weight(i) * nv;
      } else if (t < 0.0) {
        acc -= s.weight(i) * nv;
      }
    }
    supports.push_back(std::move(acc));
  }
  return GaugeBody(n, 1.0, std::move(supports), directions);
}

double GaugeBody::gauge(const Eigen::VectorXd& u) const {
  double g = ball_scale_ > 0.0 ? ball_scale_ * u.norm() : 0.0;
  for (const auto& s : supports_) g = std::max(g, std::abs(u.dot(s)));
  return g;
}

GaugeBody build_gauge(const Polynomial& p, const Region& q, const std::optional<MollifierConfig>& cfg,
                      double h, int directions) {
  require(p.is_normalized(), "build_gauge expects a normalized polynomial");
  ExtractOptions opt;
  opt.h = h;
  SurfaceSampleSet s = cfg ? extract_mollified(p, q, *cfg, opt) : extract_surface(p, q, opt);
  return GaugeBody::from_surface(s, directions);
}

VolumeEstimate body_volume(const GaugeBody& k, int samples, std::uint64_t seed) {
  require(samples >= 1000, "body_volume needs at least 1000 samples");
  Rng rng(derive_seed(seed, 0xb0d7));
  const int n = k.n();
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double r = k.radial(uniform_on_sphere(rng, n));
    const double v = std::pow(r, n);
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / samples;
  const double var = std::max(0.0, sum2 / samples - mean * mean);
  const double w = unit_ball_volume(n);
  return {w * mean, w * std::sqrt(var / samples)};
}

double visibility(const GaugeBody& k, int samples, std::uint64_t seed) {
  return std::pow(body_volume(k, samples, seed).value, -1.0 / k.n());
}

double visibility(const Polynomial& p, const Region& q, const std::optional<MollifierConfig>& cfg,
                  double h, int samples, std::uint64_t seed) {
  return visibility(build_gauge(p, q, cfg, h), samples, seed);
}

namespace {

// Centered minimum-volume enclosing ellipsoid weights for symmetric point
// sets {+-a_i}; returns X = sum u_i a_i a_i^T.
Eigen::MatrixXd khachiyan(const std::vector<Eigen::VectorXd>& pts, double tol, int max_iter) {
  const int n = static_cast<int>(pts.front().size());
  const Eigen::Index m = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd a(m, n);
  for (Eigen::Index i = 0; i < m; ++i) a.row(i) = pts[i].transpose();
  Eigen::VectorXd u = Eigen::VectorXd::Constant(m, 1.0 / m);
  Eigen::MatrixXd x = a.transpose() * u.asDiagonal() * a;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::MatrixXd xinv = x.inverse();
    const Eigen::VectorXd kappa = ((a * xinv).array() * a.array()).rowwise().sum();
    Eigen::Index jmax = 0, jmin = -1;
    kappa.maxCoeff(&jmax);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (u[i] > 0.0 && (jmin < 0 || kappa[i] < kappa[jmin])) jmin = i;
    }
    const double up = kappa[jmax] / n - 1.0;
    const double down = 1.0 - kappa[jmin] / n;
    if (up <= tol && down <= tol) break;
    // Todd-Yildirim: toward the farthest point, or away from the nearest.
    Eigen::Index j;
    double beta;
    if (up >= down) {
      j = jmax;
      beta = (kappa[j] - n) / (n * (kappa[j] - 1.0));
    } else {
      j = jmin;
      if (u[j] >= 1.0) break;
      const double floor = -u[j] / (1.0 - u[j]);
      beta = kappa[j] > 1.0 ? std::max(floor, (kappa[j] - n) / (n * (kappa[j] - 1.0))) : floor;
    }
    u *= 1.0 - beta;
    u[j] += beta;
    if (u[j] < 0.0) u[j] = 0.0;
    x = (1.0 - beta) * x + beta * a.row(j).transpose() * a.row(j);
  }
  return x;
}

}  // namespace

JohnResult john_ellipsoid(const GaugeBody& k, double tol) {
  const int n = k.n();
  const auto& dirs = k.directions();
  std::vector<Eigen::VectorXd> boundary;
  boundary.reserve(dirs.size());
  for (std::size_t j = 0; j < dirs.size(); ++j) boundary.push_back(dirs[j] / k.net_gauge()[j]);

  // K = {|u| <= 1/b} cut by the slabs |u.s_i| <= 1, so its polar is the hull of
  // the s_i and the sphere of radius b, sampled on the net.
  std::vector<Eigen::VectorXd> a;
  for (const auto& s : k.supports()) {
    if (s.norm() > k.ball_scale()) a.push_back(s);
  }
  if (k.ball_scale() > 0.0) {
    for (const auto& d : dirs) a.push_back(k.ball_scale() * d);
  }
  const Eigen::MatrixXd x = khachiyan(a, 1e-5, 200000);
  Eigen::MatrixXd form = n * x;
  form = 0.5 * (form + form.transpose());
  Ellipsoid e(form);

  // max of g over E is exact for a max of linear forms: |L s| and l_max.
  auto inner_of = [&](const Ellipsoid& el) {
    const Eigen::MatrixXd l = el.shape_map();
    double g = k.ball_scale() * el.lengths()[0];
    for (const auto& s : k.supports()) g = std::max(g, (l * s).norm());
    return g;
  };
  double inner = inner_of(e);
  if (inner > 1.0 + tol) fail(ErrorKind::Certification, "John ellipsoid leaves K beyond tolerance");
  if (inner > 1.0) {
    e = e.scaled(1.0 / inner);
    inner = inner_of(e);
  }
  double outer = 0.0;
  for (const auto& r : boundary) outer = std::max(outer, e.gauge(r));
  JohnResult res{e, inner, outer, false};
  res.certified = inner <= 1.0 + 1e-12 && outer <= std::sqrt(static_cast<double>(n)) * (1.0 + tol);
  if (!res.certified) fail(ErrorKind::Certification, "K is not within sqrt(n)(1+tol) E on the net");
  return res;
}

namespace {

// log max(1, sqrt(lambda_max), 1/sqrt(lambda_min)) for the pencil (a1, a2),
// given w = chol(a2)^{-1}.
double bm_pencil(const Eigen::MatrixXd& a1, const Eigen::MatrixXd& w) {
  const Eigen::MatrixXd c = w * a1 * w.transpose();
  double lmin, lmax;
  if (c.rows() == 2) {
    const double m = 0.5 * (c(0, 0) + c(1, 1));
    const double r = std::hypot(0.5 * (c(0, 0) - c(1, 1)), c(0, 1));
    lmin = m - r;
    lmax = m + r;
  } else {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c, Eigen::EigenvaluesOnly);
    lmin = es.eigenvalues().minCoeff();
    lmax = es.eigenvalues().maxCoeff();
  }
  return std::max({0.0, 0.5 * std::log(lmax), -0.5 * std::log(lmin)});
}

Eigen::MatrixXd inv_chol(const Eigen::MatrixXd& a) {
  const Eigen::LLT<Eigen::MatrixXd> llt(a);
  require(llt.info() == Eigen::Success, "ellipsoid form is not positive definite");
  Eigen::MatrixXd l = llt.matrixL();
  return l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
}

}  // namespace

double banach_mazur(const Ellipsoid& e1, const Ellipsoid& e2) {
  require(e1.n() == e2.n(), "banach_mazur dimension mismatch");
  if (e1.form() == e2.form()) return 0.0;
  return std::max(bm_pencil(e1.form(), inv_chol(e2.form())), bm_pencil(e2.form(), inv_chol(e1.form())));
}

double radial_distance(const GaugeBody& k, const Ellipsoid& e) {
  require(k.n() == e.n(), "radial_distance dimension mismatch");
  double worst = 0.0;
  const auto& dirs = k.directions();
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    worst = std::max(worst, std::abs(std::log(e.gauge(dirs[i]) / k.net_gauge()[i])));
  }
  return worst;
}

double default_alpha(int n, double rho) { return std::sqrt(static_cast<double>(n)) * 1.1 * std::exp(rho); }

double ColoredNet::alpha() const { return default_alpha(params.n, params.rho); }

namespace {

void validate(const NetParams& p) {
  require(p.n >= 1, "net needs n >= 1");
  require(p.rho > 0.0, "net radius rho must be positive");
  require(p.gamma > 1.0, "color separation gamma must exceed 1");
  require(p.v_min > 0.0 && p.v_min <= p.v_max, "net volume range must satisfy 0 < v_min <= v_max");
  require(p.axis_ratio_cap >= 1.0, "axis ratio cap must be >= 1");
  require(p.pool >= 1, "net candidate pool must be nonempty");
}

Eigen::MatrixXd random_rotation(int n, Rng& rng) {
  Eigen::MatrixXd g(n, n);
  for (int j = 0; j < n; ++j) g.col(j) = gaussian_vector(rng, n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Ellipsoid slab_sample(const NetParams& p, Rng& rng, bool snap) {
  const int n = p.n;
  const double lr = std::log(p.axis_ratio_cap);
  auto coord = [&](double lo, double hi) {
    const double u = uniform01(rng);
    if (snap && uniform01(rng) < 0.5) return u < 0.5 ? lo : hi;
    return lo + (hi - lo) * u;
  };
  Eigen::VectorXd t(n);
  for (int j = 0; j < n; ++j) t[j] = coord(0.0, lr);
  const double logv = coord(std::log(p.v_min), std::log(p.v_max));
  const double shift = (logv - std::log(unit_ball_volume(n)) - t.sum()) / n;
  Eigen::VectorXd l = (t.array() + shift).exp();
  return Ellipsoid::from_axes(l, random_rotation(n, rng));
}

}  // namespace

Ellipsoid random_slab_ellipsoid(const NetParams& params, Rng& rng) {
  validate(params);
  return slab_sample(params, rng, false);
}

ColoredNet build_net(const NetParams& params) {
  validate(params);
  Rng rng(derive_seed(params.seed, 0x4e7));
  std::vector<Ellipsoid> pool;
  pool.reserve(params.pool);
  for (int i = 0; i < params.pool; ++i) pool.push_back(slab_sample(params, rng, i % 10 == 0));

  // Farthest-point greedy: each new element is >= rho from all earlier ones.
  std::vector<Ellipsoid> net{pool.front()};
  std::vector<Eigen::MatrixXd> winv{inv_chol(pool.front().form())};
  std::vector<double> dist(pool.size(), std::numeric_limits<double>::infinity());
  for (;;) {
    const Eigen::MatrixXd& w = winv.back();
    std::size_t far = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      dist[i] = std::min(dist[i], bm_pencil(pool[i].form(), w));
      if (dist[i] > dist[far]) far = i;
    }
    if (dist[far] < params.rho) break;
    net.push_back(pool[far]);
    winv.push_back(inv_chol(pool[far].form()));
  }

  // Repair pass: fresh uncovered samples are >= rho away, so adding them
  // keeps the separation.
  for (int round = 0; round < 50; ++round) {
    int added = 0;
    for (int i = 0; i < 5000; ++i) {
      Ellipsoid e = slab_sample(params, rng, i % 10 == 0);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& w : winv) {
        best = std::min(best, bm_pencil(e.form(), w));
        if (best < params.rho) break;
      }
      if (best >= params.rho) {
        winv.push_back(inv_chol(e.form()));
        net.push_back(std::move(e));
        ++added;
      }
    }
    if (added == 0) break;
  }

  // Greedy coloring of the conflict graph d < gamma rho.
  ColoredNet out{params, net, std::vector<int>(net.size(), -1), 0};
  const double sep = params.gamma * params.rho;
  for (std::size_t i = 0; i < net.size(); ++i) {
    std::vector<bool> used(net.size() + 1, false);
    for (std::size_t j = 0; j < i; ++j) {
      if (banach_mazur(net[i], net[j]) < sep) used[out.colors[j]] = true;
    }
    int c = 0;
    while (used[c]) ++c;
    out.colors[i] = c;
    out.color_count = std::max(out.color_count, c + 1);
  }
  return out;
}

NetCheck check_net(const ColoredNet& net, int cover_trials, std::uint64_t seed) {
  NetCheck r;
  r.min_separation = std::numeric_limits<double>::infinity();
  r.min_color_separation = std::numeric_limits<double>::infinity();
  const auto& el = net.elements;
  for (std::size_t i = 0; i < el.size(); ++i) {
    for (std::size_t j = i + 1; j < el.size(); ++j) {
      const double d = banach_mazur(el[i], el[j]);
      r.min_separation = std::min(r.min_separation, d);
      if (net.colors[i] == net.colors[j]) r.min_color_separation = std::min(r.min_color_separation, d);
    }
  }
  Rng rng(derive_seed(seed, 0xc0fe));
  for (int t = 0; t < cover_trials; ++t) {
    const Ellipsoid e = random_slab_ellipsoid(net.params, rng);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& x : el) best = std::min(best, banach_mazur(e, x));
    r.max_cover_distance = std::max(r.max_cover_distance, best);
  }
  const double rho = net.params.rho;
  r.ok = r.min_separation >= rho && r.min_color_separation >= net.params.gamma * rho &&
         r.max_cover_distance <= rho;
  return r;
}

ClosestColored closest_colored(const GaugeBody& k, const ColoredNet& net, double alpha) {
  require(alpha >= 1.0, "closeness factor must be >= 1");
  ClosestColored out;
  const double tol = std::log(alpha);
  std::map<int, int> count;
  for (std::size_t i = 0; i < net.elements.size(); ++i) {
    if (radial_distance(k, net.elements[i]) > tol) continue;
    ++out.close_count;
    const int c = net.colors[i];
    if (++count[c] == 1) {
      out.by_color[c] = static_cast<int>(i);
    } else if (count[c] == 2) {
      out.violations.push_back(c);
    }
  }
  if (out.close_count == 0) fail(ErrorKind::Certification, "no net ellipsoid is close to the body");
  return out;
}

nlohmann::json to_json(const ColoredNet& net) {
  nlohmann::json j;
  const auto& p = net.params;
  j["params"] = {{"n", p.n},         {"rho", p.rho},   {"gamma", p.gamma},
                 {"v_min", p.v_min}, {"v_max", p.v_max}, {"axis_ratio_cap", p.axis_ratio_cap},
                 {"pool", p.pool},   {"seed", p.seed}, {"alpha", net.alpha()}};
  j["color_count"] = net.color_count;
  nlohmann::json els = nlohmann::json::array();
  for (std::size_t i = 0; i < net.elements.size(); ++i) {
    const auto& f = net.elements[i].form();
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < f.rows(); ++r) {
      std::vector<double> row(f.cols());
      for (int c = 0; c < f.cols(); ++c) row[c] = f(r, c);
      rows.push_back(row);
    }
    els.push_back({{"form", rows}, {"color", net.colors[i]}});
  }
  j["elements"] = els;
  return j;
}

ColoredNet net_from_json(const nlohmann::json& j) {
  try {
    ColoredNet net;
    const auto& p = j.at("params");
    net.params.n = p.at("n").get<int>();
    net.params.rho = p.at("rho").get<double>();
    net.params.gamma = p.at("gamma").get<double>();
    net.params.v_min = p.at("v_min").get<double>();
    net.params.v_max = p.at("v_max").get<double>();
    net.params.axis_ratio_cap = p.at("axis_ratio_cap").get<double>();
    net.params.pool = p.value("pool", 20000);
    net.params.seed = p.value("seed", std::uint64_t{0});
    const int n = net.params.n;
    for (const auto& e : j.at("elements")) {
      Eigen::MatrixXd f(n, n);
      const auto& rows = e.at("form");
      require(rows.size() == static_cast<std::size_t>(n), "net form has wrong size");
      for (int r = 0; r < n; ++r) {
        require(rows[r].size() == static_cast<std::size_t>(n), "net form has wrong size");
        for (int c = 0; c < n; ++c) f(r, c) = rows[r][c].get<double>();
      }
      net.elements.emplace_back(f);
      net.colors.push_back(e.at("color").get<int>());
      net.color_count = std::max(net.color_count, net.colors.back() + 1);
    }
    return net;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::InvalidArgument, std::string("malformed net json: ") + ex.what());
  }
}

namespace {

SurfaceSampleSet extract_for(const Polynomial& p, const Region& q, const VisOptions& opt) {
  ExtractOptions eo;
  eo.h = opt.h;
  return opt.mollifier ? extract_mollified(p, q, *opt.mollifier, eo) : extract_surface(p, q, eo);
}

}  // namespace

BoundReport geometric_mean_bound(const Polynomial& p, const Region& q, const VisOptions& opt,
                                 const std::vector<Eigen::VectorXd>& vs, double d_bound) {
  const int n = p.n();
  const int d = static_cast<int>(vs.size());
  require(d >= 1 && d <= n, "geometric_mean_bound needs 1 <= d <= n vectors");
  require(d_bound >= 1.0, "D bound must be >= 1");
  const SurfaceSampleSet s = extract_for(p, q, opt);
  const GaugeBody k = GaugeBody::from_surface(s, opt.directions);
  BoundReport r;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& e : k.directions()) {
    const double a = s.directional(e);
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  r.applicable = lo >= 1.0 && hi <= d_bound;
  if (!r.applicable) return r;
  double prod = 1.0;
  for (const auto& v : vs) {
    require(v.size() == n, "vector dimension mismatch");
    prod *= s.directional(v);
  }
  r.lhs = std::pow(wedge_volume(vs), 1.0 / n) * visibility(k, opt.samples, opt.seed);
  r.rhs = std::pow(d_bound, static_cast<double>(n - d) / n) * std::pow(prod, 1.0 / n);
  r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : (r.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  return r;
}

BoundReport vis_degree_bound(const Polynomial& p, const Region& q, const VisOptions& opt) {
  const int n = p.n();
  require(n >= 2, "vis_degree_bound needs n >= 2");
  const SurfaceSampleSet s = extract_for(p, q, opt);
  const GaugeBody k = GaugeBody::from_surface(s, opt.directions);
  BoundReport r;
  for (const auto& e : k.directions()) {
    if (s.directional(e) <= 1.0) {
      r.applicable = true;
      break;
    }
  }
  if (!r.applicable) return r;
  const int deg = std::max(1, p.degree());
  r.lhs = std::pow(visibility(k, opt.samples, opt.seed), static_cast<double>(n) / (n - 1));
  r.rhs = deg;
  r.ratio = r.lhs / r.rhs;
  return r;
}

}  // namespace mlk
