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

#include "mlk/geomcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlk/error.hpp"

namespace mlk {

Eigen::VectorXd Cube::lower() const {
  Eigen::VectorXd v(n());
  for (int i = 0; i < n(); ++i) v[i] = static_cast<double>(corner[i]);
  return v;
}

Eigen::VectorXd Cube::upper() const { return lower().array() + 1.0; }

Eigen::VectorXd Cube::center() const { return lower().array() + 0.5; }

bool Cube::contains(const Eigen::VectorXd& x) const {
  for (int i = 0; i < n(); ++i) {
    const double c = static_cast<double>(corner[i]);
    if (!(x[i] > c && x[i] <= c + 1.0)) return false;
  }
  return true;
}

Cube cube_of(const Eigen::VectorXd& x) {
  Cube q;
  q.corner.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    q.corner[i] = static_cast<long>(std::ceil(x[i])) - 1;
  return q;
}

bool Box::contains(const Eigen::VectorXd& x) const {
  return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
}

Tube make_tube(Eigen::VectorXd anchor, Eigen::VectorXd direction, double weight, int family) {
  require(anchor.size() == direction.size(), "tube anchor/direction dimension mismatch");
  require(std::abs(direction.norm() - 1.0) <= 1e-12, "tube direction must be a unit vector");
  require(weight >= 0.0, "tube weight must be nonnegative");
  return Tube{std::move(anchor), std::move(direction), weight, family, 1.0};
}

double wedge_volume(const std::vector<Eigen::VectorXd>& vs) {
  require(!vs.empty(), "wedge of zero vectors");
  const Eigen::Index n = vs.front().size();
  require(static_cast<Eigen::Index>(vs.size()) <= n, "wedge_volume needs d <= n");
  const auto d = static_cast<Eigen::Index>(vs.size());
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) g(i, j) = g(j, i) = vs[i].dot(vs[j]);
  double det = d == 1 ? g(0, 0) : (d == 2 ? g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0)
                                          : g.fullPivLu().determinant());
  if (det <= 1e-12) return 0.0;
  return std::sqrt(det);
}

double axis_distance(const Tube& t, const Eigen::VectorXd& x) {
  const Eigen::VectorXd r = x - t.anchor;
  return (r - r.dot(t.direction) * t.direction).norm();
}

bool tube_indicator(const Tube& t, const Eigen::VectorXd& x) {
  return axis_distance(t, x) <= t.radius;
}

double line_box_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& e, const Box& box) {
  // f(t) = dist(a + t e, box)^2 is convex and piecewise quadratic with
  // breakpoints where a coordinate enters or leaves [lo_i, hi_i].
  const Eigen::Index n = a.size();
  std::vector<double> bps;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (e[i] == 0.0) continue;
    bps.push_back((box.lo[i] - a[i]) / e[i]);
    bps.push_back((box.hi[i] - a[i]) / e[i]);
  }
  std::sort(bps.begin(), bps.end());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> edges;
  edges.push_back(-inf);
  edges.insert(edges.end(), bps.begin(), bps.end());
  edges.push_back(inf);

  auto value = [&](double t) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = a[i] + t * e[i];
      if (x < box.lo[i]) s += (box.lo[i] - x) * (box.lo[i] - x);
      else if (x > box.hi[i]) s += (x - box.hi[i]) * (x - box.hi[i]);
    }
    return s;
  };

  double best = inf;
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    const double t0 = edges[s], t1 = edges[s + 1];
    double probe;
    if (std::isinf(t0) && std::isinf(t1)) probe = 0.0;
    else if (std::isinf(t0)) probe = t1 - 1.0;
    else if (std::isinf(t1)) probe = t0 + 1.0;
    else probe = 0.5 * (t0 + t1);
    // Quadratic A t^2 + B t on this piece.
    double A = 0.0, B = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = a[i] + probe * e[i];
      double bound;
      if (x < box.lo[i]) bound = box.lo[i];
      else if (x > box.hi[i]) bound = box.hi[i];
      else continue;
      A += e[i] * e[i];
      B += 2.0 * e[i] * (a[i] - bound);
    }
    double t = A > 0.0 ? -B / (2.0 * A) : probe;
    t = std::clamp(t, t0, t1);
    if (std::isinf(t)) t = probe;
    best = std::min(best, value(t));
    if (!std::isinf(t0)) best = std::min(best, value(t0));
  }
  return std::sqrt(best);
}

bool tube_cube_incidence(const Tube& t, const Cube& q) {
  return line_box_distance(t.anchor, t.direction, Box::of(q)) <= t.radius;
}

Tube expand_tube(const Tube& t, double factor) {
  require(factor >= 1.0, "tube expansion factor must be >= 1");
  Tube out = t;
  out.radius *= factor;
  return out;
}

std::vector<Cube> lattice_cubes(const Box& region) {
  const int n = region.n();
  std::vector<long> lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    // (c, c+1] meets (lo, hi] iff c + 1 > lo and c < hi.
    lo[i] = static_cast<long>(std::floor(region.lo[i]));
    hi[i] = static_cast<long>(std::ceil(region.hi[i])) - 1;
    if (region.hi[i] <= region.lo[i]) return {};
  }
  std::vector<Cube> out;
  Cube cur;
  cur.corner = lo;
  for (;;) {
    out.push_back(cur);
    int i = n - 1;
    while (i >= 0 && cur.corner[i] == hi[i]) {
      cur.corner[i] = lo[i];
      --i;
    }
    if (i < 0) break;
    ++cur.corner[i];
  }
  return out;
}

TubeFile tubes_from_json(const nlohmann::json& j) {
  try {
    TubeFile f;
    f.n = j.at("n").get<int>();
    f.d = j.at("d").get<int>();
    require(f.n >= 1, "tube file: n must be positive");
    require(f.d >= 2 && f.d <= f.n, "tube file: need 2 <= d <= n");
    for (const auto& t : j.at("tubes")) {
      auto a = t.at("anchor").get<std::vector<double>>();
      auto e = t.at("direction").get<std::vector<double>>();
      require(static_cast<int>(a.size()) == f.n && static_cast<int>(e.size()) == f.n,
              "tube file: anchor/direction length must equal n");
      Eigen::VectorXd ev = Eigen::Map<Eigen::VectorXd>(e.data(), f.n);
      const double nrm = ev.norm();
      if (std::abs(nrm - 1.0) >= 1e-6)
        fail(ErrorKind::InvalidArgument, "tube file: direction is not a unit vector");
      ev /= nrm;
      // Families are numbered 1..d on disk and 0..d-1 in memory.
      const int fam = t.at("family").get<int>() - 1;
      require(fam >= 0 && fam < f.d, "tube file: family index out of range 1..d");
      Tube tube{Eigen::Map<Eigen::VectorXd>(a.data(), f.n), ev, t.value("weight", 1.0), fam, 1.0};
      require(tube.weight >= 0.0, "tube file: negative weight");
      f.tubes.push_back(std::move(tube));
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("malformed tube file: ") + e.what());
  }
}

nlohmann::json to_json(const TubeFile& f) {
  nlohmann::json tubes = nlohmann::json::array();
  for (const auto& t : f.tubes) {
    tubes.push_back({{"anchor", std::vector<double>(t.anchor.data(), t.anchor.data() + t.n())},
                     {"direction", std::vector<double>(t.direction.data(), t.direction.data() + t.n())},
                     {"weight", t.weight},
                     {"family", t.family + 1}});
  }
  return {{"n", f.n}, {"d", f.d}, {"tubes", tubes}};
}

double WeightFunction::at(const Cube& q) const {
  const auto it = entries.find(q);
  return it == entries.end() ? 0.0 : it->second;
}

std::vector<Cube> WeightFunction::support() const {
  std::vector<Cube> out;
  for (const auto& [q, v] : entries) {
    if (v > 0.0) out.push_back(q);
  }
  return out;
}

double WeightFunction::power_sum() const {
  double s = 0.0;
  for (const auto& [q, v] : entries) s += std::pow(v, n);
  return s;
}

double WeightFunction::max_value() const {
  double m = 0.0;
  for (const auto& [q, v] : entries) m = std::max(m, v);
  return m;
}

double WeightFunction::min_positive() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& [q, v] : entries) {
    if (v > 0.0) m = std::min(m, v);
  }
  return m;
}

}  // namespace mlk
