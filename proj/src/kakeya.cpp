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

#include "mlk/kakeya.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mlk/error.hpp"
#include "mlk/random.hpp"

namespace mlk {

namespace {

constexpr std::size_t kTupleCap = 10'000'000;

// Sum over tuples (one index per list) of prod weights * wedge of directions.
class TupleSum {
 public:
  explicit TupleSum(int d) : dirs_(static_cast<std::size_t>(d)) {}

  double run(const std::vector<std::vector<const Tube*>>& lists) {
    std::size_t total = 1;
    for (const auto& l : lists) {
      if (l.empty()) return 0.0;
      total *= l.size();
      if (total > kTupleCap) fail(ErrorKind::InvalidArgument, "tuple enumeration exceeds 10^7 tuples");
    }
    lists_ = &lists;
    return recurse(0, 1.0);
  }

 private:
  double recurse(std::size_t j, double weight) {
    if (j == lists_->size()) return weight * wedge_volume(dirs_);
    double s = 0.0;
    for (const Tube* t : (*lists_)[j]) {
      if (t->weight == 0.0) continue;
      dirs_[j] = t->direction;
      s += recurse(j + 1, weight * t->weight);
    }
    return s;
  }

  std::vector<Eigen::VectorXd> dirs_;
  const std::vector<std::vector<const Tube*>>* lists_ = nullptr;
};

Box integer_hull(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return Box{lo.array().floor().matrix(), hi.array().ceil().matrix()};
}

Box required_box_impl(const std::vector<TubeFamily>& families, double extra) {
  require(families.size() >= 2, "tube interactions need at least two families");
  const int n = families.front().tubes.empty() ? 0 : families.front().tubes.front().n();
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  Eigen::VectorXd hi = -lo;
  bool any = false;
  for (std::size_t f = 0; f < families.size(); ++f) {
    for (std::size_t g = f + 1; g < families.size(); ++g) {
      for (const Tube& t1 : families[f].tubes) {
        for (const Tube& t2 : families[g].tubes) {
          const double b = t1.direction.dot(t2.direction);
          const double sin2 = 1.0 - b * b;
          if (sin2 < 1e-18) {
            fail(ErrorKind::Certification, "parallel tubes in distinct families: unbounded interaction");
          }
          const Eigen::VectorXd w = t1.anchor - t2.anchor;
          const double s = (b * t2.direction.dot(w) - t1.direction.dot(w)) / sin2;
          const Eigen::VectorXd c = t1.anchor + s * t1.direction;
          const double r1 = t1.radius + extra, r2 = t2.radius + extra;
          const double rad = (r1 + r2) / std::sqrt(sin2) + r1;
          lo = lo.cwiseMin((c.array() - rad).matrix());
          hi = hi.cwiseMax((c.array() + rad).matrix());
          any = true;
        }
      }
    }
  }
  require(any, "families must be nonempty");
  return integer_hull(lo, hi);
}

bool box_contains(const Box& outer, const Box& inner) {
  return (outer.lo.array() <= inner.lo.array()).all() && (outer.hi.array() >= inner.hi.array()).all();
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

std::size_t KakeyaInstance::tube_count() const {
  std::size_t c = 0;
  for (const auto& f : families) c += f.tubes.size();
  return c;
}

Box required_box(const std::vector<TubeFamily>& families) { return required_box_impl(families, 0.0); }

KakeyaInstance make_instance(int n, int d, std::vector<TubeFamily> families) {
  require(d >= 2 && d <= n, "instance needs 2 <= d <= n");
  require(families.size() == static_cast<std::size_t>(d), "instance needs exactly d families");
  for (std::size_t j = 0; j < families.size(); ++j) {
    require(!families[j].tubes.empty(), "tube families must be nonempty");
    families[j].index = static_cast<int>(j);
    for (auto& t : families[j].tubes) {
      require(t.n() == n, "tube dimension mismatch");
      require(std::abs(t.direction.norm() - 1.0) <= 1e-12, "tube direction must be a unit vector");
      t.family = static_cast<int>(j);
    }
  }
  KakeyaInstance inst{n, d, std::move(families), {}};
  inst.box = required_box(inst.families);
  return inst;
}

KakeyaInstance gen_instance(const InstanceParams& p) {
  require(p.n >= 2, "gen_instance needs n >= 2");
  if (p.d > p.n) fail(ErrorKind::InvalidArgument, "d must not exceed n");
  require(p.d >= 2, "gen_instance needs d >= 2");
  require(p.tubes_per_family >= 1, "need at least one tube per family");
  require(p.spread >= 0.0, "spread must be nonnegative");
  require(!p.transverse || p.spread < std::numbers::pi / 4, "transverse spread must be below pi/4");
  require(p.anchor_half_width > 0.0, "anchor box must have positive size");
  Rng rng(derive_seed(p.seed, 0x7b));
  std::vector<TubeFamily> fams;
  for (int j = 0; j < p.d; ++j) {
    Eigen::VectorXd base = Eigen::VectorXd::Zero(p.n);
    if (p.transverse) {
      base[j] = 1.0;
    } else {
      base = uniform_on_sphere(rng, p.n);
    }
    TubeFamily fam{j, {}};
    for (int t = 0; t < p.tubes_per_family; ++t) {
      const double theta = p.spread * std::pow(uniform01(rng), 1.0 / (p.n - 1));
      Eigen::VectorXd w = gaussian_vector(rng, p.n);
      w -= w.dot(base) * base;
      w.normalize();
      Eigen::VectorXd dir = std::cos(theta) * base + std::sin(theta) * w;
      dir /= dir.norm();
      Eigen::VectorXd anchor(p.n);
      for (int i = 0; i < p.n; ++i) anchor[i] = p.anchor_half_width * (2.0 * uniform01(rng) - 1.0);
      fam.tubes.push_back(make_tube(anchor, dir, 1.0, j));
    }
    fams.push_back(std::move(fam));
  }
  return make_instance(p.n, p.d, std::move(fams));
}

KakeyaInstance instance_from_file(const TubeFile& f) {
  std::vector<TubeFamily> fams(static_cast<std::size_t>(f.d));
  for (const Tube& t : f.tubes) {
    require(t.family >= 0 && t.family < f.d, "tube family out of range");
    fams[static_cast<std::size_t>(t.family)].tubes.push_back(t);
  }
  return make_instance(f.n, f.d, std::move(fams));
}

TubeFile to_tube_file(const KakeyaInstance& inst) {
  TubeFile f{inst.n, inst.d, {}};
  for (const auto& fam : inst.families) {
    for (const auto& t : fam.tubes) f.tubes.push_back(t);
  }
  return f;
}

KakeyaInstance transformed(const KakeyaInstance& inst, const Eigen::MatrixXd& a, const Eigen::VectorXd& shift) {
  require(a.rows() == inst.n && a.cols() == inst.n && shift.size() == inst.n, "transform dimension mismatch");
  std::vector<TubeFamily> fams = inst.families;
  for (auto& f : fams) {
    for (auto& t : f.tubes) {
      t.anchor = a * t.anchor + shift;
      t.direction = (a * t.direction).normalized();
    }
  }
  return make_instance(inst.n, inst.d, std::move(fams));
}

std::vector<int> incident_tubes(const TubeFamily& f, const Cube& q) {
  std::vector<int> out;
  for (std::size_t i = 0; i < f.tubes.size(); ++i) {
    if (tube_cube_incidence(f.tubes[i], q)) out.push_back(static_cast<int>(i));
  }
  return out;
}

double cube_weight(const KakeyaInstance& inst, const Cube& q) {
  std::vector<std::vector<const Tube*>> lists;
  for (const auto& f : inst.families) {
    std::vector<const Tube*> l;
    for (int i : incident_tubes(f, q)) l.push_back(&f.tubes[static_cast<std::size_t>(i)]);
    if (l.empty()) return 0.0;
    lists.push_back(std::move(l));
  }
  return TupleSum(inst.d).run(lists);
}

WeightFunction cube_weights(const KakeyaInstance& inst) {
  // A cube meeting two tubes holds points within radius + sqrt(n) of both lines.
  const Box region = required_box_impl(inst.families, std::sqrt(static_cast<double>(inst.n)));
  WeightFunction w{inst.n, {}};
  for (const Cube& q : lattice_cubes(region)) {
    const double f = cube_weight(inst, q);
    if (f > 0.0) w.entries[q] = f;
  }
  return w;
}

WeightFunction derive_M(const WeightFunction& f, int d) {
  require(d >= 2, "derive_M needs d >= 2");
  WeightFunction m{f.n, {}};
  const double expo = 1.0 / (f.n * (d - 1.0));
  for (const auto& [q, v] : f.entries) {
    require(v >= 0.0, "cube weights must be nonnegative");
    if (v > 0.0) m.entries[q] = std::pow(v, expo);
  }
  if (m.entries.empty()) fail(ErrorKind::Degenerate, "all cube weights vanish");
  const double scale = std::pow(m.power_sum(), -1.0 / f.n);
  for (auto& [q, v] : m.entries) v *= scale;
  return m;
}

WeightFunction derive_M(const KakeyaInstance& inst) { return derive_M(cube_weights(inst), inst.d); }

double choose_lambda(const WeightFunction& m) {
  require(!m.support().empty(), "choose_lambda needs a nonempty support");
  return std::max(10.0, std::pow(m.min_positive(), -static_cast<double>(m.n)));
}

PipelineResult pipeline_polynomial(const WeightFunction& m, double lambda, const PipelineOptions& opt) {
  require(lambda > 0.0, "lambda must be positive");
  WeightFunction m0{m.n, {}};
  for (const auto& [q, v] : m.entries) {
    if (v > 0.0) m0.entries[q] = lambda * v;
  }
  PipelineResult res;
  res.lambda = lambda;
  res.warmup = warmup_bisector(m0, opt.warmup);
  res.k_over_lambda = res.warmup.k / lambda;
  res.cubes = res.warmup.cubes;
  if (!opt.measure_visibility) return res;
  res.fitted_vis_constant = std::numeric_limits<double>::infinity();
  const Polynomial& p = *res.warmup.zero.p;
  for (std::size_t i = 0; i < res.cubes.size(); ++i) {
    const double v =
        visibility(p, Region::of(res.cubes[i]), opt.mollifier, opt.h, opt.vis_samples, opt.mollifier.seed);
    res.vis.push_back(v);
    res.vis_ratio.push_back(v / res.warmup.weights[i]);
    res.fitted_vis_constant = std::min(res.fitted_vis_constant, res.vis_ratio.back());
  }
  return res;
}

SjTable build_Sj(const KakeyaInstance& inst, const Polynomial& p, const MollifierConfig& cfg, double lambda,
                 double h) {
  require(lambda > 0.0, "lambda must be positive");
  validate(cfg);
  SjTable s{lambda, cfg, {}};
  std::map<Cube, SurfaceSampleSet> cache;
  ExtractOptions eo;
  eo.h = h;
  const auto cubes = lattice_cubes(inst.box);
  for (std::size_t j = 0; j < inst.families.size(); ++j) {
    const auto& fam = inst.families[j];
    for (std::size_t i = 0; i < fam.tubes.size(); ++i) {
      const Tube& t = fam.tubes[i];
      for (const Cube& q : cubes) {
        if (!tube_cube_incidence(t, q)) continue;
        auto it = cache.find(q);
        if (it == cache.end()) {
          Box b = Box::of(q);
          b.lo = b.lo.cwiseMax(inst.box.lo);
          b.hi = b.hi.cwiseMin(inst.box.hi);
          it = cache.emplace(q, extract_mollified(p, Region::of(b), cfg, eo)).first;
        }
        s.entries[SjKey{static_cast<int>(j), q, static_cast<int>(i)}] = it->second.directional(t.direction) / lambda;
      }
    }
  }
  return s;
}

MarginReport check_need1(const SjTable& s, const KakeyaInstance& inst, const WeightFunction& m, double budget) {
  MarginReport rep;
  rep.budget = budget;
  const int d = inst.d;
  for (const Cube& q : m.support()) {
    const double mn = std::pow(m.at(q), inst.n);
    std::vector<std::vector<std::pair<const Tube*, double>>> lists;
    for (std::size_t j = 0; j < inst.families.size(); ++j) {
      std::vector<std::pair<const Tube*, double>> l;
      for (int i : incident_tubes(inst.families[j], q)) {
        const auto it = s.entries.find(SjKey{static_cast<int>(j), q, i});
        l.emplace_back(&inst.families[j].tubes[static_cast<std::size_t>(i)], it == s.entries.end() ? 0.0 : it->second);
      }
      lists.push_back(std::move(l));
    }
    // Enumerate incident tuples.
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    bool empty = false;
    for (const auto& l : lists) empty = empty || l.empty();
    if (empty) continue;
    std::vector<Eigen::VectorXd> dirs(static_cast<std::size_t>(d));
    for (;;) {
      double prod = 1.0;
      for (int j = 0; j < d; ++j) {
        const auto& e = lists[static_cast<std::size_t>(j)][idx[static_cast<std::size_t>(j)]];
        dirs[static_cast<std::size_t>(j)] = e.first->direction;
        prod *= e.second;
      }
      const double lhs = wedge_volume(dirs) * mn;
      if (lhs > 0.0) {
        if (prod > 0.0) {
          rep.values.push_back(lhs / prod);
        } else {
          ++rep.hard_violations;
        }
      }
      int j = 0;
      while (j < d && ++idx[static_cast<std::size_t>(j)] == lists[static_cast<std::size_t>(j)].size()) {
        idx[static_cast<std::size_t>(j++)] = 0;
      }
      if (j == d) break;
    }
  }
  for (double v : rep.values) rep.max = std::max(rep.max, v);
  rep.median = median_of(rep.values);
  rep.pass = rep.hard_violations == 0 && std::isfinite(rep.max) && rep.max <= budget;
  return rep;
}

MarginReport check_need2(const SjTable& s, const KakeyaInstance& inst, double budget) {
  MarginReport rep;
  rep.budget = budget;
  std::map<std::pair<int, int>, double> sums;
  for (std::size_t j = 0; j < inst.families.size(); ++j) {
    for (std::size_t i = 0; i < inst.families[j].tubes.size(); ++i) sums[{static_cast<int>(j), static_cast<int>(i)}] = 0.0;
  }
  for (const auto& [key, v] : s.entries) sums[{key.family, key.tube}] += v;
  for (const auto& [key, v] : sums) {
    rep.values.push_back(v);
    rep.max = std::max(rep.max, v);
  }
  rep.median = median_of(rep.values);
  rep.pass = rep.max <= budget;
  return rep;
}

RatioReport theorem_ratio(const KakeyaInstance& inst, double grid_h) {
  require(grid_h > 0.0, "grid step must be positive");
  if (!box_contains(inst.box, required_box(inst.families))) {
    fail(ErrorKind::Certification, "working box does not cover all tube interactions");
  }
  const int n = inst.n, d = inst.d;
  std::vector<long> count(static_cast<std::size_t>(n));
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) {
    count[static_cast<std::size_t>(i)] = static_cast<long>(std::ceil((inst.box.hi[i] - inst.box.lo[i]) / grid_h - 1e-9));
    total *= static_cast<std::size_t>(count[static_cast<std::size_t>(i)]);
  }
  RatioReport rep;
  rep.points = total;
  TupleSum sum(d);
  std::vector<std::vector<const Tube*>> lists(static_cast<std::size_t>(d));
  std::vector<long> idx(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd x(n);
  const double expo = 1.0 / (d - 1.0);
  double acc = 0.0;
  for (std::size_t pt = 0; pt < total; ++pt) {
    for (int i = 0; i < n; ++i) x[i] = inst.box.lo[i] + (idx[static_cast<std::size_t>(i)] + 0.5) * grid_h;
    bool hit = true;
    for (int j = 0; j < d && hit; ++j) {
      auto& l = lists[static_cast<std::size_t>(j)];
      l.clear();
      for (const Tube& t : inst.families[static_cast<std::size_t>(j)].tubes) {
        if (tube_indicator(t, x)) l.push_back(&t);
      }
      hit = !l.empty();
    }
    if (hit) acc += std::pow(sum.run(lists), expo);
    int i = 0;
    while (i < n && ++idx[static_cast<std::size_t>(i)] == count[static_cast<std::size_t>(i)]) idx[static_cast<std::size_t>(i++)] = 0;
  }
  rep.lhs = acc * std::pow(grid_h, n);
  double prod = 1.0;
  for (const auto& f : inst.families) {
    double s = 0.0;
    for (const auto& t : f.tubes) s += t.weight;
    prod *= s;
  }
  rep.rhs = std::pow(prod, expo);
  rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
  return rep;
}

const char* to_string(SignLabel s) {
  switch (s) {
    case SignLabel::Plus: return "+";
    case SignLabel::Minus: return "-";
    case SignLabel::Undecided: return "UNDECIDED";
    case SignLabel::Bisected: return "BISECTED";
  }
  return "?";
}

std::size_t ColorClass::bisected() const {
  return static_cast<std::size_t>(std::count_if(translates.begin(), translates.end(),
                                                [](const Translate& t) { return t.label == BisectLabel::Bisected; }));
}

int visibility_class_index(double m, double vis, double m_max) {
  require(m > 0.0 && vis > 0.0, "class index needs positive M(Q) and visibility");
  const int top = std::max(0, static_cast<int>(std::ceil(std::log2(std::max(m_max, 1.0)))));
  const int r = static_cast<int>(std::ceil(std::log2(m / vis))) - 1;
  return std::clamp(r, 0, top);
}

std::vector<Eigen::VectorXd> translate_centers(const Cube& q, const Ellipsoid& e, double eta, double c) {
  require(eta > 0.0 && eta < 1.0, "eta must lie in (0, 1)");
  require(c > 0.0, "layout constant must be positive");
  const int n = e.n();
  std::vector<long> lim(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double bound = c / (eta * e.lengths()[j]);
    lim[static_cast<std::size_t>(j)] = 2 * static_cast<long>(std::floor(bound / 2.0 + 1e-12));
  }
  const Eigen::VectorXd xq = q.center();
  const Box b = Box::of(q);
  std::vector<Eigen::VectorXd> out;
  std::vector<long> m(lim.size());
  for (std::size_t j = 0; j < m.size(); ++j) m[j] = -lim[j];
  for (;;) {
    Eigen::VectorXd x = xq;
    for (int j = 0; j < n; ++j) x += eta * static_cast<double>(m[static_cast<std::size_t>(j)]) * e.lengths()[j] * e.axes().col(j);
    if (((x - b.lo).array() >= -1e-12).all() && ((b.hi - x).array() >= -1e-12).all()) out.push_back(x);
    std::size_t j = 0;
    while (j < m.size()) {
      m[j] += 2;
      if (m[j] <= lim[j]) break;
      m[j] = -lim[j];
      ++j;
    }
    if (j == m.size()) break;
  }
  return out;
}

VisibilityClass classify(const Polynomial& p, const Cube& q, double m, double m_max, const ColoredNet& net,
                         double eta, const ClassifyOptions& opt) {
  require(m > 0.0, "classify needs M(Q) > 0");
  require(p.is_normalized(), "classify expects a normalized polynomial");
  const GaugeBody k = build_gauge(p, Region::of(q), opt.mollifier, opt.h);
  VisibilityClass vc;
  vc.cube = q;
  vc.m = m;
  vc.eta = eta;
  vc.vis = visibility(k, opt.vis_samples, opt.mollifier.seed);
  vc.r = visibility_class_index(m, vc.vis, m_max);
  const ClosestColored cc = closest_colored(k, net, net.alpha());
  for (const auto& [color, el] : cc.by_color) {
    const Ellipsoid& e = net.elements[static_cast<std::size_t>(el)];
    ColorClass cl{color, el, e, {}};
    const Ellipsoid small = e.scaled(eta);
    for (const auto& x : translate_centers(q, e, eta, opt.c)) {
      const Cell cell = EllipsoidCell{small, x};
      const SignVolumes sv = sign_volumes(p, cell, opt.nodes);
      Translate t;
      t.center = x;
      t.gap = (sv.positive - sv.negative) / sv.volume;
      const double fp = sv.positive / sv.volume, fn = sv.negative / sv.volume;
      if (fp >= opt.threshold && fn >= opt.threshold) {
        t.label = BisectLabel::Bisected;
        t.sign = SignLabel::Bisected;
      } else {
        t.label = t.gap > 0.0 ? BisectLabel::PositiveHeavy : BisectLabel::NegativeHeavy;
        t.sign = t.gap >= opt.noise_floor ? SignLabel::Plus
                 : t.gap <= -opt.noise_floor ? SignLabel::Minus
                                             : SignLabel::Undecided;
      }
      cl.translates.push_back(std::move(t));
    }
    vc.colors.push_back(std::move(cl));
  }
  return vc;
}

double bisection_fraction(const VisibilityClass& vc) {
  std::size_t bisected = 0, total = 0;
  for (const auto& c : vc.colors) {
    bisected += c.bisected();
    total += c.translates.size();
  }
  return total == 0 ? 0.0 : static_cast<double>(bisected) / static_cast<double>(total);
}

double max_color_fraction(const VisibilityClass& vc) {
  double worst = 0.0;
  for (const auto& c : vc.colors) {
    if (c.translates.empty()) continue;
    worst = std::max(worst, static_cast<double>(c.bisected()) / static_cast<double>(c.translates.size()));
  }
  return worst;
}

AppendixReport appendix_check(const Polynomial& p, const EllipsoidCell& cell, double h, std::size_t samples) {
  const int n = p.n();
  require(cell.shape.n() == n && cell.center.size() == n, "appendix_check dimension mismatch");
  const SignVolumes sv = sign_volumes(p, Cell{cell}, samples);
  AppendixReport r;
  r.a = sv.positive / sv.volume;
  r.b = sv.negative / sv.volume;
  const SurfaceSampleSet s = extract_surface(p, Region::of(cell), h);
  // Area of the image under y = L^{-1}(x - c): dS_y = |L^T n| dS_x / det L.
  const Eigen::MatrixXd l = cell.shape.shape_map();
  const double det = l.determinant();
  double area = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) area += s.weight(i) * (l.transpose() * s.normal(i)).norm();
  r.area = area / det;
  const double e = (n - 1.0) / n;
  r.bound = 0.5 * (std::pow(r.a, e) + std::pow(r.b, e) - 1.0) * unit_sphere_area(n);
  r.margin = r.area - r.bound;
  return r;
}

}  // namespace mlk
