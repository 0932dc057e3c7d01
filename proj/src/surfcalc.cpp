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

#include "mlk/surfcalc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include "mlk/error.hpp"
#include "mlk/random.hpp"

namespace mlk {

Region Region::of(const EllipsoidCell& e) {
  Region r;
  r.box = cell_bounds(Cell{e});
  r.ellipsoid = e;
  return r;
}

Region Region::truncated_tube(const Tube& t, double half_length) {
  const int n = t.n();
  Region r;
  r.box.lo.resize(n);
  r.box.hi.resize(n);
  for (int i = 0; i < n; ++i) {
    const double ei = t.direction[i];
    const double ext = half_length * std::abs(ei) + t.radius * std::sqrt(std::max(0.0, 1.0 - ei * ei));
    r.box.lo[i] = t.anchor[i] - ext;
    r.box.hi[i] = t.anchor[i] + ext;
  }
  r.tube = t;
  r.half_length = half_length;
  return r;
}

Region Region::tube_in_box(const Tube& t, const Box& b) {
  Region r = of(b);
  r.tube = t;
  return r;
}

bool Region::contains(const Eigen::VectorXd& x) const {
  if (!box.contains(x)) return false;
  if (tube) {
    const Eigen::VectorXd rel = x - tube->anchor;
    const double along = rel.dot(tube->direction);
    if ((rel - along * tube->direction).norm() > tube->radius) return false;
    if (half_length && std::abs(along) > *half_length) return false;
  }
  if (ellipsoid && ellipsoid->shape.gauge(x - ellipsoid->center) > 1.0) return false;
  return true;
}

bool Region::may_meet(const Box& b) const {
  for (int i = 0; i < n(); ++i)
    if (b.hi[i] < box.lo[i] || b.lo[i] > box.hi[i]) return false;
  if (tube && line_box_distance(tube->anchor, tube->direction, b) > tube->radius) return false;
  return true;
}

void SurfaceSampleSet::add(const Eigen::VectorXd& x, const Eigen::VectorXd& nrm, double w) {
  points_.insert(points_.end(), x.data(), x.data() + n_);
  normals_.insert(normals_.end(), nrm.data(), nrm.data() + n_);
  weights_.push_back(w);
}

void SurfaceSampleSet::merge(const SurfaceSampleSet& other, double scale) {
  require(other.n_ == n_, "sample set dimension mismatch");
  points_.insert(points_.end(), other.points_.begin(), other.points_.end());
  normals_.insert(normals_.end(), other.normals_.begin(), other.normals_.end());
  for (double w : other.weights_) weights_.push_back(w * scale);
  dropped_weight += other.dropped_weight * scale;
  dropped_count += other.dropped_count;
}

double SurfaceSampleSet::total_weight() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

double SurfaceSampleSet::directional(const Eigen::VectorXd& e) const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    const double* nv = normals_.data() + i * n_;
    double dot = 0.0;
    for (int j = 0; j < n_; ++j) dot += e[j] * nv[j];
    s += weights_[i] * std::abs(dot);
  }
  return s;
}

double SurfaceSampleSet::dropped_fraction() const {
  const double total = total_weight() + dropped_weight;
  return total > 0.0 ? dropped_weight / total : 0.0;
}

namespace {

constexpr double kDegenerateGrad = 1e-9;

struct Interval {
  double lo, hi;
};

Interval ipow(Interval x, int e) {
  if (e == 0) return {1.0, 1.0};
  const double a = std::pow(x.lo, e), b = std::pow(x.hi, e);
  if (e % 2 == 1) return {a, b};
  if (x.lo <= 0.0 && x.hi >= 0.0) return {0.0, std::max(a, b)};
  return {std::min(a, b), std::max(a, b)};
}

Interval imul(Interval x, Interval y) {
  const double c[4] = {x.lo * y.lo, x.lo * y.hi, x.hi * y.lo, x.hi * y.hi};
  return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
}

// Natural interval extension of p over the box.
Interval bound_over(const Polynomial& p, const Box& b) {
  const PolySpace& s = *p.space();
  const int n = s.n();
  const Eigen::VectorXd lo = s.to_local(b.lo), hi = s.to_local(b.hi);
  std::vector<std::vector<Interval>> pw(n, std::vector<Interval>(s.k() + 1));
  for (int i = 0; i < n; ++i)
    for (int e = 0; e <= s.k(); ++e) pw[i][e] = ipow({lo[i], hi[i]}, e);
  Interval acc{0.0, 0.0};
  for (std::size_t t = 0; t < s.dim(); ++t) {
    const double c = p.coeffs()[static_cast<Eigen::Index>(t)];
    if (c == 0.0) continue;
    Interval m{c, c};
    for (int i = 0; i < n; ++i) m = imul(m, pw[i][s.basis()[t][i]]);
    acc.lo += m.lo;
    acc.hi += m.hi;
  }
  // Slack for rounding in the extension.
  const double pad = 1e-12 * (std::abs(acc.lo) + std::abs(acc.hi) + 1.0);
  return {acc.lo - pad, acc.hi + pad};
}

class Extractor {
 public:
  Extractor(const Polynomial& p, const Region& region, double h)
      : p_(p), region_(region), n_(region.n()), out_(region.n()) {
    counts_.resize(n_);
    step_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      const double side = region.box.hi[i] - region.box.lo[i];
      counts_[i] = std::max<long>(1, static_cast<long>(std::ceil(side / h - 1e-9)));
      step_[i] = side / static_cast<double>(counts_[i]);
    }
    out_.resolution = h;
    h_ = h;
  }

  SurfaceSampleSet run() {
    std::vector<long> lo(n_, 0), hi(counts_);
    recurse(lo, hi);
    return std::move(out_);
  }

 private:
  double coord(int axis, long idx) const {
    return region_.box.lo[axis] +
           (region_.box.hi[axis] - region_.box.lo[axis]) * static_cast<double>(idx) /
               static_cast<double>(counts_[axis]);
  }

  Box block_box(const std::vector<long>& lo, const std::vector<long>& hi) const {
    Box b{Eigen::VectorXd(n_), Eigen::VectorXd(n_)};
    for (int i = 0; i < n_; ++i) {
      b.lo[i] = coord(i, lo[i]);
      b.hi[i] = coord(i, hi[i]);
    }
    return b;
  }

  void recurse(std::vector<long>& lo, std::vector<long>& hi) {
    const Box b = block_box(lo, hi);
    if (!region_.may_meet(b)) return;
    const Interval iv = bound_over(p_, b);
    if (iv.lo > 0.0 || iv.hi < 0.0) return;
    int widest = 0;
    long cells = 1;
    for (int i = 0; i < n_; ++i) {
      cells *= hi[i] - lo[i];
      if (hi[i] - lo[i] > hi[widest] - lo[widest]) widest = i;
    }
    const long leaf = n_ == 2 ? 32 : 12;
    if (hi[widest] - lo[widest] <= leaf) {
      march_leaf(lo, hi);
      return;
    }
    const long mid = (lo[widest] + hi[widest]) / 2;
    const long save_hi = hi[widest];
    hi[widest] = mid;
    recurse(lo, hi);
    hi[widest] = save_hi;
    const long save_lo = lo[widest];
    lo[widest] = mid;
    recurse(lo, hi);
    lo[widest] = save_lo;
    (void)cells;
  }

  // Emits one piece with measure `w` centred (before projection) at `c`.
  void emit(const Eigen::VectorXd& c, double w) {
    if (!(w > 0.0)) return;
    Eigen::VectorXd g;
    const double v = p_.eval_with_gradient(c, g);
    double gn = g.norm();
    Eigen::VectorXd x = c;
    if (gn >= kDegenerateGrad) {
      const Eigen::VectorXd stepv = (v / (gn * gn)) * g;
      if (stepv.norm() <= h_) {
        x = c - stepv;
        p_.eval_with_gradient(x, g);
        gn = g.norm();
      }
    }
    if (!region_.contains(x)) return;
    if (gn < kDegenerateGrad) {
      out_.dropped_weight += w;
      ++out_.dropped_count;
      return;
    }
    out_.add(x, g / gn, w);
  }

  void march_leaf(const std::vector<long>& lo, const std::vector<long>& hi) {
    if (n_ == 2) march_squares(lo, hi);
    else march_tets(lo, hi);
  }

  void march_squares(const std::vector<long>& lo, const std::vector<long>& hi) {
    const long nx = hi[0] - lo[0], ny = hi[1] - lo[1];
    std::vector<double> xs(nx + 1), ys(ny + 1), val((nx + 1) * (ny + 1));
    for (long i = 0; i <= nx; ++i) xs[i] = coord(0, lo[0] + i);
    for (long j = 0; j <= ny; ++j) ys[j] = coord(1, lo[1] + j);
    Eigen::VectorXd x(2);
    for (long j = 0; j <= ny; ++j)
      for (long i = 0; i <= nx; ++i) {
        x << xs[i], ys[j];
        val[j * (nx + 1) + i] = p_.eval(x);
      }
    // Corners 0:(i,j) 1:(i+1,j) 2:(i+1,j+1) 3:(i,j+1); edge e joins e and e+1.
    Eigen::Vector2d pts[4];
    for (long j = 0; j < ny; ++j)
      for (long i = 0; i < nx; ++i) {
        const double v[4] = {val[j * (nx + 1) + i], val[j * (nx + 1) + i + 1],
                             val[(j + 1) * (nx + 1) + i + 1], val[(j + 1) * (nx + 1) + i]};
        const Eigen::Vector2d c[4] = {{xs[i], ys[j]}, {xs[i + 1], ys[j]},
                                      {xs[i + 1], ys[j + 1]}, {xs[i], ys[j + 1]}};
        bool in[4];
        int count = 0;
        for (int q = 0; q < 4; ++q) count += (in[q] = v[q] > 0.0);
        if (count == 0 || count == 4) continue;
        int edges[4];
        int ne = 0;
        for (int e = 0; e < 4; ++e) {
          const int a = e, b = (e + 1) % 4;
          if (in[a] == in[b]) continue;
          const double t = v[a] / (v[a] - v[b]);
          pts[e] = c[a] + t * (c[b] - c[a]);
          edges[ne++] = e;
        }
        if (ne == 2) {
          segment(pts[edges[0]], pts[edges[1]]);
        } else {
          // Saddle: pick the pairing with smaller total length. This rule does
          // not depend on the sign of p.
          const double l1 = (pts[0] - pts[1]).norm() + (pts[2] - pts[3]).norm();
          const double l2 = (pts[0] - pts[3]).norm() + (pts[1] - pts[2]).norm();
          if (l1 <= l2) {
            segment(pts[0], pts[1]);
            segment(pts[2], pts[3]);
          } else {
            segment(pts[0], pts[3]);
            segment(pts[1], pts[2]);
          }
        }
      }
  }

  void segment(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    const Eigen::VectorXd mid = 0.5 * (a + b);
    emit(mid, (b - a).norm());
  }

  void march_tets(const std::vector<long>& lo, const std::vector<long>& hi) {
    const long nx = hi[0] - lo[0], ny = hi[1] - lo[1], nz = hi[2] - lo[2];
    std::vector<double> xs(nx + 1), ys(ny + 1), zs(nz + 1);
    for (long i = 0; i <= nx; ++i) xs[i] = coord(0, lo[0] + i);
    for (long j = 0; j <= ny; ++j) ys[j] = coord(1, lo[1] + j);
    for (long k = 0; k <= nz; ++k) zs[k] = coord(2, lo[2] + k);
    auto idx = [&](long i, long j, long k) { return (k * (ny + 1) + j) * (nx + 1) + i; };
    std::vector<double> val((nx + 1) * (ny + 1) * (nz + 1));
    Eigen::VectorXd x(3);
    for (long k = 0; k <= nz; ++k)
      for (long j = 0; j <= ny; ++j)
        for (long i = 0; i <= nx; ++i) {
          x << xs[i], ys[j], zs[k];
          val[idx(i, j, k)] = p_.eval(x);
        }
    static constexpr int kTets[6][4] = {{0, 1, 3, 7}, {0, 3, 2, 7}, {0, 2, 6, 7},
                                        {0, 6, 4, 7}, {0, 4, 5, 7}, {0, 5, 1, 7}};
    for (long k = 0; k < nz; ++k)
      for (long j = 0; j < ny; ++j)
        for (long i = 0; i < nx; ++i) {
          double v[8];
          Eigen::Vector3d c[8];
          int pos = 0;
          for (int q = 0; q < 8; ++q) {
            const long di = q & 1, dj = (q >> 1) & 1, dk = (q >> 2) & 1;
            v[q] = val[idx(i + di, j + dj, k + dk)];
            c[q] = {xs[i + di], ys[j + dj], zs[k + dk]};
            pos += v[q] > 0.0;
          }
          if (pos == 0 || pos == 8) continue;
          for (const auto& tet : kTets) tetra(tet, v, c);
        }
  }

  static Eigen::Vector3d cross_point(int a, int b, const double* v, const Eigen::Vector3d* c) {
    if (a > b) std::swap(a, b);
    const double t = v[a] / (v[a] - v[b]);
    return c[a] + t * (c[b] - c[a]);
  }

  void triangle(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
    const double area = 0.5 * (b - a).cross(c - a).norm();
    const Eigen::VectorXd centroid = (a + b + c) / 3.0;
    emit(centroid, area);
  }

  void tetra(const int* tet, const double* v, const Eigen::Vector3d* c) {
    int pos[4], neg[4], np = 0, nn = 0;
    for (int q = 0; q < 4; ++q) {
      if (v[tet[q]] > 0.0) pos[np++] = tet[q];
      else neg[nn++] = tet[q];
    }
    if (np == 0 || nn == 0) return;
    if (np == 1 || nn == 1) {
      const int lone = np == 1 ? pos[0] : neg[0];
      const int* others = np == 1 ? neg : pos;
      triangle(cross_point(lone, others[0], v, c), cross_point(lone, others[1], v, c),
               cross_point(lone, others[2], v, c));
      return;
    }
    // 2-2 split: quad on edges ac, ad, bd, bc; fixed diagonal ac-bd.
    int a = pos[0], b = pos[1], cc = neg[0], d = neg[1];
    if (a > b) std::swap(a, b);
    if (cc > d) std::swap(cc, d);
    if (cc < a) {
      std::swap(a, cc);
      std::swap(b, d);
    }
    const Eigen::Vector3d ac = cross_point(a, cc, v, c), ad = cross_point(a, d, v, c),
                          bd = cross_point(b, d, v, c), bc = cross_point(b, cc, v, c);
    triangle(ac, ad, bd);
    triangle(ac, bd, bc);
  }

  const Polynomial& p_;
  const Region& region_;
  int n_;
  double h_ = 0.0;
  std::vector<long> counts_;
  std::vector<double> step_;
  SurfaceSampleSet out_;
};

SurfaceSampleSet coarea_monte_carlo(const Polynomial& p, const Region& region,
                                    const ExtractOptions& opt) {
  const int n = region.n();
  SurfaceSampleSet out(n);
  out.resolution = opt.h;
  Rng rng(derive_seed(opt.seed, 0xc0a));
  const Eigen::VectorXd span = region.box.hi - region.box.lo;
  const double vol = region.box.volume();
  const double w = vol / static_cast<double>(opt.mc_samples) / (2.0 * opt.h);
  Eigen::VectorXd x(n), g;
  for (std::size_t s = 0; s < opt.mc_samples; ++s) {
    for (int i = 0; i < n; ++i) x[i] = region.box.lo[i] + span[i] * uniform01(rng);
    if (!region.contains(x)) continue;
    const double v = p.eval_with_gradient(x, g);
    const double gn = g.norm();
    if (gn < kDegenerateGrad) {
      if (v == 0.0) {
        out.dropped_weight += w;
        ++out.dropped_count;
      }
      continue;
    }
    if (std::abs(v) / gn >= opt.h) continue;
    Eigen::VectorXd y = x - (v / (gn * gn)) * g;
    p.eval_with_gradient(y, g);
    const double gy = g.norm();
    if (gy < kDegenerateGrad) {
      out.dropped_weight += w;
      ++out.dropped_count;
      continue;
    }
    out.add(y, g / gy, w);
  }
  return out;
}

}  // namespace

SurfaceSampleSet extract_surface(const Polynomial& p, const Region& region,
                                 const ExtractOptions& opt) {
  const int n = region.n();
  require(p.n() == n, "polynomial and region dimensions differ");
  require(opt.h > 0.0, "resolution h must be positive");
  const double shortest = (region.box.hi - region.box.lo).minCoeff();
  require(opt.h <= shortest / 4.0 * (1.0 + 1e-12), "resolution h must be <= shortest region side / 4");
  if (n == 1) {
    // Zero set is a finite set of points; each has H^0 measure 1.
    SurfaceSampleSet out(1);
    const long cnt = std::max<long>(1, static_cast<long>(std::ceil((region.box.hi[0] - region.box.lo[0]) / opt.h)));
    Eigen::VectorXd a(1), b(1), nrm(1);
    for (long i = 0; i < cnt; ++i) {
      a[0] = region.box.lo[0] + (region.box.hi[0] - region.box.lo[0]) * i / cnt;
      b[0] = region.box.lo[0] + (region.box.hi[0] - region.box.lo[0]) * (i + 1) / cnt;
      const double va = p.eval(a), vb = p.eval(b);
      if ((va > 0.0) == (vb > 0.0)) continue;
      Eigen::VectorXd x = a + (va / (va - vb)) * (b - a);
      if (!region.contains(x)) continue;
      nrm[0] = 1.0;
      out.add(x, nrm, 1.0);
    }
    return out;
  }
  if (n >= 4) return coarea_monte_carlo(p, region, opt);
  return Extractor(p, region, opt.h).run();
}

SurfaceSampleSet extract_surface(const Polynomial& p, const Region& region, double h) {
  ExtractOptions opt;
  opt.h = h;
  return extract_surface(p, region, opt);
}

double directional_area(const Polynomial& p, const Region& region, const Eigen::VectorXd& e,
                        double h) {
  require(std::abs(e.norm() - 1.0) <= 1e-9, "direction must be a unit vector");
  return extract_surface(p, region, h).directional(e);
}

double hausdorff_area(const Polynomial& p, const Region& region, double h) {
  return extract_surface(p, region, h).total_weight();
}

void validate(const MollifierConfig& cfg) {
  require(cfg.eps > 0.0 && cfg.eps < 1.0, "mollifier eps must satisfy 0 < eps < 1");
  require(cfg.m >= 1, "mollifier needs m >= 1");
}

std::vector<Polynomial> mollifier_draws(const Polynomial& p, const MollifierConfig& cfg) {
  validate(cfg);
  std::vector<Polynomial> out;
  out.reserve(cfg.m);
  for (int i = 0; i < cfg.m; ++i)
    out.push_back(perturb_in_cap(p, cfg.eps, derive_seed(cfg.seed, static_cast<std::uint64_t>(i))));
  return out;
}

SurfaceSampleSet extract_mollified(const Polynomial& p, const Region& region,
                                   const MollifierConfig& cfg, const ExtractOptions& opt) {
  SurfaceSampleSet pooled(region.n());
  pooled.resolution = opt.h;
  const double scale = 1.0 / cfg.m;
  for (const auto& q : mollifier_draws(p, cfg)) pooled.merge(extract_surface(q, region, opt), scale);
  return pooled;
}

double directional_area_mollified(const Polynomial& p, const Region& region,
                                  const Eigen::VectorXd& e, const MollifierConfig& cfg, double h) {
  require(std::abs(e.norm() - 1.0) <= 1e-9, "direction must be a unit vector");
  ExtractOptions opt;
  opt.h = h;
  return extract_mollified(p, region, cfg, opt).directional(e);
}

SignVolumes sign_volumes(const Polynomial& p, const Cell& cell, std::size_t nodes) {
  require(nodes >= 1, "quadrature needs at least one node");
  SignVolumes out;
  out.volume = cell_volume(cell);
  std::size_t pos = 0, neg = 0;
  for (const auto& x : cell_nodes(cell, nodes)) {
    const double v = p.eval(x);
    pos += v > 0.0;
    neg += v < 0.0;
  }
  out.positive = out.volume * static_cast<double>(pos) / static_cast<double>(nodes);
  out.negative = out.volume * static_cast<double>(neg) / static_cast<double>(nodes);
  return out;
}

double signed_volume_gap(const Polynomial& p, const Cell& cell, std::size_t nodes) {
  const SignVolumes s = sign_volumes(p, cell, nodes);
  return s.positive - s.negative;
}

const char* to_string(BisectLabel l) {
  switch (l) {
    case BisectLabel::PositiveHeavy: return "POSITIVE_HEAVY";
    case BisectLabel::NegativeHeavy: return "NEGATIVE_HEAVY";
    case BisectLabel::Bisected: return "BISECTED";
  }
  return "?";
}

BisectLabel bisects(const Polynomial& p, const Cell& cell, double threshold, std::size_t nodes) {
  require(threshold > 0.0 && threshold <= 0.5, "bisection threshold must lie in (0, 0.5]");
  const SignVolumes s = sign_volumes(p, cell, nodes);
  const double fp = s.positive / s.volume, fn = s.negative / s.volume;
  if (fp >= threshold && fn >= threshold) return BisectLabel::Bisected;
  return fp > fn ? BisectLabel::PositiveHeavy : BisectLabel::NegativeHeavy;
}

double cylinder_ratio(const Polynomial& p, const Tube& t, double half_length, double h) {
  const int k = p.degree();
  require(k >= 1, "cylinder ratio needs deg p >= 1");
  const int n = t.n();
  const double omega = unit_ball_volume(n - 1) * std::pow(t.radius, n - 1);
  const double surf = extract_surface(p, Region::truncated_tube(t, half_length), h).directional(t.direction);
  return surf / (k * omega);
}

void write_surface_csv(std::ostream& os, const SurfaceSampleSet& s) {
  const int n = s.n();
  for (int i = 0; i < n; ++i) os << "x" << i + 1 << ",";
  for (int i = 0; i < n; ++i) os << "n" << i + 1 << ",";
  os << "weight\n";
  os.precision(17);
  for (std::size_t r = 0; r < s.size(); ++r) {
    for (int i = 0; i < n; ++i) os << s.point(r)[i] << ",";
    for (int i = 0; i < n; ++i) os << s.normal(r)[i] << ",";
    os << s.weight(r) << "\n";
  }
}

}  // namespace mlk
