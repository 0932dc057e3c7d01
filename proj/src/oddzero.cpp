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

#include "mlk/oddzero.hpp"

#include <algorithm>
#include <cmath>

#include "mlk/error.hpp"
#include "mlk/random.hpp"
#include "mlk/surfcalc.hpp"

namespace mlk {

GapOddMap::GapOddMap(SpacePtr space, std::vector<Cell> cells, std::size_t nodes)
    : space_(std::move(space)), cells_(std::move(cells)) {
  require(space_ != nullptr, "gap map needs a polynomial space");
  require(nodes >= 16, "gap map needs at least 16 nodes per cell");
  const Eigen::Index dim = static_cast<Eigen::Index>(space_->dim());
  Eigen::VectorXd row(dim);
  for (const auto& c : cells_) {
    const auto pts = cell_nodes(c, nodes);
    Eigen::MatrixXd phi(static_cast<Eigen::Index>(pts.size()), dim);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      require(pts[i].size() == space_->n(), "cell dimension mismatch");
      space_->monomials(pts[i], row);
      phi.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    phi_.push_back(std::move(phi));
  }
}

Eigen::VectorXd GapOddMap::eval(const Eigen::VectorXd& x) const {
  Eigen::VectorXd f(static_cast<Eigen::Index>(cells_.size()));
  for (std::size_t i = 0; i < phi_.size(); ++i) {
    const Eigen::VectorXd v = phi_[i] * x;
    long s = 0;
    for (Eigen::Index r = 0; r < v.size(); ++r) s += (v[r] > 0.0) - (v[r] < 0.0);
    f[static_cast<Eigen::Index>(i)] = static_cast<double>(s) / static_cast<double>(v.size());
  }
  return f;
}

Eigen::VectorXd GapOddMap::smooth(const Eigen::VectorXd& x, double sigma, Eigen::MatrixXd& jac) const {
  const Eigen::Index j = static_cast<Eigen::Index>(cells_.size());
  Eigen::VectorXd f(j);
  jac.resize(j, x.size());
  for (Eigen::Index i = 0; i < j; ++i) {
    const Eigen::MatrixXd& phi = phi_[static_cast<std::size_t>(i)];
    const Eigen::VectorXd v = phi * x;
    const double m = static_cast<double>(v.size());
    const double s = std::max(sigma * std::sqrt(v.squaredNorm() / m), 1e-300);
    const Eigen::ArrayXd t = (v.array() / s).tanh();
    f[i] = t.sum() / m;
    // d/dx of mean tanh(v / s(x)) with s = sigma * rms(v).
    const Eigen::ArrayXd q = 1.0 - t.square();
    const double dsv = sigma * sigma / (s * m);
    const Eigen::VectorXd w = (q / (s * m)).matrix() - ((q * v.array()).sum() / (s * s * m) * dsv) * v;
    jac.row(i) = (phi.transpose() * w).transpose();
  }
  return f;
}

std::optional<Polynomial> GapOddMap::as_polynomial(const Eigen::VectorXd& x) const {
  return normalize(Polynomial(space_, x));
}

namespace {

// Levenberg-Marquardt on the tangent space of the sphere, then renormalize.
Eigen::VectorXd descend(const OddMap& f, Eigen::VectorXd x, double sigma, int max_iter, double stop) {
  Eigen::MatrixXd jac;
  Eigen::VectorXd r = f.smooth(x, sigma, jac);
  double cost = r.squaredNorm();
  double mu = 1e-3;
  const Eigen::Index dim = x.size();
  for (int it = 0; it < max_iter && cost > stop * stop; ++it) {
    const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(dim, dim) - x * x.transpose();
    const Eigen::MatrixXd jt = jac * proj;
    const Eigen::MatrixXd gram = jt * jt.transpose();
    bool accepted = false;
    for (int tries = 0; tries < 12 && !accepted; ++tries) {
      Eigen::MatrixXd lhs = gram;
      lhs.diagonal().array() += mu * (1.0 + gram.diagonal().maxCoeff());
      const Eigen::VectorXd step = -jt.transpose() * lhs.ldlt().solve(r);
      Eigen::VectorXd y = x + step;
      y /= y.norm();
      Eigen::MatrixXd jy;
      const Eigen::VectorXd ry = f.smooth(y, sigma, jy);
      const double cy = ry.squaredNorm();
      if (cy < cost) {
        x = y;
        r = ry;
        jac = jy;
        cost = cy;
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
      } else {
        mu *= 4.0;
      }
    }
    if (!accepted) break;
  }
  return x;
}

}  // namespace

ZeroResult find_odd_zero(const OddMap& f, const ZeroOptions& opt) {
  const std::size_t dim = f.domain_dim();
  require(dim >= 1, "odd map needs a nonempty domain");
  if (f.target_dim() > dim - 1) {
    fail(ErrorKind::InvalidArgument, "Borsuk-Ulam requires J <= N (target dimension at most sphere dimension)");
  }
  require(opt.tol > 0.0, "zero tolerance must be positive");
  require(opt.restarts >= 1, "need at least one restart");
  static constexpr double kSigmas[] = {1.0, 0.3, 0.1, 0.03, 0.01, 0.003, 1e-3};

  ZeroResult best;
  best.max_residual = std::numeric_limits<double>::infinity();
  for (int rs = 0; rs < opt.restarts; ++rs) {
    Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(rs)));
    Eigen::VectorXd x = uniform_on_sphere(rng, static_cast<Eigen::Index>(dim));
    Eigen::VectorXd res;
    double worst = 0.0;
    for (double sigma : kSigmas) {
      x = descend(f, x, sigma, opt.max_iter, 0.1 * opt.tol);
      res = f.eval(x);
      worst = res.size() > 0 ? res.cwiseAbs().maxCoeff() : 0.0;
      if (worst <= opt.tol) break;
    }
    if (worst < best.max_residual) {
      best.x = x;
      best.residuals = res;
      best.max_residual = worst;
    }
    best.restarts_used = rs + 1;
    if (best.max_residual <= opt.tol) break;
  }
  best.converged = best.max_residual <= opt.tol;
  best.p = f.as_polynomial(best.x);
  return best;
}

int degree_for(int n, double target) {
  require(n >= 1, "degree_for needs n >= 1");
  for (int k = 1;; ++k) {
    // dim P_k = C(n + k, n)
    double dim = 1.0;
    for (int i = 1; i <= n; ++i) dim = dim * (k + i) / i;
    if (dim - 1.0 >= target) return k;
  }
}

WarmupReport warmup_bisector(const WeightFunction& m, const WarmupOptions& opt) {
  require(m.n >= 1, "weight function needs n >= 1");
  require(opt.c_deg >= 1.0, "c_deg must be >= 1");
  WarmupReport rep;
  for (const auto& [q, v] : m.entries) {
    require(v == 0.0 || v >= 1.0, "warm-up weights must lie in [1, inf) on the support");
    if (v > 0.0) {
      rep.cubes.push_back(q);
      rep.weights.push_back(v);
    }
  }
  require(!rep.cubes.empty(), "warm-up weight function has empty support");
  const int n = m.n;

  std::vector<Cell> cells;
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  Eigen::VectorXd hi = -lo;
  for (std::size_t c = 0; c < rep.cubes.size(); ++c) {
    const Cube& q = rep.cubes[c];
    lo = lo.cwiseMin(q.lower());
    hi = hi.cwiseMax(q.upper());
    const long s = static_cast<long>(std::ceil(rep.weights[c] - 1e-12));
    const double w = 1.0 / static_cast<double>(s);
    std::vector<long> idx(n, 0);
    for (;;) {
      Box b;
      b.lo = q.lower();
      for (int i = 0; i < n; ++i) b.lo[i] += w * static_cast<double>(idx[i]);
      b.hi = b.lo.array() + w;
      cells.emplace_back(b);
      int i = 0;
      while (i < n && ++idx[i] == s) idx[i++] = 0;
      if (i == n) break;
    }
  }
  rep.cells = cells.size();
  rep.k = degree_for(n, opt.c_deg * static_cast<double>(cells.size()));
  Frame frame{0.5 * (lo + hi), 0.5 * (hi - lo).maxCoeff()};
  const GapOddMap f(make_space(n, rep.k, frame), cells, opt.nodes);
  rep.zero = find_odd_zero(f, opt.zero);

  rep.fitted_c = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < rep.cubes.size(); ++c) {
    const double a = hausdorff_area(*rep.zero.p, Region::of(rep.cubes[c]), opt.h);
    rep.areas.push_back(a);
    rep.fitted_c = std::min(rep.fitted_c, a / rep.weights[c]);
  }
  return rep;
}

nlohmann::json to_json(const ZeroResult& r) {
  nlohmann::json j;
  j["converged"] = r.converged;
  j["max_residual"] = r.max_residual;
  j["restarts_used"] = r.restarts_used;
  j["residuals"] = std::vector<double>(r.residuals.data(), r.residuals.data() + r.residuals.size());
  if (r.p) j["polynomial"] = to_json(*r.p);
  return j;
}

}  // namespace mlk
