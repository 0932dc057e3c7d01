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

#include "mlk/polyspace.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "mlk/error.hpp"
#include "mlk/random.hpp"

namespace mlk {

namespace {

// All exponent tuples of total degree exactly d, lexicographically descending.
void tuples_of_degree(int n, int d, std::vector<std::vector<int>>& out) {
  std::vector<int> cur(n, 0);
  std::function<void(int, int)> rec = [&](int var, int left) {
    if (var == n - 1) {
      cur[var] = left;
      out.push_back(cur);
      return;
    }
    for (int e = left; e >= 0; --e) {
      cur[var] = e;
      rec(var + 1, left - e);
    }
  };
  rec(0, d);
}

}  // namespace

PolySpace::PolySpace(int n, int k, Frame frame) : n_(n), k_(k), frame_(std::move(frame)) {
  require(n >= 1, "polynomial space needs n >= 1");
  require(k >= 0, "polynomial space needs k >= 0");
  require(frame_.scale > 0.0, "frame scale must be positive");
  require(frame_.center.size() == 0 || frame_.center.size() == n,
          "frame center has wrong dimension");
  for (int d = 0; d <= k; ++d) tuples_of_degree(n, d, basis_);
  flat_.reserve(basis_.size() * n);
  for (const auto& b : basis_) flat_.insert(flat_.end(), b.begin(), b.end());
}

std::optional<std::size_t> PolySpace::index_of(const std::vector<int>& exps) const {
  if (static_cast<int>(exps.size()) != n_) return std::nullopt;
  auto it = std::find(basis_.begin(), basis_.end(), exps);
  if (it == basis_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - basis_.begin());
}

Eigen::VectorXd PolySpace::to_local(const Eigen::VectorXd& x) const {
  if (frame_.center.size() == 0 && frame_.scale == 1.0) return x;
  Eigen::VectorXd y = x;
  if (frame_.center.size() != 0) y -= frame_.center;
  return y / frame_.scale;
}

void PolySpace::fill_powers(const Eigen::VectorXd& y, std::vector<double>& pw) const {
  const int stride = k_ + 1;
  pw.resize(static_cast<std::size_t>(n_) * stride);
  for (int i = 0; i < n_; ++i) {
    double* row = pw.data() + i * stride;
    row[0] = 1.0;
    for (int e = 1; e <= k_; ++e) row[e] = row[e - 1] * y[i];
  }
}

void PolySpace::monomials(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
  std::vector<double> pw;
  fill_powers(to_local(x), pw);
  const int stride = k_ + 1;
  out.resize(static_cast<Eigen::Index>(dim()));
  for (std::size_t t = 0; t < dim(); ++t) {
    const int* e = flat_.data() + t * n_;
    double m = 1.0;
    for (int i = 0; i < n_; ++i) m *= pw[i * stride + e[i]];
    out[static_cast<Eigen::Index>(t)] = m;
  }
}

SpacePtr make_space(int n, int k, Frame frame) {
  return std::make_shared<const PolySpace>(n, k, std::move(frame));
}

Polynomial::Polynomial(SpacePtr space, Eigen::VectorXd coeffs, bool normalized)
    : space_(std::move(space)), coeffs_(std::move(coeffs)), normalized_(normalized) {
  require(space_ != nullptr, "polynomial needs a space");
  require(static_cast<std::size_t>(coeffs_.size()) == space_->dim(),
          "coefficient vector length does not match space dimension");
}

int Polynomial::degree() const {
  int deg = 0;
  const auto& basis = space_->basis();
  for (std::size_t t = 0; t < basis.size(); ++t) {
    if (coeffs_[static_cast<Eigen::Index>(t)] == 0.0) continue;
    int d = 0;
    for (int e : basis[t]) d += e;
    deg = std::max(deg, d);
  }
  return deg;
}

double Polynomial::eval(const Eigen::VectorXd& x) const {
  thread_local std::vector<double> pw;
  const PolySpace& s = *space_;
  s.fill_powers(s.to_local(x), pw);
  const int n = s.n_;
  const int stride = s.k_ + 1;
  double acc = 0.0;
  for (std::size_t t = 0; t < s.dim(); ++t) {
    const int* e = s.flat_.data() + t * n;
    double m = coeffs_[static_cast<Eigen::Index>(t)];
    for (int i = 0; i < n; ++i) m *= pw[i * stride + e[i]];
    acc += m;
  }
  return acc;
}

double Polynomial::eval_with_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
  thread_local std::vector<double> pw;
  const PolySpace& s = *space_;
  s.fill_powers(s.to_local(x), pw);
  const int n = s.n_;
  const int stride = s.k_ + 1;
  grad.setZero(n);
  double acc = 0.0;
  for (std::size_t t = 0; t < s.dim(); ++t) {
    const double c = coeffs_[static_cast<Eigen::Index>(t)];
    if (c == 0.0) continue;
    const int* e = s.flat_.data() + t * n;
    double m = c;
    for (int i = 0; i < n; ++i) m *= pw[i * stride + e[i]];
    acc += m;
    for (int i = 0; i < n; ++i) {
      if (e[i] == 0) continue;
      double d = c * e[i] * pw[i * stride + e[i] - 1];
      for (int j = 0; j < n; ++j)
        if (j != i) d *= pw[j * stride + e[j]];
      grad[i] += d;
    }
  }
  grad /= s.frame_.scale;
  return acc;
}

Eigen::VectorXd Polynomial::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g;
  eval_with_gradient(x, g);
  return g;
}

Polynomial Polynomial::operator-() const { return Polynomial(space_, -coeffs_, normalized_); }

Polynomial Polynomial::scaled(double s) const {
  return Polynomial(space_, coeffs_ * s, normalized_ && s == 1.0);
}

Polynomial normalize(const Polynomial& p) {
  const double nrm = p.coeffs().norm();
  if (!(nrm > 0.0) || !std::isfinite(nrm)) fail(ErrorKind::Degenerate, "cannot normalize the zero polynomial");
  if (p.is_normalized()) return p;
  return Polynomial(p.space(), p.coeffs() / nrm, true);
}

double sphere_distance(const Polynomial& a, const Polynomial& b) {
  const Eigen::VectorXd u = a.coeffs().normalized();
  const Eigen::VectorXd v = b.coeffs().normalized();
  // atan2 form stays accurate for nearly equal vectors.
  return 2.0 * std::atan2((u - v).norm(), (u + v).norm());
}

Polynomial perturb_in_cap(const Polynomial& p, double eps, std::uint64_t seed) {
  require(eps > 0.0 && eps < 1.0, "cap radius must satisfy 0 < eps < 1");
  const Polynomial unit = normalize(p);
  const Eigen::Index dim = unit.coeffs().size();
  if (dim == 1) return unit;  // S^0 has no nontrivial cap below pi

  // Canonical sign makes the draw odd-equivariant in p.
  double sign = 1.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (unit.coeffs()[i] != 0.0) {
      sign = unit.coeffs()[i] > 0.0 ? 1.0 : -1.0;
      break;
    }
  }
  const Eigen::VectorXd c = sign * unit.coeffs();

  Rng rng(derive_seed(seed, 0x5eed));
  Eigen::VectorXd t;
  do {
    t = gaussian_vector(rng, dim);
    t -= t.dot(c) * c;
  } while (t.norm() < 1e-12);
  t.normalize();

  // Angle density on S^{dim-1} is proportional to sin^{dim-2}(theta). Propose
  // from theta^{dim-2} on [0, eps], accept with (sin theta / theta)^{dim-2}.
  const double m = static_cast<double>(dim - 1);
  double theta = 0.0;
  for (;;) {
    const double u = uniform01(rng);
    theta = eps * std::pow(u, 1.0 / m);
    if (theta <= 0.0) continue;
    const double accept = std::pow(std::sin(theta) / theta, m - 1.0);
    if (uniform01(rng) <= accept) break;
  }
  Eigen::VectorXd q = std::cos(theta) * c + std::sin(theta) * t;
  q.normalize();
  return Polynomial(unit.space(), sign * q, true);
}

Polynomial random_polynomial(SpacePtr space, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x9017));
  const auto dim = static_cast<Eigen::Index>(space->dim());
  return normalize(Polynomial(std::move(space), uniform_on_sphere(rng, dim)));
}

Polynomial from_terms(SpacePtr space,
                      const std::vector<std::pair<std::vector<int>, double>>& terms) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space->dim()));
  for (const auto& [exps, coef] : terms) {
    auto idx = space->index_of(exps);
    require(idx.has_value(), "term exponent outside the polynomial space");
    c[static_cast<Eigen::Index>(*idx)] += coef;
  }
  return Polynomial(std::move(space), std::move(c));
}

Polynomial multiply(const Polynomial& a, const Polynomial& b, SpacePtr target) {
  require(a.n() == b.n() && target->n() == a.n(), "dimension mismatch in multiply");
  std::map<std::vector<int>, double> acc;
  const auto& ba = a.space()->basis();
  const auto& bb = b.space()->basis();
  for (std::size_t i = 0; i < ba.size(); ++i) {
    const double ca = a.coeffs()[static_cast<Eigen::Index>(i)];
    if (ca == 0.0) continue;
    for (std::size_t j = 0; j < bb.size(); ++j) {
      const double cb = b.coeffs()[static_cast<Eigen::Index>(j)];
      if (cb == 0.0) continue;
      std::vector<int> e(ba[i]);
      for (std::size_t v = 0; v < e.size(); ++v) e[v] += bb[j][v];
      acc[e] += ca * cb;
    }
  }
  std::vector<std::pair<std::vector<int>, double>> terms(acc.begin(), acc.end());
  return from_terms(std::move(target), terms);
}

Polynomial affine(SpacePtr space, const Eigen::VectorXd& a, double b) {
  const int n = space->n();
  require(a.size() == n, "affine form has wrong dimension");
  require(space->k() >= 1, "affine form needs k >= 1");
  const Frame& f = space->frame();
  double c0 = b;
  if (f.center.size() != 0) c0 += a.dot(f.center);
  std::vector<std::pair<std::vector<int>, double>> terms;
  terms.push_back({std::vector<int>(n, 0), c0});
  for (int i = 0; i < n; ++i) {
    std::vector<int> e(n, 0);
    e[i] = 1;
    terms.push_back({e, a[i] * f.scale});
  }
  return from_terms(std::move(space), terms);
}

nlohmann::json to_json(const Polynomial& p) {
  nlohmann::json j;
  const PolySpace& s = *p.space();
  j["n"] = s.n();
  j["k"] = s.k();
  nlohmann::json terms = nlohmann::json::array();
  for (std::size_t t = 0; t < s.dim(); ++t) {
    const double c = p.coeffs()[static_cast<Eigen::Index>(t)];
    if (c == 0.0) continue;
    terms.push_back({{"exps", s.basis()[t]}, {"coef", c}});
  }
  j["terms"] = terms;
  if (s.frame().center.size() != 0) {
    j["center"] = std::vector<double>(s.frame().center.data(),
                                      s.frame().center.data() + s.frame().center.size());
  }
  if (s.frame().scale != 1.0) j["scale"] = s.frame().scale;
  return j;
}

Polynomial polynomial_from_json(const nlohmann::json& j, bool normalize_on_load) {
  try {
    Frame f;
    if (j.contains("center")) {
      auto c = j.at("center").get<std::vector<double>>();
      f.center = Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
    }
    if (j.contains("scale")) f.scale = j.at("scale").get<double>();
    auto space = make_space(j.at("n").get<int>(), j.at("k").get<int>(), f);
    std::vector<std::pair<std::vector<int>, double>> terms;
    for (const auto& t : j.at("terms"))
      terms.push_back({t.at("exps").get<std::vector<int>>(), t.at("coef").get<double>()});
    Polynomial p = from_terms(space, terms);
    return normalize_on_load ? normalize(p) : p;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("malformed polynomial json: ") + e.what());
  }
}

}  // namespace mlk
