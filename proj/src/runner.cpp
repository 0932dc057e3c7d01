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

#include "mlk/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include "mlk/convexvis.hpp"
#include "mlk/error.hpp"
#include "mlk/kakeya.hpp"
#include "mlk/oddzero.hpp"
#include "mlk/random.hpp"
#include "mlk/surfcalc.hpp"

namespace mlk {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- schema

enum class Kind { Int, UInt, Real, Bool, Str, Any };

struct Field {
  std::string name;
  Kind kind;
  json def;  // null: optional without default
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = false;
  bool required = false;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

Field req_seed() { return {"seed", Kind::UInt, nullptr, 0, kInf, false, true}; }
Field f_int(const char* name, int def, double lo, double hi) { return {name, Kind::Int, def, lo, hi}; }
Field f_real(const char* name, json def, double lo, double hi, bool lo_open = false) {
  return {name, Kind::Real, std::move(def), lo, hi, lo_open};
}
Field f_bool(const char* name, bool def) { return {name, Kind::Bool, def}; }
Field f_str(const char* name, const char* def) { return {name, Kind::Str, def}; }
Field f_any(const char* name) { return {name, Kind::Any, nullptr}; }

std::vector<Field> mollifier_fields() {
  return {f_real("mollifier_eps", 1e-3, 0.0, 0.5), f_int("mollifier_m", 32, 1, 4096)};
}

std::vector<Field> schema(std::string_view command) {
  std::vector<Field> f{req_seed()};
  auto add = [&f](std::vector<Field> more) { f.insert(f.end(), more.begin(), more.end()); };
  if (command == "bisect") {
    add({f_int("n", 2, 1, 4), f_any("cubes"), f_real("c_deg", 1.0, 1.0, 100.0),
         f_real("tol", 0.05, 0.0, 1.0, true), f_int("restarts", 32, 1, 10000), f_int("max_iter", 60, 1, 100000),
         f_int("nodes", 4096, 16, 1 << 22), f_real("h", 0.01, 0.0, 0.5, true), f_bool("export_surface", false)});
  } else if (command == "visibility") {
    add({f_any("polynomial"), f_int("n", 2, 2, 4), f_int("k", 3, 1, 16), f_any("cube"),
         f_real("h", 0.01, 0.0, 0.5, true), f_int("directions", 0, 0, 1 << 20), f_int("samples", 20000, 1000, 1e8),
         f_int("triples", 1000, 0, 1e8), f_real("john_tol", 0.05, 0.0, 1.0, true),
         f_real("mc_tolerance", 0.02, 0.0, 1.0)});
    add(mollifier_fields());
  } else if (command == "kakeya-verify") {
    add({f_any("tubes"), f_str("tubes_file", ""), f_int("n", 2, 2, 6), f_int("d", 2, 2, 6),
         f_int("tubes_per_family", 1, 1, 1000), f_real("spread", 0.1, 0.0, std::numbers::pi / 2),
         f_real("anchor_half_width", 2.0, 0.0, 1e3), f_int("trials", 1, 1, 100000), f_real("grid_h", nullptr, 0.0, 1.0, true),
         f_real("ratio_spread", 2.0, 1.0, kInf), f_real("shear", 0.0, 0.0, 10.0), f_real("shear_tol", 0.05, 0.0, 1.0)});
  } else if (command == "reduction-check") {
    add({f_int("n", 2, 2, 4), f_int("d", 2, 2, 4), f_int("tubes_per_family", 1, 1, 10), f_real("spread", 0.1, 0.0, 0.78),
         f_real("anchor_half_width", 0.5, 0.0, 100.0), f_int("trials", 1, 1, 10000), f_real("c_deg", 1.0, 1.0, 100.0),
         f_real("tol", 0.05, 0.0, 1.0, true), f_int("restarts", 32, 1, 10000), f_int("max_iter", 60, 1, 100000),
         f_int("nodes", 512, 16, 1 << 22), f_real("h", 0.02, 0.0, 0.5, true), f_real("need1_budget", 1e4, 0.0, kInf, true),
         f_real("need2_budget", 10.0, 0.0, kInf, true), f_real("need2_spread", 2.0, 1.0, kInf)});
    add({f_real("mollifier_eps", 1e-6, 0.0, 0.5, true), f_int("mollifier_m", 8, 1, 4096)});
  } else if (command == "net-build") {
    add({f_int("n", 2, 2, 4), f_real("rho", 1.0, 0.0, 100.0, true), f_real("gamma", 4.0, 1.0, 1000.0),
         f_real("v_min", nullptr, 0.0, kInf, true), f_real("v_max", nullptr, 0.0, kInf, true),
         f_real("axis_ratio_cap", 16.0, 1.0, 1e6), f_int("pool", 20000, 1, 1e8), f_int("cover_trials", 1000, 0, 1e8)});
  } else if (command == "classify") {
    add({f_any("polynomial"), f_int("n", 2, 2, 4), f_int("k", 3, 1, 16), f_any("cube"), f_real("M", 1.0, 0.0, 1e6, true),
         f_real("m_max", nullptr, 0.0, 1e6, true), f_real("eta", 0.1, 0.0, 1.0, true), f_real("c", 0.5, 0.0, 100.0, true),
         f_int("nodes", 1024, 16, 1 << 22), f_real("threshold", 0.4, 0.0, 0.5, true), f_real("noise_floor", 0.01, 0.0, 1.0),
         f_real("h", 0.01, 0.0, 0.5, true), f_int("vis_samples", 20000, 1000, 1e8), f_bool("mirror", false),
         f_str("net_file", ""), f_real("net_rho", 1.0, 0.0, 100.0, true), f_real("net_gamma", 4.0, 1.0, 1000.0),
         f_real("net_v_min", nullptr, 0.0, kInf, true), f_real("net_v_max", nullptr, 0.0, kInf, true),
         f_real("net_axis_ratio_cap", 16.0, 1.0, 1e6), f_int("net_pool", 20000, 1, 1e8)});
    add(mollifier_fields());
  } else if (command == "appendix-check") {
    add({f_int("trials", 200, 1, 1e7), f_int("n", 2, 2, 3), f_int("max_degree", 4, 1, 12),
         f_real("h", nullptr, 0.0, 0.5, true), f_int("samples", 16384, 256, 1 << 24), f_str("region", "ball"),
         f_real("margin_tol", 1e-2, 0.0, kInf)});
  } else if (command == "cylinder-check") {
    add({f_int("trials", 100, 1, 1e7), f_int("n", 2, 2, 3), f_int("max_degree", 6, 1, 12),
         f_real("half_length", 2.0, 0.0, 1e3, true), f_real("h", nullptr, 0.0, 0.5, true),
         f_real("ratio_cap", 1.05, 0.0, kInf, true)});
  }
  return f;
}

int line_at(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

/// Line of the first occurrence of "key" as a JSON key; falls back to the
/// first line of the document.
int line_of_key(std::string_view text, const std::string& key) {
  const std::string quoted = "\"" + key + "\"";
  std::size_t pos = 0;
  while ((pos = text.find(quoted, pos)) != std::string_view::npos) {
    std::size_t after = pos + quoted.size();
    while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
    if (after < text.size() && text[after] == ':') return line_at(text, pos);
    pos = after;
  }
  const std::size_t brace = text.find('{');
  return brace == std::string_view::npos ? 1 : line_at(text, brace);
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Int: return "an integer";
    case Kind::UInt: return "a non-negative integer";
    case Kind::Real: return "a number";
    case Kind::Bool: return "a boolean";
    case Kind::Str: return "a string";
    case Kind::Any: return "a JSON value";
  }
  return "?";
}

bool kind_ok(Kind k, const json& v) {
  switch (k) {
    case Kind::Int: return v.is_number_integer();
    case Kind::UInt: return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
    case Kind::Real: return v.is_number();
    case Kind::Bool: return v.is_boolean();
    case Kind::Str: return v.is_string();
    case Kind::Any: return true;
  }
  return false;
}

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// ---------------------------------------------------------------- helpers

struct Context {
  std::string_view text;
  const json& cfg;
  std::string config_dir;
  int jobs = 1;

  [[noreturn]] void bad(const std::string& key, const std::string& msg) const {
    throw ConfigError(line_of_key(text, key), "field '" + key + "': " + msg);
  }
  double real(const char* k) const { return cfg.at(k).get<double>(); }
  int integer(const char* k) const { return cfg.at(k).get<int>(); }
  std::uint64_t seed() const { return cfg.at("seed").get<std::uint64_t>(); }
  bool has(const char* k) const { return cfg.contains(k) && !cfg.at(k).is_null(); }
  std::string path(const std::string& p) const {
    const fs::path q(p);
    return q.is_absolute() || config_dir.empty() ? q.string() : (fs::path(config_dir) / q).string();
  }
};

struct Exec {
  ExitStatus status = ExitStatus::Pass;
  std::string message;
  json result = json::object();
  std::string csv;  // body, without the provenance line
  std::vector<std::pair<std::string, std::string>> extra;  // file name, contents
};

template <class F>
void parallel_for(std::size_t count, int jobs, F&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(jobs, 1), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::optional<MollifierConfig> mollifier_of(const Context& c, std::uint64_t seed) {
  const double eps = c.real("mollifier_eps");
  if (eps == 0.0) return std::nullopt;
  return MollifierConfig{eps, c.integer("mollifier_m"), seed};
}

Polynomial polynomial_of(const Context& c, int& n) {
  if (c.has("polynomial")) {
    try {
      Polynomial p = polynomial_from_json(c.cfg.at("polynomial"));
      n = p.n();
      return p;
    } catch (const std::exception& e) {
      c.bad("polynomial", e.what());
    }
  }
  n = c.integer("n");
  return random_polynomial(make_space(n, c.integer("k")), c.seed());
}

Cube cube_of_field(const Context& c, const char* key, int n) {
  if (!c.has(key)) return Cube{std::vector<long>(n, 0)};
  const json& v = c.cfg.at(key);
  if (!v.is_array() || static_cast<int>(v.size()) != n) c.bad(key, "expected an array of " + std::to_string(n) + " integers");
  Cube q;
  for (const auto& x : v) {
    if (!x.is_number_integer()) c.bad(key, "corner entries must be integers");
    q.corner.push_back(x.get<long>());
  }
  return q;
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) {
    os_.precision(17);
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << "\n";
  }
  template <class... T>
  void row(const T&... cells) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cells, first = false), ...);
    os_ << "\n";
  }
  std::ostream& raw() { return os_; }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

std::vector<std::string> indexed(const char* prefix, int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

std::string joined(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os.precision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::string joined(const std::vector<long>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// ---------------------------------------------------------------- commands

Exec run_bisect(const Context& c) {
  const int n = c.integer("n");
  WeightFunction m{n, {}};
  if (!c.has("cubes")) {
    m.entries[Cube{std::vector<long>(n, 0)}] = 2.0;
  } else {
    const json& arr = c.cfg.at("cubes");
    if (!arr.is_array() || arr.empty()) c.bad("cubes", "expected a non-empty array of {corner, value}");
    for (const auto& e : arr) {
      if (!e.is_object() || !e.contains("corner") || !e.contains("value") || !e.at("value").is_number())
        c.bad("cubes", "each entry needs 'corner' and numeric 'value'");
      const json& corner = e.at("corner");
      if (!corner.is_array() || static_cast<int>(corner.size()) != n) c.bad("cubes", "corner length must equal n");
      Cube q;
      for (const auto& x : corner) {
        if (!x.is_number_integer()) c.bad("cubes", "corner entries must be integers");
        q.corner.push_back(x.get<long>());
      }
      const double v = e.at("value").get<double>();
      if (!(v >= 1.0) || !std::isfinite(v)) c.bad("cubes", "values must lie in [1, inf)");
      if (m.entries.count(q)) c.bad("cubes", "duplicate cube " + joined(q.corner));
      m.entries[q] = v;
    }
  }
  WarmupOptions wo;
  wo.c_deg = c.real("c_deg");
  wo.zero = ZeroOptions{c.real("tol"), c.integer("restarts"), c.seed(), c.integer("max_iter")};
  wo.h = c.real("h");
  wo.nodes = static_cast<std::size_t>(c.integer("nodes"));
  const WarmupReport r = warmup_bisector(m, wo);

  Exec ex;
  ex.result = {{"k", r.k}, {"cells", r.cells}, {"fitted_c", r.fitted_c}, {"zero", to_json(r.zero)}};
  Csv csv(cat(indexed("corner_", n), {"M", "area", "area_over_M"}));
  for (std::size_t i = 0; i < r.cubes.size(); ++i)
    csv.row(joined(r.cubes[i].corner), r.weights[i], r.areas[i], r.areas[i] / r.weights[i]);
  ex.csv = csv.str();
  if (c.cfg.at("export_surface").get<bool>()) {
    std::ostringstream os;
    SurfaceSampleSet all(n);
    for (const Cube& q : r.cubes) all.merge(extract_surface(*r.zero.p, Region::of(q), wo.h), 1.0);
    write_surface_csv(os, all);
    ex.extra.emplace_back("surface.csv", os.str());
  }
  if (!r.zero.converged) {
    ex.status = ExitStatus::NotConverged;
    ex.message = "bisector search did not converge: max residual " + num(r.zero.max_residual) + " > tol " +
                 num(c.real("tol"));
  } else if (r.fitted_c > 0.0) {
    ex.message = "bisector found, fitted c = " + num(r.fitted_c);
  } else {
    ex.status = ExitStatus::Fail;
    ex.message = "bisector leaves a support cube without surface (fitted c = 0)";
  }
  return ex;
}

Exec run_visibility(const Context& c) {
  int n = 0;
  const Polynomial p = polynomial_of(c, n);
  const Cube q = cube_of_field(c, "cube", n);
  const auto moll = mollifier_of(c, c.seed());
  const double h = c.real("h");
  const GaugeBody k = build_gauge(p, Region::of(q), moll, h, c.integer("directions"));

  const int triples = c.integer("triples");
  Rng rng(derive_seed(c.seed(), 1));
  int violations = 0;
  for (int t = 0; t < triples; ++t) {
    const Eigen::VectorXd u = gaussian_vector(rng, n), v = gaussian_vector(rng, n);
    const double s = 4.0 * uniform01(rng) - 2.0;
    const double gu = k.gauge(u), gv = k.gauge(v);
    const double tol = 1e-9 * (1.0 + gu + gv);
    if (k.gauge(u + v) > gu + gv + tol) ++violations;
    if (std::abs(k.gauge(-u) - gu) > tol) ++violations;
    if (std::abs(k.gauge(s * u) - std::abs(s) * gu) > tol * (1.0 + std::abs(s))) ++violations;
  }
  const VolumeEstimate vol = body_volume(k, c.integer("samples"), derive_seed(c.seed(), 2));
  const double vis = std::pow(vol.value, -1.0 / n);
  const double base = std::pow(unit_ball_volume(n), -1.0 / n);
  const double mc = c.real("mc_tolerance");
  json john;
  bool certified = false;
  try {
    const JohnResult jr = john_ellipsoid(k, c.real("john_tol"));
    certified = jr.certified;
    john = {{"certified", jr.certified}, {"inner_gauge", jr.inner_gauge}, {"outer_gauge", jr.outer_gauge},
            {"lengths", vec_json(jr.ellipsoid.lengths())}};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Certification) throw;
    john = {{"certified", false}, {"error", e.what()}};
  }

  Exec ex;
  ex.result = {{"polynomial", to_json(p)}, {"cube", q.corner}, {"volume", vol.value}, {"volume_std_error", vol.std_error},
               {"visibility", vis}, {"ball_visibility", base}, {"convexity_violations", violations},
               {"john", john}};
  Csv csv(cat(indexed("u", n), {"gauge"}));
  for (std::size_t i = 0; i < k.directions().size(); ++i) csv.row(joined(k.directions()[i]), k.net_gauge()[i]);
  ex.csv = csv.str();
  std::vector<std::string> bad;
  if (violations) bad.push_back(std::to_string(violations) + " convexity violations");
  if (vis < base * (1.0 - mc)) bad.push_back("visibility " + num(vis) + " below ball value " + num(base));
  if (!certified) bad.push_back("John certificate failed");
  if (bad.empty()) {
    ex.message = "visibility " + num(vis) + ", gauge checks and John certificate pass";
  } else {
    ex.status = ExitStatus::Fail;
    ex.message = bad.front();
  }
  return ex;
}

KakeyaInstance instance_of(const Context& c, std::uint64_t seed) {
  if (c.has("tubes") || !c.cfg.at("tubes_file").get<std::string>().empty()) {
    const bool inline_tubes = c.has("tubes");
    const char* key = inline_tubes ? "tubes" : "tubes_file";
    try {
      json j;
      if (inline_tubes) {
        j = c.cfg.at("tubes");
      } else {
        std::ifstream in(c.path(c.cfg.at("tubes_file").get<std::string>()));
        if (!in) c.bad(key, "cannot open tube file");
        j = json::parse(in);
      }
      return instance_from_file(tubes_from_json(j));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      c.bad(key, e.what());
    }
  }
  InstanceParams ip;
  ip.n = c.integer("n");
  ip.d = c.integer("d");
  if (ip.d > ip.n) c.bad("d", "must not exceed n");
  ip.tubes_per_family = c.integer("tubes_per_family");
  ip.spread = c.real("spread");
  ip.anchor_half_width = c.real("anchor_half_width");
  ip.seed = seed;
  try {
    return gen_instance(ip);
  } catch (const Error& e) {
    c.bad("spread", e.what());
  }
}

Exec run_kakeya_verify(const Context& c) {
  const bool from_file = c.has("tubes") || !c.cfg.at("tubes_file").get<std::string>().empty();
  const int trials = from_file ? 1 : c.integer("trials");
  const double shear = c.real("shear");
  std::vector<KakeyaInstance> insts;
  std::vector<std::uint64_t> seeds;
  for (int t = 0; t < trials; ++t) {
    seeds.push_back(trials == 1 ? c.seed() : derive_seed(c.seed(), static_cast<std::uint64_t>(t)));
    insts.push_back(instance_of(c, seeds.back()));
  }
  const int n = insts.front().n;
  if (shear > 0.0 && insts.front().d != n) c.bad("shear", "shear invariance applies only when d = n");
  const double grid_h = c.has("grid_h") ? c.real("grid_h") : (n == 2 ? 0.01 : 0.05);

  std::vector<RatioReport> rep(insts.size()), sheared(insts.size());
  std::vector<std::string> err(insts.size());
  parallel_for(insts.size(), c.jobs, [&](std::size_t i) {
    try {
      rep[i] = theorem_ratio(insts[i], grid_h);
      if (shear > 0.0) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
        a(0, n - 1) = shear;
        sheared[i] = theorem_ratio(transformed(insts[i], a, Eigen::VectorXd::Zero(n)), grid_h);
      }
    } catch (const std::exception& e) {
      err[i] = e.what();
    }
  });
  for (const auto& e : err) {
    if (!e.empty()) fail(ErrorKind::Certification, e);
  }

  std::vector<double> ratios;
  std::size_t worst = 0;
  double shear_dev = 0.0;
  Csv csv({"trial", "seed", "tubes", "lhs", "rhs", "ratio", "grid_points", "sheared_ratio"});
  for (std::size_t i = 0; i < rep.size(); ++i) {
    ratios.push_back(rep[i].ratio);
    if (rep[i].ratio > rep[worst].ratio) worst = i;
    if (shear > 0.0) shear_dev = std::max(shear_dev, std::abs(sheared[i].ratio / rep[i].ratio - 1.0));
    csv.row(i, seeds[i], insts[i].tube_count(), rep[i].lhs, rep[i].rhs, rep[i].ratio, rep[i].points,
            shear > 0.0 ? num(sheared[i].ratio) : std::string());
  }
  const double med = median_of(ratios);
  const double mx = *std::max_element(ratios.begin(), ratios.end());
  Exec ex;
  ex.csv = csv.str();
  ex.result = {{"lhs", rep[worst].lhs},
               {"rhs", rep[worst].rhs},
               {"ratio", rep[worst].ratio},
               {"fitted_constants", {{"max_ratio", mx}, {"median_ratio", med}, {"max_over_median", mx / med}}},
               {"seeds", seeds},
               {"parameters", {{"n", n}, {"d", insts.front().d}, {"grid_h", grid_h}, {"trials", trials}}}};
  if (shear > 0.0) ex.result["fitted_constants"]["max_shear_deviation"] = shear_dev;
  const double spread = c.real("ratio_spread");
  if (!std::isfinite(mx) || !(med > 0.0)) {
    ex.status = ExitStatus::Fail;
    ex.message = "theorem ratio is not finite and positive";
  } else if (mx > spread * med) {
    ex.status = ExitStatus::Fail;
    ex.message = "max ratio " + num(mx) + " exceeds " + num(spread) + " x median " + num(med);
  } else if (shear > 0.0 && shear_dev > c.real("shear_tol")) {
    ex.status = ExitStatus::Fail;
    ex.message = "shear changes the ratio by " + num(shear_dev);
  } else {
    ex.message = "ratio " + num(rep[worst].ratio) + (trials > 1 ? " (max), median " + num(med) : std::string());
  }
  return ex;
}

Exec run_reduction_check(const Context& c) {
  const int trials = c.integer("trials");
  if (c.integer("d") > c.integer("n")) c.bad("d", "must not exceed n");
  struct Trial {
    std::uint64_t seed = 0;
    std::size_t cubes = 0;
    double lambda = 0.0;
    int k = 0;
    bool converged = false;
    double residual = 0.0;
    MarginReport n1, n2;
    std::string error;
  };
  std::vector<Trial> out(trials);
  parallel_for(out.size(), c.jobs, [&](std::size_t i) {
    Trial& t = out[i];
    t.seed = trials == 1 ? c.seed() : derive_seed(c.seed(), i);
    try {
      InstanceParams ip;
      ip.n = c.integer("n");
      ip.d = c.integer("d");
      ip.tubes_per_family = c.integer("tubes_per_family");
      ip.spread = c.real("spread");
      ip.anchor_half_width = c.real("anchor_half_width");
      ip.seed = t.seed;
      const KakeyaInstance inst = gen_instance(ip);
      const WeightFunction m = derive_M(inst);
      t.lambda = choose_lambda(m);
      PipelineOptions po;
      po.warmup.c_deg = c.real("c_deg");
      po.warmup.zero = ZeroOptions{c.real("tol"), c.integer("restarts"), t.seed, c.integer("max_iter")};
      po.warmup.h = c.real("h");
      po.warmup.nodes = static_cast<std::size_t>(c.integer("nodes"));
      po.measure_visibility = false;
      const PipelineResult pr = pipeline_polynomial(m, t.lambda, po);
      t.cubes = pr.cubes.size();
      t.k = pr.warmup.k;
      t.converged = pr.warmup.zero.converged;
      t.residual = pr.warmup.zero.max_residual;
      if (!t.converged) return;
      const MollifierConfig mc{c.real("mollifier_eps"), c.integer("mollifier_m"), t.seed};
      const SjTable s = build_Sj(inst, *pr.warmup.zero.p, mc, t.lambda, c.real("h"));
      t.n1 = check_need1(s, inst, m, c.real("need1_budget"));
      t.n2 = check_need2(s, inst, c.real("need2_budget"));
    } catch (const std::exception& e) {
      t.error = e.what();
    }
  });

  Exec ex;
  Csv csv({"trial", "seed", "cubes", "lambda", "k", "converged", "max_residual", "need1_max", "need1_median",
           "need1_hard_violations", "need1_pass", "need2_max", "need2_median", "need2_pass", "error"});
  std::vector<double> n2max;
  std::size_t not_conv = 0, failed = 0, errors = 0;
  double n1max = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Trial& t = out[i];
    csv.row(i, t.seed, t.cubes, t.lambda, t.k, t.converged, t.residual, t.n1.max, t.n1.median,
            t.n1.hard_violations, t.n1.pass, t.n2.max, t.n2.median, t.n2.pass, t.error);
    if (!t.error.empty()) {
      ++failed;
      ++errors;
    } else if (!t.converged) {
      ++not_conv;
    } else {
      if (!t.n1.pass || !t.n2.pass) ++failed;
      n2max.push_back(t.n2.max);
      n1max = std::max(n1max, t.n1.max);
    }
  }
  ex.csv = csv.str();
  const double med = median_of(n2max);
  const double mx = n2max.empty() ? 0.0 : *std::max_element(n2max.begin(), n2max.end());
  ex.result = {{"trials", trials},
               {"converged", out.size() - not_conv - errors},
               {"failed", failed},
               {"fitted_constants", {{"need1_max", n1max}, {"need2_max", mx}, {"need2_median_of_max", med}}}};
  const double spread = c.real("need2_spread");
  if (failed) {
    ex.status = ExitStatus::Fail;
    ex.message = std::to_string(failed) + " trial(s) violate a reduction budget";
  } else if (n2max.size() > 1 && mx > spread * med) {
    ex.status = ExitStatus::Fail;
    ex.message = "need2 max " + num(mx) + " exceeds " + num(spread) + " x median " + num(med);
  } else if (not_conv) {
    ex.status = ExitStatus::NotConverged;
    ex.message = std::to_string(not_conv) + " trial(s) did not converge";
  } else {
    ex.message = "reduction checks pass: need1 max " + num(n1max) + ", need2 max " + num(mx);
  }
  return ex;
}

NetParams net_params(const Context& c, const char* prefix, int n) {
  auto key = [prefix](const char* k) { return std::string(prefix) + k; };
  NetParams np;
  np.n = n;
  np.rho = c.cfg.at(key("rho")).get<double>();
  np.gamma = c.cfg.at(key("gamma")).get<double>();
  np.axis_ratio_cap = c.cfg.at(key("axis_ratio_cap")).get<double>();
  np.pool = c.cfg.at(key("pool")).get<int>();
  np.seed = c.seed();
  const json& vmin = c.cfg.at(key("v_min"));
  const json& vmax = c.cfg.at(key("v_max"));
  np.v_min = vmin.is_null() ? unit_ball_volume(n) / 64.0 : vmin.get<double>();
  np.v_max = vmax.is_null() ? unit_ball_volume(n) : vmax.get<double>();
  if (np.v_min > np.v_max) c.bad(key("v_min"), "must not exceed v_max");
  return np;
}

Exec run_net_build(const Context& c) {
  const int n = c.integer("n");
  const NetParams np = net_params(c, "", n);
  const ColoredNet net = build_net(np);
  const NetCheck chk = check_net(net, c.integer("cover_trials"), derive_seed(c.seed(), 7));
  Exec ex;
  Csv csv(cat({"index", "color", "volume"}, indexed("axis_", n)));
  for (std::size_t i = 0; i < net.elements.size(); ++i) {
    std::vector<double> l(net.elements[i].lengths().data(), net.elements[i].lengths().data() + n);
    std::sort(l.begin(), l.end());
    csv.row(i, net.colors[i], net.elements[i].volume(), joined(Eigen::Map<Eigen::VectorXd>(l.data(), n)));
  }
  ex.csv = csv.str();
  ex.extra.emplace_back("net.json", to_json(net).dump());
  ex.result = {{"elements", net.elements.size()},
               {"colors", net.color_count},
               {"alpha", net.alpha()},
               {"min_separation", chk.min_separation},
               {"min_color_separation", chk.min_color_separation},
               {"max_cover_distance", chk.max_cover_distance},
               {"ok", chk.ok}};
  if (chk.ok) {
    ex.message = "net of " + std::to_string(net.elements.size()) + " ellipsoids in " +
                 std::to_string(net.color_count) + " colors satisfies separation and covering";
  } else {
    ex.status = ExitStatus::Fail;
    ex.message = "net invariants violated";
  }
  return ex;
}

json class_json(const VisibilityClass& vc) {
  json colors = json::array();
  for (const auto& cl : vc.colors) {
    std::size_t plus = 0, minus = 0, und = 0;
    for (const auto& t : cl.translates) {
      plus += t.sign == SignLabel::Plus;
      minus += t.sign == SignLabel::Minus;
      und += t.sign == SignLabel::Undecided;
    }
    colors.push_back({{"color", cl.color}, {"element", cl.element}, {"translates", cl.translates.size()},
                      {"bisected", cl.bisected()}, {"plus", plus}, {"minus", minus}, {"undecided", und}});
  }
  return {{"r", vc.r}, {"vis", vc.vis}, {"M", vc.m}, {"eta", vc.eta}, {"bisection_fraction", bisection_fraction(vc)},
          {"colors", colors}};
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
      const bool sb = s.label == BisectLabel::Bisected, tb = t.label == BisectLabel::Bisected;
      if (sb != tb || s.gap != -t.gap) return false;
      const SignLabel swapped = s.sign == SignLabel::Plus    ? SignLabel::Minus
                                : s.sign == SignLabel::Minus ? SignLabel::Plus
                                                             : s.sign;
      if (t.sign != swapped) return false;
    }
  }
  return true;
}

Exec run_classify(const Context& c) {
  int n = 0;
  const Polynomial p = polynomial_of(c, n);
  const Cube q = cube_of_field(c, "cube", n);
  ColoredNet net;
  const std::string net_file = c.cfg.at("net_file").get<std::string>();
  if (!net_file.empty()) {
    try {
      std::ifstream in(c.path(net_file));
      if (!in) c.bad("net_file", "cannot open net file");
      net = net_from_json(json::parse(in));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      c.bad("net_file", e.what());
    }
    if (net.params.n != n) c.bad("net_file", "net dimension does not match the polynomial");
  } else {
    net = build_net(net_params(c, "net_", n));
  }
  ClassifyOptions opt;
  opt.mollifier = MollifierConfig{c.real("mollifier_eps"), c.integer("mollifier_m"), c.seed()};
  if (opt.mollifier.eps == 0.0) c.bad("mollifier_eps", "classification needs a positive mollifier radius");
  opt.h = c.real("h");
  opt.vis_samples = c.integer("vis_samples");
  opt.c = c.real("c");
  opt.nodes = static_cast<std::size_t>(c.integer("nodes"));
  opt.threshold = c.real("threshold");
  opt.noise_floor = c.real("noise_floor");
  const double m = c.real("M");
  const double m_max = c.has("m_max") ? c.real("m_max") : m;
  if (m_max < m) c.bad("m_max", "must be at least M");
  const double eta = c.real("eta");

  const VisibilityClass vc = classify(p, q, m, m_max, net, eta, opt);
  Exec ex;
  ex.result = class_json(vc);
  ex.result["polynomial"] = to_json(p);
  Csv csv(cat(cat({"color", "element"}, indexed("x", n)), {"label", "sign", "gap"}));
  for (const auto& cl : vc.colors) {
    for (const auto& t : cl.translates)
      csv.row(cl.color, cl.element, joined(t.center), to_string(t.label), to_string(t.sign), t.gap);
  }
  ex.csv = csv.str();
  const double frac = bisection_fraction(vc);
  bool mirror_ok = true;
  if (c.cfg.at("mirror").get<bool>()) {
    mirror_ok = mirrored(vc, classify(-p, q, m, m_max, net, eta, opt));
    ex.result["mirror"] = mirror_ok;
  }
  if (!(frac < 1.0)) {
    ex.status = ExitStatus::Fail;
    ex.message = "every translate is bisected at eta = " + num(eta);
  } else if (!mirror_ok) {
    ex.status = ExitStatus::Fail;
    ex.message = "classification of -p is not the mirror image";
  } else {
    ex.message = "r = " + std::to_string(vc.r) + ", bisection fraction " + num(frac);
  }
  return ex;
}

EllipsoidCell random_ellipsoid(int n, Rng& rng) {
  Eigen::VectorXd l(n);
  for (int i = 0; i < n; ++i) l[i] = std::exp(2.0 * uniform01(rng) - 1.0);
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i) g.col(i) = gaussian_vector(rng, n);
  const Eigen::MatrixXd rot = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  Eigen::VectorXd center(n);
  for (int i = 0; i < n; ++i) center[i] = 2.0 * uniform01(rng) - 1.0;
  return {Ellipsoid::from_axes(l, rot), center};
}

Exec run_appendix_check(const Context& c) {
  const int trials = c.integer("trials");
  const int n = c.integer("n");
  const int kmax = c.integer("max_degree");
  const double h = c.has("h") ? c.real("h") : (n == 2 ? 0.01 : 0.02);
  const std::string region = c.cfg.at("region").get<std::string>();
  if (region != "ball" && region != "ellipsoid") c.bad("region", "expected \"ball\" or \"ellipsoid\"");
  const std::size_t samples = static_cast<std::size_t>(c.integer("samples"));
  struct Row {
    int k = 0;
    AppendixReport r;
    std::string error;
  };
  std::vector<Row> rows(trials);
  parallel_for(rows.size(), c.jobs, [&](std::size_t i) {
    Rng rng(derive_seed(c.seed(), i));
    Row& row = rows[i];
    row.k = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(kmax));
    const Polynomial p = random_polynomial(make_space(n, row.k), rng());
    const EllipsoidCell cell =
        region == "ball" ? EllipsoidCell{Ellipsoid::ball(n), Eigen::VectorXd::Zero(n)} : random_ellipsoid(n, rng);
    try {
      row.r = appendix_check(p, cell, h, samples);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  Csv csv({"trial", "k", "a", "b", "area", "bound", "margin", "error"});
  double worst = kInf;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    csv.row(i, r.k, r.r.a, r.r.b, r.r.area, r.r.bound, r.r.margin, r.error);
    if (r.error.empty()) worst = std::min(worst, r.r.margin);
    else ++errors;
  }
  Exec ex;
  ex.csv = csv.str();
  ex.result = {{"trials", trials}, {"n", n}, {"h", h}, {"min_margin", errors == rows.size() ? json() : json(worst)},
               {"errors", errors}};
  const double tol = c.real("margin_tol");
  if (errors) {
    ex.status = ExitStatus::Fail;
    ex.message = std::to_string(errors) + " trial(s) failed to extract a surface";
  } else if (worst < -tol) {
    ex.status = ExitStatus::Fail;
    ex.message = "minimum margin " + num(worst) + " below -" + num(tol);
  } else {
    ex.message = "minimum margin " + num(worst) + " over " + std::to_string(trials) + " trials";
  }
  return ex;
}

Exec run_cylinder_check(const Context& c) {
  const int trials = c.integer("trials");
  const int n = c.integer("n");
  const int kmax = c.integer("max_degree");
  const double h = c.has("h") ? c.real("h") : (n == 2 ? 0.01 : 0.03);
  const double len = c.real("half_length");
  struct Row {
    int k = 0;
    double ratio = 0.0;
    std::string error;
  };
  std::vector<Row> rows(trials);
  parallel_for(rows.size(), c.jobs, [&](std::size_t i) {
    Rng rng(derive_seed(c.seed(), i));
    Row& row = rows[i];
    row.k = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(kmax));
    const Polynomial p = random_polynomial(make_space(n, row.k), rng());
    const Tube t = make_tube(0.5 * gaussian_vector(rng, n), uniform_on_sphere(rng, n));
    try {
      row.ratio = cylinder_ratio(p, t, len, h);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  Csv csv({"trial", "k", "ratio", "error"});
  double worst = 0.0;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv.row(i, rows[i].k, rows[i].ratio, rows[i].error);
    if (rows[i].error.empty()) worst = std::max(worst, rows[i].ratio);
    else ++errors;
  }
  Exec ex;
  ex.csv = csv.str();
  ex.result = {{"trials", trials}, {"n", n}, {"h", h}, {"max_ratio", worst}, {"errors", errors}};
  const double cap = c.real("ratio_cap");
  if (errors) {
    ex.status = ExitStatus::Fail;
    ex.message = std::to_string(errors) + " trial(s) failed to extract a surface";
  } else if (worst > cap) {
    ex.status = ExitStatus::Fail;
    ex.message = "max cylinder ratio " + num(worst) + " exceeds " + num(cap);
  } else {
    ex.message = "max cylinder ratio " + num(worst) + " over " + std::to_string(trials) + " trials";
  }
  return ex;
}

using Runner = std::function<Exec(const Context&)>;

const std::vector<std::pair<std::string, Runner>>& runners() {
  static const std::vector<std::pair<std::string, Runner>> r{
      {"bisect", run_bisect},
      {"visibility", run_visibility},
      {"kakeya-verify", run_kakeya_verify},
      {"reduction-check", run_reduction_check},
      {"net-build", run_net_build},
      {"classify", run_classify},
      {"appendix-check", run_appendix_check},
      {"cylinder-check", run_cylinder_check},
  };
  return r;
}

const Runner* find_runner(std::string_view command) {
  for (const auto& [name, fn] : runners()) {
    if (name == command) return &fn;
  }
  return nullptr;
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << contents;
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
}

const char* status_name(ExitStatus s) {
  switch (s) {
    case ExitStatus::Pass: return "PASS";
    case ExitStatus::Fail: return "FAIL";
    case ExitStatus::NotConverged: return "NOT_CONVERGED";
    case ExitStatus::Usage: return "USAGE";
  }
  return "?";
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, fn] : runners()) v.push_back(name);
    return v;
  }();
  return names;
}

json resolve_config(std::string_view command, std::string_view text) {
  if (!find_runner(command)) throw ConfigError(0, "unknown command '" + std::string(command) + "'");
  json cfg;
  try {
    cfg = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::string what = e.what();
    const std::size_t cut = what.find("parse error");
    throw ConfigError(line_at(text, e.byte == 0 ? 0 : e.byte - 1),
                      "malformed JSON: " + (cut == std::string::npos ? what : what.substr(cut)));
  }
  if (!cfg.is_object()) throw ConfigError(1, "config must be a JSON object");
  const auto fields = schema(command);
  for (const auto& [key, value] : cfg.items()) {
    if (key == "command") {
      if (!value.is_string() || value.get<std::string>() != command)
        throw ConfigError(line_of_key(text, key), "field 'command': config is for a different command");
      continue;
    }
    const bool known = std::any_of(fields.begin(), fields.end(), [&](const Field& f) { return f.name == key; });
    if (!known) throw ConfigError(line_of_key(text, key), "unknown field '" + key + "'");
  }
  json out = json::object();
  out["command"] = std::string(command);
  for (const Field& f : fields) {
    if (!cfg.contains(f.name) || (cfg.at(f.name).is_null() && f.kind != Kind::Any)) {
      if (f.required) throw ConfigError(line_of_key(text, f.name), "missing required field '" + f.name + "'");
      out[f.name] = f.def;
      continue;
    }
    const json& v = cfg.at(f.name);
    if (!kind_ok(f.kind, v))
      throw ConfigError(line_of_key(text, f.name), "field '" + f.name + "' must be " + kind_name(f.kind));
    if (f.kind == Kind::Int || f.kind == Kind::Real) {
      const double x = v.get<double>();
      const bool below = f.lo_open ? !(x > f.lo) : !(x >= f.lo);
      if (below || !(x <= f.hi) || !std::isfinite(x)) {
        throw ConfigError(line_of_key(text, f.name), "field '" + f.name + "' = " + num(x) + " outside " +
                                                         (f.lo_open ? "(" : "[") + num(f.lo) + ", " + num(f.hi) + "]");
      }
    }
    out[f.name] = v;
  }
  return out;
}

std::uint64_t config_hash(const json& resolved) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : resolved.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xf];
  return s;
}

std::string output_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("MLK_OUTPUT_DIR"); env && *env) return env;
  return "mlk-out";
}

RunOutcome run_command(const RunRequest& req) {
  RunOutcome out;
  const Runner* fn = find_runner(req.command);
  if (!fn) {
    out.message = "unknown command '" + req.command + "'";
    return out;
  }
  json cfg;
  Exec ex;
  try {
    cfg = resolve_config(req.command, req.config_text);
    const Context ctx{req.config_text, cfg, req.config_dir, std::max(req.jobs, 1)};
    ex = (*fn)(ctx);
  } catch (const ConfigError& e) {
    out.message = (e.line() > 0 ? "line " + std::to_string(e.line()) + ": " : std::string()) + e.what();
    return out;
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::NotConverged: out.status = ExitStatus::NotConverged; break;
      case ErrorKind::Certification:
      case ErrorKind::Degenerate: out.status = ExitStatus::Fail; break;
      default: out.status = ExitStatus::Usage; break;
    }
    out.message = e.what();
    if (out.status == ExitStatus::Usage) return out;
    ex.status = out.status;
    ex.message = out.message;
    ex.result = {{"error", e.what()}};
  } catch (const std::exception& e) {
    out.message = std::string("internal error: ") + e.what();
    return out;
  }

  const std::string hash = hex64(config_hash(cfg));
  json summary = {{"tool", "mlk"},           {"version", kToolVersion},   {"command", req.command},
                  {"config_hash", hash},     {"config", cfg},             {"status", status_name(ex.status)},
                  {"exit_code", static_cast<int>(ex.status)}, {"message", ex.message}, {"result", ex.result}};
  const std::string provenance = "# mlk " + std::string(kToolVersion) + " command=" + req.command + " config_hash=" + hash + "\n";
  try {
    const fs::path dir(req.out_dir.empty() ? output_dir("") : req.out_dir);
    fs::create_directories(dir);
    const fs::path js = dir / (req.command + ".json");
    write_file(js, summary.dump(2) + "\n");
    out.files.push_back(js.string());
    if (!ex.csv.empty()) {
      const fs::path csv = dir / (req.command + ".csv");
      write_file(csv, provenance + ex.csv);
      out.files.push_back(csv.string());
    }
    for (const auto& [name, body] : ex.extra) {
      const fs::path p = dir / name;
      if (name.ends_with(".json")) {
        json j = json::parse(body);
        j["tool"] = "mlk";
        j["version"] = kToolVersion;
        j["config_hash"] = hash;
        write_file(p, j.dump(2) + "\n");
      } else {
        write_file(p, name.ends_with(".csv") ? provenance + body : body);
      }
      out.files.push_back(p.string());
    }
  } catch (const std::exception& e) {
    out.status = ExitStatus::Usage;
    out.message = e.what();
    return out;
  }
  out.status = ex.status;
  out.message = ex.message;
  out.summary = std::move(summary);
  return out;
}

}  // namespace mlk
