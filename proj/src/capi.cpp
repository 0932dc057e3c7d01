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

#include "mlk/mlk.h"

#include <cstdlib>
#include <cstring>
#include <optional>
#include <string>

#include "mlk/convexvis.hpp"
#include "mlk/error.hpp"
#include "mlk/kakeya.hpp"
#include "mlk/runner.hpp"
#include "mlk/surfcalc.hpp"

struct mlk_polynomial {
  mlk::Polynomial p;
};

namespace {

thread_local std::string g_last_error;

mlk_status record(mlk_status s, const char* what) {
  g_last_error = what;
  return s;
}

template <class F>
mlk_status guarded(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return MLK_OK;
  } catch (const mlk::Error& e) {
    switch (e.kind()) {
      case mlk::ErrorKind::InvalidArgument: return record(MLK_E_INVALID_ARGUMENT, e.what());
      case mlk::ErrorKind::Degenerate: return record(MLK_E_DEGENERATE, e.what());
      case mlk::ErrorKind::NotConverged: return record(MLK_E_NOT_CONVERGED, e.what());
      case mlk::ErrorKind::Certification: return record(MLK_E_CERTIFICATION, e.what());
      case mlk::ErrorKind::Io: return record(MLK_E_IO, e.what());
    }
    return record(MLK_E_INTERNAL, e.what());
  } catch (const std::exception& e) {
    return record(MLK_E_INTERNAL, e.what());
  } catch (...) {
    return record(MLK_E_INTERNAL, "unknown exception");
  }
}

void need(const void* ptr, const char* name) {
  if (!ptr) mlk::fail(mlk::ErrorKind::InvalidArgument, std::string(name) + " must not be NULL");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

Eigen::VectorXd vec(const double* x, int n) { return Eigen::Map<const Eigen::VectorXd>(x, n); }

mlk::Box box(const mlk_polynomial* p, const double* lo, const double* hi) {
  need(p, "p");
  need(lo, "lo");
  need(hi, "hi");
  const int n = p->p.n();
  mlk::Box b{vec(lo, n), vec(hi, n)};
  if (!((b.hi - b.lo).array() > 0.0).all()) mlk::fail(mlk::ErrorKind::InvalidArgument, "box must have hi > lo");
  return b;
}

}  // namespace

extern "C" {

const char* mlk_version(void) { return mlk::kToolVersion; }

const char* mlk_last_error(void) { return g_last_error.c_str(); }

const char* mlk_status_name(mlk_status s) {
  switch (s) {
    case MLK_OK: return "ok";
    case MLK_E_INVALID_ARGUMENT: return "invalid argument";
    case MLK_E_DEGENERATE: return "degenerate";
    case MLK_E_NOT_CONVERGED: return "not converged";
    case MLK_E_CERTIFICATION: return "certification failed";
    case MLK_E_IO: return "i/o error";
    case MLK_E_INTERNAL: return "internal error";
  }
  return "unknown";
}

void mlk_string_free(char* s) { std::free(s); }

mlk_status mlk_poly_from_json(const char* json, mlk_polynomial** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::exception& e) {
      mlk::fail(mlk::ErrorKind::InvalidArgument, e.what());
    }
    *out = new mlk_polynomial{mlk::polynomial_from_json(j)};
  });
}

mlk_status mlk_poly_random(int n, int k, uint64_t seed, mlk_polynomial** out) {
  return guarded([&] {
    need(out, "out");
    mlk::require(n >= 1 && k >= 0, "need n >= 1 and k >= 0");
    *out = new mlk_polynomial{mlk::random_polynomial(mlk::make_space(n, k), seed)};
  });
}

mlk_status mlk_poly_negate(const mlk_polynomial* p, mlk_polynomial** out) {
  return guarded([&] {
    need(p, "p");
    need(out, "out");
    *out = new mlk_polynomial{-p->p};
  });
}

void mlk_poly_free(mlk_polynomial* p) { delete p; }

mlk_status mlk_poly_to_json(const mlk_polynomial* p, char** out) {
  return guarded([&] {
    need(p, "p");
    need(out, "out");
    *out = dup(mlk::to_json(p->p).dump());
  });
}

mlk_status mlk_poly_info(const mlk_polynomial* p, int* n, int* k, size_t* dim) {
  return guarded([&] {
    need(p, "p");
    if (n) *n = p->p.n();
    if (k) *k = p->p.space()->k();
    if (dim) *dim = p->p.space()->dim();
  });
}

mlk_status mlk_poly_eval(const mlk_polynomial* p, const double* x, double* value, double* grad) {
  return guarded([&] {
    need(p, "p");
    need(x, "x");
    need(value, "value");
    const Eigen::VectorXd xv = vec(x, p->p.n());
    if (!grad) {
      *value = p->p.eval(xv);
      return;
    }
    Eigen::VectorXd g;
    *value = p->p.eval_with_gradient(xv, g);
    for (Eigen::Index i = 0; i < g.size(); ++i) grad[i] = g[i];
  });
}

mlk_status mlk_directional_area(const mlk_polynomial* p, const double* lo, const double* hi, const double* e,
                                double h, double* out) {
  return guarded([&] {
    const mlk::Box b = box(p, lo, hi);
    need(e, "e");
    need(out, "out");
    *out = mlk::directional_area(p->p, mlk::Region::of(b), vec(e, p->p.n()), h);
  });
}

mlk_status mlk_hausdorff_area(const mlk_polynomial* p, const double* lo, const double* hi, double h, double* out) {
  return guarded([&] {
    const mlk::Box b = box(p, lo, hi);
    need(out, "out");
    *out = mlk::hausdorff_area(p->p, mlk::Region::of(b), h);
  });
}

mlk_status mlk_visibility(const mlk_polynomial* p, const double* lo, const double* hi, double mollifier_eps,
                          int mollifier_m, double h, int samples, uint64_t seed, double* out) {
  return guarded([&] {
    const mlk::Box b = box(p, lo, hi);
    need(out, "out");
    std::optional<mlk::MollifierConfig> cfg;
    if (mollifier_eps > 0.0) cfg = mlk::MollifierConfig{mollifier_eps, mollifier_m, seed};
    *out = mlk::visibility(p->p, mlk::Region::of(b), cfg, h, samples, seed);
  });
}

mlk_status mlk_signed_gap(const mlk_polynomial* p, const double* lo, const double* hi, size_t nodes, double* out) {
  return guarded([&] {
    const mlk::Box b = box(p, lo, hi);
    need(out, "out");
    *out = mlk::signed_volume_gap(p->p, mlk::Cell{b}, nodes);
  });
}

mlk_status mlk_theorem_ratio(const char* tubes_json, double grid_h, double* lhs, double* rhs, double* ratio) {
  return guarded([&] {
    need(tubes_json, "tubes_json");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(tubes_json);
    } catch (const nlohmann::json::exception& e) {
      mlk::fail(mlk::ErrorKind::InvalidArgument, e.what());
    }
    const mlk::RatioReport r = mlk::theorem_ratio(mlk::instance_from_file(mlk::tubes_from_json(j)), grid_h);
    if (lhs) *lhs = r.lhs;
    if (rhs) *rhs = r.rhs;
    if (ratio) *ratio = r.ratio;
  });
}

int mlk_run(const char* command, const char* config_text, const char* config_dir, const char* out_dir, int jobs,
            char** message) {
  mlk::RunOutcome r;
  try {
    mlk::RunRequest req;
    req.command = command ? command : "";
    req.config_text = config_text ? config_text : "";
    req.config_dir = config_dir ? config_dir : "";
    req.out_dir = mlk::output_dir(out_dir ? out_dir : "");
    req.jobs = jobs;
    r = mlk::run_command(req);
  } catch (const std::exception& e) {
    r.status = mlk::ExitStatus::Usage;
    r.message = e.what();
  }
  if (message) *message = dup(r.message);
  return static_cast<int>(r.status);
}

const char* mlk_command_name(size_t index) {
  const auto& names = mlk::command_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

}  // extern "C"
