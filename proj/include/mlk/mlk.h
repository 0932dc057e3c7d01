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

/* C interface to the mlkakeya library. All functions return an mlk_status;
 * on failure mlk_last_error() describes the most recent error on the calling
 * thread. Objects are opaque and owned by the caller once created. */

#ifndef MLK_MLK_H
#define MLK_MLK_H

#include <stddef.h>
#include <stdint.h>

#if defined(MLK_BUILDING_LIBRARY)
#define MLK_API __attribute__((visibility("default")))
#else
#define MLK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mlk_status {
  MLK_OK = 0,
  MLK_E_INVALID_ARGUMENT = 1,
  MLK_E_DEGENERATE = 2,
  MLK_E_NOT_CONVERGED = 3,
  MLK_E_CERTIFICATION = 4,
  MLK_E_IO = 5,
  MLK_E_INTERNAL = 6
} mlk_status;

/* Exit codes of mlk_run, identical to the command-line tool. */
enum {
  MLK_EXIT_PASS = 0,
  MLK_EXIT_USAGE = 1,
  MLK_EXIT_FAIL = 2,
  MLK_EXIT_NOT_CONVERGED = 3
};

typedef struct mlk_polynomial mlk_polynomial;

MLK_API const char* mlk_version(void);
MLK_API const char* mlk_last_error(void);
MLK_API const char* mlk_status_name(mlk_status s);

/* Strings returned through char** are allocated by the library. */
MLK_API void mlk_string_free(char* s);

MLK_API mlk_status mlk_poly_from_json(const char* json, mlk_polynomial** out);
MLK_API mlk_status mlk_poly_random(int n, int k, uint64_t seed, mlk_polynomial** out);
MLK_API mlk_status mlk_poly_negate(const mlk_polynomial* p, mlk_polynomial** out);
MLK_API void mlk_poly_free(mlk_polynomial* p);
MLK_API mlk_status mlk_poly_to_json(const mlk_polynomial* p, char** out);
MLK_API mlk_status mlk_poly_info(const mlk_polynomial* p, int* n, int* k, size_t* dim);
/* grad may be NULL; otherwise it receives n values. */
MLK_API mlk_status mlk_poly_eval(const mlk_polynomial* p, const double* x, double* value, double* grad);

/* Boxes are given by n lower and n upper corner coordinates. */
MLK_API mlk_status mlk_directional_area(const mlk_polynomial* p, const double* lo, const double* hi,
                                        const double* e, double h, double* out);
MLK_API mlk_status mlk_hausdorff_area(const mlk_polynomial* p, const double* lo, const double* hi, double h,
                                      double* out);
/* mollifier_eps = 0 disables mollification. */
MLK_API mlk_status mlk_visibility(const mlk_polynomial* p, const double* lo, const double* hi,
                                  double mollifier_eps, int mollifier_m, double h, int samples, uint64_t seed,
                                  double* out);
MLK_API mlk_status mlk_signed_gap(const mlk_polynomial* p, const double* lo, const double* hi, size_t nodes,
                                  double* out);

/* tubes_json uses the tube-family file format. */
MLK_API mlk_status mlk_theorem_ratio(const char* tubes_json, double grid_h, double* lhs, double* rhs,
                                     double* ratio);

/* Runs a command exactly like the CLI. Returns an MLK_EXIT_* code; message,
 * when non-NULL, receives a one-line description to release with
 * mlk_string_free. config_dir resolves relative input paths and may be NULL. */
MLK_API int mlk_run(const char* command, const char* config_text, const char* config_dir, const char* out_dir,
                    int jobs, char** message);
MLK_API const char* mlk_command_name(size_t index); /* NULL past the end */

#ifdef __cplusplus
}
#endif

#endif /* MLK_MLK_H */
