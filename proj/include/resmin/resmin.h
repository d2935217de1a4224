#ifndef RESMIN_RESMIN_H
#define RESMIN_RESMIN_H

/*
 * C interface to the residual-minimisation mixed finite element library.
 *
 * Every function returns a resmin_status. On failure a thread-local message
 * is available through resmin_last_error(). Objects are opaque handles that
 * must be released with the matching *_destroy function; destroying NULL is
 * a no-op.
 *
 * String outputs use (buf, cap, needed): `needed` receives the size
 * including the terminating NUL. Passing buf = NULL and cap = 0 queries the
 * size and returns RESMIN_OK; a non-NULL buffer that is too small returns
 * RESMIN_ERR_BUFFER_TOO_SMALL and leaves buf untouched.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RESMIN_API __declspec(dllexport)
#else
#define RESMIN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum resmin_status {
    RESMIN_OK = 0,
    RESMIN_ERR_NULL_ARGUMENT = 1,
    RESMIN_ERR_INVALID_ARGUMENT = 2,
    RESMIN_ERR_BUFFER_TOO_SMALL = 3,
    RESMIN_ERR_NUMERICAL = 4,
    RESMIN_ERR_IO = 5,
    RESMIN_ERR_INTERNAL = 6
} resmin_status;

typedef struct resmin_config resmin_config;
typedef struct resmin_run resmin_run;
typedef struct resmin_report resmin_report;
typedef struct resmin_problem resmin_problem;
typedef struct resmin_mesh resmin_mesh;
typedef struct resmin_solution resmin_solution;

RESMIN_API const char* resmin_version(void);
RESMIN_API const char* resmin_status_string(resmin_status status);
/* Message of the last failed call on this thread ("" if none). */
RESMIN_API resmin_status resmin_last_error(char* buf, size_t cap, size_t* needed);

/* Experiment configuration. Keys: experiment, p, mode, theta, iters, out,
 * seed, mark, dump. */
RESMIN_API resmin_status resmin_config_create(resmin_config** out);
RESMIN_API resmin_status resmin_config_from_json(const char* json_text, resmin_config** out);
RESMIN_API resmin_status resmin_config_set(resmin_config* config, const char* key, const char* value);
RESMIN_API resmin_status resmin_config_to_json(const resmin_config* config, char* buf, size_t cap, size_t* needed);
RESMIN_API void resmin_config_destroy(resmin_config* config);

/* Runs every configured degree. With write_files = 0 nothing is written. */
RESMIN_API resmin_status resmin_run_experiment(const resmin_config* config, int write_files, resmin_run** out);
RESMIN_API resmin_status resmin_run_summary_json(const resmin_run* run, char* buf, size_t cap, size_t* needed);
/* Number of artifacts that failed to write; each message via index. */
RESMIN_API resmin_status resmin_run_io_error_count(const resmin_run* run, size_t* count);
RESMIN_API resmin_status resmin_run_io_error(const resmin_run* run, size_t index, char* buf, size_t cap,
                                             size_t* needed);
RESMIN_API void resmin_run_destroy(resmin_run* run);

/* Property suite and boundary-system report. */
RESMIN_API resmin_status resmin_verify(uint64_t seed, resmin_report** out);
RESMIN_API resmin_status resmin_fortin_report(uint64_t seed, int triangles, resmin_report** out);
RESMIN_API resmin_status resmin_report_passed(const resmin_report* report, int* passed);
RESMIN_API resmin_status resmin_report_json(const resmin_report* report, char* buf, size_t cap, size_t* needed);
RESMIN_API void resmin_report_destroy(resmin_report* report);

/* Single solves on a chosen mesh. Presets: smooth, lshape, advdiff, linear. */
RESMIN_API resmin_status resmin_problem_preset(const char* name, resmin_problem** out);
RESMIN_API void resmin_problem_destroy(resmin_problem* problem);

RESMIN_API resmin_status resmin_mesh_initial(const resmin_problem* problem, int target_elements, resmin_mesh** out);
RESMIN_API resmin_status resmin_mesh_refine_uniform(const resmin_mesh* mesh, resmin_mesh** out);
RESMIN_API resmin_status resmin_mesh_num_triangles(const resmin_mesh* mesh, int* count);
RESMIN_API void resmin_mesh_destroy(resmin_mesh* mesh);

/* Mixed solve, postprocessing and estimators for degree p in {1,2,3}. The
 * solution keeps its own copy of the mesh. */
RESMIN_API resmin_status resmin_solve(const resmin_mesh* mesh, const resmin_problem* problem, int p,
                                      resmin_solution** out);
RESMIN_API resmin_status resmin_solution_estimators(const resmin_solution* solution, double* eta,
                                                    double* eta_tilde);
/* Error norms; RESMIN_ERR_INVALID_ARGUMENT if the problem has no exact
 * solution. Any output pointer may be NULL. */
RESMIN_API resmin_status resmin_solution_errors(const resmin_solution* solution, double* l2_u_uh, double* l2_u_nu,
                                                double* full_error);
RESMIN_API void resmin_solution_destroy(resmin_solution* solution);

#ifdef __cplusplus
}
#endif

#endif
