#include "resmin/resmin.h"

#include "resmin/estimators.hpp"
#include "resmin/experiments.hpp"
#include "resmin/problems.hpp"
#include "resmin/verify.hpp"

#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <stdexcept>
#include <string>

struct resmin_config {
    resmin::ExperimentConfig value;
};
struct resmin_run {
    resmin::ExperimentResult value;
};
struct resmin_report {
    resmin::VerifyReport value;
};
struct resmin_problem {
    resmin::ProblemSpec value;
};
struct resmin_mesh {
    resmin::TriMesh value;
};
struct resmin_solution {
    std::unique_ptr<resmin::TriMesh> mesh;
    std::unique_ptr<resmin::BdmSpace> space;
    resmin::MixedSolution sol;
    resmin::PostprocResult post;
    resmin::EstimatorReport report;
};

namespace {

thread_local std::string g_last_error;

resmin_status fail(resmin_status s, const std::string& msg) {
    g_last_error = msg;
    return s;
}

// Maps exceptions from the core onto status codes.
template <class F>
resmin_status guarded(F&& f) {
    try {
        g_last_error.clear();
        return f();
    } catch (const std::invalid_argument& e) {
        return fail(RESMIN_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::out_of_range& e) {
        return fail(RESMIN_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(RESMIN_ERR_IO, e.what());
    } catch (const std::bad_alloc&) {
        return fail(RESMIN_ERR_INTERNAL, "out of memory");
    } catch (const std::runtime_error& e) {
        return fail(RESMIN_ERR_NUMERICAL, e.what());
    } catch (const std::exception& e) {
        return fail(RESMIN_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(RESMIN_ERR_INTERNAL, "unknown error");
    }
}

resmin_status copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
    const size_t n = s.size() + 1;
    if (needed) *needed = n;
    if (!buf) {
        if (cap == 0) return RESMIN_OK;
        return fail(RESMIN_ERR_NULL_ARGUMENT, "buffer is NULL but capacity is nonzero");
    }
    if (cap < n) return fail(RESMIN_ERR_BUFFER_TOO_SMALL, "buffer too small: need " + std::to_string(n) + " bytes");
    std::memcpy(buf, s.c_str(), n);
    return RESMIN_OK;
}

#define RESMIN_REQUIRE(ptr)                                                                                           \
    do {                                                                                                              \
        if (!(ptr)) return fail(RESMIN_ERR_NULL_ARGUMENT, std::string(#ptr) + " is NULL");                           \
    } while (0)

} // namespace

extern "C" {

const char* resmin_version(void) { return "0.1.0"; }

const char* resmin_status_string(resmin_status status) {
    switch (status) {
    case RESMIN_OK: return "ok";
    case RESMIN_ERR_NULL_ARGUMENT: return "null argument";
    case RESMIN_ERR_INVALID_ARGUMENT: return "invalid argument";
    case RESMIN_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case RESMIN_ERR_NUMERICAL: return "numerical failure";
    case RESMIN_ERR_IO: return "i/o failure";
    case RESMIN_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

resmin_status resmin_last_error(char* buf, size_t cap, size_t* needed) {
    // Copy first: copy_out may overwrite the message on failure.
    const std::string msg = g_last_error;
    return copy_out(msg, buf, cap, needed);
}

resmin_status resmin_config_create(resmin_config** out) {
    RESMIN_REQUIRE(out);
    return guarded([&] {
        *out = new resmin_config{};
        return RESMIN_OK;
    });
}

resmin_status resmin_config_from_json(const char* json_text, resmin_config** out) {
    RESMIN_REQUIRE(json_text);
    RESMIN_REQUIRE(out);
    return guarded([&] {
        auto c = std::make_unique<resmin_config>();
        c->value = resmin::config_from_json(json_text);
        *out = c.release();
        return RESMIN_OK;
    });
}

resmin_status resmin_config_set(resmin_config* config, const char* key, const char* value) {
    RESMIN_REQUIRE(config);
    RESMIN_REQUIRE(key);
    RESMIN_REQUIRE(value);
    return guarded([&] {
        resmin::ExperimentConfig next = config->value;
        resmin::apply_override(next, key, value);
        next.validate();
        config->value = std::move(next);
        return RESMIN_OK;
    });
}

resmin_status resmin_config_to_json(const resmin_config* config, char* buf, size_t cap, size_t* needed) {
    RESMIN_REQUIRE(config);
    return guarded([&] { return copy_out(resmin::config_to_json(config->value), buf, cap, needed); });
}

void resmin_config_destroy(resmin_config* config) { delete config; }

resmin_status resmin_run_experiment(const resmin_config* config, int write_files, resmin_run** out) {
    RESMIN_REQUIRE(config);
    RESMIN_REQUIRE(out);
    return guarded([&] {
        auto r = std::make_unique<resmin_run>();
        r->value = resmin::run_experiment(config->value, write_files != 0);
        *out = r.release();
        return RESMIN_OK;
    });
}

resmin_status resmin_run_summary_json(const resmin_run* run, char* buf, size_t cap, size_t* needed) {
    RESMIN_REQUIRE(run);
    return guarded([&] { return copy_out(run->value.summary_json, buf, cap, needed); });
}

resmin_status resmin_run_io_error_count(const resmin_run* run, size_t* count) {
    RESMIN_REQUIRE(run);
    RESMIN_REQUIRE(count);
    *count = run->value.io_errors.size();
    return RESMIN_OK;
}

resmin_status resmin_run_io_error(const resmin_run* run, size_t index, char* buf, size_t cap, size_t* needed) {
    RESMIN_REQUIRE(run);
    if (index >= run->value.io_errors.size()) return fail(RESMIN_ERR_INVALID_ARGUMENT, "i/o error index out of range");
    return guarded([&] { return copy_out(run->value.io_errors[index], buf, cap, needed); });
}

void resmin_run_destroy(resmin_run* run) { delete run; }

resmin_status resmin_verify(uint64_t seed, resmin_report** out) {
    RESMIN_REQUIRE(out);
    return guarded([&] {
        auto r = std::make_unique<resmin_report>();
        r->value = resmin::run_verify(seed);
        *out = r.release();
        return RESMIN_OK;
    });
}

resmin_status resmin_fortin_report(uint64_t seed, int triangles, resmin_report** out) {
    RESMIN_REQUIRE(out);
    if (triangles < 1) return fail(RESMIN_ERR_INVALID_ARGUMENT, "triangles must be >= 1");
    return guarded([&] {
        auto r = std::make_unique<resmin_report>();
        r->value = resmin::fortin_report(seed, triangles);
        *out = r.release();
        return RESMIN_OK;
    });
}

resmin_status resmin_report_passed(const resmin_report* report, int* passed) {
    RESMIN_REQUIRE(report);
    RESMIN_REQUIRE(passed);
    *passed = report->value.all_passed ? 1 : 0;
    return RESMIN_OK;
}

resmin_status resmin_report_json(const resmin_report* report, char* buf, size_t cap, size_t* needed) {
    RESMIN_REQUIRE(report);
    return guarded([&] { return copy_out(report->value.json, buf, cap, needed); });
}

void resmin_report_destroy(resmin_report* report) { delete report; }

resmin_status resmin_problem_preset(const char* name, resmin_problem** out) {
    RESMIN_REQUIRE(name);
    RESMIN_REQUIRE(out);
    return guarded([&] {
        auto p = std::make_unique<resmin_problem>();
        p->value = resmin::preset(name);
        *out = p.release();
        return RESMIN_OK;
    });
}

void resmin_problem_destroy(resmin_problem* problem) { delete problem; }

resmin_status resmin_mesh_initial(const resmin_problem* problem, int target_elements, resmin_mesh** out) {
    RESMIN_REQUIRE(problem);
    RESMIN_REQUIRE(out);
    if (target_elements < 1) return fail(RESMIN_ERR_INVALID_ARGUMENT, "target_elements must be >= 1");
    return guarded([&] {
        auto m = std::make_unique<resmin_mesh>();
        m->value = resmin::build_initial_mesh(problem->value.domain, target_elements);
        *out = m.release();
        return RESMIN_OK;
    });
}

resmin_status resmin_mesh_refine_uniform(const resmin_mesh* mesh, resmin_mesh** out) {
    RESMIN_REQUIRE(mesh);
    RESMIN_REQUIRE(out);
    return guarded([&] {
        auto m = std::make_unique<resmin_mesh>();
        m->value = resmin::refine_uniform(mesh->value);
        *out = m.release();
        return RESMIN_OK;
    });
}

resmin_status resmin_mesh_num_triangles(const resmin_mesh* mesh, int* count) {
    RESMIN_REQUIRE(mesh);
    RESMIN_REQUIRE(count);
    *count = mesh->value.num_triangles();
    return RESMIN_OK;
}

void resmin_mesh_destroy(resmin_mesh* mesh) { delete mesh; }

resmin_status resmin_solve(const resmin_mesh* mesh, const resmin_problem* problem, int p, resmin_solution** out) {
    RESMIN_REQUIRE(mesh);
    RESMIN_REQUIRE(problem);
    RESMIN_REQUIRE(out);
    if (p < 1 || p > 3) return fail(RESMIN_ERR_INVALID_ARGUMENT, "p must be 1, 2 or 3");
    return guarded([&] {
        auto s = std::make_unique<resmin_solution>();
        s->mesh = std::make_unique<resmin::TriMesh>(mesh->value);
        s->space = std::make_unique<resmin::BdmSpace>(*s->mesh, p);
        s->sol = resmin::solve_mixed(*s->space, problem->value);
        s->post = resmin::postprocess_resmin(*s->space, s->sol);
        s->report = resmin::estimate(*s->space, s->sol, s->post, problem->value);
        *out = s.release();
        return RESMIN_OK;
    });
}

resmin_status resmin_solution_estimators(const resmin_solution* solution, double* eta, double* eta_tilde) {
    RESMIN_REQUIRE(solution);
    if (eta) *eta = solution->report.eta;
    if (eta_tilde) *eta_tilde = solution->report.eta_tilde;
    return RESMIN_OK;
}

resmin_status resmin_solution_errors(const resmin_solution* solution, double* l2_u_uh, double* l2_u_nu,
                                     double* full_error) {
    RESMIN_REQUIRE(solution);
    if (!solution->report.has_errors) return fail(RESMIN_ERR_INVALID_ARGUMENT, "problem has no exact solution");
    const auto& e = solution->report.errors;
    if (l2_u_uh) *l2_u_uh = e.l2_u_uh;
    if (l2_u_nu) *l2_u_nu = e.l2_u_nu;
    if (full_error) *full_error = e.full;
    return RESMIN_OK;
}

void resmin_solution_destroy(resmin_solution* solution) { delete solution; }

} // extern "C"
