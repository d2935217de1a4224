#pragma once

#include "resmin/estimators.hpp"

#include <functional>
#include <set>

namespace resmin {

/// Minimal set M, chosen greedily by descending eta_K (ties: smaller id
/// first), with sum_{M} eta_K^2 >= theta * sum eta_K^2. Empty when all
/// indicators vanish. Throws std::invalid_argument for theta outside (0, 1]
/// or negative indicators.
std::set<int> dorfler_mark(const Eigen::VectorXd& eta_K, double theta);

/// Scalars recorded per loop iteration.
struct IterationRecord {
    int iter = 0;
    int nel = 0;
    int flux_dofs = 0;
    int scalar_dofs = 0;
    double eta = 0.0;
    double eta_tilde = 0.0;
    bool has_errors = false;
    double err_full = 0.0;
    double err_u_nu_1h = 0.0;
    double err_grad_u_nu = 0.0;
    double err_q_0h = 0.0;
    double err_q_star_h = 0.0;
    double err_l2_u = 0.0;  // ||u - u_h||
    double err_l2_nu = 0.0; // ||u - nu_h||
    double osc = 0.0;
    double delta = 0.0;
    bool delta_undefined = false;
    double effectivity = 0.0;
    double solver_residual = 0.0;
    double h_max = 0.0;
    double h_min = 0.0;
    std::vector<int> marked;
    std::vector<Vec2> marked_centroids;
};

struct AdaptiveOptions {
    double theta = 0.5;
    int iterations = 10;
    /// Stop once eta drops to this value or below.
    double target_eta = 0.0;
    /// Mark with eta_tilde instead of eta.
    bool mark_with_eta_tilde = false;
    /// Refine every element twice per iteration instead of marking.
    bool uniform = false;
    /// Start from this mesh instead of the preset initial mesh.
    std::optional<TriMesh> initial_mesh;
    /// Called after the estimate of every iteration.
    std::function<void(const IterationRecord&, const TriMesh&, const EstimatorReport&)> on_iteration;
};

struct AdaptiveRun {
    int degree = 0;
    double theta = 0.0;
    bool uniform = false;
    std::vector<IterationRecord> records;
    TriMesh final_mesh;
    bool converged = false; // target or zero estimator reached
    std::string error;      // non-empty if the loop aborted
};

/// solve -> postprocess -> estimate -> mark -> refine, `iterations` times
/// (the last iteration is estimated but not refined).
AdaptiveRun run_adaptive(const ProblemSpec& problem, int p, const AdaptiveOptions& options);

} // namespace resmin
