#include "resmin/adaptivity.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace resmin {

std::set<int> dorfler_mark(const Eigen::VectorXd& eta_K, double theta)
{
    if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("dorfler_mark: theta must lie in (0, 1]");
    if ((eta_K.array() < 0.0).any() || !eta_K.allFinite())
        throw std::invalid_argument("dorfler_mark: indicators must be finite and nonnegative");
    const double total = eta_K.squaredNorm();
    std::set<int> marked;
    if (total == 0.0) return marked;
    std::vector<int> order(eta_K.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eta_K(a) > eta_K(b); });
    double sum = 0.0;
    for (int k : order) {
        marked.insert(k);
        sum += eta_K(k) * eta_K(k);
        if (sum >= theta * total) break;
    }
    return marked;
}

AdaptiveRun run_adaptive(const ProblemSpec& problem, int p, const AdaptiveOptions& options)
{
    if (options.iterations < 1) throw std::invalid_argument("run_adaptive: iterations must be >= 1");
    if (!options.uniform && !(options.theta > 0.0 && options.theta < 1.0))
        throw std::invalid_argument("run_adaptive: theta must lie in (0, 1)");

    AdaptiveRun run;
    run.degree = p;
    run.theta = options.theta;
    run.uniform = options.uniform;
    TriMesh mesh = options.initial_mesh ? *options.initial_mesh : build_initial_mesh(problem.domain, problem.initial_elements);

    for (int it = 0; it < options.iterations; ++it) {
        IterationRecord rec;
        rec.iter = it;
        rec.nel = mesh.num_triangles();
        EstimatorReport rep;
        try {
            const BdmSpace space(mesh, p);
            const MixedSolution sol = solve_mixed(space, problem);
            const PostprocResult post = postprocess_resmin(space, sol, problem.exact.has_value());
            rep = estimate(space, sol, post, problem);
            rec.flux_dofs = space.num_dofs();
            rec.scalar_dofs = static_cast<int>(sol.u.size());
            rec.solver_residual = sol.relative_residual;
        } catch (const std::exception& ex) {
            run.error = "iteration " + std::to_string(it) + ": " + ex.what();
            break;
        }
        rec.eta = rep.eta;
        rec.eta_tilde = rep.eta_tilde;
        rec.h_max = 0.0;
        rec.h_min = 1e300;
        for (int k = 0; k < mesh.num_triangles(); ++k) {
            rec.h_max = std::max(rec.h_max, mesh.h(k));
            rec.h_min = std::min(rec.h_min, mesh.h(k));
        }
        if (rep.has_errors) {
            const ErrorBlock& e = rep.errors;
            rec.has_errors = true;
            rec.err_full = e.full;
            rec.err_u_nu_1h = e.u_nu_1h;
            rec.err_grad_u_nu = e.grad_u_nu_total;
            rec.err_q_0h = e.q_0h;
            rec.err_q_star_h = e.q_star_h;
            rec.err_l2_u = e.l2_u_uh;
            rec.err_l2_nu = e.l2_u_nu;
            rec.osc = e.osc;
            rec.delta = e.delta;
            rec.delta_undefined = e.delta_undefined;
            rec.effectivity = e.effectivity;
        }

        const bool last = it + 1 == options.iterations;
        const bool done = rep.eta <= options.target_eta;
        std::set<int> marked;
        if (!last && !done && !options.uniform)
            marked = dorfler_mark(options.mark_with_eta_tilde ? rep.eta_tilde_K : rep.eta_K, options.theta);
        rec.marked.assign(marked.begin(), marked.end());
        for (int k : rec.marked) rec.marked_centroids.push_back(mesh.centroid(k));
        if (options.on_iteration) options.on_iteration(rec, mesh, rep);
        run.records.push_back(std::move(rec));

        if (done) {
            run.converged = true;
            break;
        }
        if (last) break;
        mesh = options.uniform ? refine_uniform(refine_uniform(mesh)) : refine(mesh, marked);
    }
    run.final_mesh = mesh;
    return run;
}

} // namespace resmin
