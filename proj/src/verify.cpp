#include "resmin/verify.hpp"

#include "resmin/estimators.hpp"
#include "resmin/fortin.hpp"
#include "resmin/problems.hpp"

#include "json.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

namespace resmin {

namespace {

using json = nlohmann::json;

// L2 norm on K of the difference of two full-basis expansions (orthonormal
// on the reference triangle, so the norm is |det|^{1/2} times the
// Euclidean norm of the padded coefficient difference).
double l2_difference(const AffineMap& map, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::Index n = std::max(a.size(), b.size());
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    d.head(a.size()) += a;
    d.head(b.size()) -= b;
    return std::sqrt(std::abs(map.det)) * d.norm();
}

struct Pipeline {
    TriMesh mesh;
    BdmSpace space;
    MixedSolution sol;
    PostprocResult post;
    EstimatorReport rep;
    Pipeline(TriMesh m, int p, const ProblemSpec& prob) : mesh(std::move(m)), space(mesh, p) {
        sol = solve_mixed(space, prob);
        post = postprocess_resmin(space, sol);
        rep = estimate(space, sol, post, prob);
    }
};

TriMesh small_mesh(const ProblemSpec& prob, int uniform_pairs) {
    TriMesh m = build_initial_mesh(prob.domain, prob.initial_elements);
    for (int i = 0; i < uniform_pairs; ++i) m = refine_uniform(refine_uniform(m));
    return m;
}

VerifyCheck make_check(std::string name, double value, double tol, std::string detail = {}) {
    VerifyCheck c;
    c.name = std::move(name);
    c.value = value;
    c.tolerance = tol;
    c.passed = std::isfinite(value) && value <= tol;
    c.detail = std::move(detail);
    return c;
}

void finish(VerifyReport& r, json extra = json::object()) {
    r.all_passed = true;
    json checks = json::array();
    for (const auto& c : r.checks) {
        r.all_passed = r.all_passed && c.passed;
        checks.push_back({{"name", c.name},
                          {"passed", c.passed},
                          {"value", std::isfinite(c.value) ? json(c.value) : json(nullptr)},
                          {"tolerance", c.tolerance},
                          {"detail", c.detail}});
    }
    extra["checks"] = checks;
    extra["all_passed"] = r.all_passed;
    r.json = extra.dump(2);
}

void exactness_checks(VerifyReport& r) {
    const ProblemSpec lin = linear_problem();
    for (int p = 1; p <= 3; ++p) {
        const Pipeline run(small_mesh(lin, 1), p, lin);
        double flux = 0.0, mean = 0.0, eps = 0.0;
        const int nu = scalar_dim(p - 1);
        const QuadRule rule = quad_rule(4, QuadRule::Variant::Triangle);
        for (int k = 0; k < run.mesh.num_triangles(); ++k) {
            for (const Vec2& qh : run.space.eval_flux(run.sol.q, k, rule.points))
                flux = std::max(flux, (qh - Vec2(-1.0, 0.0)).norm());
            if (p == 1) {
                const Eigen::VectorXd proj =
                    project_L2([](const Vec2& x) { return x.x(); }, run.mesh.map(k), 0, rule);
                mean = std::max(mean, std::abs(proj[0] - run.sol.u[k * nu]));
            }
            eps = std::max(eps, run.post.eps[k].cwiseAbs().maxCoeff());
        }
        const std::string tag = "p=" + std::to_string(p);
        r.checks.push_back(make_check("exactness: q_h = (-1,0), " + tag, flux, 1e-10));
        if (p == 1) r.checks.push_back(make_check("exactness: u_h = elementwise mean of x", mean, 1e-10));
        r.checks.push_back(make_check("exactness: ||x - nu_h||, " + tag, run.rep.errors.l2_u_nu, 1e-10));
        r.checks.push_back(make_check("exactness: eps_h coefficients, " + tag, eps, 1e-10));
        r.checks.push_back(make_check("exactness: eta, " + tag, run.rep.eta, 1e-10));
    }
}

void pipeline_checks(VerifyReport& r) {
    for (const std::string id : {"smooth", "lshape", "advdiff"}) {
        const ProblemSpec prob = preset(id);
        const TriMesh mesh = small_mesh(prob, id == "smooth" ? 2 : 0);
        for (int p = 1; p <= 3; ++p) {
            const Pipeline run(mesh, p, prob);
            const auto st = stenberg_oracle(run.space, run.sol);
            const ZeroMeanStiffness stiff(p + 2);
            double st_norm2 = 0.0, worst_eq = 0.0, worst_id = 0.0;
            for (int k = 0; k < mesh.num_triangles(); ++k) {
                const AffineMap F = mesh.map(k);
                st_norm2 += std::pow(l2_difference(F, st[k], Eigen::VectorXd::Zero(1)), 2);
                worst_eq = std::max(worst_eq, l2_difference(F, run.post.nu[k], st[k]));

                Eigen::VectorXd d = run.post.theta[k];
                d.head(run.post.nu[k].size()) -= run.post.nu[k];
                const Eigen::VectorXd z = d.tail(d.size() - 1);
                const double g = std::sqrt(std::max(0.0, z.dot(stiff.matrix(F) * z)));
                const double et = run.post.eta_tilde(k);
                const double err = std::abs(g - et);
                worst_id = std::max(worst_id, err / std::max(1e-10 * et, 1e-12));
            }
            const std::string tag = id + ", p=" + std::to_string(p);
            r.checks.push_back(make_check("equivalence with classical postprocessing, " + tag,
                                          worst_eq / std::sqrt(st_norm2), 1e-10,
                                          "max_K ||nu_h - u~_h||_K / ||u~_h||"));
            r.checks.push_back(make_check("||grad(theta_h - nu_h)||_K = eta~_K, " + tag, worst_id, 1.0,
                                          "error / max(1e-10 eta~_K, 1e-12)"));
            if (id == "smooth") {
                const ErrorBlock& e = run.rep.errors;
                double worst = -1e300, worst_imp = -1e300;
                for (int k = 0; k < mesh.num_triangles(); ++k) {
                    worst = std::max(worst, run.rep.eta_tilde_K(k) - e.grad_u_nu(k) - e.q_star_K(k));
                    worst_imp = std::max(worst_imp, run.rep.eta_K(k) - e.seminorm_1Kh(k) - e.q_K(k));
                }
                const double slack = 1e-8 * run.rep.eta;
                r.checks.push_back(make_check("local efficiency of eta~, " + tag, worst, slack,
                                              "max_K eta~_K - ||grad(u-nu_h)||_K - ||q-q_h||_*K"));
                r.checks.push_back(make_check("local efficiency of eta, " + tag, worst_imp, slack,
                                              "max_K eta_K - |u-nu_h|_1Kh - ||q-q_h||_K"));
            }
        }
    }
}

void dual_norm_checks(VerifyReport& r, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const QuadRule rule = quad_rule(20, QuadRule::Variant::Triangle);
    for (int p = 1; p <= 3; ++p) {
        double worst = 0.0;
        for (int t = 0; t < 50; ++t) {
            const AffineMap F = random_shape_regular_triangle(rng);
            const int d = p + 3;
            std::vector<Vec2> c(scalar_dim(d));
            for (auto& v : c) v = Vec2(U(rng), U(rng));
            const VectorField field = [d, c](const Vec2& x) {
                Vec2 v = Vec2::Zero();
                int i = 0;
                for (int a = 0; a <= d; ++a)
                    for (int j = 0; j <= a; ++j, ++i) v += c[i] * std::pow(x.x(), a - j) * std::pow(x.y(), j);
                return v;
            };
            const ScalarBasis b = make_zero_mean_basis(p + 2);
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(b.size(), b.size());
            Eigen::VectorXd load = Eigen::VectorXd::Zero(b.size());
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const Eigen::MatrixXd g = b.gradients(rule.points[q], F);
                const double w = rule.weights[q] * std::abs(F.det);
                A += w * g * g.transpose();
                load += w * g * field(F.to_physical(rule.points[q]));
            }
            Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(load * load.transpose(), A);
            const double oracle = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
            const double value = dual_norm_star(F, field, p, rule);
            worst = std::max(worst, std::abs(value - oracle) / oracle);
        }
        r.checks.push_back(make_check("dual norm vs generalized eigenvalue oracle, p=" + std::to_string(p), worst,
                                      1e-10, "50 random (element, field) pairs, relative"));
    }
}

json fortin_checks(VerifyReport& r, std::mt19937_64& rng, int triangles) {
    const BiorthogonalSet set = build_biorthogonal(1);
    r.checks.push_back(make_check("matrix A invertible", std::abs(set.det_A) > 0 ? 1.0 / std::abs(set.det_A) : INFINITY,
                                  1e12, "1/|det A|"));
    r.checks.push_back(make_check("reference biorthogonality",
                                  (set.reference_pairing - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(),
                                  1e-12));
    r.checks.push_back(make_check("zero mean of psi", set.max_mean, 1e-12));
    r.checks.push_back(make_check("psi vanishes on the other faces", set.max_off_face, 1e-12));

    double pairing = 0.0, moments = 0.0, c_lo = INFINITY, c_hi = 0.0, psi = 0.0;
    std::normal_distribution<double> N;
    for (int t = 0; t < triangles; ++t) {
        const AffineMap map = random_shape_regular_triangle(rng);
        const double xi = xi_scale(map);
        pairing = std::max(pairing, (physical_pairing(set, map) / xi - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff());
        const double c = fortin_operator_norm(set, map);
        c_lo = std::min(c_lo, c);
        c_hi = std::max(c_hi, c);
        psi = std::max(psi, psi_norm_ratio(set, map));
        std::array<double, 15> a;
        for (auto& x : a) x = N(rng);
        const BoundaryField v = [a](int f, double s) {
            return a[5 * f] + s * (a[5 * f + 1] + s * (a[5 * f + 2] + s * (a[5 * f + 3] + s * a[5 * f + 4])));
        };
        const auto mv = trace_moments(v, map, 12);
        const auto mp = trace_moments(polynomial_trace(fortin_apply(v, set, map).coeffs), map, 12);
        moments = std::max(moments, (mv - mp).norm() / std::max(1.0, mv.norm()));
    }
    const std::string n = std::to_string(triangles) + " random triangles";
    r.checks.push_back(make_check("physical biorthogonality = xi_K delta_ij", pairing, 1e-11, n));
    r.checks.push_back(make_check("moment preservation", moments, 1e-11, n));
    r.checks.push_back(make_check("operator norm spread C_max/C_min - 1", c_hi / c_lo - 1.0, 1e-6, n));

    const ProblemSpec prob = smooth_problem();
    const TriMesh mesh = small_mesh(prob, 1);
    const BdmSpace space(mesh, 1);
    const MixedSolution sol = solve_mixed(space, prob);
    double orth = 0.0;
    for (int k = 0; k < mesh.num_triangles(); ++k)
        orth = std::max(orth, fortin_bdm1_orthogonality(space, sol.q, prob.exact->q, set, k));
    r.checks.push_back(make_check("(p_h.n, v - Pi v) = 0 for BDM1 traces, v = (q - q_h).n", orth, 1e-11,
                                  "smooth problem, " + std::to_string(mesh.num_triangles()) + " elements"));

    json trace = json::object();
    for (int p = 1; p <= 3; ++p) {
        double lo = INFINITY, hi = 0.0, inv = 0.0;
        for (int t = 0; t < triangles; ++t) {
            const AffineMap map = random_shape_regular_triangle(rng);
            const double c = scaled_trace_constant(p, map).constant;
            lo = std::min(lo, c);
            hi = std::max(hi, c);
            AffineMap scaled = map;
            scaled.origin = 0.125 * map.origin;
            scaled.jac = 0.125 * map.jac;
            scaled.jac_inv_t = map.jac_inv_t / 0.125;
            scaled.det = map.det / 64.0;
            inv = std::max(inv, std::abs(scaled_trace_constant(p, scaled).constant - c) / c);
        }
        r.checks.push_back(make_check("trace constant finite, p=" + std::to_string(p), hi, 1e6, "max over sample"));
        r.checks.push_back(make_check("trace constant scaling invariance, p=" + std::to_string(p), inv, 1e-10));
        trace[std::to_string(p)] = {{"min", lo}, {"max", hi}};
    }

    json A = json::array();
    for (int i = 0; i < 3; ++i) A.push_back({set.A(i, 0), set.A(i, 1), set.A(i, 2)});
    return {{"A", A},
            {"det_A", set.det_A},
            {"beta", {set.beta[0], set.beta[1], set.beta[2]}},
            {"gamma", {set.gamma[0], set.gamma[1], set.gamma[2]}},
            {"C_Pi", {{"min", c_lo}, {"max", c_hi}}},
            {"max_psi_norm_over_sqrt_xi", psi},
            {"trace_constant", trace},
            {"triangles", triangles}};
}

} // namespace

VerifyReport run_verify(std::uint64_t seed) {
    VerifyReport r;
    std::mt19937_64 rng(seed);
    exactness_checks(r);
    pipeline_checks(r);
    dual_norm_checks(r, rng);
    const json fortin = fortin_checks(r, rng, 20);
    finish(r, {{"seed", seed}, {"fortin", fortin}});
    return r;
}

VerifyReport fortin_report(std::uint64_t seed, int triangles) {
    VerifyReport r;
    std::mt19937_64 rng(seed);
    json j = fortin_checks(r, rng, std::max(1, triangles));
    j["seed"] = seed;
    finish(r, j);
    return r;
}

} // namespace resmin
