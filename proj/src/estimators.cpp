#include "resmin/estimators.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace resmin {

QuadRule edge_rule(int exactness, bool graded)
{
    QuadRule base = quad_rule(exactness, QuadRule::Variant::Edge);
    if (!graded) return base;
    QuadRule out = base;
    out.points.clear();
    out.weights.clear();
    const double cuts[] = {0.0, 0.25, 0.5, 1.0};
    for (int piece = 0; piece < 3; ++piece) {
        const double a = cuts[piece], len = cuts[piece + 1] - cuts[piece];
        for (std::size_t q = 0; q < base.size(); ++q) {
            out.points.emplace_back(a + len * base.points[q].x(), 0.0);
            out.weights.push_back(len * base.weights[q]);
        }
    }
    return out;
}

double dual_norm_from_load(const Eigen::MatrixXd& stiffness, const Eigen::VectorXd& load)
{
    return std::sqrt(std::max(0.0, load.dot(stiffness.llt().solve(load))));
}

double dual_norm_star(const AffineMap& map, const VectorField& r, int p, const QuadRule& rule)
{
    const ScalarBasis basis = make_zero_mean_basis(p + 2);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(basis.size());
    for (std::size_t q = 0; q < rule.size(); ++q)
        b += rule.weights[q] * std::abs(map.det) * basis.gradients(rule.points[q], map) * r(map.to_physical(rule.points[q]));
    return dual_norm_from_load(ZeroMeanStiffness(p + 2).matrix(map), b);
}

namespace {

bool touches(const Vec2& a, const Vec2& b, const std::optional<Vec2>& s)
{
    return s && ((a - *s).norm() < 1e-14 || (b - *s).norm() < 1e-14);
}

// Edge parametrisation with the singular endpoint (if any) at s = 0.
struct EdgeGeom {
    Vec2 a, b;
    double len;
    QuadRule rule;
};

EdgeGeom edge_geometry(const TriMesh& mesh, int e, int exactness, const std::optional<Vec2>& singular)
{
    Vec2 a = mesh.vertices()[mesh.edge(e).v[0]], b = mesh.vertices()[mesh.edge(e).v[1]];
    const bool graded = touches(a, b, singular);
    if (graded && (b - *singular).norm() < 1e-14) std::swap(a, b);
    return {a, b, (b - a).norm(), edge_rule(exactness, graded)};
}

// Full-basis values at reference points, reused across the elements that
// share the standard rule.
struct Table {
    std::vector<Eigen::VectorXd> values;
    std::vector<Eigen::MatrixXd> grads;
    Table(const QuadRule& r, int degree)
    {
        const ScalarBasis b(degree, false);
        for (const auto& x : r.points) {
            values.push_back(b.values(x));
            grads.push_back(b.gradients(x));
        }
    }
};

} // namespace

Eigen::VectorXd oscillation_bound(const TriMesh& mesh, const VectorField& q, int p, const std::optional<Vec2>& singular)
{
    std::vector<double> edge_err(mesh.num_edges());
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const EdgeGeom g = edge_geometry(mesh, e, 2 * p + 8, singular);
        const Vec2 n = mesh.edge_normal(e);
        // Legendre moments then pointwise residual (avoids cancellation).
        Eigen::VectorXd c = Eigen::VectorXd::Zero(p + 1);
        std::vector<double> f(g.rule.size());
        for (std::size_t i = 0; i < g.rule.size(); ++i) {
            const double s = g.rule.points[i].x();
            f[i] = q(g.a + s * (g.b - g.a)).dot(n);
            for (int m = 0; m <= p; ++m) c(m) += (2 * m + 1) * g.rule.weights[i] * f[i] * shifted_legendre(m, s);
        }
        double err = 0.0;
        for (std::size_t i = 0; i < g.rule.size(); ++i) {
            double r = f[i];
            for (int m = 0; m <= p; ++m) r -= c(m) * shifted_legendre(m, g.rule.points[i].x());
            err += g.rule.weights[i] * g.len * r * r;
        }
        edge_err[e] = err;
    }
    Eigen::VectorXd out(mesh.num_triangles());
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        double s = 0.0;
        for (int i = 0; i < 3; ++i) s += edge_err[mesh.tri_edge(k, i)];
        out(k) = std::sqrt(mesh.h(k) * s);
    }
    return out;
}

EstimatorReport estimate(const BdmSpace& space, const MixedSolution& sol, const PostprocResult& post,
                         const ProblemSpec& problem)
{
    const TriMesh& mesh = space.mesh();
    const int p = space.degree();
    const int nel = mesh.num_triangles();
    if (static_cast<int>(post.nu.size()) != nel || post.degree != p)
        throw std::invalid_argument("estimate: postprocessing result does not match the space");
    const bool exact = problem.exact.has_value();
    const bool with_theta = exact && static_cast<int>(post.theta.size()) == nel;
    const int data_ex = 2 * p + 8;

    EstimatorReport rep;
    rep.eta_tilde_K = post.eta_tilde;
    rep.mismatch_K.resize(nel);
    rep.jump_sq_K = Eigen::VectorXd::Zero(nel);
    rep.boundary_sq_K = Eigen::VectorXd::Zero(nel);

    ErrorBlock& err = rep.errors;
    rep.has_errors = exact;
    Eigen::VectorXd normal_sq = Eigen::VectorXd::Zero(nel);
    Eigen::VectorXd err_jump_sq = Eigen::VectorXd::Zero(nel);
    if (exact) {
        err.grad_u_nu.resize(nel);
        err.q_K.resize(nel);
        err.q_star_K.resize(nel);
        if (with_theta) err.grad_u_theta.resize(nel);
    }

    // Edge terms. The jump of u - nu_h equals minus the jump of nu_h and the
    // boundary trace of u - nu_h is u_D - nu_h, so the estimator edge terms
    // double as the error edge terms.
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const Edge& E = mesh.edge(e);
        const EdgeGeom g = edge_geometry(mesh, e, data_ex, problem.singular_point);
        const double hF = g.len;
        double jump2 = 0.0;
        std::array<double, 2> flux2{0.0, 0.0};
        const int sides = E.boundary ? 1 : 2;
        for (std::size_t i = 0; i < g.rule.size(); ++i) {
            const Vec2 x = g.a + g.rule.points[i].x() * (g.b - g.a);
            const double w = g.rule.weights[i] * hF;
            std::array<double, 2> nu{0.0, 0.0};
            for (int sd = 0; sd < sides; ++sd) {
                const int k = E.tri[sd];
                const Vec2 ref = mesh.map(k).to_reference(x);
                nu[sd] = eval_scalar(post.nu[k], ref);
                if (exact) {
                    const Vec2 qh = space.eval_flux(sol.q, k, {ref})[0];
                    const double d = (problem.exact->q(x) - qh).dot(mesh.edge_normal(e));
                    flux2[sd] += w * d * d;
                }
            }
            const double j = E.boundary ? problem.u_D(x) - nu[0] : nu[0] - nu[1];
            jump2 += w * j * j;
        }
        if (E.boundary) {
            rep.boundary_sq_K(E.tri[0]) += jump2 / hF;
        } else {
            rep.jump_sq_K(E.tri[0]) += 0.5 * jump2 / hF;
            rep.jump_sq_K(E.tri[1]) += 0.5 * jump2 / hF;
        }
        if (exact)
            for (int sd = 0; sd < sides; ++sd) normal_sq(E.tri[sd]) += mesh.h(E.tri[sd]) * flux2[sd];
    }

    // Element terms.
    const QuadRule std_rule = quad_rule(data_ex, QuadRule::Variant::Triangle);
    const Table t_nu(std_rule, p + 1), t_th(std_rule, p + 2), t_u(std_rule, p - 1);
    std::vector<Eigen::MatrixXd> t_q;
    for (const auto& x : std_rule.points) t_q.push_back(space.reference().values(x));
    const ZeroMeanStiffness stiff(p + 2);
    const ScalarBasis zm(p + 2, true);
    std::vector<Eigen::MatrixXd> t_zm;
    for (const auto& x : std_rule.points) t_zm.push_back(zm.gradients(x));
    const int nu_dim = scalar_dim(p - 1);

    double l2_uh = 0.0, l2_nu = 0.0, q_norm2 = 0.0;
    for (int k = 0; k < nel; ++k) {
        const AffineMap F = mesh.map(k);
        const QuadRule r = element_rule(mesh, k, problem.singular_point, data_ex);
        const bool standard = r.size() == std_rule.size();
        Eigen::VectorXd qloc = space.local_coefficients(sol.q, k);
        for (int i = 0; i < qloc.size(); ++i) qloc(i) *= space.local_signs(k)[i];
        const Eigen::VectorXd uloc = sol.u.segment(k * nu_dim, nu_dim);
        const ScalarBasis b_nu(p + 1, false), b_th(p + 2, false), b_u(p - 1, false);

        double mism = 0.0, gnu = 0.0, gth = 0.0, qk = 0.0, e_uh = 0.0, e_nu = 0.0;
        Eigen::VectorXd load = Eigen::VectorXd::Zero(zm.size());
        for (std::size_t i = 0; i < r.size(); ++i) {
            const Vec2& xr = r.points[i];
            const double w = r.weights[i] * F.det;
            const Eigen::MatrixXd& V = standard ? t_q[i] : space.reference().values(xr);
            const Vec2 qh = F.jac * (V.transpose() * qloc) / F.det;
            const Eigen::MatrixXd gn = standard ? t_nu.grads[i] : b_nu.gradients(xr);
            const Vec2 grad_nu = F.jac_inv_t * (gn.transpose() * post.nu[k]);
            const Vec2 d = qh + grad_nu;
            mism += w * d.squaredNorm();
            if (!exact) continue;
            const Vec2 x = F.to_physical(xr);
            const Vec2 q = problem.exact->q(x);
            const double u = problem.exact->u(x);
            q_norm2 += w * q.squaredNorm();
            gnu += w * (q + grad_nu).squaredNorm();
            qk += w * (q - qh).squaredNorm();
            const Eigen::MatrixXd gz = standard ? t_zm[i] : zm.gradients(xr);
            load += w * (gz * F.jac_inv_t.transpose()) * (q - qh);
            const double uh = (standard ? t_u.values[i] : b_u.values(xr)).dot(uloc);
            const double nu = (standard ? t_nu.values[i] : b_nu.values(xr)).dot(post.nu[k]);
            e_uh += w * (u - uh) * (u - uh);
            e_nu += w * (u - nu) * (u - nu);
            if (with_theta) {
                const Eigen::MatrixXd gt = standard ? t_th.grads[i] : b_th.gradients(xr);
                const Vec2 grad_th = F.jac_inv_t * (gt.transpose() * post.theta[k]);
                gth += w * (q + grad_th).squaredNorm();
            }
        }
        rep.mismatch_K(k) = std::sqrt(mism);
        if (exact) {
            err.grad_u_nu(k) = std::sqrt(gnu);
            err.q_K(k) = std::sqrt(qk);
            err.q_star_K(k) = dual_norm_from_load(stiff.matrix(F), load);
            if (with_theta) err.grad_u_theta(k) = std::sqrt(gth);
            l2_uh += e_uh;
            l2_nu += e_nu;
        }
    }

    rep.eta_K = (rep.eta_tilde_K.array().square() + rep.mismatch_K.array().square() + rep.jump_sq_K.array() +
                 rep.boundary_sq_K.array())
                    .sqrt();
    rep.eta_tilde = rep.eta_tilde_K.norm();
    rep.eta = rep.eta_K.norm();
    if (!exact) return rep;

    err.seminorm_1Kh = (err.grad_u_nu.array().square() + rep.jump_sq_K.array() + rep.boundary_sq_K.array()).sqrt();
    err.q_normal_K = normal_sq.array().sqrt();
    err.osc_K = oscillation_bound(mesh, problem.exact->q, p, problem.singular_point);
    err.grad_u_nu_total = err.grad_u_nu.norm();
    err.u_nu_1h = err.seminorm_1Kh.norm();
    err.q_0h = std::sqrt(err.q_K.squaredNorm() + normal_sq.sum());
    err.q_star_h = std::sqrt(err.q_star_K.squaredNorm() + normal_sq.sum());
    err.l2_u_uh = std::sqrt(l2_uh);
    err.l2_u_nu = std::sqrt(l2_nu);
    err.osc = err.osc_K.norm();
    err.full = std::hypot(err.u_nu_1h, err.q_0h);
    err.effectivity = err.full > 0.0 ? rep.eta / err.full : 0.0;
    if (with_theta) {
        // Errors at roundoff level count as an exactly reproduced solution.
        if (err.grad_u_nu_total > 1e-12 * std::max(1.0, std::sqrt(q_norm2))) {
            err.delta = err.grad_u_theta.norm() / err.grad_u_nu_total;
        } else {
            err.delta = 0.0;
            err.delta_undefined = true;
        }
    } else {
        err.delta_undefined = true;
    }
    return rep;
}

} // namespace resmin
