#include "resmin/postprocess.hpp"

#include <Eigen/Dense>

#include <stdexcept>

namespace resmin {

ZeroMeanStiffness::ZeroMeanStiffness(int degree) : degree_(degree)
{
    const ScalarBasis basis = make_zero_mean_basis(degree);
    const QuadRule rule = quad_rule(2 * degree, QuadRule::Variant::Triangle);
    const int n = basis.size();
    for (auto& m : s_) m = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const Eigen::MatrixXd g = basis.gradients(rule.points[q]);
        const double w = rule.weights[q];
        s_[0] += w * g.col(0) * g.col(0).transpose();
        s_[1] += w * (g.col(0) * g.col(1).transpose() + g.col(1) * g.col(0).transpose());
        s_[2] += w * g.col(1) * g.col(1).transpose();
    }
}

Eigen::MatrixXd ZeroMeanStiffness::matrix(const AffineMap& map) const
{
    // grad = J^{-T} grad_ref, so the metric is J^{-1} J^{-T}.
    const Eigen::Matrix2d Ji = map.jac.inverse();
    const Eigen::Matrix2d G = Ji * Ji.transpose();
    return std::abs(map.det) * (G(0, 0) * s_[0] + G(0, 1) * s_[1] + G(1, 1) * s_[2]);
}

LocalResmin solve_local_resmin(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs, int n_low)
{
    const int n = static_cast<int>(A.rows());
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n + n_low, n + n_low);
    S.topLeftCorner(n, n) = A;
    S.topRightCorner(n, n_low) = A.leftCols(n_low);
    S.bottomLeftCorner(n_low, n) = A.topRows(n_low);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + n_low);
    b.head(n) = rhs;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(S);
    const Eigen::VectorXd x = lu.solve(b);
    if (!x.allFinite()) throw std::runtime_error("residual minimisation: singular local system");
    return {x.head(n), x.tail(n_low)};
}

namespace {

// R(i, j) = sum_q w grad_ref phi_i . phi_ref_j; geometry independent since
// the Piola map and the gradient push-forward cancel.
Eigen::MatrixXd reference_flux_coupling(const BdmReference& ref, int degree)
{
    const ScalarBasis basis = make_zero_mean_basis(degree);
    const QuadRule rule = quad_rule(ref.degree() + degree, QuadRule::Variant::Triangle);
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(basis.size(), ref.dim());
    for (std::size_t q = 0; q < rule.size(); ++q)
        R += rule.weights[q] * basis.gradients(rule.points[q]) * ref.values(rule.points[q]).transpose();
    return R;
}

Eigen::VectorXd signed_local(const BdmSpace& space, const Eigen::VectorXd& q, int k)
{
    Eigen::VectorXd c = space.local_coefficients(q, k);
    for (int i = 0; i < c.size(); ++i) c(i) *= space.local_signs(k)[i];
    return c;
}

void check_solution(const BdmSpace& space, const MixedSolution& sol)
{
    const int p = space.degree();
    if (sol.degree != p || sol.q.size() != space.num_dofs() ||
        sol.u.size() != static_cast<Eigen::Index>(scalar_dim(p - 1)) * space.mesh().num_triangles())
        throw std::invalid_argument("postprocess: solution does not match the space");
}

Eigen::VectorXd with_constant(double c0, const Eigen::VectorXd& zero_mean)
{
    Eigen::VectorXd v(zero_mean.size() + 1);
    v(0) = c0;
    v.tail(zero_mean.size()) = zero_mean;
    return v;
}

// Elementwise SPD solve on the zero-mean basis of `degree` plus the mean of u_h.
std::vector<Eigen::VectorXd> local_neumann(const BdmSpace& space, const MixedSolution& sol, int degree)
{
    check_solution(space, sol);
    const TriMesh& mesh = space.mesh();
    const ZeroMeanStiffness stiff(degree);
    const Eigen::MatrixXd R = reference_flux_coupling(space.reference(), degree);
    const int nu = scalar_dim(space.degree() - 1);
    std::vector<Eigen::VectorXd> out(mesh.num_triangles());
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const Eigen::MatrixXd A = stiff.matrix(mesh.map(k));
        const Eigen::VectorXd rhs = -R * signed_local(space, sol.q, k);
        // Same orthonormal constant in both bases: matching means means matching c0.
        out[k] = with_constant(sol.u(k * nu), A.llt().solve(rhs));
    }
    return out;
}

} // namespace

Eigen::VectorXd flux_load(const BdmSpace& space, const Eigen::VectorXd& q, int k, int degree)
{
    return -reference_flux_coupling(space.reference(), degree) * signed_local(space, q, k);
}

PostprocResult postprocess_resmin(const BdmSpace& space, const MixedSolution& sol, bool with_theta)
{
    check_solution(space, sol);
    const int p = space.degree();
    const TriMesh& mesh = space.mesh();
    const ZeroMeanStiffness stiff(p + 2);
    const Eigen::MatrixXd R = reference_flux_coupling(space.reference(), p + 2);
    const int n_low = scalar_dim(p + 1) - 1;
    const int nu = scalar_dim(p - 1);

    PostprocResult res;
    res.degree = p;
    res.nu.resize(mesh.num_triangles());
    res.eps.resize(mesh.num_triangles());
    if (with_theta) res.theta.resize(mesh.num_triangles());
    res.eta_tilde.resize(mesh.num_triangles());
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const Eigen::MatrixXd A = stiff.matrix(mesh.map(k));
        const Eigen::VectorXd rhs = -R * signed_local(space, sol.q, k);
        const LocalResmin loc = solve_local_resmin(A, rhs, n_low);
        const double c0 = sol.u(k * nu);
        res.nu[k] = with_constant(c0, loc.nu);
        res.eps[k] = with_constant(0.0, loc.eps);
        res.eta_tilde(k) = std::sqrt(std::max(0.0, loc.eps.dot(A * loc.eps)));
        if (with_theta) res.theta[k] = with_constant(c0, A.llt().solve(rhs));
    }
    return res;
}

std::vector<Eigen::VectorXd> stenberg_oracle(const BdmSpace& space, const MixedSolution& sol)
{
    return local_neumann(space, sol, space.degree() + 1);
}

std::vector<Eigen::VectorXd> solve_theta(const BdmSpace& space, const MixedSolution& sol)
{
    return local_neumann(space, sol, space.degree() + 2);
}

} // namespace resmin
