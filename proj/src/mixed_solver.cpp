#include "resmin/mixed_solver.hpp"

#include <Eigen/SparseLU>

#include <stdexcept>

namespace resmin {

SparseMatrix advection_matrix(const BdmSpace& space, const DgSpace& target, const Vec2& beta)
{
    const int p = space.degree();
    const QuadRule rule = quad_rule(2 * p, QuadRule::Variant::Triangle);
    const ScalarBasis test(target.degree(), false);
    std::vector<Eigen::VectorXd> psi;
    std::vector<Eigen::MatrixXd> phi;
    for (const auto& x : rule.points) {
        psi.push_back(test.values(x));
        phi.push_back(space.reference().values(x));
    }
    const TriMesh& mesh = space.mesh();
    std::vector<Eigen::Triplet<double>> t;
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        // |det J| phi = phi_ref J^T for positively oriented elements.
        const Vec2 b = mesh.map(k).jac.transpose() * beta;
        Eigen::MatrixXd local = Eigen::MatrixXd::Zero(test.size(), space.local_dim());
        for (std::size_t q = 0; q < rule.size(); ++q) local += rule.weights[q] * psi[q] * (phi[q] * b).transpose();
        const auto& dofs = space.local_dofs(k);
        const auto& signs = space.local_signs(k);
        for (int j = 0; j < space.local_dim(); ++j)
            for (int i = 0; i < test.size(); ++i) t.emplace_back(target.offset(k) + i, dofs[j], signs[j] * local(i, j));
    }
    SparseMatrix C(target.num_dofs(), space.num_dofs());
    C.setFromTriplets(t.begin(), t.end());
    return C;
}

Eigen::VectorXd load_vector(const DgSpace& target, const ProblemSpec& problem, int exactness)
{
    const TriMesh& mesh = target.mesh();
    Eigen::VectorXd F = Eigen::VectorXd::Zero(target.num_dofs());
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const QuadRule r = element_rule(mesh, k, problem.singular_point, exactness);
        F.segment(target.offset(k), target.local_dim()) = mesh.map(k).det * project_L2(problem.f, mesh.map(k), target.degree(), r);
    }
    return F;
}

namespace {

MixedSystem assemble(const BdmSpace& space, const ProblemSpec& problem, bool advection)
{
    const TriMesh& mesh = space.mesh();
    if (mesh.num_triangles() == 0) throw std::invalid_argument("assemble: empty mesh");
    if (!problem.f || !problem.u_D) throw std::invalid_argument("assemble: problem needs f and u_D");
    const int p = space.degree();
    const DgSpace dg(mesh, p - 1);
    const SparseMatrix M = bdm_mass_matrix(space);
    const SparseMatrix B = divergence_matrix(space, dg);
    SparseMatrix lower = B;
    if (advection && problem.has_advection()) lower = B - advection_matrix(space, dg, problem.beta);

    MixedSystem sys;
    sys.flux_dofs = space.num_dofs();
    sys.scalar_dofs = dg.num_dofs();
    const int n = sys.flux_dofs + sys.scalar_dofs;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(M.nonZeros() + 2 * B.nonZeros());
    for (int c = 0; c < M.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(M, c); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    for (int c = 0; c < B.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(B, c); it; ++it) t.emplace_back(it.col(), sys.flux_dofs + it.row(), -it.value());
    for (int c = 0; c < lower.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(lower, c); it; ++it) t.emplace_back(sys.flux_dofs + it.row(), it.col(), it.value());
    sys.matrix.resize(n, n);
    sys.matrix.setFromTriplets(t.begin(), t.end());
    sys.matrix.makeCompressed();

    sys.rhs.resize(n);
    sys.rhs.head(sys.flux_dofs) = interpolate_boundary_term(space, problem.u_D, 2 * p + 8);
    sys.rhs.tail(sys.scalar_dofs) = load_vector(dg, problem, 2 * p + 8);
    return sys;
}

} // namespace

MixedSystem assemble_poisson(const BdmSpace& space, const ProblemSpec& problem) { return assemble(space, problem, false); }

MixedSystem assemble_advection_diffusion(const BdmSpace& space, const ProblemSpec& problem)
{
    return assemble(space, problem, true);
}

MixedSolution solve(const MixedSystem& system, int degree)
{
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(system.matrix);
    lu.factorize(system.matrix);
    if (lu.info() != Eigen::Success) throw std::runtime_error("mixed solve: factorization failed: " + lu.lastErrorMessage());
    const Eigen::VectorXd x = lu.solve(system.rhs);
    if (lu.info() != Eigen::Success) throw std::runtime_error("mixed solve: back substitution failed");

    MixedSolution s;
    s.degree = degree;
    s.q = x.head(system.flux_dofs);
    s.u = x.tail(system.scalar_dofs);
    const double bn = system.rhs.norm();
    const double rn = (system.matrix * x - system.rhs).norm();
    s.relative_residual = bn > 0.0 ? rn / bn : rn;
    s.nonzeros = system.matrix.nonZeros();
    return s;
}

MixedSolution solve_mixed(const BdmSpace& space, const ProblemSpec& problem)
{
    const MixedSystem sys =
        problem.has_advection() ? assemble_advection_diffusion(space, problem) : assemble_poisson(space, problem);
    return solve(sys, space.degree());
}

} // namespace resmin
