#pragma once

#include "resmin/bdm.hpp"
#include "resmin/problems.hpp"

namespace resmin {

/// Block system [[M, -B^T], [B - C, 0]] with unknowns (q_h, u_h).
struct MixedSystem {
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    int flux_dofs = 0;
    int scalar_dofs = 0;
};

struct MixedSolution {
    int degree = 0;
    Eigen::VectorXd q; // BdmSpace(p) coefficients
    Eigen::VectorXd u; // DgSpace(p-1) coefficients
    double relative_residual = 0.0;
    long nonzeros = 0;
};

/// C[i,j] = (beta . phi_j, psi_i).
SparseMatrix advection_matrix(const BdmSpace& space, const DgSpace& target, const Vec2& beta);
/// F_i = (f, psi_i), quadrature exactness 2p+8.
Eigen::VectorXd load_vector(const DgSpace& target, const ProblemSpec& problem, int exactness);

/// Poisson system; the advection field of the problem is ignored.
MixedSystem assemble_poisson(const BdmSpace& space, const ProblemSpec& problem);
/// Advection-diffusion system; equals assemble_poisson when beta = 0.
MixedSystem assemble_advection_diffusion(const BdmSpace& space, const ProblemSpec& problem);

/// Direct sparse LU. Throws std::runtime_error with the factorization
/// diagnostic if the matrix is singular.
MixedSolution solve(const MixedSystem& system, int degree);

/// Assemble (advection branch when beta != 0) and solve.
MixedSolution solve_mixed(const BdmSpace& space, const ProblemSpec& problem);

} // namespace resmin
