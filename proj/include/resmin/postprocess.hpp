#pragma once

#include "resmin/mixed_solver.hpp"

namespace resmin {

/// Gradient Gram matrices of the zero-mean basis of one degree, built once on
/// the reference triangle and mapped to any element in O(n^2).
class ZeroMeanStiffness {
public:
    explicit ZeroMeanStiffness(int degree);
    int degree() const { return degree_; }
    int size() const { return static_cast<int>(s_[0].rows()); }
    /// (grad phi_i, grad phi_j)_K.
    Eigen::MatrixXd matrix(const AffineMap& map) const;

private:
    int degree_;
    std::array<Eigen::MatrixXd, 3> s_; // xx, xy + yx, yy
};

/// Local solution of the residual minimisation problem on one element.
struct LocalResmin {
    Eigen::VectorXd eps; // zero-mean coefficients, degree p+2
    Eigen::VectorXd nu;  // zero-mean coefficients, degree p+1
};

/// Solves [[A, A(:,w)], [A(w,:), 0]] [eps; nu] = [rhs; 0] where w are the
/// first n_low zero-mean functions (the hierarchical degree-(p+1) subset).
LocalResmin solve_local_resmin(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs, int n_low);

/// Per-element results. Coefficients are in the full orthonormal basis of
/// the stated degree (constant first); eps has a zero constant.
struct PostprocResult {
    int degree = 0;
    std::vector<Eigen::VectorXd> nu;    // degree p+1
    std::vector<Eigen::VectorXd> eps;   // degree p+2
    std::vector<Eigen::VectorXd> theta; // degree p+2, empty unless requested
    Eigen::VectorXd eta_tilde;
};

/// -(q_h, grad phi_i)_K for the zero-mean basis of the given degree.
Eigen::VectorXd flux_load(const BdmSpace& space, const Eigen::VectorXd& q, int k, int degree);

/// Residual minimisation postprocessing; also fills theta when asked.
PostprocResult postprocess_resmin(const BdmSpace& space, const MixedSolution& sol, bool with_theta = true);
/// Classical postprocessing: (grad u~, grad v)_K = -(q_h, grad v)_K, mean of u_h.
std::vector<Eigen::VectorXd> stenberg_oracle(const BdmSpace& space, const MixedSolution& sol);
/// Same local problem with degree p+2.
std::vector<Eigen::VectorXd> solve_theta(const BdmSpace& space, const MixedSolution& sol);

} // namespace resmin
