#pragma once

#include "resmin/postprocess.hpp"

namespace resmin {

/// sup over zero-mean v of degree p+2 of (r, grad v)_K / ||grad v||_K,
/// computed through the Riesz representative.
double dual_norm_star(const AffineMap& map, const VectorField& r, int p, const QuadRule& rule);
/// Same, from the load vector b_i = (r, grad phi_i)_K and the stiffness matrix.
double dual_norm_from_load(const Eigen::MatrixXd& stiffness, const Eigen::VectorXd& load);

/// Exact-error quantities. Per-element arrays are norms (not squared).
struct ErrorBlock {
    Eigen::VectorXd grad_u_nu;    // ||grad(u - nu_h)||_K
    Eigen::VectorXd seminorm_1Kh; // |u - nu_h|_{1,K,h}
    Eigen::VectorXd q_K;          // ||q - q_h||_K
    Eigen::VectorXd q_star_K;     // ||q - q_h||_{*,K}
    Eigen::VectorXd q_normal_K;   // h_K^{1/2} ||(q - q_h) . n||_{dK}
    Eigen::VectorXd osc_K;        // best-approximation bound of osc_K(q)
    Eigen::VectorXd grad_u_theta; // ||grad(u - theta_h)||_K (empty without theta)

    double grad_u_nu_total = 0.0; // ||grad(u - nu_h)||
    double u_nu_1h = 0.0;         // ||u - nu_h||_{1,h}
    double q_0h = 0.0;
    double q_star_h = 0.0;
    double l2_u_uh = 0.0;
    double l2_u_nu = 0.0;
    double osc = 0.0;
    double full = 0.0; // (||u - nu_h||_{1,h}^2 + ||q - q_h||_{0,h}^2)^{1/2}
    double effectivity = 0.0;
    double delta = 0.0;
    bool delta_undefined = false; // zero denominator, delta reported as 0
};

/// Estimator components per element. eta_K^2 = eta_tilde_K^2 + mismatch_K^2
/// + jump_sq_K + boundary_sq_K.
struct EstimatorReport {
    Eigen::VectorXd eta_tilde_K;
    Eigen::VectorXd mismatch_K;    // ||q_h + grad nu_h||_K
    Eigen::VectorXd jump_sq_K;     // 1/2 sum_interior h_F^{-1} ||[nu_h]||_F^2
    Eigen::VectorXd boundary_sq_K; // sum_boundary h_F^{-1} ||u_D - nu_h||_F^2
    Eigen::VectorXd eta_K;
    double eta_tilde = 0.0;
    double eta = 0.0;
    bool has_errors = false;
    ErrorBlock errors;
};

/// Builds the estimator block and, when the problem carries an exact
/// solution, the error block (delta needs post.theta).
EstimatorReport estimate(const BdmSpace& space, const MixedSolution& sol, const PostprocResult& post,
                         const ProblemSpec& problem);

/// h_K^{1/2} times the edgewise L2 best-approximation error of q . n by
/// degree-p polynomials, per element.
Eigen::VectorXd oscillation_bound(const TriMesh& mesh, const VectorField& q, int p,
                                  const std::optional<Vec2>& singular = std::nullopt);

/// Edge rule on [0,1], graded towards s = 0 (two levels) when `graded`.
QuadRule edge_rule(int exactness, bool graded);

} // namespace resmin
