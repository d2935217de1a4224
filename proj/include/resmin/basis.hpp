#pragma once

#include "resmin/quadrature.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>

namespace resmin {

using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;

/// Dimension of the full degree-k scalar polynomial space in 2D.
constexpr int scalar_dim(int k) { return k < 0 ? 0 : (k + 1) * (k + 2) / 2; }

/// Highest degree for which the reference scalar basis is tabulated.
inline constexpr int kMaxBasisDegree = 8;

/// Affine map from the reference triangle with vertices (0,0),(1,0),(0,1)
/// onto a physical triangle.
struct AffineMap {
    Vec2 origin;
    Eigen::Matrix2d jac;
    Eigen::Matrix2d jac_inv_t;
    double det = 0.0;

    AffineMap() = default;
    AffineMap(const Vec2& a, const Vec2& b, const Vec2& c);

    Vec2 to_physical(const Vec2& ref) const { return origin + jac * ref; }
    Vec2 to_reference(const Vec2& x) const { return jac_inv_t.transpose() * (x - origin); }
    double area() const { return 0.5 * std::abs(det); }
};

/// Hierarchical orthonormal scalar basis on the reference triangle.
///
/// Functions are ordered by total degree; the degree-k basis is a prefix of
/// every higher-degree basis, and function 0 is the constant sqrt(2). All
/// other functions are L2-orthogonal to constants, so the zero-mean variant
/// simply drops function 0.
class ScalarBasis {
public:
    ScalarBasis(int degree, bool zero_mean);

    int degree() const { return degree_; }
    bool zero_mean() const { return zero_mean_; }
    int size() const { return scalar_dim(degree_) - (zero_mean_ ? 1 : 0); }
    /// Index of this basis' first function inside the full hierarchical list.
    int offset() const { return zero_mean_ ? 1 : 0; }

    Eigen::VectorXd values(const Vec2& ref) const;
    /// size() x 2 matrix of reference gradients.
    Eigen::MatrixXd gradients(const Vec2& ref) const;
    /// Gradients pushed to the physical element: J^{-T} grad_ref.
    Eigen::MatrixXd gradients(const Vec2& ref, const AffineMap& map) const;

private:
    int degree_;
    bool zero_mean_;
};

/// Zero-mean basis of degree k; k must be >= 1.
ScalarBasis make_zero_mean_basis(int k);

/// Coefficients (in the full degree-r basis) of the L2 projection of f onto
/// polynomials of degree r on the element.
Eigen::VectorXd project_L2(const ScalarField& f, const AffineMap& map, int r, const QuadRule& rule);

/// Evaluates sum_i coeffs[i] * phi_i at a reference point (full basis, degree
/// inferred from the coefficient count).
double eval_scalar(const Eigen::VectorXd& coeffs, const Vec2& ref);
Vec2 eval_scalar_gradient(const Eigen::VectorXd& coeffs, const Vec2& ref, const AffineMap& map);

/// Degree such that scalar_dim(degree) == n; throws if n is not a triangular count.
int degree_from_size(int n);

/// Monomial coefficient matrix (row i = phi_i in monomials) and exponents,
/// exposed for tests.
const Eigen::MatrixXd& basis_monomial_coefficients();
const std::vector<std::array<int, 2>>& basis_monomial_exponents();

} // namespace resmin
