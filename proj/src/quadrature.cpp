#include "resmin/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace resmin {

void gauss_jacobi(int n, double alpha, double beta, std::vector<double>& nodes,
                  std::vector<double>& weights)
{
    // Golub-Welsch on the symmetric Jacobi matrix.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    const double ab = alpha + beta;
    for (int k = 0; k < n; ++k) {
        const double s = 2.0 * k + ab;
        J(k, k) = (k == 0) ? (beta - alpha) / (ab + 2.0)
                           : (beta * beta - alpha * alpha) / (s * (s + 2.0));
        if (k + 1 < n) {
            const double m = k + 1.0;
            const double t = 2.0 * m + ab;
            const double num = 4.0 * m * (m + alpha) * (m + beta) * (m + ab);
            const double den = t * t * (t + 1.0) * (t - 1.0);
            J(k, k + 1) = J(k + 1, k) = std::sqrt(num / den);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
    const double mu0 = std::pow(2.0, ab + 1.0) * std::tgamma(alpha + 1.0) *
                       std::tgamma(beta + 1.0) / std::tgamma(ab + 2.0);
    nodes.resize(n);
    weights.resize(n);
    for (int k = 0; k < n; ++k) {
        nodes[k] = eig.eigenvalues()(k);
        const double v0 = eig.eigenvectors()(0, k);
        weights[k] = mu0 * v0 * v0;
    }
}

QuadRule quad_rule(int exactness, QuadRule::Variant variant)
{
    if (exactness < 0 || exactness > kMaxQuadratureDegree) {
        throw std::invalid_argument("quad_rule: unsupported exactness " + std::to_string(exactness) +
                                    " (maximum " + std::to_string(kMaxQuadratureDegree) + ")");
    }
    QuadRule rule;
    rule.variant = variant;
    const int n = std::max(1, (exactness + 2) / 2);
    rule.exactness = 2 * n - 1;

    std::vector<double> xl, wl;
    gauss_jacobi(n, 0.0, 0.0, xl, wl);
    if (variant == QuadRule::Variant::Edge) {
        for (int i = 0; i < n; ++i) {
            rule.points.emplace_back(0.5 * (xl[i] + 1.0), 0.0);
            rule.weights.push_back(0.5 * wl[i]);
        }
        return rule;
    }

    // Collapsed coordinates: s = a, t = b (1 - a); the Jacobian (1-a) is
    // absorbed in the Jacobi weight.
    std::vector<double> xj, wj;
    gauss_jacobi(n, 1.0, 0.0, xj, wj);
    for (int i = 0; i < n; ++i) {
        const double a = 0.5 * (xj[i] + 1.0);
        for (int j = 0; j < n; ++j) {
            const double b = 0.5 * (xl[j] + 1.0);
            rule.points.emplace_back(a, b * (1.0 - a));
            rule.weights.push_back(0.25 * wj[i] * 0.5 * wl[j]);
        }
    }
    return rule;
}

QuadRule subdivide(const QuadRule& base, int levels)
{
    if (base.variant != QuadRule::Variant::Triangle || levels <= 0) return base;

    struct Tri { Vec2 a, b, c; };
    std::vector<Tri> pieces{{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}};
    for (int l = 0; l < levels; ++l) {
        std::vector<Tri> next;
        next.reserve(pieces.size() * 4);
        for (const auto& t : pieces) {
            const Vec2 ab = 0.5 * (t.a + t.b), bc = 0.5 * (t.b + t.c), ca = 0.5 * (t.c + t.a);
            next.push_back({t.a, ab, ca});
            next.push_back({ab, t.b, bc});
            next.push_back({ca, bc, t.c});
            next.push_back({bc, ca, ab});
        }
        pieces = std::move(next);
    }

    QuadRule rule;
    rule.variant = base.variant;
    rule.exactness = base.exactness;
    for (const auto& t : pieces) {
        Eigen::Matrix2d B;
        B.col(0) = t.b - t.a;
        B.col(1) = t.c - t.a;
        const double det = std::abs(B.determinant());
        for (std::size_t q = 0; q < base.size(); ++q) {
            rule.points.push_back(t.a + B * base.points[q]);
            rule.weights.push_back(det * base.weights[q]);
        }
    }
    return rule;
}

} // namespace resmin
