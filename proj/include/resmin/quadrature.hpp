#pragma once

#include <Eigen/Dense>

#include <vector>

namespace resmin {

using Vec2 = Eigen::Vector2d;

/// Quadrature rule on the reference triangle {s,t >= 0, s+t <= 1} or on the
/// unit interval [0,1]. Triangle points are stored in reference coordinates.
struct QuadRule {
    enum class Variant { Triangle, Edge };

    Variant variant = Variant::Triangle;
    int exactness = 0;
    std::vector<Vec2> points;      // edge rules use points[i].x() only
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
};

/// Largest polynomial degree for which a rule can be requested.
inline constexpr int kMaxQuadratureDegree = 60;

/// Collapsed Gauss-Jacobi rule on the triangle (exactness 1 gives the
/// centroid rule) or Gauss-Legendre on [0,1]. Throws std::invalid_argument
/// for degrees outside [0, kMaxQuadratureDegree].
QuadRule quad_rule(int exactness, QuadRule::Variant variant);

/// Rule obtained by splitting the reference triangle into 4^levels congruent
/// pieces and applying `base` on each.
QuadRule subdivide(const QuadRule& base, int levels);

/// Gauss-Jacobi nodes/weights on [-1,1] for the weight (1-x)^alpha (1+x)^beta.
void gauss_jacobi(int n, double alpha, double beta, std::vector<double>& nodes,
                  std::vector<double>& weights);

} // namespace resmin
