#pragma once

#include "resmin/mesh.hpp"

#include <optional>
#include <string>

namespace resmin {

/// Closed-form solution pair with q = -grad u.
struct ExactSolution {
    ScalarField u;
    VectorField q;
};

/// Model problem: q + grad u = 0, div q - beta . q = f, u = u_D on the boundary.
struct ProblemSpec {
    std::string name = "custom";
    DomainSpec domain;
    ScalarField f;
    ScalarField u_D;
    Vec2 beta = Vec2::Zero();
    std::optional<ExactSolution> exact;
    /// Point where the exact solution is singular; element quadrature on
    /// elements touching it is refined.
    std::optional<Vec2> singular_point;
    /// Element count requested for the initial mesh.
    int initial_elements = 2;

    bool has_advection() const { return beta.squaredNorm() > 0.0; }
};

/// u = x on the unit square.
ProblemSpec linear_problem();
/// u = x (1-x) sin(pi y) on the unit square, homogeneous boundary data.
ProblemSpec smooth_problem();
/// u = r^{2/3} sin(2/3 (pi - theta)) on the L-shape, f = 0.
ProblemSpec lshape_problem();
/// Boundary-layer solution of -Lap u + beta . grad u = f, beta = (P, P).
ProblemSpec advdiff_problem(double P = 1000.0 / 3.0);

/// Lookup by id: "linear", "smooth", "lshape", "advdiff". Throws
/// std::invalid_argument for unknown ids.
ProblemSpec preset(const std::string& id);

/// Triangle rule with the requested exactness, subdivided twice when element
/// k has a vertex at the singular point.
QuadRule element_rule(const TriMesh& mesh, int k, const std::optional<Vec2>& singular, int exactness);

} // namespace resmin
