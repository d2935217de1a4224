#include "doctest.h"

#include "resmin/fortin.hpp"
#include "resmin/mixed_solver.hpp"
#include "resmin/postprocess.hpp"
#include "resmin/problems.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace resmin;

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

// int_0^1 s^a (1-s)^b ds
double beta_integral(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 1); }
// int over the reference triangle of l0^a l1^b
double barycentric_integral(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

// Closed-form A. On the bottom face l_start = 1-s, l_end = s; generators are
// l_start^m l_end^n with (m,n) = (1,1), (2,1), (1,2). Trace duals are 1 and
// 3(2s-1).
Eigen::Matrix3d closed_form_A() {
    const int m[3] = {1, 2, 1}, n[3] = {1, 1, 2};
    Eigen::Matrix3d A;
    for (int j = 0; j < 3; ++j) {
        A(0, j) = beta_integral(n[j], m[j]);
        A(1, j) = 3.0 * (2.0 * beta_integral(n[j] + 1, m[j]) - beta_integral(n[j], m[j]));
        A(2, j) = barycentric_integral(m[j], n[j]);
    }
    return A;
}

// Random trace: independent polynomial of degree 5 on each face.
BoundaryField random_trace(std::mt19937_64& rng) {
    std::normal_distribution<double> N;
    std::array<std::array<double, 6>, 3> c;
    for (auto& f : c)
        for (auto& x : f) x = N(rng);
    return [c](int face, double s) {
        double v = 0, sp = 1;
        for (int i = 0; i < 6; ++i, sp *= s) v += c[face][i] * sp;
        return v;
    };
}

} // namespace

TEST_CASE("matrix A matches the closed-form monomial integrals and is invertible") {
    const BiorthogonalSet set = build_biorthogonal(1);
    const Eigen::Matrix3d ref = closed_form_A();
    CHECK((set.A - ref).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(std::abs(ref.determinant() - 1.0 / 14400.0) < 1e-15);
    CHECK(std::abs(set.det_A - ref.determinant()) < 1e-15);
    CHECK((set.A * set.beta - Eigen::Vector3d::UnitX()).norm() < 1e-12);
    CHECK((set.A * set.gamma - Eigen::Vector3d::UnitY()).norm() < 1e-12);
}

TEST_CASE("degrees other than 1 are rejected") {
    CHECK_THROWS_AS(build_biorthogonal(2), std::invalid_argument);
}

TEST_CASE("reference biorthogonality, zero mean and face support") {
    const BiorthogonalSet set = build_biorthogonal(1);
    CHECK((set.reference_pairing - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(set.max_mean < 1e-12);
    CHECK(set.max_off_face < 1e-12);

    // Independent check of the mean: integrate psi with a separate rule.
    const QuadRule tr = quad_rule(10, QuadRule::Variant::Triangle);
    for (int j = 0; j < 6; ++j) {
        double mean = 0;
        for (std::size_t q = 0; q < tr.size(); ++q) mean += tr.weights[q] * eval_scalar(set.psi_coeffs.col(j), tr.points[q]);
        CHECK(std::abs(mean) < 1e-13);
    }
    const AffineMap ref(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1));
    CHECK(xi_scale(ref) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("physical pairing equals xi_K times the identity on random triangles") {
    const BiorthogonalSet set = build_biorthogonal(1);
    std::mt19937_64 rng(7);
    double worst = 0, c_min = 1e300, c_max = 0, psi_max = 0;
    for (int t = 0; t < 100; ++t) {
        const AffineMap map = random_shape_regular_triangle(rng);
        const double xi = xi_scale(map);
        CHECK(xi == doctest::Approx(boundary_length(map) / (2.0 + std::sqrt(2.0))));
        const Eigen::MatrixXd P = physical_pairing(set, map);
        worst = std::max(worst, (P / xi - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff());
        const double c = fortin_operator_norm(set, map);
        c_min = std::min(c_min, c);
        c_max = std::max(c_max, c);
        psi_max = std::max(psi_max, psi_norm_ratio(set, map));

        // Random data never exceed the exact operator norm.
        for (int r = 0; r < 100; ++r) {
            const BoundaryField v = random_trace(rng);
            const FortinTrace pi = fortin_apply(v, set, map);
            const BoundaryField pv = polynomial_trace(pi.coeffs);
            const double ratio = std::sqrt(boundary_inner(pv, pv, map, 12) / boundary_inner(v, v, map, 12));
            CHECK(ratio <= c * (1 + 1e-10));
        }
    }
    CHECK(worst < 1e-11);
    CHECK(std::isfinite(c_max));
    // Shape-regular sample: the constant varies within a bounded band.
    CHECK(c_max / c_min < 10.0);
    CHECK(std::isfinite(psi_max));
    MESSAGE("C_Pi range [" << c_min << ", " << c_max << "], max ||psi||/sqrt(xi) " << psi_max);
}

TEST_CASE("moment preservation and projection on moments") {
    const BiorthogonalSet set = build_biorthogonal(1);
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
        const AffineMap map = random_shape_regular_triangle(rng);
        const BoundaryField v = random_trace(rng);
        const FortinTrace pi = fortin_apply(v, set, map);
        const auto mv = trace_moments(v, map, 12);
        const auto mp = trace_moments(polynomial_trace(pi.coeffs), map, 12);
        CHECK((mv - mp).norm() <= 1e-11 * std::max(1.0, mv.norm()));

        // v in the span of the psi traces is reproduced exactly.
        std::normal_distribution<double> N;
        Eigen::Matrix<double, 6, 1> c;
        for (int i = 0; i < 6; ++i) c[i] = N(rng);
        const Eigen::VectorXd w = set.psi_coeffs * c;
        const FortinTrace again = fortin_apply(polynomial_trace(w), set, map);
        CHECK((again.alpha - c).norm() < 1e-11 * c.norm());
    }
}

TEST_CASE("orthogonality against local BDM1 normal traces for a computed flux") {
    const BiorthogonalSet set = build_biorthogonal(1);
    const ProblemSpec prob = smooth_problem();
    const TriMesh mesh = build_initial_mesh(prob.domain, 32);
    const BdmSpace space(mesh, 1);
    const MixedSolution sol = solve_mixed(space, prob);
    const VectorField q = prob.exact->q;
    double worst = 0;
    for (int k = 0; k < mesh.num_triangles(); ++k)
        worst = std::max(worst, fortin_bdm1_orthogonality(space, sol.q, q, set, k));
    CHECK(worst < 1e-11);
}

TEST_CASE("orthogonality check detects a non-BDM test function") {
    // A quadratic normal trace is not in the span, so the residual must not vanish.
    const BiorthogonalSet set = build_biorthogonal(1);
    const AffineMap map(Vec2(0.1, 0.0), Vec2(1.0, 0.2), Vec2(0.3, 0.9));
    const BoundaryField v = [](int, double s) { return std::cos(3 * s); };
    const FortinTrace pi = fortin_apply(v, set, map);
    const BoundaryField pv = polynomial_trace(pi.coeffs);
    const BoundaryField quad = [](int f, double s) { return f == 0 ? s * s : 0.0; };
    const BoundaryField diff = [&](int f, double s) { return v(f, s) - pv(f, s); };
    CHECK(std::abs(boundary_inner(quad, diff, map, 12)) > 1e-6);
}

TEST_CASE("scaled trace constant: oracle, kernel size and scaling invariance") {
    std::mt19937_64 rng(3);
    for (int p = 1; p <= 3; ++p) {
        double cmax = 0;
        for (int t = 0; t < 100; ++t) {
            const AffineMap map = random_shape_regular_triangle(rng);
            const TraceConstant tc = scaled_trace_constant(p, map);
            CHECK(tc.kernel_dim == scalar_dim(p - 1) - 1);
            cmax = std::max(cmax, tc.constant);
            if (t < 10) {
                // Generalised eigenvalues of (M_boundary, A): the smallest
                // positive one is the inverse of the largest Rayleigh quotient
                // on the energy complement of the kernel.
                const Eigen::MatrixXd A = ZeroMeanStiffness(p + 2).matrix(map);
                const Eigen::MatrixXd M = boundary_mass_zero_mean(p + 2, map);
                Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(M, A);
                const Eigen::VectorXd mu = es.eigenvalues();
                double mu_min = 1e300;
                for (int i = 0; i < mu.size(); ++i)
                    if (mu[i] > 1e-10 * mu.maxCoeff()) mu_min = std::min(mu_min, mu[i]);
                const double oracle = std::sqrt(diameter(map) / mu_min);
                CHECK(tc.constant == doctest::Approx(oracle).epsilon(1e-8));

                // Uniform scaling about an arbitrary point.
                const double s = 0.01 + 3.0 * t;
                AffineMap scaled = map;
                scaled.origin = Vec2(2.0, -1.0) + s * map.origin;
                scaled.jac = s * map.jac;
                scaled.jac_inv_t = map.jac_inv_t / s;
                scaled.det = s * s * map.det;
                CHECK(std::abs(scaled_trace_constant(p, scaled).constant - tc.constant) < 1e-10 * tc.constant);
            }
        }
        CHECK(std::isfinite(cmax));
        MESSAGE("p=" << p << " max trace constant " << cmax);
    }
}
