#include "doctest.h"

#include "resmin/basis.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace resmin;

namespace {

const QuadRule& rule(int ex)
{
    static std::vector<QuadRule> cache(40);
    if (cache[ex].size() == 0) cache[ex] = quad_rule(ex, QuadRule::Variant::Triangle);
    return cache[ex];
}

// Random polynomial of total degree k as a monomial coefficient list.
struct MonomialPoly {
    int k;
    std::vector<double> c;
    double operator()(const Vec2& x) const
    {
        double s = 0.0;
        int i = 0;
        for (int d = 0; d <= k; ++d)
            for (int j = 0; j <= d; ++j) s += c[i++] * std::pow(x.x(), d - j) * std::pow(x.y(), j);
        return s;
    }
};

MonomialPoly random_poly(int k, std::mt19937& gen)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    MonomialPoly p{k, {}};
    for (int i = 0; i < scalar_dim(k); ++i) p.c.push_back(u(gen));
    return p;
}

} // namespace

TEST_CASE("zero-mean bases have the expected dimension and zero mean")
{
    CHECK(make_zero_mean_basis(1).size() == 2);
    CHECK(make_zero_mean_basis(3).size() == 9);
    CHECK_THROWS_AS(make_zero_mean_basis(0), std::invalid_argument);
    for (int k = 1; k <= 6; ++k) {
        const ScalarBasis b = make_zero_mean_basis(k);
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(b.size());
        const QuadRule& r = rule(2 * k);
        for (std::size_t q = 0; q < r.size(); ++q) mean += r.weights[q] * b.values(r.points[q]);
        CHECK(mean.cwiseAbs().maxCoeff() <= 1e-13);
    }
}

TEST_CASE("reference basis is orthonormal, hence linearly independent")
{
    for (int k = 0; k <= kMaxBasisDegree; ++k) {
        const ScalarBasis b(k, false);
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(b.size(), b.size());
        const QuadRule& r = rule(2 * k);
        for (std::size_t q = 0; q < r.size(); ++q) {
            const Eigen::VectorXd v = b.values(r.points[q]);
            G += r.weights[q] * v * v.transpose();
        }
        CHECK((G - Eigen::MatrixXd::Identity(b.size(), b.size())).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("gradient Gram matrix of the zero-mean degree-2 basis is nonsingular")
{
    const ScalarBasis b = make_zero_mean_basis(2);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(b.size(), b.size());
    const QuadRule& r = rule(2);
    for (std::size_t q = 0; q < r.size(); ++q) {
        const Eigen::MatrixXd g = b.gradients(r.points[q]);
        A += r.weights[q] * g * g.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
    const double cond = eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
    MESSAGE("condition number of the k=2 gradient Gram matrix: " << cond);
    CHECK(eig.eigenvalues().minCoeff() > 1e-3);
    CHECK(cond < 1e3);
}

TEST_CASE("zero-mean basis plus constants spans the full space")
{
    std::mt19937 gen(7);
    for (int k = 1; k <= 6; ++k) {
        const ScalarBasis zm = make_zero_mean_basis(k);
        CHECK(zm.size() + 1 == scalar_dim(k));
        const MonomialPoly f = random_poly(k, gen);
        const QuadRule& r = rule(2 * k + 2);
        const int n = static_cast<int>(r.size());
        Eigen::MatrixXd A(n, zm.size() + 1);
        Eigen::VectorXd y(n);
        for (int q = 0; q < n; ++q) {
            A(q, 0) = 1.0;
            A.row(q).tail(zm.size()) = zm.values(r.points[q]).transpose();
            y(q) = f(r.points[q]);
        }
        const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
        CHECK((A * c - y).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("gradients match central finite differences")
{
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> u(0.05, 0.45);
    const ScalarBasis b(5, false);
    const double h = 1e-6;
    for (int trial = 0; trial < 10; ++trial) {
        const Vec2 x(u(gen), u(gen));
        const Eigen::MatrixXd g = b.gradients(x);
        const Eigen::VectorXd dx = (b.values(x + Vec2(h, 0)) - b.values(x - Vec2(h, 0))) / (2 * h);
        const Eigen::VectorXd dy = (b.values(x + Vec2(0, h)) - b.values(x - Vec2(0, h))) / (2 * h);
        CHECK((g.col(0) - dx).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, g.cwiseAbs().maxCoeff()));
        CHECK((g.col(1) - dy).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, g.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("physical gradients follow the chain rule")
{
    const AffineMap F(Vec2(0.3, -0.2), Vec2(1.1, 0.1), Vec2(0.2, 0.9));
    const ScalarBasis b(3, false);
    const Vec2 xr(0.2, 0.3);
    const Eigen::MatrixXd g = b.gradients(xr, F);
    const double h = 1e-6;
    for (int d = 0; d < 2; ++d) {
        Vec2 e = Vec2::Zero();
        e(d) = h;
        const Vec2 xp = F.to_physical(xr);
        const Eigen::VectorXd fd = (b.values(F.to_reference(xp + e)) - b.values(F.to_reference(xp - e))) / (2 * h);
        CHECK((g.col(d) - fd).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("L2 projection")
{
    const AffineMap ref(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1));
    const AffineMap K(Vec2(0.1, 0.2), Vec2(0.9, 0.35), Vec2(0.4, 1.1));

    SUBCASE("polynomials are reproduced")
    {
        std::mt19937 gen(11);
        for (int r = 0; r <= 4; ++r) {
            const MonomialPoly f = random_poly(r, gen);
            const Eigen::VectorXd c = project_L2(f, K, r, rule(2 * r + 2));
            for (const auto& x : rule(6).points) CHECK(std::abs(eval_scalar(c, x) - f(K.to_physical(x))) <= 1e-12);
        }
    }
    SUBCASE("degree 0 gives the cell average")
    {
        auto f = [](const Vec2& x) { return std::sin(std::numbers::pi * x.x()); };
        const QuadRule& r = rule(20);
        const Eigen::VectorXd c = project_L2(f, K, 0, r);
        double mean = 0.0;
        for (std::size_t q = 0; q < r.size(); ++q) mean += r.weights[q] * f(K.to_physical(r.points[q]));
        mean /= 0.5;
        CHECK(std::abs(eval_scalar(c, Vec2(0.3, 0.3)) - mean) <= 1e-14);
    }
    SUBCASE("x^2 onto degree 1 matches a dense normal-equation oracle")
    {
        auto f = [](const Vec2& x) { return x.x() * x.x(); };
        const Eigen::VectorXd c = project_L2(f, ref, 1, rule(4));
        // Oracle in the monomial basis {1, x, y} with exact moments.
        auto mono = [](int a, int b) { return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0); };
        Eigen::Matrix3d G;
        G << mono(0, 0), mono(1, 0), mono(0, 1), mono(1, 0), mono(2, 0), mono(1, 1), mono(0, 1), mono(1, 1), mono(0, 2);
        const Eigen::Vector3d rhs(mono(2, 0), mono(3, 0), mono(2, 1));
        const Eigen::Vector3d m = G.ldlt().solve(rhs);
        for (const auto& x : rule(4).points)
            CHECK(std::abs(eval_scalar(c, x) - (m(0) + m(1) * x.x() + m(2) * x.y())) <= 1e-13);
    }
    SUBCASE("Galerkin orthogonality for a transcendental field")
    {
        auto f = [](const Vec2& x) { return std::exp(x.x()) * std::cos(2 * x.y()); };
        const QuadRule& r = rule(20);
        const Eigen::VectorXd c = project_L2(f, K, 3, r);
        const ScalarBasis b(3, false);
        Eigen::VectorXd res = Eigen::VectorXd::Zero(b.size());
        for (std::size_t q = 0; q < r.size(); ++q)
            res += r.weights[q] * (f(K.to_physical(r.points[q])) - eval_scalar(c, r.points[q])) * b.values(r.points[q]);
        CHECK(res.cwiseAbs().maxCoeff() <= 1e-13);
    }
}

TEST_CASE("composition of projections: Q^r Q^s = Q^min(r,s)")
{
    const AffineMap K(Vec2(-0.3, 0.2), Vec2(0.5, 0.1), Vec2(0.1, 0.8));
    std::mt19937 gen(5);
    const MonomialPoly f = random_poly(6, gen);
    const QuadRule& r = rule(16);
    for (int a = 0; a <= 4; ++a)
        for (int b = 0; b <= 4; ++b) {
            const Eigen::VectorXd inner = project_L2(f, K, b, r);
            auto g = [&](const Vec2& x) { return eval_scalar(inner, K.to_reference(x)); };
            const Eigen::VectorXd outer = project_L2(g, K, a, r);
            const Eigen::VectorXd direct = project_L2(f, K, std::min(a, b), r);
            Eigen::VectorXd padded = Eigen::VectorXd::Zero(outer.size());
            padded.head(std::min(outer.size(), direct.size())) = direct.head(std::min(outer.size(), direct.size()));
            CHECK((outer - padded).cwiseAbs().maxCoeff() <= 1e-11);
        }
}
