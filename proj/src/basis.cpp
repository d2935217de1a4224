#include "resmin/basis.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace resmin {

namespace {

long double factorial(int n)
{
    long double r = 1.0L;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// Evaluation runs in extended precision: the monomial expansion of the
// higher-degree orthonormal functions cancels heavily.
struct BasisTable {
    std::vector<std::array<int, 2>> exps;
    MatL coeffs_l; // lower triangular, phi = coeffs * monomials
    Eigen::MatrixXd coeffs;

    BasisTable()
    {
        for (int d = 0; d <= kMaxBasisDegree; ++d)
            for (int j = 0; j <= d; ++j) exps.push_back({d - j, j});
        const int n = static_cast<int>(exps.size());

        // Exact monomial Gram matrix: int_ref s^a t^b = a! b! / (a+b+2)!.
        MatL gram(n, n);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                const int a = exps[i][0] + exps[k][0];
                const int b = exps[i][1] + exps[k][1];
                gram(i, k) = factorial(a) * factorial(b) / factorial(a + b + 2);
            }
        Eigen::LLT<MatL> llt(gram);
        coeffs_l = llt.matrixL().solve(MatL::Identity(n, n));
        // Zero the strictly upper part explicitly so prefixes stay exact.
        for (int i = 0; i < n; ++i)
            for (int k = i + 1; k < n; ++k) coeffs_l(i, k) = 0.0L;
        coeffs = coeffs_l.cast<double>();
    }
};

const BasisTable& table()
{
    static const BasisTable t;
    return t;
}

// Powers x^0..x^d in extended precision.
std::array<long double, kMaxBasisDegree + 1> powers(long double x)
{
    std::array<long double, kMaxBasisDegree + 1> p{};
    p[0] = 1.0L;
    for (int i = 1; i <= kMaxBasisDegree; ++i) p[i] = p[i - 1] * x;
    return p;
}

VecL monomials(const Vec2& p, int n)
{
    const auto& e = table().exps;
    const auto px = powers(p.x()), py = powers(p.y());
    VecL m(n);
    for (int i = 0; i < n; ++i) m(i) = px[e[i][0]] * py[e[i][1]];
    return m;
}

MatL monomial_gradients(const Vec2& p, int n)
{
    const auto& e = table().exps;
    const auto px = powers(p.x()), py = powers(p.y());
    MatL g(n, 2);
    for (int i = 0; i < n; ++i) {
        const int a = e[i][0], b = e[i][1];
        g(i, 0) = a == 0 ? 0.0L : a * px[a - 1] * py[b];
        g(i, 1) = b == 0 ? 0.0L : b * px[a] * py[b - 1];
    }
    return g;
}

} // namespace

AffineMap::AffineMap(const Vec2& a, const Vec2& b, const Vec2& c) : origin(a)
{
    jac.col(0) = b - a;
    jac.col(1) = c - a;
    det = jac.determinant();
    jac_inv_t = jac.inverse().transpose();
}

ScalarBasis::ScalarBasis(int degree, bool zero_mean) : degree_(degree), zero_mean_(zero_mean)
{
    if (degree < 0 || degree > kMaxBasisDegree)
        throw std::invalid_argument("ScalarBasis: degree " + std::to_string(degree) + " outside [0, " +
                                    std::to_string(kMaxBasisDegree) + "]");
    if (zero_mean && degree == 0)
        throw std::invalid_argument("ScalarBasis: zero-mean space of degree 0 is trivial");
}

Eigen::VectorXd ScalarBasis::values(const Vec2& ref) const
{
    const int n = scalar_dim(degree_);
    const VecL v = table().coeffs_l.topLeftCorner(n, n).triangularView<Eigen::Lower>() * monomials(ref, n);
    return v.tail(size()).cast<double>();
}

Eigen::MatrixXd ScalarBasis::gradients(const Vec2& ref) const
{
    const int n = scalar_dim(degree_);
    const MatL g = table().coeffs_l.topLeftCorner(n, n).triangularView<Eigen::Lower>() * monomial_gradients(ref, n);
    return g.bottomRows(size()).cast<double>();
}

Eigen::MatrixXd ScalarBasis::gradients(const Vec2& ref, const AffineMap& map) const
{
    return gradients(ref) * map.jac_inv_t.transpose();
}

ScalarBasis make_zero_mean_basis(int k)
{
    if (k < 1) throw std::invalid_argument("make_zero_mean_basis: degree must be >= 1");
    return ScalarBasis(k, true);
}

int degree_from_size(int n)
{
    for (int k = 0; k <= kMaxBasisDegree; ++k)
        if (scalar_dim(k) == n) return k;
    throw std::invalid_argument("degree_from_size: " + std::to_string(n) + " is not a scalar space dimension");
}

Eigen::VectorXd project_L2(const ScalarField& f, const AffineMap& map, int r, const QuadRule& rule)
{
    const ScalarBasis basis(r, false);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.size());
    for (std::size_t q = 0; q < rule.size(); ++q)
        c += rule.weights[q] * f(map.to_physical(rule.points[q])) * basis.values(rule.points[q]);
    // Orthonormal reference basis: the reference weights already carry the
    // |det J| cancellation.
    return c;
}

double eval_scalar(const Eigen::VectorXd& coeffs, const Vec2& ref)
{
    const ScalarBasis basis(degree_from_size(static_cast<int>(coeffs.size())), false);
    return coeffs.dot(basis.values(ref));
}

Vec2 eval_scalar_gradient(const Eigen::VectorXd& coeffs, const Vec2& ref, const AffineMap& map)
{
    const ScalarBasis basis(degree_from_size(static_cast<int>(coeffs.size())), false);
    return basis.gradients(ref, map).transpose() * coeffs;
}

const Eigen::MatrixXd& basis_monomial_coefficients() { return table().coeffs; }
const std::vector<std::array<int, 2>>& basis_monomial_exponents() { return table().exps; }

} // namespace resmin
