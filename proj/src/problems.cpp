#include "resmin/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace resmin {

ProblemSpec linear_problem()
{
    ProblemSpec s;
    s.name = "linear";
    s.domain = DomainSpec::unit_square();
    s.f = [](const Vec2&) { return 0.0; };
    s.u_D = [](const Vec2& x) { return x.x(); };
    s.exact = ExactSolution{[](const Vec2& x) { return x.x(); }, [](const Vec2&) { return Vec2(-1.0, 0.0); }};
    return s;
}

ProblemSpec smooth_problem()
{
    constexpr double pi = std::numbers::pi;
    ProblemSpec s;
    s.name = "smooth";
    s.domain = DomainSpec::unit_square();
    s.f = [](const Vec2& x) {
        const double a = x.x(), b = x.y();
        return (2.0 + pi * pi * a * (1.0 - a)) * std::sin(pi * b);
    };
    s.u_D = [](const Vec2&) { return 0.0; };
    s.exact = ExactSolution{
        [](const Vec2& x) { return x.x() * (1.0 - x.x()) * std::sin(pi * x.y()); },
        [](const Vec2& x) {
            const double a = x.x(), b = x.y();
            return Vec2(-(1.0 - 2.0 * a) * std::sin(pi * b), -pi * a * (1.0 - a) * std::cos(pi * b));
        }};
    return s;
}

namespace {

// Polar angle in [-pi/2, pi] for points of the L-shape.
double lshape_angle(const Vec2& x)
{
    double t = std::atan2(x.y(), x.x());
    if (t < -0.75 * std::numbers::pi) t += 2.0 * std::numbers::pi;
    return t;
}

} // namespace

ProblemSpec lshape_problem()
{
    constexpr double pi = std::numbers::pi;
    constexpr double a = 2.0 / 3.0;
    ProblemSpec s;
    s.name = "lshape";
    s.domain = DomainSpec::lshape();
    s.initial_elements = 96;
    s.singular_point = Vec2(0.0, 0.0);
    auto u = [](const Vec2& x) {
        const double r = x.norm();
        if (r == 0.0) return 0.0;
        return std::pow(r, a) * std::sin(a * (pi - lshape_angle(x)));
    };
    s.f = [](const Vec2&) { return 0.0; };
    s.u_D = u;
    s.exact = ExactSolution{u, [](const Vec2& x) {
                                const double r = x.norm();
                                if (r == 0.0) return Vec2(0.0, 0.0);
                                const double t = lshape_angle(x);
                                const double ur = a * std::pow(r, a - 1.0) * std::sin(a * (pi - t));
                                const double ut = -a * std::pow(r, a - 1.0) * std::cos(a * (pi - t));
                                const Vec2 er(std::cos(t), std::sin(t)), et(-std::sin(t), std::cos(t));
                                return Vec2(-(ur * er + ut * et));
                            }};
    return s;
}

ProblemSpec advdiff_problem(double P)
{
    if (!(P > 0.0)) throw std::invalid_argument("advdiff_problem: P must be positive");
    ProblemSpec s;
    s.name = "advdiff";
    s.domain = DomainSpec::unit_square();
    s.initial_elements = 32;
    s.beta = Vec2(P, P);
    // (e^{Px}-1)/(e^P-1) written without large exponentials.
    auto layer = [P](double x) { return std::exp(P * (x - 1.0)) * std::expm1(-P * x) / std::expm1(-P); };
    auto layer_d = [P](double x) { return -P * std::exp(P * (x - 1.0)) / std::expm1(-P); };
    auto g = [layer](double x) { return x - layer(x); };
    auto dg = [layer_d](double x) { return 1.0 - layer_d(x); };
    s.f = [P, g](const Vec2& x) { return P * (g(x.x()) + g(x.y())); };
    s.u_D = [](const Vec2&) { return 0.0; };
    s.exact = ExactSolution{[g](const Vec2& x) { return g(x.x()) * g(x.y()); },
                            [g, dg](const Vec2& x) {
                                return Vec2(-dg(x.x()) * g(x.y()), -g(x.x()) * dg(x.y()));
                            }};
    return s;
}

ProblemSpec preset(const std::string& id)
{
    if (id == "linear") return linear_problem();
    if (id == "smooth") return smooth_problem();
    if (id == "lshape") return lshape_problem();
    if (id == "advdiff") return advdiff_problem();
    throw std::invalid_argument("unknown experiment '" + id + "' (expected linear, smooth, lshape or advdiff)");
}

QuadRule element_rule(const TriMesh& mesh, int k, const std::optional<Vec2>& singular, int exactness)
{
    QuadRule r = quad_rule(exactness, QuadRule::Variant::Triangle);
    if (!singular) return r;
    for (int v : mesh.triangle(k).v)
        if ((mesh.vertices()[v] - *singular).norm() < 1e-14) return subdivide(r, 2);
    return r;
}

} // namespace resmin
